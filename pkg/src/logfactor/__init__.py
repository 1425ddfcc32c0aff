"""Factoring with bosons in a well with a logarithmic spectrum: numerical toolkit."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .spectrum import (SpectrumTarget, Semiprime, FactorState, level_1d, level_3d,  # noqa: F401
                       factor_state_of, factor_from_energy)
from .eigensolver import Grid, PotentialOnGrid, EigenPair, solve_lowest, dirichlet_halfline  # noqa: F401
from .inverse import InversionConfig, InversionReport, invert_spectrum, hf_update  # noqa: F401
from .radial import RadialBasis, lift_to_3d, solve_ell_channel, audit_degeneracy  # noqa: F401
from .interaction import QuantumTriple, w_ground_to, w_general, scaling_probe  # noqa: F401
from .dynamics import (DriveSpec, build_basis, evolve_full, rwa_solution,  # noqa: F401
                       sample_measurement)
from .protocol import ProtocolConfig, prepare, run, resonance_margin  # noqa: F401
from .limits import LimitInputs, max_semiprime, rabi_window_check  # noqa: F401
from .classical import OrbitConfig, integrate_orbit, apsidal_angle  # noqa: F401
