import pytest

from logfactor.inverse import InversionConfig, invert_spectrum
from logfactor.protocol import build_physics
from logfactor.radial import lift_to_3d

ACCEPTANCE = {}


@pytest.fixture(scope="session")
def inv3():
    return invert_spectrum(InversionConfig(3))


@pytest.fixture(scope="session")
def basis3(inv3):
    # s-states plus l <= 5 channels of the L=3 well
    return lift_to_3d(inv3, ell_max=5)


@pytest.fixture(scope="session")
def physics24():
    return build_physics(3, 24)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
