import math

import numpy as np
import pytest

from logfactor.errors import ParameterError
from logfactor.protocol import ProtocolConfig, build_physics, execute, plan, prepare, resonance_margin, run
from logfactor.spectrum import level_3d

PRIMES = [5, 7, 11, 13, 17, 19, 23, 29, 31]


def test_prepare_examples():
    c = prepare(60, 3)
    assert (c.N, c.removed, c.status) == (15, (2, 2), "ready")
    c = prepare(15, 3)
    assert (c.N, c.removed) == (15, ())
    c = prepare(16, 3)
    assert c.status == "trivial" and c.N == 1
    assert prepare(13, 3).status == "prime"
    with pytest.raises(ParameterError):
        prepare(15, 4)


def test_config_invariants():
    with pytest.raises(ParameterError):
        ProtocolConfig(N=30, L=3)
    with pytest.raises(ParameterError):
        ProtocolConfig(N=15, L=5)     # 15 is divisible by 3 <= K = 3


def test_trivial_not_run():
    res = run(prepare(16, 3))
    assert res.status == "trivial" and res.factors is None and res.attempts == 0


def test_resonance_margin():
    assert math.isclose(resonance_margin(15, 2), math.log(16 / 15))
    assert abs(resonance_margin(100, 2) * 100 - 1) < 0.01
    assert abs(resonance_margin(10**6, 2) * 10**6 - 1) < 1e-5


def test_omega_ext_matches_level_sum():
    for p, q in [(5, 3), (7, 5), (13, 11)]:
        c = prepare(p * q, 3)
        assert abs(c.omega_ext - level_3d(p - 2, 2) - level_3d(q - 2, 2)) < 1e-14


def test_N15_rwa(physics24):
    res = run(prepare(15, 3, seed=11), physics24)
    assert res.status == "factored" and res.factors == (5, 3)
    d = res.to_dict()
    for key in ("N", "L", "K", "factors", "attempts", "Omega", "margin", "seed", "mode"):
        assert key in d
    assert abs(res.diagnostics["detuning_nearest_other"] - res.margin) < 1e-8


def test_attempts_geometric(physics24):
    p = plan(prepare(15, 3), physics24)
    att = np.array([execute(p, s).attempts for s in range(1000)])
    assert 1.8 <= att.mean() <= 2.2
    # P(attempts = 1) close to 1/2
    assert abs(np.mean(att == 1) - 0.5) < 0.05


def test_equal_factors(physics24):
    res = run(prepare(9, 3, seed=2), physics24)
    assert res.factors == (3, 3)
    assert res.N * 1 == 9


def test_predivided_product(physics24):
    res = run(prepare(4 * 35, 3, seed=5), physics24)
    assert res.factors[0] * res.factors[1] * math.prod(res.removed) == 140


def test_truncated_when_levels_missing(physics24):
    # 29 * 23: factor state needs j = 27, far above the 12 fitted s-levels
    res = run(prepare(29 * 23, 3), physics24)
    assert res.status == "truncated" and not res.ok


@pytest.mark.parametrize("L", [3, 5])
def test_all_small_semiprimes(L):
    K = (L + 1) // 2
    phys = build_physics(L, 60)
    for i, p in enumerate(PRIMES):
        for q in PRIMES[: i + 1]:
            if q <= K:
                continue
            pl = plan(prepare(p * q, L), phys)
            results = [execute(pl, s) for s in range(2000)]
            assert all(r.factors == (p, q) for r in results)
            rate = len(results) / sum(r.attempts for r in results)
            assert 0.45 <= rate <= 0.55
