import math

import pytest
from hypothesis import given, strategies as st

from logfactor.errors import DecodeError, InconsistencyError, ParameterError, ProtocolDomainError
from logfactor.spectrum import (Semiprime, SpectrumTarget, factor_from_energy, factor_state_of,
                                is_prime, level_1d, level_3d, predivide, splittings)

PRIMES = [p for p in range(2, 200) if all(p % d for d in range(2, int(p**0.5) + 1))]


def test_level_1d_values():
    assert level_1d(0, 3) == 0.0
    assert math.isclose(level_1d(3, 3), math.log(2), rel_tol=0, abs_tol=1e-15)
    assert math.isclose(level_1d(6, 3), math.log(3), rel_tol=0, abs_tol=1e-15)


@pytest.mark.parametrize("L", [2, 4, 1, 0])
def test_even_or_small_L_rejected(L):
    with pytest.raises(ParameterError):
        level_1d(1, L)


def test_level_3d_values():
    assert math.isclose(level_3d(1, 2), math.log(1.5), abs_tol=1e-15)
    assert math.isclose(level_3d(3, 2), math.log(2.5), abs_tol=1e-15)


@given(st.integers(0, 500), st.integers(1, 40))
def test_shift_identity(j, half):
    # odd 1D level minus the first odd level lands on the 3D ladder with K = (L+1)/2
    L = 2 * half + 1
    K = half + 1
    lhs = level_1d(2 * j + 1, L) - level_1d(1, L)
    assert abs(lhs - level_3d(j, K)) < 1e-14


@given(st.integers(3, 99).filter(lambda L: L % 2), st.integers(0, 1000))
def test_levels_increase(L, k):
    assert level_1d(k + 1, L) > level_1d(k, L)


def test_spectrum_target():
    t = SpectrumTarget(3)
    assert t.K == 2
    assert math.isclose(t.shift, math.log(4 / 3), abs_tol=1e-16)


def test_factor_state():
    fs = factor_state_of(Semiprime(15, 5, 3), 2)
    assert (fs.j1, fs.j2) == (3, 1)
    assert math.isclose(fs.total_energy, math.log(15 / 4))
    with pytest.raises(ProtocolDomainError):
        factor_state_of(Semiprime(21, 7, 3), 3)


def test_semiprime_validation():
    with pytest.raises(ParameterError):
        Semiprime(15, 5, 2)
    with pytest.raises(ParameterError):
        Semiprime(16, 4, 4)


def test_decode_examples():
    assert factor_from_energy(math.log(5 / 2), 2, 15) == (5, 3)
    assert factor_from_energy(math.log(3 / 2), 2, 15) == (3, 5)
    with pytest.raises(InconsistencyError):
        factor_from_energy(math.log(2), 2, 15)     # j = 2 -> q = 4
    with pytest.raises(DecodeError):
        factor_from_energy(0.0, 2, 15)
    with pytest.raises(DecodeError):
        factor_from_energy(level_3d(3, 2) + 0.01, 2, 35, tol=1e-3)
    # within the default half-gap tolerance the nearest level is accepted
    assert factor_from_energy(level_3d(3, 2) + 0.01, 2, 35) == (5, 7)


@pytest.mark.parametrize("K", [2, 3, 5])
def test_decode_recovers_all_factor_pairs(K):
    for i, p in enumerate(PRIMES):
        for q in PRIMES[: i + 1]:
            if q <= K:
                continue
            fs = factor_state_of(Semiprime.from_factors(p, q), K)
            for j in (fs.j1, fs.j2):
                got = factor_from_energy(level_3d(j, K), K, p * q)
                assert set(got) == {p, q}


@pytest.mark.parametrize("K", [2, 3])
def test_energy_split_unique_for_semiprimes(K):
    for i, p in enumerate(PRIMES):
        for q in PRIMES[: i + 1]:
            if q > K:
                assert splittings(p * q, K) == [(p - K, q - K)]


def test_predivide():
    assert predivide(60, 2) == (15, [2, 2])
    assert predivide(15, 2) == (15, [])
    assert predivide(16, 2) == (1, [2, 2, 2, 2])
    assert is_prime(97) and not is_prime(91)
