import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wwlab import cutoffs

# normalized bump primitive, mpmath quadrature at 30 digits
SMOOTH_STEP_ORACLE = {0.1: 0.000018097865303854702635, 0.25: 0.031754957727637776386,
                      0.5: 0.5, 0.7: 0.92093509350187686384, 0.9: 0.99998190213469614536}


@pytest.mark.parametrize("t", sorted(SMOOTH_STEP_ORACLE))
def test_smooth_step_golden(t):
    assert cutoffs.smooth_step(np.array([t]))[0] == pytest.approx(SMOOTH_STEP_ORACLE[t], abs=1e-14)


def test_base_plateau_and_support():
    x = np.linspace(-3, 3, 2001)
    b = cutoffs.base(x)
    assert np.all(b[np.abs(x) <= 1.25] == 1.0)
    assert np.all(b[np.abs(x) >= 1.6] == 0.0)
    assert np.all(np.diff(b[x >= 0]) <= 0)
    assert np.allclose(b, b[::-1])


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 1e3), st.integers(-6, 6), st.integers(1, 6))
def test_partition_telescopes(x, lo, width):
    hi = lo + width
    total = cutoffs.le(x, lo - 1) + sum(cutoffs.shell(x, k) for k in range(lo, hi + 1)) \
        + cutoffs.gt(x, hi)
    assert total == pytest.approx(1.0, abs=1e-14)


def test_ge_and_lt_are_shifted_complements():
    x = np.geomspace(1e-3, 1e3, 200)
    assert np.allclose(cutoffs.ge(x, 3), 1 - cutoffs.le(x, 2))
    assert np.allclose(cutoffs.lt(x, 3), cutoffs.le(x, 2))


def test_clamped_partition_sums_to_one():
    x = np.geomspace(1e-4, 1e4, 300)
    total = sum(cutoffs.clamped(x, j, -2, 5) for j in range(-2, 6))
    assert np.allclose(total, 1.0, atol=1e-14)
    with pytest.raises(ValueError):
        cutoffs.clamped(x, 7, -2, 5)


@pytest.mark.parametrize("k", [-3, 0, 4])
def test_spatial_atoms_sum_to_one(k):
    x = np.linspace(0, 500, 4001)
    j0 = max(-k, 0)
    total = sum(cutoffs.spatial_atom(x, j, k) for j in range(j0, 12))
    assert np.allclose(total, 1.0, atol=1e-14)
    with pytest.raises(ValueError):
        cutoffs.spatial_atom(x, -1, k)


def test_interval_limits():
    x = np.array([0.0, 0.01, 1.0, 100.0])
    assert np.array_equal(cutoffs.interval(x, -np.inf, np.inf), [0, 1, 1, 1])
    assert np.allclose(cutoffs.interval(x, 2, 1), 0)
