import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairthresh.distributions import Empirical, Gaussian, cdf_tail, mixture


def test_gaussian_tail_symmetry():
    assert cdf_tail(Gaussian(70, 10), 70) == pytest.approx(0.5, abs=1e-12)


def test_tail_edges():
    g = Gaussian(70, 10)
    lo, hi = g.bounds
    assert cdf_tail(g, lo) == pytest.approx(1.0, abs=1e-9)
    assert cdf_tail(g, hi) == pytest.approx(0.0, abs=1e-9)
    assert cdf_tail(g, lo - 100) == 1.0
    assert cdf_tail(g, hi + 100) == 0.0


def test_uniform_empirical_tail():
    u = Empirical(np.linspace(0, 1, 11), np.ones(11))
    assert cdf_tail(u, 0.25) == pytest.approx(0.75, abs=1e-12)


def test_empirical_normalises_and_cdf_ends():
    e = Empirical(np.linspace(0, 4, 5), [1, 2, 3, 2, 1])
    assert np.trapezoid(e.density, e.grid) == pytest.approx(1.0, abs=1e-12)
    assert e.cdf(0.0) == pytest.approx(0.0, abs=1e-12)
    assert e.cdf(4.0) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("grid", [[0.0], [1.0, 0.0], [0.0, 1.0, 1.0]])
def test_empirical_rejects_bad_grid(grid):
    with pytest.raises(ValueError):
        Empirical(np.array(grid), np.ones(len(grid)))


def test_gaussian_inverse_tail_matches_quantile():
    g = Gaussian(50, 10)
    # 1 - Phi(1) is the tail one standard deviation above the mean
    t = 0.5 * math.erfc(1 / math.sqrt(2))
    assert g.inverse_tail(t) == pytest.approx(60.0, abs=1e-9)


def test_mixture_of_same_grid_collapses():
    grid = np.linspace(0, 1, 21)
    a = Empirical(grid, grid)
    b = Empirical(grid, 1 - grid)
    m = mixture([a, b], [0.5, 0.5])
    assert isinstance(m, Empirical)
    np.testing.assert_allclose(m.pdf(grid), 1.0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    mean=st.floats(-50, 50),
    std=st.floats(0.5, 20),
    a=st.floats(-1, 1),
    b=st.floats(-1, 1),
)
def test_tail_nonincreasing_and_bounded(mean, std, a, b):
    g = Gaussian(mean, std)
    lo, hi = mean + min(a, b) * 4 * std, mean + max(a, b) * 4 * std
    assert 0.0 <= g.tail(hi) <= g.tail(lo) <= 1.0


@settings(max_examples=40, deadline=None)
@given(
    weights=st.lists(st.floats(0.0, 5.0), min_size=3, max_size=30).filter(lambda w: sum(w) > 0.1),
    t=st.floats(0.01, 0.99),
)
def test_empirical_inverse_tail_roundtrip(weights, t):
    e = Empirical(np.linspace(0, 10, len(weights)), weights)
    x = e.inverse_tail(t)
    assert e.tail(x) == pytest.approx(t, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(weights=st.lists(st.floats(0.0, 5.0), min_size=3, max_size=30).filter(lambda w: sum(w) > 0.1))
def test_empirical_tail_has_no_jumps(weights):
    e = Empirical(np.linspace(0, 10, len(weights)), weights)
    fine = np.linspace(0, 10, 2001)
    tails = e.tail(fine)
    assert np.all(np.diff(tails) <= 1e-12)
    # a jump could at most be one cell's mass; continuity means steps shrink with spacing
    assert np.max(-np.diff(tails)) <= e.density.max() * (fine[1] - fine[0]) + 1e-12
