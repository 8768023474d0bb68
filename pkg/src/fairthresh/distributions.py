"""One-dimensional score densities.

Three concrete kinds share one interface:

* :class:`Gaussian` -- analytic normal density truncated to ``mean +/- 8 std``
  (the truncated mass is below 1e-14 and is ignored).
* :class:`Empirical` -- nonnegative density values on an ascending grid,
  normalised with the trapezoidal rule.  The CDF is the cumulative trapezoid
  at the nodes and is linearly interpolated inside a cell.
* :class:`Mixture` -- a weighted sum of the above.  Label-flip biases produce
  exactly such mixtures, which keeps biased Gaussian populations analytic.

All tail, CDF and density queries are vectorised over ``x``.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, special

from .errors import InconsistentInput

TRUNCATION_STDS = 8.0


class ScoreDistribution(ABC):
    """Common interface for score densities with support ``[x_min, x_max]``."""

    kind: str

    @property
    @abstractmethod
    def bounds(self) -> tuple[float, float]: ...

    @property
    def x_min(self) -> float:
        return self.bounds[0]

    @property
    def x_max(self) -> float:
        return self.bounds[1]

    @abstractmethod
    def pdf(self, x): ...

    @abstractmethod
    def dpdf(self, x):
        """Derivative of the density with respect to the score."""

    @abstractmethod
    def tail(self, theta):
        """Probability mass at or above ``theta`` (``1 - CDF``)."""

    def logpdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))

    def cdf(self, x):
        return 1.0 - self.tail(x)

    def inverse_tail(self, t: float) -> float:
        """Smallest score whose tail mass equals ``t``."""
        lo, hi = self.bounds
        if t >= self.tail(lo):
            return lo
        if t <= self.tail(hi):
            return hi
        return optimize.brentq(lambda x: float(self.tail(x)) - t, lo, hi, xtol=1e-13, rtol=1e-15)

    def inverse_cdf(self, p: float) -> float:
        """Score with ``CDF = p``; keeps precision for ``p`` near 0."""
        lo, hi = self.bounds
        if p <= self.cdf(lo):
            return lo
        if p >= self.cdf(hi):
            return hi
        return optimize.brentq(lambda x: float(self.cdf(x)) - p, lo, hi, xtol=1e-13, rtol=1e-15)

    def mean(self) -> float:
        grid = np.linspace(*self.bounds, 20001)
        return float(np.trapezoid(grid * self.pdf(grid), grid))

    @abstractmethod
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray: ...

    @abstractmethod
    def shifted(self, delta: float) -> "ScoreDistribution":
        """Density of ``X - delta``, keeping the same support bounds."""

    def on_grid(self, grid) -> "Empirical":
        grid = np.asarray(grid, dtype=float)
        return Empirical(grid, self.pdf(grid))


class Gaussian(ScoreDistribution):
    kind = "gaussian"

    def __init__(self, mean: float, std: float, bounds: tuple[float, float] | None = None):
        if not std > 0:
            raise InconsistentInput(f"std must be positive, got {std}")
        self.mu = float(mean)
        self.std = float(std)
        if bounds is None:
            bounds = (self.mu - TRUNCATION_STDS * self.std, self.mu + TRUNCATION_STDS * self.std)
        self._bounds = (float(bounds[0]), float(bounds[1]))

    def __repr__(self):
        return f"Gaussian(mean={self.mu:g}, std={self.std:g})"

    def __eq__(self, other):
        return (
            isinstance(other, Gaussian)
            and (self.mu, self.std, self._bounds) == (other.mu, other.std, other._bounds)
        )

    def __hash__(self):
        return hash((self.mu, self.std, self._bounds))

    @property
    def bounds(self):
        return self._bounds

    def _z(self, x):
        return (np.asarray(x, dtype=float) - self.mu) / self.std

    def pdf(self, x):
        z = self._z(x)
        return np.exp(-0.5 * z * z) / (self.std * np.sqrt(2 * np.pi))

    def logpdf(self, x):
        z = self._z(x)
        return -0.5 * z * z - np.log(self.std * np.sqrt(2 * np.pi))

    def dpdf(self, x):
        return -self._z(x) / self.std * self.pdf(x)

    def tail(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = special.ndtr(-self._z(theta))
        lo, hi = self._bounds
        return np.where(theta <= lo, 1.0, np.where(theta >= hi, 0.0, out))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = special.ndtr(self._z(x))
        lo, hi = self._bounds
        return np.where(x <= lo, 0.0, np.where(x >= hi, 1.0, out))

    def inverse_cdf(self, p):
        lo, hi = self._bounds
        if p <= 0.0:
            return lo
        if p >= 1.0:
            return hi
        return float(min(max(self.mu + self.std * special.ndtri(p), lo), hi))

    def inverse_tail(self, t):
        lo, hi = self._bounds
        if t >= 1.0:
            return lo
        if t <= 0.0:
            return hi
        x = self.mu - self.std * special.ndtri(t)
        return float(min(max(x, lo), hi))

    def mean(self):
        return self.mu

    def sample(self, rng, size):
        return rng.normal(self.mu, self.std, size)

    def shifted(self, delta):
        return Gaussian(self.mu - delta, self.std, self._bounds)

    def affine(self, scale: float, offset: float) -> "Gaussian":
        """Density of ``scale * X + offset``."""
        return Gaussian(scale * self.mu + offset, abs(scale) * self.std, self._bounds)


class Empirical(ScoreDistribution):
    kind = "empirical"

    def __init__(self, grid: Sequence[float], density: Sequence[float]):
        grid = np.asarray(grid, dtype=float)
        density = np.asarray(density, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise InconsistentInput("empirical grid needs at least 2 cells")
        if grid.shape != density.shape:
            raise InconsistentInput("grid and density lengths differ")
        if not np.all(np.diff(grid) > 0):
            raise InconsistentInput("empirical grid must be strictly ascending")
        if np.any(density < 0) or not np.all(np.isfinite(density)):
            raise InconsistentInput("empirical density must be finite and nonnegative")
        cells = 0.5 * (density[1:] + density[:-1]) * np.diff(grid)
        total = cells.sum()
        if not total > 0:
            raise InconsistentInput("empirical density has zero mass")
        self.grid = grid
        self.density = density / total
        self.raw_mass = float(total)
        cum = np.concatenate([[0.0], np.cumsum(cells / total)])
        cum[-1] = 1.0
        self._cdf_nodes = cum
        self.grid.setflags(write=False)
        self.density.setflags(write=False)

    def __repr__(self):
        return f"Empirical(n={self.grid.size}, range=[{self.grid[0]:g}, {self.grid[-1]:g}])"

    @property
    def bounds(self):
        return float(self.grid[0]), float(self.grid[-1])

    @property
    def step(self) -> float:
        return float(np.min(np.diff(self.grid)))

    def pdf(self, x):
        return np.interp(x, self.grid, self.density, left=0.0, right=0.0)

    def dpdf(self, x):
        x = np.asarray(x, dtype=float)
        slopes = np.diff(self.density) / np.diff(self.grid)
        idx = np.clip(np.searchsorted(self.grid, x, side="right") - 1, 0, slopes.size - 1)
        inside = (x >= self.grid[0]) & (x <= self.grid[-1])
        return np.where(inside, slopes[idx], 0.0)

    def tail(self, theta):
        return 1.0 - np.interp(theta, self.grid, self._cdf_nodes, left=0.0, right=1.0)

    def cdf(self, x):
        return np.interp(x, self.grid, self._cdf_nodes, left=0.0, right=1.0)

    def inverse_tail(self, t):
        target = 1.0 - t
        cdf = self._cdf_nodes
        if target <= 0.0:
            return float(self.grid[0])
        if target >= 1.0:
            # first node where all mass is accounted for
            return float(self.grid[np.searchsorted(cdf, 1.0, side="left")])
        i = int(np.searchsorted(cdf, target, side="left"))
        i = min(max(i, 1), cdf.size - 1)
        c0, c1 = cdf[i - 1], cdf[i]
        frac = 0.0 if c1 == c0 else (target - c0) / (c1 - c0)
        return float(self.grid[i - 1] + frac * (self.grid[i] - self.grid[i - 1]))

    def mean(self):
        return float(np.trapezoid(self.grid * self.density, self.grid))

    def sample(self, rng, size):
        u = rng.random(size)
        return np.interp(u, self._cdf_nodes, self.grid)

    def shifted(self, delta):
        moved = np.interp(self.grid + delta, self.grid, self.density, left=0.0, right=0.0)
        return Empirical(self.grid, moved)

    def pushforward(self, transform: Callable, grid=None) -> "Empirical":
        """Density of ``transform(X)`` for an increasing ``transform``, on ``grid``."""
        return _pushforward(self, transform, self.grid if grid is None else grid)


class Mixture(ScoreDistribution):
    """Weighted sum of component densities.

    Weights are expected to be nonnegative and sum to one.  Small negative
    weights are tolerated so that bias transforms can be extended just past
    their valid parameter range for central finite differences.
    """

    kind = "mixture"

    def __init__(self, components: Sequence[ScoreDistribution], weights: Sequence[float]):
        if len(components) != len(weights) or not components:
            raise InconsistentInput("mixture needs matching, nonempty components and weights")
        w = np.asarray(weights, dtype=float)
        if abs(w.sum() - 1.0) > 1e-9:
            raise InconsistentInput(f"mixture weights sum to {w.sum()}, expected 1")
        self.components = tuple(components)
        self.weights = w

    def __repr__(self):
        parts = ", ".join(f"{w:.4g}*{c!r}" for w, c in zip(self.weights, self.components))
        return f"Mixture({parts})"

    @property
    def bounds(self):
        return (
            min(c.x_min for c in self.components),
            max(c.x_max for c in self.components),
        )

    def _sum(self, method, x):
        return sum(w * getattr(c, method)(x) for w, c in zip(self.weights, self.components))

    def pdf(self, x):
        return self._sum("pdf", x)

    def dpdf(self, x):
        return self._sum("dpdf", x)

    def tail(self, theta):
        return self._sum("tail", theta)

    def cdf(self, x):
        return self._sum("cdf", x)

    def mean(self):
        return float(sum(w * c.mean() for w, c in zip(self.weights, self.components)))

    def sample(self, rng, size):
        if np.any(self.weights < 0):
            raise InconsistentInput("cannot sample a mixture with negative weights")
        which = rng.choice(len(self.components), size=size, p=self.weights)
        out = np.empty(size)
        for k, comp in enumerate(self.components):
            mask = which == k
            out[mask] = comp.sample(rng, int(mask.sum()))
        return out

    def shifted(self, delta):
        return Mixture([c.shifted(delta) for c in self.components], self.weights)


def mixture(components: Sequence[ScoreDistribution], weights: Sequence[float]) -> ScoreDistribution:
    """Build a mixture, collapsing trivial and same-grid empirical cases.

    Empirical components on an identical grid are summed node-wise, which is
    exact because the trapezoidal CDF is linear in the density values.
    """
    pairs = [(c, float(w)) for c, w in zip(components, weights) if w != 0.0]
    if len(pairs) == 1 and abs(pairs[0][1] - 1.0) < 1e-15:
        return pairs[0][0]
    comps = [c for c, _ in pairs]
    ws = [w for _, w in pairs]
    if comps and all(isinstance(c, Empirical) for c in comps):
        grid = comps[0].grid
        if all(c.grid.shape == grid.shape and np.array_equal(c.grid, grid) for c in comps):
            dens = sum(w * c.density for c, w in zip(comps, ws))
            if np.all(dens >= 0):
                return Empirical(grid, dens)
    return Mixture(comps, ws)


def cdf_tail(dist: ScoreDistribution, theta):
    """``1 - F(theta)``; equals 1 below the support and 0 above it."""
    return dist.tail(theta)


def _pushforward(dist: ScoreDistribution, transform: Callable, grid) -> Empirical:
    grid = np.asarray(grid, dtype=float)
    lo, hi = dist.bounds
    src = np.linspace(lo, hi, max(4001, 4 * grid.size))
    dst = np.asarray(transform(src), dtype=float)
    jac = np.gradient(dst, src)
    if np.any(jac <= 0):
        raise InconsistentInput("measurement map must be strictly increasing")
    dens = dist.pdf(src) / jac
    return Empirical(grid, np.interp(grid, dst, dens, left=0.0, right=0.0))


def pushforward(dist: ScoreDistribution, transform: Callable, grid) -> Empirical:
    """Density of ``transform(X)`` tabulated on ``grid`` (``transform`` increasing)."""
    return _pushforward(dist, transform, grid)
