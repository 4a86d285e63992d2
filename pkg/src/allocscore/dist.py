"""Univariate predictive distributions.

Provides closed-form families (exponential, normal, lognormal) and a
distribution reconstructed from a finite set of predictive quantiles:
monotone cubic interpolation on the interior, normal tails fitted to the
two most extreme quantile pairs on each side, and extraction of point
masses signalled by repeated quantile values.

Every distribution exposes three operations:

- ``cdf(x)``: P(Y <= x)
- ``quantile(tau)``: generalized inverse inf{x : cdf(x) >= tau}
  (left-continuous convention on flat regions)
- ``expected_shortage(x)``: E[(Y - x)+], the expected unmet need when
  supply is x
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.stats import norm

from .errors import DegenerateTail, UnboundedQuantile

__all__ = [
    "QuantileSet",
    "PointMass",
    "MarginalDistribution",
    "Exponential",
    "Normal",
    "LogNormal",
    "QuantileReconstructed",
    "from_quantiles",
    "DEFAULT_QUANTILE_LEVELS",
]

# Median plus lower/upper limits of 11 central prediction intervals
# (98% down to 10%): the standard 23-level hub submission format.
DEFAULT_QUANTILE_LEVELS = tuple(
    [0.01, 0.025, 0.05]
    + [round(0.05 * i, 2) for i in range(2, 19)]
    + [0.95, 0.975, 0.99]
)


def _check_level(tau):
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0.0) or np.any(tau > 1.0):
        raise ValueError("probability level must lie in [0, 1]")
    return tau


@dataclass(frozen=True)
class QuantileSet:
    """Ascending probability levels paired with non-decreasing quantile values."""

    levels: tuple
    values: tuple

    def __post_init__(self):
        levels = tuple(float(t) for t in self.levels)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "values", values)
        if len(levels) != len(values):
            raise ValueError("levels and values must have the same length")
        if len(levels) < 2:
            raise ValueError("at least two quantiles are required")
        if any(not 0.0 <= t <= 1.0 for t in levels):
            raise ValueError("levels must lie in [0, 1]")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("levels must be strictly ascending")
        if any(b < a for a, b in zip(values, values[1:])):
            raise ValueError("values must be non-decreasing")
        if any(not math.isfinite(v) for v in values):
            raise ValueError("values must be finite")


@dataclass(frozen=True)
class PointMass:
    """A discrete atom at ``location`` carrying probability ``mass``."""

    location: float
    mass: float

    def __post_init__(self):
        if not 0.0 < self.mass <= 1.0:
            raise ValueError("mass must lie in (0, 1]")


class MarginalDistribution:
    """Interface shared by all univariate predictive distributions."""

    def cdf(self, x):
        raise NotImplementedError

    def quantile(self, tau):
        raise NotImplementedError

    def expected_shortage(self, x):
        """E[(Y - x)+]; non-increasing and convex in x."""
        raise NotImplementedError

    def mean(self):
        raise NotImplementedError


class Exponential(MarginalDistribution):
    """Exponential distribution with scale sigma (mean sigma)."""

    def __init__(self, scale):
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)

    def __repr__(self):
        return f"Exponential(scale={self.scale})"

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < 0, 0.0, -np.expm1(-np.maximum(x, 0.0) / self.scale))
        return float(out) if out.ndim == 0 else out

    def quantile(self, tau):
        tau = _check_level(tau)
        if np.any(tau >= 1.0):
            raise UnboundedQuantile("tau=1 with unbounded upper support")
        out = -self.scale * np.log1p(-tau)
        return float(out) if out.ndim == 0 else out

    def expected_shortage(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(
            x < 0,
            self.scale - x,
            self.scale * np.exp(-np.maximum(x, 0.0) / self.scale),
        )
        return float(out) if out.ndim == 0 else out

    def mean(self):
        return self.scale


class Normal(MarginalDistribution):
    def __init__(self, mean, sd):
        if sd <= 0:
            raise ValueError("sd must be positive")
        self.mu = float(mean)
        self.sd = float(sd)

    def __repr__(self):
        return f"Normal(mean={self.mu}, sd={self.sd})"

    def cdf(self, x):
        out = norm.cdf(x, loc=self.mu, scale=self.sd)
        return float(out) if np.ndim(x) == 0 else out

    def quantile(self, tau):
        tau = _check_level(tau)
        if np.any(tau >= 1.0):
            raise UnboundedQuantile("tau=1 with unbounded upper support")
        if np.ndim(tau) == 0 and tau == 0.0:
            return -math.inf
        out = norm.ppf(tau, loc=self.mu, scale=self.sd)
        return float(out) if out.ndim == 0 else out

    def expected_shortage(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.mu) / self.sd
        out = self.sd * norm.pdf(z) + (self.mu - x) * norm.sf(z)
        return float(out) if out.ndim == 0 else out

    def mean(self):
        return self.mu


class LogNormal(MarginalDistribution):
    """LogNormal: log Y ~ Normal(mu, sigma)."""

    def __init__(self, mu, sigma):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        self.mu = float(mu)
        self.sigma = float(sigma)

    def __repr__(self):
        return f"LogNormal(mu={self.mu}, sigma={self.sigma})"

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(
                x <= 0, 0.0, norm.cdf((np.log(np.maximum(x, 1e-300)) - self.mu) / self.sigma)
            )
        return float(out) if out.ndim == 0 else out

    def quantile(self, tau):
        tau = _check_level(tau)
        if np.any(tau >= 1.0):
            raise UnboundedQuantile("tau=1 with unbounded upper support")
        out = np.exp(self.mu + self.sigma * norm.ppf(tau))
        return float(out) if out.ndim == 0 else out

    def expected_shortage(self, x):
        x = np.asarray(x, dtype=float)
        m = self.mean()
        with np.errstate(divide="ignore"):
            z = np.where(x <= 0, -np.inf, (np.log(np.maximum(x, 1e-300)) - self.mu) / self.sigma)
        out = np.where(
            x <= 0,
            m - x,
            m * norm.sf(z - self.sigma) - x * norm.sf(z),
        )
        return float(out) if out.ndim == 0 else out

    def mean(self):
        return math.exp(self.mu + 0.5 * self.sigma**2)


def _normal_partial_shortage(mu, sd, x, u_lo, u_hi):
    """Integral of max(0, mu + sd*z - x) phi(z) dz over z in [ppf(u_lo), ppf(u_hi)].

    Equivalently the contribution of the quantile-space slice [u_lo, u_hi]
    of a Normal(mu, sd) to E[(Y - x)+].
    """
    if u_hi <= u_lo:
        return 0.0
    z_lo = norm.ppf(u_lo) if u_lo > 0.0 else -math.inf
    z_hi = norm.ppf(u_hi) if u_hi < 1.0 else math.inf
    z0 = (x - mu) / sd
    a = max(z_lo, z0)
    if a >= z_hi:
        return 0.0
    phi_a = norm.pdf(a) if math.isfinite(a) else 0.0
    phi_b = norm.pdf(z_hi) if math.isfinite(z_hi) else 0.0
    cdf_a = norm.cdf(a)
    cdf_b = norm.cdf(z_hi) if math.isfinite(z_hi) else 1.0
    return (mu - x) * (cdf_b - cdf_a) + sd * (phi_a - phi_b)


@dataclass(frozen=True)
class _NormalTail:
    mu: float
    sd: float


class QuantileReconstructed(MarginalDistribution):
    """Distribution rebuilt from a finite quantile set.

    Mixture of zero or more point masses and a continuous part whose
    quantile function is a Fritsch-Carlson monotone cubic spline through
    the (rescaled level, value) knots, extended beyond the extreme knots
    with normal tails matching the two outermost knots on each side.
    """

    def __init__(self, knot_levels, knot_values, lower_tail, upper_tail, point_masses):
        self._levels = np.asarray(knot_levels, dtype=float)
        self._values = np.asarray(knot_values, dtype=float)
        self._lower = lower_tail
        self._upper = upper_tail
        self.point_masses = tuple(point_masses)
        self.continuous_weight = 1.0 - sum(pm.mass for pm in self.point_masses)
        if self.continuous_weight < -1e-12:
            raise ValueError("point masses exceed total probability")
        self._spline = PchipInterpolator(self._levels, self._values, extrapolate=False)
        self._u_lo = float(self._levels[0])
        self._u_hi = float(self._levels[-1])
        self._x_lo = float(self._values[0])
        self._x_hi = float(self._values[-1])

    def __repr__(self):
        return (
            f"QuantileReconstructed({len(self._levels)} knots, "
            f"{len(self.point_masses)} point masses)"
        )

    # -- continuous component ------------------------------------------------

    def _continuous_quantile(self, u):
        if u <= 0.0:
            return -math.inf
        if u >= 1.0:
            return math.inf
        if u < self._u_lo:
            return self._lower.mu + self._lower.sd * norm.ppf(u)
        if u > self._u_hi:
            return self._upper.mu + self._upper.sd * norm.ppf(u)
        return float(self._spline(u))

    def _continuous_cdf(self, x):
        if x < self._x_lo:
            return float(norm.cdf((x - self._lower.mu) / self._lower.sd))
        if x > self._x_hi:
            return float(norm.cdf((x - self._upper.mu) / self._upper.sd))
        if x == self._x_lo:
            return self._u_lo
        if x == self._x_hi:
            return self._u_hi
        # Invert the spline; it is strictly increasing between distinct knots.
        u = optimize.brentq(
            lambda u: float(self._spline(u)) - x,
            self._u_lo,
            self._u_hi,
            xtol=1e-12,
            rtol=8.9e-16,
        )
        return float(u)

    def _continuous_shortage(self, x):
        # E[(Yc - x)+] split into lower-tail, spline interior, upper-tail.
        total = _normal_partial_shortage(self._lower.mu, self._lower.sd, x, 0.0, self._u_lo)
        total += _normal_partial_shortage(self._upper.mu, self._upper.sd, x, self._u_hi, 1.0)
        if x < self._x_hi:
            a = self._u_lo if x <= self._x_lo else self._continuous_cdf(x)
            val, _ = quad(
                lambda u: float(self._spline(u)) - x,
                a,
                self._u_hi,
                epsabs=1e-12,
                epsrel=1e-9,
                limit=200,
            )
            total += max(0.0, val)
        return total

    # -- public surface ------------------------------------------------------

    def cdf(self, x):
        if np.ndim(x) != 0:
            return np.array([self.cdf(xi) for xi in np.asarray(x, dtype=float)])
        x = float(x)
        out = self.continuous_weight * self._continuous_cdf(x)
        out += sum(pm.mass for pm in self.point_masses if pm.location <= x)
        return min(1.0, max(0.0, out))

    def quantile(self, tau):
        if np.ndim(tau) != 0:
            return np.array([self.quantile(t) for t in np.asarray(tau, dtype=float)])
        tau = float(_check_level(tau))
        if tau >= 1.0:
            raise UnboundedQuantile("tau=1 with unbounded upper support")
        c = self.continuous_weight
        below = 0.0
        for pm in sorted(self.point_masses, key=lambda p: p.location):
            f_minus = c * self._continuous_cdf(pm.location) + below
            # F jumps from f_minus to f_minus + mass at the atom.
            if tau <= f_minus:
                break
            if tau <= f_minus + pm.mass:
                return pm.location
            below += pm.mass
        if c <= 0.0:
            # fully discrete: tau above every atom threshold cannot occur
            return self.point_masses[-1].location
        return self._continuous_quantile((tau - below) / c)

    def expected_shortage(self, x):
        if np.ndim(x) != 0:
            return np.array([self.expected_shortage(xi) for xi in np.asarray(x, dtype=float)])
        x = float(x)
        out = self.continuous_weight * self._continuous_shortage(x)
        out += sum(pm.mass * max(0.0, pm.location - x) for pm in self.point_masses)
        return out

    def mean(self):
        out = sum(pm.mass * pm.location for pm in self.point_masses)
        # E[Yc] as shortage at a point far below the support
        lo = self.quantile(1e-12)
        out += self.continuous_weight * (self._continuous_shortage(lo) + lo)
        return out


def _collapse_point_masses(levels, values):
    """Collapse runs of >= 2 equal quantile values into point masses.

    Each run spanning levels [t_first, t_last] at value v becomes an atom
    of mass t_last - t_first; the run is replaced by its left-endpoint
    knot (t_first, v).
    """
    masses = []
    kept_levels = []
    kept_values = []
    i = 0
    n = len(values)
    while i < n:
        j = i
        while j + 1 < n and values[j + 1] == values[i]:
            j += 1
        if j > i:
            masses.append(PointMass(location=values[i], mass=levels[j] - levels[i]))
        kept_levels.append(levels[i])
        kept_values.append(values[i])
        i = j + 1
    return masses, kept_levels, kept_values


def _fit_normal_tail(u1, v1, u2, v2):
    z1, z2 = norm.ppf(u1), norm.ppf(u2)
    if v2 <= v1 or z2 <= z1:
        raise DegenerateTail(
            f"cannot fit a normal tail through ({u1}, {v1}) and ({u2}, {v2})"
        )
    sd = (v2 - v1) / (z2 - z1)
    mu = v1 - sd * z1
    if sd <= 0 or not math.isfinite(sd) or not math.isfinite(mu):
        raise DegenerateTail("tail fit produced a non-positive or non-finite scale")
    return _NormalTail(mu=mu, sd=sd)


def from_quantiles(q: QuantileSet, tail_family: str = "normal") -> QuantileReconstructed:
    """Reconstruct a full distribution from a quantile set.

    Runs of repeated values are extracted as point masses first; the
    remaining levels are rescaled to the continuous part, interpolated by
    a monotone cubic spline and extended with normal tails fitted to the
    two outermost knots on each side.
    """
    if tail_family != "normal":
        raise ValueError(f"unsupported tail family: {tail_family!r}")
    masses, kept_levels, kept_values = _collapse_point_masses(list(q.levels), list(q.values))
    if len(kept_levels) < 2:
        raise DegenerateTail("fewer than two distinct quantile values remain after "
                             "point-mass extraction")
    c = 1.0 - sum(pm.mass for pm in masses)
    if c <= 0.0:
        raise DegenerateTail("point masses absorb the entire distribution")
    # Rescale kept levels onto the continuous part: subtract the mass of
    # atoms strictly to the left of each knot, then divide by the
    # continuous weight.
    adj_levels = []
    for t, v in zip(kept_levels, kept_values):
        below = sum(pm.mass for pm in masses if pm.location < v)
        adj_levels.append((t - below) / c)
    lower = _fit_normal_tail(adj_levels[0], kept_values[0], adj_levels[1], kept_values[1])
    upper = _fit_normal_tail(adj_levels[-2], kept_values[-2], adj_levels[-1], kept_values[-1])
    return QuantileReconstructed(adj_levels, kept_values, lower, upper, masses)
