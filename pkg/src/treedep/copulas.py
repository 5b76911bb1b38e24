"""Bivariate copula families with h-functions, inverses and order checks.

Every family is exchangeable, so the conditional CDF ``h(u, v)`` (the partial
derivative of the copula in its first argument) serves both edge directions.
Evaluators are numpy-vectorized and numerically stable in log space where
the closed forms would overflow.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(128)


class CopulaError(ValueError):
    """Raised for invalid copula parameters or arguments."""


class HInversionError(RuntimeError):
    """Raised when the conditional inverse fails to converge."""


@dataclass(frozen=True)
class DependenceFlags:
    is_si: bool
    is_ci: bool
    is_mtp2: bool


def _unit(x, name: str, open_interval: bool = False):
    x = np.asarray(x, dtype=float)
    if open_interval:
        if np.any((x <= 0.0) | (x >= 1.0)):
            raise CopulaError(f"{name} must lie in the open interval (0,1)")
    elif np.any((x < 0.0) | (x > 1.0)):
        raise CopulaError(f"{name} must lie in [0,1]")
    return x


class BivariateCopula:
    """Base class: cdf, conditional CDF ``h`` and its inverse."""

    def cdf(self, u, v):
        raise NotImplementedError

    def h(self, u, v):
        """Conditional CDF of V given U=u, i.e. the u-partial of ``cdf``."""
        raise NotImplementedError

    def h_inv(self, u, p):
        """Solve ``h(u, v) = p`` for v; generic bisection fallback."""
        return h_inv_bisection(self, u, p)

    def flags(self) -> DependenceFlags:
        raise NotImplementedError

    def kendall_tau(self) -> float:
        raise NotImplementedError

    def transpose(self) -> "BivariateCopula":
        # every implemented family is exchangeable
        return self


def h_inv_bisection(cop: BivariateCopula, u, p, iters: int = 80, tol: float = 1e-10):
    """Bisection solve of ``h(u, v) = p`` in v; raises on non-convergence."""
    u = _unit(u, "u", open_interval=True)
    p = _unit(p, "p", open_interval=True)
    u, p = np.broadcast_arrays(u, p)
    lo = np.zeros_like(p)
    hi = np.ones_like(p)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = cop.h(u, mid) < p
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    v = 0.5 * (lo + hi)
    err = np.max(np.abs(cop.h(u, v) - p))
    if err > tol:
        raise HInversionError(f"h_inv bisection residual {err:.3e} exceeds {tol:.1e}")
    return v


@dataclass(frozen=True)
class Independence(BivariateCopula):
    def cdf(self, u, v):
        return _unit(u, "u") * _unit(v, "v")

    def h(self, u, v):
        u = _unit(u, "u", open_interval=True)
        u, v = np.broadcast_arrays(u, _unit(v, "v"))
        return np.array(v, dtype=float)

    def h_inv(self, u, p):
        u = _unit(u, "u", open_interval=True)
        u, p = np.broadcast_arrays(u, _unit(p, "p", open_interval=True))
        return np.array(p, dtype=float)

    def flags(self):
        return DependenceFlags(True, True, True)

    def kendall_tau(self):
        return 0.0

    def __str__(self):
        return "indep"


@dataclass(frozen=True)
class Comonotone(BivariateCopula):
    """Upper Frechet bound min(u, v); mass on the diagonal.

    The conditional law given U=u is the point mass at u, so ``h`` is a step
    function and the sampling rule degenerates to v = u for every p.
    """

    def cdf(self, u, v):
        return np.minimum(_unit(u, "u"), _unit(v, "v"))

    def h(self, u, v):
        u = _unit(u, "u", open_interval=True)
        return (_unit(v, "v") >= u).astype(float)

    def h_inv(self, u, p):
        u = _unit(u, "u", open_interval=True)
        p = _unit(p, "p", open_interval=True)
        return np.broadcast_to(u, np.broadcast_shapes(u.shape, p.shape)).copy()

    def flags(self):
        # no Lebesgue density, so total positivity of order 2 cannot hold
        return DependenceFlags(True, True, False)

    def kendall_tau(self):
        return 1.0

    def __str__(self):
        return "comonotone"


@dataclass(frozen=True)
class Gaussian(BivariateCopula):
    rho: float

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise CopulaError("rho must lie in [-1,1]")

    def cdf(self, u, v):
        u = _unit(u, "u")
        v = _unit(v, "v")
        if self.rho == 0.0:
            return u * v
        if self.rho == 1.0:
            return np.minimum(u, v)
        if self.rho == -1.0:
            return np.maximum(u + v - 1.0, 0.0)
        u, v = np.broadcast_arrays(u, v)
        # min(u, v) already carries every boundary case (u or v in {0, 1})
        out = np.array(np.minimum(u, v), dtype=float)
        interior = (u > 0.0) & (u < 1.0) & (v > 0.0) & (v < 1.0)
        if np.any(interior):
            out[interior] = _binorm_cdf(ndtri(u[interior]), ndtri(v[interior]), self.rho)
        return np.clip(out, 0.0, 1.0)

    def h(self, u, v):
        u = _unit(u, "u", open_interval=True)
        v = _unit(v, "v")
        if self.rho == 1.0:
            return (v >= u).astype(float)
        if self.rho == -1.0:
            return (v >= 1.0 - u).astype(float)
        denom = math.sqrt(1.0 - self.rho * self.rho)
        u, v = np.broadcast_arrays(u, v)
        out = np.zeros(u.shape, dtype=float)
        out[v >= 1.0] = 1.0
        mid = (v > 0.0) & (v < 1.0)
        if np.any(mid):
            out[mid] = ndtr((ndtri(v[mid]) - self.rho * ndtri(u[mid])) / denom)
        return out

    def h_inv(self, u, p):
        u = _unit(u, "u", open_interval=True)
        p = _unit(p, "p", open_interval=True)
        if self.rho == 1.0:
            return np.broadcast_to(u, np.broadcast_shapes(u.shape, p.shape)).copy()
        if self.rho == -1.0:
            return np.broadcast_to(1.0 - u, np.broadcast_shapes(u.shape, p.shape)).copy()
        denom = math.sqrt(1.0 - self.rho * self.rho)
        return ndtr(self.rho * ndtri(u) + denom * ndtri(p))

    def flags(self):
        pos = self.rho >= 0.0
        return DependenceFlags(pos, pos, pos)

    def kendall_tau(self):
        return 2.0 / math.pi * math.asin(self.rho)

    def __str__(self):
        return f"gaussian({self.rho!r})"


def _binorm_cdf(h, k, rho: float):
    """Standard bivariate normal CDF at (h, k) with correlation rho.

    One-dimensional integral representation with the arcsine substitution,
    evaluated by 128-point Gauss-Legendre; the integrand is analytic on the
    whole integration range so the rule converges to machine precision.
    """
    theta_hi = math.asin(rho)
    nodes = 0.5 * theta_hi * (_GL_NODES + 1.0)
    weights = 0.5 * theta_hi * _GL_WEIGHTS
    h = np.asarray(h, dtype=float)[..., None]
    k = np.asarray(k, dtype=float)[..., None]
    sin_t = np.sin(nodes)
    cos2_t = np.cos(nodes) ** 2
    expo = -(h * h + k * k - 2.0 * sin_t * h * k) / (2.0 * cos2_t)
    integral = np.sum(weights * np.exp(expo), axis=-1)
    return ndtr(h[..., 0]) * ndtr(k[..., 0]) + integral / (2.0 * math.pi)


_THETA_INDEP_CUTOFF = 1e-6


@dataclass(frozen=True)
class Clayton(BivariateCopula):
    """Clayton family for theta >= 0; evaluated in log space.

    Near theta = 0 the closed form cancels catastrophically, so parameters
    below 1e-6 evaluate through the independence limit.
    """

    theta: float

    def __post_init__(self):
        if self.theta < 0.0:
            raise CopulaError("theta must be >= 0")

    def _indep(self) -> bool:
        return self.theta < _THETA_INDEP_CUTOFF

    def cdf(self, u, v):
        u = _unit(u, "u")
        v = _unit(v, "v")
        if self._indep():
            return u * v
        u, v = np.broadcast_arrays(u, v)
        out = np.zeros(np.broadcast_shapes(u.shape, v.shape), dtype=float)
        pos = (u > 0.0) & (v > 0.0)
        out[pos] = np.exp(-_clayton_log_b(u[pos], v[pos], self.theta) / self.theta)
        return np.clip(out, 0.0, 1.0)

    def h(self, u, v):
        u = _unit(u, "u", open_interval=True)
        v = _unit(v, "v")
        if self._indep():
            return np.broadcast_to(v, np.broadcast_shapes(u.shape, v.shape)).copy()
        u, v = np.broadcast_arrays(u, v)
        out = np.zeros(u.shape, dtype=float)
        pos = v > 0.0
        if np.any(pos):
            th = self.theta
            log_b = _clayton_log_b(u[pos], v[pos], th)
            out[pos] = np.exp(-(th + 1.0) * np.log(u[pos]) - (th + 1.0) / th * log_b)
        return np.clip(out, 0.0, 1.0)

    def h_inv(self, u, p):
        u = _unit(u, "u", open_interval=True)
        p = _unit(p, "p", open_interval=True)
        if self._indep():
            return np.broadcast_to(p, np.broadcast_shapes(u.shape, p.shape)).copy()
        th = self.theta
        a = -th * np.log(u)
        s = -(th / (th + 1.0)) * np.log(p)
        # v^-theta = e^(a+s) - e^a + 1, evaluated without overflow
        bracket = -np.expm1(-s) + np.exp(-(a + s))
        log_inner = (a + s) + np.log(bracket)
        return np.clip(np.exp(-log_inner / th), 0.0, 1.0)

    def flags(self):
        return DependenceFlags(True, True, True)

    def kendall_tau(self):
        return self.theta / (self.theta + 2.0)

    def __str__(self):
        return f"clayton({self.theta!r})"


def _clayton_log_b(u, v, theta: float):
    """log(u^-theta + v^-theta - 1) without overflow; u, v in (0, 1]."""
    au = -theta * np.log(u)
    av = -theta * np.log(v)
    m = np.maximum(au, av)
    return m + np.log(np.exp(au - m) + np.exp(av - m) - np.exp(-m))


@dataclass(frozen=True)
class SurvivalClayton(BivariateCopula):
    """Survival (180-degree rotated) Clayton copula; upper tail dependent."""

    theta: float

    def __post_init__(self):
        if self.theta < 0.0:
            raise CopulaError("theta must be >= 0")

    def _base(self) -> Clayton:
        return Clayton(self.theta)

    def cdf(self, u, v):
        u = _unit(u, "u")
        v = _unit(v, "v")
        return np.clip(u + v - 1.0 + self._base().cdf(1.0 - u, 1.0 - v), 0.0, 1.0)

    def h(self, u, v):
        u = _unit(u, "u", open_interval=True)
        v = _unit(v, "v")
        out = np.where(
            v >= 1.0,
            1.0,
            1.0 - self._base().h(1.0 - u, np.clip(1.0 - v, 0.0, 1.0)),
        )
        return np.clip(out, 0.0, 1.0)

    def h_inv(self, u, p):
        u = _unit(u, "u", open_interval=True)
        p = _unit(p, "p", open_interval=True)
        return np.clip(1.0 - self._base().h_inv(1.0 - u, 1.0 - p), 0.0, 1.0)

    def flags(self):
        return DependenceFlags(True, True, True)

    def kendall_tau(self):
        return self.theta / (self.theta + 2.0)

    def __str__(self):
        return f"sclayton({self.theta!r})"


# -- order and dependence checks on grids ------------------------------------


def open_grid(size: int) -> np.ndarray:
    """Uniform grid of ``size`` points in the open interval (0,1)."""
    if size < 3:
        raise CopulaError("grid size must be >= 3")
    return np.arange(1, size + 1, dtype=float) / (size + 1)


def numeric_si_check(cop: BivariateCopula, grid_size: int = 129, tol: float = 1e-12) -> bool:
    """Grid test of stochastic increasingness of V in U.

    True iff ``h(., v)`` is nonincreasing in u at every grid v.
    """
    g = open_grid(grid_size)
    hv = cop.h(g[:, None], g[None, :])
    return bool(np.all(np.diff(hv, axis=0) <= tol))


def lo_leq(c1: BivariateCopula, c2: BivariateCopula, grid_size: int = 129, tol: float = 1e-12) -> bool:
    """Pointwise (lower orthant) order of two copulas on a grid."""
    g = open_grid(grid_size)
    return bool(np.all(c1.cdf(g[:, None], g[None, :]) <= c2.cdf(g[:, None], g[None, :]) + tol))


def pqd_check(cop: BivariateCopula, grid_size: int = 129, tol: float = 1e-12) -> bool:
    """Positive quadrant dependence: cdf dominates the product copula."""
    g = open_grid(grid_size)
    return bool(np.all(cop.cdf(g[:, None], g[None, :]) >= g[:, None] * g[None, :] - tol))


def dependence_flags(cop: BivariateCopula) -> DependenceFlags:
    """Analytic SI / CI / TP2 flags of a copula family."""
    return cop.flags()


def kendall_tau(cop: BivariateCopula) -> float:
    """Closed-form Kendall tau of a copula family."""
    return cop.kendall_tau()


# -- Kendall tau matching -----------------------------------------------------


def gaussian_tau(rho: float) -> float:
    """Kendall tau of the Gaussian copula with correlation ``rho``."""
    return 2.0 / math.pi * math.asin(rho)


def theta_from_tau(tau: float) -> float:
    """Clayton parameter with Kendall tau equal to ``tau``."""
    if tau >= 1.0:
        raise CopulaError("tau = 1 corresponds to an unbounded theta")
    if tau < 0.0:
        raise CopulaError("negative tau has no Clayton match for theta >= 0")
    return 2.0 * tau / (1.0 - tau)


def theta_from_rho(rho: float) -> float:
    """Clayton parameter whose Kendall tau matches Gaussian(rho)."""
    return theta_from_tau(gaussian_tau(rho))


def tau_odds(rho: float) -> float:
    """Odds tau/(1-tau) of the Gaussian Kendall tau; half of theta_from_rho.

    Exposed separately because this ratio is sometimes quoted as a Clayton
    parameter transform; tau-matching requires twice this value.
    """
    tau = gaussian_tau(rho)
    if tau >= 1.0:
        raise CopulaError("rho = 1 corresponds to an unbounded ratio")
    return tau / (1.0 - tau)


# -- literal syntax -----------------------------------------------------------

_LITERAL = re.compile(r"^\s*([a-z]+)\s*(?:\(\s*([^()]*)\s*\))?\s*$")


def parse_copula(text: str) -> BivariateCopula:
    """Parse literals: indep, comonotone, gaussian(r), clayton(t), sclayton(t)."""
    m = _LITERAL.match(text.lower())
    if not m:
        raise CopulaError(f"cannot parse copula literal {text!r}")
    name, argstr = m.group(1), m.group(2)
    args = [float(a) for a in argstr.split(",")] if argstr and argstr.strip() else []
    if name == "indep" and not args:
        return Independence()
    if name == "comonotone" and not args:
        return Comonotone()
    try:
        if name == "gaussian":
            return Gaussian(args[0])
        if name == "clayton":
            return Clayton(args[0])
        if name == "sclayton":
            return SurvivalClayton(args[0])
    except IndexError:
        raise CopulaError(f"wrong arity in copula literal {text!r}") from None
    raise CopulaError(f"unknown copula family {name!r}")
