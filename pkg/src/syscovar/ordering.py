"""Grid checks of concordance order and of monotonicity in the dependence parameter.

Grid checks can only falsify an ordering.  A clean result means that no
counterexample was found on the grid, which is weaker than a proof.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .copulas import Copula, copula_cdf
from .errors import DomainError
from .measures import Levels, evaluate, model_for

MONOTONE_RTOL = 1e-7


@dataclass(frozen=True)
class ConcordanceResult:
    ordered: bool
    u: float = math.nan
    v: float = math.nan
    gap: float = 0.0

    def __bool__(self):
        return self.ordered


def unit_grid(size):
    """Interior points i / (size + 1), i = 1..size."""
    return np.arange(1, size + 1) / (size + 1.0)


def concordance_leq(c1: Copula, c2: Copula, grid_size=50, tol=1e-12):
    """Check C1(u, v) <= C2(u, v) + tol on an interior grid.

    On failure the first offending point is returned with gap C1 - C2.
    """
    if grid_size < 2:
        raise DomainError(f"grid_size must be >= 2, got {grid_size}")
    g = unit_grid(int(grid_size))
    for u in g:
        for v in g:
            gap = copula_cdf(c1, u, v) - copula_cdf(c2, u, v)
            if gap > tol:
                return ConcordanceResult(False, float(u), float(v), gap)
    return ConcordanceResult(True)


@dataclass(frozen=True)
class SweepResult:
    measure: str
    parameters: tuple
    values: tuple
    violations: tuple  # (i, i + 1) pairs where the value drops beyond tolerance

    @property
    def monotone(self):
        return not self.violations

    def rows(self, name="param"):
        return [{name: p, self.measure: v} for p, v in zip(self.parameters, self.values)]


def find_decreases(values, rtol=MONOTONE_RTOL):
    """Adjacent pairs (i, i + 1) with values[i + 1] < values[i] - rtol * (1 + |values[i]|)."""
    out = []
    for i in range(len(values) - 1):
        a, b = values[i], values[i + 1]
        if b < a - rtol * (1.0 + abs(a)):
            out.append((i, i + 1))
    return tuple(out)


def monotonicity_sweep(family, grid, measure, L: Levels, tol=MONOTONE_RTOL, **model_kwargs):
    """Evaluate ``measure`` along ``grid`` and record where it fails to be nondecreasing."""
    grid = [float(p) for p in grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("parameter grid must be strictly increasing")
    values = [evaluate(measure, model_for(family, p, **model_kwargs), L) for p in grid]
    return SweepResult(measure, tuple(grid), tuple(values), find_decreases(values, tol))


def gaussian_derivative(rho, L: Levels):
    """Derivative in rho of the Gaussian eq-variant CoVaR with sigma_Y = 1."""
    if not -1.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (-1, 1), got {rho!r}")
    za = K.norm_ppf(L.alpha)
    zb = K.norm_ppf(L.beta)
    return za - rho * zb / math.sqrt(1.0 - rho * rho)


def gaussian_derivative_sign(rho, L: Levels, zero_band=1e-12):
    d = gaussian_derivative(rho, L)
    if abs(d) <= zero_band:
        return 0
    return 1 if d > 0.0 else -1


def beta0(c: Copula, alpha):
    """(1/2 - C(alpha, 1/2)) / (1 - alpha)."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    b = (0.5 - copula_cdf(c, alpha, 0.5)) / (1.0 - alpha)
    return min(max(b, 0.0), 1.0)
