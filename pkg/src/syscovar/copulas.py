"""Bivariate copulas and their conditional laws given {U = a} and {U >= a}."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from ._accel import NUMBA_ENABLED
from .errors import ConvergenceError, DomainError, UnsupportedCopulaError
from .rng import make_rng

INDEPENDENCE = "independence"
COMONOTONE = "comonotone"
GAUSSIAN = "gaussian"
STUDENT_T = "student_t"
GUMBEL = "gumbel"

_KIND_CODE = {
    INDEPENDENCE: K.C_INDEPENDENCE,
    COMONOTONE: K.C_COMONOTONE,
    GAUSSIAN: K.C_GAUSSIAN,
    STUDENT_T: K.C_STUDENT_T,
    GUMBEL: K.C_GUMBEL,
}

GIVEN_EXCEED = "exceed"
GIVEN_EQUAL = "equal"
_MODE_CODE = {GIVEN_EXCEED: K.GIVEN_EXCEED, GIVEN_EQUAL: K.GIVEN_EQUAL}


@dataclass(frozen=True)
class Copula:
    kind: str
    rho: float = 0.0
    nu: float = math.inf
    theta: float = 1.0

    def __post_init__(self):
        if self.kind not in _KIND_CODE:
            raise DomainError(f"unknown copula kind {self.kind!r}")
        if self.kind in (GAUSSIAN, STUDENT_T) and not (-1.0 < self.rho < 1.0):
            raise DomainError(
                f"rho must lie in (-1, 1), got {self.rho!r}; use the comonotone copula for rho = 1")
        if self.kind == STUDENT_T and not (self.nu > 0.0 and math.isfinite(self.nu)):
            raise DomainError(f"nu must be finite and > 0, got {self.nu!r}")
        if self.kind == GUMBEL and not (1.0 <= self.theta < math.inf):
            raise DomainError(
                f"theta must lie in [1, inf), got {self.theta!r}; use the comonotone copula for theta = inf")

    @classmethod
    def independence(cls):
        return cls(INDEPENDENCE)

    @classmethod
    def comonotone(cls):
        return cls(COMONOTONE)

    @classmethod
    def gaussian(cls, rho):
        return cls(GAUSSIAN, rho=float(rho))

    @classmethod
    def student_t(cls, rho, nu):
        return cls(STUDENT_T, rho=float(rho), nu=float(nu))

    @classmethod
    def gumbel(cls, theta):
        return cls(GUMBEL, theta=float(theta))

    @property
    def code(self):
        return _KIND_CODE[self.kind]

    @property
    def params(self):
        """(p1, p2) as the kernels expect them."""
        if self.kind == GUMBEL:
            return self.theta, 0.0
        if self.kind == STUDENT_T:
            return self.rho, self.nu
        return self.rho, 0.0

    @property
    def parameter(self):
        """The scalar dependence parameter (rho or theta); nan when there is none."""
        if self.kind in (GAUSSIAN, STUDENT_T):
            return self.rho
        if self.kind == GUMBEL:
            return self.theta
        return math.nan

    def cdf(self, u, v):
        return copula_cdf(self, u, v)

    def density(self, u, v):
        return copula_density(self, u, v)

    def conditional(self, alpha, mode=GIVEN_EXCEED):
        return ConditionalLaw(self, alpha, mode)


def _unit(x, name):
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")
    return x


def _open_unit(x, name):
    x = float(x)
    if not (0.0 < x < 1.0):
        raise DomainError(f"{name} must lie in (0, 1), got {x!r}")
    return x


def copula_cdf(c: Copula, u, v):
    u = _unit(u, "u")
    v = _unit(v, "v")
    p1, p2 = c.params
    return K.copula_cdf(c.code, p1, p2, u, v)


def copula_density(c: Copula, u, v):
    if c.kind == COMONOTONE:
        raise UnsupportedCopulaError("the comonotone copula has no density")
    u = _open_unit(u, "u")
    v = _open_unit(v, "v")
    p1, p2 = c.params
    return K.copula_density(c.code, p1, p2, u, v)


def cond_exceed_cdf(c: Copula, alpha, v):
    """P(V <= v | U >= alpha) = (v - C(alpha, v)) / (1 - alpha)."""
    alpha = _open_unit(alpha, "alpha")
    v = _unit(v, "v")
    p1, p2 = c.params
    return K.cond_exceed_cdf(c.code, p1, p2, alpha, v)


def cond_equal_cdf(c: Copula, alpha, v):
    """P(V <= v | U = alpha), i.e. the partial derivative of C in u at u = alpha."""
    if c.kind == COMONOTONE:
        raise UnsupportedCopulaError("conditioning the comonotone copula on U = alpha is degenerate")
    alpha = _open_unit(alpha, "alpha")
    v = _unit(v, "v")
    p1, p2 = c.params
    return K.cond_equal_cdf(c.code, p1, p2, alpha, v)


def _solve(c, mode, alpha, beta):
    alpha = _open_unit(alpha, "alpha")
    beta = _open_unit(beta, "beta")
    p1, p2 = c.params
    if mode == K.GIVEN_EXCEED:
        # Frechet bounds on C pin the root inside this bracket for every copula
        lo, hi = (1.0 - alpha) * beta, alpha + (1.0 - alpha) * beta
        # pad by a few ulps so rounding in C(alpha, v) cannot un-bracket the root
        lo, hi = max(0.0, lo - 4e-16), min(1.0, hi + 4e-16)
    else:
        if c.kind == COMONOTONE:
            raise UnsupportedCopulaError(
                "conditioning the comonotone copula on U = alpha is degenerate")
        lo, hi = 0.0, 1.0
    v, resid, its = K.cond_quantile(mode, c.code, p1, p2, alpha, beta, lo, hi)
    if not resid <= K.ROOT_FTOL:
        raise ConvergenceError(
            f"conditional quantile of {c} at alpha={alpha}, beta={beta} missed tolerance: "
            f"|F(v) - beta| = {resid:.3g} after {its} iterations")
    return v


def cond_exceed_quantile(c: Copula, alpha, beta):
    """The v with P(V <= v | U >= alpha) = beta."""
    return _solve(c, K.GIVEN_EXCEED, alpha, beta)


def cond_equal_quantile(c: Copula, alpha, beta):
    """The v with P(V <= v | U = alpha) = beta."""
    return _solve(c, K.GIVEN_EQUAL, alpha, beta)


@dataclass(frozen=True)
class ConditionalLaw:
    copula: Copula
    alpha: float
    mode: str = GIVEN_EXCEED

    def __post_init__(self):
        _open_unit(self.alpha, "alpha")
        if self.mode not in _MODE_CODE:
            raise DomainError(f"mode must be one of {sorted(_MODE_CODE)}, got {self.mode!r}")

    def cdf(self, v):
        if self.mode == GIVEN_EXCEED:
            return cond_exceed_cdf(self.copula, self.alpha, v)
        return cond_equal_cdf(self.copula, self.alpha, v)

    def quantile(self, beta):
        if self.mode == GIVEN_EXCEED:
            return cond_exceed_quantile(self.copula, self.alpha, beta)
        return cond_equal_quantile(self.copula, self.alpha, beta)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _norm_cdf_vec(z):
    out = np.empty_like(z)
    _array_apply(K.M_NORMAL, 0.0, z, out)
    return out


def _t_cdf_vec(z, nu):
    out = np.empty_like(z)
    _array_apply(K.M_STUDENT_T, nu, z, out)
    return out


if NUMBA_ENABLED:
    import numba

    @numba.njit(cache=True)
    def _array_apply(mkind, df, z, out):
        for i in range(z.shape[0]):
            out[i] = K.std_cdf(mkind, df, z[i])
else:
    from scipy import special as _sp

    def _array_apply(mkind, df, z, out):
        if mkind == K.M_NORMAL:
            out[:] = _sp.ndtr(z)
        else:
            out[:] = _sp.stdtr(df, z)


def positive_stable(rng, a, n):
    """Draws S >= 0 with E exp(-t S) = exp(-t**a), 0 < a < 1 (Chambers-Mallows-Stuck)."""
    ang = rng.uniform(0.0, math.pi, n)
    w = rng.standard_exponential(n)
    return (np.sin(a * ang) / np.sin(ang) ** (1.0 / a)
            * (np.sin((1.0 - a) * ang) / w) ** ((1.0 - a) / a))


def _sample_with_tails(c: Copula, n, rng):
    """Copula draws as (u, v, 1 - u, 1 - v); complements are exact where cheap."""
    if c.kind == INDEPENDENCE or (c.kind == GUMBEL and c.theta == 1.0):
        u = rng.random(n)
        v = rng.random(n)
        return u, v, 1.0 - u, 1.0 - v
    if c.kind == COMONOTONE:
        u = rng.random(n)
        return u, u.copy(), 1.0 - u, 1.0 - u
    if c.kind in (GAUSSIAN, STUDENT_T):
        z1 = rng.standard_normal(n)
        z2 = rng.standard_normal(n)
        y = c.rho * z1 + math.sqrt(1.0 - c.rho * c.rho) * z2
        if c.kind == GAUSSIAN:
            return _norm_cdf_vec(z1), _norm_cdf_vec(y), _norm_cdf_vec(-z1), _norm_cdf_vec(-y)
        s = np.sqrt(c.nu / rng.chisquare(c.nu, n))
        x = s * z1
        y *= s
        return (_t_cdf_vec(x, c.nu), _t_cdf_vec(y, c.nu),
                _t_cdf_vec(-x, c.nu), _t_cdf_vec(-y, c.nu))
    # Gumbel: Marshall-Olkin frailty with a positive stable mixing variable
    a = 1.0 / c.theta
    s = positive_stable(rng, a, n)
    e1 = rng.standard_exponential(n)
    e2 = rng.standard_exponential(n)
    t1 = (e1 / s) ** a
    t2 = (e2 / s) ** a
    return np.exp(-t1), np.exp(-t2), -np.expm1(-t1), -np.expm1(-t2)


def sample(c: Copula, n, seed):
    """n i.i.d. draws from ``c`` as an (n, 2) array, deterministic in ``seed``."""
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    u, v, _, _ = _sample_with_tails(c, n, make_rng(seed))
    return np.column_stack((u, v))
