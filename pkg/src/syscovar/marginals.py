"""Univariate loss distributions (Normal and Student-t location-scale)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import DivergenceError, DomainError

NORMAL = "normal"
STUDENT_T = "student_t"

_KIND_CODE = {NORMAL: K.M_NORMAL, STUDENT_T: K.M_STUDENT_T}


def _check_prob(p, name="p"):
    if not (0.0 < p < 1.0):
        raise DomainError(f"{name} must lie in (0, 1), got {p!r}")


@dataclass(frozen=True)
class Marginal:
    """Continuous, strictly increasing loss distribution.

    ``degrees_of_freedom`` is only meaningful for the Student-t kind.
    """

    kind: str = NORMAL
    location: float = 0.0
    scale: float = 1.0
    degrees_of_freedom: float = math.inf

    def __post_init__(self):
        if self.kind not in _KIND_CODE:
            raise DomainError(f"unknown marginal kind {self.kind!r}")
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise DomainError(f"scale must be finite and > 0, got {self.scale!r}")
        if not math.isfinite(self.location):
            raise DomainError(f"location must be finite, got {self.location!r}")
        if self.kind == STUDENT_T and not (self.degrees_of_freedom > 0.0
                                           and math.isfinite(self.degrees_of_freedom)):
            raise DomainError(
                f"degrees_of_freedom must be finite and > 0, got {self.degrees_of_freedom!r}")

    @classmethod
    def normal(cls, location=0.0, scale=1.0):
        return cls(NORMAL, float(location), float(scale))

    @classmethod
    def student_t(cls, nu, location=0.0, scale=1.0):
        return cls(STUDENT_T, float(location), float(scale), float(nu))

    @property
    def code(self):
        return _KIND_CODE[self.kind]

    @property
    def df(self):
        # kernels ignore df for the normal kind
        return self.degrees_of_freedom if self.kind == STUDENT_T else 0.0

    def shifted(self, c):
        return Marginal(self.kind, self.location + c, self.scale, self.degrees_of_freedom)

    def standardize(self, x):
        return (x - self.location) / self.scale

    def cdf(self, x):
        return K.std_cdf(self.code, self.df, (float(x) - self.location) / self.scale)

    def sf(self, x):
        return K.std_sf(self.code, self.df, (float(x) - self.location) / self.scale)

    def pdf(self, x):
        return K.std_pdf(self.code, self.df, (float(x) - self.location) / self.scale) / self.scale

    def quantile(self, p):
        """Generalized inverse of :meth:`cdf`."""
        p = float(p)
        _check_prob(p)
        return self.location + self.scale * K.std_ppf(self.code, self.df, p)

    def quantiles(self, p):
        """Vectorised :meth:`quantile` for arrays of probabilities (no domain check)."""
        p = np.ascontiguousarray(p, dtype=np.float64)
        out = np.empty_like(p)
        K.marg_ppf_array(self.code, self.location, self.scale, self.df, p.ravel(), out.ravel())
        return out

    def value_at_risk(self, alpha):
        _check_prob(alpha, "alpha")
        return self.quantile(alpha)

    @property
    def has_finite_mean(self):
        return self.kind == NORMAL or self.degrees_of_freedom > 1.0

    def expected_shortfall(self, beta):
        """Average of the quantile over (beta, 1), in closed form."""
        beta = float(beta)
        _check_prob(beta, "beta")
        if not self.has_finite_mean:
            raise DivergenceError(
                f"expected shortfall diverges for nu = {self.degrees_of_freedom} <= 1")
        return self.location + self.scale * K.std_es(self.code, self.df, beta)

    def partial_lower_moment(self, p):
        """Integral of the quantile function over (0, p)."""
        if not self.has_finite_mean:
            raise DivergenceError("mean is infinite")
        if p <= 0.0:
            return 0.0
        # symmetric standard law: int_0^p Q = -(1 - (1 - p)) * ES_{1-p}
        return self.location * p - self.scale * p * K.std_es(self.code, self.df, 1.0 - p)


def cdf(m: Marginal, x):
    return m.cdf(x)


def quantile(m: Marginal, p):
    return m.quantile(p)


def value_at_risk(m: Marginal, alpha):
    return m.value_at_risk(alpha)


def expected_shortfall(m: Marginal, beta):
    return m.expected_shortfall(beta)
