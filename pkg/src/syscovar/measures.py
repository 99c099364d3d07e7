"""Systemic risk measures built from a marginal pair and a copula.

CoVaR and CoES come in two flavours, named after the stress event placed on X:

* ``geq``: conditioning on {X >= VaR_alpha(X)}
* ``eq``:  conditioning on {X = VaR_alpha(X)}

Both reduce to quantiles of a conditional copula law pushed through the
quantile function of Y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .copulas import (
    COMONOTONE,
    GAUSSIAN,
    STUDENT_T,
    Copula,
    cond_equal_quantile,
    cond_exceed_quantile,
    copula_cdf,
)
from .errors import ConvergenceError, DivergenceError, DomainError
from .marginals import NORMAL, Marginal

EQ = "eq"
GEQ = "geq"
VARIANTS = (EQ, GEQ)


@dataclass(frozen=True)
class Levels:
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            x = getattr(self, name)
            if not (0.0 < x < 1.0):
                raise DomainError(f"{name} must lie in (0, 1), got {x!r}")

    @classmethod
    def same(cls, alpha):
        return cls(alpha, alpha)


@dataclass(frozen=True)
class BivariateModel:
    marginal_x: Marginal
    marginal_y: Marginal
    copula: Copula

    def with_y(self, marginal_y):
        return BivariateModel(self.marginal_x, marginal_y, self.copula)

    def shifted_y(self, c):
        return self.with_y(self.marginal_y.shifted(c))


# ---------------------------------------------------------------------------
# model families used throughout the examples
# ---------------------------------------------------------------------------

def gaussian_model(rho, mu_x=0.0, sigma_x=1.0, mu_y=0.0, sigma_y=1.0):
    """Bivariate normal with correlation ``rho``."""
    return BivariateModel(Marginal.normal(mu_x, sigma_x), Marginal.normal(mu_y, sigma_y),
                          Copula.gaussian(rho))


def student_t_model(rho, nu=3.0, mu_x=0.0, sigma_x=1.0, mu_y=0.0, sigma_y=1.0):
    """Bivariate t(nu): shared chi-square mixing of a correlated normal pair."""
    return BivariateModel(Marginal.student_t(nu, mu_x, sigma_x), Marginal.student_t(nu, mu_y, sigma_y),
                          Copula.student_t(rho, nu))


def gumbel_t_model(theta, nu=3.0, mu_x=0.0, sigma_x=1.0, mu_y=0.0, sigma_y=1.0):
    """Gumbel copula with Student-t(nu) margins."""
    return BivariateModel(Marginal.student_t(nu, mu_x, sigma_x), Marginal.student_t(nu, mu_y, sigma_y),
                          Copula.gumbel(theta))


FAMILIES = {
    "gaussian": (gaussian_model, "rho"),
    "t3": (student_t_model, "rho"),
    "gumbel_t3": (gumbel_t_model, "theta"),
}


def model_for(family, param, **kwargs):
    try:
        factory, _ = FAMILIES[family]
    except KeyError:
        raise DomainError(f"unknown family {family!r}; expected one of {sorted(FAMILIES)}") from None
    if family == "gaussian":
        kwargs.pop("nu", None)
    return factory(param, **kwargs)


def family_parameter_name(family):
    return FAMILIES[family][1]


# ---------------------------------------------------------------------------
# CoVaR
# ---------------------------------------------------------------------------

def value_at_risk_x(m: BivariateModel, alpha):
    return m.marginal_x.value_at_risk(alpha)


def covar_geq(m: BivariateModel, L: Levels):
    """VaR_beta(Y | X >= VaR_alpha(X))."""
    return m.marginal_y.quantile(cond_exceed_quantile(m.copula, L.alpha, L.beta))


def covar_eq(m: BivariateModel, L: Levels):
    """VaR_beta(Y | X = VaR_alpha(X))."""
    return m.marginal_y.quantile(cond_equal_quantile(m.copula, L.alpha, L.beta))


def covar(m: BivariateModel, L: Levels, variant=GEQ):
    if variant == GEQ:
        return covar_geq(m, L)
    if variant == EQ:
        return covar_eq(m, L)
    raise DomainError(f"variant must be 'eq' or 'geq', got {variant!r}")


def covar_eq_gaussian_analytic(mu_y, sigma_y, rho, L: Levels):
    """Closed form of the eq-variant in the bivariate normal model."""
    if not sigma_y > 0.0:
        raise DomainError(f"sigma_y must be > 0, got {sigma_y!r}")
    if not -1.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (-1, 1), got {rho!r}")
    za = K.norm_ppf(L.alpha)
    zb = K.norm_ppf(L.beta)
    return mu_y + sigma_y * (rho * za + zb * math.sqrt(1.0 - rho * rho))


def rho_critical(L: Levels):
    """Correlation at which the Gaussian eq-variant CoVaR changes direction.

    Returns 1.0 when beta = 1/2 (the derivative never vanishes inside (-1, 1)).
    """
    za = K.norm_ppf(L.alpha)
    zb = K.norm_ppf(L.beta)
    if za == 0.0 and zb == 0.0:
        raise DomainError("alpha = beta = 1/2: the eq-variant CoVaR is constant in rho")
    return abs(za) / math.hypot(za, zb)


def dcovar(m: BivariateModel, L: Levels):
    """CoVaR_eq minus the unconditional VaR_beta(Y)."""
    return covar_eq(m, L) - m.marginal_y.value_at_risk(L.beta)


def dmedcovar(m: BivariateModel, L: Levels):
    """CoVaR_eq minus the beta-quantile of Y given X at its median (U = 1/2)."""
    at_median = m.marginal_y.quantile(cond_equal_quantile(m.copula, 0.5, L.beta))
    return covar_eq(m, L) - at_median


def covar_ratio(m: BivariateModel, L: Levels, variant=GEQ):
    """CoVaR divided by VaR_alpha(Y)."""
    base = m.marginal_y.value_at_risk(L.alpha)
    if abs(base) <= 1e-14 * m.marginal_y.scale:
        raise DomainError(f"VaR_alpha(Y) = 0 at alpha = {L.alpha}; the ratio is undefined")
    return covar(m, L, variant) / base


# ---------------------------------------------------------------------------
# CoES and MES
# ---------------------------------------------------------------------------

# quantile-average route
QUAD_NODES = 256
QUAD_DELTA = 1e-7
QUAD_RTOL = 1e-7


def _require_mean(m):
    if not m.marginal_y.has_finite_mean:
        raise DivergenceError(
            f"E|Y| is infinite for nu = {m.marginal_y.degrees_of_freedom}; CoES/MES diverge")


def _same_scale(m):
    y, c = m.marginal_y, m.copula
    if c.kind == GAUSSIAN:
        return y.kind == NORMAL
    if c.kind == STUDENT_T:
        return y.kind != NORMAL and y.degrees_of_freedom == c.nu
    return False


def _tail_average(m, mode, alpha, v0):
    """Integral of Q_Y(v) * w(v) over v >= v0, w the conditional copula density."""
    y = m.marginal_y
    p1, p2 = m.copula.params
    z0 = -math.inf if v0 <= 0.0 else K.std_ppf(y.code, y.df, v0)
    moment = K.tail_moment(mode, y.code, y.df, _same_scale(m), m.copula.code, p1, p2, alpha, z0)
    return moment


def coes_geq(m: BivariateModel, L: Levels, method="density"):
    """Average of covar_geq(m, (alpha, t)) over t in (beta, 1)."""
    _require_mean(m)
    if method == "quantile":
        return _coes_by_quantiles(m, L, GEQ)
    v0 = cond_exceed_quantile(m.copula, L.alpha, L.beta)
    moment = _tail_average(m, K.GIVEN_EXCEED, L.alpha, v0)
    return m.marginal_y.location + m.marginal_y.scale * moment / (1.0 - L.beta)


def coes_eq(m: BivariateModel, L: Levels, method="density"):
    """Average of covar_eq(m, (alpha, t)) over t in (beta, 1)."""
    _require_mean(m)
    if method == "quantile":
        return _coes_by_quantiles(m, L, EQ)
    v0 = cond_equal_quantile(m.copula, L.alpha, L.beta)
    moment = _tail_average(m, K.GIVEN_EQUAL, L.alpha, v0)
    return m.marginal_y.location + m.marginal_y.scale * moment / (1.0 - L.beta)


def coes(m: BivariateModel, L: Levels, variant=GEQ, method="density"):
    if variant == GEQ:
        return coes_geq(m, L, method)
    if variant == EQ:
        return coes_eq(m, L, method)
    raise DomainError(f"variant must be 'eq' or 'geq', got {variant!r}")


def mes(m: BivariateModel, alpha, method="density"):
    """E[Y | X >= VaR_alpha(X)], the beta -> 0 limit of coes_geq."""
    _require_mean(m)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if method == "quantile":
        return _mes_by_quantiles(m, alpha)
    # the comonotone conditional density jumps at v = alpha; start the integral there
    v0 = alpha if m.copula.kind == COMONOTONE else 0.0
    moment = _tail_average(m, K.GIVEN_EXCEED, alpha, v0)
    return m.marginal_y.location + m.marginal_y.scale * moment


def _gl_nodes(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _log_tail_integral(fn, lo_t, hi_t, n, upper=True):
    """Gauss-Legendre for int fn(t) dt over (lo_t, hi_t) after t = 1 - e^-s (or t = e^-s)."""
    x, w = _gl_nodes(n)
    if upper:
        a, b = -math.log1p(-lo_t), -math.log1p(-hi_t)
    else:
        a, b = -math.log(hi_t), -math.log(lo_t)
    h = 0.5 * (b - a)
    s = 0.5 * (a + b) + h * x
    acc = 0.0
    for si, wi in zip(s, w):
        t = -math.expm1(-si) if upper else math.exp(-si)
        acc += wi * fn(t) * math.exp(-si)
    return acc * h


def _refined(integrate):
    coarse = integrate(QUAD_NODES)
    fine = integrate(2 * QUAD_NODES)
    if abs(fine - coarse) > QUAD_RTOL * (1.0 + abs(fine)):
        raise ConvergenceError(
            f"quantile quadrature did not settle: {coarse!r} (n={QUAD_NODES}) vs {fine!r} (n={2 * QUAD_NODES})")
    return fine


def _inner_quantile(m, variant):
    if variant == GEQ:
        return lambda a, t: cond_exceed_quantile(m.copula, a, t)
    return lambda a, t: cond_equal_quantile(m.copula, a, t)


def _upper_tail_term(m, inner, alpha, delta):
    """Integral of Q_Y(G^-1(t)) over (1 - delta, 1) under a power-tail fit.

    The integrand is taken as A (1 - t)^-g near t = 1, with g read off two
    points a decade apart; Normal tails give g ~ 0, Student-t(nu) tails 1/nu.
    """
    y = m.marginal_y
    q1 = y.quantile(inner(alpha, 1.0 - delta))
    q2 = y.quantile(inner(alpha, 1.0 - 0.1 * delta))
    if q1 > 0.0 and q2 > q1:
        g = math.log(q2 / q1) / math.log(10.0)
        if g < 1.0:
            return delta * q1 / (1.0 - g)
    return delta * y.expected_shortfall(inner(alpha, 1.0 - delta))


def _coes_by_quantiles(m, L, variant):
    inner = _inner_quantile(m, variant)
    y = m.marginal_y
    delta = QUAD_DELTA
    if L.beta >= 1.0 - delta:
        raise DomainError(f"beta must be below 1 - {delta} for the quantile route")

    def integrand(t):
        return y.quantile(inner(L.alpha, t))

    body = _refined(lambda n: _log_tail_integral(integrand, L.beta, 1.0 - delta, n))
    tail = _upper_tail_term(m, inner, L.alpha, delta)
    return (body + tail) / (1.0 - L.beta)


def _mes_by_quantiles(m, alpha):
    inner = _inner_quantile(m, GEQ)
    y = m.marginal_y
    delta = QUAD_DELTA

    def integrand(t):
        return y.quantile(inner(alpha, t))

    upper = _refined(lambda n: _log_tail_integral(integrand, 0.5, 1.0 - delta, n))
    lower = _refined(lambda n: _log_tail_integral(integrand, delta, 0.5, n, upper=False))
    v_lo = inner(alpha, delta)
    top = _upper_tail_term(m, inner, alpha, delta)
    bottom = delta * y.partial_lower_moment(v_lo) / v_lo
    return lower + upper + top + bottom


# ---------------------------------------------------------------------------
# SII and the weighted CoES aggregate
# ---------------------------------------------------------------------------

def sii(copulas, alpha):
    """1 + sum over neighbours j of P(Y_j >= VaR_alpha | Y_i >= VaR_alpha)."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    total = 1.0
    for c in copulas:
        total += (1.0 - 2.0 * alpha + copula_cdf(c, alpha, alpha)) / (1.0 - alpha)
    return total


@dataclass(frozen=True)
class StressComponent:
    model: BivariateModel
    weight: float
    alpha: float


@dataclass(frozen=True)
class StressAggregate:
    components: tuple
    beta: float
    coherent: bool = field(init=False)

    def __post_init__(self):
        comps = tuple(c if isinstance(c, StressComponent) else StressComponent(*c)
                      for c in self.components)
        if not comps:
            raise DomainError("at least one stress component is required")
        if not 0.0 < self.beta < 1.0:
            raise DomainError(f"beta must lie in (0, 1), got {self.beta!r}")
        y = comps[0].model.marginal_y
        for c in comps:
            if not (c.weight >= 0.0 and math.isfinite(c.weight)):
                raise DomainError(f"weights must be finite and >= 0, got {c.weight!r}")
            if not 0.0 < c.alpha < 1.0:
                raise DomainError(f"alpha must lie in (0, 1), got {c.alpha!r}")
            if c.model.marginal_y != y:
                raise DomainError("all stress components must share the same marginal of Y")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "coherent",
                           abs(sum(c.weight for c in comps) - 1.0) <= 1e-12)


def weighted_coes(agg: StressAggregate):
    """Sum of w_i * CoES_{alpha_i, beta}(Y | X_i)."""
    return sum(c.weight * coes_geq(c.model, Levels(c.alpha, agg.beta)) for c in agg.components)


# ---------------------------------------------------------------------------
# name registry for sweeps and the CLI
# ---------------------------------------------------------------------------

MEASURES = {
    "var_x": lambda m, L: m.marginal_x.value_at_risk(L.alpha),
    "var_y": lambda m, L: m.marginal_y.value_at_risk(L.beta),
    "es_y": lambda m, L: m.marginal_y.expected_shortfall(L.beta),
    "covar_eq": covar_eq,
    "covar_geq": covar_geq,
    "coes_eq": coes_eq,
    "coes_geq": coes_geq,
    "mes": lambda m, L: mes(m, L.alpha),
    "dcovar": dcovar,
    "dmedcovar": dmedcovar,
    "ratio_eq": lambda m, L: covar_ratio(m, L, EQ),
    "ratio_geq": lambda m, L: covar_ratio(m, L, GEQ),
}


def evaluate(name, m: BivariateModel, L: Levels):
    try:
        fn = MEASURES[name]
    except KeyError:
        raise DomainError(f"unknown measure {name!r}; expected one of {sorted(MEASURES)}") from None
    return fn(m, L)
