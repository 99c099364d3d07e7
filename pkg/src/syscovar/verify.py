"""Quick self-checks of the numerical pipeline against closed forms and identities."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backtest import run_table
from .copulas import Copula
from .marginals import Marginal
from .measures import (
    BivariateModel,
    Levels,
    coes_geq,
    covar_eq,
    covar_eq_gaussian_analytic,
    covar_geq,
    gaussian_model,
    gumbel_t_model,
    mes,
    rho_critical,
)
from .ordering import concordance_leq, gaussian_derivative_sign, monotonicity_sweep
from .rng import make_rng

GRID = (0.9, 0.95, 0.99)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _gaussian_closed_form():
    worst = 0.0
    for rho in (-0.9, -0.5, 0.0, 0.5, 0.7071, 0.9):
        m = gaussian_model(rho)
        for a in GRID:
            for b in GRID:
                L = Levels(a, b)
                worst = max(worst, abs(covar_eq(m, L) - covar_eq_gaussian_analytic(0.0, 1.0, rho, L)))
    return Check("gaussian_closed_form", worst <= 1e-6, f"max |diff| = {worst:.3g}")


def _critical_correlation(seed):
    err = max(abs(rho_critical(Levels.same(a)) - math.sqrt(0.5)) for a in (0.6, 0.9, 0.95, 0.99))
    rng = make_rng(seed)
    bad = 0
    tested = 0
    h = 1e-6
    while tested < 1000:
        rho = rng.uniform(-0.95, 0.95)
        L = Levels(rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99))
        fd = (covar_eq_gaussian_analytic(0.0, 1.0, rho + h, L)
              - covar_eq_gaussian_analytic(0.0, 1.0, rho - h, L)) / (2 * h)
        if abs(fd) < 1e-4:
            continue
        tested += 1
        bad += gaussian_derivative_sign(rho, L) != (1 if fd > 0 else -1)
    ok = err <= 1e-12 and bad == 0
    return Check("critical_correlation", ok, f"|rho0 - 1/sqrt2| = {err:.3g}, sign mismatches = {bad}/1000")


def _concordance():
    pairs = [(Copula.gaussian(0.3), Copula.gaussian(0.7)), (Copula.gumbel(1.2), Copula.gumbel(2.0))]
    ordered = all(concordance_leq(a, b).ordered for a, b in pairs)
    reversed_caught = all(not concordance_leq(b, a).ordered for a, b in pairs)
    return Check("concordance", ordered and reversed_caught,
                 f"ordered={ordered}, reversed pairs flagged={reversed_caught}")


def _identities():
    y = Marginal.student_t(3.0)
    L = Levels(0.95, 0.99)
    ind = BivariateModel(y, y, Copula.independence())
    com = BivariateModel(y, y, Copula.comonotone())
    m = gumbel_t_model(2.0)
    shifted = m.shifted_y(2.5)
    # (error, tolerance)
    errs = {
        "independence covar": (abs(covar_geq(ind, L) - y.value_at_risk(L.beta)), 1e-9),
        "independence coes": (abs(coes_geq(ind, L) - y.expected_shortfall(L.beta)), 1e-9),
        "comonotone covar": (abs(covar_geq(com, L) - y.quantile(L.alpha + (1 - L.alpha) * L.beta)), 1e-9),
        "mes vs coes(beta->0)": (abs(mes(m, 0.95) - coes_geq(m, Levels(0.95, 1e-12))), 1e-6),
        "translation": (abs(covar_geq(shifted, L) - covar_geq(m, L) - 2.5), 1e-10),
    }
    failed = [k for k, (e, tol) in errs.items() if e > tol]
    worst = max(errs, key=lambda k: errs[k][0] / errs[k][1])
    detail = f"failed: {', '.join(failed)}" if failed else f"closest to tolerance: {worst} = {errs[worst][0]:.3g}"
    return Check("identities", not failed, detail)


def _monotone_geq():
    grid = np.linspace(0.05, 0.95, 7)
    sweeps = [monotonicity_sweep(fam, grid, "covar_geq", Levels(0.95, 0.95))
              for fam in ("gaussian", "t3")]
    sweeps.append(monotonicity_sweep("gumbel_t3", np.linspace(1, 3, 7), "covar_geq", Levels(0.95, 0.95)))
    bad = sum(len(s.violations) for s in sweeps)
    return Check("monotone_covar_geq", bad == 0, f"violations = {bad}")


def _geq_backtest(seed, n):
    worst = 0.0
    for fam, p in (("gaussian", 0.7), ("t3", 0.7), ("gumbel_t3", 2.0)):
        for r in run_table(fam, [p], [Levels(0.95, 0.95)], n, seed, variants=("geq",)):
            worst = max(worst, abs(r.violation_rate - (1 - r.beta)) / r.std_error)
    return Check("geq_backtest", worst <= 4.0, f"max deviation = {worst:.2f} standard errors")


def run_checks(seed=7, n=200_000):
    return [
        _gaussian_closed_form(),
        _critical_correlation(seed),
        _concordance(),
        _identities(),
        _monotone_geq(),
        _geq_backtest(seed, n),
    ]


