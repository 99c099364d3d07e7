"""Monte Carlo violation-rate backtests of model-implied CoVaR thresholds.

For a threshold ``thr`` and the stress level VaR_alpha(X), a backtest draws
(X_i, Y_i) and reports

    #{Y_i >= thr, X_i >= VaR_alpha(X)} / #{X_i >= VaR_alpha(X)}.

A correctly specified geq-variant threshold yields a rate near 1 - beta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from ._accel import NUMBA_ENABLED, jit
from .copulas import GAUSSIAN, STUDENT_T, _sample_with_tails
from .errors import DomainError
from .marginals import NORMAL
from .measures import EQ, GEQ, VARIANTS, BivariateModel, Levels, covar, covar_eq, covar_geq, model_for
from .rng import RNG_ALGORITHM, derive_seed, make_rng

# draws are generated in fixed-size blocks so n = 10^7 stays within memory;
# the block size is part of the stream definition and must not change
CHUNK = 1 << 20


@dataclass(frozen=True)
class BacktestCell:
    model: BivariateModel
    levels: Levels
    variant: str
    threshold: float
    n: int
    seed: int
    family: str = ""
    param: float = math.nan

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"variant must be 'eq' or 'geq', got {self.variant!r}")
        if int(self.n) < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if not math.isfinite(self.threshold):
            raise DomainError(f"threshold must be finite, got {self.threshold!r}")


@dataclass(frozen=True)
class BacktestReport:
    family: str
    param: float
    alpha: float
    beta: float
    variant: str
    n: int
    seed: int
    conditioning_count: int
    joint_count: int
    violation_rate: float
    std_error: float
    rng_algorithm: str = RNG_ALGORITHM

    COLUMNS = ("family", "param", "alpha", "beta", "variant", "n", "seed",
               "conditioning_count", "joint_count", "violation_rate", "std_error")

    def record(self):
        return {k: getattr(self, k) for k in self.COLUMNS}

    @property
    def sort_key(self):
        return (self.family, self.param, self.alpha, self.beta, self.variant)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

@jit
def _quantiles_from_split(mkind, loc, scale, df, u, ubar, out):
    # symmetric standard laws: Q(u) = -Q(1 - u); use the exact complement in the upper half
    for i in range(u.shape[0]):
        if u[i] <= 0.5:
            out[i] = loc + scale * K.std_ppf(mkind, df, u[i])
        else:
            out[i] = loc - scale * K.std_ppf(mkind, df, ubar[i])


def _push(marginal, u, ubar):
    out = np.empty_like(u)
    _quantiles_from_split(marginal.code, marginal.location, marginal.scale, marginal.df, u, ubar, out)
    return out


def _is_direct(m: BivariateModel):
    c, mx, my = m.copula, m.marginal_x, m.marginal_y
    if c.kind == GAUSSIAN:
        return mx.kind == NORMAL and my.kind == NORMAL
    if c.kind == STUDENT_T:
        return (mx.kind != NORMAL and my.kind != NORMAL
                and mx.degrees_of_freedom == c.nu == my.degrees_of_freedom)
    return False


def _draw_block(m: BivariateModel, n, rng):
    c, mx, my = m.copula, m.marginal_x, m.marginal_y
    if _is_direct(m):
        z1 = rng.standard_normal(n)
        z2 = rng.standard_normal(n)
        zy = c.rho * z1 + math.sqrt(1.0 - c.rho * c.rho) * z2
        if c.kind == STUDENT_T:
            s = np.sqrt(c.nu / rng.chisquare(c.nu, n))
            z1 *= s
            zy *= s
        return mx.location + mx.scale * z1, my.location + my.scale * zy
    u, v, ubar, vbar = _sample_with_tails(c, n, rng)
    return _push(mx, u, ubar), _push(my, v, vbar)


def _blocks(m, n, seed):
    rng = make_rng(seed)
    left = int(n)
    while left > 0:
        k = min(CHUNK, left)
        yield _draw_block(m, k, rng)
        left -= k


def sample_model(m: BivariateModel, n, seed):
    """n i.i.d. draws of (X, Y) as an (n, 2) array, deterministic in ``seed``."""
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    xs, ys = zip(*_blocks(m, n, seed))
    return np.column_stack((np.concatenate(xs), np.concatenate(ys)))


# ---------------------------------------------------------------------------
# counting
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:
    @jit
    def count_exceedances(x, y, x_thr, y_thr):
        """Returns (#{x >= x_thr}, #{x >= x_thr and y >= y_thr_k}) for each y_thr_k."""
        joint = np.zeros(y_thr.shape[0], dtype=np.int64)
        cond = 0
        for i in range(x.shape[0]):
            if x[i] >= x_thr:
                cond += 1
                yi = y[i]
                for k in range(y_thr.shape[0]):
                    if yi >= y_thr[k]:
                        joint[k] += 1
        return cond, joint
else:
    def count_exceedances(x, y, x_thr, y_thr):
        """Returns (#{x >= x_thr}, #{x >= x_thr and y >= y_thr_k}) for each y_thr_k."""
        hit = x >= x_thr
        ys = np.sort(y[hit])
        # elements >= t are those at or after the left insertion point
        joint = ys.size - np.searchsorted(ys, np.asarray(y_thr, dtype=np.float64), side="left")
        return int(hit.sum()), joint.astype(np.int64)


def _copula_blocks(m, n, seed):
    # same stream as _blocks, stopped before the marginal quantile transform
    rng = make_rng(seed)
    left = int(n)
    while left > 0:
        k = min(CHUNK, left)
        _, _, ubar, vbar = _sample_with_tails(m.copula, k, rng)
        yield -ubar, -vbar
        left -= k


def _count(m, n, seed, x_thr, y_thr):
    y_thr = np.ascontiguousarray(y_thr, dtype=np.float64)
    if _is_direct(m):
        blocks = _blocks(m, n, seed)
    else:
        # X >= t  <=>  -(1 - U) >= -sf_X(t): counting on the copula scale skips the
        # quantile transform and keeps tail resolution
        blocks = _copula_blocks(m, n, seed)
        x_thr = -m.marginal_x.sf(x_thr)
        y_thr = np.array([-m.marginal_y.sf(t) for t in y_thr])
    cond = 0
    joint = np.zeros(y_thr.shape[0], dtype=np.int64)
    for x, y in blocks:
        c, j = count_exceedances(x, y, x_thr, y_thr)
        cond += int(c)
        joint += j
    return cond, joint


def _report(family, param, L, variant, n, seed, cond, joint):
    if cond == 0:
        raise DomainError(
            f"no draw satisfied X >= VaR_{L.alpha}(X) (n={n}); increase n")
    r = joint / cond
    return BacktestReport(family, float(param), L.alpha, L.beta, variant, int(n), int(seed),
                          int(cond), int(joint), r, math.sqrt(r * (1.0 - r) / cond))


def violation_rate(cell: BacktestCell):
    m = cell.model
    x_thr = m.marginal_x.value_at_risk(cell.levels.alpha)
    cond, joint = _count(m, cell.n, cell.seed, x_thr, [cell.threshold])
    return _report(cell.family, cell.param, cell.levels, cell.variant, cell.n, cell.seed,
                   cond, int(joint[0]))


def run_table(family, params, levels, n, seed, variants=VARIANTS, **model_kwargs):
    """Violation rates for every (param, levels, variant) cell.

    All cells with the same parameter share one sample; its seed is derived from
    ``seed`` and the parameter's position in ``params``.
    """
    levels = [L if isinstance(L, Levels) else Levels(*L) for L in levels]
    for v in variants:
        if v not in VARIANTS:
            raise DomainError(f"variant must be 'eq' or 'geq', got {v!r}")
    reports = []
    for idx, p in enumerate(params):
        m = model_for(family, p, **model_kwargs)
        cell_seed = derive_seed(seed, idx)
        cells = [(L, v) for L in levels for v in variants]
        by_alpha = {}
        for L, v in cells:
            by_alpha.setdefault(L.alpha, []).append((L, v, covar(m, L, v)))
        for alpha, group in by_alpha.items():
            cond, joint = _count(m, n, cell_seed, m.marginal_x.value_at_risk(alpha),
                                 [thr for _, _, thr in group])
            for (L, v, _), j in zip(group, joint):
                reports.append(_report(family, p, L, v, n, cell_seed, cond, int(j)))
    reports.sort(key=lambda r: r.sort_key)
    return reports


def cloud_thresholds(m: BivariateModel, L: Levels):
    return {
        "var_x": m.marginal_x.value_at_risk(L.alpha),
        "covar_eq": covar_eq(m, L),
        "covar_geq": covar_geq(m, L),
    }


def sample_cloud_export(m: BivariateModel, n, L: Levels, seed, path, meta=None):
    """Write ``n`` draws of (x, y) to ``path`` as CSV with the threshold lines in the header."""
    from .reporting import write_csv

    xy = sample_model(m, n, seed)
    th = cloud_thresholds(m, L)
    header = dict(meta or {})
    header.update(th)
    rows = [{"x": float(a), "y": float(b)} for a, b in xy]
    write_csv(rows, ("x", "y"), path, header)
    return th


__all__ = [
    "BacktestCell", "BacktestReport", "CHUNK", "EQ", "GEQ", "cloud_thresholds",
    "count_exceedances", "run_table", "sample_cloud_export", "sample_model", "violation_rate",
]
