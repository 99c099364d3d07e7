"""CoVaR, CoES and MES under Gaussian, Student-t and Gumbel dependence."""
__version__ = "0.1.0"

from ._accel import backend_name
from .copulas import ConditionalLaw, Copula, cond_equal_quantile, cond_exceed_quantile, copula_cdf
from .errors import ConvergenceError, DivergenceError, DomainError, SysCovarError, UnsupportedCopulaError
from .marginals import Marginal
from .measures import (
    BivariateModel,
    Levels,
    StressAggregate,
    coes_eq,
    coes_geq,
    covar_eq,
    covar_eq_gaussian_analytic,
    covar_geq,
    covar_ratio,
    dcovar,
    dmedcovar,
    gaussian_model,
    gumbel_t_model,
    mes,
    model_for,
    rho_critical,
    sii,
    student_t_model,
    weighted_coes,
)
