"""Scalar numeric kernels.

Everything here sticks to ``math`` and plain loops so it compiles under numba
and still runs unchanged as CPython when numba is switched off.  Copulas and
marginals are passed around as integer kind codes plus float parameters.
"""
import math

import numpy as np

from ._accel import jit

# marginal kinds
M_NORMAL = 0
M_STUDENT_T = 1

# copula kinds
C_INDEPENDENCE = 0
C_COMONOTONE = 1
C_GAUSSIAN = 2
C_STUDENT_T = 3
C_GUMBEL = 4

# conditioning modes
GIVEN_EXCEED = 0
GIVEN_EQUAL = 1

SQRT2 = math.sqrt(2.0)
INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)
HALF_PI = 0.5 * math.pi
# phi(s) underflows to subnormals beyond this
Z_CUT = 38.0

_GL_X, _GL_W = np.polynomial.legendre.leggauss(15)
GL_X = np.ascontiguousarray(_GL_X)
GL_W = np.ascontiguousarray(_GL_W)

QUAD_TOL = 1e-13
_MAX_DEPTH = 48


# ---------------------------------------------------------------------------
# standard normal
# ---------------------------------------------------------------------------

@jit
def norm_pdf(x):
    return INV_SQRT2PI * math.exp(-0.5 * x * x)


@jit
def norm_cdf(x):
    return 0.5 * math.erfc(-x / SQRT2)


@jit
def norm_sf(x):
    return 0.5 * math.erfc(x / SQRT2)


@jit
def _ppnd16(p):
    # Wichura, AS 241 (PPND16), |rel err| < 1e-16
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2509.0809287301226727 * r + 33430.575583588128105) * r
                    + 67265.770927008700853) * r + 45921.953931549871457) * r
                  + 13731.693765509461125) * r + 1971.5909503065514427) * r
                + 133.14166789178437745) * r + 3.387132872796366608)
        den = (((((((5226.495278852854561 * r + 28729.085735721942674) * r
                    + 39307.89580009271061) * r + 21213.794301586595867) * r
                  + 5394.1960214247511077) * r + 687.1870074920579083) * r
                + 42.313330701600911252) * r + 1.0)
        return q * num / den
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r
                    + 0.24178072517745061177) * r + 1.27045825245236838258) * r
                  + 3.64784832476320460504) * r + 5.7694972214606914055) * r
                + 4.6303378461565452959) * r + 1.42343711074968357734)
        den = (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r
                    + 0.0151986665636164571966) * r + 0.14810397642748007459) * r
                  + 0.68976733498510000455) * r + 1.6763848301838038494) * r
                + 2.05319162663775882187) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 0.0012426609473880784386) * r + 0.026532189526576123093) * r
                  + 0.29656057182850489123) * r + 1.7848265399172913358) * r
                + 5.4637849111641143699) * r + 6.6579046435011037772)
        den = (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r
                    + 1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r
                  + 0.0148753612908506148525) * r + 0.13692988092273580531) * r
                + 0.59983220655588793769) * r + 1.0)
    x = num / den
    return -x if q < 0.0 else x


@jit
def norm_ppf(p):
    if p <= 0.0:
        return -math.inf
    if p >= 1.0:
        return math.inf
    x = _ppnd16(p)
    # one Newton step, taken on the tail that is represented accurately
    if p < 0.5:
        err = norm_cdf(x) - p
    else:
        err = (1.0 - p) - norm_sf(x)
    d = norm_pdf(x)
    if d > 0.0:
        x -= err / d
    return x


# ---------------------------------------------------------------------------
# regularized incomplete beta and Student-t
# ---------------------------------------------------------------------------

@jit
def _betacf(a, b, x):
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 500):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        de = d * c
        h *= de
        if abs(de - 1.0) < 1e-15:
            break
    return h


@jit
def betainc(a, b, x, y):
    """I_x(a, b) with ``y = 1 - x`` supplied separately to avoid cancellation."""
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    lbt = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
           + a * math.log(x) + b * math.log(y))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(lbt) * _betacf(a, b, x) / a
    return 1.0 - math.exp(lbt) * _betacf(b, a, y) / b


@jit
def t_sf(x, nu):
    if x == 0.0:
        return 0.5
    if math.isinf(x):
        return 0.0 if x > 0.0 else 1.0
    t2 = x * x
    tail = 0.5 * betainc(0.5 * nu, 0.5, nu / (nu + t2), t2 / (nu + t2))
    return tail if x > 0.0 else 1.0 - tail


@jit
def t_cdf(x, nu):
    return t_sf(-x, nu)


@jit
def t_logpdf_const(nu):
    return math.lgamma(0.5 * (nu + 1.0)) - math.lgamma(0.5 * nu) - 0.5 * math.log(nu * math.pi)


@jit
def t_pdf(x, nu):
    return math.exp(t_logpdf_const(nu) - 0.5 * (nu + 1.0) * math.log1p(x * x / nu))


@jit
def t_ppf(p, nu):
    if p <= 0.0:
        return -math.inf
    if p >= 1.0:
        return math.inf
    if p == 0.5:
        return 0.0
    if p < 0.5:
        s = p
        sign = -1.0
    else:
        s = 1.0 - p
        sign = 1.0
    # starting point: Cornish-Fisher for moderate tails, power tail otherwise
    z = -norm_ppf(s)
    x = z + (z ** 3 + z) / (4.0 * nu) + (5.0 * z ** 5 + 16.0 * z ** 3 + 3.0 * z) / (96.0 * nu * nu)
    if nu < 5.0 and s < 0.01:
        k = math.exp(t_logpdf_const(nu) + 0.5 * math.log(nu)) * nu ** (0.5 * nu - 1.0)
        x = (k / s) ** (1.0 / nu)
    if not x > 0.0:
        x = 1e-3
    lo = 0.0
    hi = math.inf
    logs = math.log(s)
    # Newton on log sf(exp(u)), safeguarded by a bracket
    for _ in range(200):
        sf = t_sf(x, nu)
        f = math.log(sf) - logs
        if f > 0.0:
            lo = x
        elif f < 0.0:
            hi = x
        else:
            break
        slope = x * t_pdf(x, nu) / sf
        xn = x * math.exp(f / slope)
        if not (xn > lo and xn < hi):
            xn = 2.0 * x if math.isinf(hi) else 0.5 * (lo + hi)
        if abs(xn - x) <= 4e-16 * xn:
            x = xn
            break
        x = xn
    return sign * x


# ---------------------------------------------------------------------------
# marginal dispatch (standardised variable z = (x - loc) / scale)
# ---------------------------------------------------------------------------

@jit
def std_cdf(mkind, df, z):
    if mkind == M_NORMAL:
        return norm_cdf(z)
    return t_cdf(z, df)


@jit
def std_sf(mkind, df, z):
    if mkind == M_NORMAL:
        return norm_sf(z)
    return t_sf(z, df)


@jit
def std_ppf(mkind, df, p):
    if mkind == M_NORMAL:
        return norm_ppf(p)
    return t_ppf(p, df)


@jit
def std_pdf(mkind, df, z):
    if mkind == M_NORMAL:
        return norm_pdf(z)
    return t_pdf(z, df)


@jit
def std_es(mkind, df, beta):
    """Expected shortfall of the standardised marginal at level ``beta``."""
    if beta <= 0.0:
        return 0.0
    z = std_ppf(mkind, df, beta)
    if mkind == M_NORMAL:
        return norm_pdf(z) / (1.0 - beta)
    return (df + z * z) / (df - 1.0) * t_pdf(z, df) / (1.0 - beta)


@jit
def marg_ppf_array(mkind, loc, scale, df, p, out):
    for i in range(p.shape[0]):
        out[i] = loc + scale * std_ppf(mkind, df, p[i])


# ---------------------------------------------------------------------------
# adaptive Gauss-Legendre
# ---------------------------------------------------------------------------

@jit
def _gl(which, prm, a, b):
    h = 0.5 * (b - a)
    m = 0.5 * (b + a)
    acc = 0.0
    for i in range(GL_X.shape[0]):
        acc += GL_W[i] * _integrand(which, m + h * GL_X[i], prm)
    return acc * h


@jit
def quad(which, prm, a, b, tol):
    """Integrate ``_integrand(which, ., prm)`` over [a, b] to absolute ``tol``."""
    if not b > a:
        return 0.0
    n0 = 8
    stack_lo = np.empty(n0 + 2 * _MAX_DEPTH + 2)
    stack_hi = np.empty(n0 + 2 * _MAX_DEPTH + 2)
    stack_val = np.empty(n0 + 2 * _MAX_DEPTH + 2)
    stack_dep = np.empty(n0 + 2 * _MAX_DEPTH + 2, dtype=np.int64)
    top = 0
    width = (b - a) / n0
    for i in range(n0):
        lo = a + i * width
        hi = b if i == n0 - 1 else lo + width
        stack_lo[top] = lo
        stack_hi[top] = hi
        stack_val[top] = _gl(which, prm, lo, hi)
        stack_dep[top] = 0
        top += 1
    total = 0.0
    span = b - a
    while top > 0:
        top -= 1
        lo = stack_lo[top]
        hi = stack_hi[top]
        whole = stack_val[top]
        dep = stack_dep[top]
        mid = 0.5 * (lo + hi)
        left = _gl(which, prm, lo, mid)
        right = _gl(which, prm, mid, hi)
        both = left + right
        local = tol * (hi - lo) / span
        if abs(both - whole) <= local or dep >= _MAX_DEPTH:
            total += both
        else:
            stack_lo[top] = lo
            stack_hi[top] = mid
            stack_val[top] = left
            stack_dep[top] = dep + 1
            top += 1
            stack_lo[top] = mid
            stack_hi[top] = hi
            stack_val[top] = right
            stack_dep[top] = dep + 1
            top += 1
    return total


# integrand ids
_Q_GAUSS_STRIP = 0
_Q_T_STRIP = 1
_Q_TAIL_NORMAL = 2
_Q_TAIL_T = 3


@jit
def _integrand(which, x, prm):
    if which == _Q_GAUSS_STRIP:
        # phi(s) * Phi((b - rho s) / r); prm = b, rho, r
        return norm_pdf(x) * norm_cdf((prm[0] - prm[1] * x) / prm[2])
    if which == _Q_T_STRIP:
        # angle substitution s = sqrt(nu) tan(x); prm = b, rho, nu, k, log c_nu
        nu = prm[2]
        c = math.cos(x)
        if c <= 0.0:
            return 0.0
        arg = (prm[0] * c - prm[1] * math.sqrt(nu) * math.sin(x)) / (math.sqrt(nu) * prm[3])
        return math.exp(prm[4] + (nu - 1.0) * math.log(c)) * t_cdf(arg, nu + 1.0)
    if which == _Q_TAIL_NORMAL:
        # z phi(z) w(Phi(z))
        return x * norm_pdf(x) * _tail_weight(prm, x, norm_cdf(x), norm_sf(x))
    # which == _Q_TAIL_T: z = sqrt(df) tan(x)
    df = prm[5]
    c = math.cos(x)
    if c <= 0.0:
        return 0.0
    s = math.sin(x)
    z = math.sqrt(df) * s / c
    dens = math.exp(prm[7] + (df - 1.0) * math.log(c))
    return z * dens * _tail_weight(prm, z, t_cdf(z, df), t_sf(z, df))


@jit
def _tail_weight(prm, z, v, sf):
    # prm = mode, ckind, p1, p2, alpha, df, same_scale, log c_df, latent alpha
    mode = int(prm[0])
    ckind = int(prm[1])
    alpha = prm[4]
    if prm[6] > 0.0:
        cz = z
    elif ckind == C_GUMBEL and sf < 0.5:
        # -log(v) from the survival side; v itself is rounded near 1
        cz = -math.log1p(-sf)
    else:
        cz = copula_scale(ckind, prm[2], prm[3], v)
    if mode == GIVEN_EXCEED:
        # density of V given U >= alpha is (1 - dC/dv(alpha, v)) / (1 - alpha);
        # all supported families are exchangeable, so dC/dv(alpha, v) = dC/du(v, alpha)
        h = _cond_equal_scaled(ckind, prm[2], prm[3], v, cz, alpha, prm[8])
        return (1.0 - h) / (1.0 - alpha)
    return _density_scaled(ckind, prm[2], prm[3], alpha, prm[8], v, cz)


# ---------------------------------------------------------------------------
# copulas
# ---------------------------------------------------------------------------

@jit
def copula_scale(ckind, p1, p2, u):
    """Latent coordinate of ``u``: the quantile for elliptical copulas, -log(u) for Gumbel."""
    if ckind == C_GAUSSIAN:
        return norm_ppf(u)
    if ckind == C_STUDENT_T:
        return t_ppf(u, p2)
    if ckind == C_GUMBEL:
        return -math.log(u) if u > 0.0 else math.inf
    return 0.0


@jit
def _log_c_nu(nu):
    return math.lgamma(0.5 * (nu + 1.0)) - math.lgamma(0.5 * nu) - 0.5 * math.log(math.pi)


@jit
def _gumbel_cdf(theta, u, v):
    x = -math.log(u)
    y = -math.log(v)
    return math.exp(-(x ** theta + y ** theta) ** (1.0 / theta))


@jit
def copula_cdf(ckind, p1, p2, u, v):
    if u <= 0.0 or v <= 0.0:
        return 0.0
    if u >= 1.0:
        return min(v, 1.0)
    if v >= 1.0:
        return u
    if ckind == C_INDEPENDENCE:
        return u * v
    if ckind == C_COMONOTONE:
        return min(u, v)
    if ckind == C_GUMBEL:
        if p1 == 1.0:
            return u * v
        return _gumbel_cdf(p1, u, v)
    prm = np.empty(5)
    if ckind == C_GAUSSIAN:
        if p1 == 0.0:
            return u * v
        a = norm_ppf(u)
        prm[0] = norm_ppf(v)
        prm[1] = p1
        prm[2] = math.sqrt(1.0 - p1 * p1)
        if a <= 0.0:
            if a <= -Z_CUT:
                return 0.0
            val = quad(_Q_GAUSS_STRIP, prm, -Z_CUT, a, QUAD_TOL)
        else:
            if a >= Z_CUT:
                return v
            val = v - quad(_Q_GAUSS_STRIP, prm, a, Z_CUT, QUAD_TOL)
    else:
        nu = p2
        a = t_ppf(u, nu)
        prm[0] = t_ppf(v, nu)
        prm[1] = p1
        prm[2] = nu
        prm[3] = math.sqrt((1.0 - p1 * p1) / (nu + 1.0))
        prm[4] = _log_c_nu(nu)
        ang = math.atan(a / math.sqrt(nu))
        if a <= 0.0:
            val = quad(_Q_T_STRIP, prm, -HALF_PI, ang, QUAD_TOL)
        else:
            val = v - quad(_Q_T_STRIP, prm, ang, HALF_PI, QUAD_TOL)
    lo = max(u + v - 1.0, 0.0)
    hi = min(u, v)
    return min(max(val, lo), hi)


@jit
def _cond_equal_scaled(ckind, p1, p2, alpha, a, v, b):
    # dC/du at u=alpha; a, b are latent coordinates of alpha and v
    if v <= 0.0:
        return 0.0
    if v >= 1.0:
        return 1.0
    if ckind == C_INDEPENDENCE:
        return v
    if ckind == C_COMONOTONE:
        return 1.0 if v >= alpha else 0.0
    if ckind == C_GAUSSIAN:
        return norm_cdf((b - p1 * a) / math.sqrt(1.0 - p1 * p1))
    if ckind == C_STUDENT_T:
        nu = p2
        sc = math.sqrt((nu + a * a) * (1.0 - p1 * p1) / (nu + 1.0))
        return t_cdf((b - p1 * a) / sc, nu + 1.0)
    # Gumbel
    theta = p1
    if theta == 1.0:
        return v
    x = a
    y = b
    s = x ** theta + y ** theta
    c = math.exp(-s ** (1.0 / theta))
    return c * s ** (1.0 / theta - 1.0) * x ** (theta - 1.0) / alpha


@jit
def cond_equal_cdf(ckind, p1, p2, alpha, v):
    return _cond_equal_scaled(ckind, p1, p2, alpha, copula_scale(ckind, p1, p2, alpha),
                              v, copula_scale(ckind, p1, p2, v))


@jit
def _density_scaled(ckind, p1, p2, u, a, v, b):
    if ckind == C_INDEPENDENCE:
        return 1.0
    if ckind == C_GAUSSIAN:
        r2 = 1.0 - p1 * p1
        return math.exp(-(p1 * p1 * (a * a + b * b) - 2.0 * p1 * a * b) / (2.0 * r2)) / math.sqrt(r2)
    if ckind == C_STUDENT_T:
        nu = p2
        r2 = 1.0 - p1 * p1
        q = (a * a - 2.0 * p1 * a * b + b * b) / (nu * r2)
        log_joint = -math.log(2.0 * math.pi) - 0.5 * math.log(r2) - 0.5 * (nu + 2.0) * math.log1p(q)
        lc = t_logpdf_const(nu)
        log_marg = 2.0 * lc - 0.5 * (nu + 1.0) * (math.log1p(a * a / nu) + math.log1p(b * b / nu))
        return math.exp(log_joint - log_marg)
    if ckind == C_GUMBEL:
        theta = p1
        if theta == 1.0:
            return 1.0
        if u <= 0.0 or v <= 0.0 or u >= 1.0 or v >= 1.0:
            return 0.0
        x = a
        y = b
        s = x ** theta + y ** theta
        w = s ** (1.0 / theta)
        return (math.exp(-w) / (u * v) * (x * y) ** (theta - 1.0)
                * s ** (1.0 / theta - 2.0) * (w + theta - 1.0))
    return math.nan


@jit
def copula_density(ckind, p1, p2, u, v):
    return _density_scaled(ckind, p1, p2, u, copula_scale(ckind, p1, p2, u),
                           v, copula_scale(ckind, p1, p2, v))


@jit
def cond_exceed_cdf(ckind, p1, p2, alpha, v):
    if v <= 0.0:
        return 0.0
    if v >= 1.0:
        return 1.0
    return (v - copula_cdf(ckind, p1, p2, alpha, v)) / (1.0 - alpha)


@jit
def _cond_cdf(mode, ckind, p1, p2, alpha, v):
    if mode == GIVEN_EXCEED:
        return cond_exceed_cdf(ckind, p1, p2, alpha, v)
    return cond_equal_cdf(ckind, p1, p2, alpha, v)


# ---------------------------------------------------------------------------
# bracketed root search (Brent: bisection safeguarded inverse interpolation)
# ---------------------------------------------------------------------------

ROOT_FTOL = 1e-10
ROOT_MAXITER = 200


@jit
def cond_quantile(mode, ckind, p1, p2, alpha, beta, lo, hi):
    """Solve F(v) = beta on [lo, hi].  Returns (v, |F(v) - beta|, iterations)."""
    a = lo
    b = hi
    fa = _cond_cdf(mode, ckind, p1, p2, alpha, a) - beta
    fb = _cond_cdf(mode, ckind, p1, p2, alpha, b) - beta
    if fa == 0.0:
        return a, 0.0, 0
    if fb == 0.0:
        return b, 0.0, 0
    if fa * fb > 0.0:
        return math.nan, math.inf, 0
    c = a
    fc = fa
    d = b - a
    e = d
    eps = 2.220446049250313e-16
    it = 0
    while it < ROOT_MAXITER:
        it += 1
        if (fb > 0.0 and fc > 0.0) or (fb < 0.0 and fc < 0.0):
            c = a
            fc = fa
            d = b - a
            e = d
        if abs(fc) < abs(fb):
            a = b
            b = c
            c = a
            fa = fb
            fb = fc
            fc = fa
        tol1 = 2.0 * eps * abs(b) + 1e-300
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or fb == 0.0:
            break
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e = d
                d = p / q
            else:
                d = xm
                e = d
        else:
            d = xm
            e = d
        a = b
        fa = fb
        if abs(d) > tol1:
            b += d
        else:
            b += tol1 if xm > 0.0 else -tol1
        fb = _cond_cdf(mode, ckind, p1, p2, alpha, b) - beta
    return b, abs(fb), it


# ---------------------------------------------------------------------------
# tail moments for CoES / MES
# ---------------------------------------------------------------------------

@jit
def tail_moment(mode, mkind, df, same_scale, ckind, p1, p2, alpha, z0):
    """Integral of z * f(z) * w(F(z)) over z >= z0 for the standardised marginal.

    ``w`` is the conditional density of V on the copula scale: given U >= alpha
    (mode GIVEN_EXCEED) or given U = alpha (mode GIVEN_EQUAL).
    """
    prm = np.empty(9)
    prm[0] = mode
    prm[1] = ckind
    prm[2] = p1
    prm[3] = p2
    prm[4] = alpha
    prm[5] = df
    prm[6] = 1.0 if same_scale else 0.0
    prm[7] = 0.0
    prm[8] = copula_scale(ckind, p1, p2, alpha)
    if mkind == M_NORMAL:
        lo = max(z0, -Z_CUT)
        return quad(_Q_TAIL_NORMAL, prm, lo, Z_CUT, 1e-12)
    prm[7] = _log_c_nu(df)
    lo = -HALF_PI if math.isinf(z0) else math.atan(z0 / math.sqrt(df))
    return quad(_Q_TAIL_T, prm, lo, HALF_PI, 1e-12)
