"""Special-function kernels.

Confluent hypergeometric 1F1, the Laplace integral of a product of two 1F1
through the (degenerate) Appell F2 function, hydrogen bound radial functions,
energy-normalized Coulomb continuum waves and the angular factors of the
x-component of the gradient between spherical harmonics.

Functions accept :class:`fractions.Fraction` arguments where noted; in the
polynomial regime the result is then exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import mpmath
import numpy as np
from scipy import integrate

from .errors import AccuracyError, DomainError

_SERIES_MAX_TERMS = 2000
_SERIES_TOL = 1e-16


def _nonpositive_int(value) -> bool:
    return float(value) <= 0 and float(value) == math.floor(float(value))


@dataclass(frozen=True)
class Kummer1F1Args:
    a: float
    c: float
    x: float

    def __post_init__(self):
        if _nonpositive_int(self.c):
            raise DomainError(f"1F1 lower parameter c must not be a non-positive integer, got {self.c}")


@dataclass(frozen=True)
class LaplaceProductIntegralArgs:
    s: float
    u: float
    a1: float
    c1: float
    a2: float
    c2: float
    q: float

    def __post_init__(self):
        if not self.s > 0 or not self.u > 0:
            raise DomainError(f"Laplace product integral needs s > 0 and u > 0, got s={self.s}, u={self.u}")
        for c in (self.c1, self.c2):
            if _nonpositive_int(c):
                raise DomainError(f"1F1 lower parameter must not be a non-positive integer, got {c}")

    @property
    def polynomial(self) -> bool:
        return _nonpositive_int(self.a1) and _nonpositive_int(self.a2)


# --------------------------------------------------------------------------
# 1F1
# --------------------------------------------------------------------------

def kummer_1f1(a, c, x):
    """Confluent hypergeometric function 1F1(a; c; x) for real arguments.

    ``x`` may be a scalar or an array.  For non-positive integer ``a`` the
    function is a polynomial, evaluated by the upward three-term recurrence in
    ``-a`` (the Laguerre recurrence), which is free of the cancellation that
    plagues the explicit power sum at large ``x``.
    """
    Kummer1F1Args(a, c, 0.0)
    if _nonpositive_int(a):
        return _kummer_polynomial(int(round(float(a))), c, x)
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.array([_kummer_series(float(a), float(c), xi) for xi in xs])
    return float(out[0]) if scalar else out


def _kummer_polynomial(a: int, c, x):
    """Recurrence (c-a')F(a'-1) = a'F(a'+1) - (2a'-c+x)F(a') run from a'=0 down to a."""
    if isinstance(x, (np.ndarray, list, tuple)):
        x = np.asarray(x, dtype=float)
    prev = x * 0 + 1  # F(a'+1); only multiplied by a'=0 on the first step
    cur = x * 0 + 1  # F(0)
    for ap in range(0, a, -1):
        nxt = (ap * prev - (2 * ap - c + x) * cur) / (c - ap)
        prev, cur = cur, nxt
    return cur


def kummer_power_sum(a, c, x, terms=None):
    """Plain truncated power series sum_k (a)_k/(c)_k x^k/k!.

    Exact for Fraction input in the polynomial regime; used as a cross-check of
    :func:`kummer_1f1` and inside the F2 double sum.
    """
    if terms is None:
        if not _nonpositive_int(a):
            raise DomainError("terms must be given outside the polynomial regime")
        terms = -int(round(float(a))) + 1
    total = 0
    term = x * 0 + 1
    for k in range(terms):
        total = total + term
        term = term * (a + k) * x / ((c + k) * (k + 1))
    return total


def _kummer_series(a: float, c: float, x: float) -> float:
    if x < 0:
        # Kummer transformation keeps all terms positive for a < c
        return math.exp(x) * _kummer_series(c - a, c, -x)
    total = 1.0
    term = 1.0
    x = float(x)
    for k in range(_SERIES_MAX_TERMS):
        term *= (a + k) * x / ((c + k) * (k + 1))
        total += term
        if not math.isfinite(total):
            break
        if abs(term) <= _SERIES_TOL * abs(total) and k > x:
            return total
    raise AccuracyError(
        "1F1 series did not converge",
        a=a, c=c, x=x, terms=_SERIES_MAX_TERMS, last_term=term, partial_sum=total,
    )


# --------------------------------------------------------------------------
# Appell F2 and the Laplace product integral
# --------------------------------------------------------------------------

def appell_f2(u, a1, a2, c1, c2, x, y, *, max_terms=_SERIES_MAX_TERMS):
    """Appell F2(u; a1, a2; c1, c2; x, y) as a double power series.

    Terminates (and is exact for Fraction input) when ``a1`` and ``a2`` are
    non-positive integers.  Otherwise the series is summed to convergence,
    which requires ``|x| + |y| < 1``.
    """
    m_max = -int(round(float(a1))) if _nonpositive_int(a1) else None
    k_max = -int(round(float(a2))) if _nonpositive_int(a2) else None
    if (m_max is None or k_max is None) and not abs(float(x)) + abs(float(y)) < 1:
        raise DomainError(f"F2 series diverges for |x|+|y| = {abs(float(x)) + abs(float(y))} >= 1")
    exact = m_max is not None and k_max is not None
    total = 0
    row = x * 0 + 1  # term (m, 0)
    m = 0
    while True:
        term = row
        row_sum = 0
        k = 0
        while True:
            row_sum = row_sum + term
            if k_max is not None and k == k_max:
                break
            if k_max is None and k > 0 and abs(float(term)) <= _SERIES_TOL * abs(float(row_sum)):
                break
            term = term * (u + m + k) * (a2 + k) * y / ((c2 + k) * (k + 1))
            k += 1
            if k > max_terms:
                raise AccuracyError("F2 inner series did not converge", m=m, k=k)
        total = total + row_sum
        if m_max is not None and m == m_max:
            break
        if not exact and m > 0 and abs(float(row_sum)) <= _SERIES_TOL * abs(float(total)):
            break
        row = row * (u + m) * (a1 + m) * x / ((c1 + m) * (m + 1))
        m += 1
        if m > max_terms:
            raise AccuracyError("F2 outer series did not converge", m=m)
    return total


def gamma(u):
    """Gamma function for real u > 0; exact integer factorial for integer Rational u."""
    if not u > 0:
        raise DomainError(f"gamma is only provided for u > 0, got {u}")
    if isinstance(u, Rational) and Fraction(u).denominator == 1:
        return math.factorial(int(u) - 1)
    return math.gamma(float(u))


def laplace_product_integral(s, u, a1, c1, a2, c2, q):
    """int_0^inf exp(-s t) t^(u-1) 1F1(a1; c1; t) 1F1(a2; c2; q t) dt.

    Evaluated as Gamma(u) s^-u F2(u; a1, a2; c1, c2; 1/s, q/s).  With all
    arguments Rational, u a positive integer and a1, a2 non-positive integers,
    the result is an exact :class:`~fractions.Fraction`.  Outside the region
    where the F2 series converges the integral is computed by adaptive
    quadrature.
    """
    args = LaplaceProductIntegralArgs(s, u, a1, c1, a2, c2, q)
    exact = all(isinstance(v, Rational) for v in (s, u, a1, c1, a2, c2, q))
    if exact:
        s, u, a1, c1, a2, c2, q = (Fraction(v) for v in (s, u, a1, c1, a2, c2, q))
    if args.polynomial:
        prefactor = gamma(u) / s**u if exact and u.denominator == 1 else gamma(u) * float(s) ** -float(u)
        if not (exact and u.denominator == 1):
            s, u, a1, c1, a2, c2, q = (float(v) for v in (s, u, a1, c1, a2, c2, q))
        return prefactor * appell_f2(u, a1, a2, c1, c2, 1 / s, q / s)

    s, u, a1, c1, a2, c2, q = (float(v) for v in (s, u, a1, c1, a2, c2, q))
    growth = (0.0 if _nonpositive_int(a1) else 1.0) + (0.0 if _nonpositive_int(a2) else max(0.0, q))
    if not s > growth:
        raise DomainError(f"Laplace product integral diverges: need s > {growth}, got s={s}")
    if 1 / s + abs(q) / s < 1:
        return gamma(u) * s**-u * appell_f2(u, a1, a2, c1, c2, 1 / s, q / s)
    return _laplace_quadrature(s, u, a1, c1, a2, c2, q)


def _laplace_quadrature(s, u, a1, c1, a2, c2, q):
    def factor(a, c, x):
        if _nonpositive_int(a):
            return mpmath.mpf(kummer_1f1(a, c, x))
        # the power series overflows long before the exponential decay wins
        return mpmath.hyp1f1(a, c, x)

    def integrand(t):
        return float(mpmath.exp(-s * t) * mpmath.mpf(t) ** (u - 1) * factor(a1, c1, t) * factor(a2, c2, q * t))

    value, err = integrate.quad(integrand, 0, np.inf, epsabs=0, epsrel=1e-12, limit=500)
    if not abs(err) <= 1e-8 * abs(value) + 1e-300:
        raise AccuracyError("quadrature fallback for the Laplace product integral failed", value=value, error=err)
    return value


# --------------------------------------------------------------------------
# Hydrogen bound radial functions
# --------------------------------------------------------------------------

def hydrogen_norm_squared(n: int, l: int) -> Fraction:
    """Square of the normalization constant of R_nl = N r^l e^{-r/n} 1F1(l+1-n; 2l+2; 2r/n).

    N^2 = (2/n)^(2l+3) (n+l)! / (2n (n-l-1)!) / ((2l+1)!)^2, exact.
    """
    return (
        Fraction(2, n) ** (2 * l + 3)
        * Fraction(math.factorial(n + l), 2 * n * math.factorial(n - l - 1))
        / math.factorial(2 * l + 1) ** 2
    )


def _check_bound(n, l):
    if n < 1 or not 0 <= l < n:
        raise DomainError(f"need n >= 1 and 0 <= l < n, got n={n}, l={l}")


def hydrogen_radial(n: int, l: int, r):
    """Normalized hydrogen radial function R_nl(r), r in bohr (int R^2 r^2 dr = 1)."""
    _check_bound(n, l)
    r = np.asarray(r, dtype=float)
    log_n = 0.5 * math.log(float(hydrogen_norm_squared(n, l)))
    with np.errstate(divide="ignore"):
        envelope = np.exp(log_n + l * np.log(r) - r / n) if l else np.exp(log_n - r / n)
    return envelope * kummer_1f1(l + 1 - n, 2 * l + 2, 2 * r / n)


def hydrogen_gradient_radial(n: int, l: int, l_target: int, r):
    """Radial operator of the gradient taking R_nl Y_l into the l_target = l +- 1 channel.

    Returns R' - l R / r for l_target = l + 1 and R' + (l + 1) R / r for
    l_target = l - 1, without forming the 1/r terms explicitly.
    """
    _check_bound(n, l)
    if l_target not in (l - 1, l + 1) or l_target < 0:
        raise DomainError(f"l_target must be l +- 1 >= 0, got l={l}, l_target={l_target}")
    r = np.asarray(r, dtype=float)
    a, c = l + 1 - n, 2 * l + 2
    x = 2 * r / n
    log_n = 0.5 * math.log(float(hydrogen_norm_squared(n, l)))
    with np.errstate(divide="ignore"):
        base = np.exp(log_n - r / n)
        rl = r**l
    f = kummer_1f1(a, c, x)
    fp = kummer_1f1(a + 1, c + 1, x) * (2 * a / (n * c)) if a != 0 else 0.0
    core = base * rl * (fp - f / n)
    if l_target == l + 1:
        return core
    # l >= 1 here; r^(l-1) is finite at the origin
    return core + (2 * l + 1) * base * r ** (l - 1) * f


def bound_extent(n_max: int, tol: float = 1e-16) -> float:
    """Radius beyond which the envelope r^(n-1) e^{-r/n} has dropped below ``tol`` of its peak for all n <= n_max."""
    n = n_max
    if n == 1:
        return -math.log(tol) + 1.0
    peak = n * (n - 1)
    target = (n - 1) * math.log(peak) - peak / n + math.log(tol)
    r = peak
    for _ in range(200):
        r_new = n * ((n - 1) * math.log(r) - target)
        if abs(r_new - r) < 1e-9:
            break
        r = r_new
    return r


# --------------------------------------------------------------------------
# Coulomb continuum
# --------------------------------------------------------------------------

def _numerov_h_max(E: float) -> float:
    k = math.sqrt(2 * E)
    # fourth-order schemes: relative error ~1e-9 on matrix elements at this step
    return min(0.01, 2 * math.pi / k / 160)


def _numerov_regular(E: float, l: int, Z: float, h: float, npts: int) -> np.ndarray:
    """Numerov integration of u'' = -(2E + 2Z/r - l(l+1)/r^2) u from the origin."""
    r = h * np.arange(npts)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = 2 * E + 2 * Z / r - l * (l + 1) / r**2
    f[0] = 0.0
    g = (h * h / 12.0) * f
    u = np.zeros(npts)
    # power series r^(l+1) sum a_k r^k for the first two points
    for j in (1, 2):
        rj = r[j]
        coeffs = [1.0, -Z / (l + 1)]
        total = 1.0 + coeffs[1] * rj
        power = rj
        for k in range(2, 60):
            ak = -(2 * Z * coeffs[-1] + 2 * E * coeffs[-2]) / (k * (k + 2 * l + 1))
            coeffs.append(ak)
            power *= rj
            term = ak * power
            total += term
            if abs(term) < 1e-18 * abs(total):
                break
        u[j] = rj ** (l + 1) * total
    gl = g.tolist()
    ul = u.tolist()
    w_prev = (1 + gl[1]) * ul[1]
    w_cur = (1 + gl[2]) * ul[2]
    u_cur = ul[2]
    for j in range(2, npts - 1):
        w_next = 2 * w_cur - w_prev - 12 * gl[j] * u_cur
        u_cur = w_next / (1 + gl[j + 1])
        ul[j + 1] = u_cur
        w_prev, w_cur = w_cur, w_next
    return np.asarray(ul)


def _coulomb_fg(l: int, eta: float, rho: float):
    F = float(mpmath.coulombf(l, eta, rho))
    G = float(mpmath.coulombg(l, eta, rho))
    return F, G


def coulomb_radial_wave(E: float, l: int, r_grid, Z: float = 1.0) -> np.ndarray:
    """Energy-normalized regular Coulomb radial function u_{E,l}(r) = r R_{E,l}(r).

    Normalization: int u_{E,l} u_{E',l} dr = delta(E - E') (hartree), so that
    u -> sqrt(2/(pi k)) sin(k r - l pi/2 + (Z/k) ln 2kr + sigma_l) at large r,
    with E = k^2/2.  ``Z`` is the attractive nuclear charge; ``Z = 0`` gives the
    free Riccati-Bessel wave.

    The wave is obtained by Numerov integration outward from its power series
    at the origin and scaled by matching to the exact regular and irregular
    Coulomb functions at two points near the end of the grid.  If ``r_grid`` is
    not uniform from zero with a fine enough step, integration runs on an
    internal uniform grid and the result is cubic-interpolated.
    """
    if not E > 0:
        raise DomainError(f"continuum energy must be > 0 hartree, got {E}")
    if l < 0 or int(l) != l:
        raise DomainError(f"l must be a non-negative integer, got {l}")
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.ndim != 1 or r_grid.size < 2 or np.any(r_grid < 0):
        raise DomainError("r_grid must be a 1-D array of at least two non-negative radii")
    h_max = _numerov_h_max(E)
    r_end = float(r_grid.max())
    step = r_grid[1] - r_grid[0]
    uniform = (
        r_grid[0] == 0
        and step <= h_max * (1 + 1e-12)
        and np.allclose(np.diff(r_grid), step, rtol=1e-10, atol=0)
    )
    k = math.sqrt(2 * E)
    quarter = max(2, int(math.ceil(0.5 * math.pi / k / (step if uniform else h_max))))
    if uniform:
        h, npts = step, r_grid.size
    else:
        npts = int(math.ceil(r_end / h_max)) + 1
        h = r_end / (npts - 1)
    npts_int = max(npts, quarter + 3)
    u = _numerov_regular(E, int(l), Z, h, npts_int)
    j2 = npts_int - 1
    j1 = j2 - quarter
    eta = -Z / k
    F1, G1 = _coulomb_fg(int(l), eta, k * j1 * h)
    F2, G2 = _coulomb_fg(int(l), eta, k * j2 * h)
    det = F1 * G2 - F2 * G1
    a = (u[j1] * G2 - u[j2] * G1) / det
    b = (F1 * u[j2] - F2 * u[j1]) / det
    amp = math.hypot(a, b)
    if not amp > 0 or not math.isfinite(amp):
        raise AccuracyError("Coulomb wave normalization failed", E=E, l=l, a=a, b=b)
    if abs(b) > 1e-4 * abs(a):
        raise AccuracyError(
            "Numerov solution drifted from the regular Coulomb function", E=E, l=l, a=a, b=b, h=h
        )
    u *= math.sqrt(2 / (math.pi * k)) / amp
    if uniform:
        return u[: r_grid.size]
    from scipy.interpolate import CubicSpline

    return CubicSpline(h * np.arange(npts_int), u)(r_grid)


def coulomb_grid(E_min: float, r_max: float, h: float | None = None) -> np.ndarray:
    """Uniform radial grid from zero fine enough for waves up to energy-independent step limits."""
    if h is None:
        h = _numerov_h_max(E_min)
    npts = int(math.ceil(r_max / h))
    # odd count so Simpson's rule applies
    if npts % 2 == 1:
        npts += 1
    return h * np.arange(npts + 1)


def simpson_weights(npts: int, h: float) -> np.ndarray:
    """Composite Simpson weights for an odd number of equally spaced points."""
    if npts % 2 == 0 or npts < 3:
        raise DomainError("Simpson weights need an odd number of points >= 3")
    w = np.ones(npts)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return w * (h / 3)


# --------------------------------------------------------------------------
# Angular factor of d/dx
# --------------------------------------------------------------------------

def _cg_rank1(l: int, m: int, q: int, L: int) -> float:
    """Clebsch-Gordan <l m 1 q | L m+q> for L = l +- 1."""
    if L == l + 1:
        if q == 1:
            num, den = (l + m + 1) * (l + m + 2), (2 * l + 1) * (2 * l + 2)
        elif q == 0:
            num, den = (l - m + 1) * (l + m + 1), (2 * l + 1) * (l + 1)
        else:
            num, den = (l - m + 1) * (l - m + 2), (2 * l + 1) * (2 * l + 2)
        return math.sqrt(num / den)
    if L == l - 1:
        if l == 0:
            return 0.0
        if q == 1:
            num, den = (l - m) * (l - m - 1), 2 * l * (2 * l + 1)
        elif q == 0:
            return -math.sqrt((l - m) * (l + m) / (l * (2 * l + 1)))
        else:
            num, den = (l + m) * (l + m - 1), 2 * l * (2 * l + 1)
        return math.sqrt(num / den)
    return 0.0


def angular_px_coupling(l: int, mu: int, lp: int, mup: int) -> float:
    """Angular coefficient of <Y_{lp mup}| d/dx |R(r) Y_{l mu}>.

    The full matrix element is this coefficient times the radial integral of
    R_target against :func:`hydrogen_gradient_radial` (R' - l R/r for
    lp = l + 1, R' + (l+1) R/r for lp = l - 1).  Exactly zero unless
    |lp - l| = 1 and |mup - mu| = 1.
    """
    if abs(lp - l) != 1 or abs(mup - mu) != 1 or lp < 0 or abs(mu) > l or abs(mup) > lp:
        return 0.0
    q = mup - mu
    # d/dx = (grad_{-1} - grad_{+1}) / sqrt(2) in spherical components
    spherical = -1.0 / math.sqrt(2) if q == 1 else 1.0 / math.sqrt(2)
    if lp == l + 1:
        reduced = math.sqrt((l + 1) / (2 * l + 3))
    else:
        reduced = -math.sqrt(l / (2 * l - 1))
    return spherical * reduced * _cg_rank1(l, mu, q, lp)
