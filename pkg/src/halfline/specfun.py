"""Special functions used by the half-line kernels.

Everything here works in double precision. Modified Bessel functions are
carried in exponentially scaled form, ``exp(-z) * I_mu(z)``, because every
kernel multiplies them by a compensating Gaussian.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from scipy import special as _sp

from .errors import ConvergenceError, DomainError, RepresentationError, TruncationError

__all__ = [
    "gamma",
    "asymp_coeff",
    "unit_phase",
    "bessel_i_scaled",
    "bessel_i",
    "bessel_i_asymptotic",
    "bessel_j",
    "erf",
    "erfi",
    "erfi_scaled",
    "dawson",
]

SQRT_PI = math.sqrt(math.pi)

SERIES_RTOL = 1e-17
SERIES_MAX_TERMS = 500

# exp(y**2) overflows near |y| = 26.64
ERFI_DIRECT_LIMIT = 26.0

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x: float) -> float:
    """Gamma function by the Lanczos approximation (g=7, 9 terms).

    Uses the reflection formula for ``x < 1/2``. Raises `DomainError` at the
    poles (nonpositive integers) and `RepresentationError` on overflow.
    """
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise DomainError(f"gamma has a pole at x={x:g}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    if x > 171.6:
        raise RepresentationError(f"gamma({x:g}) overflows double precision")
    x -= 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (x + i)
    t = x + _LANCZOS_G + 0.5
    # split the power so t**(x+1/2) cannot overflow before exp(-t) is applied
    half = t ** ((x + 0.5) / 2.0)
    return math.sqrt(2.0 * math.pi) * half * math.exp(-t) * half * acc


def asymp_coeff(nu: float, k: int) -> float:
    """Hankel coefficient ``Gamma(nu+k+1/2) / (k! Gamma(nu-k+1/2))``.

    Evaluated as the finite product
    ``prod_{j=1..k} (4 nu^2 - (2j-1)^2) / (4 j)``, which equals the Gamma
    ratio wherever it is defined and is exactly zero when ``nu - k + 1/2``
    hits a pole of the denominator.
    """
    if k < 0 or int(k) != k:
        raise DomainError(f"asymp_coeff needs an integer k >= 0, got {k!r}")
    four_nu2 = 4.0 * nu * nu
    value = 1.0
    for j in range(1, int(k) + 1):
        value *= (four_nu2 - (2 * j - 1) ** 2) / (4.0 * j)
    return value


def unit_phase(t: float) -> complex:
    """``exp(i pi t)``, exact when ``2t`` is an integer."""
    twice = 2.0 * t
    if twice == math.floor(twice):
        return (1 + 0j, 1j, -1 + 0j, -1j)[int(twice) % 4]
    return cmath.exp(1j * math.pi * t)


def _check_order(mu: float) -> float:
    mu = float(mu)
    if not mu >= -0.5:
        raise DomainError(f"Bessel order must be >= -1/2, got mu={mu:g}")
    return mu


def _series_scaled(mu: float, z: np.ndarray) -> np.ndarray:
    # exp(-z) (z/2)^mu / Gamma(mu+1) * sum_k (z^2/4)^k / (k! (mu+1)_k)
    log_pref = -z + mu * np.log(0.5 * z) - math.log(gamma(mu + 1.0))
    q = 0.25 * z * z
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, SERIES_MAX_TERMS + 1):
        term = term * q / (k * (mu + k))
        total += term
        if np.all(term <= SERIES_RTOL * total):
            break
    else:
        raise ConvergenceError(
            f"Bessel power series did not converge in {SERIES_MAX_TERMS} terms (mu={mu:g})"
        )
    return np.exp(log_pref) * total


def _asymptotic_scaled(mu: float, z: np.ndarray) -> np.ndarray:
    # leading Hankel sum only; the reflected sum is O(exp(-2z))
    four_mu2 = 4.0 * mu * mu
    total = np.ones_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, SERIES_MAX_TERMS + 1):
        new = -term * (four_mu2 - (2 * k - 1) ** 2) / (8.0 * k * z)
        # stop at the smallest term of the divergent series; terms may grow
        # while 2k-1 < 2mu before the series turns
        if 2 * k - 1 > 2.0 * abs(mu):
            active &= np.abs(new) < np.abs(term)
        total = np.where(active, total + new, total)
        term = np.where(active, new, term)
        active &= np.abs(new) > SERIES_RTOL * np.abs(total)
        if not active.any():
            break
    return total / np.sqrt(2.0 * np.pi * z)


def _half_integer_scaled(n: int, z: np.ndarray) -> np.ndarray:
    # exact terminating Hankel sums for I_{n+1/2}
    if n == 0:
        return -np.expm1(-2.0 * z) / np.sqrt(2.0 * np.pi * z)
    coef = [asymp_coeff(n + 0.5, k) for k in range(n + 1)]
    inv = 1.0 / (2.0 * z)
    first = np.zeros_like(z)
    second = np.zeros_like(z)
    power = np.ones_like(z)
    for k, c in enumerate(coef):
        first += (-1) ** k * c * power
        second += c * power
        power = power * inv
    sign = -1.0 if n % 2 == 0 else 1.0
    return (first + sign * np.exp(-2.0 * z) * second) / np.sqrt(2.0 * np.pi * z)


def bessel_i_scaled(mu: float, z):
    """Exponentially scaled modified Bessel function ``exp(-z) I_mu(z)``.

    Parameters
    ----------
    mu : float
        Order, ``mu >= -1/2``.
    z : float or array_like
        Nonnegative argument(s).

    Returns
    -------
    float or ndarray
        Same shape as `z`.

    Notes
    -----
    Power series for ``z <= 15 + mu**2/4``, Hankel expansion above. For
    ``mu = n + 1/2`` with ``0 <= n <= 8`` the terminating elementary form is
    used once ``z >= n(n+1)``, below which it loses digits to cancellation.
    """
    mu = _check_order(mu)
    z_arr = np.asarray(z, dtype=float)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    if np.any(z_arr < 0) or np.any(np.isnan(z_arr)):
        raise DomainError("bessel_i_scaled needs z >= 0")
    out = np.empty_like(z_arr)

    zero = z_arr == 0.0
    if mu == 0.0:
        out[zero] = 1.0
    elif mu > 0.0:
        out[zero] = 0.0
    else:
        out[zero] = np.inf

    rest = ~zero
    n = mu - 0.5
    if n == math.floor(n) and 0 <= n <= 8:
        fast = rest & (z_arr >= n * (n + 1))
        if fast.any():
            out[fast] = _half_integer_scaled(int(n), z_arr[fast])
        rest &= ~fast

    cut = 15.0 + 0.25 * mu * mu
    ser = rest & (z_arr <= cut)
    if ser.any():
        out[ser] = _series_scaled(mu, z_arr[ser])
    asy = rest & ~ser
    if asy.any():
        out[asy] = _asymptotic_scaled(mu, z_arr[asy])

    if not np.all(np.isfinite(out[~zero])):
        raise RepresentationError(f"bessel_i_scaled overflowed (mu={mu:g})")
    return float(out[0]) if scalar else out


def bessel_i(mu: float, z):
    """Unscaled ``I_mu(z)``; raises `RepresentationError` if it overflows."""
    scaled = bessel_i_scaled(mu, z)
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr > 709.0):
        raise RepresentationError("I_mu(z) overflows double precision for z > 709")
    with np.errstate(over="ignore"):
        value = scaled * np.exp(z_arr)
    return float(value) if np.ndim(value) == 0 else value


def bessel_i_asymptotic(
    mu: float,
    z: float,
    kmax: int | None = None,
    include_reflection_term: bool = False,
    tol: float | None = None,
    scaled: bool = False,
) -> complex:
    """Truncated Hankel expansion of ``I_mu(z)`` for real ``z > 0``.

    The first sum carries ``exp(z)``; with `include_reflection_term` the
    second sum ``exp(-z + (mu+1/2) pi i) / sqrt(2 pi z) * sum_k (mu,k)/(2z)^k``
    is added, so the result is complex in general.

    Summation stops at `kmax` (``None`` means no limit), at the smallest term
    of the divergent series, or as soon as a coefficient vanishes. If `tol` is
    given and the first omitted term of the leading sum, relative to the
    partial sum, exceeds it, `TruncationError` is raised.

    With ``scaled=True`` the result is multiplied by ``exp(-z)``.
    """
    mu = float(mu)
    z = float(z)
    if not z > 0:
        raise DomainError(f"asymptotic expansion needs z > 0, got {z:g}")
    if kmax is not None and kmax < 0:
        raise DomainError("kmax must be >= 0")
    limit = SERIES_MAX_TERMS if kmax is None else int(kmax)

    terms = [1.0]
    omitted = 0.0
    k = 0
    while True:
        k += 1
        nxt = terms[-1] * (4.0 * mu * mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        if nxt == 0.0:
            break
        if k > limit or (2 * k - 1 > 2.0 * abs(mu) and abs(nxt) >= abs(terms[-1])):
            omitted = abs(nxt)
            break
        terms.append(nxt)

    leading = math.fsum((-1) ** j * t for j, t in enumerate(terms))
    if tol is not None and omitted > tol * abs(leading):
        raise TruncationError(
            f"Hankel expansion truncation error {omitted / abs(leading):.3e} exceeds tol={tol:g}"
        )
    norm = 1.0 / math.sqrt(2.0 * math.pi * z)
    up, down = (1.0, math.exp(-2.0 * z)) if scaled else (math.exp(z), math.exp(-z))
    value = complex(up * norm * leading)
    if include_reflection_term:
        reflected = math.fsum(terms)
        value += down * unit_phase(mu + 0.5) * norm * reflected
    return value


def bessel_j(mu: float, x):
    """Bessel function of the first kind ``J_mu(x)`` for ``x >= 0``."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise DomainError("bessel_j needs x >= 0")
    value = _sp.jv(float(mu), x_arr)
    return float(value) if np.ndim(value) == 0 else value


def erf(x: float) -> float:
    """Error function; odd by construction."""
    x = float(x)
    value = math.erf(abs(x))
    return -value if x < 0 else value


def _erfi_series(y: float) -> float:
    # 2/sqrt(pi) * sum_n y^(2n+1) / (n! (2n+1)), y >= 0
    y2 = y * y
    power = y
    total = y
    n = 0
    while True:
        n += 1
        power *= y2 / n
        term = power / (2 * n + 1)
        total += term
        if term <= SERIES_RTOL * total:
            return 2.0 / SQRT_PI * total
        if n > SERIES_MAX_TERMS:
            raise ConvergenceError("erfi power series did not converge")


def _dawson_asymptotic(y: float) -> float:
    # 1/(2y) * sum_k (2k-1)!! / (2 y^2)^k, y > 6
    inv = 1.0 / (2.0 * y * y)
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        nxt = term * (2 * k - 1) * inv
        if nxt >= term or nxt <= SERIES_RTOL * total:
            break
        term = nxt
        total += term
    return total / (2.0 * y)


_SERIES_SWITCH = 6.0


def dawson(y: float) -> float:
    """Dawson function ``exp(-y^2) * int_0^y exp(t^2) dt``; odd."""
    y = float(y)
    a = abs(y)
    if a <= _SERIES_SWITCH:
        value = 0.5 * SQRT_PI * math.exp(-a * a) * _erfi_series(a)
    else:
        value = _dawson_asymptotic(a)
    return -value if y < 0 else value


def erfi(y: float) -> float:
    """Imaginary error function ``-i erf(i y)``, real and odd.

    Only for ``|y| <= 26``; use `erfi_scaled` beyond that.
    """
    y = float(y)
    a = abs(y)
    if a > ERFI_DIRECT_LIMIT:
        raise RepresentationError(
            f"erfi({y:g}) is too close to overflow; use erfi_scaled for |y| > {ERFI_DIRECT_LIMIT:g}"
        )
    if a <= _SERIES_SWITCH:
        value = _erfi_series(a)
    else:
        value = 2.0 / SQRT_PI * math.exp(a * a) * _dawson_asymptotic(a)
    return -value if y < 0 else value


def erfi_scaled(y: float) -> tuple[int, float]:
    """``erfi(y)`` as ``(sign, log|erfi(y)|)``, valid for any finite `y`."""
    y = float(y)
    a = abs(y)
    if a == 0.0:
        return 0, -math.inf
    sign = -1 if y < 0 else 1
    if a <= _SERIES_SWITCH:
        return sign, math.log(_erfi_series(a))
    return sign, a * a + math.log(2.0 / SQRT_PI * _dawson_asymptotic(a))
