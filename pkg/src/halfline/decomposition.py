"""Direct/reflected path decomposition of the short-time kernel.

The reflected contribution follows from continuing ``x x' -> exp(+-i pi) x x'``
inside the Bessel function and carries the phase ``exp(+-i nu pi)``. The
erf-based integrals below compose two exact ``nu = 2`` kernels in closed
form; all ``erf(i y)`` factors are carried as the real ``erfi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError
from .kernels import SystemSpec, Zero, _positions
from .quadrature import _reference_rule, composite_gauss_legendre
from .specfun import SQRT_PI, dawson, unit_phase

__all__ = [
    "PathDecomposition",
    "SaddleWidth",
    "CrossTermReport",
    "phase_factor",
    "direct_term",
    "reflected_term",
    "decompose",
    "nu2_factored_form",
    "I_ab",
    "I_ab_scaled",
    "sinhcosh_integral",
    "sinhcosh_integral_scaled",
    "compose_closed_form_nu2",
    "product_term",
    "cross_term_check",
    "direct_product_check",
    "VALIDITY_THRESHOLD",
]

# decomposition is trusted while lam / (x x') stays below this
VALIDITY_THRESHOLD = 1.0

SINHCOSH_KINDS = ("sinh-cosh", "cosh-sinh", "sinh-sinh")


def phase_factor(nu: float, branch: int = 1) -> complex:
    """``exp(i nu pi branch)``; exact for half-integer ``nu``."""
    if branch not in (1, -1):
        raise DomainError(f"branch must be +1 or -1, got {branch!r}")
    return unit_phase(branch * nu)


@dataclass(frozen=True)
class PathDecomposition:
    x: float
    xprime: float
    eps: float
    direct: complex
    reflected: complex
    phase: complex
    branch: int
    valid: bool
    total: complex = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", self.direct + self.reflected)


@dataclass(frozen=True)
class SaddleWidth:
    """Widths ``lambda1, lambda2`` and ``K = sqrt(l1 l2 / (2 (l1 + l2)))``."""

    lambda1: float
    lambda2: float
    K: float = field(init=False)

    def __post_init__(self):
        if not (self.lambda1 > 0 and self.lambda2 > 0):
            raise DomainError("lambda1 and lambda2 must be > 0")
        object.__setattr__(
            self, "K", math.sqrt(self.lambda1 * self.lambda2 / (2.0 * (self.lambda1 + self.lambda2)))
        )

    @property
    def K2(self) -> float:
        return self.lambda1 * self.lambda2 / (2.0 * (self.lambda1 + self.lambda2))


@dataclass(frozen=True)
class CrossTermReport:
    numeric_lhs: float
    saddle_rhs: float
    eps: float
    rel_error: float
    pieces: tuple[float, ...] = ()


# -- path terms ------------------------------------------------------------------


def _prefactor(lam: float) -> float:
    return 1.0 / math.sqrt(2.0 * math.pi * lam)


def direct_term(spec: SystemSpec, x: float, xprime: float, eps: float) -> float:
    """Direct-path amplitude.

    ``exp(-(x-x')^2/(2 lam) - nu(nu-1) lam/(2 x x') - eps V(sqrt(x x'))/hbar) / sqrt(2 pi lam)``
    """
    if not eps > 0:
        raise DomainError(f"eps must be > 0, got {eps!r}")
    x, xprime = (float(v) for v in _positions(spec, x=x, xprime=xprime))
    lam = spec.lam(eps)
    xx = x * xprime
    pot = float(spec.potential.value(math.sqrt(xx), spec.mass))
    expo = -((x - xprime) ** 2) / (2.0 * lam) - spec.centrifugal * lam / (2.0 * xx) - eps * pot / spec.hbar
    return _prefactor(lam) * math.exp(expo)


def reflected_term(spec: SystemSpec, x: float, xprime: float, eps: float, branch: int = 1) -> complex:
    """Reflected-path amplitude, ``x x'`` continued to ``-x x'``.

    The centrifugal exponent flips sign and the potential is sampled at
    ``sqrt(-x x')``, which is only real for even potentials.
    """
    if not eps > 0:
        raise DomainError(f"eps must be > 0, got {eps!r}")
    x, xprime = (float(v) for v in _positions(spec, x=x, xprime=xprime))
    phase = phase_factor(spec.nu, branch)
    lam = spec.lam(eps)
    xx = x * xprime
    pot = float(spec.potential.continued_value(xx, spec.mass))
    expo = -((x + xprime) ** 2) / (2.0 * lam) + spec.centrifugal * lam / (2.0 * xx) - eps * pot / spec.hbar
    return phase * _prefactor(lam) * math.exp(expo)


def decompose(spec: SystemSpec, x: float, xprime: float, eps: float, branch: int = 1) -> PathDecomposition:
    """Direct plus reflected amplitudes, flagged invalid once ``lam/(x x') > 1``."""
    direct = direct_term(spec, x, xprime, eps)
    reflected = reflected_term(spec, x, xprime, eps, branch)
    valid = spec.lam(eps) / (x * xprime) <= VALIDITY_THRESHOLD
    return PathDecomposition(
        x=float(x),
        xprime=float(xprime),
        eps=float(eps),
        direct=complex(direct),
        reflected=reflected,
        phase=phase_factor(spec.nu, branch),
        branch=branch,
        valid=bool(valid),
    )


def nu2_factored_form(
    x: float, xprime: float, eps: float, mass: float = 1.0, hbar: float = 1.0
) -> tuple[float, float]:
    """The two terms ``(1 -+ lam/(x x')) exp(-(x -+ x')^2/(2 lam)) / sqrt(2 pi lam)``.

    Their sum is the ``nu = 2`` kernel; each term alone diverges as
    ``x x' -> 0``.
    """
    if not (x > 0 and xprime > 0 and eps > 0):
        raise DomainError("x, xprime and eps must be > 0")
    lam = hbar * eps / mass
    r = lam / (x * xprime)
    pre = _prefactor(lam)
    first = pre * (1.0 - r) * math.exp(-((x - xprime) ** 2) / (2.0 * lam))
    second = pre * (1.0 + r) * math.exp(-((x + xprime) ** 2) / (2.0 * lam))
    return first, second


# -- erf-type integrals ----------------------------------------------------------------


def _sums(a: float, b: float, sw: SaddleWidth):
    s = a / sw.lambda1 + b / sw.lambda2
    d = a / sw.lambda1 - b / sw.lambda2
    top = sw.K2 * max(s * s, d * d)
    gs = math.exp(sw.K2 * s * s - top)
    gd = math.exp(sw.K2 * d * d - top)
    return s, d, gs, gd, top


def _erfi_tilt(y: float, K: float) -> float:
    # erfi(K y) * exp(-K^2 y^2)
    return 2.0 / SQRT_PI * dawson(K * y)


def _erfi_diff_tilted(center: float, half: float, top: float) -> float:
    """``(erfi(center + half) - erfi(center - half)) * exp(-top)``.

    Taking the interval as centre and half-width keeps small widths exact;
    short intervals are integrated directly to avoid cancellation.
    """
    u1, u2 = center - half, center + half
    if 2.0 * abs(half) * (1.0 + abs(center) + abs(half)) < 1.0:
        x, w = _reference_rule(24)
        t = center + abs(half) * np.asarray(x)
        val = 2.0 / SQRT_PI * abs(half) * float(np.dot(w, np.exp(t * t - top)))
        return val if half > 0 else -val
    return 2.0 / SQRT_PI * (dawson(u2) * math.exp(u2 * u2 - top) - dawson(u1) * math.exp(u1 * u1 - top))


def I_ab_scaled(a: float, b: float, sw: SaddleWidth) -> tuple[float, float]:
    """``I(a, b)`` as ``(mantissa, log_scale)`` with ``I = mantissa * exp(log_scale)``."""
    s, d, gs, gd, top = _sums(a, b, sw)
    return 0.5 * SQRT_PI * sw.K * (gs + gd), top


def I_ab(a: float, b: float, sw: SaddleWidth) -> float:
    """``int_0^inf exp(-x^2/(4K^2)) cosh(a x/l1) cosh(b x/l2) dx`` in closed form.

    ``sqrt(pi) K / 2 * [exp(K^2 (a/l1 + b/l2)^2) + exp(K^2 (a/l1 - b/l2)^2)]``.
    Raises `RepresentationError` when the result overflows; use `I_ab_scaled`.
    """
    mant, top = I_ab_scaled(a, b, sw)
    return _unscale(mant, top)


def _unscale(mant: float, top: float) -> float:
    from .errors import RepresentationError

    if top > 700.0:
        raise RepresentationError(f"result overflows (log scale {top:.1f}); use the scaled variant")
    return mant * math.exp(top)


def sinhcosh_integral_scaled(a: float, b: float, sw: SaddleWidth, which: str) -> tuple[float, float]:
    """Scaled closed forms of the sinh/cosh integrals, as ``(mantissa, log_scale)``.

    ``sinh-cosh``: ``int e^{-x^2/4K^2} (l1/(a x)) sinh(a x/l1) cosh(b x/l2) dx``
    ``cosh-sinh``: ``int e^{-x^2/4K^2} cosh(a x/l1) (l2/(b x)) sinh(b x/l2) dx``
    ``sinh-sinh``: ``int e^{-x^2/4K^2} (l1 l2/(a b x^2)) sinh(a x/l1) sinh(b x/l2) dx``
    """
    if which not in SINHCOSH_KINDS:
        raise DomainError(f"which must be one of {SINHCOSH_KINDS}, got {which!r}")
    l1, l2, K = sw.lambda1, sw.lambda2, sw.K
    s, d, gs, gd, top = _sums(a, b, sw)
    es = _erfi_tilt(s, K) * gs
    ed = _erfi_tilt(d, K) * gd

    if which == "sinh-cosh":
        if a == 0.0:
            return SQRT_PI * K * gs, top
        # erfi(Ks) + erfi(Kd) = erfi(Ks) - erfi(-Kd), erfi being odd
        return math.pi * l1 / (4.0 * a) * _erfi_diff_tilted(K * b / l2, K * a / l1, top), top
    if which == "cosh-sinh":
        if b == 0.0:
            return SQRT_PI * K * gs, top
        return math.pi * l2 / (4.0 * b) * _erfi_diff_tilted(K * a / l1, K * b / l2, top), top

    if a == 0.0 and b == 0.0:
        return SQRT_PI * K, 0.0
    if a == 0.0:
        return math.pi * l2 / (2.0 * b) * es, top
    if b == 0.0:
        return math.pi * l1 / (2.0 * a) * es, top
    bracket = s * es - d * ed - (gs - gd) / (K * SQRT_PI)
    return math.pi * l1 * l2 / (4.0 * a * b) * bracket, top


def sinhcosh_integral(a: float, b: float, sw: SaddleWidth, which: str) -> float:
    """Closed form of the sinh/cosh integral `which`; see `sinhcosh_integral_scaled`."""
    mant, top = sinhcosh_integral_scaled(a, b, sw, which)
    return _unscale(mant, top)


def compose_closed_form_nu2(
    a: float, b: float, eps1: float, eps2: float, mass: float = 1.0, hbar: float = 1.0
) -> float:
    """``int_0^inf K(a, x; eps1) K(x, b; eps2) dx`` for ``nu = 2``, ``V = 0``.

    Each kernel is ``sqrt(2/(pi lam)) e^{-(a^2+x^2)/(2 lam)} (cosh z - sinh z / z)``,
    so the product splits into the four integrals I, sinh-cosh, cosh-sinh
    and sinh-sinh, all of which have erfi closed forms.
    """
    if not (a > 0 and b > 0):
        raise DomainError("a and b must be > 0")
    if not (eps1 > 0 and eps2 > 0):
        raise DomainError("eps1 and eps2 must be > 0")
    l1 = hbar * eps1 / mass
    l2 = hbar * eps2 / mass
    sw = SaddleWidth(l1, l2)
    i_cc, top = I_ab_scaled(a, b, sw)
    i_sc, _ = sinhcosh_integral_scaled(a, b, sw, "sinh-cosh")
    i_cs, _ = sinhcosh_integral_scaled(a, b, sw, "cosh-sinh")
    i_ss, _ = sinhcosh_integral_scaled(a, b, sw, "sinh-sinh")
    bracket = i_cc - i_sc - i_cs + i_ss
    expo = -a * a / (2.0 * l1) - b * b / (2.0 * l2) + top
    return 2.0 / (math.pi * math.sqrt(l1 * l2)) * math.exp(expo) * bracket


# -- saddle-point checks -------------------------------------------------------------


def product_term(term: int, x: float, xprime: float, y, lam: float):
    """Term 1..4 of the product of two exponentiated ``nu = 2`` kernels.

    Without the overall ``1/(2 pi lam)``. Terms 1 and 2 are direct*direct and
    reflected*reflected, terms 3 and 4 the cross terms.
    """
    y = np.asarray(y, dtype=float)
    ix, ixp = 1.0 / x, 1.0 / xprime
    if term == 1:
        quad, slow = (x - y) ** 2 + (y - xprime) ** 2, -(lam / y) * (ix + ixp)
    elif term == 2:
        quad, slow = (x + y) ** 2 + (y + xprime) ** 2, (lam / y) * (ix + ixp)
    elif term == 3:
        quad, slow = (x - y) ** 2 + (y + xprime) ** 2, -(lam / y) * (ix - ixp)
    elif term == 4:
        quad, slow = (x + y) ** 2 + (y - xprime) ** 2, (lam / y) * (ix - ixp)
    else:
        raise DomainError(f"term must be 1..4, got {term!r}")
    return np.exp(-quad / (2.0 * lam) + slow)


def _gauss_window_integral(f, center: float, width: float, split_at_zero: bool = False, nodes: int = 32, panels: int = 8):
    lo, hi = center - 12.0 * width, center + 12.0 * width
    if split_at_zero and lo < 0.0 < hi:
        parts = [(lo, 0.0), (0.0, hi)]
    else:
        parts = [(lo, hi)]
    out = []
    for p, q in parts:
        yy, ww = composite_gauss_legendre(p, q, nodes, panels)
        out.append(float(np.dot(ww, f(yy))))
    return out


def _potential_of_product(potential, u, mass):
    # V(sqrt(u)) for either sign of u
    u = np.asarray(u, dtype=float)
    pos = np.where(u >= 0, u, 0.0)
    neg = np.where(u < 0, -u, 0.0)
    direct = potential.value(np.sqrt(pos), mass) if not isinstance(potential, Zero) else 0.0
    return np.where(u >= 0, direct, potential.continued_value(neg, mass))


def cross_term_check(spec: SystemSpec, x: float, xprime: float, eps: float) -> CrossTermReport:
    """Folded cross-term integral vs its saddle-point value.

    Integrates, over the whole real line,
    ``(m/(2 pi hbar eps)) e^{i nu pi} exp[-((x-y)^2+(y+x')^2)/(2 lam)
    - nu(nu-1) lam/(2y) (1/x - 1/x') - eps (V(sqrt(xy)) + V(sqrt(-x'y)))/hbar]``
    and compares with
    ``e^{i nu pi} sqrt(m/(4 pi hbar eps)) exp[-(x+x')^2/(4 lam) + nu(nu-1) lam/(x x')
    - 2 eps V(sqrt(-x x'))/hbar]``.

    Only integer ``nu`` is accepted: for other orders the fold multiplies
    the negative half-line by ``exp(2 i nu pi)``. When
    ``nu(nu-1)(1/x - 1/x') != 0`` the integrand has an essential singularity
    at ``y = 0`` and the integral diverges, which raises `ConvergenceError`.

    `pieces` holds the negative- and positive-``y`` halves, i.e. the two
    original half-line cross terms.
    """
    if spec.nu != math.floor(spec.nu):
        raise DomainError(
            f"cross_term_check needs integer nu; nu={spec.nu!r} leaves a phase exp(2 i nu pi) != 1 "
            "after folding y -> -y"
        )
    if not eps > 0:
        raise DomainError(f"eps must be > 0, got {eps!r}")
    x, xprime = (float(v) for v in _positions(spec, x=x, xprime=xprime))
    lam = spec.lam(eps)
    pot_rhs = float(_potential_of_product(spec.potential, -x * xprime, spec.mass))
    coeff = spec.centrifugal * lam / 2.0 * (1.0 / x - 1.0 / xprime)
    if coeff != 0.0:
        raise ConvergenceError(
            "folded cross-term integrand has an essential singularity exp(-c/y) at y=0 "
            f"(c={coeff:.3g}); the full-line integral diverges unless x == xprime"
        )
    center = 0.5 * (x - xprime)
    shift = -0.5 * (x + xprime) ** 2 / (2.0 * lam)

    def integrand(y):
        # Gaussian part relative to its peak value exp(shift)
        quad = -((x - y) ** 2 + (y + xprime) ** 2) / (2.0 * lam) - shift
        pot = _potential_of_product(spec.potential, x * y, spec.mass) + _potential_of_product(
            spec.potential, -xprime * y, spec.mass
        )
        return np.exp(quad - eps * pot / spec.hbar)

    parts = _gauss_window_integral(integrand, center, math.sqrt(lam), split_at_zero=True)
    sign = unit_phase(spec.nu).real
    pre = sign * spec.mass / (2.0 * math.pi * spec.hbar * eps)
    scaled_lhs = pre * sum(parts)
    scaled_rhs = sign * math.sqrt(spec.mass / (4.0 * math.pi * spec.hbar * eps)) * math.exp(
        spec.centrifugal * lam / (x * xprime) - 2.0 * eps * pot_rhs / spec.hbar
    )
    rel = abs(scaled_lhs - scaled_rhs) / abs(scaled_rhs)
    peak = math.exp(shift)
    return CrossTermReport(
        numeric_lhs=scaled_lhs * peak,
        saddle_rhs=scaled_rhs * peak,
        eps=float(eps),
        rel_error=rel,
        pieces=tuple(pre * p * peak for p in parts),
    )


def direct_product_check(
    x: float, xprime: float, eps: float, mass: float = 1.0, hbar: float = 1.0
) -> CrossTermReport:
    """Saddle evaluation of terms 1 and 3 of the ``nu = 2`` product vs ``K(2 eps)``.

    The Gaussian factor of each term is integrated over the real line by
    quadrature, and its slowly varying factor ``exp(-+ (lam/y)(1/x +- 1/x'))``
    is taken at the saddle, ``y = (x + x')/2`` resp. ``y = (x - x')/2``
    (for term 3 the saddle value ``2 lam/(x x')`` is its limit as
    ``x' -> x``). The literal integrals diverge at ``y = 0``.

    `saddle_rhs` is the two-path form of ``K(x, x'; 2 eps)``,
    ``[e^{-(x-x')^2/(4lam) - 2lam/(xx')} + e^{-(x+x')^2/(4lam) + 2lam/(xx')}] / sqrt(4 pi lam)``.
    """
    if not (x > 0 and xprime > 0 and eps > 0):
        raise DomainError("x, xprime and eps must be > 0")
    lam = hbar * eps / mass
    y1 = 0.5 * (x + xprime)
    y3 = 0.5 * (x - xprime)
    slow1 = -(lam / y1) * (1.0 / x + 1.0 / xprime)
    slow3 = 2.0 * lam / (x * xprime)

    def gauss1(y):
        return np.exp(-((x - y) ** 2 + (y - xprime) ** 2) / (2.0 * lam))

    def gauss3(y):
        return np.exp(-((x - y) ** 2 + (y + xprime) ** 2) / (2.0 * lam))

    g1 = sum(_gauss_window_integral(gauss1, y1, math.sqrt(lam)))
    g3 = sum(_gauss_window_integral(gauss3, y3, math.sqrt(lam)))
    lhs = (g1 * math.exp(slow1) + g3 * math.exp(slow3)) / (2.0 * math.pi * lam)

    lam2 = 2.0 * lam
    rhs = (
        math.exp(-((x - xprime) ** 2) / (2.0 * lam2) - lam2 / (x * xprime))
        + math.exp(-((x + xprime) ** 2) / (2.0 * lam2) + lam2 / (x * xprime))
    ) / math.sqrt(2.0 * math.pi * lam2)
    return CrossTermReport(numeric_lhs=lhs, saddle_rhs=rhs, eps=float(eps), rel_error=abs(lhs - rhs) / abs(rhs))
