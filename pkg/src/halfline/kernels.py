"""Closed-form imaginary-time kernels on the half-line.

The Hamiltonian is ``p^2/2m + nu(nu-1) hbar^2 / (2 m x^2) + V(x)`` on
``0 < x < inf``. All kernels are written so that the only exponentials
evaluated are a Gaussian in ``x - x'`` and the scaled Bessel function, which
keeps them finite for arbitrarily small time steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError, TruncationError
from .quadrature import composite_gauss_legendre
from .specfun import bessel_i_scaled, bessel_j

__all__ = [
    "Zero",
    "Harmonic",
    "Coulomb",
    "PowerLaw",
    "PotentialSpec",
    "SystemSpec",
    "KernelParams",
    "EigenMode",
    "eigenfunction",
    "orthogonality_check",
    "potential_midpoint",
    "short_time_kernel",
    "spectral_kernel",
    "exact_free_halfline",
    "radial_oscillator_kernel",
    "heat_equation_residual",
]


# -- potentials --------------------------------------------------------------


@dataclass(frozen=True)
class Zero:
    def value(self, x, mass: float = 1.0):
        return np.zeros_like(np.asarray(x, dtype=float))

    def continued_value(self, xx, mass: float = 1.0):
        return np.zeros_like(np.asarray(xx, dtype=float))

    def __str__(self) -> str:
        return "zero"


@dataclass(frozen=True)
class Harmonic:
    """``V(x) = m omega^2 x^2 / 2``."""

    omega: float

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError(f"harmonic potential needs omega > 0, got {self.omega!r}")

    def value(self, x, mass: float = 1.0):
        x = np.asarray(x, dtype=float)
        return 0.5 * mass * self.omega**2 * x * x

    def continued_value(self, xx, mass: float = 1.0):
        # V(sqrt(-x x')) = -m omega^2 x x' / 2
        return -0.5 * mass * self.omega**2 * np.asarray(xx, dtype=float)

    def __str__(self) -> str:
        return f"harmonic:omega={self.omega!r}"


@dataclass(frozen=True)
class Coulomb:
    """``V(x) = -alpha / x``."""

    alpha: float

    def value(self, x, mass: float = 1.0):
        return -self.alpha / np.asarray(x, dtype=float)

    def continued_value(self, xx, mass: float = 1.0):
        raise DomainError(
            "Coulomb potential is odd under x -> -x; V(sqrt(-x x')) is not real"
        )

    def __str__(self) -> str:
        return f"coulomb:alpha={self.alpha!r}"


@dataclass(frozen=True)
class PowerLaw:
    """``V(x) = c x^p`` with ``p > -2``."""

    c: float
    p: float

    def __post_init__(self):
        if not self.p > -2:
            raise DomainError(f"power-law potential needs p > -2, got p={self.p!r}")

    @property
    def even(self) -> bool:
        return self.p >= 0 and self.p == math.floor(self.p) and int(self.p) % 2 == 0

    def value(self, x, mass: float = 1.0):
        return self.c * np.asarray(x, dtype=float) ** self.p

    def continued_value(self, xx, mass: float = 1.0):
        if not self.even:
            raise DomainError(
                f"power-law potential with p={self.p!r} is not even; V(sqrt(-x x')) is not real"
            )
        half = int(self.p) // 2
        return self.c * (-1.0) ** half * np.asarray(xx, dtype=float) ** half

    def __str__(self) -> str:
        return f"power:c={self.c!r},p={self.p!r}"


PotentialSpec = Union[Zero, Harmonic, Coulomb, PowerLaw]


# -- parameters ----------------------------------------------------------------


@dataclass(frozen=True)
class SystemSpec:
    """Physical parameters of ``H = p^2/2m + nu(nu-1)hbar^2/(2mx^2) + V(x)``.

    `x_min` is the smallest coordinate any kernel accepts.
    """

    nu: float = 1.0
    mass: float = 1.0
    hbar: float = 1.0
    potential: PotentialSpec = field(default_factory=Zero)
    x_min: float = 1e-8

    def __post_init__(self):
        if not self.nu >= 0.5:
            raise DomainError(f"nu must be >= 1/2, got {self.nu!r}")
        if not self.mass > 0:
            raise DomainError(f"mass must be > 0, got {self.mass!r}")
        if not self.hbar > 0:
            raise DomainError(f"hbar must be > 0, got {self.hbar!r}")

    @property
    def order(self) -> float:
        """Bessel order ``nu - 1/2``."""
        return self.nu - 0.5

    @property
    def centrifugal(self) -> float:
        """Dimensionless strength ``nu (nu - 1)``."""
        return self.nu * (self.nu - 1.0)

    def lam(self, eps: float) -> float:
        return self.hbar * eps / self.mass


@dataclass(frozen=True)
class KernelParams:
    """Imaginary time step and its length-squared form ``lam = hbar eps / m``."""

    eps: float
    lam: float

    @classmethod
    def from_spec(cls, spec: SystemSpec, eps: float) -> "KernelParams":
        if not eps > 0:
            raise DomainError(f"eps must be > 0, got {eps!r}")
        return cls(eps=float(eps), lam=spec.hbar * eps / spec.mass)


@dataclass(frozen=True)
class EigenMode:
    k: float
    energy: float

    @classmethod
    def from_spec(cls, spec: SystemSpec, k: float) -> "EigenMode":
        if not k >= 0:
            raise DomainError(f"wave number must be >= 0, got {k!r}")
        return cls(k=float(k), energy=(spec.hbar * k) ** 2 / (2.0 * spec.mass))


def _positions(spec: SystemSpec, **named):
    out = []
    for name, value in named.items():
        arr = np.asarray(value, dtype=float)
        if np.any(~(arr > 0)):
            raise DomainError(f"{name} must be > 0")
        if np.any(arr < spec.x_min):
            raise DomainError(f"{name} below the coordinate floor x_min={spec.x_min:g}")
        out.append(arr)
    return out


def _as_result(value):
    return float(value) if np.ndim(value) == 0 else value


# -- eigenfunctions --------------------------------------------------------------


def eigenfunction(spec: SystemSpec, k: float, x):
    """``sqrt(k x) J_{nu-1/2}(k x)``, normalised to ``delta(k - k')``."""
    if not isinstance(spec.potential, Zero):
        raise DomainError("eigenfunctions are only available for V = 0")
    if not k >= 0:
        raise DomainError(f"k must be >= 0, got {k!r}")
    (x,) = _positions(spec, x=x)
    kx = k * x
    return _as_result(np.sqrt(kx) * bessel_j(spec.order, kx))


def orthogonality_check(spec: SystemSpec, k: float, kprime: float, a: float) -> float:
    """Gaussian-regulated eigenfunction overlap, quadrature vs closed form.

    Evaluates ``int_0^inf x exp(-a^2 x^2) J_mu(k x) J_mu(k' x) dx`` by
    adaptive quadrature and by ``exp(-(k^2+k'^2)/(4a^2)) I_mu(k k'/(2a^2)) / (2a^2)``
    and returns the absolute difference.
    """
    if not isinstance(spec.potential, Zero):
        raise DomainError("orthogonality_check needs V = 0")
    if not (k > 0 and kprime > 0):
        raise DomainError("k and kprime must be > 0")
    if not a > 0:
        raise DomainError("regulator a must be > 0")
    mu = spec.order

    def integrand(x):
        return x * math.exp(-a * a * x * x) * bessel_j(mu, k * x) * bessel_j(mu, kprime * x)

    cutoff = math.sqrt(45.0) / a
    # one subinterval per half oscillation keeps QUADPACK happy
    pieces = max(1, int(cutoff * (k + kprime) / math.pi) + 1)
    edges = np.linspace(0.0, cutoff, pieces + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err, info = _quad(integrand, lo, hi)
        total += val
    s = 2.0 * a * a
    closed = math.exp(-((k - kprime) ** 2) / (2.0 * s)) * bessel_i_scaled(mu, k * kprime / s) / s
    return abs(total - closed)


def _quad(f, lo, hi):
    val, err, info = integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200, full_output=1)[:3]
    if err > 1e-9 * max(abs(val), 1e-300) and err > 1e-13:
        raise ConvergenceError(f"quadrature on [{lo:g}, {hi:g}] did not converge (err={err:.2e})")
    return val, err, info


# -- short-time kernel -------------------------------------------------------------


def potential_midpoint(spec: SystemSpec, x, xprime):
    """Potential at the geometric midpoint, ``V(sqrt(x x'))``."""
    x, xprime = _positions(spec, x=x, xprime=xprime)
    return _as_result(spec.potential.value(np.sqrt(x * xprime), spec.mass))


def short_time_kernel(spec: SystemSpec, x, xprime, eps: float):
    """Short-time kernel with the potential sampled at ``sqrt(x x')``.

    ``(sqrt(x x')/lam) Ie_{nu-1/2}(x x'/lam) exp(-(x-x')^2/(2 lam) - eps V/hbar)``
    with ``lam = hbar eps / m`` and ``Ie`` the scaled Bessel function. Exact
    for ``V = 0``. Broadcasts over array `x`, `xprime`.
    """
    if not eps > 0:
        raise DomainError(f"eps must be > 0, got {eps!r}")
    x, xprime = _positions(spec, x=x, xprime=xprime)
    lam = spec.lam(eps)
    xx = x * xprime
    mid = np.sqrt(xx)
    # x x' is symmetric bitwise, (x - x')^2 too
    gauss = -((x - xprime) ** 2) / (2.0 * lam)
    pot = spec.potential.value(mid, spec.mass) * (eps / spec.hbar)
    value = mid / lam * bessel_i_scaled(spec.order, xx / lam) * np.exp(gauss - pot)
    return _as_result(value)


def spectral_kernel(
    spec: SystemSpec,
    x: float,
    xprime: float,
    eps: float,
    kmax: float | None = None,
    nodes: int = 1024,
    tail_tol: float = 1e-16,
) -> float:
    """Short-time kernel from the eigenfunction expansion.

    Integrates ``sqrt(x x') int_0^kmax k J(kx) J(kx') exp(-lam k^2/2) dk`` on a
    composite Gauss-Legendre grid of `nodes` points, then applies the
    midpoint potential factor. `kmax` defaults to the point where the
    Boltzmann weight drops to `tail_tol`.
    """
    if not eps > 0:
        raise DomainError(f"eps must be > 0, got {eps!r}")
    x, xprime = (float(v) for v in _positions(spec, x=x, xprime=xprime))
    lam = spec.lam(eps)
    if kmax is None:
        kmax = math.sqrt(2.0 * (math.log(1.0 / tail_tol) + 1.0) / lam)
    tail = math.exp(-0.5 * lam * kmax * kmax)
    if tail > tail_tol:
        raise TruncationError(
            f"spectral cutoff kmax={kmax:g} leaves Boltzmann weight {tail:.2e} > {tail_tol:g}"
        )
    per_panel = 32
    panels = max(1, -(-int(nodes) // per_panel))
    k, w = composite_gauss_legendre(0.0, kmax, per_panel, panels)
    mu = spec.order
    integrand = k * bessel_j(mu, k * x) * bessel_j(mu, k * xprime) * np.exp(-0.5 * lam * k * k)
    value = math.sqrt(x * xprime) * float(np.dot(w, integrand))
    pot = float(spec.potential.value(math.sqrt(x * xprime), spec.mass))
    return value * math.exp(-eps * pot / spec.hbar)


# -- exact reference kernels -------------------------------------------------------------


def exact_free_halfline(mass: float, hbar: float, a, b, beta: float):
    """Free particle on the half-line, direct minus reflected Gaussian."""
    if not beta > 0:
        raise DomainError(f"beta must be > 0, got {beta!r}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise DomainError("a and b must be >= 0")
    lam = hbar * beta / mass
    # exp(-(a-b)^2/2lam) * (1 - exp(-2ab/lam)), written to avoid cancellation
    value = np.exp(-((a - b) ** 2) / (2.0 * lam)) * -np.expm1(-2.0 * a * b / lam)
    return _as_result(value / math.sqrt(2.0 * math.pi * lam))


def radial_oscillator_kernel(nu: float, omega: float, mass: float, hbar: float, a, b, beta: float):
    """Exact kernel of the radial harmonic oscillator with centrifugal term."""
    if not (omega > 0 and beta > 0):
        raise DomainError("omega and beta must be > 0")
    if not nu >= 0.5:
        raise DomainError(f"nu must be >= 1/2, got {nu!r}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise DomainError("a and b must be > 0")
    wb = omega * beta
    s = math.sinh(wb)
    scale = mass * omega / hbar
    z = scale * a * b / s
    # coth(a^2+b^2) - 2ab/sinh = (a-b)^2 coth + 2ab tanh(wb/2)
    expo = -0.5 * scale * ((a - b) ** 2 / math.tanh(wb) + 2.0 * a * b * math.tanh(0.5 * wb))
    value = scale * np.sqrt(a * b) / s * bessel_i_scaled(nu - 0.5, z) * np.exp(expo)
    return _as_result(value)


def heat_equation_residual(
    kernel: Callable[[float, float, float], float],
    a: float,
    b: float,
    beta: float,
    h_a: float,
    h_beta: float,
    mass: float = 1.0,
    hbar: float = 1.0,
) -> float:
    """Central-difference residual of ``-hbar dK/dbeta + (hbar^2/2m) d^2K/da^2``.

    `kernel` is called as ``kernel(a, b, beta)``.
    """
    dbeta = (kernel(a, b, beta + h_beta) - kernel(a, b, beta - h_beta)) / (2.0 * h_beta)
    d2a = (kernel(a + h_a, b, beta) - 2.0 * kernel(a, b, beta) + kernel(a - h_a, b, beta)) / h_a**2
    return -hbar * dbeta + hbar**2 / (2.0 * mass) * d2a
