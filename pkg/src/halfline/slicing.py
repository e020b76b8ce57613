"""Time-sliced composition of short-time kernels on the half-line.

Kernels are sampled on composite Gauss-Legendre nodes on ``[0, x_max]`` and
composed as dense matrices (Chapman-Kolmogorov). The sliced propagator
``K_N(a, b; beta)`` keeps its first and last factors at the exact endpoints.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DomainError, GridMismatchError, TailBoundError
from .kernels import (
    Harmonic,
    SystemSpec,
    Zero,
    radial_oscillator_kernel,
    short_time_kernel,
)
from .quadrature import composite_gauss_legendre

__all__ = [
    "QuadratureSpec",
    "KernelMatrix",
    "ConvergenceRecord",
    "default_x_max",
    "build_kernel_matrix",
    "compose",
    "time_sliced_kernel",
    "exact_reference",
    "convergence_study",
    "fitted_order",
    "compose_points",
]

# error level below which slicing counts as exact
EXACT_FLOOR = 1e-11


class ResolutionWarning(UserWarning):
    """Node spacing is too coarse for the kernel width."""


def default_x_max(spec: SystemSpec, a: float, b: float, beta: float) -> float:
    """``max(a,b) + 12 sqrt(hbar beta/m) + 3/sqrt(m omega^2 beta/hbar + 1)``."""
    omega = spec.potential.omega if isinstance(spec.potential, Harmonic) else 0.0
    width = math.sqrt(spec.hbar * beta / spec.mass)
    return max(a, b) + 12.0 * width + 3.0 / math.sqrt(spec.mass * omega**2 * beta / spec.hbar + 1.0)


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre rule on ``[0, x_max]``.

    ``x_max=None`` defers the truncation radius to `default_x_max` for the
    problem at hand.
    """

    nodes_per_panel: int = 48
    panels: int = 8
    x_max: float | None = None
    tail_tolerance: float = 1e-14

    def __post_init__(self):
        if self.nodes_per_panel < 2:
            raise DomainError("nodes_per_panel must be >= 2")
        if self.panels < 1:
            raise DomainError("panels must be >= 1")
        if self.x_max is not None and not self.x_max > 0:
            raise DomainError("x_max must be > 0")
        if not self.tail_tolerance > 0:
            raise DomainError("tail_tolerance must be > 0")

    @property
    def size(self) -> int:
        return self.nodes_per_panel * self.panels

    def grid(self) -> tuple[np.ndarray, np.ndarray]:
        if self.x_max is None:
            raise DomainError("QuadratureSpec.x_max is unset")
        return composite_gauss_legendre(0.0, self.x_max, self.nodes_per_panel, self.panels)

    def tail_mass(self, x_peak: float, lam_total: float) -> float:
        gap = self.x_max - x_peak
        if gap <= 0:
            return 1.0
        return math.exp(-gap * gap / (2.0 * lam_total))

    def check_tail(self, x_peak: float, lam_total: float) -> None:
        tail = self.tail_mass(x_peak, lam_total)
        if tail > self.tail_tolerance:
            raise TailBoundError(
                f"x_max={self.x_max:g} leaves Gaussian tail mass {tail:.2e} beyond "
                f"tail_tolerance={self.tail_tolerance:g}"
            )

    def check_spacing(self, lam: float) -> None:
        spacing = self.x_max / self.size
        if spacing > math.sqrt(lam) / 3.0:
            warnings.warn(
                f"node spacing {spacing:.3g} exceeds sqrt(lam)/3 = {math.sqrt(lam) / 3:.3g}; "
                "the short-time kernel is under-resolved",
                ResolutionWarning,
                stacklevel=3,
            )

    @classmethod
    def for_problem(
        cls,
        spec: SystemSpec,
        a: float,
        b: float,
        beta: float,
        n_slices: int,
        nodes_per_panel: int = 48,
        min_panels: int = 8,
        tail_tolerance: float = 1e-14,
    ) -> "QuadratureSpec":
        """Default x_max, with panels added until spacing <= sqrt(lam)/3."""
        x_max = default_x_max(spec, a, b, beta)
        lam = spec.lam(beta / n_slices)
        needed = x_max / (math.sqrt(lam) / 3.0)
        panels = max(min_panels, math.ceil(needed / nodes_per_panel))
        return cls(nodes_per_panel, panels, x_max, tail_tolerance)


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Kernel sampled on quadrature nodes, ``values[i, j] = K(x_i, x_j)``."""

    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    eps_total: float

    def __post_init__(self):
        for name in ("nodes", "weights", "values"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.nodes.size
        if self.values.shape != (n, n) or self.weights.shape != (n,):
            raise DomainError("KernelMatrix shapes are inconsistent")
        if np.any(np.diff(self.nodes) <= 0):
            raise DomainError("KernelMatrix nodes must be strictly increasing")
        if np.any(self.weights <= 0):
            raise DomainError("KernelMatrix weights must be positive")

    def same_grid(self, other: "KernelMatrix") -> bool:
        return np.array_equal(self.nodes, other.nodes) and np.array_equal(self.weights, other.weights)


@dataclass
class ConvergenceRecord:
    N: int
    eps: float
    value: float
    max_rel_error: float
    observed_order: float = math.nan


def build_kernel_matrix(
    spec: SystemSpec, quad: QuadratureSpec, eps: float, x_peak: float = 0.0
) -> KernelMatrix:
    """Sample the short-time kernel on the nodes of `quad`.

    `x_peak` is the largest coordinate the caller cares about; the Gaussian
    tail of width ``sqrt(hbar eps/m)`` beyond ``x_max`` is checked from there.
    """
    if not eps > 0:
        raise DomainError(f"eps must be > 0, got {eps!r}")
    lam = spec.lam(eps)
    quad.check_tail(x_peak, lam)
    quad.check_spacing(lam)
    nodes, weights = quad.grid()
    values = short_time_kernel(spec, nodes[:, None], nodes[None, :], eps)
    return KernelMatrix(nodes, weights, values, float(eps))


def compose(A: KernelMatrix, B: KernelMatrix) -> KernelMatrix:
    """``C[i, j] = sum_k A[i, k] w_k B[k, j]``; imaginary times add."""
    if not A.same_grid(B):
        raise GridMismatchError("cannot compose kernel matrices on different grids")
    values = A.values @ (A.weights[:, None] * B.values)
    return KernelMatrix(A.nodes, A.weights, values, A.eps_total + B.eps_total)


def time_sliced_kernel(
    spec: SystemSpec,
    a: float,
    b: float,
    beta: float,
    N: int,
    quad: QuadratureSpec | None = None,
) -> float:
    """N-slice approximation ``K_N(a, b; beta)`` with ``eps = beta/N``.

    The outer factors ``K(a, x; eps)`` and ``K(x, b; eps)`` are evaluated at
    the exact endpoints; only the ``N - 1`` intermediate integrals use the
    grid. ``N = 1`` is the short-time kernel itself.
    """
    if int(N) != N or N < 1:
        raise DomainError(f"number of slices must be an integer >= 1, got {N!r}")
    if not beta > 0:
        raise DomainError(f"beta must be > 0, got {beta!r}")
    N = int(N)
    eps = beta / N
    if N == 1:
        return short_time_kernel(spec, a, b, eps)
    if quad is None:
        quad = QuadratureSpec.for_problem(spec, a, b, beta, N)
    elif quad.x_max is None:
        quad = replace(quad, x_max=default_x_max(spec, a, b, beta))
    if max(a, b) > 0.8 * quad.x_max:
        raise DomainError(
            f"endpoints must lie below 0.8*x_max={0.8 * quad.x_max:g}; got a={a:g}, b={b:g}"
        )
    quad.check_tail(max(a, b), spec.lam(beta))
    quad.check_spacing(spec.lam(eps))
    nodes, weights = quad.grid()

    u = short_time_kernel(spec, nodes, b, eps)
    if N > 2:
        step = short_time_kernel(spec, nodes[:, None], nodes[None, :], eps) * weights[None, :]
        for _ in range(N - 2):
            u = step @ u
    left = short_time_kernel(spec, a, nodes, eps)
    return float(np.dot(left * weights, u))


def exact_reference(spec: SystemSpec, a: float, b: float, beta: float) -> float | None:
    """Closed-form kernel at finite beta, or None when none is known."""
    if isinstance(spec.potential, Zero):
        return short_time_kernel(spec, a, b, beta)
    if isinstance(spec.potential, Harmonic):
        return radial_oscillator_kernel(
            spec.nu, spec.potential.omega, spec.mass, spec.hbar, a, b, beta
        )
    return None


def convergence_study(
    spec: SystemSpec,
    a: float,
    b: float,
    beta: float,
    N_list: Sequence[int],
    quad: QuadratureSpec | None = None,
) -> list[ConvergenceRecord]:
    """Sliced kernel vs the exact reference for each N in `N_list`.

    `observed_order` of record i is ``log(e_{i-1}/e_i) / log(N_i/N_{i-1})``;
    it is ``inf`` when both errors sit below `EXACT_FLOOR`.
    """
    reference = exact_reference(spec, a, b, beta)
    if reference is None:
        raise DomainError(f"no exact reference kernel for potential {spec.potential}")
    records = []
    for N in N_list:
        value = time_sliced_kernel(spec, a, b, beta, N, quad)
        err = abs(value - reference) / abs(reference)
        records.append(ConvergenceRecord(int(N), beta / N, value, err))
    for prev, cur in zip(records, records[1:]):
        if prev.max_rel_error <= EXACT_FLOOR and cur.max_rel_error <= EXACT_FLOOR:
            cur.observed_order = math.inf
        elif prev.max_rel_error > 0 and cur.max_rel_error > 0:
            cur.observed_order = math.log(prev.max_rel_error / cur.max_rel_error) / math.log(
                cur.N / prev.N
            )
    return records


def fitted_order(records: Sequence[ConvergenceRecord]) -> float:
    """Least-squares slope of ``-log(error)`` against ``log(N)``."""
    if len(records) < 3:
        raise DomainError("an order fit needs at least 3 records")
    logs_n = np.log([r.N for r in records])
    logs_e = np.log([r.max_rel_error for r in records])
    slope = np.polyfit(logs_n, logs_e, 1)[0]
    return float(-slope)


def compose_points(
    spec: SystemSpec,
    x,
    xprime,
    eps1: float,
    eps2: float,
    quad: QuadratureSpec,
) -> np.ndarray:
    """``int_0^x_max K(x, y; eps1) K(y, x'; eps2) dy`` for arrays of endpoints.

    Returns the matrix over all (x, x') pairs.
    """
    if quad.x_max is None:
        raise DomainError("compose_points needs an explicit x_max")
    quad.check_spacing(spec.lam(min(eps1, eps2)))
    nodes, weights = quad.grid()
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xprime = np.atleast_1d(np.asarray(xprime, dtype=float))
    left = short_time_kernel(spec, x[:, None], nodes[None, :], eps1)
    right = short_time_kernel(spec, nodes[:, None], xprime[None, :], eps2)
    return left @ (weights[:, None] * right)
