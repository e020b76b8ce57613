"""Imaginary-time Feynman kernels on the half-line with centrifugal potential."""

from .decomposition import (
    PathDecomposition,
    compose_closed_form_nu2,
    cross_term_check,
    decompose,
    direct_product_check,
    direct_term,
    phase_factor,
    reflected_term,
)
from .errors import (
    ConvergenceError,
    DomainError,
    GridMismatchError,
    HalflineError,
    NumericalError,
    RepresentationError,
    TailBoundError,
    TruncationError,
)
from .kernels import (
    Coulomb,
    Harmonic,
    PowerLaw,
    SystemSpec,
    Zero,
    exact_free_halfline,
    heat_equation_residual,
    radial_oscillator_kernel,
    short_time_kernel,
    spectral_kernel,
)
from .slicing import (
    QuadratureSpec,
    build_kernel_matrix,
    compose,
    convergence_study,
    time_sliced_kernel,
)
from .specfun import bessel_i, bessel_i_scaled, dawson, erfi

__version__ = "0.1.0"
