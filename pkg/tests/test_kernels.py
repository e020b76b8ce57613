import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate, special

from halfline import kernels as kn
from halfline.errors import DomainError, TruncationError
from halfline.quadrature import composite_gauss_legendre


def free_closed(a, b, beta):
    # the free half-line kernel written as a difference of two Gaussians
    return (np.exp(-((a - b) ** 2) / (2 * beta)) - np.exp(-((a + b) ** 2) / (2 * beta))) / np.sqrt(2 * np.pi * beta)


# -- system description ----------------------------------------------------------------


def test_system_spec_defaults_and_derived():
    spec = kn.SystemSpec(nu=2.5, mass=2.0, hbar=0.5)
    assert spec.order == 2.0
    assert spec.centrifugal == 2.5 * 1.5
    assert spec.lam(0.4) == pytest.approx(0.1)
    assert isinstance(kn.SystemSpec().potential, kn.Zero)


@pytest.mark.parametrize("kwargs", [{"nu": 0.4}, {"mass": 0.0}, {"hbar": -1.0}])
def test_system_spec_validation(kwargs):
    with pytest.raises(DomainError):
        kn.SystemSpec(**kwargs)


def test_potential_values():
    assert kn.Harmonic(2.0).value(2.0, mass=1.0) == pytest.approx(0.5 * 4 * 4)
    assert kn.Zero().value(3.0) == 0.0
    assert kn.Coulomb(1.5).value(3.0) == pytest.approx(-0.5)
    assert kn.PowerLaw(0.7, 4.0).value(2.0) == pytest.approx(0.7 * 16)
    with pytest.raises(DomainError):
        kn.PowerLaw(1.0, -2.5)
    with pytest.raises(DomainError):
        kn.Harmonic(0.0)


def test_continued_potential():
    assert kn.Harmonic(1.0).continued_value(2.0) == pytest.approx(-1.0)
    assert kn.PowerLaw(1.0, 4.0).continued_value(2.0) == pytest.approx(4.0)
    with pytest.raises(DomainError):
        kn.Coulomb(1.0).continued_value(1.0)
    with pytest.raises(DomainError):
        kn.PowerLaw(1.0, 3.0).continued_value(1.0)


def test_potential_midpoint_examples():
    spec = kn.SystemSpec(potential=kn.Harmonic(1.0))
    assert kn.potential_midpoint(spec, 2.0, 0.5) == pytest.approx(0.5)
    assert kn.potential_midpoint(kn.SystemSpec(), 2.0, 0.5) == 0.0
    assert kn.potential_midpoint(kn.SystemSpec(potential=kn.Coulomb(2.0)), 4.0, 4.0) == pytest.approx(-0.5)


def test_kernel_params_and_eigenmode():
    spec = kn.SystemSpec(nu=2, mass=2.0, hbar=3.0)
    p = kn.KernelParams.from_spec(spec, 0.5)
    assert p.lam == pytest.approx(0.75)
    with pytest.raises(DomainError):
        kn.KernelParams.from_spec(spec, 0.0)
    assert kn.EigenMode.from_spec(spec, 2.0).energy == pytest.approx(9.0)


# -- eigenfunctions and their overlap ----------------------------------------------------


def test_eigenfunction_nu1_is_sine():
    x = np.linspace(0.1, 5, 20)
    got = kn.eigenfunction(kn.SystemSpec(nu=1), 1.7, x)
    assert_allclose(got, np.sqrt(2 / np.pi) * np.sin(1.7 * x), rtol=1e-13)


def test_eigenfunction_examples():
    assert kn.eigenfunction(kn.SystemSpec(nu=3), 0.0, 1.0) == 0.0
    val = kn.eigenfunction(kn.SystemSpec(nu=2), 1.0, 1.0)
    series = sum((-1) ** m * 0.5 ** (2 * m + 1.5) / (math.factorial(m) * math.gamma(m + 2.5)) for m in range(30))
    assert val == pytest.approx(series, rel=1e-14)
    assert val == pytest.approx(0.24029, abs=1e-5)
    with pytest.raises(DomainError):
        kn.eigenfunction(kn.SystemSpec(potential=kn.Harmonic(1.0)), 1.0, 1.0)


def test_regulated_overlap_closed_form_value():
    # independent quadrature on [0, inf) against the closed form for mu = 1/2, k = q = 1, a = 1
    f = lambda x: x * math.exp(-x * x) * special.jv(0.5, x) ** 2
    numeric = integrate.quad(f, 0, np.inf, epsabs=0, epsrel=1e-12)[0]
    assert numeric == pytest.approx(0.5 * math.exp(-0.5) * special.iv(0.5, 0.5), rel=1e-10)
    assert kn.orthogonality_check(kn.SystemSpec(nu=1), 1.0, 1.0, 1.0) < 1e-9


def test_orthogonality_check_cases():
    assert kn.orthogonality_check(kn.SystemSpec(nu=2), 2.0, 1.0, 0.5) < 1e-8


def test_overlap_vanishes_as_regulator_shrinks():
    # closed form at k != k' decays as the regulator a -> 0
    def closed(a, k=1.0, q=1.5, mu=0.5):
        s = 2 * a * a
        return math.exp(-((k - q) ** 2) / (2 * s)) * special.ive(mu, k * q / s) / s

    values = [closed(a) for a in (0.5, 0.2, 0.1, 0.05)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-10


# -- short-time kernel --------------------------------------------------------------------


def test_short_time_kernel_free_example():
    spec = kn.SystemSpec(nu=1)
    val = kn.short_time_kernel(spec, 1.0, 1.0, 1.0)
    assert val == pytest.approx((1 - math.exp(-2)) / math.sqrt(2 * math.pi), rel=1e-15)
    assert val == pytest.approx(0.3449513, abs=1e-7)


def test_short_time_kernel_nu2_example():
    lam = 0.1
    z = 1 / lam
    i32 = math.sqrt(2 / (math.pi * z)) * (math.cosh(z) - math.sinh(z) / z)
    expected = i32 * math.exp(-z) / lam
    got = kn.short_time_kernel(kn.SystemSpec(nu=2), 1.0, 1.0, lam)
    assert got == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("nu", [0.5, 1.0, 2.0, 3.5])
def test_short_time_kernel_vanishes_at_origin(nu):
    spec = kn.SystemSpec(nu=nu, x_min=1e-300)
    vals = [kn.short_time_kernel(spec, x, 1.0, 0.5) for x in (1e-2, 1e-4, 1e-8)]
    assert vals[0] > vals[1] > vals[2] >= 0
    assert vals[2] < 1e-8 ** nu * 10


def test_short_time_kernel_rejects_bad_input():
    spec = kn.SystemSpec()
    with pytest.raises(DomainError):
        kn.short_time_kernel(spec, -1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        kn.short_time_kernel(spec, 1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        kn.short_time_kernel(spec, 1e-12, 1.0, 1.0)


def test_short_time_kernel_broadcasts():
    x = np.linspace(0.2, 2, 4)
    out = kn.short_time_kernel(kn.SystemSpec(nu=2), x[:, None], x[None, :], 0.3)
    assert out.shape == (4, 4)
    assert out[1, 2] == kn.short_time_kernel(kn.SystemSpec(nu=2), x[1], x[2], 0.3)


def test_short_time_kernel_potential_factor():
    free = kn.short_time_kernel(kn.SystemSpec(nu=2), 2.0, 0.5, 0.2)
    harm = kn.short_time_kernel(kn.SystemSpec(nu=2, potential=kn.Harmonic(1.0)), 2.0, 0.5, 0.2)
    assert harm == pytest.approx(free * math.exp(-0.2 * 0.5), rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.5, 4.0), st.floats(0.05, 4.0), st.floats(0.05, 4.0), st.floats(0.01, 3.0))
def test_short_time_kernel_symmetric_and_positive(nu, x, xp, eps):
    spec = kn.SystemSpec(nu=nu, potential=kn.Harmonic(0.7))
    k1 = kn.short_time_kernel(spec, x, xp, eps)
    assert k1 == kn.short_time_kernel(spec, xp, x, eps)
    assert k1 >= 0


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 4.0), st.floats(0.05, 4.0), st.floats(0.01, 3.0))
def test_nu1_reduces_to_free_halfline(x, xp, eps):
    got = kn.short_time_kernel(kn.SystemSpec(nu=1), x, xp, eps)
    assert got == pytest.approx(free_closed(x, xp, eps), rel=1e-12, abs=1e-300)


def test_mass_and_hbar_enter_through_lambda():
    a = kn.short_time_kernel(kn.SystemSpec(nu=2, mass=2.0, hbar=0.5), 1.0, 1.3, 0.8)
    b = kn.short_time_kernel(kn.SystemSpec(nu=2), 1.0, 1.3, 0.2)
    assert a == pytest.approx(b, rel=1e-14)


# -- spectral representation --------------------------------------------------------------


def test_spectral_matches_closed_form_example():
    spec = kn.SystemSpec(nu=2)
    assert kn.spectral_kernel(spec, 1.0, 2.0, 0.5) == pytest.approx(kn.short_time_kernel(spec, 1.0, 2.0, 0.5), rel=1e-6)


@pytest.mark.parametrize("nu", [0.5, 1.5, 3.0])
def test_spectral_matches_closed_form_other_orders(nu):
    spec = kn.SystemSpec(nu=nu)
    for x, xp in [(0.5, 0.7), (1.2, 1.0)]:
        assert kn.spectral_kernel(spec, x, xp, 0.4) == pytest.approx(kn.short_time_kernel(spec, x, xp, 0.4), rel=1e-6)


def test_spectral_cutoff_too_small():
    with pytest.raises(TruncationError):
        kn.spectral_kernel(kn.SystemSpec(), 1.0, 1.0, 1.0, kmax=2.0)


# -- exact kernels -------------------------------------------------------------------------


def test_exact_free_examples():
    assert kn.exact_free_halfline(1, 1, 1.0, 1.0, 1.0) == pytest.approx(0.3449513, abs=1e-7)
    assert kn.exact_free_halfline(1, 1, 0.0, 1.3, 0.7) == 0.0
    assert kn.exact_free_halfline(1, 1, 1.0, 1.0, 1e6) < 1e-8
    with pytest.raises(DomainError):
        kn.exact_free_halfline(1, 1, 1.0, 1.0, 0.0)


def test_exact_free_stable_for_tiny_product():
    a, b, beta = 1e-9, 1e-9, 1.0
    # e^{-(a-b)^2/2} (1 - e^{-2ab}) ~ 2ab for small ab
    assert kn.exact_free_halfline(1, 1, a, b, beta) == pytest.approx(2 * a * b / math.sqrt(2 * math.pi), rel=1e-9)


def oscillator_reference(nu, omega, a, b, beta):
    # textbook form with unscaled Bessel, usable for moderate arguments
    s = math.sinh(omega * beta)
    z = omega * a * b / s
    return omega * math.sqrt(a * b) / s * math.exp(-0.5 * omega * (a * a + b * b) / math.tanh(omega * beta)) * special.iv(nu - 0.5, z)


@pytest.mark.parametrize("nu, omega, a, b, beta", [(1, 1, 1, 1, 1), (2, 1, 0.7, 1.4, 0.5), (3.5, 2.0, 1.0, 0.3, 2.0)])
def test_radial_oscillator_matches_textbook_form(nu, omega, a, b, beta):
    got = kn.radial_oscillator_kernel(nu, omega, 1, 1, a, b, beta)
    assert got == pytest.approx(oscillator_reference(nu, omega, a, b, beta), rel=1e-12)


def test_radial_oscillator_nu1_example():
    s = math.sinh(1.0)
    z = 1 / s
    i12 = math.sqrt(2 / (math.pi * z)) * math.sinh(z)
    expected = (1 / s) * math.exp(-1 / math.tanh(1.0)) * i12
    assert kn.radial_oscillator_kernel(1, 1, 1, 1, 1.0, 1.0, 1.0) == pytest.approx(expected, rel=1e-14)


def test_radial_oscillator_free_limit():
    for nu in (1, 2, 3):
        free = kn.short_time_kernel(kn.SystemSpec(nu=nu), 1.0, 1.3, 1.0)
        assert kn.radial_oscillator_kernel(nu, 1e-5, 1, 1, 1.0, 1.3, 1.0) == pytest.approx(free, rel=1e-8)


def test_radial_oscillator_no_overflow_far_out():
    val = kn.radial_oscillator_kernel(2, 1.0, 1, 1, 40.0, 40.0, 0.01)
    assert math.isfinite(val) and val > 0


@pytest.mark.parametrize("nu", [1, 2, 3])
def test_boundary_scaling(nu):
    spec = kn.SystemSpec(nu=nu, x_min=1e-12)
    r = [kn.short_time_kernel(spec, x, 1.0, 1.0) / x**nu for x in (1e-3, 1e-4)]
    assert abs(r[0] / r[1] - 1) < 0.01


def test_heat_equation_residual_free():
    f = lambda a, b, beta: kn.exact_free_halfline(1, 1, a, b, beta)
    r1 = kn.heat_equation_residual(f, 1, 1, 1, 1e-3, 1e-3)
    r2 = kn.heat_equation_residual(f, 1, 1, 1, 5e-4, 5e-4)
    assert abs(r1) < 1e-5
    assert abs(kn.heat_equation_residual(f, 2, 2, 0.5, 1e-3, 1e-3)) < 1e-5
    assert r1 / r2 == pytest.approx(4.0, rel=0.05)


def test_heat_equation_residual_detects_wrong_kernel():
    wrong = lambda a, b, beta: kn.exact_free_halfline(1, 1, a, b, 1.1 * beta)
    assert abs(kn.heat_equation_residual(wrong, 1, 1, 1, 1e-3, 1e-3)) > 1e-3


# -- quadrature ----------------------------------------------------------------------------


def test_composite_gauss_legendre_exactness():
    x, w = composite_gauss_legendre(0.0, 3.0, 8, 4)
    assert x.shape == w.shape == (32,)
    assert np.all(np.diff(x) > 0)
    assert np.dot(w, x**15) == pytest.approx(3.0**16 / 16, rel=1e-14)
    assert np.dot(w, np.exp(-x)) == pytest.approx(1 - math.exp(-3), rel=1e-14)
