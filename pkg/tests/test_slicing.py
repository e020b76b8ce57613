import math
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from halfline import kernels as kn
from halfline import slicing as sl
from halfline.decomposition import compose_closed_form_nu2
from halfline.errors import DomainError, GridMismatchError, TailBoundError

QUAD = sl.QuadratureSpec(48, 8, x_max=10.0)


def interior(matrix, lam):
    return matrix.nodes <= QUAD.x_max - 8 * math.sqrt(lam)


# -- quadrature spec -------------------------------------------------------------------------


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        sl.QuadratureSpec(nodes_per_panel=1)
    with pytest.raises(DomainError):
        sl.QuadratureSpec(x_max=-1.0)
    with pytest.raises(DomainError):
        sl.QuadratureSpec().grid()


def test_quadrature_grid_integrates_on_interval():
    x, w = QUAD.grid()
    assert x.size == QUAD.size == 384
    assert w.sum() == pytest.approx(10.0, rel=1e-14)


def test_tail_check():
    q = sl.QuadratureSpec(48, 8, x_max=5.0)
    q.check_tail(1.0, 0.1)
    with pytest.raises(TailBoundError):
        q.check_tail(1.0, 4.0)


def test_spacing_warning():
    q = sl.QuadratureSpec(8, 1, x_max=10.0)
    with pytest.warns(sl.ResolutionWarning):
        q.check_spacing(0.01)


def test_for_problem_resolves_short_steps():
    spec = kn.SystemSpec(nu=2)
    q = sl.QuadratureSpec.for_problem(spec, 1.0, 1.0, 1.0, 512)
    assert q.x_max / q.size <= math.sqrt(spec.lam(1.0 / 512)) / 3
    assert q.panels >= 8
    assert q.x_max >= sl.default_x_max(spec, 1.0, 1.0, 1.0)


# -- kernel matrices ---------------------------------------------------------------------------


def test_kernel_matrix_basic_properties():
    spec = kn.SystemSpec(nu=1.5, potential=kn.Harmonic(1.0))
    m = sl.build_kernel_matrix(spec, QUAD, 0.3)
    assert_allclose(np.diag(m.values), kn.short_time_kernel(spec, m.nodes, m.nodes, 0.3), rtol=0)
    assert np.array_equal(m.values, m.values.T)
    with pytest.raises(ValueError):
        m.values[0, 0] = 1.0


def test_kernel_matrix_free_nu1_equals_exact():
    m = sl.build_kernel_matrix(kn.SystemSpec(nu=1), QUAD, 0.4)
    x = m.nodes
    assert_allclose(m.values, kn.exact_free_halfline(1, 1, x[:, None], x[None, :], 0.4), rtol=1e-13, atol=1e-300)


@pytest.mark.parametrize("nu", [0.5, 1.0, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("eps", [0.1, 0.5])
def test_chapman_kolmogorov(nu, eps):
    spec = kn.SystemSpec(nu=nu)
    k1 = sl.build_kernel_matrix(spec, QUAD, eps)
    k2 = sl.build_kernel_matrix(spec, QUAD, 2 * eps)
    c = sl.compose(k1, k1)
    assert c.eps_total == pytest.approx(2 * eps)
    sel = np.ix_(interior(k1, spec.lam(2 * eps)), interior(k1, spec.lam(2 * eps)))
    assert_allclose(c.values[sel], k2.values[sel], rtol=1e-8)


def test_compose_unequal_steps_matches_nu2_closed_form():
    spec = kn.SystemSpec(nu=2)
    c = sl.compose(sl.build_kernel_matrix(spec, QUAD, 0.3), sl.build_kernel_matrix(spec, QUAD, 0.7))
    x = c.nodes
    i, j = np.searchsorted(x, 1.0), np.searchsorted(x, 2.0)
    assert c.values[i, j] == pytest.approx(compose_closed_form_nu2(x[i], x[j], 0.3, 0.7), rel=1e-10)


def test_compose_with_short_step_approaches_identity():
    spec = kn.SystemSpec(nu=2)
    q = sl.QuadratureSpec(48, 24, x_max=10.0)
    b = sl.build_kernel_matrix(spec, q, 0.5)
    inner = b.nodes < 6
    sel = np.ix_(inner, inner)
    errs = []
    for eps in (0.02, 0.01, 0.005):
        c = sl.compose(sl.build_kernel_matrix(spec, q, eps), b)
        errs.append(np.max(np.abs(c.values[sel] - b.values[sel])) / np.max(b.values))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.01


def test_compose_grid_mismatch():
    spec = kn.SystemSpec()
    a = sl.build_kernel_matrix(spec, QUAD, 0.2)
    b = sl.build_kernel_matrix(spec, sl.QuadratureSpec(48, 8, x_max=12.0), 0.2)
    with pytest.raises(GridMismatchError):
        sl.compose(a, b)


def test_compose_points_matches_kernel_sum():
    spec = kn.SystemSpec(nu=3)
    pts = np.array([0.5, 1.0, 2.0])
    got = sl.compose_points(spec, pts, pts, 0.2, 0.3, QUAD)
    ref = kn.short_time_kernel(spec, pts[:, None], pts[None, :], 0.5)
    assert_allclose(got, ref, rtol=1e-10)


# -- time slicing ------------------------------------------------------------------------------


@pytest.mark.parametrize("N", [1, 4, 16])
def test_free_slicing_exact(N):
    spec = kn.SystemSpec(nu=1)
    for a in (0.2, 1.1, 3.0):
        for b in (0.2, 2.0):
            got = sl.time_sliced_kernel(spec, a, b, 1.0, N)
            assert got == pytest.approx(kn.exact_free_halfline(1, 1, a, b, 1.0), rel=1e-8)


@pytest.mark.parametrize("nu", [0.5, 2.0, 3.0])
def test_any_nu_free_slicing_exact(nu):
    spec = kn.SystemSpec(nu=nu)
    got = sl.time_sliced_kernel(spec, 0.8, 1.5, 1.0, 8)
    assert got == pytest.approx(kn.short_time_kernel(spec, 0.8, 1.5, 1.0), rel=1e-8)


def test_harmonic_slicing_close_at_256():
    spec = kn.SystemSpec(nu=2, potential=kn.Harmonic(1.0))
    got = sl.time_sliced_kernel(spec, 1.0, 1.0, 1.0, 256)
    ref = kn.radial_oscillator_kernel(2, 1.0, 1, 1, 1.0, 1.0, 1.0)
    assert abs(got / ref - 1) < 0.01


def test_slicing_rejects_bad_input():
    spec = kn.SystemSpec()
    with pytest.raises(DomainError):
        sl.time_sliced_kernel(spec, 1.0, 1.0, 1.0, 0)
    with pytest.raises(DomainError):
        sl.time_sliced_kernel(spec, 1.0, 1.0, -1.0, 2)
    with pytest.raises(DomainError):
        sl.time_sliced_kernel(spec, 9.0, 1.0, 1.0, 4, sl.QuadratureSpec(x_max=10.0))


def test_slicing_tail_guard():
    with pytest.raises(TailBoundError):
        sl.time_sliced_kernel(kn.SystemSpec(), 1.0, 1.0, 4.0, 4, sl.QuadratureSpec(x_max=3.0, panels=16))


def test_doubling_x_max_is_harmless():
    spec = kn.SystemSpec(nu=2, potential=kn.Harmonic(1.0))
    base = sl.QuadratureSpec.for_problem(spec, 1.0, 1.0, 1.0, 32)
    wide = sl.QuadratureSpec(base.nodes_per_panel, 2 * base.panels, 2 * base.x_max)
    a = sl.time_sliced_kernel(spec, 1.0, 1.0, 1.0, 32, base)
    b = sl.time_sliced_kernel(spec, 1.0, 1.0, 1.0, 32, wide)
    assert abs(a - b) / abs(a) < base.tail_tolerance


# -- convergence studies ---------------------------------------------------------------------------


def test_free_study_reports_exact():
    recs = sl.convergence_study(kn.SystemSpec(nu=1), 1.0, 1.0, 1.0, [1, 4, 16])
    assert all(r.max_rel_error < 1e-8 for r in recs)
    assert math.isnan(recs[0].observed_order)
    assert all(math.isinf(r.observed_order) for r in recs[1:])


def test_harmonic_study_first_order():
    spec = kn.SystemSpec(nu=2, potential=kn.Harmonic(1.0))
    recs = sl.convergence_study(spec, 1.0, 1.0, 1.0, [16, 32, 64, 128])
    errs = [r.max_rel_error for r in recs]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    for r in recs[1:]:
        assert 0.8 < r.observed_order < 1.3
    assert 0.8 < sl.fitted_order(recs) < 1.3
    assert recs[1].eps == pytest.approx(1 / 32)


def test_study_without_reference():
    with pytest.raises(DomainError):
        sl.convergence_study(kn.SystemSpec(potential=kn.Coulomb(-1.0)), 1.0, 1.0, 1.0, [2, 4])
    assert sl.exact_reference(kn.SystemSpec(potential=kn.PowerLaw(1.0, 4.0)), 1, 1, 1) is None


def test_fitted_order_needs_three_points():
    recs = [sl.ConvergenceRecord(8, 0.1, 1.0, 0.1), sl.ConvergenceRecord(16, 0.05, 1.0, 0.05)]
    with pytest.raises(DomainError):
        sl.fitted_order(recs)
    recs.append(sl.ConvergenceRecord(32, 0.025, 1.0, 0.025))
    assert sl.fitted_order(recs) == pytest.approx(1.0)


def test_repulsive_coulomb_slicing_finite():
    spec = kn.SystemSpec(nu=1, potential=kn.Coulomb(-0.5))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        vals = [sl.time_sliced_kernel(spec, 1.0, 1.0, 1.0, n) for n in (8, 16, 32)]
    assert all(0 < v < kn.exact_free_halfline(1, 1, 1.0, 1.0, 1.0) for v in vals)
    assert abs(vals[2] - vals[1]) < abs(vals[1] - vals[0])
