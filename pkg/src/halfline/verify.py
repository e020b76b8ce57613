"""Registry of numerical self-checks run by ``halfline verify``.

Each check returns a residual and a tolerance; it passes when
``residual <= tolerance * scale``. Checks are grouped so that a subset can be
selected from the command line.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy import integrate

from . import decomposition as dec
from . import kernels as kn
from . import slicing as sl
from . import specfun as sf

__all__ = ["VerificationReport", "CHECKS", "GROUPS", "run_checks"]


@dataclass(frozen=True)
class VerificationReport:
    name: str
    group: str
    parameters: str
    residual: float
    tolerance: float
    passed: bool
    wall_time: float


@dataclass(frozen=True)
class Check:
    name: str
    group: str
    parameters: str
    tolerance: float
    run: Callable[[], float]


CHECKS: list[Check] = []


def _check(group: str, name: str, parameters: str, tolerance: float):
    def register(fn):
        CHECKS.append(Check(name, group, parameters, tolerance, fn))
        return fn

    return register


def _rel(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.abs(b)))


# -- special functions -------------------------------------------------------------


def series_oracle_scaled(mu: float, z: float) -> float:
    """``exp(-z) I_mu(z)`` from the plain power series, summed with fsum."""
    if z == 0.0:
        return 1.0 if mu == 0.0 else 0.0
    log_t = mu * math.log(z / 2.0) - math.lgamma(mu + 1.0) - z
    q = 2.0 * math.log(z / 2.0)
    terms = []
    k = 0
    while True:
        t = math.exp(log_t)
        terms.append(t)
        if k > 5 and t < 1e-18 * math.fsum(terms):
            return math.fsum(terms)
        k += 1
        log_t += q - math.log(k) - math.log(mu + k)


@_check("specfun", "bessel-series-oracle", "mu in [0,4] x z in [0,30], 41x61 grid", 1e-12)
def _bessel_series():
    worst = 0.0
    for mu in np.linspace(0.0, 4.0, 41):
        z = np.linspace(0.0, 30.0, 61)
        got = sf.bessel_i_scaled(mu, z)
        ref = np.array([series_oracle_scaled(mu, float(v)) for v in z])
        mask = ref != 0
        worst = max(worst, _rel(got[mask], ref[mask]))
        worst = max(worst, float(np.max(np.abs(got[~mask]))) if (~mask).any() else 0.0)
    return worst


@_check("specfun", "asymp-coeff-termination", "(1/2,1), (3/2,2), (5/2,3) exactly 0", 0.0)
def _asymp_termination():
    return max(abs(sf.asymp_coeff(n + 0.5, n + 1)) for n in range(3))


@_check("specfun", "bessel-recurrence", "1000 random (mu in [1,9], z in [1e-2,1e3]), seed 7", 1e-10)
def _recurrence():
    rng = np.random.default_rng(7)
    worst = 0.0
    for mu, z in zip(rng.uniform(1.0, 9.0, 1000), 10 ** rng.uniform(-2, 3, 1000)):
        lhs = sf.bessel_i_scaled(mu - 1, z) - sf.bessel_i_scaled(mu + 1, z)
        rhs = 2 * mu / z * sf.bessel_i_scaled(mu, z)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return worst


@_check("specfun", "erf-indefinite-integral", "a=1.3, 100 points in [-3,3], h=1e-4", 1e-6)
def _erf_integral():
    a, h = 1.3, 1e-4

    def prim(x):
        return math.exp(-a * a * x * x) / (a * math.sqrt(math.pi)) + x * sf.erf(a * x)

    return max(
        abs((prim(x + h) - prim(x - h)) / (2 * h) - sf.erf(a * x)) for x in np.linspace(-3, 3, 100)
    )


# -- kernels --------------------------------------------------------------------------


_G5 = np.linspace(0.2, 3.0, 5)


@_check("kernels", "nu1-reduction", "nu=1, V=0, 5x5 grid in [0.2,3], eps in {0.1,1}", 1e-14)
def _nu1_reduction():
    spec = kn.SystemSpec(nu=1)
    x, xp = np.meshgrid(_G5, _G5)
    return max(
        _rel(kn.short_time_kernel(spec, x, xp, e), kn.exact_free_halfline(1, 1, x, xp, e)) for e in (0.1, 1.0)
    )


SPECTRAL_X = np.linspace(0.25, 2.0, 5)
SPECTRAL_EPS = (0.25, 0.5, 1.0)


@_check("kernels", "spectral-agreement", "nu in {1,2}, 5x5 grid in [0.25,2], eps in {0.25,0.5,1}", 1e-6)
def _spectral():
    worst = 0.0
    for nu in (1.0, 2.0):
        spec = kn.SystemSpec(nu=nu)
        for e in SPECTRAL_EPS:
            for x in SPECTRAL_X:
                for xp in SPECTRAL_X:
                    worst = max(worst, _rel(kn.spectral_kernel(spec, x, xp, e), kn.short_time_kernel(spec, x, xp, e)))
    return worst


@_check("kernels", "weber-schafheitlin", "(nu,k,k',a) in {(1,1,1,1),(2,2,1,0.5),(1.5,1.3,0.7,0.8)}", 1e-8)
def _orthogonality():
    cases = [(1.0, 1.0, 1.0, 1.0), (2.0, 2.0, 1.0, 0.5), (1.5, 1.3, 0.7, 0.8)]
    return max(kn.orthogonality_check(kn.SystemSpec(nu=nu), k, q, a) for nu, k, q, a in cases)


@_check("kernels", "oscillator-free-limit", "omega*beta=1e-4, nu in {1,2,3}, a=1, b=1.3", 1e-6)
def _oscillator_limit():
    return max(
        _rel(kn.radial_oscillator_kernel(nu, 1e-4, 1, 1, 1.0, 1.3, 1.0), kn.short_time_kernel(kn.SystemSpec(nu=nu), 1.0, 1.3, 1.0))
        for nu in (1.0, 2.0, 3.0)
    )


def boundary_ratio_drift(kernel: Callable[[float], float], nu: float) -> float:
    r3 = kernel(1e-3) / 1e-3**nu
    r4 = kernel(1e-4) / 1e-4**nu
    return abs(r3 / r4 - 1.0)


@_check("kernels", "boundary-scaling", "K(x,1;1)/x^nu at x=1e-3 vs 1e-4, nu in {1,2,3}, free and oscillator", 0.01)
def _boundary():
    worst = 0.0
    for nu in (1.0, 2.0, 3.0):
        spec = kn.SystemSpec(nu=nu)
        worst = max(worst, boundary_ratio_drift(lambda x: kn.short_time_kernel(spec, x, 1.0, 1.0), nu))
        worst = max(worst, boundary_ratio_drift(lambda x: kn.radial_oscillator_kernel(nu, 1.0, 1, 1, x, 1.0, 1.0), nu))
    return worst


def _free(a, b, beta):
    return kn.exact_free_halfline(1.0, 1.0, a, b, beta)


@_check("kernels", "heat-equation", "free kernel, (a,b,beta) in {(1,1,1),(2,2,0.5)}, h=1e-3", 1e-5)
def _heat():
    return max(abs(kn.heat_equation_residual(_free, a, b, be, 1e-3, 1e-3)) for a, b, be in [(1, 1, 1), (2, 2, 0.5)])


@_check("kernels", "heat-equation-order", "|r(1e-3)/r(5e-4) - 4|, (a,b,beta)=(1,1,1)", 0.5)
def _heat_order():
    r1 = kn.heat_equation_residual(_free, 1, 1, 1, 1e-3, 1e-3)
    r2 = kn.heat_equation_residual(_free, 1, 1, 1, 5e-4, 5e-4)
    return abs(r1 / r2 - 4.0)


@_check("kernels", "kernel-symmetry", "nu in {0.5,1.5,2,3}, harmonic omega=1, 5x5 grid", 1e-15)
def _symmetry():
    x, xp = np.meshgrid(_G5, _G5)
    worst = 0.0
    for nu in (0.5, 1.5, 2.0, 3.0):
        spec = kn.SystemSpec(nu=nu, potential=kn.Harmonic(1.0))
        k = kn.short_time_kernel(spec, x, xp, 0.3)
        worst = max(worst, _rel(k, k.T))
    return worst


# -- slicing --------------------------------------------------------------------------


@_check("slicing", "free-slicing-exact", "nu=1, V=0, N in {1,4,16}, 5x5 (a,b) in [0.2,3], beta=1", 1e-8)
def _free_slicing():
    spec = kn.SystemSpec(nu=1)
    worst = 0.0
    for N in (1, 4, 16):
        for a in _G5:
            for b in _G5:
                worst = max(worst, _rel(sl.time_sliced_kernel(spec, a, b, 1.0, N), kn.exact_free_halfline(1, 1, a, b, 1.0)))
    return worst


CK_QUAD = sl.QuadratureSpec(48, 8, x_max=10.0)


def chapman_kolmogorov_error(nu: float, eps: float, quad: sl.QuadratureSpec = CK_QUAD) -> float:
    """Max relative error of ``K(eps) o K(eps)`` vs ``K(2 eps)`` on interior nodes."""
    spec = kn.SystemSpec(nu=nu)
    k1 = sl.build_kernel_matrix(spec, quad, eps)
    k2 = sl.build_kernel_matrix(spec, quad, 2 * eps)
    c = sl.compose(k1, k1)
    inner = k1.nodes <= quad.x_max - 8.0 * math.sqrt(spec.lam(2 * eps))
    sel = np.ix_(inner, inner)
    return _rel(c.values[sel], k2.values[sel])


@_check("slicing", "chapman-kolmogorov", "nu in {1/2,1,3/2,2,3}, eps in {0.1,0.5}, x_max=10, 48x8 nodes", 1e-8)
def _ck():
    return max(chapman_kolmogorov_error(nu, e) for nu in (0.5, 1.0, 1.5, 2.0, 3.0) for e in (0.1, 0.5))


@_check("slicing", "associativity", "nu=2, eps=(0.1,0.2,0.3), x_max=10", 1e-12)
def _assoc():
    spec = kn.SystemSpec(nu=2)
    a, b, c = (sl.build_kernel_matrix(spec, CK_QUAD, e) for e in (0.1, 0.2, 0.3))
    left = sl.compose(sl.compose(a, b), c).values
    right = sl.compose(a, sl.compose(b, c)).values
    return float(np.max(np.abs(left - right)) / np.max(np.abs(right)))


OSC_N = (16, 32, 64, 128, 256, 512)


def oscillator_study(nu: float):
    spec = kn.SystemSpec(nu=nu, potential=kn.Harmonic(1.0))
    return sl.convergence_study(spec, 1.0, 1.0, 1.0, OSC_N)


_osc_cache: dict = {}


def _osc(nu):
    if nu not in _osc_cache:
        _osc_cache[nu] = oscillator_study(nu)
    return _osc_cache[nu]


@_check("slicing", "oscillator-final-error", "nu in {1,2}, omega=1, a=b=1, beta=1, N=512", 2e-3)
def _osc_final():
    return max(_osc(nu)[-1].max_rel_error for nu in (1.0, 2.0))


@_check("slicing", "oscillator-monotone", "count of non-decreasing error steps over N=16..512", 0.0)
def _osc_mono():
    bad = 0
    for nu in (1.0, 2.0):
        errs = [r.max_rel_error for r in _osc(nu)]
        bad += sum(1 for p, q in zip(errs, errs[1:]) if not q < p)
    return float(bad)


@_check("slicing", "oscillator-order", "|fitted order - 1.05|, order window [0.8,1.3]", 0.25)
def _osc_order():
    return max(abs(sl.fitted_order(_osc(nu)) - 1.05) for nu in (1.0, 2.0))


# -- erf identities and nu=2 composition ---------------------------------------------------


ERF_AB = (0.5, 1.0, 2.0)
ERF_LAMBDAS = ((0.3, 1.0), (1.0, 0.3))


def defining_integral(a: float, b: float, sw: dec.SaddleWidth, which: str) -> float:
    """Adaptive quadrature of the integral whose closed form is under test."""
    l1, l2, K = sw.lambda1, sw.lambda2, sw.K

    def shc(u):
        return math.sinh(u) / u if u != 0 else 1.0

    def f(x):
        A, B = a * x / l1, b * x / l2
        g = math.exp(-x * x / (4 * K * K))
        if which == "cosh-cosh":
            return g * math.cosh(A) * math.cosh(B)
        if which == "sinh-cosh":
            return g * shc(A) * math.cosh(B)
        if which == "cosh-sinh":
            return g * math.cosh(A) * shc(B)
        return g * shc(A) * shc(B)

    upper = 2 * K * K * (abs(a) / l1 + abs(b) / l2) + 40 * K
    return integrate.quad(f, 0.0, upper, epsabs=0.0, epsrel=1e-13, limit=400)[0]


def _erf_identity(which: str) -> float:
    worst = 0.0
    for a in ERF_AB:
        for b in ERF_AB:
            for l1, l2 in ERF_LAMBDAS:
                sw = dec.SaddleWidth(l1, l2)
                got = dec.I_ab(a, b, sw) if which == "cosh-cosh" else dec.sinhcosh_integral(a, b, sw, which)
                worst = max(worst, _rel(got, defining_integral(a, b, sw, which)))
    return worst


_ERF_PARAMS = "3x3 (a,b) in {0.5,1,2}, (l1,l2) in {(0.3,1),(1,0.3)}"
for _kind in dec.SINHCOSH_KINDS:
    _check("erf-identities", _kind, _ERF_PARAMS, 1e-8)(lambda k=_kind: _erf_identity(k))


@_check("composition", "cosh-cosh-integral", _ERF_PARAMS, 1e-8)
def _i_ab():
    return _erf_identity("cosh-cosh")


NU2_POINTS = [
    (a, b, e1, e2)
    for a, b in ((1.0, 1.0), (0.5, 2.0), (2.0, 1.5))
    for e1, e2 in ((0.3, 0.7), (0.1, 0.1), (1.0, 0.25))
]


@_check("composition", "nu2-closed-form", "9 points: (a,b) x (eps1,eps2)", 1e-10)
def _nu2_closed():
    spec = kn.SystemSpec(nu=2)
    return max(
        _rel(dec.compose_closed_form_nu2(a, b, e1, e2), kn.short_time_kernel(spec, a, b, e1 + e2))
        for a, b, e1, e2 in NU2_POINTS
    )


# -- decomposition ----------------------------------------------------------------------


@_check("decomposition", "phase-law", "nu in {1,2,3,4,3/2,0.7,2.7}, both branches", 1e-15)
def _phase():
    worst = 0.0
    for nu in (1.0, 2.0, 3.0, 4.0, 1.5, 0.7, 2.7):
        for branch in (1, -1):
            d = dec.decompose(kn.SystemSpec(nu=nu), 1.0, 1.2, 0.05, branch)
            expected = complex(math.cos(math.pi * nu), branch * math.sin(math.pi * nu))
            worst = max(worst, abs(d.phase - expected))
            if nu == int(nu):
                worst = max(worst, abs(d.phase - (-1.0) ** int(nu)))
    return worst


@_check("decomposition", "nu1-exactness", "nu=1, V=0 and V=x^4, 5x5 grid, eps in {0.05,0.5}", 1e-14)
def _nu1_exact():
    worst = 0.0
    for pot in (kn.Zero(), kn.PowerLaw(0.7, 4.0)):
        spec = kn.SystemSpec(nu=1, potential=pot)
        for e in (0.05, 0.5):
            for x in _G5:
                for xp in _G5:
                    d = dec.decompose(spec, x, xp, e)
                    worst = max(worst, _rel(d.total.real, kn.short_time_kernel(spec, x, xp, e)))
    return worst


@_check("decomposition", "branch-conjugacy", "nu in {1.5,2,2.7}, x=0.8, x'=1.1, eps=0.05", 0.0)
def _conj():
    worst = 0.0
    for nu in (1.5, 2.0, 2.7):
        spec = kn.SystemSpec(nu=nu)
        p = dec.decompose(spec, 0.8, 1.1, 0.05, 1)
        m = dec.decompose(spec, 0.8, 1.1, 0.05, -1)
        worst = max(worst, abs(p.total - m.total.conjugate()))
    return worst


@_check("decomposition", "asymptotic-lambda2", "nu in {2,3}, x=x'=1, |ratio(lam)/ratio(lam/2) - 4|", 0.8)
def _asym():
    worst = 0.0
    for nu in (2.0, 3.0):
        spec = kn.SystemSpec(nu=nu)

        def err(lam):
            d = dec.decompose(spec, 1.0, 1.0, lam)
            k = kn.short_time_kernel(spec, 1.0, 1.0, lam)
            return abs(d.total.real - k) / k

        worst = max(worst, abs(err(0.02) / err(0.01) - 4.0))
    return worst


# -- saddle-point checks --------------------------------------------------------------


@_check("saddle", "direct-product", "(x,x',eps) in {(1,1,0.1),(2,0.5,0.05)}", 1e-8)
def _direct_product():
    return max(dec.direct_product_check(*p).rel_error for p in ((1.0, 1.0, 0.1), (2.0, 0.5, 0.05)))


def _cross(eps):
    return dec.cross_term_check(kn.SystemSpec(nu=2), 1.0, 1.0, eps).rel_error


for _eps in (0.01, 0.005):
    _check("saddle", f"cross-term-eps-{_eps:g}", f"nu=2, V=0, x=x'=1, eps={_eps:g}, tol=5*eps", 5 * _eps)(
        lambda e=_eps: _cross(e)
    )


@_check("saddle", "cross-term-halving", "|rel(0.01)/rel(0.005) - 2|", 0.2)
def _cross_halving():
    return abs(_cross(0.01) / _cross(0.005) - 2.0)


GROUPS = tuple(dict.fromkeys(c.group for c in CHECKS))


def run_checks(only: Iterable[str] | None = None, tolerance_scale: float = 1.0) -> list[VerificationReport]:
    """Run the registered checks (optionally only some groups), in registry order."""
    selected = set(only) if only else None
    reports = []
    for check in CHECKS:
        if selected is not None and check.group not in selected and check.name not in selected:
            continue
        start = time.perf_counter()
        residual = float(check.run())
        elapsed = time.perf_counter() - start
        tol = check.tolerance * tolerance_scale
        reports.append(
            VerificationReport(
                name=check.name,
                group=check.group,
                parameters=check.parameters,
                residual=residual,
                tolerance=tol,
                passed=bool(residual <= tol),
                wall_time=elapsed,
            )
        )
    return reports
