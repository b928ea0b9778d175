"""Pin down the f_corr coefficient algebra against brute-force linear algebra.

The dense checks work in the full 2^N product space with operators built
from explicit Kronecker chains, sharing no code with the package beyond
numpy, so agreement validates every sign in the closed forms.
"""
import numpy as np
import pytest
from scipy.linalg import expm

from spinbath.bath import BathSpec, QuadraturePolicy
from spinbath.corr_kernel import (Preparation, coefficients, f_corr,
                                  f_corr_oracle, initial_state, prep_vector,
                                  thermal_spin_factors)
from spinbath.corr_kernel import _bracket, _window_edges, SINGULAR_WINDOW
from spinbath.spin_algebra import SystemParams, build_spin_operators

BATH = BathSpec(g=0.05, omega_c=5.0, beta=1.0)
PREPS = [Preparation.DOWN_Z, Preparation.UP_Z, Preparation.PLUS_X]


# --------------------------------------------------------------------------
# dense product-space oracle
# --------------------------------------------------------------------------

def _collective(op, n):
    """sum_i 1 x ... x op_i x ... x 1 on the 2^n product space."""
    dim = 2 ** n
    out = np.zeros((dim, dim))
    for i in range(n):
        m = np.eye(1)
        for k in range(n):
            m = np.kron(m, op if k == i else np.eye(2))
        out += m
    return out


def _product_state(single, n):
    v = single
    for _ in range(n - 1):
        v = np.kron(v, single)
    return v


def test_imaginary_time_correlation_dense():
    """<psi| e^{-bH} e^{lH} F e^{-lH} |psi> / <psi|e^{-bH}|psi> equals
    (N/2)[script_a + script_b cosh(l Dt - script_c)] for every preparation."""
    n, eps, delta, beta = 6, 1.1, 2.3, 1.0
    sys = SystemParams(n_atoms=n, epsilon=eps, delta=delta)

    sz = np.diag([0.5, -0.5])
    sx = np.array([[0.0, 0.5], [0.5, 0.0]])
    jz_big, jx_big = _collective(sz, n), _collective(sx, n)
    h_big = eps * jz_big + delta * jx_big
    evals, evecs = np.linalg.eigh(h_big)

    def matfun(fn):
        return (evecs * fn(evals)) @ evecs.T

    exp_mbh = matfun(lambda e: np.exp(-beta * e))
    up = np.array([1.0, 0.0])
    down = np.array([0.0, 1.0])
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    states = {Preparation.DOWN_Z: _product_state(down, n),
              Preparation.UP_Z: _product_state(up, n),
              Preparation.PLUS_X: _product_state(plus, n)}

    for prep in PREPS:
        fac = thermal_spin_factors(prep, sys, beta)
        psi = states[prep]
        den = psi @ exp_mbh @ psi
        assert den == pytest.approx(fac.z_prime, rel=1e-10)
        for lam in [0.0, 0.17, 0.5, 0.83, 1.0]:
            el = matfun(lambda e: np.exp(lam * e))
            eml = matfun(lambda e: np.exp(-lam * e))
            lhs = psi @ (exp_mbh @ el @ jx_big @ eml) @ psi / den
            rhs = (n / 2.0) * (fac.script_a + fac.script_b
                               * np.cosh(lam * sys.delta_tilde - fac.script_c))
            assert lhs == pytest.approx(rhs, abs=1e-10)


@pytest.mark.parametrize("prep", PREPS)
def test_disentangled_exponential(prep):
    """The ladder-ordered product of exponentials reproduces e^{-beta H}.

    DOWN_Z factors satisfy e^{-bH} = e^{f J+} e^{f_z Jz} e^{f J-} as an
    operator identity; UP_Z flips the ordering and the Jz sign; PLUS_X is
    the flipped ordering in the rotated frame H' = delta Jz - eps Jx.
    """
    n, eps, delta, beta = 5, 1.1, 2.3, 1.0
    sys = SystemParams(n_atoms=n, epsilon=eps, delta=delta)
    ops = build_spin_operators(n)
    fac = thermal_spin_factors(prep, sys, beta)

    if prep is Preparation.DOWN_Z:
        h = eps * ops.jz + delta * ops.jx
        prod = expm(fac.f * ops.jplus) @ expm(fac.f_z * ops.jz) \
            @ expm(fac.f * ops.jminus)
    elif prep is Preparation.UP_Z:
        h = eps * ops.jz + delta * ops.jx
        prod = expm(fac.f * ops.jminus) @ expm(-fac.f_z * ops.jz) \
            @ expm(fac.f * ops.jplus)
    else:
        h = delta * ops.jz - eps * ops.jx
        prod = expm(fac.f * ops.jminus) @ expm(-fac.f_z * ops.jz) \
            @ expm(fac.f * ops.jplus)
    np.testing.assert_allclose(prod, expm(-beta * np.asarray(h, complex)),
                               atol=1e-12)


# --------------------------------------------------------------------------
# closed-form coefficients
# --------------------------------------------------------------------------

@pytest.mark.parametrize("eps,delta,beta", [(1.1, 2.3, 1.0), (0.4, 3.0, 0.7),
                                            (2.0, 0.9, 1.6)])
@pytest.mark.parametrize("prep", PREPS)
def test_coefficients_match_thermal_factors(prep, eps, delta, beta):
    # A = script_a and D = script_b sinh(script_c): the lam-integrated forms
    sys = SystemParams(n_atoms=4, epsilon=eps, delta=delta)
    co = coefficients(prep, sys, beta)
    fac = thermal_spin_factors(prep, sys, beta)
    assert co.a_coef == pytest.approx(fac.script_a, rel=1e-12)
    assert co.d_coef == pytest.approx(fac.script_b * np.sinh(fac.script_c),
                                      rel=1e-12)
    assert co.delta_eff == sys.delta_tilde


def test_coefficients_unbiased_limit():
    # eps = 0: both Jz-polarized preparations give A = -tanh(beta*delta/2),
    #          D = 0; the Jx-polarized one gives A = +1 (rotated frame).
    sys = SystemParams(n_atoms=2, epsilon=0.0, delta=4.0)
    for prep in (Preparation.DOWN_Z, Preparation.UP_Z):
        co = coefficients(prep, sys, 1.0)
        assert co.a_coef == pytest.approx(-np.tanh(2.0), rel=1e-14)
        assert co.d_coef == 0.0
    co = coefficients(Preparation.PLUS_X, sys, 1.0)
    assert co.a_coef == pytest.approx(1.0, rel=1e-14)
    assert co.d_coef == pytest.approx(0.0, abs=1e-16)


def test_validation():
    sys = SystemParams(n_atoms=2, epsilon=0.5, delta=3.5)
    with pytest.raises(ValueError):
        thermal_spin_factors(Preparation.DOWN_Z, sys, 0.0)
    with pytest.raises(ValueError):
        coefficients(Preparation.DOWN_Z, sys, -1.0)


def test_log_partition_survives_large_n():
    sys = SystemParams(n_atoms=2000, epsilon=1.0, delta=1.0)
    fac = thermal_spin_factors(Preparation.DOWN_Z, sys, 1.0)
    assert fac.z_prime == np.inf
    assert fac.log_z_prime == pytest.approx(2000 * np.log(fac.mu), rel=1e-14)


# --------------------------------------------------------------------------
# f_corr closed form
# --------------------------------------------------------------------------

def test_fcorr_unbiased_closed_form():
    """With eps = 0 the D term drops and the integral is elementary:
    f_corr(t) = -N G tanh(beta*delta/2) wc / (1 + (wc t)^2)."""
    sys = SystemParams(n_atoms=1, epsilon=0.0, delta=4.0)
    t = np.array([0.0, 0.3, 1.0, 2.0])
    want = -0.05 * np.tanh(2.0) * 5.0 / (1.0 + (5.0 * t) ** 2)
    got = f_corr(t, Preparation.DOWN_Z, sys, BATH)
    np.testing.assert_allclose(got, want, rtol=1e-9)
    # and the Jx-polarized preparation flips A to +1 / tanh factor to 1
    got = f_corr(t, Preparation.PLUS_X, sys, BATH)
    np.testing.assert_allclose(got, 0.05 * 5.0 / (1.0 + (5.0 * t) ** 2),
                               rtol=1e-9)


def test_fcorr_silent_cases():
    # delta = 0 leaves the Jz-polarized preparations stationary
    sys = SystemParams(n_atoms=3, epsilon=1.5, delta=0.0)
    for prep in (Preparation.DOWN_Z, Preparation.UP_Z):
        assert f_corr(0.7, prep, sys, BATH) == 0.0
        assert np.array_equal(f_corr(np.array([0.0, 1.0]), prep, sys, BATH),
                              np.zeros(2))
    # ... but the Jx-polarized one still drives (it is not an H_S eigenstate)
    assert f_corr(0.0, Preparation.PLUS_X, sys, BATH) != 0.0
    # zero coupling silences everything
    dead = BathSpec(g=0.0, omega_c=5.0, beta=1.0)
    sys2 = SystemParams(n_atoms=3, epsilon=0.5, delta=3.5)
    assert f_corr(0.3, Preparation.DOWN_Z, sys2, dead) == 0.0


def test_fcorr_real_and_linear_in_n():
    sys1 = SystemParams(n_atoms=1, epsilon=0.5, delta=3.5)
    sys7 = SystemParams(n_atoms=7, epsilon=0.5, delta=3.5)
    t = np.linspace(0.0, 2.0, 9)
    f1 = f_corr(t, Preparation.DOWN_Z, sys1, BATH)
    f7 = f_corr(t, Preparation.DOWN_Z, sys7, BATH)
    assert f1.dtype == np.float64
    # N enters as a final integer multiply, so this holds bitwise
    assert np.array_equal(f7, 7 * f1)


def test_fcorr_scalar_matches_array_path():
    # adaptive per-point quadrature vs the shared-panel vectorized table
    sys = SystemParams(n_atoms=2, epsilon=0.5, delta=3.5)
    t = np.array([0.0, 0.45, 1.2])
    table = f_corr(t, Preparation.UP_Z, sys, BATH)
    for i, ti in enumerate(t):
        assert f_corr(float(ti), Preparation.UP_Z, sys, BATH) \
            == pytest.approx(table[i], abs=1e-8)


def test_fcorr_matches_imaginary_time_oracle():
    """Continuum closed form vs the discrete-mode Q1/Q2 route (no shared
    code beyond the spectral density)."""
    sys = SystemParams(n_atoms=3, epsilon=1.1, delta=2.3)
    t = np.array([0.0, 0.4, 1.3])
    closed = f_corr(t, Preparation.DOWN_Z, sys, BATH)
    oracle = f_corr_oracle(t, Preparation.DOWN_Z, sys, BATH)
    scale = np.max(np.abs(closed))
    assert np.max(np.abs(oracle.imag)) < 5e-6 * scale
    np.testing.assert_allclose(closed, oracle.real, atol=5e-6 * scale)


def test_bracket_series_patch():
    """Inside |w - Dt| < 1e-3 Dt the Taylor patch must agree with the
    direct expression to the patch's own truncation order (~(1e-3)^2)
    and stay finite at w = Dt exactly."""
    dt, beta = np.hypot(0.5, 3.5), 1.0
    w_edge = SINGULAR_WINDOW * dt
    w_in = dt + np.array([-0.9, -0.4, 0.0, 0.4, 0.9]) * w_edge
    ct = 1.0 / np.tanh(beta * dt / 2.0)

    def naive(w):
        return (dt / np.tanh(beta * w / 2.0) - w * ct) / (dt ** 2 - w ** 2)

    patched = _bracket(w_in, dt, beta)
    assert np.all(np.isfinite(patched))
    for wi, pi in zip(w_in, patched):
        if wi != dt:
            assert pi == pytest.approx(naive(wi), rel=1e-6)
    # continuity across the window edge
    lo, hi = _window_edges(coefficients(
        Preparation.DOWN_Z, SystemParams(n_atoms=1, epsilon=0.5, delta=3.5),
        beta))
    for edge in (lo, hi):
        inner = _bracket(np.array([edge * (1 - 1e-9) if edge < dt
                                   else edge * (1 + 1e-9)]), dt, beta)[0]
        outer = _bracket(np.array([edge * (1 + 1e-9) if edge < dt
                                   else edge * (1 - 1e-9)]), dt, beta)[0]
        assert inner == pytest.approx(outer, rel=2e-6)


def test_fcorr_accepts_policy():
    sys = SystemParams(n_atoms=1, epsilon=0.5, delta=3.5)
    loose = QuadraturePolicy(rel_tol=1e-6, abs_tol=1e-9)
    tight = f_corr(0.8, Preparation.DOWN_Z, sys, BATH)
    assert f_corr(0.8, Preparation.DOWN_Z, sys, BATH, policy=loose) \
        == pytest.approx(tight, rel=1e-5)


# --------------------------------------------------------------------------
# prepared states
# --------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 5, 40])
def test_prep_vector_properties(n):
    ops = build_spin_operators(n)
    for prep in PREPS:
        v = prep_vector(prep, n)
        assert np.linalg.norm(v) == pytest.approx(1.0, rel=1e-13)
    assert prep_vector(Preparation.DOWN_Z, n)[0] == 1.0
    assert prep_vector(Preparation.UP_Z, n)[-1] == 1.0
    # the Jx-polarized vector is the top Jx eigenvector
    v = prep_vector(Preparation.PLUS_X, n)
    np.testing.assert_allclose(ops.jx @ v, (n / 2.0) * v, atol=1e-12 * n)


def test_prep_vector_large_n():
    v = prep_vector(Preparation.PLUS_X, 2000)
    assert np.all(np.isfinite(v))
    assert np.linalg.norm(v) == pytest.approx(1.0, rel=1e-12)


def test_initial_state_projector():
    ops = build_spin_operators(4)
    for prep in PREPS:
        rho = initial_state(prep, ops)
        assert rho.dtype == complex
        assert np.trace(rho).real == pytest.approx(1.0, rel=1e-13)
        np.testing.assert_allclose(rho @ rho, rho, atol=1e-13)
        np.testing.assert_allclose(rho, rho.conj().T, atol=0.0)
        with pytest.raises(ValueError):
            rho[0, 0] = 2.0
