import numpy as np
import pytest
from scipy.integrate import simpson
from scipy.special import polygamma

from spinbath.bath import (BathSpec, DEFAULT_POLICY, IntegrationError,
                           QuadraturePolicy, correlation, correlation_table,
                           discretize_modes, frequency_table, integrate,
                           spectral_density)

BATH = BathSpec(g=0.05, omega_c=5.0, beta=1.0)


# --------------------------------------------------------------------------
# spectral density
# --------------------------------------------------------------------------

def test_spectral_density_values():
    assert spectral_density(0.0, BATH) == 0.0
    # maximum of G w e^{-w/wc} sits at w = wc
    w = np.linspace(0.1, 20, 400)
    jw = spectral_density(w, BATH)
    assert abs(w[np.argmax(jw)] - BATH.omega_c) < 0.1
    assert spectral_density(5.0, BATH) == pytest.approx(0.25 * np.exp(-1.0))


def test_spectral_density_scalar_type_and_domain():
    val = spectral_density(1.0, BATH)
    assert isinstance(val, float)
    with pytest.raises(ValueError):
        spectral_density(-1.0, BATH)


def test_bath_spec_validation():
    with pytest.raises(ValueError):
        BathSpec(g=-0.1, omega_c=5.0)
    with pytest.raises(ValueError):
        BathSpec(g=0.1, omega_c=0.0)
    with pytest.raises(ValueError):
        BathSpec(g=0.1, omega_c=5.0, beta=-1.0)


# --------------------------------------------------------------------------
# adaptive quadrature
# --------------------------------------------------------------------------

def test_integrate_ohmic_moments():
    # int J dw = G wc^2 and int J/w dw = G wc, both analytic
    val, err = integrate(lambda w: spectral_density(w, BATH),
                         tail_scale=BATH.omega_c)
    assert val == pytest.approx(0.05 * 25.0, rel=1e-10)
    assert err < 1e-8
    val, _ = integrate(lambda w: 0.05 * np.exp(-w / 5.0),
                       tail_scale=BATH.omega_c)
    assert val == pytest.approx(0.25, rel=1e-10)


@pytest.mark.parametrize("t", [0.3, 1.0, 4.0])
def test_integrate_oscillatory_against_closed_form(t):
    # int_0^inf G e^{-w/wc} cos(w t) dw = G wc / (1 + wc^2 t^2)
    val, _ = integrate(lambda w: 0.05 * np.exp(-w / 5.0) * np.cos(w * t),
                       tail_scale=5.0, osc_scale=t)
    assert val == pytest.approx(0.25 / (1.0 + 25.0 * t * t), rel=1e-9)


def test_integrate_finite_interval_and_breakpoints():
    val, _ = integrate(np.exp, lower=0.0, upper=1.0)
    assert val == pytest.approx(np.e - 1.0, rel=1e-12)
    # kink at w = 2 is handled once it is declared singular
    f = lambda w: np.abs(w - 2.0)
    val, _ = integrate(f, lower=0.0, upper=4.0, singular_points=(2.0,))
    assert val == pytest.approx(4.0, rel=1e-12)


def test_integrate_budget_exhaustion_carries_partial_result():
    policy = QuadraturePolicy(rel_tol=1e-15, abs_tol=1e-300,
                              max_subdivisions=8)
    with pytest.raises(IntegrationError) as exc:
        integrate(lambda w: np.cos(50.0 * w) / (1.0 + w ** 2),
                  policy, lower=0.0, upper=60.0)
    assert np.isfinite(exc.value.value)
    assert exc.value.error > 0


def test_tail_cutoff_is_converged():
    base, _ = integrate(lambda w: spectral_density(w, BATH),
                        tail_scale=BATH.omega_c)
    wide = QuadraturePolicy(tail_cutoff_multiplier=80.0)
    far, _ = integrate(lambda w: spectral_density(w, BATH), wide,
                       tail_scale=BATH.omega_c)
    assert abs(far - base) < 1e-12 * abs(base)


def test_policy_defaults():
    assert DEFAULT_POLICY.rel_tol == 1e-9
    assert DEFAULT_POLICY.abs_tol == 1e-12
    assert DEFAULT_POLICY.tail_cutoff_multiplier == 40.0


# --------------------------------------------------------------------------
# correlation function
# --------------------------------------------------------------------------

def test_correlation_at_zero_matches_trigamma_form():
    # int J coth(bw/2) dw = G [wc^2 + (2/b^2) psi1(1 + 1/(b wc))]
    expected = 0.05 * (25.0 + 2.0 * polygamma(1, 1.2))
    c0 = correlation(0.0, BATH)
    assert c0.real == pytest.approx(float(expected), rel=1e-11)
    assert c0.imag == 0.0
    assert c0.real == pytest.approx(1.376737720542378, rel=1e-12)


@pytest.mark.parametrize("tau,expected_re", [
    (0.1, 0.72513230610822),      # Hurwitz-zeta evaluation, 15 digits
    (0.5, -0.029993126971695),
    (1.7, 0.00547492341155758),
])
def test_correlation_real_part_frozen_values(tau, expected_re):
    assert correlation(tau, BATH).real == pytest.approx(expected_re, abs=2e-12)


@pytest.mark.parametrize("tau", [0.05, 0.4, 1.3, 6.0])
def test_correlation_imag_part_closed_form(tau):
    # Im C = -int J sin(w tau) dw = -2 G a tau / (a^2 + tau^2)^2, a = 1/wc
    a = 1.0 / BATH.omega_c
    expected = -0.05 * 2.0 * a * tau / (a * a + tau * tau) ** 2
    assert correlation(tau, BATH).imag == pytest.approx(expected, rel=1e-9)


def test_correlation_negative_tau_is_conjugate():
    c = correlation(0.7, BATH)
    cm = correlation(-0.7, BATH)
    assert cm == pytest.approx(c.conjugate(), rel=1e-12)


def test_correlation_zero_coupling():
    assert correlation(1.0, BathSpec(g=0.0, omega_c=5.0)) == 0.0


def test_correlation_table_matches_scalar():
    taus = np.linspace(0.0, 2.0, 23)
    table = correlation_table(taus, BATH)
    direct = np.array([correlation(t, BATH) for t in taus])
    assert np.max(np.abs(table - direct)) < 1e-10


def test_correlation_simpson_cross_check():
    # heavyweight fixed-grid oracle, independent of the adaptive scheme
    w = np.linspace(1e-9, 300.0, 200_001)
    tau = 0.8
    integ = spectral_density(w, BATH) / np.tanh(0.5 * w)
    re = simpson(integ * np.cos(w * tau), x=w)
    im = -simpson(spectral_density(w, BATH) * np.sin(w * tau), x=w)
    c = correlation(tau, BATH)
    assert c.real == pytest.approx(re, abs=5e-10)
    assert c.imag == pytest.approx(im, abs=5e-10)


# --------------------------------------------------------------------------
# discretization and tabulation helpers
# --------------------------------------------------------------------------

def test_discretize_modes_layout():
    omega, g2 = discretize_modes(BATH, n_modes=10_000, delta_omega=1e-2)
    assert omega.shape == (10_000,)
    assert omega[0] == pytest.approx(5e-3)
    assert np.allclose(np.diff(omega), 1e-2)
    assert np.allclose(g2, spectral_density(omega, BATH) * 1e-2)
    # the mode sum approximates int J dw = G wc^2 once the grid spans the tail
    assert g2.sum() == pytest.approx(1.25, rel=1e-4)


def test_frequency_table_matches_adaptive_integration():
    t_grid = np.linspace(0.0, 2.0, 9)
    table = frequency_table(lambda w: 0.05 * np.exp(-w / 5.0),
                            lambda t, w: np.cos(w * t), t_grid, BATH)
    expected = 0.25 / (1.0 + 25.0 * t_grid ** 2)
    assert np.max(np.abs(table - expected)) < 1e-9
    # scalar in -> scalar out
    single = frequency_table(lambda w: 0.05 * np.exp(-w / 5.0),
                             lambda t, w: np.cos(w * t), 0.7, BATH)
    assert np.ndim(single) == 0
