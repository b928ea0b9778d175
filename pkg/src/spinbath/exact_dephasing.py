"""Exact reduced dynamics of the pure-dephasing (large-spin boson) model.

In the frame where the coupling is diagonal, H = eps0*Jz + H_B + Jz B, the
populations are frozen and every coherence evolves by explicit factors:

    [rho(t)]_{mn} = [rho(0)]_{mn} e^{-i eps0 (m-n) t} e^{-i Delta(t)(m^2-n^2) t}
                    e^{-gamma(t) (m-n)^2 t} * F_c^{mn}(t),

with the last factor present only for the correlated (projectively prepared)
initial state:

    F_c^{mn}(t) = sum_l w_l e^{-2i (n-m) l Phi(t)} / sum_l w_l,
    w_l = |<l|psi>|^2 e^{-beta eps0 l} e^{+beta l^2 C},   C = G omega_c.

The phase advance per unit of l is 2 (n-m) Phi(t): each Jz level displaces
every bath mode by l g_k / omega_k, and the interference of two displaced
thermal-mode trajectories accumulates twice the single-displacement phase.
The brute-force truncated-Fock simulations in the test suite pin this
factor down, and the master-equation cross-check is sensitive to it as
well.  The l-sum is accumulated in the log domain (max-shifted) because
e^{beta l^2 C} overflows near l = +-N/2 for N ~ 1000.

This module is the accuracy oracle for the master equation: the model is
the epsilon = 0 limit of the main-frame Hamiltonian after the rotation
e^{+i pi Jy / 2} that maps Jx -> Jz.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .bath import frequency_table, integrate, spectral_density


@dataclass(frozen=True)
class DephasingFactors:
    """Decoherence/phase factors at one time, with the 1/t convention:
    gamma_t = gamma(t), delta_t = Delta(t), phi_t = Phi(t), and the
    constant c_const = int J/w dw = G * omega_c (analytic for Ohmic)."""

    gamma_t: float
    delta_t: float
    phi_t: float
    c_const: float


def _gamma_weight(bath):
    def weight(w):
        return bath.g * np.exp(-w / bath.omega_c) / np.tanh(bath.beta * w / 2.0) / w
    return weight


def _phi_weight(bath):
    def weight(w):
        return bath.g * np.exp(-w / bath.omega_c) / w
    return weight


def dephasing_factors(t, bath, policy=None):
    """gamma(t), Delta(t), Phi(t) and C for one time, by adaptive quadrature.

    gamma(t) t = int J(w) (1 - cos w t) coth(beta w / 2) / w^2 dw
    Phi(t)     = int J(w) sin(w t) / w^2 dw
    Delta(t) t = Phi(t) - C t        (since int J(w)/w dw = C exactly)

    t = 0 returns the analytic limits gamma = Delta = Phi = 0.
    """
    c_const = bath.g * bath.omega_c
    if t == 0.0 or bath.g == 0.0:
        return DephasingFactors(0.0, 0.0, 0.0, c_const)

    gw = _gamma_weight(bath)
    gamma_tt, _ = integrate(lambda w: gw(w) * 2.0 * np.sin(w * t / 2.0) ** 2,
                            policy, tail_scale=bath.omega_c, osc_scale=t)
    pw = _phi_weight(bath)
    phi, _ = integrate(lambda w: pw(w) * np.sin(w * t),
                       policy, tail_scale=bath.omega_c, osc_scale=t)
    delta_tt = phi - c_const * t
    return DephasingFactors(gamma_t=float(gamma_tt / t),
                            delta_t=float(delta_tt / t),
                            phi_t=float(phi), c_const=c_const)


def dephasing_tables(t_grid, bath, policy=None, refine=1):
    """(gamma(t)*t, Delta(t)*t, Phi(t)) arrays over a full time grid."""
    t = np.asarray(t_grid, dtype=float)
    c_const = bath.g * bath.omega_c
    if bath.g == 0.0:
        z = np.zeros_like(t)
        return z, z.copy(), z.copy()
    gamma_tt = frequency_table(_gamma_weight(bath),
                               lambda tt, w: 2.0 * np.sin(w * tt / 2.0) ** 2,
                               t, bath, policy, refine=refine)
    phi = frequency_table(_phi_weight(bath), lambda tt, w: np.sin(w * tt),
                          t, bath, policy, refine=refine)
    return np.asarray(gamma_tt, dtype=float), \
        np.asarray(phi, dtype=float) - c_const * t, \
        np.asarray(phi, dtype=float)


def _m_values(dim):
    return np.arange(dim) - (dim - 1) / 2.0


def exact_rho_uncorrelated(t, rho0_rotated, eps0, bath, policy=None,
                           factors=None):
    """Exact state at time t for the thermal (product) initial bath state.

    rho0_rotated must be expressed in the Jz eigenbasis of the dephasing
    frame.  Diagonal elements are untouched.  ``factors`` may carry
    precomputed DephasingFactors for this t (used by the grid driver and
    the brute-force tests).
    """
    rho0 = np.asarray(rho0_rotated)
    if factors is None:
        factors = dephasing_factors(t, bath, policy)
    m = _m_values(rho0.shape[0])
    dm = m[:, None] - m[None, :]
    dm2 = m[:, None] ** 2 - m[None, :] ** 2
    phase = np.exp(-1j * eps0 * dm * t - 1j * factors.delta_t * t * dm2)
    damp = np.exp(-factors.gamma_t * t * dm ** 2)
    return rho0 * phase * damp


def corr_weights_log(psi_weights, eps0, beta, c_const):
    """log of the l-sum weights w_l = |<l|psi>|^2 e^{-beta eps0 l + beta l^2 C}."""
    pw = np.asarray(psi_weights, dtype=float)
    ls = _m_values(pw.size)
    with np.errstate(divide="ignore"):
        logw = np.log(pw)
    return logw - beta * eps0 * ls + beta * ls ** 2 * c_const


def corr_factor(d, phi, log_weights):
    """F_c for coherence offset d = n - m at phase Phi(t):
    sum_l w_l e^{-2 i d l Phi} / sum_l w_l, log-domain max-shifted."""
    lw = np.asarray(log_weights, dtype=float)
    ls = _m_values(lw.size)
    w = np.exp(lw - np.max(lw[np.isfinite(lw)]))
    num = np.sum(w * np.exp(-2j * d * ls * phi))
    return num / np.sum(w)


def exact_rho_correlated(t, rho0_rotated, psi_weights, eps0, bath,
                         policy=None, factors=None):
    """Exact state at time t for the projectively prepared (correlated)
    initial condition; the uncorrelated factors times F_c^{mn}(t).

    psi_weights are |<l|psi>|^2 in the dephasing-frame Jz basis and must
    sum to 1.
    """
    rho0 = np.asarray(rho0_rotated)
    if factors is None:
        factors = dephasing_factors(t, bath, policy)
    out = exact_rho_uncorrelated(t, rho0, eps0, bath, policy, factors)
    logw = corr_weights_log(psi_weights, eps0, bath.beta, factors.c_const)
    dim = rho0.shape[0]
    # F_c depends on (m, n) only through d = n - m
    d_vals = np.arange(-(dim - 1), dim)
    fc_by_d = np.array([corr_factor(d, factors.phi_t, logw) for d in d_vals])
    idx = (np.arange(dim)[None, :] - np.arange(dim)[:, None]) + (dim - 1)
    return out * fc_by_d[idx]


# --------------------------------------------------------------------------
# Main-frame dephasing: rotation to/from the diagonal-coupling frame
# --------------------------------------------------------------------------

def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def rotated_amplitudes(prep, n_atoms):
    """Amplitudes <l| e^{+i pi Jy/2} |psi_main> of the main-frame preparation
    in the dephasing frame (coupling Jx -> Jz).

    Down-polarized -> the all-positive binomial profile
    sqrt(C(N, l + N/2)) / 2^{N/2}; up-polarized -> the same profile with
    alternating signs (-1)^{N/2 - l}; the Jx-aligned preparation -> the top
    rung of the rotated frame.  Checked against dense rotation matrices in
    the tests.
    """
    from .corr_kernel import Preparation

    dim = n_atoms + 1
    k = np.arange(dim)
    if prep is Preparation.PLUS_X:
        amps = np.zeros(dim)
        amps[-1] = 1.0
        return amps
    binom = np.exp(0.5 * _log_binom(n_atoms, k) - 0.5 * n_atoms * np.log(2.0))
    binom /= np.linalg.norm(binom)
    if prep is Preparation.DOWN_Z:
        return binom
    if prep is Preparation.UP_Z:
        sign = np.where((n_atoms - k) % 2 == 0, 1.0, -1.0)
        return binom * sign
    raise ValueError(f"unknown preparation {prep}")


def dephasing_trajectory(t_grid, prep, sys, bath, with_corr, policy=None,
                         diagnostics=True):
    """Exact main-frame observables on a time grid for epsilon = 0.

    Returns a dict of arrays: jz, jz2, jy, jx (normalized conventions
    2<Jz>/N, 4<Jz^2>/N^2, 2<Jy>/N, 2<Jx>/N), plus trace_err / herm_err /
    min_eig diagnostics.  Works at N = 1000: only the diagonal and the
    first two off-diagonals of the rotated state are ever touched.  The
    min_eig column needs the full matrix, so it is reported (and the other
    two measured rather than asserted) only up to dimension 64; beyond
    that trace and hermiticity hold identically by construction and
    min_eig is NaN.
    """
    if sys.epsilon != 0.0:
        raise ValueError("exact dephasing requires epsilon = 0")
    t = np.asarray(t_grid, dtype=float)
    n = sys.n_atoms
    j = n / 2.0
    eps0 = sys.delta                      # splitting of the rotated frame
    c_const = bath.g * bath.omega_c

    amps = rotated_amplitudes(prep, n)
    m = _m_values(n + 1)
    ladder = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))   # <m+1|J+|m>

    r0 = amps * amps                       # diagonal, frozen
    r1 = amps[:-1] * amps[1:]              # <m| rho |m+1> at t = 0
    r2 = amps[:-2] * amps[2:]

    gamma_tt, delta_tt, phi = dephasing_tables(t, bath, policy)

    if with_corr:
        logw = corr_weights_log(amps * amps, eps0, bath.beta, c_const)
        fc1 = np.array([corr_factor(1, p, logw) for p in phi])
        fc2 = np.array([corr_factor(2, p, logw) for p in phi])
    else:
        fc1 = fc2 = np.ones(t.size)

    # coherence factors for offsets d = 1, 2 (m, m+d element):
    #   e^{-i eps0 (m - n) t} = e^{+i eps0 d t}
    #   m^2 - n^2 = -d (2m + d)
    ph1 = np.exp(1j * eps0 * t)[:, None] \
        * np.exp(1j * delta_tt[:, None] * (2 * m[:-1] + 1)[None, :]) \
        * np.exp(-gamma_tt)[:, None] * fc1[:, None]
    ph2 = np.exp(2j * eps0 * t)[:, None] \
        * np.exp(1j * delta_tt[:, None] * 2 * (2 * m[:-2] + 2)[None, :]) \
        * np.exp(-4.0 * gamma_tt)[:, None] * fc2[:, None]
    r1_t = r1[None, :] * ph1
    r2_t = r2[None, :] * ph2

    jx_rot = (r1_t * ladder[None, :]).real.sum(axis=1)
    jy_rot = (r1_t * ladder[None, :]).imag.sum(axis=1)
    jz_rot = float(np.sum(m * r0))
    # Jx^2 in the rotated frame: diagonal (j(j+1) - m^2)/2 plus the
    # second off-diagonal ladder product / 4
    jx2_diag = float(np.sum(r0 * (j * (j + 1) - m ** 2) / 2.0))
    jx2_off = (r2_t * (ladder[:-1] * ladder[1:])[None, :] / 4.0).real.sum(axis=1)
    jx2_rot = jx2_diag + 2.0 * jx2_off

    # main-frame observables: Jz -> -Jx_rot, Jz^2 -> Jx_rot^2,
    # Jy -> Jy_rot, Jx -> Jz_rot
    out = {
        "t": t,
        "jz": -2.0 * jx_rot / n,
        "jz2": 4.0 * jx2_rot / n ** 2,
        "jy": 2.0 * jy_rot / n,
        "jx": np.full(t.size, 2.0 * jz_rot / n),
        "trace_err": np.zeros(t.size),
        "herm_err": np.zeros(t.size),
        "min_eig": np.full(t.size, np.nan),
    }
    if diagnostics and n + 1 <= 64:
        rho0 = np.outer(amps, amps).astype(complex)
        for i, ti in enumerate(t):
            fac = DephasingFactors(
                gamma_t=gamma_tt[i] / ti if ti else 0.0,
                delta_t=delta_tt[i] / ti if ti else 0.0,
                phi_t=phi[i], c_const=c_const)
            if with_corr:
                rho = exact_rho_correlated(ti, rho0, amps * amps, eps0,
                                           bath, policy, fac)
            else:
                rho = exact_rho_uncorrelated(ti, rho0, eps0, bath, policy, fac)
            out["trace_err"][i] = abs(np.trace(rho) - 1.0)
            out["herm_err"][i] = float(np.max(np.abs(rho - rho.conj().T)))
            out["min_eig"][i] = float(
                np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)[0])
    return out


def exact_jz_mainframe(t, prep, sys, bath, with_corr, policy=None):
    """-j_z = -2<Jz>/N of the main-frame dephasing model (epsilon = 0),
    for scalar or array t."""
    traj = dephasing_trajectory(np.atleast_1d(t), prep, sys, bath,
                                with_corr, policy)
    out = -traj["jz"]
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return float(out[0])
    return out
