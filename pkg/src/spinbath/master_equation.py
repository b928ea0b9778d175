"""Second-order time-local master equation for the collective spin.

    d rho / dt = i [rho, H_S] - i f_corr(t) [rho, F]
                 + [Lambda(t) rho, F] + h.c.,

with the memory operator Lambda(t) = int_0^t dtau C(tau) F_bar(tau) and
F_bar(tau) the interaction-picture coupling operator.  The state at time t
(not earlier times) appears on the right-hand side; dropping the f_corr
term gives the uncorrelated-preparation equation, and the code path is
bitwise identical in that case.  The bracket structure preserves trace and
hermiticity exactly, so those are enforced as hard diagnostics rather than
projected back in.

Lambda is precomputed on a half-step grid before stepping.  In the H_S
eigenbasis F_bar(tau) is an elementwise phase, so Lambda reduces to a few
scalar integrals K_d(t) = int_0^t C(tau) e^{-i dt_eff d tau} dtau, one per
occupied diagonal d of the eigenbasis coupling matrix; these are
accumulated panel by panel with Gauss-Legendre nodes (cost O(steps), and
halving the kernel grid moves Lambda(t_max) by far less than 1e-8).  The
classic fixed-step fourth-order Runge-Kutta stepper then hits only grid
times, so no interpolation error enters at the default settings; off-grid
times fall back to linear interpolation.

Positivity is *not* enforced: a second-order master equation may let the
smallest eigenvalue of rho dip transiently below zero, and that eigenvalue
is recorded as a diagnostic instead.
"""

from dataclasses import dataclass, field

import numpy as np

from .bath import correlation_table
from .corr_kernel import f_corr
from .spin_algebra import build_spin_operators, diagonalize_hs, hamiltonian

_GL5_NODES, _GL5_WEIGHTS = np.polynomial.legendre.leggauss(5)


class FailedRunError(RuntimeError):
    """An evolution breached a hard invariant (trace/hermiticity/finite)."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class SimConfig:
    """Fixed-step integration settings.

    dt defaults to 1e-3 * (2 pi / delta_tilde); kernel_grid_dt defaults to
    dt/2 so that every Runge-Kutta substage lands exactly on the
    precomputed kernel grid.  t_max is honored exactly: the step actually
    used is t_max / ceil(t_max / dt) <= dt.
    """

    t_max: float
    dt: float = None
    include_correlations: bool = True
    kernel_grid_dt: float = None
    record_every: int = 1

    def __post_init__(self):
        if self.t_max <= 0:
            raise ValueError("t_max must be > 0")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if (self.kernel_grid_dt is not None and self.dt is not None
                and self.kernel_grid_dt > self.dt * (1 + 1e-12)):
            raise ValueError("kernel_grid_dt must not exceed dt")

    def resolve(self, sys):
        """(dt, n_steps, kernel_dt): concrete grids for this system.

        kernel_grid_dt is rounded down to an integer number of panels per
        step, so the kernel grid always lands exactly on t_max (and on the
        RK4 substages whenever the panel count per step is even).
        """
        dt_req = self.dt
        if dt_req is None:
            dt_req = 1e-3 * 2.0 * np.pi / sys.delta_tilde
        n_steps = max(1, int(np.ceil(self.t_max / dt_req - 1e-12)))
        dt = self.t_max / n_steps
        kdt_req = self.kernel_grid_dt
        if kdt_req is None:
            per_step = 2
        else:
            per_step = max(1, int(np.ceil(dt / kdt_req - 1e-12)))
        return dt, n_steps, dt / per_step


@dataclass(frozen=True)
class MemoryKernel:
    """Lambda(t) on a uniform grid, plus lookup with exact-hit detection."""

    grid_dt: float
    lambda_of_t: np.ndarray   # (n_grid, dim, dim), main-frame matrices

    @property
    def t_max(self):
        return (self.lambda_of_t.shape[0] - 1) * self.grid_dt

    def at(self, t):
        x = t / self.grid_dt
        i = int(round(x))
        n = self.lambda_of_t.shape[0]
        if i < 0 or x > n - 1 + 1e-9:
            raise ValueError(f"t={t} outside precomputed kernel grid")
        if abs(x - i) < 1e-9:
            return self.lambda_of_t[min(i, n - 1)]
        i0 = int(np.floor(x))
        w = x - i0
        return (1.0 - w) * self.lambda_of_t[i0] + w * self.lambda_of_t[i0 + 1]


def build_memory_kernel(sys, bath, config, ops=None, eig=None, policy=None):
    """Precompute Lambda(t) = int_0^t C(tau) F_bar(tau) dtau on the kernel grid.

    Accumulated per panel with 5-point Gauss-Legendre nodes; in the
    eigenbasis only the occupied diagonals d of V† F V contribute, each
    through the scalar integral K_d above.
    """
    if ops is None:
        ops = build_spin_operators(sys.n_atoms)
    if eig is None:
        eig = diagonalize_hs(sys, ops)
    dt, n_steps, kdt = config.resolve(sys)
    n_grid = int(round(dt * n_steps / kdt)) + 1
    dim = ops.dim
    v = eig.vectors
    f_eig = v.conj().T @ ops.jx @ v

    if bath.g == 0.0:
        lam = np.zeros((n_grid, dim, dim), dtype=complex)
        return MemoryKernel(grid_dt=kdt, lambda_of_t=lam)

    # occupied diagonals of the eigenbasis coupling matrix
    d_vals = [d for d in range(-(dim - 1), dim)
              if np.max(np.abs(np.diagonal(f_eig, d))) > 1e-14]

    # Gauss-Legendre nodes of every panel [k*kdt, (k+1)*kdt], flattened
    k = np.arange(n_grid - 1)
    mid = (k + 0.5) * kdt
    taus = (mid[:, None] + (kdt / 2.0) * _GL5_NODES[None, :]).ravel()
    cw = (correlation_table(taus, bath, policy)
          * np.tile(_GL5_WEIGHTS * kdt / 2.0, n_grid - 1))

    # K_d at the grid points, by cumulative panel sums; for the diagonal
    # offset d = col - row the energies are exactly Delta-tilde * m, so
    # E_row - E_col = -Delta-tilde * d and the interaction-picture phase
    # of that diagonal is e^{+i Delta-tilde d tau}
    k_of_d = {}
    for d in d_vals:
        ph = np.exp(1j * sys.delta_tilde * d * taus)
        panel_sums = (cw * ph).reshape(n_grid - 1, 5).sum(axis=1)
        k_of_d[d] = np.concatenate([[0.0], np.cumsum(panel_sums)])

    energies_d = np.arange(dim)
    lam_eig = np.zeros((n_grid, dim, dim), dtype=complex)
    for d in d_vals:
        diag = np.diagonal(f_eig, d)
        rows = energies_d[:dim - abs(d)] + (0 if d >= 0 else abs(d))
        cols = rows + d
        lam_eig[:, rows, cols] = k_of_d[d][:, None] * diag[None, :]

    lam = np.einsum("ab,tbc,dc->tad", v, lam_eig, v.conj(), optimize=True)
    return MemoryKernel(grid_dt=kdt, lambda_of_t=lam)


@dataclass(frozen=True)
class EvolutionContext:
    """Precomputed ingredients the right-hand side needs at any grid time."""

    hs: np.ndarray
    f: np.ndarray
    kernel: MemoryKernel
    fcorr_grid: np.ndarray = None   # on the kernel grid; None = correlations off

    def fcorr_at(self, t):
        if self.fcorr_grid is None:
            return 0.0
        g = self.fcorr_grid
        x = t / self.kernel.grid_dt
        i = int(round(x))
        if i < 0 or x > g.size - 1 + 1e-9:
            raise ValueError(f"t={t} outside precomputed f_corr grid")
        if abs(x - i) < 1e-9:
            return g[min(i, g.size - 1)]
        i0 = int(np.floor(x))
        w = x - i0
        return (1.0 - w) * g[i0] + w * g[i0 + 1]


def rhs(t, rho, ctx):
    """Right-hand side of the master equation at time t.

    The returned derivative is verified traceless and Hermitian to 1e-12;
    both hold by the bracket structure, so a breach means numerical
    corruption upstream.
    """
    hs, f = ctx.hs, ctx.f
    d = 1j * (rho @ hs - hs @ rho)
    fc = ctx.fcorr_at(t)
    if fc != 0.0:
        d = d - 1j * fc * (rho @ f - f @ rho)
    lam = ctx.kernel.at(t)
    lr = lam @ rho
    rl = rho @ lam.conj().T
    d = d + (lr @ f - f @ lr) + (f @ rl - rl @ f)

    if abs(np.trace(d).real) + abs(np.trace(d).imag) > 1e-12 * max(1.0, _norm(d)):
        raise FailedRunError(f"derivative not traceless at t={t}", time=t)
    if _norm(d - d.conj().T) > 1e-12 * max(1.0, _norm(d)):
        raise FailedRunError(f"derivative not Hermitian at t={t}", time=t)
    return d


def _norm(a):
    return float(np.max(np.abs(a)))


@dataclass
class Trajectory:
    """Recorded observables and diagnostics of one evolution.

    jz = 2<Jz>/N, jz2 = 4<Jz^2>/N^2, jy = 2<Jy>/N, jx = 2<Jx>/N.
    trace_err = |Tr rho - 1|, herm_err = max|rho - rho†|, min_eig = smallest
    eigenvalue of the hermitized state (diagnostic only; may dip below 0).
    """

    times: np.ndarray
    jz: np.ndarray
    jz2: np.ndarray
    jy: np.ndarray
    jx: np.ndarray
    trace_err: np.ndarray
    herm_err: np.ndarray
    min_eig: np.ndarray
    meta: dict = field(default_factory=dict)

    def validate(self, tol=1e-8):
        bad = np.nonzero(~((self.trace_err <= tol) & (self.herm_err <= tol)))[0]
        if bad.size:
            t = float(self.times[bad[0]])
            raise FailedRunError(
                f"trace/hermiticity error beyond {tol} first at t={t}", time=t)


def evolve(rho0, sys, bath, prep, config, policy=None):
    """Integrate the master equation from the prepared state rho0.

    Classic fixed-step RK4.  Observables are recorded every
    ``config.record_every`` steps (always including t=0 and t_max), and the
    trajectory invariants (trace & hermiticity within 1e-8) are enforced.
    """
    ops = build_spin_operators(sys.n_atoms)
    eig = diagonalize_hs(sys, ops)
    dt, n_steps, kdt = config.resolve(sys)
    hs = hamiltonian(sys, ops)

    rho = np.array(rho0, dtype=complex)
    if rho.shape != (ops.dim, ops.dim):
        raise ValueError("initial state has wrong dimension")
    if _norm(rho - rho.conj().T) > 1e-12 or abs(np.trace(rho) - 1.0) > 1e-12:
        raise ValueError("initial state must be Hermitian with unit trace")

    kernel = build_memory_kernel(sys, bath, config, ops, eig, policy)
    fcorr_grid = None
    if config.include_correlations:
        t_nodes = np.arange(kernel.lambda_of_t.shape[0]) * kdt
        fcorr_grid = np.asarray(f_corr(t_nodes, prep, sys, bath, policy),
                                dtype=float)
    ctx = EvolutionContext(hs=hs, f=ops.jx, kernel=kernel,
                           fcorr_grid=fcorr_grid)

    n_rec = n_steps // config.record_every + 1
    extra_final = 1 if n_steps % config.record_every else 0
    n_rows = n_rec + extra_final
    out = {k: np.empty(n_rows) for k in
           ("times", "jz", "jz2", "jy", "jx", "trace_err", "herm_err",
            "min_eig")}

    jz2_op = ops.jz @ ops.jz
    n = sys.n_atoms
    row = 0

    def record(step, rho):
        nonlocal row
        t = step * dt
        herm = _norm(rho - rho.conj().T)
        tr = abs(np.trace(rho) - 1.0)
        if not np.isfinite(herm) or not np.isfinite(tr):
            raise FailedRunError(f"state diverged at t={t}", time=t)
        h_rho = (rho + rho.conj().T) / 2.0
        out["times"][row] = t
        out["jz"][row] = 2.0 * np.trace(ops.jz @ rho).real / n
        out["jz2"][row] = 4.0 * np.trace(jz2_op @ rho).real / n**2
        out["jy"][row] = 2.0 * np.trace(ops.jy @ rho).real / n
        out["jx"][row] = 2.0 * np.trace(ops.jx @ rho).real / n
        out["trace_err"][row] = tr
        out["herm_err"][row] = herm
        out["min_eig"][row] = float(np.linalg.eigvalsh(h_rho)[0])
        row += 1

    record(0, rho)
    for step in range(n_steps):
        t = step * dt
        k1 = rhs(t, rho, ctx)
        k2 = rhs(t + dt / 2.0, rho + (dt / 2.0) * k1, ctx)
        k3 = rhs(t + dt / 2.0, rho + (dt / 2.0) * k2, ctx)
        k4 = rhs(t + dt, rho + dt * k3, ctx)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (step + 1) % config.record_every == 0 or step + 1 == n_steps:
            record(step + 1, rho)

    traj = Trajectory(**{k: v[:row] for k, v in out.items()})
    traj.meta = {"dt": dt, "n_steps": n_steps, "kernel_grid_dt": kdt,
                 "include_correlations": bool(config.include_correlations)}
    traj.validate()
    return traj
