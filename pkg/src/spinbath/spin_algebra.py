"""Collective spin operators and the system Hamiltonian.

Everything lives in the symmetric j = N/2 sector of N two-level atoms.  Both
the Hamiltonian H_S = eps*Jz + delta*Jx and the coupling operator F = Jx are
collective (functions of Jx, Jy, Jz only), and all initial states used here
are maximal-j states, so the dynamics never leaves this (N+1)-dimensional
sector.  The basis is the Jz eigenbasis ordered m = -N/2 ... +N/2.
"""

from dataclasses import dataclass, field

import numpy as np


def _freeze(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpinOperators:
    """Dense collective spin matrices for N atoms (j = N/2 sector).

    All matrices are (N+1) x (N+1) complex, in the Jz eigenbasis with
    m = -N/2 ... +N/2 (index 0 is the lowest rung).  ħ = 1.
    """

    n_atoms: int
    dim: int
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    jplus: np.ndarray
    jminus: np.ndarray

    @property
    def m_values(self):
        """Jz eigenvalues m = -N/2 ... +N/2 in basis order."""
        j = self.n_atoms / 2.0
        return np.arange(self.dim) - j


@dataclass(frozen=True)
class SystemParams:
    """Parameters of H_S = epsilon*Jz + delta*Jx for N atoms.

    delta_tilde = sqrt(delta^2 + epsilon^2) is the single-atom level
    splitting; the collective spectrum is the ladder delta_tilde * m.
    The fully degenerate point epsilon = delta = 0 is rejected.
    """

    epsilon: float
    delta: float
    n_atoms: int
    delta_tilde: float = field(init=False)

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError("n_atoms must be a positive integer")
        dt = float(np.hypot(self.delta, self.epsilon))
        if dt == 0.0:
            raise ValueError("degenerate Hamiltonian: epsilon = delta = 0")
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "delta_tilde", dt)


@dataclass(frozen=True)
class EigenSystem:
    """Eigendecomposition of H_S: energies E_a and eigenvector columns V.

    Energies are sorted ascending and equal delta_tilde * m to numerical
    precision.  Column phases are fixed so that the largest-magnitude
    component of each eigenvector is real and positive, which makes every
    downstream trajectory bit-reproducible.
    """

    energies: np.ndarray
    vectors: np.ndarray


def build_spin_operators(n_atoms):
    """Construct collective spin matrices in the maximal-j sector.

    Standard angular-momentum ladder elements
    <m+-1| J_+- |m> = sqrt(j(j+1) - m(m+-1)) with j = N/2, from which
    Jx = (J_+ + J_-)/2, Jy = (J_+ - J_-)/(2i) and Jz = diag(m).

    Parameters
    ----------
    n_atoms : int
        Number of two-level atoms, N >= 1.
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be a positive integer")
    j = n_atoms / 2.0
    dim = n_atoms + 1
    m = np.arange(dim) - j

    jz = np.diag(m).astype(complex)
    # <m+1|J_+|m> on the subdiagonal-to-superdiagonal step m -> m+1
    ladder = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jplus = np.zeros((dim, dim), dtype=complex)
    jplus[np.arange(1, dim), np.arange(dim - 1)] = ladder
    jminus = jplus.conj().T
    jx = (jplus + jminus) / 2
    jy = (jplus - jminus) / 2j

    return SpinOperators(
        n_atoms=n_atoms, dim=dim,
        jx=_freeze(jx), jy=_freeze(jy), jz=_freeze(jz),
        jplus=_freeze(jplus), jminus=_freeze(jminus),
    )


def hamiltonian(sys, ops):
    """H_S = epsilon*Jz + delta*Jx as a dense matrix."""
    return sys.epsilon * ops.jz + sys.delta * ops.jx


def diagonalize_hs(sys, ops):
    """Diagonalize H_S = epsilon*Jz + delta*Jx.

    Returns an EigenSystem with ascending energies (the delta_tilde * m
    ladder) and deterministically phased eigenvectors: each column is
    rotated so its largest-|component| entry is real positive (ties broken
    by the lowest index).
    """
    hs = hamiltonian(sys, ops)
    energies, vectors = np.linalg.eigh(hs)
    vectors = np.ascontiguousarray(vectors)
    for a in range(vectors.shape[1]):
        col = vectors[:, a]
        k = int(np.argmax(np.abs(col)))
        phase = col[k] / abs(col[k])
        vectors[:, a] = col / phase
    return EigenSystem(energies=_freeze(energies), vectors=_freeze(vectors))


def heisenberg_f(tau, eig, f):
    """Interaction-picture coupling operator F̄(tau) = e^{-iH_S tau} F e^{+iH_S tau}.

    Evaluated in the eigenbasis as an elementwise phase on V† F V:
    F̄(tau) = V [exp(-i(E_a - E_b) tau) ∘ (V† F V)] V†.  Hermitian whenever
    F is, and exactly F at tau = 0.
    """
    v = eig.vectors
    ft = v.conj().T @ f @ v
    phases = np.exp(-1j * tau * (eig.energies[:, None] - eig.energies[None, :]))
    return v @ (phases * ft) @ v.conj().T


def expect(rho, obs, imag_tol=1e-10):
    """Tr[obs rho] for Hermitian obs, asserted real to within imag_tol."""
    val = np.trace(obs @ rho)
    if abs(val.imag) > imag_tol:
        raise ValueError(
            f"expectation value has imaginary part {val.imag:.3e} beyond tolerance"
        )
    return float(val.real)
