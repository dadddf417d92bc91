"""Qutrit states, the rank-2 + rank-1 projective measurement, and the
measured-evolution maps.

The measurement is the pair Pi_2 = |z><z|, Pi_1 = I - Pi_2 applied after a
unitary kick: outcome i occurs with probability tr(Pi_i U rho U*) and sends
rho to Pi_i U rho U* Pi_i renormalized.  Together the two branch maps form a
place-dependent iterated function system on the state space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tolerances as tol
from .errors import SubsystemUnitary, ZeroProbability
from .linalg import canonical_phase, check_unitary, formal_cross, hermitian_eigvals3


@dataclass
class DensityMatrix:
    """A 3x3 density matrix (Hermitian, unit trace, positive semidefinite)."""

    mat: np.ndarray

    def __post_init__(self):
        self.mat = np.asarray(self.mat, dtype=complex)

    def distance(self, other: "DensityMatrix") -> float:
        return state_dist(self, other)


def density(mat, eps: float = tol.EPS_NUM) -> DensityMatrix:
    """Validating constructor: checks Hermiticity, trace, and positivity."""
    mat = np.asarray(mat, dtype=complex)
    if mat.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {mat.shape}")
    herm = float(np.max(np.abs(mat - mat.conj().T)))
    if herm > eps:
        raise ValueError(f"not Hermitian: max |rho - rho*| = {herm:.3e}")
    tr = complex(np.trace(mat))
    if abs(tr - 1.0) > eps:
        raise ValueError(f"trace is {tr}, expected 1")
    mat = (mat + mat.conj().T) / 2.0
    lo = hermitian_eigvals3(mat)[0]
    if lo < -eps:
        raise ValueError(f"not positive semidefinite: lowest eigenvalue {lo:.3e}")
    return DensityMatrix(mat)


def pure_state(w) -> DensityMatrix:
    """Rank-1 projector onto the given (normalized) vector."""
    w = np.asarray(w, dtype=complex)
    w = w / np.linalg.norm(w)
    return DensityMatrix(np.outer(w, w.conj()))


def maximally_mixed() -> DensityMatrix:
    return DensityMatrix(np.eye(3, dtype=complex) / 3.0)


def state_dist(a: DensityMatrix, b: DensityMatrix) -> float:
    """Max-norm distance between two states."""
    return float(np.max(np.abs(a.mat - b.mat)))


def purity(rho: DensityMatrix) -> float:
    return float(np.real(np.trace(rho.mat @ rho.mat)))


@dataclass
class Pvm21:
    """The (rank 2, rank 1) projective measurement attached to a unit vector z."""

    z: np.ndarray
    pi1: np.ndarray
    pi2: np.ndarray


def pvm21(z, eps: float = tol.EPS_NUM) -> Pvm21:
    z = np.asarray(z, dtype=complex)
    if z.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {z.shape}")
    norm = float(np.linalg.norm(z))
    if abs(norm - 1.0) > eps:
        raise ValueError(f"z must be a unit vector, got norm {norm}")
    z = z / norm
    pi2 = np.outer(z, z.conj())
    pi1 = np.eye(3, dtype=complex) - pi2
    return Pvm21(z=z, pi1=pi1, pi2=pi2)


@dataclass
class Pifs:
    """Unitary kick plus measurement: the place-dependent function system."""

    u: np.ndarray
    pvm: Pvm21
    omega: complex  # <z|Uz>, the diagonal expectation steering everything


def pifs(u, z, eps_unit: float = tol.EPS_UNIT) -> Pifs:
    u = check_unitary(u, eps_unit)
    pvm = pvm21(z)
    omega = complex(np.vdot(pvm.z, u @ pvm.z))
    return Pifs(u=u, pvm=pvm, omega=omega)


def _projector(p: Pifs, i: int) -> np.ndarray:
    if i == 1:
        return p.pvm.pi1
    if i == 2:
        return p.pvm.pi2
    raise ValueError(f"outcome must be 1 or 2, got {i}")


def prob(p: Pifs, i: int, rho: DensityMatrix) -> float:
    """Probability of outcome i from state rho, clamped into [0, 1]."""
    pi = _projector(p, i)
    sigma = p.u @ rho.mat @ p.u.conj().T
    val = float(np.real(np.trace(pi @ sigma)))
    return min(max(val, 0.0), 1.0)


def evolve(p: Pifs, i: int, rho: DensityMatrix) -> DensityMatrix:
    """Post-measurement state for outcome i.

    Raises ZeroProbability if the branch probability is at or below
    EPS_PROB, i.e. rho is outside the branch map's domain.
    """
    pi = _projector(p, i)
    sigma = p.u @ rho.mat @ p.u.conj().T
    tau = pi @ sigma @ pi
    pr = float(np.real(np.trace(tau)))
    if pr <= tol.EPS_PROB:
        raise ZeroProbability(f"outcome {i} has probability {pr:.3e}")
    out = tau / pr
    return DensityMatrix((out + out.conj().T) / 2.0)


def string_prob(p: Pifs, outcomes: Sequence[int], rho: DensityMatrix) -> float:
    """Probability of observing a finite outcome string from rho.

    Inductive product of branch probabilities along the evolving state;
    returns 0.0 as soon as any prefix hits a zero-probability branch.
    """
    total = 1.0
    state = rho
    for i in outcomes:
        pr = prob(p, i, state)
        if pr <= tol.EPS_PROB:
            return 0.0
        total *= pr
        state = evolve(p, i, state)
    return total


def rho_z(p: Pifs) -> DensityMatrix:
    """The pure state of the measurement vector itself (image of branch 2)."""
    return pure_state(p.pvm.z)


def rho_m(p: Pifs) -> DensityMatrix:
    """Normalized rank-2 projector Pi_1 / 2, the mixed seed state."""
    return DensityMatrix(p.pvm.pi1 / 2.0)


def rho_v(p: Pifs) -> DensityMatrix:
    """First branch-1 image of rho_z; defined only when |omega| < 1."""
    return evolve(p, 1, rho_z(p))


def unique_unit_prob_state(p: Pifs) -> DensityMatrix:
    """The single pure state with branch-1 probability exactly 1.

    Its vector spans the intersection of z-perp with the preimage of z-perp,
    obtained as a formal cross product.  Undefined when the compression of U
    to z-perp is unitary (|omega| = 1).
    """
    if abs(p.omega) >= 1.0 - tol.EPS_NUM:
        raise SubsystemUnitary(
            f"|omega| = {abs(p.omega):.12f}: every state keeps probability 1"
        )
    z = p.pvm.z
    u_dag_z = p.u.conj().T @ z
    cross = formal_cross(z.conj(), u_dag_z.conj())
    norm = float(np.linalg.norm(cross))
    if norm <= tol.EPS_NUM:
        raise SubsystemUnitary("z is an eigenvector of U at working precision")
    return pure_state(canonical_phase(cross / norm))
