"""The 2x2 compression of U to the measured hyperplane and its ball dynamics.

Branch 1 of the measurement, restricted to states supported on the
hyperplane z-perp, is conjugate to the Mobius-type action of the compressed
matrix A on the unit ball of 2x2 density matrices.  A's eigenvalue pair
(lambda1, lambda2) drives everything downstream: the Mobius class, the fixed
point set, and the chain classification.
"""

from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .errors import SubsystemUnitary, ZeroProbability
from .linalg import (
    _char_coeffs,
    _complement_pair,
    canonical_phase,
    eig2,
)
from .quantum import DensityMatrix, Pifs, evolve, pure_state, rho_z, state_dist

# Period search window for trajectory iteration.  The commensurability
# search certifies denominators up to Q_MAX = 64, so any period it can name
# is at most 2 * Q_MAX; the window doubles that for slack.
PERIOD_WINDOW = 256


def theta_basis(z) -> np.ndarray:
    """Deterministic orthonormal basis of z-perp, returned as a (3, 2) array.

    Columns come from projecting the two standard basis vectors least
    aligned with z (ties to the lower index) and Gram-Schmidting.
    """
    z = np.asarray(z, dtype=complex)
    u1, u2 = _complement_pair(z / np.linalg.norm(z))
    return np.column_stack([u1, u2])


@dataclass
class SubsystemMap:
    """Compression A of U to z-perp, with its eigen-data and provenance."""

    pifs: Pifs
    basis: np.ndarray  # (3, 2), columns span z-perp
    a: np.ndarray  # (2, 2) compressed matrix in that basis
    v2: np.ndarray  # components of Pi_1 U z in the basis
    omega: complex
    lambda1: complex
    lambda2: complex
    psi: float | None  # Arg(lambda2 / lambda1) in (-pi, pi], None if singular


def det3(u) -> complex:
    return _char_coeffs(np.asarray(u, dtype=complex))[2]


def build_subsystem(p: Pifs) -> SubsystemMap:
    """Compress U to z-perp and extract the eigenvalue pair.

    The eigenvalues come from eig2 on the explicit matrix; the independent
    trace/determinant route (tr A = tr U - omega, det A = conj(omega) det U)
    is asserted against it, which catches basis construction bugs.
    """
    basis = theta_basis(p.pvm.z)
    a = basis.conj().T @ p.u @ basis
    v2 = basis.conj().T @ (p.u @ p.pvm.z)
    lam1, lam2 = eig2(a)

    tr_expected = complex(np.trace(p.u)) - p.omega
    det_expected = p.omega.conjugate() * det3(p.u)
    tr_got = complex(a[0, 0] + a[1, 1])
    det_got = complex(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    if abs(tr_got - tr_expected) > 100 * tol.EPS_NUM or abs(det_got - det_expected) > 100 * tol.EPS_NUM:
        raise ArithmeticError(
            "compression self-check failed: "
            f"tr {tr_got} vs {tr_expected}, det {det_got} vs {det_expected}"
        )

    psi = None
    if abs(lam2) > 0.0:
        psi = cmath.phase(lam2 / lam1)
    return SubsystemMap(
        pifs=p,
        basis=basis,
        a=a,
        v2=v2,
        omega=p.omega,
        lambda1=lam1,
        lambda2=lam2,
        psi=psi,
    )


class MobiusClass(enum.Enum):
    LOXODROMIC = "loxodromic"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    TRIVIAL = "trivial"
    SINGULAR_S1 = "singular_s1"
    SINGULAR_S2 = "singular_s2"


def mobius_class(sub: SubsystemMap, eps: float | None = None) -> MobiusClass:
    """Conjugacy class of the induced ball map, from the eigenvalue pair."""
    eps = tol.eps_class() if eps is None else eps
    a1, a2 = abs(sub.lambda1), abs(sub.lambda2)
    if a2 <= tol.EPS_NUM:
        return MobiusClass.SINGULAR_S2 if a1 <= tol.EPS_NUM else MobiusClass.SINGULAR_S1
    if abs(a1 - a2) <= eps:
        if abs(sub.lambda1 - sub.lambda2) <= eps:
            return MobiusClass.TRIVIAL if a1 >= 1.0 - eps else MobiusClass.PARABOLIC
        return MobiusClass.ELLIPTIC
    return MobiusClass.LOXODROMIC


def _eigvec2(a: np.ndarray, lam: complex) -> np.ndarray:
    """Unit eigenvector of a 2x2 matrix for a known eigenvalue."""
    cand1 = np.array([a[0, 1], lam - a[0, 0]], dtype=complex)
    cand2 = np.array([lam - a[1, 1], a[1, 0]], dtype=complex)
    vec = cand1 if np.linalg.norm(cand1) >= np.linalg.norm(cand2) else cand2
    norm = np.linalg.norm(vec)
    if norm <= 1e-30:
        # a is (numerically) lam * I; any direction works.
        vec, norm = np.array([1.0, 0.0], dtype=complex), 1.0
    return vec / norm


def ball_eigenstates(sub: SubsystemMap) -> tuple[DensityMatrix, DensityMatrix | None]:
    """Pure states of the eigenvectors of A, lifted back into C^3.

    Returns (rho_e1, rho_e2); rho_e2 is None when A is defective or when
    both eigenvalues vanish with A nonzero (single eigendirection).
    """
    e1 = _eigvec2(sub.a, sub.lambda1)
    state1 = pure_state(canonical_phase(sub.basis @ e1))
    if abs(sub.lambda1 - sub.lambda2) <= tol.EPS_NUM:
        return state1, None
    e2 = _eigvec2(sub.a, sub.lambda2)
    state2 = pure_state(canonical_phase(sub.basis @ e2))
    return state1, state2


@dataclass
class FixedPoint:
    state: DensityMatrix
    stability: str  # "attractive" | "neutral" | "repulsive"


@dataclass
class FixedPointSet:
    points: list[FixedPoint]
    segment: bool  # True when the whole segment between the points is fixed


def fixed_points(sub: SubsystemMap) -> FixedPointSet:
    """Fixed points of the branch-1 ball map, tagged by stability.

    Raises SubsystemUnitary when A is unitary (every point would qualify
    or the map is a rotation; the question is not meaningful).
    """
    if abs(sub.lambda2) >= 1.0 - tol.EPS_NUM:
        raise SubsystemUnitary(f"|lambda2| = {abs(sub.lambda2):.12f}, A is unitary")
    cls = mobius_class(sub)
    e1, e2 = ball_eigenstates(sub)
    if cls is MobiusClass.SINGULAR_S2:
        return FixedPointSet(points=[], segment=False)
    if cls in (MobiusClass.PARABOLIC, MobiusClass.SINGULAR_S1):
        return FixedPointSet(points=[FixedPoint(e1, "attractive")], segment=False)
    if cls is MobiusClass.ELLIPTIC:
        return FixedPointSet(
            points=[FixedPoint(e1, "neutral"), FixedPoint(e2, "neutral")],
            segment=True,
        )
    # Loxodromic: trajectories drain toward the lambda1 eigenstate.
    return FixedPointSet(
        points=[FixedPoint(e1, "attractive"), FixedPoint(e2, "repulsive")],
        segment=False,
    )


@dataclass
class Termination:
    kind: str  # "converged" | "periodic" | "left_domain" | "truncated"
    kappa: int | None = None
    limit: DensityMatrix | None = None


@dataclass
class BallTrajectory:
    states: list[DensityMatrix]
    termination: Termination


def iterate_f1(sub: SubsystemMap, rho0: DensityMatrix, n_max: int = tol.N_MAX) -> BallTrajectory:
    """Iterate branch 1 from a state supported on z-perp.

    Termination is routed by the Mobius class: contracting classes watch for
    convergence to the attractive eigenstate (EPS_CONV for 10 consecutive
    steps), rotating classes watch for a return within EPS_CONV of an
    earlier state (searching the last PERIOD_WINDOW states, enough for any
    period the commensurability search can certify).  Leaving the domain or
    exhausting n_max are tagged as such.
    """
    p = sub.pifs
    overlap = float(np.real(np.vdot(p.pvm.z, rho0.mat @ p.pvm.z)))
    if overlap > tol.EPS_NUM:
        raise ValueError(f"rho0 is not supported on z-perp: <z|rho z> = {overlap:.3e}")

    cls = mobius_class(sub)
    rotating = cls in (MobiusClass.ELLIPTIC, MobiusClass.TRIVIAL)
    target = None if rotating else ball_eigenstates(sub)[0]

    states = [rho0]
    consecutive = 0
    for _ in range(n_max):
        try:
            nxt = evolve(p, 1, states[-1])
        except ZeroProbability:
            return BallTrajectory(states, Termination("left_domain"))
        if rotating:
            lo = max(0, len(states) - PERIOD_WINDOW)
            for j in range(len(states) - 1, lo - 1, -1):
                if state_dist(nxt, states[j]) < tol.EPS_CONV:
                    return BallTrajectory(
                        states, Termination("periodic", kappa=len(states) - j)
                    )
            states.append(nxt)
        else:
            states.append(nxt)
            if state_dist(nxt, target) < tol.EPS_CONV:
                consecutive += 1
                if consecutive >= 10:
                    return BallTrajectory(states, Termination("converged", limit=target))
            else:
                consecutive = 0
    return BallTrajectory(states, Termination("truncated"))


def rho_v_is_singular(sub: SubsystemMap) -> tuple[bool, str | None]:
    """Whether the first branch-1 image of rho_z is an eigenstate of the map.

    True exactly when |lambda1| = 1; the detail says whether that state is a
    fixed point of branch 1 ("fixed", lambda2 nonzero) or falls out of the
    domain ("out_of_domain", lambda2 = 0).
    """
    if abs(sub.lambda2) >= 1.0 - tol.EPS_NUM:
        raise SubsystemUnitary(f"|lambda2| = {abs(sub.lambda2):.12f}, A is unitary")
    if abs(sub.lambda1) >= 1.0 - tol.EPS_NUM:
        detail = "fixed" if abs(sub.lambda2) > tol.EPS_NUM else "out_of_domain"
        return True, detail
    return False, None


@dataclass
class BallReport:
    fixed: FixedPointSet
    traj_m: BallTrajectory
    traj_v: BallTrajectory | None


def ball_report(sub: SubsystemMap, n_max: int = tol.N_MAX) -> BallReport:
    """Fixed points plus the two seed trajectories in one bundle."""
    fixed = fixed_points(sub)
    p = sub.pifs
    mixed_seed = DensityMatrix(p.pvm.pi1 / 2.0)
    traj_m = iterate_f1(sub, mixed_seed, n_max)
    traj_v = None
    if abs(p.omega) < 1.0 - tol.EPS_NUM:
        first = evolve(p, 1, rho_z(p))
        traj_v = iterate_f1(sub, first, n_max)
    return BallReport(fixed=fixed, traj_m=traj_m, traj_v=traj_v)
