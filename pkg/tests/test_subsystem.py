"""Compression to the measured hyperplane and the induced ball dynamics."""

import math

import numpy as np
import pytest

from qcl import tolerances as tol
from qcl.classifier import unitary_with_block_spectrum
from qcl.errors import SubsystemUnitary
from qcl.linalg import eig_unitary3
from qcl.numrange import numerical_range, z_from_omega
from qcl.quantum import evolve, pifs, rho_m, rho_z, state_dist
from qcl.subsystem import (
    MobiusClass,
    ball_eigenstates,
    ball_report,
    build_subsystem,
    det3,
    fixed_points,
    iterate_f1,
    mobius_class,
    rho_v_is_singular,
    theta_basis,
)

from helpers import (
    CIRCULAR_LAMBDA,
    CW_MATRIX,
    SQRT2,
    edge_omega,
    haar_unitary,
    interior_omega,
    random_state_vector,
)


@pytest.fixture
def rng():
    return np.random.default_rng(202)


def block_pifs(mu1, mu2):
    """Measured system whose compression is upper triangular with the given
    eigenvalues: z = e3 makes the hyperplane basis exactly (e1, e2)."""
    u = unitary_with_block_spectrum(mu1, mu2)
    return pifs(u, np.array([0.0, 0.0, 1.0], dtype=complex))


def test_theta_basis_orthonormal(rng):
    for _ in range(100):
        z = random_state_vector(rng)
        b = theta_basis(z)
        assert np.max(np.abs(b.conj().T @ b - np.eye(2))) <= tol.EPS_NUM
        assert np.max(np.abs(b.conj().T @ z)) <= tol.EPS_NUM


def test_trace_det_identities(rng):
    for _ in range(300):
        u = haar_unitary(rng)
        z = random_state_vector(rng)
        p = pifs(u, z)
        sub = build_subsystem(p)
        a = sub.a
        tr_a = a[0, 0] + a[1, 1]
        det_a = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        assert abs(tr_a - (np.trace(u) - p.omega)) <= 10 * tol.EPS_NUM
        assert abs(det_a - p.omega.conjugate() * det3(u)) <= 10 * tol.EPS_NUM
        assert abs(sub.lambda1 * sub.lambda2 - det_a) <= 100 * tol.EPS_NUM
        assert abs(sub.lambda1 + sub.lambda2 - tr_a) <= 100 * tol.EPS_NUM


def test_singular_values_are_one_and_abs_omega(rng):
    for _ in range(200):
        u = haar_unitary(rng)
        z = random_state_vector(rng)
        sub = build_subsystem(pifs(u, z))
        s = np.linalg.svd(sub.a, compute_uv=False)
        assert abs(s[0] - 1.0) <= 10 * tol.EPS_NUM
        assert abs(s[1] - abs(sub.omega)) <= 10 * tol.EPS_NUM


def schur_offdiag(a):
    """|x| for the upper triangular form [[lam1, x], [0, lam2]], computed
    from an explicit Schur vector rather than from the eigenvalue formula."""
    lam = np.linalg.eigvals(a)
    lam = sorted(lam, key=abs, reverse=True)
    w = np.linalg.svd(a - lam[0] * np.eye(2), compute_uv=True)[2].conj().T[:, -1]
    q2 = np.array([-w[1].conjugate(), w[0].conjugate()])
    return abs(np.vdot(w, a @ q2))


def test_schur_defect_identity(rng):
    # |x|^2 = (1 - |lam1|^2)(1 - |lam2|^2) for any compression of a unitary.
    for _ in range(200):
        u = haar_unitary(rng)
        z = random_state_vector(rng)
        sub = build_subsystem(pifs(u, z))
        want = (1.0 - abs(sub.lambda1) ** 2) * (1.0 - abs(sub.lambda2) ** 2)
        assert abs(schur_offdiag(sub.a) ** 2 - want) <= 1e-8


def test_cw_e1_is_the_circular_pair():
    sub = build_subsystem(pifs(CW_MATRIX, np.array([1.0, 0, 0], dtype=complex)))
    assert abs(sub.omega - 1.0 / SQRT2) <= tol.EPS_NUM
    assert abs(sub.lambda1 - 1j * CIRCULAR_LAMBDA) <= 1e-12
    assert abs(sub.lambda2 + 1j * CIRCULAR_LAMBDA) <= 1e-12
    assert mobius_class(sub) is MobiusClass.ELLIPTIC
    assert abs(abs(sub.psi) - math.pi) <= 1e-9


def test_cw_e2_is_singular_s1():
    sub = build_subsystem(pifs(CW_MATRIX, np.array([0, 1.0, 0], dtype=complex)))
    assert abs(sub.omega) <= tol.EPS_NUM
    assert abs(sub.lambda1 - 1.0 / SQRT2) <= 1e-12
    assert abs(sub.lambda2) <= tol.EPS_NUM
    assert mobius_class(sub) is MobiusClass.SINGULAR_S1
    assert sub.psi is None


def test_mobius_class_synthetic_cases():
    cases = [
        ((0.9, 0.5 * np.exp(1.0j)), MobiusClass.LOXODROMIC),
        ((0.8, 0.8 * np.exp(2j * math.pi / 3)), MobiusClass.ELLIPTIC),
        ((0.5, 0.5), MobiusClass.PARABOLIC),
        ((np.exp(0.4j), np.exp(1.3j)), MobiusClass.ELLIPTIC),
        ((np.exp(0.4j), np.exp(0.4j)), MobiusClass.TRIVIAL),
        ((0.7, 0.0), MobiusClass.SINGULAR_S1),
        ((0.0, 0.0), MobiusClass.SINGULAR_S2),
    ]
    for (m1, m2), want in cases:
        sub = build_subsystem(block_pifs(m1, m2))
        assert mobius_class(sub) is want, f"{m1}, {m2}"


def test_psi_orientation():
    sub = build_subsystem(block_pifs(0.8, 0.8 * np.exp(2j * math.pi / 3)))
    assert sub.psi is not None
    assert abs(sub.psi - 2.0 * math.pi / 3.0) <= 1e-12


def test_ball_eigenstates_are_fixed():
    p = block_pifs(0.9, 0.5 * np.exp(1.0j))
    sub = build_subsystem(p)
    e1, e2 = ball_eigenstates(sub)
    assert e2 is not None
    for state in (e1, e2):
        assert state_dist(evolve(p, 1, state), state) <= 100 * tol.EPS_NUM
    # Degenerate pair collapses to a single eigendirection.
    e1d, e2d = ball_eigenstates(build_subsystem(block_pifs(0.5, 0.5)))
    assert e2d is None


def test_fixed_points_by_class():
    fx = fixed_points(build_subsystem(block_pifs(0.9, 0.5 * np.exp(1.0j))))
    assert [f.stability for f in fx.points] == ["attractive", "repulsive"]
    assert not fx.segment

    fx = fixed_points(build_subsystem(block_pifs(0.8, 0.8 * np.exp(2j * math.pi / 3))))
    assert [f.stability for f in fx.points] == ["neutral", "neutral"]
    assert fx.segment

    fx = fixed_points(build_subsystem(block_pifs(0.5, 0.5)))
    assert [f.stability for f in fx.points] == ["attractive"]

    fx = fixed_points(build_subsystem(block_pifs(0.7, 0.0)))
    assert [f.stability for f in fx.points] == ["attractive"]

    fx = fixed_points(build_subsystem(block_pifs(0.0, 0.0)))
    assert fx.points == [] and not fx.segment


def test_fixed_points_rejects_unitary_compression(rng):
    u = haar_unitary(rng)
    z = eig_unitary3(u).eigvecs[:, 1]
    sub = build_subsystem(pifs(u, z))
    with pytest.raises(SubsystemUnitary):
        fixed_points(sub)


def test_attractive_point_attracts(rng):
    p = block_pifs(0.9, 0.5 * np.exp(1.0j))
    sub = build_subsystem(p)
    target = fixed_points(sub).points[0].state
    traj = iterate_f1(sub, rho_m(p))
    assert traj.termination.kind == "converged"
    assert state_dist(traj.termination.limit, target) <= tol.EPS_NUM
    assert state_dist(traj.states[-1], target) <= 1e-6


def test_iterate_periodic_kappa2():
    p = pifs(CW_MATRIX, np.array([1.0, 0, 0], dtype=complex))
    sub = build_subsystem(p)
    traj = iterate_f1(sub, rho_m(p))
    assert traj.termination.kind == "periodic"
    assert traj.termination.kappa == 2


def test_iterate_periodic_kappa3():
    p = block_pifs(0.8, 0.8 * np.exp(2j * math.pi / 3))
    sub = build_subsystem(p)
    traj = iterate_f1(sub, rho_m(p))
    assert traj.termination.kind == "periodic"
    assert traj.termination.kappa == 3


def test_iterate_truncates_on_irrational_rotation():
    # Golden-ratio rotation angle: badly approximable, so no near-period
    # shows up within any window this search can reach.
    psi = math.pi * (math.sqrt(5.0) - 1.0) / 2.0
    p = block_pifs(0.8, 0.8 * np.exp(1j * psi))
    sub = build_subsystem(p)
    traj = iterate_f1(sub, rho_m(p), n_max=2000)
    assert traj.termination.kind == "truncated"
    assert len(traj.states) == 2001


def test_iterate_leaves_domain_at_taupek_null():
    u = np.diag([1.0, -1.0, 1.0j]).astype(complex)
    p = pifs(u, z_from_omega(u, 0.0))
    sub = build_subsystem(p)
    first = evolve(p, 1, rho_z(p))
    traj = iterate_f1(sub, first)
    assert traj.termination.kind == "left_domain"
    assert len(traj.states) == 1


def test_iterate_rejects_states_off_hyperplane():
    p = pifs(CW_MATRIX, np.array([1.0, 0, 0], dtype=complex))
    sub = build_subsystem(p)
    with pytest.raises(ValueError):
        iterate_f1(sub, rho_z(p))


def test_rho_v_singular_on_edge(rng):
    # On an edge of the range the top eigenvalue is unimodular and the first
    # branch-1 image of rho_z freezes.
    nr = numerical_range(CW_MATRIX)
    om = edge_omega(nr, rng)
    z = z_from_omega(CW_MATRIX, om)
    p = pifs(CW_MATRIX, z)
    sub = build_subsystem(p)
    flag, detail = rho_v_is_singular(sub)
    assert flag and detail == "fixed"
    rv = evolve(p, 1, rho_z(p))
    assert state_dist(evolve(p, 1, rv), rv) <= 1e-9


def test_rho_v_singular_interior_is_false(rng):
    for _ in range(20):
        u = haar_unitary(rng)
        om = interior_omega(numerical_range(u), rng)
        sub = build_subsystem(pifs(u, z_from_omega(u, om)))
        assert rho_v_is_singular(sub) == (False, None)


def test_rho_v_singular_taupek_null():
    u = np.diag([1.0, -1.0, 1.0j]).astype(complex)
    sub = build_subsystem(pifs(u, z_from_omega(u, 0.0)))
    assert rho_v_is_singular(sub) == (True, "out_of_domain")


def test_ball_report_cw_circular():
    p = pifs(CW_MATRIX, np.array([1.0, 0, 0], dtype=complex))
    rep = ball_report(build_subsystem(p))
    assert rep.fixed.segment
    assert rep.traj_m.termination.kind == "periodic"
    assert rep.traj_m.termination.kappa == 2
    assert rep.traj_v is not None
    assert rep.traj_v.termination.kind == "periodic"
