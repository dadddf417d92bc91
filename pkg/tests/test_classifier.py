"""Chain classification: both routes, the rationality scan, the diagrams."""

import math
from fractions import Fraction

import numpy as np
import pytest

from qcl import tolerances as tol
from qcl.classifier import (
    ChainKind,
    ChainType,
    classify_by_eigen,
    classify_by_range,
    commensurability,
    expected_diagram,
    unitary_with_block_spectrum,
)
from qcl.errors import OutsideRange
from qcl.linalg import check_unitary, eig_unitary3
from qcl.numrange import barycentric, numerical_range, z_from_omega
from qcl.quantum import pifs, prob, rho_m
from qcl.subsystem import build_subsystem

from helpers import CW_MATRIX, OMEGA_B, edge_omega, haar_unitary, interior_omega

GOLDEN = math.pi * (math.sqrt(5.0) - 1.0) / 2.0
E3 = np.array([0.0, 0.0, 1.0], dtype=complex)


@pytest.fixture
def rng():
    return np.random.default_rng(303)


def eigen_type(mu1, mu2, **kw):
    u = unitary_with_block_spectrum(mu1, mu2)
    return classify_by_eigen(build_subsystem(pifs(u, E3)), **kw)


def test_chain_type_payload_rules():
    with pytest.raises(ValueError):
        ChainType(ChainKind.FINITE_ELLIPTIC)
    with pytest.raises(ValueError):
        ChainType(ChainKind.FINITE_ELLIPTIC, kappa=1)
    with pytest.raises(ValueError):
        ChainType(ChainKind.GENERIC, kappa=3)
    with pytest.raises(ValueError):
        ChainType(ChainKind.GENERIC, qmax_certified=64)
    ct = ChainType(ChainKind.FINITE_ELLIPTIC, kappa=2)
    assert ct.is_circular and ct.code == 5
    assert not ChainType(ChainKind.FINITE_ELLIPTIC, kappa=3).is_circular
    assert ChainType(ChainKind.UNITARY).code == 0
    assert ChainType(ChainKind.GENERIC).code == 7


def test_chain_type_str_forms():
    assert str(ChainType(ChainKind.UNITARY)) == "Unitary"
    assert str(ChainType(ChainKind.GENERIC_NULL)) == "GenericNull"
    assert str(ChainType(ChainKind.TAUPEK_NULL)) == "TaupekNull"
    assert str(ChainType(ChainKind.DOUBLE_NULL)) == "DoubleNull"
    assert str(ChainType(ChainKind.TAUPEK)) == "Taupek"
    assert str(ChainType(ChainKind.FINITE_ELLIPTIC, kappa=2)) == "FiniteElliptic(kappa=2) [circular]"
    assert str(ChainType(ChainKind.FINITE_ELLIPTIC, kappa=5)) == "FiniteElliptic(kappa=5)"
    assert str(ChainType(ChainKind.INFINITE_ELLIPTIC, qmax_certified=64)) == "InfiniteElliptic(q_max=64)"
    assert str(ChainType(ChainKind.GENERIC)) == "Generic"


def test_commensurability_fixed_values():
    cases = [
        (math.pi, (1, 1), 2),
        (2.0 * math.pi / 3.0, (2, 3), 3),
        (math.pi / 2.0, (1, 2), 4),
        (2.0 * math.pi / 5.0, (2, 5), 5),
        (3.0 * math.pi / 5.0, (3, 5), 10),
    ]
    for ups, pq, kappa in cases:
        res = commensurability(ups)
        assert res.rational
        assert res.p_over_q == pq
        assert res.kappa == kappa


def test_commensurability_golden_is_irrational():
    res = commensurability(GOLDEN)
    assert not res.rational
    assert res.p_over_q is None and res.kappa is None


def test_commensurability_domain():
    for bad in (0.0, -0.5, 4.0):
        with pytest.raises(ValueError):
            commensurability(bad)
    # The closed top end survives a float's worth of overshoot.
    assert commensurability(math.pi + 1e-13).kappa == 2


def test_commensurability_brute_force(rng):
    # Oracle: kappa is the order of the rotation, i.e. the least n with
    # n * p = 0 mod 2q, computed in integer arithmetic.
    for _ in range(300):
        q = int(rng.integers(1, tol.Q_MAX + 1))
        p = int(rng.integers(1, q + 1))
        f = Fraction(p, q)
        ups = math.pi * f.numerator / f.denominator
        res = commensurability(ups)
        assert res.rational
        assert res.p_over_q == (f.numerator, f.denominator)
        order = next(n for n in range(1, 2 * f.denominator + 1) if (n * f.numerator) % (2 * f.denominator) == 0)
        assert res.kappa == order


def test_commensurability_rejects_offsets():
    # 5e-8 of pi away from a small fraction: too far for eps_rat, too close
    # for any other denominator <= 64 to claim it.
    for base in (Fraction(1, 3), Fraction(1, 2), Fraction(7, 64)):
        ups = math.pi * (float(base) + 5e-8)
        assert not commensurability(ups).rational


def test_classify_by_eigen_all_kinds():
    assert eigen_type(np.exp(0.4j), np.exp(1.3j)).kind is ChainKind.UNITARY
    assert eigen_type(0.7, 0.0).kind is ChainKind.GENERIC_NULL
    assert eigen_type(np.exp(0.4j), 0.0).kind is ChainKind.TAUPEK_NULL
    assert eigen_type(0.0, 0.0).kind is ChainKind.DOUBLE_NULL
    assert eigen_type(np.exp(0.4j), 0.5).kind is ChainKind.TAUPEK

    circ = eigen_type(0.8, -0.8)
    assert circ.kind is ChainKind.FINITE_ELLIPTIC and circ.kappa == 2 and circ.is_circular

    k4 = eigen_type(0.8, 0.8 * np.exp(1j * math.pi / 2))
    assert k4.kind is ChainKind.FINITE_ELLIPTIC and k4.kappa == 4

    inf = eigen_type(0.8, 0.8 * np.exp(1j * GOLDEN))
    assert inf.kind is ChainKind.INFINITE_ELLIPTIC and inf.qmax_certified == tol.Q_MAX

    assert eigen_type(0.9, 0.5 * np.exp(1.0j)).kind is ChainKind.GENERIC
    # A defective double eigenvalue drains like the generic case.
    assert eigen_type(0.5, 0.5).kind is ChainKind.GENERIC


def test_classify_by_range_cw_points():
    tr_u = complex(np.trace(CW_MATRIX))
    t = classify_by_range(CW_MATRIX, tr_u)
    assert t.kind is ChainKind.FINITE_ELLIPTIC and t.kappa == 2

    assert classify_by_range(CW_MATRIX, 0.0).kind is ChainKind.GENERIC_NULL
    assert classify_by_range(CW_MATRIX, 1.0).kind is ChainKind.UNITARY
    assert classify_by_range(CW_MATRIX, OMEGA_B).kind is ChainKind.TAUPEK
    assert classify_by_range(CW_MATRIX, 0.5).kind is ChainKind.INFINITE_ELLIPTIC
    assert classify_by_range(CW_MATRIX, 0.02).kind is ChainKind.GENERIC

    for outside in (1.2, -0.5, 0.9j):
        with pytest.raises(OutsideRange):
            classify_by_range(CW_MATRIX, outside)


def test_classify_by_range_null_subtypes():
    # Acute triangle: origin strictly inside.
    assert classify_by_range(CW_MATRIX, 0.0).kind is ChainKind.GENERIC_NULL
    # Equilateral triangle: the cube roots of unity.
    ueq = np.diag([1.0, np.exp(2j * math.pi / 3), np.exp(-2j * math.pi / 3)])
    assert classify_by_range(ueq, 0.0).kind is ChainKind.DOUBLE_NULL
    # Right angle: the origin lands on the hypotenuse.
    urt = np.diag([1.0, 1.0j, -1.0]).astype(complex)
    assert classify_by_range(urt, 0.0).kind is ChainKind.TAUPEK_NULL
    # Obtuse triangle: the origin is not in the range at all.
    uob = np.diag([1.0, np.exp(0.3j), np.exp(0.6j)])
    with pytest.raises(OutsideRange):
        classify_by_range(uob, 0.0)


def test_classify_by_range_degenerate_ranges():
    upoint = (0.7 + 0.714142842854285j) * np.eye(3)
    check_unitary(upoint)
    assert classify_by_range(upoint, 0.7 + 0.714142842854285j).kind is ChainKind.UNITARY
    with pytest.raises(OutsideRange):
        classify_by_range(upoint, 0.0)

    uchord = np.diag([1.0, 1.0, 1.0j]).astype(complex)
    assert classify_by_range(uchord, 0.5 + 0.5j).kind is ChainKind.TAUPEK
    with pytest.raises(OutsideRange):
        classify_by_range(uchord, 0.0)

    udiam = np.diag([1.0, -1.0, 1.0]).astype(complex)
    assert classify_by_range(udiam, 0.0).kind is ChainKind.TAUPEK_NULL
    assert classify_by_range(udiam, 0.5).kind is ChainKind.TAUPEK


def test_cross_route_agreement(rng):
    # The geometry route and the eigenvalue route never disagree away from
    # decision boundaries; interior and edge draws stay away by margin.
    for i in range(200):
        u = haar_unitary(rng)
        nr = numerical_range(u)
        om = interior_omega(nr, rng) if i % 3 else edge_omega(nr, rng)
        rt = classify_by_range(u, om, nr=nr)
        et = classify_by_eigen(build_subsystem(pifs(u, z_from_omega(u, om))))
        assert rt.kind is et.kind, f"{i}: {rt} vs {et} at omega {om}"
        assert rt.kappa == et.kappa


def test_eigen_route_depends_only_on_omega(rng):
    # Any unit vector with the same omega produces the same chain type and
    # the same compressed spectrum; the eigencomponent phases are free.
    for _ in range(50):
        u = haar_unitary(rng)
        nr = numerical_range(u)
        om = interior_omega(nr, rng)
        spec = eig_unitary3(u)
        bary = barycentric(nr, om)
        weights = np.sqrt(np.array([bary.a1, bary.a2, bary.a3]))
        z2 = spec.eigvecs @ (weights * np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, 3)))
        assert abs(np.vdot(z2, u @ z2) - om) <= 10 * tol.EPS_NUM

        s1 = build_subsystem(pifs(u, z_from_omega(u, om)))
        s2 = build_subsystem(pifs(u, z2))
        t1, t2 = classify_by_eigen(s1), classify_by_eigen(s2)
        assert t1.kind is t2.kind and t1.kappa == t2.kappa
        for l1, l2 in zip(
            sorted((s1.lambda1, s1.lambda2), key=lambda c: (c.real, c.imag)),
            sorted((s2.lambda1, s2.lambda2), key=lambda c: (c.real, c.imag)),
        ):
            assert abs(l1 - l2) <= 1e-8


def test_unitary_with_block_spectrum(rng):
    for _ in range(100):
        mu1 = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        mu2 = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        u = unitary_with_block_spectrum(mu1, mu2)
        check_unitary(u)
        got = sorted(np.linalg.eigvals(u[:2, :2]), key=lambda c: (c.real, c.imag))
        want = sorted((mu1, mu2), key=lambda c: (c.real, c.imag))
        assert max(abs(g - w) for g, w in zip(got, want)) <= 1e-10
    with pytest.raises(ValueError):
        unitary_with_block_spectrum(1.2, 0.0)


def diagram_for(mu1, mu2):
    p = pifs(unitary_with_block_spectrum(mu1, mu2), E3)
    sub = build_subsystem(p)
    ct = classify_by_eigen(sub)
    return p, sub, ct, expected_diagram(ct, sub)


def test_diagram_unitary():
    _, _, ct, d = diagram_for(np.exp(0.4j), np.exp(1.3j))
    assert ct.kind is ChainKind.UNITARY
    assert d.states == ["rho_z", "rho_m"]
    assert {(e.src, e.dst, e.prob) for e in d.edges} == {
        ("rho_z", "rho_z", 1.0),
        ("rho_m", "rho_m", 1.0),
    }


def test_diagram_double_null():
    p, _, ct, d = diagram_for(0.0, 0.0)
    assert ct.kind is ChainKind.DOUBLE_NULL
    by_pair = {(e.src, e.dst): e.prob for e in d.edges}
    assert by_pair[("rho_z", "rho_v")] == 1.0
    assert by_pair[("rho_v", "rho_e1")] == 1.0
    assert by_pair[("rho_e1", "rho_z")] == 1.0
    p1m = prob(p, 1, rho_m(p))
    assert abs(by_pair[("rho_m", "rho_e1")] - p1m) <= tol.EPS_NUM
    assert abs(by_pair[("rho_m", "rho_z")] - (1.0 - p1m)) <= tol.EPS_NUM


def test_diagram_probabilities_sum(rng):
    # Wherever every outgoing edge of a state has a numeric probability,
    # those probabilities must sum to 1.
    cases = [
        (np.exp(0.4j), np.exp(1.3j)),
        (0.7, 0.0),
        (np.exp(0.4j), 0.0),
        (0.0, 0.0),
        (np.exp(0.4j), 0.5),
        (0.8, -0.8),
        (0.8, 0.8 * np.exp(2j * math.pi / 3)),
        (0.8, 0.8 * np.exp(1j * GOLDEN)),
        (0.9, 0.5 * np.exp(1.0j)),
    ]
    for mu1, mu2 in cases:
        _, _, ct, d = diagram_for(mu1, mu2)
        for src in d.states:
            out = d.outgoing(src)
            if out and all(e.prob is not None for e in out):
                total = sum(e.prob for e in out)
                assert abs(total - 1.0) <= 1e-9, f"{ct}: {src} sums to {total}"


def test_diagram_finite_elliptic_orbit():
    p, sub, ct, d = diagram_for(0.8, 0.8 * np.exp(2j * math.pi / 3))
    assert ct.kind is ChainKind.FINITE_ELLIPTIC and ct.kappa == 3
    assert "F1^1(rho_m)" in d.states and "F1^2(rho_m)" in d.states
    # The orbit closes: the last orbit state points back at the seed.
    pairs = {(e.src, e.dst) for e in d.edges}
    assert ("F1^2(rho_m)", "rho_m") in pairs
    assert ("F1^2(rho_v)", "rho_v") in pairs
    # Return arrows from the rho_v orbit are the ones a finite run may miss.
    for e in d.edges:
        if e.possibly_absent:
            assert e.src.endswith("(rho_v)") or e.src == "rho_v"
            assert e.dst == "rho_z"


def test_diagram_generic_symbolic_edges():
    _, _, ct, d = diagram_for(0.9, 0.5 * np.exp(1.0j))
    assert ct.kind is ChainKind.GENERIC
    assert d.states == ["rho_z", "rho_m", "F1^n(rho_m)", "rho_v", "F1^n(rho_v)"]
    symbolic = {(e.src, e.dst) for e in d.edges if e.prob is None}
    assert ("F1^n(rho_m)", "F1^n+1(rho_m)") in symbolic
    assert ("F1^n(rho_v)", "F1^n+1(rho_v)") in symbolic
