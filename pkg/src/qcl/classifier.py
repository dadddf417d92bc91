"""Eight-way chain classification, by eigenvalues and by range geometry.

The two routes are deliberately independent: `classify_by_eigen` looks only
at the eigenvalue pair of the compressed matrix, `classify_by_range` only at
where omega sits inside the numerical-range triangle of U.  They must agree,
and the test suite leans on that redundancy.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .errors import OutsideRange
from .numrange import (
    NumericalRange,
    RangeKind,
    barycentric,
    numerical_range,
    segment_coordinate,
)
from .quantum import Pifs, prob, rho_m, rho_v
from .subsystem import SubsystemMap, det3, iterate_f1


class ChainKind(enum.IntEnum):
    """Chain families; the integer value doubles as the atlas type code."""

    UNITARY = 0
    GENERIC_NULL = 1
    TAUPEK_NULL = 2
    DOUBLE_NULL = 3
    TAUPEK = 4
    FINITE_ELLIPTIC = 5
    INFINITE_ELLIPTIC = 6
    GENERIC = 7


_KIND_LABELS = {
    ChainKind.UNITARY: "Unitary",
    ChainKind.GENERIC_NULL: "GenericNull",
    ChainKind.TAUPEK_NULL: "TaupekNull",
    ChainKind.DOUBLE_NULL: "DoubleNull",
    ChainKind.TAUPEK: "Taupek",
    ChainKind.FINITE_ELLIPTIC: "FiniteElliptic",
    ChainKind.INFINITE_ELLIPTIC: "InfiniteElliptic",
    ChainKind.GENERIC: "Generic",
}


@dataclass(frozen=True)
class ChainType:
    """A chain kind plus its per-kind payload.

    kappa is the trajectory period and is set exactly for FiniteElliptic
    (kappa = 2 is the circular case); qmax_certified records the denominator
    bound up to which irrationality was certified for InfiniteElliptic.
    """

    kind: ChainKind
    kappa: int | None = None
    qmax_certified: int | None = None

    def __post_init__(self) -> None:
        if self.kind is ChainKind.FINITE_ELLIPTIC:
            if self.kappa is None or self.kappa < 2:
                raise ValueError(f"FiniteElliptic needs kappa >= 2, got {self.kappa}")
        elif self.kappa is not None:
            raise ValueError(f"kappa is only meaningful for FiniteElliptic, not {self.kind}")
        if self.kind is not ChainKind.INFINITE_ELLIPTIC and self.qmax_certified is not None:
            raise ValueError("qmax_certified is only meaningful for InfiniteElliptic")

    @property
    def code(self) -> int:
        return int(self.kind)

    @property
    def is_circular(self) -> bool:
        return self.kind is ChainKind.FINITE_ELLIPTIC and self.kappa == 2

    def __str__(self) -> str:
        label = _KIND_LABELS[self.kind]
        if self.kind is ChainKind.FINITE_ELLIPTIC:
            label += f"(kappa={self.kappa})"
            if self.kappa == 2:
                label += " [circular]"
        elif self.kind is ChainKind.INFINITE_ELLIPTIC:
            label += f"(q_max={self.qmax_certified})"
        return label


@dataclass(frozen=True)
class CommensurabilityResult:
    upsilon: float
    rational: bool
    p_over_q: tuple[int, int] | None
    kappa: int | None


def _convergents(x: float, q_max: int) -> list[tuple[int, int]]:
    """Continued-fraction convergents p/q of x with q <= q_max."""
    h_prev2, k_prev2, h_prev, k_prev = 0, 1, 1, 0
    out: list[tuple[int, int]] = []
    a = x
    for _ in range(40):
        ai = int(math.floor(a))
        h = ai * h_prev + h_prev2
        k = ai * k_prev + k_prev2
        if k > q_max:
            break
        out.append((h, k))
        frac = a - ai
        if frac < 1e-16:
            break
        a = 1.0 / frac
        h_prev2, k_prev2, h_prev, k_prev = h_prev, k_prev, h, k
    return out


def commensurability(
    upsilon: float, q_max: int = tol.Q_MAX, eps_rat: float = tol.EPS_RAT
) -> CommensurabilityResult:
    """Decide whether upsilon is a rational multiple of pi, up to q_max.

    The convergents of upsilon/pi are scanned in order of denominator; the
    first one within eps_rat wins.  kappa is the order of e^{i*upsilon} as a
    root of unity: q for even numerators, 2q for odd ones.
    """
    if not 0.0 < upsilon <= math.pi + 1e-12:
        raise ValueError(f"upsilon must lie in (0, pi], got {upsilon}")
    x = min(upsilon / math.pi, 1.0)
    hit: tuple[int, int] | None = None
    for p, q in _convergents(x, q_max):
        if abs(x - p / q) <= eps_rat:
            hit = (p, q)
            break
    if hit is None or hit[0] == 0:
        return CommensurabilityResult(upsilon, False, None, None)
    p, q = hit
    kappa = q if p % 2 == 0 else 2 * q
    return CommensurabilityResult(upsilon, True, (p, q), kappa)


def classify_by_eigen(
    sub: SubsystemMap,
    eps: float | None = None,
    q_max: int = tol.Q_MAX,
    eps_rat: float = tol.EPS_RAT,
) -> ChainType:
    """Chain type from the eigenvalue pair of the compressed matrix.

    Decision order is fixed (unitary, null, taupek, elliptic, generic) so
    that overlapping tolerance bands resolve deterministically.
    """
    eps = tol.eps_class() if eps is None else eps
    a1, a2 = abs(sub.lambda1), abs(sub.lambda2)
    if a2 >= 1.0 - eps:
        return ChainType(ChainKind.UNITARY)
    if a2 <= eps:
        if a1 <= eps:
            return ChainType(ChainKind.DOUBLE_NULL)
        if a1 >= 1.0 - eps:
            return ChainType(ChainKind.TAUPEK_NULL)
        return ChainType(ChainKind.GENERIC_NULL)
    if a1 >= 1.0 - eps:
        return ChainType(ChainKind.TAUPEK)
    if abs(a1 - a2) <= eps and sub.psi is not None and abs(sub.psi) > eps:
        res = commensurability(abs(sub.psi), q_max, eps_rat)
        if res.rational:
            return ChainType(ChainKind.FINITE_ELLIPTIC, kappa=res.kappa)
        return ChainType(ChainKind.INFINITE_ELLIPTIC, qmax_certified=q_max)
    return ChainType(ChainKind.GENERIC)


_NULL_BY_KIND = {
    RangeKind.EQUILATERAL: ChainKind.DOUBLE_NULL,
    RangeKind.RIGHT_ANGLED: ChainKind.TAUPEK_NULL,
    RangeKind.DIAMETER: ChainKind.TAUPEK_NULL,
    RangeKind.ACUTE: ChainKind.GENERIC_NULL,
}


def classify_by_range(
    u,
    omega: complex,
    eps: float | None = None,
    q_max: int = tol.Q_MAX,
    eps_rat: float = tol.EPS_RAT,
    nr: NumericalRange | None = None,
) -> ChainType:
    """Chain type from the position of omega inside W(U).

    Pass a precomputed ``nr`` when classifying many omegas for one U.  The
    eigenvalue pair of the compressed matrix is never touched here; the
    elliptic test runs on the ratio (tr U - omega)^2 / (conj(omega) det U).
    """
    eps = tol.eps_class() if eps is None else eps
    u = np.asarray(u, dtype=complex)
    omega = complex(omega)
    if nr is None:
        nr = numerical_range(u)

    for v in nr.vertices:
        if abs(omega - v) <= tol.EPS_GEO:
            return ChainType(ChainKind.UNITARY)

    if nr.kind in (RangeKind.POINT, RangeKind.CHORD, RangeKind.DIAMETER):
        segment_coordinate(nr, omega)  # raises OutsideRange when off the segment
        if abs(omega) <= tol.EPS_GEO:
            # A chord through the origin is necessarily a diameter.
            return ChainType(ChainKind.TAUPEK_NULL)
        return ChainType(ChainKind.TAUPEK)

    bary = barycentric(nr, omega)
    b_min = min(bary.a1, bary.a2, bary.a3)
    if b_min < -tol.EPS_GEO:
        raise OutsideRange(f"omega {omega:.6f} lies outside W(U): barycentric min {b_min:.3e}")

    if abs(omega) <= tol.EPS_GEO:
        null_kind = _NULL_BY_KIND.get(nr.kind)
        if null_kind is None:
            raise OutsideRange(f"omega = 0 with a {nr.kind.value} range should not be inside")
        return ChainType(null_kind)

    if b_min <= tol.EPS_GEO:
        return ChainType(ChainKind.TAUPEK)

    tr_u = complex(np.trace(u))
    if abs(omega - tr_u) <= tol.EPS_GEO:
        return ChainType(ChainKind.FINITE_ELLIPTIC, kappa=2)

    num = (tr_u - omega) ** 2
    den = omega.conjugate() * det3(u)
    s = num * den.conjugate()
    d2 = den.real * den.real + den.imag * den.imag
    ratio = complex(s.real / d2, s.imag / d2)
    if abs(ratio.imag) <= eps and -eps <= ratio.real < 4.0 - eps:
        ups = 2.0 * math.acos(min(1.0, math.sqrt(max(ratio.real, 0.0)) / 2.0))
        res = commensurability(ups, q_max, eps_rat)
        if res.rational:
            return ChainType(ChainKind.FINITE_ELLIPTIC, kappa=res.kappa)
        return ChainType(ChainKind.INFINITE_ELLIPTIC, qmax_certified=q_max)
    return ChainType(ChainKind.GENERIC)


def unitary_with_block_spectrum(mu1: complex, mu2: complex) -> np.ndarray:
    """Build a 3x3 unitary whose leading 2x2 block has eigenvalues mu1, mu2.

    Works for any pair in the closed unit disc, which is what makes every
    chain kind realisable.  The block comes out upper triangular with mu1
    and mu2 on the diagonal.
    """
    m1, m2 = complex(mu1), complex(mu2)
    r1, r2 = abs(m1), abs(m2)
    if r1 > 1.0 + tol.EPS_NUM or r2 > 1.0 + tol.EPS_NUM:
        raise ValueError(f"block eigenvalues must lie in the closed unit disc: {m1}, {m2}")
    r1, r2 = min(r1, 1.0), min(r2, 1.0)
    c1 = math.sqrt(1.0 - r1 * r1)
    c2 = math.sqrt(1.0 - r2 * r2)
    # cmath.phase(0) = 0, which is the convention the formula needs.
    ph1 = cmath.phase(m1) if r1 > 0.0 else 0.0
    ph2 = cmath.phase(m2) if r2 > 0.0 else 0.0
    rel = cmath.exp(1j * (ph2 - ph1))
    v = np.array(
        [
            [r1, c1 * c2, -r2 * c1],
            [0.0, r2 * rel, c2 * rel],
            [c1, -r1 * c2, r1 * r2],
        ],
        dtype=complex,
    )
    return cmath.exp(1j * ph1) * v


@dataclass
class Edge:
    src: str
    dst: str
    prob: float | None  # None = no closed numeric value (trajectory step)
    possibly_absent: bool = False


@dataclass
class TransitionDiagram:
    states: list[str]
    edges: list[Edge]

    def outgoing(self, src: str) -> list[Edge]:
        return [e for e in self.edges if e.src == src]


def _p1(p: Pifs, state) -> float:
    return prob(p, 1, state)


def expected_diagram(ct: ChainType, sub: SubsystemMap) -> TransitionDiagram:
    """The analytic transition diagram for a chain of the given type.

    Concrete states (rho_z, rho_m, rho_v, the eigenstates, finite periodic
    orbits) get numeric edge probabilities evaluated on the actual system;
    infinite trajectory families stay symbolic with prob None.  Edges from
    the rho_v trajectory back to rho_z are flagged possibly_absent: they
    vanish at any step where the trajectory hits the probability-1 state,
    which no finite test decides.
    """
    p = sub.pifs
    w2 = abs(sub.omega) ** 2
    edges: list[Edge] = []

    if ct.kind is ChainKind.UNITARY:
        return TransitionDiagram(
            states=["rho_z", "rho_m"],
            edges=[Edge("rho_z", "rho_z", 1.0), Edge("rho_m", "rho_m", 1.0)],
        )

    l1sq = abs(sub.lambda1) ** 2
    l2sq = abs(sub.lambda2) ** 2
    p1_m = _p1(p, rho_m(p))

    if ct.kind in (ChainKind.GENERIC_NULL, ChainKind.TAUPEK_NULL, ChainKind.DOUBLE_NULL):
        states = ["rho_z", "rho_m", "rho_v", "rho_e1"]
        edges.append(Edge("rho_z", "rho_v", 1.0))
        edges.append(Edge("rho_m", "rho_e1", p1_m))
        edges.append(Edge("rho_m", "rho_z", 1.0 - p1_m))
        if ct.kind is ChainKind.DOUBLE_NULL:
            # p2(rho_v) = |lambda1|^2 = 0: the arrow to rho_z is not there.
            edges.append(Edge("rho_v", "rho_e1", 1.0))
            edges.append(Edge("rho_e1", "rho_z", 1.0))
        elif ct.kind is ChainKind.TAUPEK_NULL:
            edges.append(Edge("rho_v", "rho_z", l1sq))
            edges.append(Edge("rho_e1", "rho_e1", l1sq))
        else:
            edges.append(Edge("rho_v", "rho_e1", 1.0 - l1sq))
            edges.append(Edge("rho_v", "rho_z", l1sq))
            edges.append(Edge("rho_e1", "rho_e1", l1sq))
            edges.append(Edge("rho_e1", "rho_z", 1.0 - l1sq))
        return TransitionDiagram(states=states, edges=edges)

    edges.append(Edge("rho_z", "rho_z", w2))
    edges.append(Edge("rho_z", "rho_v", 1.0 - w2))

    if ct.kind is ChainKind.TAUPEK:
        states = ["rho_z", "rho_m", "F1^n(rho_m)", "rho_v"]
        edges.append(Edge("rho_m", "F1^n(rho_m)", p1_m))
        edges.append(Edge("rho_m", "rho_z", 1.0 - p1_m))
        edges.append(Edge("F1^n(rho_m)", "F1^n+1(rho_m)", None))
        edges.append(Edge("F1^n(rho_m)", "rho_z", None))
        edges.append(Edge("rho_v", "rho_v", l2sq))
        edges.append(Edge("rho_v", "rho_z", 1.0 - l2sq))
        return TransitionDiagram(states=states, edges=edges)

    if ct.kind is ChainKind.FINITE_ELLIPTIC:
        states = ["rho_z"]
        for seed, base in ((rho_m(p), "rho_m"), (rho_v(p), "rho_v")):
            traj = iterate_f1(sub, seed, n_max=4 * (ct.kappa or 2) + 8)
            period = traj.termination.kappa or len(traj.states)
            ids = [base if n == 0 else f"F1^{n}({base})" for n in range(period)]
            states.extend(ids)
            absent_ok = base == "rho_v"
            for n, state in enumerate(traj.states[:period]):
                p1 = _p1(p, state)
                edges.append(Edge(ids[n], ids[(n + 1) % period], p1))
                if 1.0 - p1 > tol.EPS_PROB:
                    edges.append(Edge(ids[n], "rho_z", 1.0 - p1, possibly_absent=absent_ok))
        return TransitionDiagram(states=states, edges=edges)

    # Generic and InfiniteElliptic share the two-infinite-trajectory shape.
    states = ["rho_z", "rho_m", "F1^n(rho_m)", "rho_v", "F1^n(rho_v)"]
    p1_v = _p1(p, rho_v(p))
    edges.append(Edge("rho_m", "F1^n(rho_m)", p1_m))
    edges.append(Edge("rho_m", "rho_z", 1.0 - p1_m))
    edges.append(Edge("F1^n(rho_m)", "F1^n+1(rho_m)", None))
    edges.append(Edge("F1^n(rho_m)", "rho_z", None))
    edges.append(Edge("rho_v", "F1^n(rho_v)", p1_v))
    if 1.0 - p1_v > tol.EPS_PROB:
        edges.append(Edge("rho_v", "rho_z", 1.0 - p1_v, possibly_absent=True))
    edges.append(Edge("F1^n(rho_v)", "F1^n+1(rho_v)", None))
    edges.append(Edge("F1^n(rho_v)", "rho_z", None, possibly_absent=True))
    return TransitionDiagram(states=states, edges=edges)
