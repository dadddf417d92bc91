"""Dense complex linear algebra for 3x3 unitaries and their 2x2 compressions.

Everything here is closed-form: a Cardano solve with Newton polish for the
unitary 3x3 eigenproblem, explicit quadratics for 2x2 eigenvalues and
singular values, and a fixed-sweep Jacobi iteration for Hermitian
eigenvalues.  No LAPACK calls, so results are deterministic across builds.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .errors import NotUnitary

TWO_PI = 2.0 * math.pi

_ZETA = cmath.exp(2j * math.pi / 3)  # primitive cube root of unity


def as_matrix3(u) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {u.shape}")
    return u


def unitarity_defect(u) -> float:
    """Max-norm of U U* - I."""
    u = as_matrix3(u)
    return float(np.max(np.abs(u @ u.conj().T - np.eye(3))))


def is_unitary(u, eps: float = tol.EPS_UNIT) -> bool:
    return unitarity_defect(u) <= eps


def check_unitary(u, eps: float = tol.EPS_UNIT) -> np.ndarray:
    u = as_matrix3(u)
    defect = unitarity_defect(u)
    if defect > eps:
        raise NotUnitary(
            f"matrix is not unitary: max |U U* - I| = {defect:.3e} > {eps:.1e}"
        )
    return u


def formal_cross(a, b) -> np.ndarray:
    """Bilinear (unconjugated) cross product of two complex 3-vectors.

    For rows r_i of a singular matrix B, formal_cross(r_i, r_j) lies in the
    null space of B, which is how eigenvectors are extracted below.
    """
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ],
        dtype=complex,
    )


def canonical_phase(v: np.ndarray) -> np.ndarray:
    """Rescale a unit vector so its largest-modulus entry is real positive.

    Ties go to the lowest index.  Gives eigenvectors a deterministic gauge.
    """
    k = int(np.argmax(np.abs(v)))
    pivot = v[k]
    if pivot == 0:
        return v
    return v * (pivot.conjugate() / abs(pivot))


@dataclass
class Spectrum3:
    """Eigendecomposition of a 3x3 unitary.

    phases: ascending eigenphases in [0, 2*pi).
    eigvecs: columns are the matching unit eigenvectors, canonical gauge.
    """

    phases: np.ndarray
    eigvecs: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.exp(1j * self.phases)


def _char_coeffs(u: np.ndarray) -> tuple[complex, complex, complex]:
    """Coefficients (c2, c1, c0) of det(lambda I - U) = l^3 - c2 l^2 + c1 l - c0."""
    c2 = u[0, 0] + u[1, 1] + u[2, 2]
    c1 = (
        u[0, 0] * u[1, 1]
        - u[0, 1] * u[1, 0]
        + u[0, 0] * u[2, 2]
        - u[0, 2] * u[2, 0]
        + u[1, 1] * u[2, 2]
        - u[1, 2] * u[2, 1]
    )
    c0 = (
        u[0, 0] * (u[1, 1] * u[2, 2] - u[1, 2] * u[2, 1])
        - u[0, 1] * (u[1, 0] * u[2, 2] - u[1, 2] * u[2, 0])
        + u[0, 2] * (u[1, 0] * u[2, 1] - u[1, 1] * u[2, 0])
    )
    return c2, c1, c0


def _cardano(c2: complex, c1: complex, c0: complex) -> list[complex]:
    """Roots of l^3 - c2 l^2 + c1 l - c0 via Vieta substitution."""
    a, b, c = -c2, c1, -c0
    p = b - a * a / 3.0
    q = 2.0 * a**3 / 27.0 - a * b / 3.0 + c
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    sq = cmath.sqrt(disc)
    w3 = -q / 2.0 + sq
    if abs(w3) < 1e-30:
        w3 = -q / 2.0 - sq
    if abs(w3) < 1e-30:
        # p and q both vanish: triple root.
        return [-a / 3.0] * 3
    w = cmath.exp(cmath.log(w3) / 3.0)
    roots = []
    for k in range(3):
        wk = w * _ZETA**k
        roots.append(wk - p / (3.0 * wk) - a / 3.0)
    return roots


# Multiple-root detection thresholds for the unit-circle cubic.  Repeated
# roots are ill-conditioned for any coefficient-based solver (scatter
# ~eps^(1/2) for double, ~eps^(1/3) for triple roots), so exact repeats are
# recognized on the coefficients themselves, where the test is O(eps).
_TRIPLE_TOL = 1e-13
_DOUBLE_DISC_TOL = 1e-13


def _unit_circle_roots(c2: complex, c1: complex, c0: complex) -> list[complex]:
    """Roots of the characteristic cubic of a unitary, projected to |l| = 1.

    Exact triple roots are taken from the centroid c2/3, exact double roots
    from the quadratic factor's trace (both come from Vieta sums, so they
    dodge the root-scatter of Cardano at a multiple root).  Distinct roots
    go through Cardano plus Newton polish at full accuracy.
    """
    p_dep = c1 - c2 * c2 / 3.0
    q_dep = -2.0 * c2**3 / 27.0 + c2 * c1 / 3.0 - c0
    if abs(p_dep) <= _TRIPLE_TOL and abs(q_dep) <= _TRIPLE_TOL:
        lam = c2 / 3.0
        return [lam / abs(lam)] * 3

    raw = [_newton_polish(lam, c2, c1, c0) for lam in _cardano(c2, c1, c0)]
    # Deflate on the most isolated root; for a double root the other two
    # scatter symmetrically, so the isolated one is the accurate simple root.
    def isolation(i: int) -> float:
        return min(abs(raw[i] - raw[j]) for j in range(3) if j != i)

    iso = max(range(3), key=isolation)
    lam_c = raw[iso] / abs(raw[iso])
    tr2 = c2 - lam_c
    det2 = c0 / lam_c
    disc = tr2 * tr2 - 4.0 * det2
    if abs(disc) <= _DOUBLE_DISC_TOL:
        mu = tr2 / 2.0
        mu = mu / abs(mu)
        pair = [mu, mu]
    else:
        pair = [lam / abs(lam) for lam in eig2_from_trace_det(tr2, det2)]
    return [lam_c, pair[0], pair[1]]


def _newton_polish(lam: complex, c2: complex, c1: complex, c0: complex) -> complex:
    for _ in range(2):
        f = ((lam - c2) * lam + c1) * lam - c0
        fp = (3.0 * lam - 2.0 * c2) * lam + c1
        if abs(fp) < 1e-30:
            break
        lam = lam - f / fp
    return lam


def _null_vector(b: np.ndarray) -> np.ndarray:
    """Unit null vector of a (numerically) rank-2 3x3 matrix.

    Takes the largest-norm formal cross product among the row pairs.
    """
    best = None
    best_norm = -1.0
    for i, j in ((0, 1), (0, 2), (1, 2)):
        cand = formal_cross(b[i], b[j])
        norm = float(np.linalg.norm(cand))
        if norm > best_norm:
            best, best_norm = cand, norm
    if best_norm <= 0.0:
        raise ArithmeticError("null space extraction failed: all cross products vanish")
    return canonical_phase(best / best_norm)


def _complement_pair(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal basis of the plane orthogonal to unit w.

    Starts from the two standard basis vectors with the smallest overlap
    with w (ties to the lower index), projects w out, Gram-Schmidts.
    """
    order = sorted(range(3), key=lambda k: (abs(w[k]), k))
    e_a = np.zeros(3, dtype=complex)
    e_a[order[0]] = 1.0
    e_b = np.zeros(3, dtype=complex)
    e_b[order[1]] = 1.0
    u1 = e_a - w * np.vdot(w, e_a)
    u1 = u1 / np.linalg.norm(u1)
    u2 = e_b - w * np.vdot(w, e_b) - u1 * np.vdot(u1, e_b)
    u2 = u2 / np.linalg.norm(u2)
    return canonical_phase(u1), canonical_phase(u2)


def eig_unitary3(u, eps_unit: float = tol.EPS_UNIT) -> Spectrum3:
    """Spectral decomposition of a 3x3 unitary.

    Eigenphases come from Cardano's formula on the characteristic cubic,
    polished with two Newton steps and projected radially onto the unit
    circle.  Eigenvectors are cross products of rows of U - lambda I; phase
    clusters within EPS_CLUSTER are treated as repeated eigenvalues and get
    an orthonormal eigenspace basis instead.
    """
    u = check_unitary(u, eps_unit)
    c2, c1, c0 = _char_coeffs(u)
    roots = _unit_circle_roots(c2, c1, c0)

    # Transitive clustering by chord distance on the unit circle.
    adj = [[abs(roots[i] - roots[j]) <= tol.EPS_CLUSTER for j in range(3)] for i in range(3)]
    cluster_of = [-1, -1, -1]
    clusters: list[list[int]] = []
    for i in range(3):
        if cluster_of[i] >= 0:
            continue
        group = [i]
        cluster_of[i] = len(clusters)
        stack = [i]
        while stack:
            a = stack.pop()
            for b in range(3):
                if cluster_of[b] < 0 and adj[a][b]:
                    cluster_of[b] = len(clusters)
                    group.append(b)
                    stack.append(b)
        clusters.append(sorted(group))

    vectors: list[np.ndarray | None] = [None, None, None]
    if len(clusters) == 3:
        for i, lam in enumerate(roots):
            vectors[i] = _null_vector(u - lam * np.eye(3))
    elif len(clusters) == 2:
        pair = next(g for g in clusters if len(g) == 2)
        single = next(g for g in clusters if len(g) == 1)[0]
        vectors[single] = _null_vector(u - roots[single] * np.eye(3))
        v1, v2 = _complement_pair(vectors[single])
        vectors[pair[0]], vectors[pair[1]] = v1, v2
    else:
        # U is (numerically) a phase times the identity.
        for i in range(3):
            e = np.zeros(3, dtype=complex)
            e[i] = 1.0
            vectors[i] = e

    def phase_of(lam: complex) -> float:
        ph = cmath.phase(lam) % TWO_PI
        return 0.0 if ph >= TWO_PI else ph

    entries = []
    for lam, vec in zip(roots, vectors):
        entries.append((phase_of(lam), vec))
    entries.sort(key=lambda t: (t[0], tuple(x for z in t[1] for x in (z.real, z.imag))))

    phases = np.array([e[0] for e in entries])
    eigvecs = np.column_stack([e[1] for e in entries])
    return Spectrum3(phases=phases, eigvecs=eigvecs)


def eig2(m) -> tuple[complex, complex]:
    """Eigenvalues of a 2x2 complex matrix.

    Ordered by descending modulus; exact modulus ties break by ascending
    argument taken in [0, 2*pi).  The smaller root comes from det/lambda to
    dodge cancellation.
    """
    m = np.asarray(m, dtype=complex)
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return eig2_from_trace_det(complex(tr), complex(det))


def eig2_from_trace_det(tr: complex, det: complex) -> tuple[complex, complex]:
    """Roots of l^2 - tr*l + det, same ordering contract as :func:`eig2`.

    A discriminant below 1e-13 (relative to the coefficient scale) is
    treated as an exact double root; the sqrt would otherwise inflate the
    rounding noise into an O(1e-8) spurious split.
    """
    disc = tr * tr - 4.0 * det
    scale = max(1.0, abs(tr) ** 2, abs(det))
    if abs(disc) <= 1e-13 * scale:
        half = tr / 2.0
        return half, half
    sq = cmath.sqrt(disc)
    big = (tr + sq) / 2.0 if abs(tr + sq) >= abs(tr - sq) else (tr - sq) / 2.0
    if big == 0:
        return 0j, 0j
    small = det / big
    a, b = big, small
    if _eig2_key(a) <= _eig2_key(b):
        return a, b
    return b, a


def _eig2_key(z: complex) -> tuple[float, float]:
    return (-abs(z), cmath.phase(z) % TWO_PI)


def singular_values2(m) -> tuple[float, float]:
    """Singular values of a 2x2 complex matrix, descending.

    Closed form from tr(M*M) and |det M|; the smaller one comes from the
    product to keep precision when the matrix is nearly singular.
    """
    m = np.asarray(m, dtype=complex)
    t = float(np.sum(np.abs(m) ** 2))
    d = abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]) ** 2
    disc = max(t * t - 4.0 * d, 0.0)
    e1 = (t + math.sqrt(disc)) / 2.0
    e2 = d / e1 if e1 > 0.0 else 0.0
    return math.sqrt(e1), math.sqrt(e2)


def hermitian_eigvals3(a, sweeps: int = 20) -> np.ndarray:
    """Ascending eigenvalues of a 3x3 Hermitian matrix.

    Cyclic complex Jacobi rotations with a fixed sweep budget: tiny constant
    cost, deterministic, and plenty for the positivity checks this backs.
    """
    a = np.array(a, dtype=complex)
    for _ in range(sweeps):
        if abs(a[0, 1]) + abs(a[0, 2]) + abs(a[1, 2]) == 0.0:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[p, q]
            if abs(apq) == 0.0:
                continue
            phase = apq / abs(apq)
            b = abs(apq)
            tau = (a[q, q].real - a[p, p].real) / (2.0 * b)
            t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(tau, 1.0))
            c = 1.0 / math.hypot(t, 1.0)
            s = t * c
            rot = np.eye(3, dtype=complex)
            rot[q, q] = phase.conjugate()
            jac = np.eye(3, dtype=complex)
            jac[p, p] = c
            jac[q, q] = c
            jac[p, q] = s
            jac[q, p] = -s
            v = rot @ jac
            a = v.conj().T @ a @ v
    return np.sort(np.diag(a).real)
