"""Numerical-range geometry for a 3x3 unitary.

W(U) is the filled triangle spanned by the three unit-modulus eigenvalues.
This module owns everything that happens in that plane: triangle shape
classification, barycentric coordinates, recovering a measurement vector
from a target omega, the commuting conjugator between equal-omega vectors,
the plane cubic carrying the elliptic locus, and the rasterized type atlas.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from ._kernels import classify_cells
from .errors import DegenerateRange, DegenerateSpectrum, OmegaMismatch, OutsideRange
from .linalg import Spectrum3, canonical_phase, eig_unitary3


def _det3(u: np.ndarray) -> complex:
    a, b, c = u[0]
    d, e, f = u[1]
    g, h, i = u[2]
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


class RangeKind(enum.Enum):
    POINT = "point"
    CHORD = "chord"
    DIAMETER = "diameter"
    ACUTE = "acute"
    EQUILATERAL = "equilateral"
    RIGHT_ANGLED = "right-angled"
    OBTUSE = "obtuse"


DEGENERATE_KINDS = (RangeKind.POINT, RangeKind.CHORD, RangeKind.DIAMETER)


@dataclass(frozen=True)
class NumericalRange:
    vertices: tuple[complex, complex, complex]
    kind: RangeKind


def _distinct_vertices(v: tuple[complex, complex, complex]) -> list[int]:
    """Indices of pairwise-distinct vertices (first representative each)."""
    reps: list[int] = []
    for i, vi in enumerate(v):
        if all(abs(vi - v[j]) > tol.EPS_CLUSTER for j in reps):
            reps.append(i)
    return reps


def range_from_spectrum(spectrum: Spectrum3, trace: complex) -> NumericalRange:
    """Triangle kind from the eigenvalue layout.

    The shape tests ride on the orthocentre law for triangles inscribed in
    the unit circle: the orthocentre sits at v1+v2+v3 = tr U, so |tr U| = 0
    means equilateral, |tr U| = 1 right-angled, below/above acute/obtuse.
    """
    v = tuple(spectrum.eigenvalues)
    reps = _distinct_vertices(v)
    if len(reps) == 1:
        return NumericalRange(v, RangeKind.POINT)
    if len(reps) == 2:
        va, vb = v[reps[0]], v[reps[1]]
        kind = RangeKind.DIAMETER if abs(va + vb) <= tol.EPS_GEO else RangeKind.CHORD
        return NumericalRange(v, kind)
    h = abs(trace)
    if h <= tol.EPS_GEO:
        return NumericalRange(v, RangeKind.EQUILATERAL)
    if abs(h - 1.0) <= tol.EPS_GEO:
        return NumericalRange(v, RangeKind.RIGHT_ANGLED)
    if h > 1.0:
        return NumericalRange(v, RangeKind.OBTUSE)
    return NumericalRange(v, RangeKind.ACUTE)


def numerical_range(u) -> NumericalRange:
    u = np.asarray(u, dtype=complex)
    return range_from_spectrum(eig_unitary3(u), complex(np.trace(u)))


@dataclass(frozen=True)
class Barycentric:
    a1: float
    a2: float
    a3: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a1, self.a2, self.a3)

    @property
    def minimum(self) -> float:
        return min(self.a1, self.a2, self.a3)

    @property
    def inside(self) -> bool:
        return self.minimum >= -tol.EPS_GEO


def _inv3_real(m: np.ndarray) -> np.ndarray:
    """Inverse of a real 3x3 matrix via the adjugate."""
    det = (
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )
    if abs(det) <= 1e-300:
        raise DegenerateRange("triangle has (numerically) zero area")
    adj = np.empty((3, 3))
    for r in range(3):
        for c in range(3):
            sub = [m[x, y] for x in range(3) if x != c for y in range(3) if y != r]
            minor = sub[0] * sub[3] - sub[1] * sub[2]
            adj[r, c] = ((-1) ** (r + c)) * minor
    return adj / det


def barycentric_matrix(nr: NumericalRange) -> np.ndarray:
    """Inverse coordinate matrix: bary = M^-1 @ (Re w, Im w, 1)."""
    if nr.kind in DEGENERATE_KINDS:
        raise DegenerateRange(f"W(U) is a {nr.kind.value}; use the segment path")
    v = nr.vertices
    m = np.array(
        [
            [v[0].real, v[1].real, v[2].real],
            [v[0].imag, v[1].imag, v[2].imag],
            [1.0, 1.0, 1.0],
        ]
    )
    return _inv3_real(m)


def barycentric(nr: NumericalRange, omega: complex) -> Barycentric:
    """Normalised barycentric coordinates of omega in the vertex triangle."""
    binv = barycentric_matrix(nr)
    omega = complex(omega)
    b = binv @ np.array([omega.real, omega.imag, 1.0])
    return Barycentric(float(b[0]), float(b[1]), float(b[2]))


def segment_coordinate(nr: NumericalRange, omega: complex) -> tuple[float, int, int]:
    """Position of omega on a degenerate (point/chord) numerical range.

    Returns (t, ia, ib) with omega = t*v[ia] + (1-t)*v[ib].  For a point
    range ia = ib = 0 and t = 0.
    """
    if nr.kind not in DEGENERATE_KINDS:
        raise ValueError("segment_coordinate is only for degenerate ranges")
    omega = complex(omega)
    v = nr.vertices
    reps = _distinct_vertices(v)
    if len(reps) == 1:
        if abs(omega - v[0]) <= tol.EPS_GEO:
            return 0.0, 0, 0
        raise OutsideRange(f"omega {omega} differs from the point range {v[0]}")
    ia, ib = reps[0], reps[1]
    va, vb = v[ia], v[ib]
    d = va - vb
    t = ((omega - vb) * d.conjugate()).real / abs(d) ** 2
    residual = abs(omega - (t * va + (1.0 - t) * vb))
    if residual > tol.EPS_GEO or t < -tol.EPS_GEO or t > 1.0 + tol.EPS_GEO:
        raise OutsideRange(
            f"omega {omega} is off the segment: t = {t:.6f}, residual = {residual:.3e}"
        )
    return float(min(max(t, 0.0), 1.0)), ia, ib


def z_from_omega(u, omega: complex) -> np.ndarray:
    """A unit vector z with <z|Uz> = omega, built from eigenvector weights.

    The weights are the barycentric coordinates of omega, so the expectation
    lands on omega by linearity.  Any valid z works for classification; this
    one is the deterministic representative.
    """
    u = np.asarray(u, dtype=complex)
    spectrum = eig_unitary3(u)
    nr = range_from_spectrum(spectrum, complex(np.trace(u)))
    alphas = np.zeros(3)
    if nr.kind in DEGENERATE_KINDS:
        t, ia, ib = segment_coordinate(nr, omega)
        alphas[ia] += t
        alphas[ib] += 1.0 - t
    else:
        b = barycentric(nr, omega)
        if b.minimum < -tol.EPS_GEO:
            raise OutsideRange(f"omega {omega:.6f} lies outside W(U)")
        alphas = np.maximum(np.array(b.as_tuple()), 0.0)
        alphas /= alphas.sum()
    z = spectrum.eigvecs @ np.sqrt(alphas).astype(complex)
    return canonical_phase(z / np.linalg.norm(z))


def conjugator(u, z, ztilde) -> np.ndarray:
    """Unitary V with UV = VU and Vz = ztilde, for equal omega.

    Built as a phase adjustment per eigencomponent, which is exactly the
    freedom available when U has three distinct eigenvalues.
    """
    u = np.asarray(u, dtype=complex)
    z = np.asarray(z, dtype=complex)
    zt = np.asarray(ztilde, dtype=complex)
    z = z / np.linalg.norm(z)
    zt = zt / np.linalg.norm(zt)

    spectrum = eig_unitary3(u)
    ev = spectrum.eigenvalues
    gap = min(abs(ev[0] - ev[1]), abs(ev[0] - ev[2]), abs(ev[1] - ev[2]))
    if gap <= tol.EPS_CLUSTER:
        raise DegenerateSpectrum(
            f"conjugator needs three distinct eigenvalues (min gap {gap:.3e})"
        )

    om = complex(np.vdot(z, u @ z))
    omt = complex(np.vdot(zt, u @ zt))
    if abs(om - omt) > tol.EPS_NUM:
        raise OmegaMismatch(f"<z|Uz> = {om} but <z~|Uz~> = {omt}")

    w = spectrum.eigvecs
    c = w.conj().T @ z
    ct = w.conj().T @ zt
    phases = np.ones(3, dtype=complex)
    for j in range(3):
        lo, hi = sorted((abs(c[j]), abs(ct[j])))
        if hi <= 10 * tol.EPS_NUM:
            continue  # component absent on both sides, phase stays 1
        if lo <= 10 * tol.EPS_NUM < hi:
            raise OmegaMismatch(
                f"eigencomponent {j} magnitudes differ: |c| = {abs(c[j]):.3e}, "
                f"|c~| = {abs(ct[j]):.3e}"
            )
        ph = ct[j] / c[j]
        phases[j] = ph / abs(ph)
    return w @ np.diag(phases) @ w.conj().T


@dataclass(frozen=True)
class CubicCurve:
    """Coefficients of the plane cubic in the det-normalised frame.

    rot is the phase that maps the original plane into that frame; alpha
    and beta are the real and imaginary parts of the rotated trace.
    """

    alpha: float
    beta: float
    rot: complex


def cubic_curve(u) -> CubicCurve:
    u = np.asarray(u, dtype=complex)
    d = _det3(u)
    rot = cmath.exp(-1j * cmath.phase(d) / 3.0)
    trp = rot * complex(np.trace(u))
    return CubicCurve(alpha=trp.real, beta=trp.imag, rot=rot)


def musselman_eval(c: CubicCurve, x: float, y: float) -> float:
    """Evaluate the cubic at (x, y).

    Horner-ordered in y:  ((-y + 2b)*y + (3x^2 - 4ax + a^2 - b^2))*y
    plus the y-free remainder 2bx(a - x), with a = alpha, b = beta.
    """
    a, b = c.alpha, c.beta
    return ((-y + 2.0 * b) * y + (3.0 * x * x - 4.0 * a * x + a * a - b * b)) * y + 2.0 * b * x * (a - x)


ATLAS_LEGEND = {
    0: "Unitary",
    1: "GenericNull",
    2: "TaupekNull",
    3: "DoubleNull",
    4: "Taupek",
    5: "FiniteElliptic",
    6: "InfiniteElliptic",
    7: "Generic",
}

ATLAS_COLORS = {
    0: "#000000",
    1: "#1f77b4",
    2: "#2ca02c",
    3: "#17becf",
    4: "#d62728",
    5: "#ff7f0e",
    6: "#9467bd",
    7: "#c7c7c7",
}


@dataclass(frozen=True)
class AtlasCell:
    x: float
    y: float
    code: int
    kappa: int | None


@dataclass
class RangeAtlas:
    resolution: int
    cell_size: float
    origin: tuple[float, float]
    nx: int
    ny: int
    vertices: tuple[complex, complex, complex]
    cells: list[AtlasCell]
    legend: dict[int, str]

    def counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for cell in self.cells:
            out[cell.code] = out.get(cell.code, 0) + 1
        return out


def render_atlas(u, resolution: int) -> RangeAtlas:
    """Classify the cell grid over the bounding box of W(U).

    Cells are square, half-open boxes (the far row/column closes the box);
    a cell whose center falls outside the triangle is omitted.  Cells are
    coded by what lies within half a cell of their center, in fixed
    precedence: a vertex, the origin (null types), tr U (circular), a
    triangle edge (Taupek), the elliptic locus, else Generic.  This makes
    measure-zero features (vertices, the axis, the locus) visible at finite
    resolution without smearing them wider than one cell.
    """
    if not 16 <= resolution <= 8192:
        raise ValueError(f"resolution {resolution} outside [16, 8192]")
    u = np.asarray(u, dtype=complex)
    trace = complex(np.trace(u))
    nr = numerical_range(u)
    if nr.kind in DEGENERATE_KINDS:
        raise DegenerateRange(f"atlas needs a non-degenerate W(U), got {nr.kind.value}")

    v = nr.vertices
    xs = [w.real for w in v]
    ys = [w.imag for w in v]
    xmin, xmax = min(xs), max(xs)
    ymin, ymax = min(ys), max(ys)
    width, height = xmax - xmin, ymax - ymin
    s = max(width, height) / resolution
    nx = max(1, int(math.ceil(width / s - 1e-9)))
    ny = max(1, int(math.ceil(height / s - 1e-9)))

    binv = barycentric_matrix(nr)
    null_code = {
        RangeKind.EQUILATERAL: 3,
        RangeKind.RIGHT_ANGLED: 2,
        RangeKind.ACUTE: 1,
    }.get(nr.kind, -1)
    tru_inside = nr.kind in (RangeKind.ACUTE, RangeKind.EQUILATERAL)

    codes, kappas = classify_cells(
        xmin,
        ymin,
        s,
        nx,
        ny,
        np.ascontiguousarray(binv),
        np.array(v, dtype=complex),
        trace,
        _det3(u),
        null_code,
        tru_inside,
        tol.EPS_GEO,
        tol.eps_class(),
        tol.Q_MAX,
        tol.EPS_RAT,
    )

    cells: list[AtlasCell] = []
    for j in range(ny):
        cy = ymin + (j + 0.5) * s
        for i in range(nx):
            code = int(codes[j * nx + i])
            if code < 0:
                continue
            kappa = int(kappas[j * nx + i])
            cells.append(
                AtlasCell(
                    x=xmin + (i + 0.5) * s,
                    y=cy,
                    code=code,
                    kappa=kappa if code == 5 else None,
                )
            )
    return RangeAtlas(
        resolution=resolution,
        cell_size=s,
        origin=(xmin, ymin),
        nx=nx,
        ny=ny,
        vertices=v,
        cells=cells,
        legend=dict(ATLAS_LEGEND),
    )


def write_atlas_csv(atlas: RangeAtlas, path) -> None:
    """CSV rows `x,y,type,kappa`, 9-decimal coordinates, LF line endings."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("x,y,type,kappa\n")
        for cell in atlas.cells:
            kap = str(cell.kappa) if cell.code == 5 and cell.kappa else ""
            fh.write(f"{cell.x:.9f},{cell.y:.9f},{cell.code},{kap}\n")


def read_atlas_csv(path) -> list[AtlasCell]:
    """Parse a CSV written by write_atlas_csv (round-trip support)."""
    cells: list[AtlasCell] = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != "x,y,type,kappa":
            raise ValueError(f"unexpected atlas header: {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            xs, ys, ts, ks = line.split(",")
            cells.append(
                AtlasCell(x=float(xs), y=float(ys), code=int(ts), kappa=int(ks) if ks else None)
            )
    return cells


def write_atlas_svg(atlas: RangeAtlas, path) -> None:
    """One filled circle per cell over the unit circle and triangle edges."""
    r = atlas.cell_size / 2.0
    v = atlas.vertices
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1.15 -1.15 2.3 2.3" '
        'width="720" height="720">',
        '<g transform="scale(1,-1)">',
        '<circle cx="0" cy="0" r="1" fill="none" stroke="#888888" stroke-width="0.004"/>',
    ]
    for a, b in ((0, 1), (1, 2), (2, 0)):
        lines.append(
            f'<line x1="{v[a].real:.6f}" y1="{v[a].imag:.6f}" '
            f'x2="{v[b].real:.6f}" y2="{v[b].imag:.6f}" '
            'stroke="#444444" stroke-width="0.004"/>'
        )
    for cell in atlas.cells:
        color = ATLAS_COLORS.get(cell.code, "#ff00ff")
        lines.append(
            f'<circle cx="{cell.x:.6f}" cy="{cell.y:.6f}" r="{r:.6f}" fill="{color}"/>'
        )
    lines.append("</g>")
    lines.append("</svg>")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
