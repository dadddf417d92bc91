"""Pure numpy implementations of the hot kernels.

Self-contained on purpose: no imports from the rest of the package, so the
layering stays one-way (library modules import kernels, never back).  The
commensurability scan is reimplemented here in miniature; the differential
tests pin it against the classifier's version.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = 2.0 ** -53


def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * _MIX1 & _MASK
    z = (z ^ (z >> 27)) * _MIX2 & _MASK
    return z ^ (z >> 31)


def sm64_uniform(seed: int, k: int) -> float:
    """k-th uniform draw of the stream: splitmix64 in counter mode."""
    state = (seed + (k + 1) * _GAMMA) & _MASK
    return (_mix64(state) >> 11) * _INV53


def sm64_uniforms(seed: int, n: int) -> np.ndarray:
    """Vectorized draws 0..n-1 of the same stream."""
    with np.errstate(over="ignore"):
        ks = np.arange(1, n + 1, dtype=np.uint64)
        state = np.uint64(seed & _MASK) + ks * np.uint64(_GAMMA)
        z = (state ^ (state >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


def _rational_kappa(x: float, q_max: int, eps_rat: float) -> int:
    """kappa when x = upsilon/pi is rational with denominator <= q_max, else 0."""
    h_prev2, k_prev2, h_prev, k_prev = 0, 1, 1, 0
    a = x
    for _ in range(40):
        ai = int(math.floor(a))
        h = ai * h_prev + h_prev2
        k = ai * k_prev + k_prev2
        if k > q_max:
            return 0
        if abs(x - h / k) <= eps_rat:
            if h == 0:
                return 0
            return k if h % 2 == 0 else 2 * k
        frac = a - ai
        if frac < 1e-16:
            return 0
        a = 1.0 / frac
        h_prev2, k_prev2, h_prev, k_prev = h_prev, k_prev, h, k
    return 0


def _point_cell(px: float, origin: float, s: float, n: int) -> int:
    """Index of the half-open cell containing coordinate px, or -1."""
    t = (px - origin) / s
    if t < -1e-9 or t > n + 1e-9:
        return -1
    return min(max(int(math.floor(t)), 0), n - 1)


def classify_cells(
    xmin: float,
    ymin: float,
    s: float,
    nx: int,
    ny: int,
    binv: np.ndarray,
    verts: np.ndarray,
    tr_u: complex,
    det_u: complex,
    null_code: int,
    tru_inside: bool,
    eps_geo: float,
    eps_class: float,
    q_max: int,
    eps_rat: float,
):
    """Type codes for the atlas grid; -1 marks omitted cells.

    Precedence (last assignment wins): generic 7, elliptic 6/5, boundary 4,
    circular 5 at tr U, null at the origin, unitary 0 at vertices.
    """
    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny))
    cx = (xmin + (ii + 0.5) * s).ravel()
    cy = (ymin + (jj + 0.5) * s).ravel()
    x0 = (xmin + ii * s).ravel()
    y0 = (ymin + jj * s).ravel()

    def bary_min(px, py):
        return np.minimum(
            binv[0, 0] * px + binv[0, 1] * py + binv[0, 2],
            np.minimum(
                binv[1, 0] * px + binv[1, 1] * py + binv[1, 2],
                binv[2, 0] * px + binv[2, 1] * py + binv[2, 2],
            ),
        )

    inside = bary_min(cx, cy) >= -eps_geo
    codes = np.where(inside, np.int8(7), np.int8(-1))
    kappas = np.zeros(cx.shape, dtype=np.int32)

    corner_min = np.minimum(
        np.minimum(bary_min(x0, y0), bary_min(x0 + s, y0)),
        np.minimum(bary_min(x0, y0 + s), bary_min(x0 + s, y0 + s)),
    )
    straddles = corner_min < -eps_geo

    # The cubic is Im f for the holomorphic f(z) = (trU - z)^2 z conj(detU),
    # so |grad Im f| = |f'| and |Im f| / |f'| is a first-order distance to
    # the locus.  A cell is near the curve when its center is within half a
    # cell of it; both sides zero (a singular point of the cubic on the
    # locus) counts as near.
    zc = cx + 1j * cy
    val = ((tr_u - zc) ** 2) * zc * np.conj(det_u)
    fprime = (tr_u - zc) * (tr_u - 3.0 * zc) * np.conj(det_u)
    near_curve = np.abs(val.imag) <= np.abs(fprime) * (s / 2.0)

    num = (tr_u - zc) ** 2
    den = np.conj(zc) * det_u
    d2 = den.real * den.real + den.imag * den.imag
    safe = d2 > 0.0
    re_ratio = np.where(safe, (num * np.conj(den)).real / np.where(safe, d2, 1.0), np.inf)

    elliptic = (
        inside
        & ~straddles
        & near_curve
        & (re_ratio >= -eps_class)
        & (re_ratio < 4.0 - eps_class)
    )
    codes[elliptic] = 6
    for idx in np.nonzero(elliptic)[0]:
        ratio = min(re_ratio[idx], 4.0)
        ups = 2.0 * math.acos(min(1.0, math.sqrt(max(ratio, 0.0)) / 2.0))
        if ups <= 0.0:
            continue
        kap = _rational_kappa(min(ups / math.pi, 1.0), q_max, eps_rat)
        if kap >= 2:
            codes[idx] = 5
            kappas[idx] = kap

    codes[inside & straddles] = 4
    kappas[inside & straddles] = 0

    def paint_point(px: float, py: float, code: int, kappa: int) -> None:
        # The painted features (vertices, 0, tr U) lie on or in the triangle,
        # so their box is kept even when its center falls outside.
        i = _point_cell(px, xmin, s, nx)
        j = _point_cell(py, ymin, s, ny)
        if i < 0 or j < 0:
            return
        idx = j * nx + i
        codes[idx] = code
        kappas[idx] = kappa

    if tru_inside:
        paint_point(tr_u.real, tr_u.imag, 5, 2)
    if null_code > 0:
        paint_point(0.0, 0.0, null_code, 0)
    for v in verts:
        paint_point(float(v.real), float(v.imag), 0, 0)

    # Only circular cells carry a kappa.
    kappas[codes != 5] = 0
    return codes, kappas


def simulate_chain(
    u: np.ndarray,
    z: np.ndarray,
    family: np.ndarray,
    seed: int,
    steps: int,
    match_tol: float,
    eps_prob: float,
):
    """Seeded trajectory from the maximally mixed state with state matching.

    Returns (outcomes, matched, final_state): outcome per step in {1,2},
    matched family index per step (-1 for none or an ambiguous tie), and the
    state after the last step.
    """
    u = np.asarray(u, dtype=complex)
    z = np.asarray(z, dtype=complex)
    udag = u.conj().T
    proj_z = np.outer(z, z.conj())
    pi1 = np.eye(3, dtype=complex) - proj_z

    m = family.shape[0]
    outcomes = np.empty(steps, dtype=np.uint8)
    matched = np.empty(steps, dtype=np.int32)
    draws = sm64_uniforms(seed, steps)

    rho = np.eye(3, dtype=complex) / 3.0
    for k in range(steps):
        sigma = u @ rho @ udag
        p2 = float(np.real(z.conj() @ sigma @ z))
        p1 = min(max(1.0 - p2, 0.0), 1.0)
        if p1 <= eps_prob:
            out = 2
        elif p1 >= 1.0 - eps_prob:
            out = 1
        else:
            out = 1 if draws[k] < p1 else 2
        if out == 2:
            rho = proj_z.copy()
        else:
            tau = pi1 @ sigma @ pi1
            pr = float(np.real(np.trace(tau)))
            tau = (tau + tau.conj().T) / 2.0
            rho = tau / pr
        outcomes[k] = out
        if m:
            d = np.max(np.abs(family - rho), axis=(1, 2))
            hits = np.nonzero(d <= match_tol)[0]
            matched[k] = int(hits[0]) if hits.size == 1 else -1
        else:
            matched[k] = -1
    return outcomes, matched, rho
