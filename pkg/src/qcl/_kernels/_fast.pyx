# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the fallback kernels.

Same observable behaviour as ``_fallback`` (the differential tests pin the
two against each other); only the inner loops move to C.  Keep the two files
in sync when touching either.
"""

from libc.math cimport acos, fabs, floor, sqrt

import numpy as np

cdef double _PI = 3.141592653589793238462643383279502884
cdef double _INV53 = 1.0 / 9007199254740992.0
cdef unsigned long long _GAMMA = 0x9E3779B97F4A7C15
cdef unsigned long long _MIX1 = 0xBF58476D1CE4E5B9
cdef unsigned long long _MIX2 = 0x94D049BB133111EB


cdef inline unsigned long long _mix64(unsigned long long z) noexcept nogil:
    z = (z ^ (z >> 30)) * _MIX1
    z = (z ^ (z >> 27)) * _MIX2
    return z ^ (z >> 31)


cdef inline double _u01(unsigned long long seed, unsigned long long k) noexcept nogil:
    return <double> (_mix64(seed + (k + 1) * _GAMMA) >> 11) * _INV53


def sm64_uniform(seed, k):
    """k-th uniform draw of the stream: splitmix64 in counter mode."""
    return _u01(<unsigned long long> (seed & 0xFFFFFFFFFFFFFFFF), <unsigned long long> k)


def sm64_uniforms(seed, n):
    """Vectorized draws 0..n-1 of the same stream."""
    cdef Py_ssize_t i, m = n
    cdef unsigned long long s = <unsigned long long> (seed & 0xFFFFFFFFFFFFFFFF)
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] view = out
    for i in range(m):
        view[i] = _u01(s, <unsigned long long> i)
    return out


cdef int _rational_kappa_c(double x, long q_max, double eps_rat) noexcept nogil:
    cdef long h_prev2 = 0, k_prev2 = 1, h_prev = 1, k_prev = 0
    cdef long h, k, ai
    cdef double a = x, frac
    cdef int it
    for it in range(40):
        ai = <long> floor(a)
        h = ai * h_prev + h_prev2
        k = ai * k_prev + k_prev2
        if k > q_max:
            return 0
        if fabs(x - (<double> h) / (<double> k)) <= eps_rat:
            if h == 0:
                return 0
            return <int> (k if h % 2 == 0 else 2 * k)
        frac = a - <double> ai
        if frac < 1e-16:
            return 0
        a = 1.0 / frac
        h_prev2 = h_prev
        k_prev2 = k_prev
        h_prev = h
        k_prev = k
    return 0


cdef inline Py_ssize_t _point_cell_c(double px, double origin, double s, Py_ssize_t n) noexcept nogil:
    cdef double t = (px - origin) / s
    cdef Py_ssize_t i
    if t < -1e-9 or t > (<double> n) + 1e-9:
        return -1
    i = <Py_ssize_t> floor(t)
    if i < 0:
        i = 0
    if i > n - 1:
        i = n - 1
    return i


cdef inline double _bary_min(const double[:, ::1] binv, double px, double py) noexcept nogil:
    cdef double b0 = binv[0, 0] * px + binv[0, 1] * py + binv[0, 2]
    cdef double b1 = binv[1, 0] * px + binv[1, 1] * py + binv[1, 2]
    cdef double b2 = binv[2, 0] * px + binv[2, 1] * py + binv[2, 2]
    cdef double m = b0
    if b1 < m:
        m = b1
    if b2 < m:
        m = b2
    return m


cdef inline double _cabs(double complex z) noexcept nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


def classify_cells(double xmin, double ymin, double s,
                   Py_ssize_t nx, Py_ssize_t ny,
                   const double[:, ::1] binv, const double complex[::1] verts,
                   double complex tr_u, double complex det_u,
                   int null_code, bint tru_inside,
                   double eps_geo, double eps_class, long q_max, double eps_rat):
    """Type codes for the atlas grid; -1 marks omitted cells.

    Precedence (last assignment wins): generic 7, elliptic 6/5, boundary 4,
    circular 5 at tr U, null at the origin, unitary 0 at vertices.
    """
    codes_arr = np.empty(nx * ny, dtype=np.int8)
    kappas_arr = np.zeros(nx * ny, dtype=np.int32)
    cdef signed char[::1] codes = codes_arr
    cdef int[::1] kappas = kappas_arr

    cdef Py_ssize_t i, j, idx, vi, pi, pj
    cdef double cx, cy, x0, y0, g0
    cdef double corner_min, d2, re_ratio, ratio, ups
    cdef double complex zc, w, val, fprime, num, den, prod
    cdef bint inside, straddles, near_curve
    cdef int kap

    with nogil:
        for j in range(ny):
            y0 = ymin + j * s
            cy = ymin + (j + 0.5) * s
            for i in range(nx):
                idx = j * nx + i
                x0 = xmin + i * s
                cx = xmin + (i + 0.5) * s

                inside = _bary_min(binv, cx, cy) >= -eps_geo
                if not inside:
                    codes[idx] = -1
                    continue
                codes[idx] = 7

                corner_min = _bary_min(binv, x0, y0)
                g0 = _bary_min(binv, x0 + s, y0)
                if g0 < corner_min:
                    corner_min = g0
                g0 = _bary_min(binv, x0, y0 + s)
                if g0 < corner_min:
                    corner_min = g0
                g0 = _bary_min(binv, x0 + s, y0 + s)
                if g0 < corner_min:
                    corner_min = g0
                straddles = corner_min < -eps_geo
                if straddles:
                    codes[idx] = 4
                    continue

                # First-order distance to the cubic locus: the cubic is
                # Im f for holomorphic f(z) = (trU - z)^2 z conj(detU), so
                # |grad Im f| = |f'|.  Near means within half a cell.
                zc = cx + 1j * cy
                w = tr_u - zc
                val = w * w * zc * det_u.conjugate()
                fprime = w * (tr_u - 3.0 * zc) * det_u.conjugate()
                near_curve = fabs(val.imag) <= _cabs(fprime) * (s / 2.0)
                if not near_curve:
                    continue

                num = w * w
                den = zc.conjugate() * det_u
                d2 = den.real * den.real + den.imag * den.imag
                if d2 <= 0.0:
                    continue
                prod = num * den.conjugate()
                re_ratio = prod.real / d2
                if re_ratio >= -eps_class and re_ratio < 4.0 - eps_class:
                    codes[idx] = 6
                    ratio = re_ratio
                    if ratio > 4.0:
                        ratio = 4.0
                    if ratio < 0.0:
                        ratio = 0.0
                    ups = sqrt(ratio) / 2.0
                    if ups > 1.0:
                        ups = 1.0
                    ups = 2.0 * acos(ups)
                    if ups <= 0.0:
                        continue
                    ratio = ups / _PI
                    if ratio > 1.0:
                        ratio = 1.0
                    kap = _rational_kappa_c(ratio, q_max, eps_rat)
                    if kap >= 2:
                        codes[idx] = 5
                        kappas[idx] = kap

        if tru_inside:
            pi = _point_cell_c(tr_u.real, xmin, s, nx)
            pj = _point_cell_c(tr_u.imag, ymin, s, ny)
            if pi >= 0 and pj >= 0:
                codes[pj * nx + pi] = 5
                kappas[pj * nx + pi] = 2
        if null_code > 0:
            pi = _point_cell_c(0.0, xmin, s, nx)
            pj = _point_cell_c(0.0, ymin, s, ny)
            if pi >= 0 and pj >= 0:
                codes[pj * nx + pi] = <signed char> null_code
                kappas[pj * nx + pi] = 0
        for vi in range(verts.shape[0]):
            pi = _point_cell_c(verts[vi].real, xmin, s, nx)
            pj = _point_cell_c(verts[vi].imag, ymin, s, ny)
            if pi >= 0 and pj >= 0:
                codes[pj * nx + pi] = 0
                kappas[pj * nx + pi] = 0

        for idx in range(nx * ny):
            if codes[idx] != 5:
                kappas[idx] = 0

    return codes_arr, kappas_arr


def simulate_chain(u, z, family, seed, Py_ssize_t steps, double match_tol, double eps_prob):
    """Seeded trajectory from the maximally mixed state with state matching.

    Returns (outcomes, matched, final_state): outcome per step in {1,2},
    matched family index per step (-1 for none or an ambiguous tie), and the
    state after the last step.
    """
    u_arr = np.ascontiguousarray(np.asarray(u, dtype=complex))
    z_arr = np.ascontiguousarray(np.asarray(z, dtype=complex))
    fam_arr = np.ascontiguousarray(np.asarray(family, dtype=complex))
    outcomes_arr = np.empty(steps, dtype=np.uint8)
    matched_arr = np.empty(steps, dtype=np.int32)
    rho_arr = np.eye(3, dtype=complex) / 3.0

    cdef const double complex[:, ::1] um = u_arr
    cdef const double complex[::1] zm = z_arr
    cdef const double complex[:, :, ::1] fam = fam_arr
    cdef unsigned char[::1] outcomes = outcomes_arr
    cdef int[::1] matched = matched_arr
    cdef double complex[:, ::1] rho = rho_arr

    cdef unsigned long long sd = <unsigned long long> (seed & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t m = fam.shape[0]
    cdef Py_ssize_t k, a, b, c, f, hits, hit0
    cdef double complex sigma[3][3]
    cdef double complex tmp[3][3]
    cdef double complex tau[3][3]
    cdef double complex pz[3][3]
    cdef double complex pi1[3][3]
    cdef double complex acc, dz
    cdef double p1, p2, pr, d, e
    cdef int out

    for a in range(3):
        for b in range(3):
            pz[a][b] = zm[a] * zm[b].conjugate()
            pi1[a][b] = (1.0 if a == b else 0.0) - pz[a][b]

    with nogil:
        for k in range(steps):
            # sigma = U rho U^dagger
            for a in range(3):
                for b in range(3):
                    acc = 0
                    for c in range(3):
                        acc = acc + um[a, c] * rho[c, b]
                    tmp[a][b] = acc
            for a in range(3):
                for b in range(3):
                    acc = 0
                    for c in range(3):
                        acc = acc + tmp[a][c] * um[b, c].conjugate()
                    sigma[a][b] = acc

            acc = 0
            for a in range(3):
                for b in range(3):
                    acc = acc + zm[a].conjugate() * sigma[a][b] * zm[b]
            p2 = acc.real
            p1 = 1.0 - p2
            if p1 < 0.0:
                p1 = 0.0
            if p1 > 1.0:
                p1 = 1.0

            if p1 <= eps_prob:
                out = 2
            elif p1 >= 1.0 - eps_prob:
                out = 1
            else:
                out = 1 if _u01(sd, <unsigned long long> k) < p1 else 2

            if out == 2:
                for a in range(3):
                    for b in range(3):
                        rho[a, b] = pz[a][b]
            else:
                for a in range(3):
                    for b in range(3):
                        acc = 0
                        for c in range(3):
                            acc = acc + pi1[a][c] * sigma[c][b]
                        tmp[a][b] = acc
                for a in range(3):
                    for b in range(3):
                        acc = 0
                        for c in range(3):
                            acc = acc + tmp[a][c] * pi1[b][c].conjugate()
                        tau[a][b] = acc
                pr = (tau[0][0] + tau[1][1] + tau[2][2]).real
                for a in range(3):
                    for b in range(3):
                        rho[a, b] = (tau[a][b] + tau[b][a].conjugate()) / (2.0 * pr)

            outcomes[k] = <unsigned char> out
            hits = 0
            hit0 = -1
            for f in range(m):
                d = 0.0
                for a in range(3):
                    for b in range(3):
                        dz = fam[f, a, b] - rho[a, b]
                        e = sqrt(dz.real * dz.real + dz.imag * dz.imag)
                        if e > d:
                            d = e
                if d <= match_tol:
                    hits = hits + 1
                    if hits == 1:
                        hit0 = f
            matched[k] = <int> (hit0 if hits == 1 else -1)

    return outcomes_arr, matched_arr, rho_arr
