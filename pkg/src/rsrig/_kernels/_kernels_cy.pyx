# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot polynomial kernels.

Mirrors ``_kernels_py``: the three solvers return Newton-polished real
candidate roots; callers dedupe and residual-filter.  LAPACK routines come
from scipy's Cython bindings, so no extra linking is required.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt
from libc.string cimport memset
from scipy.linalg.cython_lapack cimport dgeev, dgesv, dgesvd

from . import _tables

cnp.import_array()

BACKEND = "compiled"

cdef double REAL_TOL = 1e-8

# static tables (filled at import)
cdef long[:, ::1] _AMAP3 = np.ascontiguousarray(_tables.CUBIC_ACTION_MAP)
cdef long[:, ::1] _AMAP4 = np.ascontiguousarray(_tables.QUARTIC_ACTION_MAP)
cdef long[::1] _READ3 = np.ascontiguousarray(_tables.CUBIC_READOFF)
cdef long[::1] _READ4 = np.ascontiguousarray(_tables.QUARTIC_READOFF)
cdef double[::1] _COMBO = np.ascontiguousarray(_tables.ACTION_COMBO)
cdef long[:, ::1] _EXP10 = np.ascontiguousarray(_tables.EXP10)
cdef long[:, ::1] _EXP20 = np.ascontiguousarray(_tables.EXP20)
cdef long[:, ::1] _EXP35 = np.ascontiguousarray(_tables.EXP35)


# ---------------------------------------------------------------- helpers

cdef inline void _monomial_values(const long[:, ::1] expn, int n_mon,
                                  double x, double y, double z,
                                  double* out) noexcept nogil:
    cdef double px[5]
    cdef double py[5]
    cdef double pz[5]
    cdef int i
    px[0] = py[0] = pz[0] = 1.0
    for i in range(1, 5):
        px[i] = px[i - 1] * x
        py[i] = py[i - 1] * y
        pz[i] = pz[i - 1] * z
    for i in range(n_mon):
        out[i] = px[expn[i, 0]] * py[expn[i, 1]] * pz[expn[i, 2]]


cdef inline void _monomial_derivs(const long[:, ::1] expn, int n_mon, int var,
                                  double x, double y, double z,
                                  double* out) noexcept nogil:
    cdef double px[5]
    cdef double py[5]
    cdef double pz[5]
    cdef int i, e0, e1, e2
    px[0] = py[0] = pz[0] = 1.0
    for i in range(1, 5):
        px[i] = px[i - 1] * x
        py[i] = py[i - 1] * y
        pz[i] = pz[i - 1] * z
    for i in range(n_mon):
        e0 = expn[i, 0]
        e1 = expn[i, 1]
        e2 = expn[i, 2]
        if var == 0:
            out[i] = 0.0 if e0 == 0 else e0 * px[e0 - 1] * py[e1] * pz[e2]
        elif var == 1:
            out[i] = 0.0 if e1 == 0 else e1 * px[e0] * py[e1 - 1] * pz[e2]
        else:
            out[i] = 0.0 if e2 == 0 else e2 * px[e0] * py[e1] * pz[e2 - 1]


cdef inline int _solve3(double* A, double* b, double* out) noexcept nogil:
    """Cramer solve of a row-major 3x3 system."""
    cdef double d = (
        A[0] * (A[4] * A[8] - A[5] * A[7])
        - A[1] * (A[3] * A[8] - A[5] * A[6])
        + A[2] * (A[3] * A[7] - A[4] * A[6])
    )
    if fabs(d) < 1e-300:
        return 1
    cdef double inv = 1.0 / d
    out[0] = inv * (
        b[0] * (A[4] * A[8] - A[5] * A[7])
        - A[1] * (b[1] * A[8] - A[5] * b[2])
        + A[2] * (b[1] * A[7] - A[4] * b[2])
    )
    out[1] = inv * (
        A[0] * (b[1] * A[8] - A[5] * b[2])
        - b[0] * (A[3] * A[8] - A[5] * A[6])
        + A[2] * (A[3] * b[2] - b[1] * A[6])
    )
    out[2] = inv * (
        A[0] * (A[4] * b[2] - b[1] * A[7])
        - A[1] * (A[3] * b[2] - b[1] * A[6])
        + b[0] * (A[3] * A[7] - A[4] * A[6])
    )
    return 0


cdef int _polish_inplace(const double[:, ::1] C, const long[:, ::1] expn,
                         double* root, int iters) noexcept nogil:
    """Gauss-Newton polish of one root on the full system C."""
    cdef int n_eq = C.shape[0]
    cdef int n_mon = C.shape[1]
    cdef double vals[35]
    cdef double dvals[35]
    cdef double f[40]
    cdef double J[40][3]
    cdef double JtJ[9]
    cdef double Jtf[3]
    cdef double step[3]
    cdef int it, e, m, var, i, j
    cdef double acc
    for it in range(iters):
        _monomial_values(expn, n_mon, root[0], root[1], root[2], vals)
        for e in range(n_eq):
            acc = 0.0
            for m in range(n_mon):
                acc += C[e, m] * vals[m]
            f[e] = acc
        for var in range(3):
            _monomial_derivs(expn, n_mon, var, root[0], root[1], root[2], dvals)
            for e in range(n_eq):
                acc = 0.0
                for m in range(n_mon):
                    acc += C[e, m] * dvals[m]
                J[e][var] = acc
        for i in range(3):
            Jtf[i] = 0.0
            for j in range(3):
                JtJ[3 * i + j] = 1e-14 if i == j else 0.0
        for e in range(n_eq):
            for i in range(3):
                Jtf[i] += J[e][i] * f[e]
                for j in range(3):
                    JtJ[3 * i + j] += J[e][i] * J[e][j]
        if _solve3(JtJ, Jtf, step):
            return 1
        root[0] -= step[0]
        root[1] -= step[1]
        root[2] -= step[2]
    return 0


cdef double _block_condition(double* A, int n) noexcept nogil:
    """2-norm condition number of a row-major n x n block via dgesvd."""
    cdef double work[200]
    cdef double s[15]
    cdef double a_copy[225]
    cdef int info = 0, lwork = 200, i
    cdef char jobn = b'N'
    for i in range(n * n):
        a_copy[i] = A[i]
    dgesvd(&jobn, &jobn, &n, &n, a_copy, &n, s, NULL, &n, NULL, &n,
           work, &lwork, &info)
    if info != 0 or s[n - 1] <= 0.0:
        return 1e308
    return s[0] / s[n - 1]


# ------------------------------------------------------------ action cores

cdef _action_roots_impl(const double[:, ::1] C, int n_top,
                        const long[:, ::1] amap, const long[::1] readoff,
                        const long[:, ::1] expn):
    cdef int n_basis = C.shape[1] - n_top
    cdef int n_eq = C.shape[0]
    cdef int i, j, k, var, info = 0
    # Gauss-Jordan: solve A X = B with A the leading block (transposed into
    # Fortran order for dgesv)
    cdef double[::1] Af = np.empty(n_top * n_top)
    cdef double[::1] Bf = np.empty(n_top * n_basis)
    cdef double[::1] Acond = np.empty(n_top * n_top)
    cdef int[::1] ipiv = np.empty(n_top, dtype=np.int32)
    for i in range(n_eq):
        for j in range(n_top):
            Af[j * n_top + i] = C[i, j]  # column-major
            Acond[i * n_top + j] = C[i, j]
        for j in range(n_basis):
            Bf[j * n_top + i] = C[i, n_top + j]
    cdef double cond = _block_condition(&Acond[0], n_top)
    dgesv(&n_top, &n_basis, &Af[0], &n_top, <int*> &ipiv[0], &Bf[0], &n_top, &info)
    if info != 0:
        return np.empty((0, 3)), 1e308
    # action matrix, column-major for dgeev: T_f[i + j*n] = T[i, j]
    cdef double[::1] Tf = np.zeros(n_basis * n_basis)
    cdef double g
    cdef long kk
    for var in range(3):
        g = _COMBO[var]
        for i in range(n_basis):
            kk = amap[var, i]
            if kk >= 0:
                # row i of T -= g * Bred[kk, :]; Bred[kk, j] = Bf[j*n_top + kk]
                for j in range(n_basis):
                    Tf[j * n_basis + i] -= g * Bf[j * n_top + kk]
            else:
                Tf[(-kk - 1) * n_basis + i] += g
    # eigen decomposition (right eigenvectors)
    cdef double[::1] wr = np.empty(n_basis)
    cdef double[::1] wi = np.empty(n_basis)
    cdef double[::1] VR = np.empty(n_basis * n_basis)
    cdef double[::1] work = np.empty(16 * n_basis)
    cdef int lwork = 16 * n_basis
    cdef char jobn = b'N', jobv = b'V'
    dgeev(&jobn, &jobv, &n_basis, &Tf[0], &n_basis, &wr[0], &wi[0],
          NULL, &n_basis, &VR[0], &n_basis, &work[0], &lwork, &info)
    if info != 0:
        return np.empty((0, 3)), cond
    # read off candidate roots
    out = np.empty((n_basis, 3))
    cdef double[:, ::1] out_v = out
    cdef int n_out = 0
    cdef long i1 = readoff[0], ix = readoff[1], iy = readoff[2], iz = readoff[3]
    cdef double re1, im1, rex, imx, rey, imy, rez, imz, den, xr, xi, yr, yi, zr, zi
    cdef double vmax
    cdef int col = 0
    while col < n_basis:
        if wi[col] == 0.0:
            re1 = VR[col * n_basis + i1]
            vmax = 0.0
            for i in range(n_basis):
                if fabs(VR[col * n_basis + i]) > vmax:
                    vmax = fabs(VR[col * n_basis + i])
            if fabs(re1) > 1e-12 * vmax:
                out_v[n_out, 0] = VR[col * n_basis + ix] / re1
                out_v[n_out, 1] = VR[col * n_basis + iy] / re1
                out_v[n_out, 2] = VR[col * n_basis + iz] / re1
                n_out += 1
            col += 1
        else:
            # conjugate pair: v = VR[:, col] + i VR[:, col+1]
            re1 = VR[col * n_basis + i1]
            im1 = VR[(col + 1) * n_basis + i1]
            den = re1 * re1 + im1 * im1
            vmax = 0.0
            for i in range(n_basis):
                xr = VR[col * n_basis + i]
                xi = VR[(col + 1) * n_basis + i]
                if xr * xr + xi * xi > vmax:
                    vmax = xr * xr + xi * xi
            if den > 1e-24 * vmax:
                rex = VR[col * n_basis + ix]
                imx = VR[(col + 1) * n_basis + ix]
                rey = VR[col * n_basis + iy]
                imy = VR[(col + 1) * n_basis + iy]
                rez = VR[col * n_basis + iz]
                imz = VR[(col + 1) * n_basis + iz]
                xr = (rex * re1 + imx * im1) / den
                xi = (imx * re1 - rex * im1) / den
                yr = (rey * re1 + imy * im1) / den
                yi = (imy * re1 - rey * im1) / den
                zr = (rez * re1 + imz * im1) / den
                zi = (imz * re1 - rez * im1) / den
                if (
                    fabs(xi) <= REAL_TOL * (1.0 + fabs(xr))
                    and fabs(yi) <= REAL_TOL * (1.0 + fabs(yr))
                    and fabs(zi) <= REAL_TOL * (1.0 + fabs(zr))
                ):
                    out_v[n_out, 0] = xr
                    out_v[n_out, 1] = yr
                    out_v[n_out, 2] = zr
                    n_out += 1
            col += 2
    cdef double root[3]
    for i in range(n_out):
        root[0] = out_v[i, 0]
        root[1] = out_v[i, 1]
        root[2] = out_v[i, 2]
        _polish_inplace(C, expn, root, 3)
        out_v[i, 0] = root[0]
        out_v[i, 1] = root[1]
        out_v[i, 2] = root[2]
    return out[:n_out].copy(), cond


def cubic_action_roots(C):
    """Polished roots of the 10x20 cubic system (<= 10 solutions)."""
    C = np.ascontiguousarray(C, dtype=np.float64)
    return _action_roots_impl(C, 10, _AMAP3, _READ3, _EXP20)


def quartic_action_roots(C):
    """Polished roots of the 15x35 quartic minor system (<= 20 solutions)."""
    C = np.ascontiguousarray(C, dtype=np.float64)
    return _action_roots_impl(C, 15, _AMAP4, _READ4, _EXP35)


# ------------------------------------------------------------------- e3q3

cdef inline void _pmul(const double* p, int np_, const double* q, int nq,
                       double* out, int* nout) noexcept nogil:
    cdef int i, j
    for i in range(np_ + nq - 1):
        out[i] = 0.0
    for i in range(np_):
        for j in range(nq):
            out[i + j] += p[i] * q[j]
    nout[0] = np_ + nq - 1


cdef inline void _padd(double* acc, int* nacc, const double* p, int np_,
                       double s) noexcept nogil:
    cdef int i
    if np_ > nacc[0]:
        for i in range(nacc[0], np_):
            acc[i] = 0.0
        nacc[0] = np_
    for i in range(np_):
        acc[i] += s * p[i]


def e3q3_roots(Q):
    """Polished roots of three quadrics over MONO10, last variable hidden."""
    cdef double[:, ::1] Qv = np.ascontiguousarray(Q, dtype=np.float64)
    cdef double C3[9]
    cdef double rhs[3]
    cdef double sol[3]
    cdef int i, j, k
    # invert the [x2, xy, y2] block via Cramer solves
    for i in range(3):
        C3[3 * i + 0] = Qv[i, 0]
        C3[3 * i + 1] = Qv[i, 1]
        C3[3 * i + 2] = Qv[i, 3]
    # alpha, beta: z-polys деg<=1; gamma deg<=2 for [x2, xy, y2] = L(x, y, 1)
    cdef double alpha[3][2]
    cdef double beta[3][2]
    cdef double gamma[3][3]
    cdef double col[3]
    # x-column: -(C3^-1 [Q[:,6] + z Q[:,2]])
    for k in range(2):
        for i in range(3):
            col[i] = Qv[i, 6] if k == 0 else Qv[i, 2]
        if _solve3(C3, col, sol):
            return np.empty((0, 3))
        for i in range(3):
            alpha[i][k] = -sol[i]
    for k in range(2):
        for i in range(3):
            col[i] = Qv[i, 7] if k == 0 else Qv[i, 4]
        if _solve3(C3, col, sol):
            return np.empty((0, 3))
        for i in range(3):
            beta[i][k] = -sol[i]
    for k in range(3):
        for i in range(3):
            col[i] = Qv[i, 9] if k == 0 else (Qv[i, 8] if k == 1 else Qv[i, 5])
        if _solve3(C3, col, sol):
            return np.empty((0, 3))
        for i in range(3):
            gamma[i][k] = -sol[i]

    # pencil rows; B[i][j] is a z-polynomial (max len 5)
    cdef double B[3][3][8]
    cdef int Blen[3][3]
    cdef double tmp[12]
    cdef double tmp2[12]
    cdef double amb2[2]
    cdef double bma2[2]
    cdef int nt, nt2
    for i in range(2):
        amb2[i] = alpha[0][i] - beta[1][i]
        bma2[i] = beta[2][i] - alpha[1][i]
    # row 0: (a1-b2) L2 - a2 L1 + b1 L3 + g1*y - g2*x
    for j in range(3):
        Blen[0][j] = 0
    _pmul(amb2, 2, alpha[1], 2, tmp, &nt)
    _padd(B[0][0], &Blen[0][0], tmp, nt, 1.0)
    _pmul(alpha[1], 2, alpha[0], 2, tmp, &nt)
    _padd(B[0][0], &Blen[0][0], tmp, nt, -1.0)
    _pmul(beta[0], 2, alpha[2], 2, tmp, &nt)
    _padd(B[0][0], &Blen[0][0], tmp, nt, 1.0)
    _padd(B[0][0], &Blen[0][0], gamma[1], 3, -1.0)
    _pmul(amb2, 2, beta[1], 2, tmp, &nt)
    _padd(B[0][1], &Blen[0][1], tmp, nt, 1.0)
    _pmul(alpha[1], 2, beta[0], 2, tmp, &nt)
    _padd(B[0][1], &Blen[0][1], tmp, nt, -1.0)
    _pmul(beta[0], 2, beta[2], 2, tmp, &nt)
    _padd(B[0][1], &Blen[0][1], tmp, nt, 1.0)
    _padd(B[0][1], &Blen[0][1], gamma[0], 3, 1.0)
    _pmul(amb2, 2, gamma[1], 3, tmp, &nt)
    _padd(B[0][2], &Blen[0][2], tmp, nt, 1.0)
    _pmul(alpha[1], 2, gamma[0], 3, tmp, &nt)
    _padd(B[0][2], &Blen[0][2], tmp, nt, -1.0)
    _pmul(beta[0], 2, gamma[2], 3, tmp, &nt)
    _padd(B[0][2], &Blen[0][2], tmp, nt, 1.0)
    # row 1: a3 L1 + (b3-a2) L2 - b2 L3 + g3*x - g2*y
    for j in range(3):
        Blen[1][j] = 0
    _pmul(alpha[2], 2, alpha[0], 2, tmp, &nt)
    _padd(B[1][0], &Blen[1][0], tmp, nt, 1.0)
    _pmul(bma2, 2, alpha[1], 2, tmp, &nt)
    _padd(B[1][0], &Blen[1][0], tmp, nt, 1.0)
    _pmul(beta[1], 2, alpha[2], 2, tmp, &nt)
    _padd(B[1][0], &Blen[1][0], tmp, nt, -1.0)
    _padd(B[1][0], &Blen[1][0], gamma[2], 3, 1.0)
    _pmul(alpha[2], 2, beta[0], 2, tmp, &nt)
    _padd(B[1][1], &Blen[1][1], tmp, nt, 1.0)
    _pmul(bma2, 2, beta[1], 2, tmp, &nt)
    _padd(B[1][1], &Blen[1][1], tmp, nt, 1.0)
    _pmul(beta[1], 2, beta[2], 2, tmp, &nt)
    _padd(B[1][1], &Blen[1][1], tmp, nt, -1.0)
    _padd(B[1][1], &Blen[1][1], gamma[1], 3, -1.0)
    _pmul(alpha[2], 2, gamma[0], 3, tmp, &nt)
    _padd(B[1][2], &Blen[1][2], tmp, nt, 1.0)
    _pmul(bma2, 2, gamma[1], 3, tmp, &nt)
    _padd(B[1][2], &Blen[1][2], tmp, nt, 1.0)
    _pmul(beta[1], 2, gamma[2], 3, tmp, &nt)
    _padd(B[1][2], &Blen[1][2], tmp, nt, -1.0)
    # row 2: q1 L1 + q2 L2 + q3 L3 + cross terms, q's are deg<=2 products
    cdef double q1[4]
    cdef double q2[4]
    cdef double q3[4]
    cdef int nq1, nq2, nq3
    _pmul(alpha[0], 2, alpha[2], 2, q1, &nq1)
    _pmul(alpha[1], 2, alpha[1], 2, tmp, &nt)
    for i in range(nt):
        q1[i] -= tmp[i]
    _pmul(alpha[0], 2, beta[2], 2, q2, &nq2)
    _pmul(alpha[2], 2, beta[0], 2, tmp, &nt)
    for i in range(nt):
        q2[i] += tmp[i]
    _pmul(alpha[1], 2, beta[1], 2, tmp, &nt)
    for i in range(nt):
        q2[i] -= 2.0 * tmp[i]
    _pmul(beta[0], 2, beta[2], 2, q3, &nq3)
    _pmul(beta[1], 2, beta[1], 2, tmp, &nt)
    for i in range(nt):
        q3[i] -= tmp[i]
    for j in range(3):
        Blen[2][j] = 0
    _pmul(q1, nq1, alpha[0], 2, tmp, &nt)
    _padd(B[2][0], &Blen[2][0], tmp, nt, 1.0)
    _pmul(q2, nq2, alpha[1], 2, tmp, &nt)
    _padd(B[2][0], &Blen[2][0], tmp, nt, 1.0)
    _pmul(q3, nq3, alpha[2], 2, tmp, &nt)
    _padd(B[2][0], &Blen[2][0], tmp, nt, 1.0)
    _pmul(alpha[0], 2, gamma[2], 3, tmp, &nt)
    _padd(B[2][0], &Blen[2][0], tmp, nt, 1.0)
    _pmul(alpha[2], 2, gamma[0], 3, tmp, &nt)
    _padd(B[2][0], &Blen[2][0], tmp, nt, 1.0)
    _pmul(alpha[1], 2, gamma[1], 3, tmp, &nt)
    _padd(B[2][0], &Blen[2][0], tmp, nt, -2.0)
    _pmul(q1, nq1, beta[0], 2, tmp, &nt)
    _padd(B[2][1], &Blen[2][1], tmp, nt, 1.0)
    _pmul(q2, nq2, beta[1], 2, tmp, &nt)
    _padd(B[2][1], &Blen[2][1], tmp, nt, 1.0)
    _pmul(q3, nq3, beta[2], 2, tmp, &nt)
    _padd(B[2][1], &Blen[2][1], tmp, nt, 1.0)
    _pmul(beta[0], 2, gamma[2], 3, tmp, &nt)
    _padd(B[2][1], &Blen[2][1], tmp, nt, 1.0)
    _pmul(beta[2], 2, gamma[0], 3, tmp, &nt)
    _padd(B[2][1], &Blen[2][1], tmp, nt, 1.0)
    _pmul(beta[1], 2, gamma[1], 3, tmp, &nt)
    _padd(B[2][1], &Blen[2][1], tmp, nt, -2.0)
    _pmul(q1, nq1, gamma[0], 3, tmp, &nt)
    _padd(B[2][2], &Blen[2][2], tmp, nt, 1.0)
    _pmul(q2, nq2, gamma[1], 3, tmp, &nt)
    _padd(B[2][2], &Blen[2][2], tmp, nt, 1.0)
    _pmul(q3, nq3, gamma[2], 3, tmp, &nt)
    _padd(B[2][2], &Blen[2][2], tmp, nt, 1.0)
    _pmul(gamma[0], 3, gamma[2], 3, tmp, &nt)
    _padd(B[2][2], &Blen[2][2], tmp, nt, 1.0)
    _pmul(gamma[1], 3, gamma[1], 3, tmp, &nt)
    _padd(B[2][2], &Blen[2][2], tmp, nt, -1.0)

    # determinant polynomial (degree <= 10 safety, mathematically <= 8)
    cdef double det[16]
    cdef int ndet = 0
    cdef double m1[12]
    cdef double m2[12]
    cdef int nm1, nm2
    # det = B00 (B11 B22 - B12 B21) - B01 (B10 B22 - B12 B20) + B02 (B10 B21 - B11 B20)
    _pmul(B[1][1], Blen[1][1], B[2][2], Blen[2][2], m1, &nm1)
    _pmul(B[1][2], Blen[1][2], B[2][1], Blen[2][1], m2, &nm2)
    _padd(m1, &nm1, m2, nm2, -1.0)
    _pmul(B[0][0], Blen[0][0], m1, nm1, tmp2, &nt2)
    _padd(det, &ndet, tmp2, nt2, 1.0)
    _pmul(B[1][0], Blen[1][0], B[2][2], Blen[2][2], m1, &nm1)
    _pmul(B[1][2], Blen[1][2], B[2][0], Blen[2][0], m2, &nm2)
    _padd(m1, &nm1, m2, nm2, -1.0)
    _pmul(B[0][1], Blen[0][1], m1, nm1, tmp2, &nt2)
    _padd(det, &ndet, tmp2, nt2, -1.0)
    _pmul(B[1][0], Blen[1][0], B[2][1], Blen[2][1], m1, &nm1)
    _pmul(B[1][1], Blen[1][1], B[2][0], Blen[2][0], m2, &nm2)
    _padd(m1, &nm1, m2, nm2, -1.0)
    _pmul(B[0][2], Blen[0][2], m1, nm1, tmp2, &nt2)
    _padd(det, &ndet, tmp2, nt2, 1.0)

    # strip negligible leading (highest-degree) coefficients
    cdef double top = 0.0
    for i in range(ndet):
        if fabs(det[i]) > top:
            top = fabs(det[i])
    if top == 0.0:
        return np.empty((0, 3))
    cdef int deg = ndet - 1
    while deg > 0 and fabs(det[deg]) < 1e-12 * top:
        deg -= 1
    if deg < 1:
        return np.empty((0, 3))

    # companion matrix (column-major), eigenvalues only
    cdef double comp[100]
    memset(comp, 0, sizeof(comp))
    cdef double lead = det[deg]
    for i in range(deg):
        comp[(deg - 1) * deg + i] = -det[i] / lead  # last column
        if i > 0:
            comp[(i - 1) * deg + i] = 1.0  # subdiagonal
    cdef double wr[10]
    cdef double wi[10]
    cdef double work2[340]
    cdef int lwork2 = 340, info2 = 0
    cdef char jn = b'N'
    dgeev(&jn, &jn, &deg, comp, &deg, wr, wi, NULL, &deg, NULL, &deg,
          work2, &lwork2, &info2)
    if info2 != 0:
        return np.empty((0, 3))

    out = np.empty((deg, 3))
    cdef double[:, ::1] out_v = out
    cdef int n_out = 0
    cdef double z, zp, Bz[9]
    cdef double n0[3]
    cdef double n1[3]
    cdef double n2[3]
    cdef double best[3]
    cdef double nrm, bestn
    cdef double root[3]
    for k in range(deg):
        if fabs(wi[k]) > REAL_TOL * (1.0 + fabs(wr[k])):
            continue
        z = wr[k]
        for i in range(3):
            for j in range(3):
                # polyval ascending
                zp = 0.0
                for nt in range(Blen[i][j] - 1, -1, -1):
                    zp = zp * z + B[i][j][nt]
                Bz[3 * i + j] = zp
        # null vector via row cross products
        n0[0] = Bz[1] * Bz[5] - Bz[2] * Bz[4]
        n0[1] = Bz[2] * Bz[3] - Bz[0] * Bz[5]
        n0[2] = Bz[0] * Bz[4] - Bz[1] * Bz[3]
        n1[0] = Bz[1] * Bz[8] - Bz[2] * Bz[7]
        n1[1] = Bz[2] * Bz[6] - Bz[0] * Bz[8]
        n1[2] = Bz[0] * Bz[7] - Bz[1] * Bz[6]
        n2[0] = Bz[4] * Bz[8] - Bz[5] * Bz[7]
        n2[1] = Bz[5] * Bz[6] - Bz[3] * Bz[8]
        n2[2] = Bz[3] * Bz[7] - Bz[4] * Bz[6]
        bestn = 0.0
        for i in range(3):
            best[i] = n0[i]
        nrm = n0[0] * n0[0] + n0[1] * n0[1] + n0[2] * n0[2]
        bestn = nrm
        nrm = n1[0] * n1[0] + n1[1] * n1[1] + n1[2] * n1[2]
        if nrm > bestn:
            bestn = nrm
            for i in range(3):
                best[i] = n1[i]
        nrm = n2[0] * n2[0] + n2[1] * n2[1] + n2[2] * n2[2]
        if nrm > bestn:
            bestn = nrm
            for i in range(3):
                best[i] = n2[i]
        if bestn <= 0.0 or fabs(best[2]) < 1e-13 * sqrt(bestn):
            continue
        root[0] = best[0] / best[2]
        root[1] = best[1] / best[2]
        root[2] = z
        _polish_inplace(Qv, _EXP10, root, 3)
        out_v[n_out, 0] = root[0]
        out_v[n_out, 1] = root[1]
        out_v[n_out, 2] = root[2]
        n_out += 1
    return out[:n_out].copy()
