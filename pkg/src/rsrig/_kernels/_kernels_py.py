"""Pure-numpy implementations of the hot polynomial kernels.

The compiled extension (``_kernels_cy``) mirrors these signatures; both
return raw candidate roots that the caller polishes and filters.
"""

from __future__ import annotations

import numpy as np

from ._tables import (
    ACTION_COMBO,
    CUBIC_ACTION_MAP,
    CUBIC_READOFF,
    EXP10,
    EXP20,
    EXP35,
    QUARTIC_ACTION_MAP,
    QUARTIC_READOFF,
)

BACKEND = "python"

_REAL_TOL = 1e-8


def polish_roots(C: np.ndarray, exp: np.ndarray, roots: np.ndarray, iters: int = 3):
    """Batched Gauss-Newton polish of roots on the system C over exponents."""
    if roots.size == 0:
        return roots
    n_eq = C.shape[0]
    r = roots.astype(float).copy()
    for _ in range(iters):
        vals = np.prod(r[:, None, :] ** exp[None, :, :], axis=-1)
        f = vals @ C.T
        J = np.empty((len(r), n_eq, 3))
        for var in range(3):
            dexp = exp.copy()
            fac = exp[:, var].astype(float)
            dexp[:, var] = np.maximum(dexp[:, var] - 1, 0)
            dvals = fac * np.prod(r[:, None, :] ** dexp[None, :, :], axis=-1)
            J[:, :, var] = dvals @ C.T
        JtJ = np.einsum("kev,kew->kvw", J, J)
        Jtf = np.einsum("kev,ke->kv", J, f)
        try:
            step = np.linalg.solve(JtJ + 1e-14 * np.eye(3), Jtf[..., None])[..., 0]
        except np.linalg.LinAlgError:
            break
        r = r - step
    return r


def _action_roots(C: np.ndarray, n_top: int, amap: np.ndarray, readoff: np.ndarray,
                  exp: np.ndarray):
    """Gauss-Jordan against the top-degree block, then eigenvector read-off."""
    n_basis = C.shape[1] - n_top
    A = C[:, :n_top]
    cond = np.linalg.cond(A)
    if not np.isfinite(cond):
        return np.empty((0, 3)), np.inf
    try:
        Bred = np.linalg.solve(A, C[:, n_top:])
    except np.linalg.LinAlgError:
        return np.empty((0, 3)), np.inf
    T = np.zeros((n_basis, n_basis))
    for var in range(3):
        g = ACTION_COMBO[var]
        for i in range(n_basis):
            k = amap[var, i]
            if k >= 0:
                T[i] -= g * Bred[k]
            else:
                T[i, -k - 1] += g
    try:
        _, V = np.linalg.eig(T)
    except np.linalg.LinAlgError:
        return np.empty((0, 3)), cond
    i1, ix, iy, iz = readoff
    denom = V[i1]
    cols = np.abs(denom) > 1e-12 * np.max(np.abs(V), axis=0)
    xyz = V[np.ix_((ix, iy, iz), cols)] / denom[cols]
    real = np.max(np.abs(xyz.imag), axis=0) <= _REAL_TOL * (
        1.0 + np.max(np.abs(xyz.real), axis=0)
    )
    roots = np.ascontiguousarray(xyz.real[:, real].T)
    return polish_roots(C, exp, roots), cond


def cubic_action_roots(C: np.ndarray) -> tuple[np.ndarray, float]:
    """Polished roots of the 10x20 cubic system (<= 10 solutions)."""
    return _action_roots(C, 10, CUBIC_ACTION_MAP, CUBIC_READOFF, EXP20)


def quartic_action_roots(C: np.ndarray) -> tuple[np.ndarray, float]:
    """Polished roots of the 15x35 quartic minor system (<= 20 solutions)."""
    return _action_roots(C, 15, QUARTIC_ACTION_MAP, QUARTIC_READOFF, EXP35)


def e3q3_roots(Q: np.ndarray) -> np.ndarray:
    """Candidate roots of three quadrics over MONO10, last variable hidden.

    Solves the 3x3 block for [x2, xy, y2] as z-dependent linear forms in
    (x, y, 1), reduces the ring relations x*xy = y*x2, x*y2 = y*xy and
    x2*y2 = xy^2 to a 3x3 pencil B(z) [x y 1]^T = 0, and finds the roots
    of the degree-8 determinant.
    """
    C3 = Q[:, [0, 1, 3]]
    try:
        inv = np.linalg.inv(C3)
    except np.linalg.LinAlgError:
        return np.empty((0, 3))
    # z-coefficient rows (ascending degree) of the linear forms
    Dx = np.stack([Q[:, 6], Q[:, 2]], axis=1)
    Dy = np.stack([Q[:, 7], Q[:, 4]], axis=1)
    E0 = np.stack([Q[:, 9], Q[:, 8], Q[:, 5]], axis=1)
    alpha = -(inv @ Dx)
    beta = -(inv @ Dy)
    gamma = -(inv @ E0)
    a1, a2, a3 = alpha
    b1, b2, b3 = beta
    g1, g2, g3 = gamma

    pm = np.convolve

    def pa(*ps):
        n = max(len(p) for p in ps)
        out = np.zeros(n)
        for p in ps:
            out[: len(p)] += p
        return out

    B = [[None] * 3 for _ in range(3)]
    B[0][0] = pa(pm(a1 - b2, a2), -pm(a2, a1), pm(b1, a3), -g2)
    B[0][1] = pa(pm(a1 - b2, b2), -pm(a2, b1), pm(b1, b3), g1)
    B[0][2] = pa(pm(a1 - b2, g2), -pm(a2, g1), pm(b1, g3))
    B[1][0] = pa(pm(a3, a1), pm(b3 - a2, a2), -pm(b2, a3), g3)
    B[1][1] = pa(pm(a3, b1), pm(b3 - a2, b2), -pm(b2, b3), -g2)
    B[1][2] = pa(pm(a3, g1), pm(b3 - a2, g2), -pm(b2, g3))
    q1 = pa(pm(a1, a3), -pm(a2, a2))
    q2 = pa(pm(a1, b3), pm(a3, b1), -2 * pm(a2, b2))
    q3 = pa(pm(b1, b3), -pm(b2, b2))
    B[2][0] = pa(pm(q1, a1), pm(q2, a2), pm(q3, a3), pm(a1, g3), pm(a3, g1), -2 * pm(a2, g2))
    B[2][1] = pa(pm(q1, b1), pm(q2, b2), pm(q3, b3), pm(b1, g3), pm(b3, g1), -2 * pm(b2, g2))
    B[2][2] = pa(pm(q1, g1), pm(q2, g2), pm(q3, g3), pm(g1, g3), -pm(g2, g2))

    det = pa(
        pm(B[0][0], pa(pm(B[1][1], B[2][2]), -pm(B[1][2], B[2][1]))),
        -pm(B[0][1], pa(pm(B[1][0], B[2][2]), -pm(B[1][2], B[2][0]))),
        pm(B[0][2], pa(pm(B[1][0], B[2][1]), -pm(B[1][1], B[2][0]))),
    )
    dd = det[::-1]  # descending for np.roots
    top = np.max(np.abs(dd))
    if top == 0.0:
        return np.empty((0, 3))
    dd = dd / top
    nz = np.nonzero(np.abs(dd) > 1e-12)[0]
    if len(nz) == 0 or len(dd) - nz[0] < 2:
        return np.empty((0, 3))
    zs = np.roots(dd[nz[0]:])
    zs = zs[np.abs(zs.imag) <= _REAL_TOL * (1.0 + np.abs(zs.real))].real
    if zs.size == 0:
        return np.empty((0, 3))
    # back-substitute (x, y) from null(B(z)) for all real z at once
    Bz = np.empty((zs.size, 3, 3))
    for i in range(3):
        for j in range(3):
            Bz[:, i, j] = np.polyval(B[i][j][::-1], zs)
    _, _, Vh = np.linalg.svd(Bz)
    nv = Vh[:, -1, :]
    ok = np.abs(nv[:, 2]) > 1e-13
    roots = np.column_stack(
        [nv[ok, 0] / nv[ok, 2], nv[ok, 1] / nv[ok, 2], zs[ok]]
    )
    return polish_roots(Q, EXP10, roots)
