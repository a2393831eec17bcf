"""Polynomial-system machinery behind the minimal solvers.

Three solver families live here: the intersection of three quadrics in
three unknowns (rotation solver), the ten-cubic hidden-variable system of
the five-point solver, and the known-baseline system (fifteen minor
equations solved through a Macaulay elimination).

Monomial ordering
-----------------
Coefficient rows are laid out over graded-lex monomial bases, highest
degree block first, lexicographic (x > y > z) inside each block:

* ``MONO4``  (degree <= 1):  x, y, z, 1
* ``MONO10`` (degree <= 2):  x2, xy, xz, y2, yz, z2, x, y, z, 1
* ``MONO20`` (degree <= 3):  x3, x2y, x2z, xy2, xyz, xz2, y3, y2z, yz2, z3,
  then the ten entries of MONO10.

The ten-cubic solver row-reduces the 10x20 coefficient matrix against the
degree-3 block and extracts roots as eigenvectors of a 10x10 action
matrix (the structure of classic five-point essential solvers).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateSystem, NumericalFailure, ShapeMismatch
from ._kernels import e3q3_roots, cubic_action_roots, quartic_action_roots, KERNEL_BACKEND

__all__ = [
    "PolySystem",
    "MONO4",
    "MONO35",
    "MONO10",
    "MONO20",
    "monomial_values",
    "solve_3q3",
    "hidden_variable_eliminate",
    "solve_cubic_system",
    "solve_baseline_system",
    "KERNEL_BACKEND",
]

COND_LIMIT = 1e12
REAL_IMAG_TOL = 1e-8


def _grlex_block(d: int) -> list[tuple[int, int, int]]:
    block = [e for e in itertools.product(range(d, -1, -1), repeat=3) if sum(e) == d]
    block.sort(key=lambda e: tuple(-x for x in e))
    return block


def monomials_upto(d: int) -> list[tuple[int, int, int]]:
    out: list[tuple[int, int, int]] = []
    for k in range(d, -1, -1):
        out.extend(_grlex_block(k))
    return out


MONO4 = tuple(monomials_upto(1))
MONO10 = tuple(monomials_upto(2))
MONO20 = tuple(_grlex_block(3) + list(MONO10))

_EXP10 = np.array(MONO10)
_EXP20 = np.array(MONO20)


def monomial_values(mons, pts: np.ndarray) -> np.ndarray:
    """Evaluate a monomial list at points (..., 3) -> (..., n_mon)."""
    exp = np.asarray(mons)
    pts = np.asarray(pts, dtype=float)
    out = np.prod(pts[..., None, :] ** exp, axis=-1)
    return out


@dataclass(frozen=True)
class PolySystem:
    """Dense polynomial system: one coefficient row per equation."""

    coeffs: np.ndarray
    monomials: tuple
    n_vars: int = 3
    degree: int = 3

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficient rows must be finite")
        if coeffs.shape[1] != len(self.monomials):
            raise ShapeMismatch("coefficient width does not match monomial basis")
        object.__setattr__(self, "coeffs", coeffs)

    def residuals(self, pt) -> np.ndarray:
        return self.coeffs @ monomial_values(self.monomials, np.asarray(pt))


# --------------------------------------------------------------------------
# three quadrics in three unknowns
# --------------------------------------------------------------------------

# Column permutations of MONO10 that swap the hidden variable into the z
# slot: identity, swap y<->z, swap x<->z.
def _perm_columns(swap: tuple[int, int] | None) -> np.ndarray:
    idx = {m: i for i, m in enumerate(MONO10)}
    cols = np.empty(10, dtype=int)
    for i, e in enumerate(MONO10):
        e2 = list(e)
        if swap is not None:
            e2[swap[0]], e2[swap[1]] = e2[swap[1]], e2[swap[0]]
        cols[i] = idx[tuple(e2)]
    return cols


_HIDE_PERMS = (None, (1, 2), (0, 2))  # hide z, y, x
_HIDE_COLS = [_perm_columns(s) for s in _HIDE_PERMS]

# Fixed generic rotation used when every hidden-variable choice leaves the
# pure-quadratic block rank deficient (e.g. systems missing y2 terms).
_GENERIC_ROT = np.linalg.qr(
    np.array(
        [
            [0.813749, -0.296314, 0.472129],
            [0.184560, 0.906310, 0.215112],
            [-0.381420, 0.204843, 0.854219],
        ]
    )
)[0]


def _quadric_parts(row: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    A = np.array(
        [
            [row[0], row[1] / 2, row[2] / 2],
            [row[1] / 2, row[3], row[4] / 2],
            [row[2] / 2, row[4] / 2, row[5]],
        ]
    )
    return A, row[6:9].copy(), float(row[9])


def _quadric_row(A: np.ndarray, b: np.ndarray, c: float) -> np.ndarray:
    return np.array(
        [A[0, 0], 2 * A[0, 1], 2 * A[0, 2], A[1, 1], 2 * A[1, 2], A[2, 2],
         b[0], b[1], b[2], c]
    )


def _rotate_quadrics(Q: np.ndarray, R: np.ndarray) -> np.ndarray:
    out = np.empty_like(Q)
    for i, row in enumerate(Q):
        A, b, c = _quadric_parts(row)
        out[i] = _quadric_row(R.T @ A @ R, R.T @ b, c)
    return out


def solve_3q3(system: PolySystem | np.ndarray) -> list[np.ndarray]:
    """All real common roots of three quadrics in three unknowns.

    Hides one unknown (chosen by conditioning of the pure-quadratic block),
    reduces to a 3x3 polynomial pencil whose determinant is a degree-8
    univariate polynomial, and back-substitutes the remaining unknowns from
    the pencil's null space.  Roots are Newton-polished on the input.
    """
    Q = system.coeffs if isinstance(system, PolySystem) else np.asarray(system, float)
    if Q.shape != (3, 10):
        raise ShapeMismatch(f"expected 3 quadrics over MONO10, got {Q.shape}")
    scale = np.max(np.abs(Q), axis=1, keepdims=True)
    if np.any(scale == 0.0):
        raise DegenerateSystem("zero equation in 3q3 system")
    Qn = Q / scale

    roots = _e3q3_candidates(Qn)
    if roots is None:
        # the quadratic parts share a linear factor in every frame, so the
        # pencil reduction cannot apply; use the Macaulay action matrix
        roots = _tnf_action_candidates(Qn, MONO10, mult_deg=3)
        roots = _polish_roots(Qn, MONO10, roots) if roots.size else roots
    if roots.size == 0:
        return []
    roots = _dedupe(roots)
    out = []
    for r in roots:
        vals = monomial_values(MONO10, r)
        rel = np.max(np.abs(Qn @ vals)) / max(1.0, np.max(np.abs(vals)))
        if rel <= 1e-8:
            out.append(r)
    return out


def _e3q3_candidates(Qn: np.ndarray) -> np.ndarray | None:
    """Pencil-method candidates; None when no hide choice is well posed."""
    best_hide, best_cond, best_rot = 0, np.inf, None
    for rot in (None, _GENERIC_ROT):
        Qh = Qn if rot is None else _rotate_quadrics(Qn, rot)
        blocks = np.stack([Qh[:, cols][:, [0, 1, 3]] for cols in _HIDE_COLS])
        sv = np.linalg.svd(blocks, compute_uv=False)
        with np.errstate(divide="ignore", invalid="ignore"):
            conds = np.where(sv[:, -1] > 0.0, sv[:, 0] / sv[:, -1], np.inf)
        conds = np.where(sv[:, 0] > 0.0, conds, np.inf)
        hide = int(np.argmin(conds))
        if conds[hide] < best_cond:
            best_hide, best_cond, best_rot = hide, float(conds[hide]), rot
        if best_cond < 1e8:
            break
    if best_cond > 1e8:
        return None
    Qh = Qn if best_rot is None else _rotate_quadrics(Qn, best_rot)
    roots = e3q3_roots(np.ascontiguousarray(Qh[:, _HIDE_COLS[best_hide]]))
    if roots.size == 0:
        return roots
    swap = _HIDE_PERMS[best_hide]
    if swap is not None:
        roots = roots.copy()
        roots[:, [swap[0], swap[1]]] = roots[:, [swap[1], swap[0]]]
    if best_rot is not None:
        roots = roots @ best_rot.T
    return roots


def _polish_roots(C: np.ndarray, mons, roots: np.ndarray, iters: int = 3) -> np.ndarray:
    """Batched Gauss-Newton polish of roots on the system C over mons."""
    exp = np.asarray(mons)
    n_eq = C.shape[0]
    r = roots.astype(float).copy()
    for _ in range(iters):
        vals = monomial_values(exp, r)  # (k, m)
        f = vals @ C.T  # (k, n_eq)
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


def _dedupe(roots: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    kept: list[np.ndarray] = []
    for r in roots:
        if all(np.linalg.norm(r - k) > tol * (1.0 + np.linalg.norm(k)) for k in kept):
            kept.append(r)
    return np.array(kept) if kept else np.empty((0, 3))


# --------------------------------------------------------------------------
# hidden-variable elimination for the five-point system
# --------------------------------------------------------------------------

def _product_table(mons_a, mons_b, mons_out) -> np.ndarray:
    idx = {m: i for i, m in enumerate(mons_out)}
    T = np.zeros((len(mons_a), len(mons_b), len(mons_out)))
    for i, ea in enumerate(mons_a):
        for j, eb in enumerate(mons_b):
            key = (ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2])
            if key in idx:
                T[i, j, idx[key]] = 1.0
    return T


_T44 = _product_table(MONO4, MONO4, MONO10)    # deg1 * deg1 -> deg2
_T104 = _product_table(MONO10, MONO4, MONO20)  # deg2 * deg1 -> deg3

_TRIPLES = list(itertools.combinations(range(5), 3))
_PAIR_INDEX = {p: i for i, p in enumerate(itertools.combinations(range(5), 2))}


def hidden_variable_eliminate(equations: np.ndarray) -> PolySystem:
    """Ten cubic determinant constraints from M(w) [x y 1]^T = 0.

    ``equations`` is the (5, 3, 4) coefficient tensor of the 5x3 matrix
    M(w): entry [i, j] is affine-linear in w with coefficients over MONO4.
    Every 3x3 sub-determinant of M must vanish, giving 10 cubics in w.
    """
    M = np.asarray(equations, dtype=float)
    if M.shape != (5, 3, 4):
        raise ShapeMismatch(f"expected (5, 3, 4) coefficient tensor, got {M.shape}")

    pairs = list(_PAIR_INDEX)
    I = [p[0] for p in pairs]
    J = [p[1] for p in pairs]
    # 2x2 column-pair minors for every row pair: D2[p, c] over MONO10,
    # column pairs c: (1,2), (0,2), (0,1)
    D2 = np.empty((10, 3, 10))
    for c, (c1, c2) in enumerate([(1, 2), (0, 2), (0, 1)]):
        D2[:, c] = np.einsum("pa,pb,abm->pm", M[I, c1], M[J, c2], _T44) - np.einsum(
            "pa,pb,abm->pm", M[I, c2], M[J, c1], _T44
        )
    out = np.empty((10, 20))
    for r, (i, j, k) in enumerate(_TRIPLES):
        p = _PAIR_INDEX[(j, k)]
        det = (
            np.einsum("m,a,mat->t", D2[p, 0], M[i, 0], _T104)
            - np.einsum("m,a,mat->t", D2[p, 1], M[i, 1], _T104)
            + np.einsum("m,a,mat->t", D2[p, 2], M[i, 2], _T104)
        )
        out[r] = det
    return PolySystem(out, MONO20, n_vars=3, degree=3)


def solve_cubic_system(system: PolySystem | np.ndarray) -> list[np.ndarray]:
    """Real roots of ten cubics in three unknowns via the action matrix."""
    C = system.coeffs if isinstance(system, PolySystem) else np.asarray(system, float)
    if C.shape != (10, 20):
        raise ShapeMismatch(f"expected (10, 20) cubic system, got {C.shape}")
    scale = np.max(np.abs(C))
    if scale == 0.0:
        raise DegenerateSystem("zero cubic system")
    Cn = C / scale
    roots, cond = cubic_action_roots(np.ascontiguousarray(Cn))
    if cond > COND_LIMIT:
        raise DegenerateSystem(f"elimination block condition {cond:.2e}")
    if roots.size == 0:
        return []
    roots = _dedupe(roots)
    out = []
    for r in roots:
        vals = monomial_values(MONO20, r)
        rel = np.max(np.abs(Cn @ vals)) / max(1.0, np.max(np.abs(vals)))
        if rel <= 1e-6:
            out.append(r)
    return out


# --------------------------------------------------------------------------
# known-baseline system
# --------------------------------------------------------------------------

MONO35 = tuple(_grlex_block(4) + list(MONO20))
_T_20_4_35 = _product_table(MONO20, MONO4, MONO35)

_PAIRS6 = {p: i for i, p in enumerate(itertools.combinations(range(6), 2))}
_TRIPLES6 = {c: i for i, c in enumerate(itertools.combinations(range(6), 3))}
_QUADS6 = list(itertools.combinations(range(6), 4))
_PAIR6_I = np.array([p[0] for p in _PAIRS6])
_PAIR6_J = np.array([p[1] for p in _PAIRS6])
_TRIP6_FIRST = np.array([t[0] for t in _TRIPLES6])
_TRIP6_PAIR = np.array([_PAIRS6[(t[1], t[2])] for t in _TRIPLES6])
_QUAD6_ROW = np.array([[q[pos] for pos in range(4)] for q in _QUADS6])
_QUAD6_TRIP = np.array(
    [
        [_TRIPLES6[tuple(x for x in q if x != q[pos])] for pos in range(4)]
        for q in _QUADS6
    ]
)
_QUAD6_SIGN = np.array([(-1.0) ** (pos + 3) for pos in range(4)])

_ACTION_COMBO = np.array([0.41135, -0.27181, 0.87319])
_TNF_TABLES: dict = {}


def baseline_minors(M: np.ndarray) -> PolySystem:
    """Fifteen quartic 4x4 minors of the 6x4 M(w) with affine entries.

    Laid out over MONO35: the fifteen degree-4 monomials first, then
    MONO20, mirroring the ten-cubic layout so the same Gauss-Jordan +
    action-matrix extraction applies with a 15x15 elimination block and a
    20x20 action matrix.
    """
    D2 = np.empty((3, 15, 10))
    for c, (c1, c2) in enumerate([(1, 2), (0, 2), (0, 1)]):
        D2[c] = np.einsum(
            "pa,pb,abm->pm", M[_PAIR6_I, c1], M[_PAIR6_J, c2], _T44
        ) - np.einsum("pa,pb,abm->pm", M[_PAIR6_I, c2], M[_PAIR6_J, c1], _T44)
    D3 = (
        np.einsum("tq,ta,qam->tm", D2[0, _TRIP6_PAIR], M[_TRIP6_FIRST, 0], _T104)
        - np.einsum("tq,ta,qam->tm", D2[1, _TRIP6_PAIR], M[_TRIP6_FIRST, 1], _T104)
        + np.einsum("tq,ta,qam->tm", D2[2, _TRIP6_PAIR], M[_TRIP6_FIRST, 2], _T104)
    )
    terms = np.einsum(
        "qpm,qpa,maz->qpz", D3[_QUAD6_TRIP], M[:, 3][_QUAD6_ROW], _T_20_4_35
    )
    minors = np.einsum("qpz,p->qz", terms, _QUAD6_SIGN)
    return PolySystem(minors, MONO35, n_vars=3, degree=4)


def solve_baseline_system(equations: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Real (w, t) solutions of the known-baseline system.

    ``equations`` is the (6, 4, 4) coefficient tensor of M(w) with
    M(w) [t_x t_y t_z 1]^T = 0 and entries affine-linear in w over MONO4
    (the pull-through identity is applied before linearizing, exactly as
    in the zero-baseline case, which keeps the system bilinear).  The
    fifteen quartic minors are row-reduced against the degree-4 block and
    roots come out of a 20x20 action matrix; up to 20 solutions.
    """
    M = np.asarray(equations, dtype=float)
    if M.shape != (6, 4, 4):
        raise ShapeMismatch(f"expected (6, 4, 4) coefficient tensor, got {M.shape}")
    const_scale = np.max(np.abs(M[:, 3]))
    if const_scale < 1e-14 * max(np.max(np.abs(M)), 1e-300):
        raise DegenerateSystem("constant column vanishes (zero baseline)")

    system = baseline_minors(M)
    scale = np.max(np.abs(system.coeffs))
    if scale == 0.0:
        raise DegenerateSystem("all baseline minors vanish")
    Cn = system.coeffs / scale
    roots, cond = quartic_action_roots(np.ascontiguousarray(Cn))
    if cond > COND_LIMIT:
        raise DegenerateSystem(f"elimination block condition {cond:.2e}")
    if roots.size == 0:
        return []
    roots = _dedupe(roots, tol=1e-9)
    out = _baseline_backsub_polish(M, roots)
    kept: list[tuple[np.ndarray, np.ndarray]] = []
    for w, t in out:
        if all(
            np.linalg.norm(w - w2) + np.linalg.norm(t - t2)
            > 1e-6 * (1.0 + np.linalg.norm(w2) + np.linalg.norm(t2))
            for w2, t2 in kept
        ):
            kept.append((w, t))
    return kept


def _baseline_backsub_polish(M: np.ndarray, ws: np.ndarray, iters: int = 3):
    """Recover t from null(M(w)) and Newton-polish (w, t); batched.

    Candidates whose null vector has no affine translation part or whose
    polished residual stays above tolerance are dropped.
    """
    vals = monomial_values(MONO4, ws)
    Mw = np.einsum("eam,km->kea", M, vals)
    _, _, Vh = np.linalg.svd(Mw)
    nv = Vh[:, -1, :]
    keep = np.abs(nv[:, 3]) >= 1e-6 * np.linalg.norm(nv, axis=1)
    if not np.any(keep):
        return []
    ws = ws[keep].copy()
    ts = nv[keep, :3] / nv[keep, 3:]
    for _ in range(iters):
        vals = monomial_values(MONO4, ws)
        Mw = np.einsum("eam,km->kea", M, vals)
        tau = np.concatenate([ts, np.ones((len(ws), 1))], axis=1)
        f = np.einsum("kea,ka->ke", Mw, tau)
        J = np.empty((len(ws), 6, 6))
        J[:, :, 3:] = Mw[:, :, :3]
        for var in range(3):
            J[:, :, var] = np.einsum("ea,ka->ke", M[:, :, var], tau)
        JtJ = np.einsum("kev,kew->kvw", J, J) + 1e-14 * np.eye(6)
        Jtf = np.einsum("kev,ke->kv", J, f)
        try:
            step = np.linalg.solve(JtJ, Jtf[..., None])[..., 0]
        except np.linalg.LinAlgError:
            break
        ws = ws - step[:, :3]
        ts = ts - step[:, 3:]
    vals = monomial_values(MONO4, ws)
    Mw = np.einsum("eam,km->kea", M, vals)
    tau = np.concatenate([ts, np.ones((len(ws), 1))], axis=1)
    res = np.max(np.abs(np.einsum("kea,ka->ke", Mw, tau)), axis=1)
    scale = (
        np.max(np.abs(M))
        * np.maximum(1.0, np.max(np.abs(vals), axis=1))
        * np.maximum(1.0, np.max(np.abs(ts), axis=1))
    )
    good = res <= 1e-6 * scale
    return [(w, t) for w, t in zip(ws[good], ts[good])]


def _tnf_tables(base_deg: int, mult_deg: int):
    key = (base_deg, mult_deg)
    if key not in _TNF_TABLES:
        total = base_deg + mult_deg
        mons_total = tuple(monomials_upto(total))
        idx = {m: i for i, m in enumerate(mons_total)}
        mons_base = tuple(monomials_upto(base_deg))
        mults = tuple(monomials_upto(mult_deg))
        shift = np.array(
            [
                [idx[(e[0] + mu[0], e[1] + mu[1], e[2] + mu[2])] for e in mons_base]
                for mu in mults
            ]
        )
        lowdeg = np.array([i for i, m in enumerate(mons_total) if sum(m) <= total - 1])
        var_rows = np.array(
            [
                [idx[tuple(np.add(m, ev))] if sum(m) <= total - 1 else -1
                 for m in mons_total]
                for ev in np.eye(3, dtype=int)
            ]
        )
        special = (
            idx[(0, 0, 0)],
            [idx[(1, 0, 0)], idx[(0, 1, 0)], idx[(0, 0, 1)]],
            [idx[(2, 0, 0)], idx[(0, 2, 0)], idx[(0, 0, 2)]],
        )
        _TNF_TABLES[key] = (mons_total, shift, lowdeg, var_rows, special)
    return _TNF_TABLES[key]


def _tnf_action_candidates(
    polys: np.ndarray, mons, mult_deg: int, max_nullity: int = 150
) -> np.ndarray:
    """Candidate real roots via Macaulay null space + action matrix.

    ``polys`` are coefficient rows over ``mons`` (a full degree-d basis);
    the Macaulay matrix stacks all monomial multiples up to ``mult_deg``.
    Spurious directions (multiplicities, solutions at infinity) survive
    into the eigen decomposition and are removed by the caller's residual
    filter; genuine roots always appear because their evaluation vectors
    lie in the null space.
    """
    base_deg = int(sum(mons[0]))
    mons_total, shift, lowdeg, var_rows, special = _tnf_tables(base_deg, mult_deg)
    scales = np.max(np.abs(polys), axis=1)
    if np.any(scales == 0.0):
        raise DegenerateSystem("zero equation in polynomial system")
    P = polys / scales[:, None]
    Mac = np.zeros((len(P) * shift.shape[0], len(mons_total)))
    r = 0
    for row in P:
        for s in range(shift.shape[0]):
            Mac[r, shift[s]] = row
            r += 1
    try:
        _, sv, Vh = np.linalg.svd(Mac)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("SVD of Macaulay matrix failed") from exc
    rank = int(np.sum(sv > 1e-9 * sv[0]))
    nullity = Mac.shape[1] - rank
    if nullity < 1 or nullity > max_nullity:
        raise DegenerateSystem(f"unexpected Macaulay nullity {nullity}")
    N = Vh[rank:].T
    _, _, piv = scipy.linalg.qr(N[lowdeg].T, pivoting=True, mode="economic")
    Bidx = lowdeg[piv[:nullity]]
    NB = N[Bidx]
    NG = np.zeros_like(NB)
    for var in range(3):
        NG += _ACTION_COMBO[var] * N[var_rows[var][Bidx]]
    try:
        _, eigvecs = np.linalg.eig(np.linalg.solve(NB, NG))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("action-matrix eigensolve failed") from exc
    mf = N @ eigvecs
    i1, ilin, isq = special
    cands = []
    for c in range(mf.shape[1]):
        col = mf[:, c]
        if abs(col[i1]) < 1e-10 * np.max(np.abs(col)):
            continue
        m = col / col[i1]
        w = m[ilin]
        if np.max(np.abs(w.imag)) > REAL_IMAG_TOL * (1.0 + np.max(np.abs(w.real))):
            continue
        w = w.real
        if np.max(np.abs(m[isq].real - w * w)) > 1e-4 * (1.0 + np.max(w * w)):
            continue
        cands.append(w)
    if not cands:
        return np.empty((0, 3))
    return _dedupe(np.array(cands), tol=1e-6)


