"""Static index tables shared by the python and compiled kernels.

Monomial orderings are graded-lex, highest degree first (see
:mod:`rsrig.polysolve`).  Action maps encode multiplication of a quotient
basis monomial by a variable: entries >= 0 index the eliminated
top-degree block, entries < 0 encode a basis index as -(index + 1).
"""

import itertools

import numpy as np


def _grlex_block(d):
    out = [e for e in itertools.product(range(d, -1, -1), repeat=3) if sum(e) == d]
    out.sort(key=lambda e: tuple(-x for x in e))
    return out


def _monomials_upto(d):
    out = []
    for k in range(d, -1, -1):
        out.extend(_grlex_block(k))
    return out


def _action_map(top_deg):
    top = _grlex_block(top_deg)
    basis = _monomials_upto(top_deg - 1)
    top_idx = {m: i for i, m in enumerate(top)}
    basis_idx = {m: i for i, m in enumerate(basis)}
    out = np.empty((3, len(basis)), dtype=np.int64)
    for var in range(3):
        ev = tuple(int(var == i) for i in range(3))
        for i, m in enumerate(basis):
            prod = (m[0] + ev[0], m[1] + ev[1], m[2] + ev[2])
            if sum(prod) == top_deg:
                out[var, i] = top_idx[prod]
            else:
                out[var, i] = -(basis_idx[prod] + 1)
    return out


CUBIC_ACTION_MAP = _action_map(3)      # 10-monomial basis, 10 cubic leaders
QUARTIC_ACTION_MAP = _action_map(4)    # 20-monomial basis, 15 quartic leaders

# read-off positions in the quotient bases: [1, x, y, z]
CUBIC_READOFF = np.array([9, 6, 7, 8], dtype=np.int64)
QUARTIC_READOFF = np.array([19, 16, 17, 18], dtype=np.int64)

ACTION_COMBO = np.array([0.37287, -0.61432, 0.84103])

# exponent tables for monomial evaluation / polish Jacobians
EXP10 = np.array(_monomials_upto(2), dtype=np.int64)
EXP20 = np.array(_grlex_block(3) + _monomials_upto(2), dtype=np.int64)
EXP35 = np.array(_grlex_block(4) + _grlex_block(3) + _monomials_upto(2), dtype=np.int64)
