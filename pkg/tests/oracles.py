"""Independent reference computations, written against sympy rather than the package's linalg."""
from __future__ import annotations

import itertools

import numpy as np
import sympy
from scipy.linalg import expm


def structure_tensor(g):
    n = g.dim
    return [[[sympy.Rational(g.c[i][j][k].numerator, g.c[i][j][k].denominator)
              for k in range(n)] for j in range(n)] for i in range(n)]


def bracket(c, x, y):
    n = len(c)
    return [sum(c[i][j][k] * x[i] * y[j] for i in range(n) for j in range(n)) for k in range(n)]


def span_rows(vectors, n):
    """Canonical RREF rows of the span, as a sympy Matrix with zero rows dropped."""
    if not vectors:
        return sympy.zeros(0, n)
    m = sympy.Matrix(vectors)
    r, piv = m.rref()
    return r[:len(piv), :]


def same_span(rows_a, rows_b) -> bool:
    a, b = sympy.Matrix(rows_a), sympy.Matrix(rows_b)
    if a.rows != b.rows:
        return False
    if a.rows == 0:
        return True
    return a.rank() == b.rank() == sympy.Matrix.vstack(a, b).rank()


def brute_lower_central_series(g):
    """Iterate span{[e_a, v]} exactly dim+1 times, keeping every term."""
    c = structure_tensor(g)
    n = g.dim
    basis = [list(r) for r in sympy.eye(n).tolist()]
    terms = [span_rows(basis, n)]
    for _ in range(n + 1):
        cur = terms[-1]
        vecs = [bracket(c, e, list(cur.row(i))) for e in basis for i in range(cur.rows)]
        vecs = [v for v in vecs if any(x != 0 for x in v)]
        terms.append(span_rows(vecs, n))
    return terms


def brute_series_until_stable(g):
    """The brute-force series truncated where a term repeats (or hits zero)."""
    terms = brute_lower_central_series(g)
    out = [terms[0]]
    for t in terms[1:]:
        out.append(t)
        if t.rows == 0 or t.rows == out[-2].rows:
            break
    return out


def brute_exponential_radical(g):
    """The last term after dim+1 steps, which equals the stable term."""
    return brute_lower_central_series(g)[-1]


def is_ideal_oracle(g, rows) -> bool:
    c = structure_tensor(g)
    n = g.dim
    rows = [list(rows.row(i)) for i in range(rows.rows)] if hasattr(rows, "rows") else rows
    if not rows:
        return True
    base = sympy.Matrix(rows)
    for e in sympy.eye(n).tolist():
        for v in rows:
            w = bracket(c, e, v)
            if sympy.Matrix.vstack(base, sympy.Matrix([w])).rank() != base.rank():
                return False
    return True


def float_matrix(m):
    return np.array([[float(x) for x in row] for row in m], dtype=float)


def expm_oracle(m) -> np.ndarray:
    return expm(np.asarray(m, dtype=float))


def jordan_semisimple_oracle(m):
    """Semisimple part of a rational matrix via sympy's Jordan form."""
    M = sympy.Matrix(m)
    P, J = M.jordan_form()
    D = sympy.diag(*[J[i, i] for i in range(J.rows)])
    return sympy.simplify(P * D * P.inv())


def heis3_product(x, y):
    a, b, c = x
    a2, b2, c2 = y
    return [a + a2, b + b2, c + c2 + (a * b2 - a2 * b) / 2]


def jacobi_ok(c) -> bool:
    n = len(c)
    for i, j, k in itertools.product(range(n), repeat=3):
        ei, ej, ek = (sympy.eye(n).row(t).tolist()[0] for t in (i, j, k))
        s = [x + y + z for x, y, z in zip(bracket(c, ei, bracket(c, ej, ek)),
                                          bracket(c, ej, bracket(c, ek, ei)),
                                          bracket(c, ek, bracket(c, ei, ej)))]
        if any(v != 0 for v in s):
            return False
    return True
