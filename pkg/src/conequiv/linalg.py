"""Exact linear algebra over the rationals.

Vectors are tuples of ``Fraction``; matrices are tuples of row tuples.
Linear operators act on column vectors: ``M[k][j]`` is the coefficient of
``e_k`` in the image of ``e_j``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import sympy

Vector = tuple
Matrix = tuple

ZERO = Fraction(0)
ONE = Fraction(1)


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def vec(xs: Iterable) -> Vector:
    return tuple(frac(x) for x in xs)


def mat(rows: Iterable[Iterable]) -> Matrix:
    return tuple(vec(r) for r in rows)


def zeros(n: int, m: int | None = None) -> Matrix:
    m = n if m is None else m
    return tuple((ZERO,) * m for _ in range(n))


def identity(n: int) -> Matrix:
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def unit(n: int, i: int) -> Vector:
    return tuple(ONE if k == i else ZERO for k in range(n))


def is_zero_vec(v: Sequence) -> bool:
    return all(x == 0 for x in v)


def is_zero(m: Matrix) -> bool:
    return all(is_zero_vec(r) for r in m)


def add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def scale(a: Matrix, s) -> Matrix:
    return tuple(tuple(s * x for x in r) for r in a)


def vadd(a: Vector, b: Vector) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Vector, b: Vector) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def vscale(a: Vector, s) -> Vector:
    return tuple(s * x for x in a)


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a)) if a else ()


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(sum((x * y for x, y in zip(r, c)), ZERO) for c in bt) for r in a)


def matvec(a: Matrix, v: Vector) -> Vector:
    return tuple(sum((x * y for x, y in zip(r, v)), ZERO) for r in a)


def commutator(a: Matrix, b: Matrix) -> Matrix:
    return sub(matmul(a, b), matmul(b, a))


def matpow(a: Matrix, k: int) -> Matrix:
    result = identity(len(a))
    base = a
    while k:
        if k & 1:
            result = matmul(result, base)
        base = matmul(base, base)
        k >>= 1
    return result


def from_columns(cols: Sequence[Vector]) -> Matrix:
    return transpose(tuple(cols))


def rref(rows: Iterable[Sequence]) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form with zero rows dropped; returns (rows, pivots)."""
    m = [list(vec(r)) for r in rows]
    if not m:
        return (), ()
    n_cols = len(m[0])
    pivots = []
    piv_r = 0
    for c in range(n_cols):
        for i in range(piv_r, len(m)):
            if m[i][c] != 0:
                break
        else:
            continue
        m[piv_r], m[i] = m[i], m[piv_r]
        p = m[piv_r][c]
        if p != 1:
            m[piv_r] = [x / p for x in m[piv_r]]
        for r in range(len(m)):
            if r != piv_r and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[piv_r])]
        pivots.append(c)
        piv_r += 1
        if piv_r == len(m):
            break
    return tuple(tuple(r) for r in m[:piv_r]), tuple(pivots)


def rank(rows: Iterable[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(a: Matrix, n_cols: int | None = None) -> tuple[Vector, ...]:
    """Basis of {x : a x = 0}, one vector per free column, in rref-canonical form."""
    if n_cols is None:
        n_cols = len(a[0]) if a else 0
    r, pivots = rref(a) if a else ((), ())
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for f in free:
        x = [ZERO] * n_cols
        x[f] = ONE
        for row, p in zip(r, pivots):
            x[p] = -row[f]
        basis.append(tuple(x))
    return tuple(basis)


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [list(r) + list(e) for r, e in zip(a, identity(n))]
    red, pivots = rref(aug)
    if tuple(pivots[:n]) != tuple(range(n)) or len(red) < n:
        raise ZeroDivisionError("singular matrix")
    return tuple(tuple(r[n:]) for r in red)


def coords_in(basis_rref: Matrix, pivots: Sequence[int], v: Vector) -> Vector | None:
    """Coefficients of v on an rref basis, or None if v is not in the span."""
    c = tuple(v[p] for p in pivots)
    recon = [ZERO] * len(v)
    for ci, row in zip(c, basis_rref):
        if ci:
            for k, x in enumerate(row):
                if x:
                    recon[k] += ci * x
    if any(x != y for x, y in zip(recon, v)):
        return None
    return c


def solve_coords(basis: Sequence[Vector], v: Vector) -> Vector | None:
    """Coefficients c with v = sum c_i basis_i for an arbitrary independent basis."""
    if not basis:
        return () if is_zero_vec(v) else None
    cols = transpose(tuple(basis))
    aug = [list(r) + [x] for r, x in zip(cols, v)]
    red, pivots = rref(aug)
    k = len(basis)
    if k in pivots:
        return None
    sol = [ZERO] * k
    for row, p in zip(red, pivots):
        sol[p] = row[k]
    return tuple(sol)


def restrict(op: Matrix, basis: Sequence[Vector]) -> Matrix:
    """Matrix of an operator on an invariant subspace, in the given basis."""
    cols = []
    for b in basis:
        c = solve_coords(basis, matvec(op, b))
        if c is None:
            raise ValueError("subspace is not invariant under the operator")
        cols.append(c)
    return from_columns(cols) if cols else ()


# -- polynomials (via sympy, exact over QQ) ---------------------------------

_lam = sympy.Symbol("lam")


def to_sympy(a: Matrix) -> sympy.Matrix:
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in a])


def from_sympy(m: sympy.Matrix) -> Matrix:
    return tuple(tuple(Fraction(int(sympy.fraction(x)[0]), int(sympy.fraction(x)[1]))
                       for x in m.row(i)) for i in range(m.rows))


def charpoly(a: Matrix) -> sympy.Poly:
    n = len(a)
    if n == 0:
        return sympy.Poly(1, _lam, domain="QQ")
    return sympy.Poly(to_sympy(a).charpoly(_lam).as_expr(), _lam, domain="QQ")


def poly_coeffs(p: sympy.Poly) -> list[Fraction]:
    """Coefficients, highest degree first."""
    return [Fraction(int(c.p), int(c.q)) for c in p.all_coeffs()]


def eval_poly_at_matrix(p: sympy.Poly, a: Matrix) -> Matrix:
    n = len(a)
    result = zeros(n)
    for c in poly_coeffs(p):
        result = add(matmul(result, a), scale(identity(n), c))
    return result


def squarefree_part(p: sympy.Poly) -> sympy.Poly:
    g = sympy.gcd(p, p.diff(_lam))
    return sympy.Poly(sympy.quo(p, g), _lam, domain="QQ").monic()


def real_root_count(p: sympy.Poly) -> int:
    return int(p.count_roots()) if p.degree() > 0 else 0


def rational_roots(p: sympy.Poly) -> list[Fraction]:
    """Distinct rational roots, ascending."""
    roots = []
    for fac, _ in p.factor_list()[1]:
        if fac.degree() == 1:
            a, b = poly_coeffs(fac)
            roots.append(-b / a)
    return sorted(set(roots))


def irreducible_factors(p: sympy.Poly) -> list[sympy.Poly]:
    """Monic irreducible factors over QQ, deduplicated, in a deterministic order."""
    facs = [sympy.Poly(f, _lam, domain="QQ").monic() for f, _ in p.factor_list()[1]]
    uniq = {tuple(poly_coeffs(f)): f for f in facs}
    return [uniq[k] for k in sorted(uniq, key=lambda c: (len(c), c))]


def fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def matrix_to_strings(a: Matrix) -> list[list[str]]:
    return [[fmt(x) for x in r] for r in a]


def to_float(a: Matrix):
    import numpy as np
    if not a:
        return np.zeros((0, 0))
    return np.array([[float(x) for x in r] for r in a], dtype=float)
