"""Named algebras used throughout the tests and the CLI, plus a seeded random corpus."""
from __future__ import annotations

import random
from fractions import Fraction

from . import linalg as la
from .lie_core import LieAlgebra, Subspace, from_brackets, validate


def abelian(n: int) -> LieAlgebra:
    return from_brackets([f"A{i}" for i in range(n)], {})


def heis3() -> LieAlgebra:
    return from_brackets("XYZ", {("X", "Y"): {"Z": 1}})


def gJ() -> LieAlgebra:
    """T acts on the plane (X, Y) by a Jordan block."""
    return from_brackets("TXY", {("T", "X"): {"X": 1}, ("T", "Y"): {"X": 1, "Y": 1}})


def g4() -> LieAlgebra:
    """R x Heisenberg with T acting diagonally by weights 1, 1, 2."""
    return from_brackets("TXYZ", {("T", "X"): {"X": 1}, ("T", "Y"): {"Y": 1},
                                  ("X", "Y"): {"Z": 1}, ("T", "Z"): {"Z": 2}})


def g5() -> LieAlgebra:
    """Cartan subalgebra is Heisenberg and meets the radical in its center.

    [T1, T2] = Z, [X, Y] = Z, [T1, X] = X, [T1, Y] = -Y, so the V-part is not a
    subgroup and the correction term delta(v^-1 v') is nontrivial.
    """
    return from_brackets(["T1", "T2", "X", "Y", "Z"],
                         {("T1", "T2"): {"Z": 1}, ("X", "Y"): {"Z": 1},
                          ("T1", "X"): {"X": 1}, ("T1", "Y"): {"Y": -1}})


def gJ_heis() -> LieAlgebra:
    """Jordan block on a Heisenberg radical: ad(T) = [[1,1,0],[0,1,0],[0,0,2]] on (X, Y, Z)."""
    return from_brackets(["T", "X", "Y", "Z"],
                         {("T", "X"): {"X": 1}, ("T", "Y"): {"X": 1, "Y": 1},
                          ("T", "Z"): {"Z": 2}, ("X", "Y"): {"Z": 1}})


def filiform4() -> LieAlgebra:
    return from_brackets(["X1", "X2", "X3", "X4"],
                         {("X1", "X2"): {"X3": 1}, ("X1", "X3"): {"X4": 1}})


def nonhomogeneous4() -> LieAlgebra:
    """[X1,X2]=X3, [X1,X3]=X4, [X2,X3]=X4."""
    return from_brackets(["X1", "X2", "X3", "X4"],
                         {("X1", "X2"): {"X3": 1}, ("X1", "X3"): {"X4": 1},
                          ("X2", "X3"): {"X4": 1}})


def filiform5_nongraded() -> LieAlgebra:
    """[X1,Xi]=X(i+1) plus [X2,X3]=X5, which drops out of the associated graded."""
    return from_brackets(["X1", "X2", "X3", "X4", "X5"],
                         {("X1", "X2"): {"X3": 1}, ("X1", "X3"): {"X4": 1},
                          ("X1", "X4"): {"X5": 1}, ("X2", "X3"): {"X5": 1}})


def e2() -> LieAlgebra:
    """Rotation action: [T, X] = Y, [T, Y] = -X.  Solvable but not triangulable."""
    return from_brackets("TXY", {("T", "X"): {"Y": 1}, ("T", "Y"): {"X": -1}})


def sl2() -> LieAlgebra:
    return from_brackets("HEF", {("H", "E"): {"E": 2}, ("H", "F"): {"F": -2},
                                 ("E", "F"): {"H": 1}})


PRESETS = {
    "abelian2": lambda: abelian(2),
    "abelian3": lambda: abelian(3),
    "heis3": heis3,
    "gJ": gJ,
    "g4": g4,
    "g5": g5,
    "gJ_heis": gJ_heis,
    "filiform4": filiform4,
    "nonhomogeneous4": nonhomogeneous4,
    "filiform5_nongraded": filiform5_nongraded,
    "e2": e2,
    "sl2": sl2,
}


def preset(name: str) -> LieAlgebra:
    return PRESETS[name]()


# -- random triangulable corpus -------------------------------------------------

def _matrix_bracket(a, b):
    return la.commutator(a, b)


def _flatten(m):
    return tuple(x for r in m for x in r)


def random_triangulable(seed: int, max_dim: int = 6, size: int | None = None):
    """Seeded random Lie algebra of upper triangular rational matrices.

    Returns ``(algebra, matrices)`` where ``matrices[i]`` realizes basis vector i.
    Diagonal entries are rational, so every adjoint eigenvalue is rational.
    """
    rng = random.Random(seed)
    while True:
        n = size or rng.choice([3, 3, 4])
        gens = []
        for _ in range(rng.choice([2, 2, 3])):
            m = [[Fraction(0)] * n for _ in range(n)]
            for i in range(n):
                for j in range(i, n):
                    if rng.random() < 0.55:
                        m[i][j] = Fraction(rng.randint(-2, 2))
            gens.append(tuple(tuple(r) for r in m))
        basis_rows, _ = la.rref([_flatten(g) for g in gens])
        mats = [tuple(tuple(r[i * n:(i + 1) * n]) for i in range(n)) for r in basis_rows]
        grew = True
        while grew and len(mats) <= max_dim:
            new = [_matrix_bracket(a, b) for a in mats for b in mats]
            rows, _ = la.rref([_flatten(m) for m in mats + new])
            grew = len(rows) > len(mats)
            mats = [tuple(tuple(r[i * n:(i + 1) * n]) for i in range(n)) for r in rows]
        if not 2 <= len(mats) <= max_dim:
            continue
        flat = [_flatten(m) for m in mats]
        d = len(mats)
        c = [[[Fraction(0)] * d for _ in range(d)] for _ in range(d)]
        for a in range(d):
            for b in range(d):
                coords = la.solve_coords(flat, _flatten(_matrix_bracket(mats[a], mats[b])))
                for k, v in enumerate(coords):
                    c[a][b][k] = v
        g = validate(c, tuple(f"M{i}" for i in range(d)))
        return g, tuple(mats)


def random_corpus(seed: int = 2024, count: int = 20, max_dim: int = 6):
    """Deterministic list of (algebra, matrices) pairs."""
    return [random_triangulable(seed * 1000 + i, max_dim) for i in range(count)]


def matrix_span(matrices, n) -> Subspace:
    return Subspace.span(n, [_flatten(m) for m in matrices])
