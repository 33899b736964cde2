"""The class (C) companion R x| V of a triangulable algebra, and the class (C) membership check."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from . import linalg as la
from .cartan_split import (
    ActionSplit,
    CartanData,
    build_actions,
    cartan_subalgebra,
    is_semisimple_real,
)
from .errors import LieAlgebraError
from .lie_core import (
    LieAlgebra,
    Subspace,
    bracket_span,
    exponential_radical,
    is_ideal,
    is_subalgebra,
    validate,
    vector_label,
)


@dataclass(frozen=True)
class ReducedPair:
    """Original algebra g and its companion g1 on the basis (v-lifts, then r basis).

    In g1 the r basis occupies the last ``dim r`` coordinates; ``r_embedding[i]``
    is the g-vector of the i-th of them.
    """
    g: LieAlgebra
    g1: LieAlgebra
    cartan: CartanData
    split: ActionSplit
    r_embedding: tuple
    v_basis: tuple

    @property
    def dim_v(self) -> int:
        return len(self.v_basis)

    @property
    def dim_r(self) -> int:
        return len(self.r_embedding)

    def r_in_g1(self) -> Subspace:
        n = self.g1.dim
        return Subspace.span(n, [la.unit(n, self.dim_v + i) for i in range(self.dim_r)])

    def v_in_g1(self) -> Subspace:
        n = self.g1.dim
        return Subspace.span(n, [la.unit(n, i) for i in range(self.dim_v)])

    def provenance(self) -> dict:
        return {
            "regular_element": [la.fmt(x) for x in self.cartan.regular_element],
            "cartan_basis": la.matrix_to_strings(self.cartan.h.basis),
            "w_basis": la.matrix_to_strings(self.cartan.w.basis),
            "v_basis": la.matrix_to_strings(self.v_basis),
            "r_basis": la.matrix_to_strings(self.r_embedding),
            "g1_labels": list(self.g1.labels),
            "actions": self.split.to_json(),
            "discarded_nilpotent_nonzero": [not la.is_zero(x) for x in self.split.N],
        }


def h_mod_w_coords(cd: CartanData, x: Sequence) -> tuple:
    """v-coordinates of an element of h, projected along w."""
    coords = la.solve_coords(cd.v.basis + cd.w.basis, la.vec(x))
    if coords is None:
        raise LieAlgebraError("vector does not lie in the Cartan subalgebra")
    return coords[:cd.v.dim]


def build_class_C(g: LieAlgebra, cd: CartanData, split: ActionSplit) -> ReducedPair:
    m, k = cd.v.dim, cd.r.dim
    n = m + k
    c = [[[la.ZERO] * n for _ in range(n)] for _ in range(n)]
    vb, rb = cd.v.basis, cd.r.basis
    for a, b in itertools.combinations(range(m), 2):
        coords = h_mod_w_coords(cd, g.bracket(vb[a], vb[b]))
        for t, val in enumerate(coords):
            c[a][b][t] = val
            c[b][a][t] = -val
    for a in range(m):
        s = split.S[a]
        for j in range(k):
            for i in range(k):
                c[a][m + j][m + i] = s[i][j]
                c[m + j][a][m + i] = -s[i][j]
    for i, j in itertools.combinations(range(k), 2):
        coords = la.solve_coords(rb, g.bracket(rb[i], rb[j]))
        for t, val in enumerate(coords):
            c[m + i][m + j][m + t] = val
            c[m + j][m + i][m + t] = -val
    labels = [vector_label(g.labels, x) for x in vb] + [vector_label(g.labels, x) for x in rb]
    if len(set(labels)) < len(labels):
        labels = [f"V{i}" for i in range(m)] + [f"R{i}" for i in range(k)]
    g1 = validate(c, tuple(labels))
    pair = ReducedPair(g, g1, cd, split, rb, vb)
    if exponential_radical(g1) != pair.r_in_g1():
        raise LieAlgebraError("r is not the exponential radical of the companion algebra")
    return pair


def reduce(g: LieAlgebra, seed: int = 0) -> ReducedPair:
    cd = cartan_subalgebra(g, seed)
    return build_class_C(g, cd, build_actions(cd, g))


@dataclass(frozen=True)
class ClassCVerdict:
    semidirect: bool
    semisimple_real: bool
    commutator_centralizes: bool
    failures: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return self.semidirect and self.semisimple_real and self.commutator_centralizes

    def to_json(self) -> dict:
        return {"passed": self.passed, "semidirect": self.semidirect,
                "semisimple_real": self.semisimple_real,
                "commutator_centralizes": self.commutator_centralizes,
                "failures": list(self.failures)}


def class_C_check(g1: LieAlgebra, r: Subspace, h: Subspace) -> ClassCVerdict:
    """Check g1 = r x| h with an R-diagonalizable action on r and [h, h] centralizing r."""
    failures = []
    semidirect = (is_ideal(g1, r) and is_subalgebra(g1, h) and r.intersect(h).dim == 0
                  and (r + h).dim == g1.dim)
    if not semidirect:
        failures.append("(1) not a semidirect sum r x| h")
    semisimple = True
    if r.dim:
        for xi in h.basis:
            try:
                op = la.restrict(g1.ad(xi), r.basis)
            except ValueError:
                semisimple = False
                break
            if not is_semisimple_real(op):
                semisimple = False
                break
    if not semisimple:
        failures.append("(2) action of h on r is not R-diagonalizable")
    hh = bracket_span(g1, h, h)
    centralizes = all(la.is_zero_vec(g1.bracket(x, y)) for x in hh.basis for y in r.basis)
    if not centralizes:
        failures.append("(3) [h, h] does not centralize r")
    return ClassCVerdict(semidirect, semisimple, centralizes, tuple(failures))


def check_pair(pair: ReducedPair) -> ClassCVerdict:
    return class_C_check(pair.g1, pair.r_in_g1(), pair.v_in_g1())


def equal_up_to_permutation(a: LieAlgebra, b: LieAlgebra) -> bool:
    if a.dim != b.dim:
        return False
    n = a.dim
    for perm in itertools.permutations(range(n)):
        if all(a.c[i][j][k] == b.c[perm[i]][perm[j]][perm[k]]
               for i in range(n) for j in range(n) for k in range(n)):
            return True
    return False
