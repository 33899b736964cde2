"""Cartan subalgebra, W = H n R, complement V, and the semisimple/nilpotent split of the H-action on r."""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg as la
from .errors import BoundViolated, LieAlgebraError, NonRealSpectrum, RegularElementNotFound
from .lie_core import (
    LieAlgebra,
    Subspace,
    exponential_radical,
    is_nilpotent,
    subalgebra,
    triangulability_check,
)


@dataclass(frozen=True)
class CartanData:
    h: Subspace
    w: Subspace
    v: Subspace
    r: Subspace
    regular_element: tuple = ()

    @property
    def v_basis(self) -> tuple:
        return self.v.basis


def generalized_nullspace(m: la.Matrix) -> tuple:
    n = len(m)
    if n == 0:
        return ()
    # clear denominators so the power is taken in integer arithmetic
    scale = math.lcm(*(x.denominator for row in m for x in row))
    a = [[int(x * scale) for x in row] for row in m]
    p = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(n):
        p = [[sum(p[i][k] * a[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    return la.nullspace(la.mat(p), n)


def _candidates(n: int, max_norm: int):
    """Integer vectors ordered by (max-norm, l1-norm, descending lexicographic)."""
    for norm in range(1, max_norm + 1):
        shell = [v for v in itertools.product(range(-norm, norm + 1), repeat=n)
                 if max(abs(x) for x in v) == norm]
        shell.sort(key=lambda v: (sum(abs(x) for x in v), tuple(-x for x in v)))
        yield norm, shell


def normalizer(g: LieAlgebra, sub: Subspace) -> Subspace:
    """{x : [x, sub] in sub}, computed as a kernel."""
    n = g.dim
    if sub.dim == 0:
        return Subspace.full(n)
    free = sub.free_indices()

    def residue(x):
        x = list(x)
        for row, p in zip(sub.basis, sub.pivots):
            f = x[p]
            if f:
                x = [a - f * b for a, b in zip(x, row)]
        return [x[i] for i in free]

    rows = []
    for b in sub.basis:
        cols = [residue(g.bracket(la.unit(n, a), b)) for a in range(n)]
        rows.extend(la.transpose(tuple(tuple(c) for c in cols)))
    rows = [r for r in rows if r]
    if not rows:
        return Subspace.full(n)
    return Subspace.span(n, la.nullspace(tuple(rows), n))


def cartan_subalgebra(g: LieAlgebra, seed: int = 0, max_norm: int = 2) -> CartanData:
    """Fitting null component of ad(x) for a regular element x.

    Candidates are scanned shell by shell; within a shell the ones with minimal
    generalized-nullspace dimension are tried in canonical order (seed 0) or in a
    seeded shuffle, and the first whose null component is nilpotent and
    self-normalizing is accepted.
    """
    triangulability_check(g)
    r = exponential_radical(g)
    n = g.dim

    def accept(x, null):
        h = Subspace.span(n, null)
        if is_nilpotent(subalgebra(g, h)) and normalizer(g, h) == h:
            w = h.intersect(r)
            v = Subspace.span(n, h.complement_in(w))
            return CartanData(h, w, v, r, tuple(x))
        return None

    # rank of g: the generalized nullspace of a generic element is the smallest possible
    generic = la.vec(random.Random(n).randint(-97, 97) for _ in range(n))
    floor_dim = len(generalized_nullspace(g.ad(generic)))
    for _, shell in _candidates(n, max_norm):
        scored = []
        for cand in shell:
            x = la.vec(cand)
            null = generalized_nullspace(g.ad(x))
            if not seed and len(null) == floor_dim:
                found = accept(x, null)
                if found is not None:
                    return found
            scored.append((len(null), x, null))
        best = min(s[0] for s in scored)
        tied = [s for s in scored if s[0] == best]
        if seed:
            random.Random(seed).shuffle(tied)
        for _, x, null in tied:
            found = accept(x, null)
            if found is not None:
                return found
    raise RegularElementNotFound(f"no regular element with max-norm <= {max_norm}")


# -- Jordan split ----------------------------------------------------------------

def jordan_split(m: la.Matrix):
    """Additive Jordan decomposition m = S + N over QQ, with real spectrum required.

    S is obtained by Newton iteration on the squarefree part f of the
    characteristic polynomial: S <- S - f(S) f'(S)^{-1}, which terminates in
    exact arithmetic once f(S) = 0.
    """
    m = la.mat(m)
    n = len(m)
    if n == 0:
        return (), ()
    p = la.charpoly(m)
    f = la.squarefree_part(p)
    if la.real_root_count(f) != f.degree():
        raise NonRealSpectrum("characteristic polynomial has non-real roots")
    df = f.diff(f.gens[0])
    s = m
    for _ in range(2 * n + 2):
        fs = la.eval_poly_at_matrix(f, s)
        if la.is_zero(fs):
            break
        s = la.sub(s, la.matmul(fs, la.inverse(la.eval_poly_at_matrix(df, s))))
    else:
        raise LieAlgebraError("Newton iteration for the semisimple part did not terminate")
    nil = la.sub(m, s)
    if la.commutator(s, nil) != la.zeros(n) or not la.is_zero(la.matpow(nil, n)):
        raise LieAlgebraError("Jordan split postcondition failed")
    return s, nil


def is_semisimple_real(m: la.Matrix) -> bool:
    if len(m) == 0:
        return True
    f = la.squarefree_part(la.charpoly(m))
    return la.is_zero(la.eval_poly_at_matrix(f, m)) and la.real_root_count(f) == f.degree()


# -- actions ---------------------------------------------------------------------

def action_matrix(g: LieAlgebra, r: Subspace, xi: Sequence) -> la.Matrix:
    """ad(xi) restricted to r, in the echelon basis of r."""
    return la.restrict(g.ad(la.vec(xi)), r.basis)


@dataclass(frozen=True)
class WeightBlock:
    basis: tuple             # vectors in r-coordinates
    factors: tuple           # per v-generator: monic irreducible factor coefficients
    eigenvalues: tuple       # per v-generator: Fraction, or tuple of float roots

    @property
    def rational(self) -> bool:
        return all(isinstance(e, Fraction) for e in self.eigenvalues)


@dataclass(frozen=True)
class ActionSplit:
    v_basis: tuple
    w_basis: tuple
    r_basis: tuple
    alpha: tuple
    S: tuple
    N: tuple
    w_S: tuple
    blocks: tuple

    @property
    def dim_r(self) -> int:
        return len(self.r_basis)

    def semisimple(self, nu: Sequence) -> la.Matrix:
        k = self.dim_r
        out = la.zeros(k)
        for c, s in zip(nu, self.S):
            out = la.add(out, la.scale(s, la.frac(c)))
        return out

    def nilpotent(self, nu: Sequence) -> la.Matrix:
        k = self.dim_r
        out = la.zeros(k)
        for c, s in zip(nu, self.N):
            out = la.add(out, la.scale(s, la.frac(c)))
        return out

    def eigenbasis(self):
        """(P, weights) with S_i = P diag(weights[:, i]) P^{-1}, or None if a weight is irrational."""
        if not all(b.rational for b in self.blocks):
            return None
        cols, weights = [], []
        for b in self.blocks:
            for vec in b.basis:
                cols.append(vec)
                weights.append(tuple(b.eigenvalues))
        return la.from_columns(cols), tuple(weights)

    def to_json(self) -> dict:
        return {
            "r_basis": la.matrix_to_strings(self.r_basis),
            "v_basis": la.matrix_to_strings(self.v_basis),
            "w_basis": la.matrix_to_strings(self.w_basis),
            "alpha": [la.matrix_to_strings(a) for a in self.alpha],
            "semisimple": [la.matrix_to_strings(s) for s in self.S],
            "nilpotent": [la.matrix_to_strings(x) for x in self.N],
            "weights": [
                {"basis": la.matrix_to_strings(b.basis),
                 "eigenvalues": [la.fmt(e) if isinstance(e, Fraction) else [float(x) for x in e]
                                 for e in b.eigenvalues]}
                for b in self.blocks
            ],
        }


def _split_block(basis, op, dim):
    """Split an op-invariant subspace (rows in r-coords) by irreducible factors of op's min poly."""
    local = la.restrict(op, basis)
    f = la.squarefree_part(la.charpoly(local))
    out = []
    for fac in la.irreducible_factors(f):
        ker = la.nullspace(la.eval_poly_at_matrix(fac, local), len(local))
        vecs = [tuple(sum((a * b[i] for a, b in zip(coef, basis)), la.ZERO) for i in range(dim))
                for coef in ker]
        rows, _ = la.rref(vecs)
        coeffs = tuple(la.poly_coeffs(fac))
        if fac.degree() == 1:
            eig = -coeffs[1]
        else:
            eig = tuple(sorted(float(x) for x in np.roots([float(c) for c in coeffs]).real))
        out.append((rows, coeffs, eig))
    return out


def weight_blocks(S: Sequence[la.Matrix], dim: int) -> tuple:
    """Common characteristic subspaces of commuting semisimple matrices."""
    if dim == 0:
        return ()
    blocks = [(la.identity(dim), (), ())]
    for op in S:
        refined = []
        for basis, facs, eigs in blocks:
            for rows, coeffs, eig in _split_block(basis, op, dim):
                refined.append((rows, facs + (coeffs,), eigs + (eig,)))
        blocks = refined
    return tuple(WeightBlock(b, f, e) for b, f, e in blocks)


def build_actions(cd: CartanData, g: LieAlgebra) -> ActionSplit:
    r = cd.r
    alpha, S, N = [], [], []
    for xi in cd.v.basis:
        a = action_matrix(g, r, xi)
        s, nil = jordan_split(a)
        alpha.append(a)
        S.append(s)
        N.append(nil)
    w_S = []
    for xi in cd.w.basis:
        s, _ = jordan_split(action_matrix(g, r, xi))
        if not la.is_zero(s):
            raise LieAlgebraError("semisimple part does not vanish on W")
        w_S.append(s)
    for a, b in itertools.combinations(S + N, 2):
        if not la.is_zero(la.commutator(a, b)):
            raise LieAlgebraError("semisimple/nilpotent parts do not commute pairwise")
    blocks = weight_blocks(S, r.dim)
    return ActionSplit(cd.v.basis, cd.w.basis, r.basis, tuple(alpha), tuple(S), tuple(N),
                       tuple(w_S), blocks)


def semisimple_of(split: ActionSplit, g: LieAlgebra, cd: CartanData, xi: Sequence) -> la.Matrix:
    """Semisimple part of ad(xi)|r for an arbitrary xi in h."""
    s, _ = jordan_split(action_matrix(g, cd.r, xi))
    return s


# -- polynomial bound on the unipotent part --------------------------------------

@dataclass(frozen=True)
class BoundReport:
    """``C`` bounds u(h) at exponent ``degree`` = dim r - 1; the halves are fitted at ``growth_degree``."""
    degree: int
    C: float
    C_first_half: float
    C_second_half: float
    grid: tuple
    growth_degree: int = 0

    @property
    def stable(self) -> bool:
        lo, hi = sorted((self.C_first_half, self.C_second_half))
        return hi <= 1.1 * lo

    def to_json(self) -> dict:
        return {"degree": self.degree, "growth_degree": self.growth_degree, "C": self.C,
                "C_first_half": self.C_first_half, "C_second_half": self.C_second_half,
                "stable": self.stable}


def nilpotent_growth_degree(nils: Sequence[la.Matrix]) -> int:
    """Largest j with some product of j matrices from the family nonzero."""
    nonzero = [x for x in nils if not la.is_zero(x)]
    if not nonzero:
        return 0
    k = len(nonzero[0])
    layer = [la.identity(k)]
    j = 0
    while True:
        nxt = [la.matmul(a, b) for a in layer for b in nonzero]
        nxt = [x for x in nxt if not la.is_zero(x)]
        if not nxt:
            return j
        # span-reduce so the layer stays small
        rows, _ = la.rref([tuple(v for row in x for v in row) for x in nxt])
        layer = [tuple(tuple(r[i * k:(i + 1) * k]) for i in range(k)) for r in rows]
        j += 1


def unipotent_exp(nil: np.ndarray, t: float) -> np.ndarray:
    """exp(t N) for nilpotent N by its finite series."""
    k = nil.shape[0]
    out = np.eye(k)
    term = np.eye(k)
    for j in range(1, k + 1):
        term = term @ (t * nil) / j
        out = out + term
    return out


def unipotent_poly_bound(split: ActionSplit, grid: Sequence[float], directions: int = 4,
                         seed: int = 0) -> BoundReport:
    """Smallest C with max|u(h)_ij| <= C (1 + |h|)^k over the grid, k = dim r - 1.

    |h| is the Euclidean norm of the V-coordinates of h = exp(nu); directions are
    the V basis vectors plus seeded random unit vectors.  Stability between the
    grid halves is judged at the family's actual growth degree, which is at most
    k: at a larger exponent the fitted constant only decays.
    """
    k_dim = split.dim_r
    degree = max(k_dim - 1, 0)
    grid = tuple(sorted(float(x) for x in grid))
    m = len(split.v_basis)
    if k_dim == 0 or m == 0:
        return BoundReport(degree, 1.0, 1.0, 1.0, grid, 0)
    growth = nilpotent_growth_degree(split.N)
    dirs = [np.eye(m)[i] for i in range(m)]
    rng = np.random.default_rng(seed)
    for _ in range(directions):
        d = rng.normal(size=m)
        dirs.append(d / np.linalg.norm(d))
    Nf = [la.to_float(x) for x in split.N]
    ratios, fitted = [], []
    for t in grid:
        worst = 0.0
        for d in dirs:
            for sign in (1.0, -1.0):
                nil = sum(sign * di * x for di, x in zip(d, Nf))
                worst = max(worst, float(np.max(np.abs(unipotent_exp(nil, t)))))
        ratios.append(worst / (1.0 + t) ** degree)
        fitted.append(worst / (1.0 + t) ** growth)
    half = len(grid) // 2
    c1 = max(fitted[:half]) if half else max(fitted)
    c2 = max(fitted[half:])
    report = BoundReport(degree, max(ratios), c1, c2, grid, growth)
    if c2 > 1.1 * c1 and c2 > 1.0 + 1e-12:
        worst_t = grid[half + int(np.argmax(fitted[half:]))]
        raise BoundViolated("unipotent entries outgrow (1+|h|)^k", offending=worst_t)
    return report
