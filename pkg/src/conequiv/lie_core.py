"""Exact Lie algebra engine over the rationals.

Structure constants follow ``[e_i, e_j] = sum_k c[i][j][k] e_k``.  Subspaces
are kept in reduced row echelon form, so equal subspaces compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from . import linalg as la
from .errors import (
    AlgebraParseError,
    AntisymmetryViolation,
    JacobiViolation,
    LieAlgebraError,
    NonRationalSpectrum,
    NotAnIdeal,
    NotNilpotent,
    NotSolvable,
    NotTriangulable,
)

ZERO = la.ZERO


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    dim: int
    labels: tuple
    c: tuple
    _nz: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        nz = tuple((i, j, k, self.c[i][j][k])
                   for i in range(self.dim) for j in range(self.dim)
                   for k in range(self.dim) if self.c[i][j][k] != 0)
        object.__setattr__(self, "_nz", nz)

    def __eq__(self, other):
        return isinstance(other, LieAlgebra) and self.dim == other.dim and self.c == other.c

    def __hash__(self):
        return hash((self.dim, self.c))

    def bracket(self, x: Sequence, y: Sequence) -> tuple:
        out = [ZERO] * self.dim
        for i, j, k, v in self._nz:
            xi = x[i]
            if xi:
                yj = y[j]
                if yj:
                    out[k] += v * xi * yj
        return tuple(out)

    def ad(self, x: Sequence) -> la.Matrix:
        """Matrix of ad(x) acting on column coordinate vectors."""
        n = self.dim
        m = [[ZERO] * n for _ in range(n)]
        for i, j, k, v in self._nz:
            if x[i]:
                m[k][j] += v * x[i]
        return tuple(tuple(r) for r in m)

    def basis(self) -> tuple:
        return la.identity(self.dim)

    def nonzero_brackets(self):
        """Entries (i, j, k, value) with i < j."""
        return [(i, j, k, v) for i, j, k, v in self._nz if i < j]

    def is_abelian(self) -> bool:
        return not self._nz


def _check_cubic(c, n):
    if len(c) != n or any(len(row) != n or any(len(col) != n for col in row) for row in c):
        raise LieAlgebraError("structure constants must form an n x n x n tensor")


def validate(c, labels: Sequence[str] | None = None) -> LieAlgebra:
    """Build a LieAlgebra from a raw cubic tensor, checking antisymmetry and Jacobi exactly."""
    n = len(c)
    _check_cubic(c, n)
    t = tuple(tuple(tuple(la.frac(x) for x in col) for col in row) for row in c)
    for i in range(n):
        for j in range(i, n):
            for k in range(n):
                if t[i][j][k] != -t[j][i][k]:
                    raise AntisymmetryViolation(i, j, k)
    if labels is None:
        labels = tuple(f"e{i}" for i in range(n))
    if len(labels) != n:
        raise LieAlgebraError("one label per basis vector is required")
    g = LieAlgebra(n, tuple(labels), t)
    for i, j, k in combinations(range(n), 3):
        ei, ej, ek = la.unit(n, i), la.unit(n, j), la.unit(n, k)
        jac = la.vadd(la.vadd(g.bracket(ei, g.bracket(ej, ek)),
                              g.bracket(ej, g.bracket(ek, ei))),
                      g.bracket(ek, g.bracket(ei, ej)))
        if not la.is_zero_vec(jac):
            raise JacobiViolation(i, j, k)
    return g


def from_brackets(labels: Sequence[str], brackets: Mapping) -> LieAlgebra:
    """Build from ``{("T", "X"): {"X": 1}, ...}``; antisymmetric completion is applied."""
    labels = tuple(labels)
    n = len(labels)
    idx = {name: i for i, name in enumerate(labels)}
    c = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
    for (a, b), out in brackets.items():
        i, j = idx[a], idx[b]
        for name, val in out.items():
            k = idx[name]
            v = la.frac(val)
            c[i][j][k] += v
            c[j][i][k] -= v
    return validate(c, labels)


def from_structure(c, labels=None) -> LieAlgebra:
    return validate(c, labels)


def change_basis(g: LieAlgebra, basis: Sequence[Sequence], labels=None) -> LieAlgebra:
    """Structure constants of g in a new basis (rows expressed in the old basis)."""
    basis = tuple(la.vec(b) for b in basis)
    n = len(basis)
    c = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            coords = la.solve_coords(basis, g.bracket(basis[i], basis[j]))
            if coords is None:
                raise LieAlgebraError("basis does not span a subalgebra")
            for k, v in enumerate(coords):
                c[i][j][k] = v
                c[j][i][k] = -v
    if labels is None:
        labels = tuple(vector_label(g.labels, b) for b in basis)
    return validate(c, labels)


def vector_label(labels: Sequence[str], v: Sequence) -> str:
    terms = []
    for name, x in zip(labels, v):
        if x == 0:
            continue
        if x == 1:
            terms.append(name)
        elif x == -1:
            terms.append("-" + name)
        else:
            terms.append(f"{la.fmt(x)}*{name}")
    if not terms:
        return "0"
    out = terms[0]
    for t in terms[1:]:
        out += t if t.startswith("-") else "+" + t
    return out


# -- subspaces ----------------------------------------------------------------

@dataclass(frozen=True)
class Subspace:
    ambient_dim: int
    basis: tuple
    pivots: tuple

    @classmethod
    def span(cls, ambient_dim: int, vectors: Iterable[Sequence]) -> "Subspace":
        vs = [la.vec(v) for v in vectors]
        if not vs:
            return cls(ambient_dim, (), ())
        rows, piv = la.rref(vs)
        return cls(ambient_dim, rows, piv)

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, (), ())

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, la.identity(n), tuple(range(n)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coords(self, v: Sequence):
        return la.coords_in(self.basis, self.pivots, la.vec(v))

    def contains(self, v: Sequence) -> bool:
        return self.coords(v) is not None

    def __le__(self, other: "Subspace") -> bool:
        return all(other.contains(b) for b in self.basis)

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace.span(self.ambient_dim, self.basis + other.basis)

    def intersect(self, other: "Subspace") -> "Subspace":
        if not self.basis or not other.basis:
            return Subspace.zero(self.ambient_dim)
        k = self.dim
        cols = tuple(self.basis) + tuple(la.vscale(b, -1) for b in other.basis)
        sols = la.nullspace(la.from_columns(cols), len(cols))
        vecs = []
        for s in sols:
            v = [ZERO] * self.ambient_dim
            for a, b in zip(s[:k], self.basis):
                if a:
                    v = [x + a * y for x, y in zip(v, b)]
            vecs.append(v)
        return Subspace.span(self.ambient_dim, vecs)

    def complement_in(self, sub: "Subspace") -> tuple:
        """Rows of this echelon basis whose pivot is not a pivot of ``sub`` (sub inside self)."""
        return tuple(row for row, p in zip(self.basis, self.pivots) if p not in sub.pivots)

    def free_indices(self) -> tuple:
        return tuple(i for i in range(self.ambient_dim) if i not in self.pivots)


def bracket_span(g: LieAlgebra, a: Subspace, b: Subspace) -> Subspace:
    return Subspace.span(g.dim, [g.bracket(x, y) for x in a.basis for y in b.basis])


def is_ideal(g: LieAlgebra, ideal: Subspace) -> bool:
    return bracket_span(g, Subspace.full(g.dim), ideal) <= ideal


def is_subalgebra(g: LieAlgebra, sub: Subspace) -> bool:
    return bracket_span(g, sub, sub) <= sub


def lower_central_series(g: LieAlgebra) -> list[Subspace]:
    """g^1 = g, g^{i+1} = [g, g^i]; ends at the first term that is zero or repeats."""
    full = Subspace.full(g.dim)
    terms = [full]
    for _ in range(g.dim + 1):
        if terms[-1].dim == 0:
            break
        nxt = bracket_span(g, full, terms[-1])
        terms.append(nxt)
        if nxt == terms[-2]:
            break
    return terms


def derived_series(g: LieAlgebra) -> list[Subspace]:
    terms = [Subspace.full(g.dim)]
    for _ in range(g.dim + 1):
        if terms[-1].dim == 0:
            break
        nxt = bracket_span(g, terms[-1], terms[-1])
        terms.append(nxt)
        if nxt == terms[-2]:
            break
    return terms


def is_solvable(g: LieAlgebra) -> bool:
    return derived_series(g)[-1].dim == 0


def is_nilpotent(g: LieAlgebra) -> bool:
    return lower_central_series(g)[-1].dim == 0


def exponential_radical(g: LieAlgebra) -> Subspace:
    """Stable term of the lower central series (the smallest ideal with nilpotent quotient)."""
    if not is_solvable(g):
        raise NotSolvable("derived series does not reach 0")
    r = lower_central_series(g)[-1]
    if not is_ideal(g, r):
        raise LieAlgebraError("stable series term is not an ideal")
    if r.dim and not r <= bracket_span(g, Subspace.full(g.dim), Subspace.full(g.dim)):
        raise LieAlgebraError("radical is not contained in [g, g]")
    if r.dim and not is_nilpotent(subalgebra(g, r)):
        raise LieAlgebraError("radical is not nilpotent")
    return r


def subalgebra(g: LieAlgebra, sub: Subspace, basis: Sequence | None = None) -> LieAlgebra:
    """The subalgebra ``sub`` as an abstract algebra on ``basis`` (default: echelon basis)."""
    basis = sub.basis if basis is None else tuple(la.vec(b) for b in basis)
    if not basis:
        return LieAlgebra(0, (), ())
    return change_basis(g, basis)


def quotient(g: LieAlgebra, ideal: Subspace):
    """Quotient algebra on the pivot-column complement and the projection matrix."""
    if not is_ideal(g, ideal):
        raise NotAnIdeal("subspace is not an ideal")
    free = ideal.free_indices()

    def project(x):
        x = list(x)
        for row, p in zip(ideal.basis, ideal.pivots):
            f = x[p]
            if f:
                x = [a - f * b for a, b in zip(x, row)]
        return tuple(x[i] for i in free)

    m = len(free)
    proj = la.from_columns([project(la.unit(g.dim, j)) for j in range(g.dim)]) if m else ()
    c = [[[ZERO] * m for _ in range(m)] for _ in range(m)]
    for a in range(m):
        for b in range(m):
            img = project(g.bracket(la.unit(g.dim, free[a]), la.unit(g.dim, free[b])))
            for k, v in enumerate(img):
                c[a][b][k] = v
    q = validate(c, tuple(g.labels[i] for i in free)) if m else LieAlgebra(0, (), ())
    for i in range(g.dim):
        for j in range(i + 1, g.dim):
            lhs = project(g.bracket(la.unit(g.dim, i), la.unit(g.dim, j)))
            rhs = q.bracket(project(la.unit(g.dim, i)), project(la.unit(g.dim, j))) if m else ()
            if lhs != rhs:
                raise LieAlgebraError("projection is not a homomorphism")
    return q, proj


def project_to_quotient(proj: la.Matrix, x: Sequence) -> tuple:
    return la.matvec(proj, la.vec(x)) if proj else ()


# -- associated graded ----------------------------------------------------------

@dataclass(frozen=True)
class GradedLieAlgebra:
    layers: tuple
    algebra: LieAlgebra
    weights: tuple
    adapted_basis: tuple

    def graded_coordinates(self, x: Sequence) -> tuple:
        return la.solve_coords(self.adapted_basis, la.vec(x))


def associated_graded(g: LieAlgebra) -> GradedLieAlgebra:
    series = lower_central_series(g)
    if series[-1].dim != 0:
        raise NotNilpotent("lower central series does not reach 0")
    layers, lifts, weights = [], [], []
    for i in range(len(series) - 1):
        comp = series[i].complement_in(series[i + 1])
        layers.append(Subspace.span(g.dim, comp))
        lifts.extend(comp)
        weights.extend([i + 1] * len(comp))
    n = len(lifts)
    c = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            coords = la.solve_coords(lifts, g.bracket(lifts[a], lifts[b]))
            target = weights[a] + weights[b]
            for k, v in enumerate(coords):
                if v and weights[k] == target:
                    c[a][b][k] = v
                    c[b][a][k] = -v
    labels = tuple(vector_label(g.labels, v) for v in lifts)
    alg = validate(c, labels) if n else LieAlgebra(0, (), ())
    return GradedLieAlgebra(tuple(layers), alg, tuple(weights), tuple(lifts))


def layer_compatible(gr: GradedLieAlgebra) -> bool:
    """[layer_i, layer_j] lands in layer_{i+j} (zero if absent) for the graded bracket."""
    n = gr.algebra.dim
    w = gr.weights
    for a in range(n):
        for b in range(n):
            out = gr.algebra.bracket(la.unit(n, a), la.unit(n, b))
            if any(v and w[k] != w[a] + w[b] for k, v in enumerate(out)):
                return False
    return True


# -- triangulability -------------------------------------------------------------

def _independent(mats: Iterable[la.Matrix]) -> list:
    mats = [m for m in mats]
    if not mats:
        return []
    n = len(mats[0])
    rows, _ = la.rref([tuple(x for r in m for x in r) for m in mats])
    return [tuple(tuple(r[i * n:(i + 1) * n]) for i in range(n)) for r in rows]


def common_eigenvector(ops: Sequence[la.Matrix], dim: int):
    """A common real eigenvector of a solvable Lie algebra of operators (Lie's theorem).

    Walks the derived series of the operator algebra from its abelian bottom
    upwards; each weight space is invariant under the next level up.
    """
    levels = [_independent(ops)]
    while levels[-1]:
        cur = levels[-1]
        nxt = _independent(la.commutator(a, b) for a in cur for b in cur)
        if len(nxt) == len(cur):
            raise NotTriangulable("operator algebra is not solvable")
        if not nxt:
            break
        levels.append(nxt)
    space = la.identity(dim)
    for level in reversed(levels):
        for op in level:
            local = la.restrict(op, space)
            p = la.charpoly(local)
            roots = la.rational_roots(p)
            if not roots:
                sf = la.squarefree_part(p)
                if la.real_root_count(sf) < sf.degree():
                    raise NotTriangulable("no real common eigenvector: non-real spectrum")
                raise NonRationalSpectrum("real eigenvalues are irrational; no rational flag")
            lam = roots[0]
            k = len(local)
            shifted = la.sub(local, la.scale(la.identity(k), lam))
            kernel = la.nullspace(shifted, k)
            space = tuple(
                tuple(sum((a * b[i] for a, b in zip(coef, space)), ZERO) for i in range(dim))
                for coef in kernel)
            space, _ = la.rref(space)
    return space[-1]


def triangulability_check(g: LieAlgebra) -> tuple:
    """Full flag 0 = I_0 < I_1 < ... < I_n = g of ideals with one-dimensional steps."""
    flag = [Subspace.zero(g.dim)]
    while flag[-1].dim < g.dim:
        cur = flag[-1]
        q, _ = quotient(g, cur)
        ops = [q.ad(la.unit(q.dim, a)) for a in range(q.dim)]
        try:
            v = common_eigenvector(ops, q.dim)
        except NotTriangulable as exc:
            raise NotTriangulable(str(exc), quotient=q) from None
        free = cur.free_indices()
        lift = [ZERO] * g.dim
        for idx, x in zip(free, v):
            lift[idx] = x
        nxt = Subspace.span(g.dim, cur.basis + (tuple(lift),))
        if not is_ideal(g, nxt):
            raise LieAlgebraError("flag step is not an ideal")
        flag.append(nxt)
    return tuple(flag)


def is_triangulable(g: LieAlgebra) -> bool:
    try:
        triangulability_check(g)
    except (NotTriangulable, NonRationalSpectrum):
        return False
    return True


# -- text format ---------------------------------------------------------------

def parse_algebra(text: str, source: str = "<string>") -> LieAlgebra:
    """Parse ``dim n`` / labels / ``i j k p/q`` lines; antisymmetric completion applied."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if body.strip():
            lines.append((lineno, body))
    if not lines:
        raise AlgebraParseError("empty input", 1, 1, source)

    def tokens(body):
        out, col = [], 0
        for tok in body.split():
            col = body.index(tok, col)
            out.append((tok, col + 1))
            col += len(tok)
        return out

    lineno, body = lines[0]
    toks = tokens(body)
    if len(toks) != 2 or toks[0][0] != "dim":
        raise AlgebraParseError("expected header 'dim <n>'", lineno, toks[0][1], source)
    try:
        n = int(toks[1][0])
        if n < 1:
            raise ValueError
    except ValueError:
        raise AlgebraParseError("dimension must be a positive integer", lineno, toks[1][1], source)
    if len(lines) < 2:
        raise AlgebraParseError("missing label line", lineno + 1, 1, source)
    lineno, body = lines[1]
    toks = tokens(body)
    if len(toks) != n:
        col = toks[min(len(toks), n) - 1][1] if toks else 1
        raise AlgebraParseError(f"expected {n} labels, found {len(toks)}", lineno, col, source)
    labels = tuple(t for t, _ in toks)
    c = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
    seen = {}
    for lineno, body in lines[2:]:
        toks = tokens(body)
        if len(toks) != 4:
            raise AlgebraParseError("expected 'i j k p/q'", lineno, toks[0][1], source)
        idx = []
        for tok, col in toks[:3]:
            try:
                v = int(tok)
            except ValueError:
                raise AlgebraParseError(f"bad index {tok!r}", lineno, col, source)
            if not 0 <= v < n:
                raise AlgebraParseError(f"index {v} out of range", lineno, col, source)
            idx.append(v)
        tok, col = toks[3]
        try:
            val = Fraction(tok)
        except (ValueError, ZeroDivisionError):
            raise AlgebraParseError(f"bad rational {tok!r}", lineno, col, source)
        i, j, k = idx
        if i == j and val != 0:
            raise AntisymmetryViolation(i, j, k)
        for key, v in (((i, j, k), val), ((j, i, k), -val)):
            if key in seen and seen[key] != v:
                raise AlgebraParseError(f"conflicting entry for {key}", lineno, toks[0][1], source)
            seen[key] = v
            c[key[0]][key[1]][key[2]] = v
    return validate(c, labels)


def format_algebra(g: LieAlgebra) -> str:
    lines = [f"dim {g.dim}", " ".join(g.labels)]
    for i, j, k, v in g.nonzero_brackets():
        lines.append(f"{i} {j} {k} {la.fmt(v)}")
    return "\n".join(lines) + "\n"


def load_algebra(path) -> LieAlgebra:
    with open(path, encoding="utf-8") as fh:
        return parse_algebra(fh.read(), source=str(path))
