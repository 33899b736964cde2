"""Coordinates R x V for the original group G and its class (C) companion, with the length models.

A point (r, nu) stands for exp(r) exp(nu), with r in the exponential radical
(coordinates on its echelon basis) and nu in the span of the V-lifts.  Three
laws share these coordinates:

* ``original``: the law of G, where exp(nu) exp(r') = exp(alpha(nu) r') exp(nu)
  and the V-part multiplies inside the Cartan subgroup H, leaving a W-term;
* ``reduced``: R x| H/W with the semisimple action beta in place of alpha;
* ``graded``: as ``reduced``, but H/W carries its associated graded law.

Arithmetic runs in a private mpmath context because the harness probes scales
where exp(|nu|) leaves the double range.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from mpmath.ctx_mp import MPContext

from . import linalg as la
from .bch import BCH
from .cone_construct import ReducedPair, reduce
from .errors import ConeEquivError, NoConvergence
from .lie_core import (
    LieAlgebra,
    Subspace,
    associated_graded,
    quotient,
    subalgebra,
)

LAWS = ("original", "reduced", "graded")
CSV_COLUMNS = ("scale_bin", "|p|", "|q|", "d1", "d2", "residual")


def make_context(prec: int = 96) -> MPContext:
    ctx = MPContext()
    ctx.prec = prec
    return ctx


_CTX = make_context()


@dataclass(frozen=True)
class GroupElement:
    r: tuple
    v: tuple
    law: str = "original"

    def __post_init__(self):
        if self.law not in LAWS:
            raise ValueError(f"unknown group law {self.law!r}")
        for x in self.r + self.v:
            if not _CTX.isfinite(x):
                raise ValueError("group element coordinates must be finite")

    def with_law(self, law: str) -> "GroupElement":
        return GroupElement(self.r, self.v, law)

    def as_floats(self) -> tuple:
        return tuple(float(x) for x in self.r), tuple(float(x) for x in self.v)


def psi(p: GroupElement) -> GroupElement:
    """The coordinate identity G -> R x| V."""
    if p.law != "original":
        raise ValueError("psi is defined on elements of the original group")
    return p.with_law("reduced")


def psi_inverse(p: GroupElement) -> GroupElement:
    if p.law != "reduced":
        raise ValueError("psi_inverse expects an element of the reduced group")
    return p.with_law("original")


def length_R(r_coords: Sequence, ctx: MPContext = _CTX) -> float:
    """log(1 + ||r||_2), exact in the exponent range of mpmath."""
    return float(_length_R(r_coords, ctx))


def _length_R(r_coords, ctx):
    if not len(r_coords):
        return ctx.zero
    return ctx.log1p(ctx.norm([ctx.mpf(x) for x in r_coords], 2))


@dataclass(frozen=True)
class LengthModel:
    """Homogeneous quasi-norm sum |c_i|^(1/w_i) on graded coordinates of g/r.

    ``to_graded`` maps V-coordinates to coordinates on the adapted basis of
    g/r, whose layer indices are ``weights``.
    """
    weights: tuple
    to_graded: tuple
    from_graded: tuple
    norm_kind: str = "euclidean"

    def graded(self, nu: Sequence) -> list:
        return [sum((a * x for a, x in zip(row, nu)), 0) for row in self.to_graded]

    def ungraded(self, c: Sequence) -> list:
        return [sum((a * x for a, x in zip(row, c)), 0) for row in self.from_graded]

    def norm_graded(self, c: Sequence, ctx: MPContext = _CTX):
        total = ctx.zero
        for x, w in zip(c, self.weights):
            x = abs(ctx.mpf(x))
            if x:
                total += x if w == 1 else ctx.root(x, w)
        return total


def length_quotient(v_coords: Sequence, lm: LengthModel, ctx: MPContext = _CTX) -> float:
    return float(lm.norm_graded(lm.graded([ctx.mpf(x) for x in v_coords]), ctx))


def _mp_converter(ctx):
    def convert(x):
        if isinstance(x, Fraction):
            return ctx.mpf(x.numerator) / x.denominator
        return ctx.mpf(x)
    return convert


def _mp_matrix(m, convert):
    return tuple(tuple(convert(x) for x in row) for row in m)


def _mv(m, x):
    return [sum((a * b for a, b in zip(row, x) if a), 0) for row in m]


def decompose_H(h: LieAlgebra, w: Subspace, v: Subspace, eta: Sequence, convert=Fraction):
    """Split exp(eta) in H as exp(delta) exp(lift) with delta in W and lift in V.

    Modulo the ideal w the product is additive, so the lift is the V-component
    of eta; delta is then exp(eta) exp(-lift).  Returns both as ambient vectors.
    """
    basis = v.basis + w.basis
    hb = subalgebra(h, Subspace.full(h.dim), basis)
    coords = la.solve_coords(basis, la.vec(eta)) if convert is Fraction else None
    if coords is None:
        cols = la.to_float(la.from_columns(basis))
        coords = np.linalg.solve(cols, np.array([float(x) for x in eta], dtype=float))
    coords = [convert(x) for x in coords]
    m = v.dim
    bch = BCH(hb, convert)
    lift = list(coords[:m]) + [convert(0)] * w.dim
    delta = bch(coords, [-x for x in lift])
    if any(abs(x) > 1e-10 * (1 + max(abs(y) for y in coords)) for x in delta[:m]):
        raise NoConvergence("W-part of the decomposition left a V-component")
    back = bch(delta, lift)
    if any(abs(a - b) > 1e-10 * (1 + abs(b)) for a, b in zip(back, coords)):
        raise NoConvergence("decomposition residual above 1e-10")

    def ambient(c):
        return tuple(sum((ci * bi[k] for ci, bi in zip(c, basis)), convert(0)) for k in range(h.dim))
    return ambient([convert(0)] * m + list(delta[m:])), ambient(lift[:m] + [convert(0)] * w.dim)


class GroupModel:
    """Both group laws on R x V together with the length L = l(r) + |nu|_{G/R}."""

    def __init__(self, g: LieAlgebra, pair: ReducedPair | None = None, seed: int = 0,
                 prec: int = 96):
        self.pair = pair if pair is not None else reduce(g, seed)
        self.g = g
        self.ctx = ctx = make_context(prec)
        conv = self._convert = _mp_converter(ctx)
        cd, sp = self.pair.cartan, self.pair.split
        self.k, self.m, self.p = cd.r.dim, cd.v.dim, cd.w.dim
        self.r_alg = subalgebra(g, cd.r)
        self.h_alg = subalgebra(g, cd.h, cd.v.basis + cd.w.basis)
        self.hw_alg = subalgebra(self.pair.g1, self.pair.v_in_g1())
        self.bch_r = BCH(self.r_alg, conv)
        self.bch_h = BCH(self.h_alg, conv)
        self.bch_hw = BCH(self.hw_alg, conv)
        self.w_to_r = _mp_matrix(la.from_columns([la.solve_coords(cd.r.basis, wb)
                                                  for wb in cd.w.basis]), conv) if self.p else ()

        q, proj = quotient(g, cd.r)
        gr = associated_graded(q)
        if self.m:
            cols = [gr.graded_coordinates(la.matvec(proj, vb)) for vb in cd.v.basis]
            to_graded = la.from_columns(cols)
            from_graded = la.inverse(to_graded)
        else:
            to_graded = from_graded = ()
        self.length_model = LengthModel(tuple(gr.weights), _mp_matrix(to_graded, conv),
                                        _mp_matrix(from_graded, conv))
        self.graded_algebra = gr.algebra
        self.bch_gr = BCH(gr.algebra, conv)

        self.S = [_mp_matrix(s, conv) for s in sp.S]
        self.N = [_mp_matrix(x, conv) for x in sp.N]
        self.alpha = [_mp_matrix(a, conv) for a in sp.alpha]
        eig = sp.eigenbasis()
        if eig is not None and self.k:
            P, weights = eig
            self._P = _mp_matrix(P, conv)
            self._Pinv = _mp_matrix(la.inverse(P), conv)
            self._weights = [[conv(x) for x in wt] for wt in weights]
        else:
            self._P = None
        self.nilpotent_action = any(not la.is_zero(x) for x in sp.N)

    # -- actions on r ------------------------------------------------------------

    def _combo(self, mats, nu):
        k = self.k
        out = [[self.ctx.zero] * k for _ in range(k)]
        for c, mtx in zip(nu, mats):
            if c:
                for i in range(k):
                    for j in range(k):
                        if mtx[i][j]:
                            out[i][j] += c * mtx[i][j]
        return out

    def apply_B(self, nu, x, sign=1):
        """beta(exp(sign * nu)) applied to x."""
        if not self.k:
            return []
        ctx = self.ctx
        if self._P is not None:
            y = _mv(self._Pinv, x)
            y = [yi * ctx.exp(sign * sum((w * c for w, c in zip(wt, nu)), ctx.zero))
                 for yi, wt in zip(y, self._weights)]
            return _mv(self._P, y)
        s = self._combo(self.S, nu)
        e = ctx.expm(ctx.matrix(s) * sign)
        return [sum((e[i, j] * x[j] for j in range(self.k)), ctx.zero) for i in range(self.k)]

    def apply_U(self, nu, x, sign=1):
        """u(exp(sign * nu)) applied to x, via the finite exponential series."""
        if not self.k or not self.nilpotent_action:
            return list(x)
        nmat = self._combo(self.N, nu)
        out = list(x)
        term = list(x)
        for j in range(1, self.k):
            term = [sign * t / j for t in _mv(nmat, term)]
            out = [a + b for a, b in zip(out, term)]
        return out

    def apply_A(self, nu, x, sign=1):
        return self.apply_B(nu, self.apply_U(nu, x, sign), sign)

    # -- pieces of the original law ---------------------------------------------------

    def decompose(self, eta):
        """(delta in r-coordinates, lift in V-coordinates) for exp(eta) in H."""
        m = self.m
        lam = list(eta[:m])
        if not self.p:
            return [self.ctx.zero] * self.k, lam
        delta = self.bch_h(eta, [-x for x in lam] + [self.ctx.zero] * self.p)
        return _mv(self.w_to_r, delta[m:]), lam

    def _h_vec(self, nu):
        return list(nu) + [self.ctx.zero] * self.p

    def quotient_norm(self, nu):
        return self.length_model.norm_graded(self.length_model.graded(nu), self.ctx)

    def length(self, p: GroupElement) -> float:
        return float(self._length(p))

    def _length(self, p):
        return _length_R(p.r, self.ctx) + self.quotient_norm(p.v)

    # -- group laws ------------------------------------------------------------------

    def multiply(self, p: GroupElement, q: GroupElement) -> GroupElement:
        if p.law != q.law:
            raise ValueError("cannot multiply elements of different laws")
        if p.law == "original":
            r = self.bch_r(list(p.r), self.apply_A(p.v, q.r))
            eta = self.bch_h(self._h_vec(p.v), self._h_vec(q.v))
            delta, lam = self.decompose(eta)
            r = self.bch_r(r, delta) if self.k else r
            return GroupElement(tuple(r), tuple(lam), p.law)
        r = self.bch_r(list(p.r), self.apply_B(p.v, q.r))
        return GroupElement(tuple(r), tuple(self._v_product(p.v, q.v, p.law)), p.law)

    def _v_product(self, nu, nu2, law):
        if law == "graded":
            lm = self.length_model
            return lm.ungraded(self.bch_gr(lm.graded(nu), lm.graded(nu2)))
        return self.bch_hw(list(nu), list(nu2))

    def inverse(self, p: GroupElement) -> GroupElement:
        neg = [-x for x in p.v]
        if p.law == "original":
            r = self.apply_A(neg, [-x for x in p.r])
        else:
            r = self.apply_B(neg, [-x for x in p.r])
        return GroupElement(tuple(r), tuple(neg), p.law)

    def identity(self, law: str = "original") -> GroupElement:
        z = self.ctx.zero
        return GroupElement((z,) * self.k, (z,) * self.m, law)

    def element(self, r, v, law: str = "original") -> GroupElement:
        c = self._convert
        return GroupElement(tuple(c(x) for x in r), tuple(c(x) for x in v), law)

    # -- quasi-distances --------------------------------------------------------------

    def _d1(self, p, q):
        ctx = self.ctx
        x = self.bch_r([-a for a in p.r], list(q.r))
        ax = self.apply_A([-a for a in p.v], x)
        eta = self.bch_h(self._h_vec([-a for a in p.v]), self._h_vec(q.v))
        delta, lam = self.decompose(eta)
        rr = self.bch_r(ax, delta) if self.p else ax
        return _length_R(rr, ctx) + self.quotient_norm(lam)

    def _d2(self, p, q, law="reduced"):
        x = self.bch_r([-a for a in p.r], list(q.r))
        bx = self.apply_B([-a for a in p.v], x)
        lam = self._v_product([-a for a in p.v], q.v, law)
        return _length_R(bx, self.ctx) + self.quotient_norm(lam)

    def quasi_distance(self, p: GroupElement, q: GroupElement, law: str | None = None) -> float:
        return float(self._quasi_distance(p, q, law))

    def _quasi_distance(self, p, q, law=None):
        law = law or p.law
        if p.law != q.law:
            raise ValueError("both points must carry the same law tag")
        if law == "original":
            return self._d1(p, q)
        return self._d2(p, q, law)

    def d1(self, p, q) -> float:
        return float(self._d1(p, q))

    def d2(self, p, q) -> float:
        return float(self._d2(p, q))

    def d3(self, p, q) -> float:
        return float(self._d2(p, q, "graded"))

    def residual(self, p, q, law: str = "reduced") -> float:
        """|d1 - d_law| evaluated before rounding to float."""
        return float(abs(self._d1(p, q) - self._d2(p, q, law)))

    def delta_length(self, nu, nu2) -> float:
        """l(delta(v^-1 v')) for v = exp(nu), v' = exp(nu2)."""
        eta = self.bch_h(self._h_vec([-a for a in nu]), self._h_vec(nu2))
        delta, _ = self.decompose(eta)
        return float(_length_R(delta, self.ctx))

    # -- sampling ----------------------------------------------------------------------

    def sample(self, scale: float, rng: np.random.Generator, law: str = "original",
               phi: float | None = None) -> GroupElement:
        """A point with L(p) = scale, split as l(r) = phi * scale and |nu| = (1 - phi) * scale."""
        ctx = self.ctx
        s = ctx.mpf(scale)
        if not self.k:
            phi = 0.0
        elif not self.m:
            phi = 1.0
        elif phi is None:
            phi = float(rng.uniform())
        r = []
        if self.k:
            d = rng.normal(size=self.k)
            d = d / np.linalg.norm(d)
            mag = ctx.expm1(ctx.mpf(phi) * s)
            r = [mag * ctx.mpf(float(x)) for x in d]
        nu = []
        if self.m:
            c = [ctx.mpf(float(x)) for x in rng.normal(size=self.m)]
            base = self.length_model.norm_graded(c, ctx)
            t = (1 - ctx.mpf(phi)) * s / base
            c = [x * t ** w for x, w in zip(c, self.length_model.weights)]
            nu = self.length_model.ungraded(c)
        return GroupElement(tuple(r), tuple(nu), law)

    def near(self, p: GroupElement, radius: float, rng: np.random.Generator) -> GroupElement:
        """p * e with L(e) = radius, so d(p, p * e) = radius under p's law."""
        return self.multiply(p, self.sample(radius, rng, p.law))


# -- residual studies ----------------------------------------------------------------

@dataclass
class PairSample:
    scale_bin: int
    norm_p: float
    norm_q: float
    d1: float
    d2: float
    residual: float
    bound: float


@dataclass
class ResidualStudy:
    samples: list
    K_per_bin: dict
    ratio_per_bin: dict
    seed: int
    law: str = "reduced"
    extras: dict = field(default_factory=dict)

    @property
    def K(self) -> float:
        return max(self.K_per_bin.values()) if self.K_per_bin else 0.0

    @property
    def K_spread(self) -> float:
        """max/min of the per-bin K estimates; 1 when the residual vanishes identically."""
        vals = list(self.K_per_bin.values())
        hi, lo = max(vals), min(vals)
        if hi == 0:
            return 1.0
        return math.inf if lo == 0 else hi / lo

    @property
    def ratio_drop(self) -> float:
        """Bin max of residual/(|p|+|q|) at the lowest bin over that at the highest bin."""
        bins = sorted(self.ratio_per_bin)
        lo, hi = self.ratio_per_bin[bins[0]], self.ratio_per_bin[bins[-1]]
        if hi == 0:
            return math.inf
        return lo / hi

    def passes(self, spread_limit: float = 2.0, drop_min: float = 4.0) -> bool:
        return self.K_spread < spread_limit and self.ratio_drop >= drop_min

    def to_json(self) -> dict:
        def fin(x):
            return x if math.isfinite(x) else "inf"
        return {
            "seed": self.seed, "law": self.law, "pairs": len(self.samples),
            "K": self.K, "K_spread": fin(self.K_spread), "ratio_drop": fin(self.ratio_drop),
            "bins": [{"bin": b, "K": self.K_per_bin[b], "ratio_max": self.ratio_per_bin[b],
                      "count": sum(1 for s in self.samples if s.scale_bin == b)}
                     for b in sorted(self.K_per_bin)],
        }


def sample_pairs(model: GroupModel, k_min: int, k_max: int, pairs: int,
                 rng: np.random.Generator):
    """Pairs (bin, p, q): p uniform in its dyadic bin; q independent or p times a smaller element."""
    bins = list(range(k_min, k_max))
    per_bin = -(-pairs // len(bins))
    out = []
    for k in bins:
        for _ in range(per_bin):
            p = model.sample(float(rng.uniform(2.0 ** k, 2.0 ** (k + 1))), rng)
            if rng.uniform() < 0.5:
                q = model.sample(float(rng.uniform(2.0 ** k, 2.0 ** (k + 1))), rng)
            else:
                q = model.near(p, float(2.0 ** rng.uniform(0, k)), rng)
            out.append((k, p, q))
    return out


def residual_study(model: GroupModel, k_min: int = 4, k_max: int = 20, pairs: int = 10_000,
                   seed: int = 0, law: str = "reduced") -> ResidualStudy:
    """|d1 - d_law| against log(1+|v|) + log(1+|v'|) + 1 and against |p| + |q|, per dyadic bin."""
    rng = np.random.default_rng(seed)
    ctx = model.ctx
    samples = []
    K_bin: dict = {}
    ratio_bin: dict = {}
    for k, p, q in sample_pairs(model, k_min, k_max, pairs, rng):
        a = model._d1(p, q)
        b = model._d2(p.with_law("reduced"), q.with_law("reduced"), law)
        res = float(abs(a - b))
        bound = float(ctx.log1p(model.quotient_norm(p.v)) + ctx.log1p(model.quotient_norm(q.v)) + 1)
        np_, nq = model.length(p), model.length(q)
        samples.append(PairSample(k, np_, nq, float(a), float(b), res, bound))
        K_bin[k] = max(K_bin.get(k, 0.0), res / bound)
        ratio_bin[k] = max(ratio_bin.get(k, 0.0), res / (np_ + nq))
    return ResidualStudy(samples, K_bin, ratio_bin, seed, law)


def write_csv(study: ResidualStudy, out=None) -> str:
    """CSV dump with the seed in a comment header; returns the text and writes to ``out`` if given."""
    buf = io.StringIO()
    buf.write(f"# seed={study.seed}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for s in study.samples:
        w.writerow([s.scale_bin, repr(s.norm_p), repr(s.norm_q), repr(s.d1), repr(s.d2),
                    repr(s.residual)])
    text = buf.getvalue()
    if out is not None:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def fit_quasi_triangle(model: GroupModel, law: str = "original", k_min: int = 2, k_max: int = 12,
                       triples: int = 600, seed: int = 0) -> float:
    """Smallest K with d(p,q) <= K (d(p,s) + d(s,q) + 1) over sampled triples."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(triples):
        pts = [model.sample(float(2.0 ** rng.uniform(k_min, k_max)), rng, law) for _ in range(3)]
        if rng.uniform() < 0.5:
            pts[1] = model.near(pts[0], float(2.0 ** rng.uniform(0, k_min)), rng)
        p, s, q = pts
        d = model.quasi_distance
        worst = max(worst, d(p, q) / (d(p, s) + d(s, q) + 1))
    return worst


def delta_growth_study(model: GroupModel, k_min: int = 2, k_max: int = 16, per_bin: int = 100,
                   seed: int = 0) -> dict:
    """Per-bin max of l(delta(v^-1 v')) / (log(1+|v|) + log(1+|v'|) + 1)."""
    rng = np.random.default_rng(seed)
    out = {}
    for k in range(k_min, k_max):
        worst = 0.0
        for _ in range(per_bin):
            a = model.sample(float(rng.uniform(2.0 ** k, 2.0 ** (k + 1))), rng, phi=0.0)
            b = model.sample(float(rng.uniform(2.0 ** k, 2.0 ** (k + 1))), rng, phi=0.0)
            num = model.delta_length(a.v, b.v)
            den = math.log1p(float(model.quotient_norm(a.v))) + math.log1p(float(model.quotient_norm(b.v))) + 1
            worst = max(worst, num / den)
        out[k] = worst
    return out


# -- the elementary inequality behind the length comparison ----------------------------

def log1p_ratio_bound_holds(a: Fraction, b: Fraction, c: Fraction) -> bool:
    """For a, b >= 0 and c >= 1: b <= c a and a <= c b imply 1+b <= c(1+a) and 1+a <= c(1+b).

    The hypothesis and conclusion are the exponentiated forms of the log
    inequalities, so the check is exact in rational arithmetic.
    """
    if c < 1 or a < 0 or b < 0:
        raise ConeEquivError("the bound needs a, b >= 0 and c >= 1")
    if not (b <= c * a and a <= c * b):
        return True
    return 1 + b <= c * (1 + a) and 1 + a <= c * (1 + b)


def log1p_ratio_bound_float(a: float, b: float, c: float, slack: float = 1e-12) -> bool:
    if abs(math.log(a) - math.log(b)) > math.log(c):
        return True
    return abs(math.log1p(a) - math.log1p(b)) <= math.log(c) + slack


def sample_ratio_triples(n: int, seed: int = 0):
    """Rational triples satisfying the hypothesis, including the boundary b = c a."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        a = Fraction(int(rng.integers(0, 10**6)), int(rng.integers(1, 10**3)))
        c = 1 + Fraction(int(rng.integers(0, 10**4)), int(rng.integers(1, 10**3)))
        if i % 7 == 0:
            t = c if i % 2 else 1 / c
        else:
            t = 1 / c + (c - 1 / c) * Fraction(int(rng.integers(0, 10**6)), 10**6)
        out.append((a, a * t, c))
    return out


def pointed_space(model: GroupModel, law: str = "original"):
    """The group with its quasi-distance for ``law``, as a space for the cone certifiers."""
    from .cone_analysis import PointedSpace

    def sampler(lo, hi, rng):
        return model.sample(float(rng.uniform(lo, hi)), rng, law)

    return PointedSpace(distance=lambda p, q: model.quasi_distance(p, q, law),
                        base=model.identity(law), sampler=sampler, near=model.near,
                        name=f"{law}")


def psi_constants(model: GroupModel, k_min: int = 4, k_max: int = 20, per_bin: int = 60,
                  seed: int = 0, target: str = "reduced"):
    """Cone constants of psi from (G, d1) to the companion with the ``target`` law."""
    from .cone_analysis import estimate_cone_constants
    X = pointed_space(model, "original")
    Y = pointed_space(model, target)
    return estimate_cone_constants(lambda p: p.with_law(target), X, Y, k_min, k_max, per_bin, seed)
