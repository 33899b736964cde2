"""Sampling certifiers for cone-defined, cone-Lipschitz, cone-expansive and cone-surjective maps.

Every test reduces to one question about a residual r(s) sampled at scales s:
is r(s)/s going to zero?  ``sublinear_fit`` answers it on dyadic bins with a
falsifiable halving rule and says "inconclusive" when the bins are too thin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence

import numpy as np

from .errors import InsufficientData, NetTooCoarse

SUBLINEAR = "sublinear"
NOT_SUBLINEAR = "not-sublinear"
INCONCLUSIVE = "inconclusive"

MIN_BINS = 10
MIN_PER_BIN = 30
ZERO_FLOOR = 1e-12
MIN_TAIL = 6
# residual ratios below this fraction of the map's own distance scale count as zero
RELATIVE_FLOOR = 1e-3


@dataclass(frozen=True)
class PointedSpace:
    """A quasi-metric space with a base point and scale-targeted samplers.

    ``sampler(lo, hi, rng)`` returns a point x with lo <= |x| < hi, and
    ``near(x, radius, rng)`` a point at distance about ``radius`` from x.
    ``net(k_max)`` and ``refine(x, objective)`` are only needed by the
    surjectivity check.
    """
    distance: Callable[[Any, Any], float]
    base: Any
    sampler: Callable
    near: Callable
    net: Callable | None = None
    refine: Callable | None = None
    name: str = ""
    batch_distance: Callable | None = None   # (y, array of points) -> array of distances

    def norm(self, x) -> float:
        return self.distance(x, self.base)

    def rescaled(self, t: float) -> "PointedSpace":
        """Same points, all distances multiplied by t."""
        d, s, nr, bd = self.distance, self.sampler, self.near, self.batch_distance
        return replace(self,
                       distance=lambda x, y: t * d(x, y),
                       batch_distance=None if bd is None else (lambda y, pts: t * bd(y, pts)),
                       sampler=lambda lo, hi, rng: s(lo / t, hi / t, rng),
                       near=lambda x, radius, rng: nr(x, radius / t, rng),
                       name=f"{self.name}*{t:g}")


@dataclass(frozen=True)
class SublinearWitness:
    bins: tuple          # (k, count, bin_max) per populated dyadic bin [2^k, 2^(k+1))
    verdict: str
    envelope: tuple      # non-increasing upper fit of the bin maxima
    thirds: tuple = ()   # (bottom, middle, top) envelope maxima when decided

    @property
    def bin_max(self) -> dict:
        return {k: m for k, _, m in self.bins}

    def to_json(self) -> dict:
        return {"verdict": self.verdict,
                "bins": [{"k": k, "count": c, "bin_max": m} for k, c, m in self.bins],
                "envelope": list(self.envelope), "thirds": list(self.thirds)}


def sublinear_fit(samples: Sequence[tuple], min_bins: int = MIN_BINS,
                  min_per_bin: int = MIN_PER_BIN, floor: float = ZERO_FLOOR) -> SublinearWitness:
    """Decide whether residual/scale tends to zero from (scale, residual) samples.

    Bins with fewer than ``min_per_bin`` samples are dropped.  The profile is
    judged from its peak bin onward, which must leave at least ``MIN_TAIL``
    bins.  With that tail split in thirds, the verdict is sublinear when the
    top third's max is at most half the middle third's, and the middle third's
    at most half the bottom third's.  Ratios at or below ``floor`` count as 0.
    """
    if not samples:
        raise InsufficientData("no samples", witness=None)
    groups: dict = {}
    for s, r in samples:
        if s < 1 or not math.isfinite(s):
            continue
        k = int(math.floor(math.log2(s)))
        ratio = max(float(r), 0.0) / s
        if ratio <= floor:
            ratio = 0.0
        cnt, mx = groups.get(k, (0, 0.0))
        groups[k] = (cnt + 1, max(mx, ratio))
    bins = tuple((k, c, m) for k, (c, m) in sorted(groups.items()) if c >= min_per_bin)
    maxima = [m for _, _, m in bins]
    envelope = []
    running = 0.0
    for m in reversed(maxima):
        running = max(running, m)
        envelope.append(running)
    envelope = tuple(reversed(envelope))
    if len(bins) < min_bins:
        return SublinearWitness(bins, INCONCLUSIVE, envelope)
    # judge the tail from the peak bin on; zeros before the peak are start-up, not growth
    peak = maxima.index(max(maxima))
    tail = maxima[peak:]
    n = len(tail)
    if n < MIN_TAIL:
        return SublinearWitness(bins, NOT_SUBLINEAR, envelope)
    t = n // 3
    bottom, middle, top = max(tail[:t]), max(tail[t:n - t]), max(tail[n - t:])
    ok = top <= 0.5 * middle and middle <= 0.5 * bottom
    return SublinearWitness(bins, SUBLINEAR if ok else NOT_SUBLINEAR, envelope,
                            (bottom, middle, top))


def _require(w: SublinearWitness, what: str) -> SublinearWitness:
    if w.verdict == INCONCLUSIVE:
        raise InsufficientData(f"{what}: too few populated bins", witness=w)
    return w


# -- sampling --------------------------------------------------------------------------

def sample_points(X: PointedSpace, k_min: int, k_max: int, per_bin: int, rng):
    pts = []
    for k in range(k_min, k_max):
        for _ in range(per_bin):
            pts.append(X.sampler(2.0 ** k, 2.0 ** (k + 1), rng))
    return pts


def sample_pairs(X: PointedSpace, k_min: int, k_max: int, per_bin: int, rng):
    """Pairs with |x| in each dyadic bin: half independent, half at log-uniform distance <= |x|."""
    pairs = []
    for k in range(k_min, k_max):
        for i in range(per_bin):
            x = X.sampler(2.0 ** k, 2.0 ** (k + 1), rng)
            if i % 2:
                y = X.sampler(2.0 ** k, 2.0 ** (k + 1), rng)
            else:
                y = X.near(x, float(2.0 ** rng.uniform(0, k + 1)), rng)
            pairs.append((x, y))
    return pairs


# -- cone-defined ------------------------------------------------------------------------

@dataclass(frozen=True)
class ConeDefinedVerdict:
    linear_growth: bool
    growth_ratio: float
    vanishing: SublinearWitness | None

    @property
    def cone_defined(self) -> bool:
        return self.linear_growth and self.vanishing is not None and self.vanishing.verdict == SUBLINEAR

    def to_json(self) -> dict:
        return {"cone_defined": self.cone_defined, "condition_1": self.linear_growth,
                "growth_ratio": self.growth_ratio if math.isfinite(self.growth_ratio) else "inf",
                "condition_2": None if self.vanishing is None else self.vanishing.to_json()}


def check_cone_defined(f: Callable, X: PointedSpace, Y: PointedSpace, k_min: int = 4,
                       k_max: int = 20, per_bin: int = 40, bands: int = 12, seed: int = 0,
                       growth_limit: float = 2.0) -> ConeDefinedVerdict:
    """Condition 1: |f(x)| is linearly bounded by |x|.  Condition 2: pairs whose
    (d(x,y)+1)/(|x|+|y|) shrinks have images whose d/(|x|+|y|) shrinks too.

    Condition 1 compares the largest |f(x)|/|x| over the top third of scale
    bins with that over the bottom third.  Condition 2 groups pairs by the
    band j with (d+1)/(|x|+|y|) ~ 2^-j and feeds sublinear_fit the points
    (2^j, 2^j * max d(f(x), f(y))/(|x|+|y|)).
    """
    rng = np.random.default_rng(seed)
    ratios: dict = {}
    for k in range(k_min, k_max):
        for _ in range(per_bin):
            x = X.sampler(2.0 ** k, 2.0 ** (k + 1), rng)
            nx = X.norm(x)
            ratios[k] = max(ratios.get(k, 0.0), Y.norm(f(x)) / nx)
    vals = [ratios[k] for k in sorted(ratios)]
    t = max(len(vals) // 3, 1)
    bottom, top = max(vals[:t]), max(vals[-t:])
    growth = math.inf if bottom == 0 and top > 0 else (top / bottom if bottom else 1.0)
    linear = math.isfinite(growth) and growth <= growth_limit
    if not linear:
        return ConeDefinedVerdict(False, growth, None)

    samples = []
    for j in range(1, bands + 1):
        lo_scale = max(k_min, j + 3)
        if lo_scale >= k_max:
            continue
        for _ in range(per_bin * 2):
            s = float(2.0 ** rng.uniform(lo_scale, k_max))
            x = X.sampler(s, 2 * s, rng)
            nx = X.norm(x)
            y = X.near(x, max(float(2.0 ** (-j - rng.uniform(0, 1))) * 2 * nx - 1, 0.0), rng)
            denom = nx + X.norm(y)
            band_value = (X.distance(x, y) + 1) / denom
            if band_value <= 0:
                continue
            b = int(math.floor(-math.log2(band_value)))
            if b < 1:
                continue
            samples.append((2.0 ** b, 2.0 ** b * Y.distance(f(x), f(y)) / denom))
    w = sublinear_fit(samples, min_bins=min(MIN_BINS, bands - 2))
    return ConeDefinedVerdict(True, growth, _require(w, "cone-defined condition 2"))


# -- constants ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConeConstants:
    C_best: float
    M_best: float
    counts: dict
    lipschitz_witness: SublinearWitness | None = None
    expansive_witness: SublinearWitness | None = None
    crossed: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def cone_null(self) -> bool:
        return self.C_best == 0.0

    @property
    def bilipschitz(self) -> bool:
        return 0 < self.M_best <= self.C_best < math.inf

    def to_json(self) -> dict:
        return {"C_best": self.C_best, "M_best": self.M_best, "crossed": self.crossed,
                "cone_null": self.cone_null, "bilipschitz": self.bilipschitz,
                "counts": {str(k): v for k, v in sorted(self.counts.items())},
                "lipschitz": None if self.lipschitz_witness is None else self.lipschitz_witness.to_json(),
                "expansive": None if self.expansive_witness is None else self.expansive_witness.to_json()}


def distance_table(f: Callable, X: PointedSpace, Y: PointedSpace, k_min: int, k_max: int,
                   per_bin: int, seed: int) -> np.ndarray:
    """Rows (scale, dX, dY) with scale = |x| + |y| over sampled pairs."""
    rng = np.random.default_rng(seed)
    rows = []
    for x, y in sample_pairs(X, k_min, k_max, per_bin, rng):
        rows.append((X.norm(x) + X.norm(y), X.distance(x, y), Y.distance(f(x), f(y))))
    return np.array(rows, dtype=float)


def _bisect(passes: Callable[[float], bool], lo: float, hi: float, iterations: int = 20):
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if passes(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def constants_from_table(table: np.ndarray, iterations: int = 20) -> ConeConstants:
    scale, dx, dy = table[:, 0], table[:, 1], table[:, 2]
    counts: dict = {}
    for s in scale:
        if s >= 1:
            k = int(math.floor(math.log2(s)))
            counts[k] = counts.get(k, 0) + 1

    usable = scale >= 1
    ref = float(np.max(np.maximum(dx, dy)[usable] / scale[usable])) if usable.any() else 0.0
    floor = max(ZERO_FLOOR, RELATIVE_FLOOR * ref)

    def fit(residual):
        return sublinear_fit(list(zip(scale, residual)), floor=floor)

    if fit(np.zeros_like(scale)).verdict == INCONCLUSIVE:
        raise InsufficientData("too few populated scale bins", witness=fit(np.zeros_like(scale)))
    mask = dx > 0
    c_hi = float(np.max(dy[mask] / dx[mask])) if mask.any() else 1.0
    c_hi = max(c_hi, 1e-9)

    def lip_ok(c):
        return fit(np.maximum(dy - c * dx, 0.0)).verdict == SUBLINEAR

    if lip_ok(0.0):
        C = 0.0
    else:
        _, C = _bisect(lip_ok, 0.0, c_hi, iterations)

    def exp_ok(m):
        return fit(np.maximum(m * dx - dy, 0.0)).verdict == SUBLINEAR

    if exp_ok(c_hi):
        M = c_hi
    else:
        M, _ = _bisect(lambda m: not exp_ok(m), 0.0, c_hi, iterations)
    if C == 0.0:
        # a cone-null map has no expansion constant, and M <= C by definition
        M = 0.0
    crossed = M > C
    if crossed:
        C = M = 0.5 * (C + M)
    lw = fit(np.maximum(dy - C * dx, 0.0))
    ew = fit(np.maximum(M * dx - dy, 0.0))
    return ConeConstants(C, M, counts, lw, ew, crossed)


def estimate_cone_constants(f: Callable, X: PointedSpace, Y: PointedSpace, k_min: int = 4,
                            k_max: int = 20, per_bin: int = 60, seed: int = 0) -> ConeConstants:
    """Best C with d(fx, fy) <= C d(x, y) + sublinear, best M with >= M d(x, y) - sublinear.

    Residual ratios under ``RELATIVE_FLOOR`` times the largest sampled
    distance ratio are treated as zero; without it, rare isolated pairs make
    the verdict flicker as C grows.  Bisection runs 20 steps over [0, max
    sampled ratio]; C keeps the passing
    (upper) end and M the passing (lower) end.  Noise can make the two cross;
    both are then reported at their midpoint with ``crossed`` set.
    """
    return constants_from_table(distance_table(f, X, Y, k_min, k_max, per_bin, seed))


# -- equivalence and surjectivity ----------------------------------------------------------

def check_cone_equivalent(f1: Callable, f2: Callable, X: PointedSpace, Y: PointedSpace,
                          k_min: int = 4, k_max: int = 20, per_bin: int = 40,
                          seed: int = 0) -> SublinearWitness:
    """sublinear_fit of d(f1(x), f2(x)) against |x|."""
    rng = np.random.default_rng(seed)
    samples = [(X.norm(x), Y.distance(f1(x), f2(x)))
               for x in sample_points(X, k_min, k_max, per_bin, rng)]
    return _require(sublinear_fit(samples), "cone equivalence")


@dataclass(frozen=True)
class SurjectivityVerdict:
    image_density: SublinearWitness
    bilipschitz: bool | None

    @property
    def image_dense(self) -> bool:
        return self.image_density.verdict == SUBLINEAR

    @property
    def cone_surjective(self) -> bool | None:
        """Only meaningful under the bilipschitz precondition; None when it is unknown."""
        if self.bilipschitz is None:
            return None
        return self.image_dense and self.bilipschitz

    def to_json(self) -> dict:
        return {"image_dense": self.image_dense, "bilipschitz_precondition": self.bilipschitz,
                "cone_surjective": self.cone_surjective, "witness": self.image_density.to_json()}


def check_cone_surjective(f: Callable, X: PointedSpace, Y: PointedSpace, k_min: int = 4,
                          k_max: int = 20, per_bin: int = 40, net_k_max: int | None = None,
                          seed: int = 0, constants: ConeConstants | None = None) -> SurjectivityVerdict:
    """sublinear_fit of d(y, f(net)) against |y|, with local refinement of the nearest net point.

    Raises NetTooCoarse when, near some sampled y, consecutive image points are
    farther apart than a tenth of |y|.
    """
    if X.net is None:
        raise ValueError("surjectivity check needs a domain net")
    rng = np.random.default_rng(seed)
    net = list(X.net(net_k_max if net_k_max is not None else 3 * k_max))
    images = [f(x) for x in net]
    packed = np.asarray(images, dtype=float) if Y.batch_distance is not None else None
    samples = []
    for y in sample_points(Y, k_min, k_max, per_bin, rng):
        ny = Y.norm(y)
        if packed is not None:
            dists = Y.batch_distance(y, packed)
        else:
            dists = np.array([Y.distance(y, fx) for fx in images])
        i = int(np.argmin(dists))
        spacing = min(Y.distance(images[i], images[j]) for j in (i - 1, i + 1) if 0 <= j < len(images))
        if spacing > ny / 10 and dists[i] > ny / 10:
            raise NetTooCoarse(f"image net spacing {spacing:.3g} exceeds |y|/10 at |y|={ny:.3g}")
        best = dists[i]
        if X.refine is not None:
            lo = net[max(i - 1, 0)]
            hi = net[min(i + 1, len(net) - 1)]
            x = X.refine(lo, hi, lambda z: Y.distance(y, f(z)))
            best = min(best, Y.distance(y, f(x)))
        samples.append((ny, best))
    w = _require(sublinear_fit(samples), "cone surjectivity")
    return SurjectivityVerdict(w, None if constants is None else constants.bilipschitz)


# -- concrete spaces and the map gallery ------------------------------------------------------

def _real_sampler(lo, hi, rng):
    return float(rng.choice((-1.0, 1.0)) * rng.uniform(lo, hi))


def _real_near(x, radius, rng):
    return float(x + rng.choice((-1.0, 1.0)) * radius)


def _real_net(k_max: int, ratio: float = 1 + 1 / 64):
    pos = list(np.arange(0.0, 64.0, 0.25))
    x = 64.0
    while x < 2.0 ** k_max:
        pos.append(x)
        x *= ratio
    pos.append(x)
    return [-p for p in reversed(pos[1:])] + pos


def _real_refine(lo, hi, objective, iterations: int = 200):
    """Ternary search down to float resolution; library minimizers stop near sqrt(eps) relative."""
    a, b = (lo, hi) if lo <= hi else (hi, lo)
    for _ in range(iterations):
        if b - a <= 4 * math.ulp(max(abs(a), abs(b), 1e-300)):
            break
        m1 = a + (b - a) / 3
        m2 = b - (b - a) / 3
        if objective(m1) <= objective(m2):
            b = m2
        else:
            a = m1
    return min((a, b, 0.5 * (a + b)), key=objective)


REAL_LINE = PointedSpace(lambda x, y: abs(x - y), 0.0, _real_sampler, _real_near,
                         _real_net, _real_refine, "R", lambda y, pts: np.abs(pts - y))


def _plane_sampler(lo, hi, rng):
    t = rng.uniform(0, 2 * math.pi)
    r = rng.uniform(lo, hi)
    return (r * math.cos(t), r * math.sin(t))


def _plane_near(p, radius, rng):
    t = rng.uniform(0, 2 * math.pi)
    return (p[0] + radius * math.cos(t), p[1] + radius * math.sin(t))


PLANE = PointedSpace(lambda p, q: math.hypot(p[0] - q[0], p[1] - q[1]), (0.0, 0.0),
                     _plane_sampler, _plane_near, None, None, "R2",
                     lambda q, pts: np.hypot(pts[:, 0] - q[0], pts[:, 1] - q[1]))


def _cbrt(x):
    return math.copysign(abs(x) ** (1 / 3), x)


MAP_GALLERY: dict = {
    "identity": (lambda x: x, REAL_LINE, REAL_LINE),
    "dilation": (lambda x: 2.0 * x, REAL_LINE, REAL_LINE),
    "cbrt": (_cbrt, REAL_LINE, REAL_LINE),
    "x_plus_sqrt": (lambda x: x + math.sqrt(abs(x)), REAL_LINE, REAL_LINE),
    "x_plus_cbrt": (lambda x: x + _cbrt(x), REAL_LINE, REAL_LINE),
    "x_plus_log": (lambda x: x + math.log1p(abs(x)), REAL_LINE, REAL_LINE),
    "scale_1.01": (lambda x: 1.01 * x, REAL_LINE, REAL_LINE),
    "square": (lambda x: x * x, REAL_LINE, REAL_LINE),
    "embed_plane": (lambda x: (x, 0.0), REAL_LINE, PLANE),
}


@dataclass(frozen=True)
class MapReport:
    name: str
    cone_defined: ConeDefinedVerdict
    constants: ConeConstants | None
    equivalent_to_identity: SublinearWitness | None
    surjectivity: SurjectivityVerdict | None

    def to_json(self) -> dict:
        return {
            "map": self.name,
            "cone_defined": self.cone_defined.to_json(),
            "constants": None if self.constants is None else self.constants.to_json(),
            "equivalent_to_identity": None if self.equivalent_to_identity is None
            else self.equivalent_to_identity.verdict == SUBLINEAR,
            "surjectivity": None if self.surjectivity is None else self.surjectivity.to_json(),
        }


def analyze_map(name: str, k_min: int = 4, k_max: int = 20, per_bin: int = 40,
                seed: int = 0) -> MapReport:
    f, X, Y = MAP_GALLERY[name]
    cd = check_cone_defined(f, X, Y, k_min, k_max, per_bin, seed=seed)
    if not cd.cone_defined:
        return MapReport(name, cd, None, None, None)
    consts = estimate_cone_constants(f, X, Y, k_min, k_max, per_bin, seed)
    equiv = None
    if Y is X:
        equiv = check_cone_equivalent(lambda x: x, f, X, Y, k_min, k_max, per_bin, seed)
    surj = None
    if X.net is not None and Y.sampler is not None:
        surj = check_cone_surjective(f, X, Y, k_min, k_max, per_bin, seed=seed,
                                     constants=consts)
    return MapReport(name, cd, consts, equiv, surj)
