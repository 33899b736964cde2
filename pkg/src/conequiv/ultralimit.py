"""Ultralimits along subsequence filters, and the exact tower-space example.

A non-principal ultrafilter is replaced by a strictly increasing index
sequence: whenever a sequence has a limit along it, every ultrafilter that
contains the range of the subsequence selects that same limit.

The tower space lives inside the reals:

    X = union over m of {2^(2^m), 2^(2^m) * (1 + v(m)^-2)}

Its points are too large for floats, so they are kept in exact
``ScaledRational`` form 2^E * q.  Every comparison is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from math import isqrt
from typing import Callable, Sequence

from .errors import HorizonTooSmall

# sigma(j) leaving this many exponent bits counts as leaving the evaluable range
MAX_EXPONENT_BITS = 1 << 22
# |log2| past this, and still moving outward, is read as escaping to 0 or infinity
ESCAPE_BITS = 64
# a tower index whose 2^(2^m) is still small enough to materialize as an int
AMBIENT_EXPONENT_CAP = 1 << 16


@total_ordering
class ScaledRational:
    """A positive rational 2^E * q, with integer E and Fraction q in [1, 2)."""

    __slots__ = ("E", "q")

    def __init__(self, E: int, q=1):
        q = Fraction(q)
        if q <= 0:
            raise ValueError("ScaledRational holds positive values only")
        # normalize q into [1, 2) with bit-length arithmetic, never a loop over E
        shift = q.numerator.bit_length() - q.denominator.bit_length()
        if shift > 0:
            q /= 1 << shift
        elif shift < 0:
            q *= 1 << -shift
        if q >= 2:
            q /= 2
            shift += 1
        elif q < 1:
            q *= 2
            shift -= 1
        self.E = int(E) + shift
        self.q = q

    @classmethod
    def of(cls, x) -> "ScaledRational":
        if isinstance(x, ScaledRational):
            return x
        return cls(0, Fraction(x))

    @classmethod
    def power_of_two(cls, e: int) -> "ScaledRational":
        return cls(e, 1)

    def __mul__(self, other):
        other = ScaledRational.of(other)
        return ScaledRational(self.E + other.E, self.q * other.q)

    __rmul__ = __mul__

    def inverse(self) -> "ScaledRational":
        return ScaledRational(-self.E, 1 / self.q)

    def __truediv__(self, other):
        return self * ScaledRational.of(other).inverse()

    def __eq__(self, other):
        if not isinstance(other, ScaledRational):
            if isinstance(other, (int, Fraction)) and other > 0:
                other = ScaledRational.of(other)
            else:
                return NotImplemented
        return self.E == other.E and self.q == other.q

    def __lt__(self, other):
        other = ScaledRational.of(other)
        return (self.E, self.q) < (other.E, other.q)

    def __hash__(self):
        return hash((self.E, self.q))

    def __repr__(self):
        return f"ScaledRational(E={self.E}, q={self.q})"

    def log2(self) -> float:
        """Approximate log2, infinite when E is beyond float range."""
        try:
            return float(self.E) + math.log2(self.q)
        except OverflowError:
            return math.copysign(math.inf, self.E)

    def to_fraction(self, max_bits: int = AMBIENT_EXPONENT_CAP) -> Fraction:
        if abs(self.E) > max_bits:
            raise OverflowError("exponent too large to materialize")
        return self.q * (Fraction(2) ** self.E)

    def is_integer(self) -> bool:
        if self.E < 0:
            return False
        return (self.q * (1 << min(self.E, self.q.denominator.bit_length()))).denominator == 1

    def abs_diff(self, other: "ScaledRational", max_gap: int = AMBIENT_EXPONENT_CAP):
        """|self - other| exactly; None when the values are equal."""
        hi, lo = (self, other) if self >= other else (other, self)
        if hi == lo:
            return None
        gap = hi.E - lo.E
        if gap > max_gap:
            raise OverflowError("exponent gap too large for an exact difference")
        return ScaledRational(lo.E, hi.q * (1 << gap) - lo.q)


def log_distance_key(a: ScaledRational, b: ScaledRational) -> ScaledRational:
    """max(a/b, b/a): ordering it orders |log(a/b)| exactly."""
    r = a / b
    return r if r >= ScaledRational(0) else r.inverse()


# -- v rules -------------------------------------------------------------------------------

@dataclass(frozen=True)
class VRule:
    """A map from tower indices onto the positive integers with infinite fibers."""
    name: str
    rule: Callable[[int], int]
    fibers: str
    # exact evaluation at huge ScaledRational integers, when the rule allows one
    at_scaled: Callable | None = None

    def __call__(self, m: int) -> int:
        return self.rule(m)


def _ruler(m: int) -> int:
    k = m + 1
    return (k & -k).bit_length()


def _ruler_at_power_of_two(n: "ScaledRational"):
    # 2^E + 1 is odd for E >= 1, so the valuation is 0
    return 1 if n.q == 1 and n.E >= 1 else None


def _triangle(m: int) -> int:
    # blocks 1 | 1 2 | 1 2 3 | ...; block b starts at index b(b-1)/2
    b = (1 + isqrt(8 * m + 1)) // 2
    if b * (b - 1) // 2 > m:
        b -= 1
    return m - b * (b - 1) // 2 + 1


V_RULES = {
    "ruler": VRule("ruler", _ruler,
                   "v(m) = 1 + 2-adic valuation of m+1; v(m) = c exactly on m = 2^(c-1)(2j+1) - 1",
                   _ruler_at_power_of_two),
    "triangle": VRule("triangle", _triangle,
                      "runs 1; 1,2; 1,2,3; ...; v = j at the run ends m = j(j+1)/2 - 1"),
}


# -- filters ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class FilterSpec:
    """A strictly increasing subsequence sigma(j), j >= start, standing in for an ultrafilter."""
    name: str
    sigma: Callable[[int], object]
    description: str
    start: int = 1
    horizon: int = 24
    default_v: str = "ruler"
    tol: float = 1e-6

    def indices(self, horizon: int | None = None) -> range:
        return range(self.start, self.start + (horizon or self.horizon))


def tower(m: int) -> ScaledRational:
    """2^(2^m)."""
    if m > MAX_EXPONENT_BITS:
        raise HorizonTooSmall(f"tower index {m} exceeds the evaluable range")
    return ScaledRational.power_of_two(1 << m)


def _tower_filter(name, index_rule, description, **kw) -> FilterSpec:
    return FilterSpec(name, lambda j: tower(index_rule(j)), description, **kw)


def _case3_filter(lam: int) -> FilterSpec:
    return _tower_filter(
        f"case3_l{lam}", lambda j: (1 << (lam - 1)) * (2 * j + 1) - 1,
        f"towers at m_j = 2^{lam - 1}(2j+1) - 1, where the ruler rule is exactly {lam}",
        start=0, horizon=12, default_v="ruler")


FILTERS = {
    "case1": FilterSpec(
        "case1", lambda j: ScaledRational.power_of_two(3 << (j - 1)),
        "n_j = 2^(3 * 2^(j-1)), the log-midpoint between consecutive towers",
        start=1, horizon=24, default_v="ruler"),
    "case2": _tower_filter(
        "case2", lambda j: j * (j + 1) // 2 - 1,
        "towers at the triangle run ends m_j = j(j+1)/2 - 1, where v = j grows without bound",
        start=1, horizon=1000, default_v="triangle"),
    "towers": _tower_filter("towers", lambda j: j, "every tower n_j = 2^(2^j)",
                            start=1, horizon=40, default_v="ruler"),
    "factorial": FilterSpec("factorial", lambda j: ScaledRational.of(math.factorial(j)),
                            "n_j = j!", start=2, horizon=400, default_v="ruler"),
    "evens": FilterSpec("evens", lambda j: 2 * j, "n_j = 2j", start=1, horizon=200),
    "odds": FilterSpec("odds", lambda j: 2 * j + 1, "n_j = 2j + 1", start=0, horizon=200),
}
for _lam in (1, 2, 3, 5, 10):
    FILTERS[f"case3_l{_lam}"] = _case3_filter(_lam)


def parse_filter(text: str) -> FilterSpec:
    """A preset name, ``case3_l<k>`` for any k >= 1, or ``tower:a*j+b`` (towers at m = a j + b)."""
    if text in FILTERS:
        return FILTERS[text]
    if text.startswith("case3_l") and text[7:].isdigit() and int(text[7:]) >= 1:
        return _case3_filter(int(text[7:]))
    if text.startswith("tower:"):
        body = text[6:].replace(" ", "")
        try:
            a_part, b_part = (body.split("*j") + [""])[:2]
            a = int(a_part) if a_part else 1
            b = int(b_part) if b_part else 0
        except ValueError:
            raise ValueError(f"cannot parse tower rule {text!r}; expected tower:a*j+b") from None
        if a < 1:
            raise ValueError("tower rule needs a >= 1 to be strictly increasing")
        start = max(0, -(b // a))
        return _tower_filter(text, lambda j: a * j + b, f"towers at m_j = {a}j + {b}",
                             start=start, horizon=24)
    raise ValueError(f"unknown filter {text!r}; choose from {sorted(FILTERS)} or tower:a*j+b")


# -- limits along a filter -----------------------------------------------------------------

@dataclass(frozen=True)
class Limit:
    """kind: exact | cauchy | zero | infinity | zero_or_infinity."""
    kind: str
    value: object = None        # Fraction or ScaledRational for exact, float for cauchy

    @property
    def finite_nonzero(self) -> bool:
        return self.kind in ("exact", "cauchy") and _as_float(self.value) != 0.0

    @property
    def degenerate(self) -> bool:
        return self.kind in ("zero", "infinity", "zero_or_infinity") or (
            self.kind in ("exact", "cauchy") and _as_float(self.value) == 0.0)

    def as_fraction(self) -> Fraction | None:
        if self.kind != "exact":
            return None
        v = self.value
        return v.to_fraction() if isinstance(v, ScaledRational) else Fraction(v)

    def to_json(self):
        if self.kind == "exact":
            f = self.as_fraction()
            return {"kind": "exact", "value": str(f), "float": float(f)}
        if self.kind == "cauchy":
            return {"kind": "cauchy", "value": self.value}
        return {"kind": self.kind, "value": {"zero": 0.0, "infinity": "inf"}.get(self.kind)}


@dataclass(frozen=True)
class Divergent:
    """The sequence still oscillates at the horizon; the filter does not decide a limit."""
    tail: tuple
    reason: str = "oscillation persists at the horizon"

    kind = "divergent"

    def to_json(self):
        return {"kind": "divergent", "reason": self.reason,
                "tail": [_json_number(x) for x in self.tail]}


def _as_float(x) -> float:
    if isinstance(x, ScaledRational):
        lg = x.log2()
        if lg > 1000:
            return math.inf
        if lg < -1000:
            return 0.0
        return float(x.q) * 2.0 ** x.E
    return float(x)


def _log2_abs(x) -> float:
    if isinstance(x, ScaledRational):
        return x.log2()
    x = abs(Fraction(x)) if not isinstance(x, float) else abs(x)
    return -math.inf if x == 0 else math.log2(x)


def _json_number(x):
    if isinstance(x, (ScaledRational, Fraction)):
        lg = _log2_abs(x)
        return {"log2": lg} if abs(lg) > 1000 else _as_float(x)
    return x


def limit_of_values(values: Sequence, tol: float = 1e-6):
    """Limit of a finite prefix: exact constant tail, escape, Cauchy tail, else Divergent."""
    if len(values) < 8:
        raise HorizonTooSmall("need at least 8 filter terms to judge a limit")
    half = values[len(values) // 2:]
    if all(x == half[0] for x in half):
        return Limit("exact", half[0])
    logs = [_log2_abs(x) for x in half]
    if all(b > a for a, b in zip(logs, logs[1:])) and logs[-1] >= ESCAPE_BITS:
        return Limit("infinity")
    if all(b < a for a, b in zip(logs, logs[1:])) and logs[-1] <= -ESCAPE_BITS:
        return Limit("zero")
    mags = [abs(v) for v in logs]
    if all(b > a for a, b in zip(mags, mags[1:])) and mags[-1] >= ESCAPE_BITS:
        return Limit("zero_or_infinity")
    quarter = [_as_float(x) for x in values[3 * len(values) // 4:]]
    if all(math.isfinite(x) for x in quarter) and max(quarter) - min(quarter) <= tol:
        return Limit("cauchy", quarter[-1])
    return Divergent(tuple(values[-4:]))


def ultralimit_along(seq: Callable, fs: FilterSpec, tol: float | None = None,
                     horizon: int | None = None):
    """Limit of seq(sigma(j)) for j over the filter's horizon, or a Divergent value."""
    values = []
    for j in fs.indices(horizon):
        try:
            n = fs.sigma(j)
        except (OverflowError, MemoryError) as exc:
            raise HorizonTooSmall(f"sigma({j}) leaves the evaluable range") from exc
        values.append(seq(n))
    return limit_of_values(values, fs.tol if tol is None else tol)


# -- the tower space -------------------------------------------------------------------------

@dataclass(frozen=True)
class TowerPoint:
    """2^(2^index) * (1 + eps * v(index)^-2) and, for eps, its image 2^(2^index) * (1 + 1/v)."""
    index: int
    eps: bool
    v: int

    @property
    def value(self) -> ScaledRational:
        base = tower(self.index)
        return base * (1 + Fraction(1, self.v * self.v)) if self.eps else base

    @property
    def image(self) -> ScaledRational:
        base = tower(self.index)
        return base * (1 + Fraction(1, self.v)) if self.eps else base


def _as_scaled(x) -> ScaledRational:
    return x if isinstance(x, ScaledRational) else ScaledRational.of(x)


def _candidate_indices(x: ScaledRational) -> range:
    if x.E < 1:
        raise ValueError("projections are defined for x >= 2")
    # log2 x lies in [E, E+1), so the nearest towers sit at m or m+1 with m = floor(log2 E)
    m = x.E.bit_length() - 1
    return range(max(0, m - 1), m + 3)


def _nearest(x: ScaledRational, candidates) -> TowerPoint:
    best, best_key = None, None
    for p in candidates:
        key = log_distance_key(p.value, x)
        # ties go to the larger point; candidates arrive in increasing order
        if best_key is None or key <= best_key:
            best, best_key = p, key
    return best


def projections_u(x, v: VRule = V_RULES["ruler"]) -> TowerPoint:
    """Largest point of {2^(2^m)} minimizing |log(y/x)|."""
    x = _as_scaled(x)
    return _nearest(x, [TowerPoint(m, False, v(m)) for m in _candidate_indices(x)])


def projections_u_prime(x, v: VRule = V_RULES["ruler"]) -> TowerPoint:
    """Largest point of {2^(2^m)(1 + v(m)^-2)} minimizing |log(y/x)|."""
    x = _as_scaled(x)
    return _nearest(x, [TowerPoint(m, True, v(m)) for m in _candidate_indices(x)])


# -- classification --------------------------------------------------------------------------

INFINITY = "inf"


@dataclass
class TowerConeReport:
    filter: str
    v_rule: str
    ell: object
    ell_prime: object
    lambda_tower: object          # int, INFINITY, or Divergent
    lambda_ambient: object        # int, INFINITY, Divergent, or None when not evaluable
    case: int | None
    cone_points: list = field(default_factory=list)
    induced_map: list = field(default_factory=list)
    best_lipschitz: object = None
    isometry_defect: float | None = None
    reason: str = ""

    @property
    def decided(self) -> bool:
        return self.case is not None

    def to_json(self) -> dict:
        def num(x):
            if isinstance(x, Fraction):
                return {"exact": str(x), "float": float(x)}
            if hasattr(x, "to_json"):
                return x.to_json()
            return x
        return {
            "filter": self.filter, "v_rule": self.v_rule, "case": self.case,
            "decided": self.decided, "reason": self.reason,
            "ell": num(self.ell), "ell_prime": num(self.ell_prime),
            "lambda_tower": num(self.lambda_tower), "lambda_ambient": num(self.lambda_ambient),
            "cone_points": [num(p) for p in self.cone_points],
            "induced_map": [[num(a), num(b)] for a, b in self.induced_map],
            "best_lipschitz": num(self.best_lipschitz),
            "isometry_defect": self.isometry_defect,
        }


def _integer_limit(values: Sequence):
    half = values[len(values) // 2:]
    if all(x == half[0] for x in half):
        return half[0]
    if all(b > a for a, b in zip(half, half[1:])):
        return INFINITY
    return Divergent(tuple(half[-4:]), "v does not settle along the filter")


def _ambient_v(n, v: VRule):
    n = _as_scaled(n)
    if v.at_scaled is not None:
        value = v.at_scaled(n)
        if value is not None:
            return value
    if n.E > AMBIENT_EXPONENT_CAP or not n.is_integer():
        return None
    return v(int(n.to_fraction()))


def best_lipschitz(table: Sequence[tuple]) -> Fraction:
    """Exact best Lipschitz constant of a map on finitely many reals; 0 on a single point."""
    best = Fraction(0)
    for i, (a, fa) in enumerate(table):
        for b, fb in table[i + 1:]:
            if a != b:
                best = max(best, abs(Fraction(fa) - Fraction(fb)) / abs(Fraction(a) - Fraction(b)))
    return best


def classify_case(fs: FilterSpec, v: VRule | None = None, horizon: int | None = None,
                  tol: float | None = None) -> TowerConeReport:
    """Cone of the tower space along ``fs``: the limits, the case, and the induced map."""
    v = v or V_RULES[fs.default_v]
    tol = fs.tol if tol is None else tol
    ns, us, ups = [], [], []
    for j in fs.indices(horizon):
        try:
            n = _as_scaled(fs.sigma(j))
        except (OverflowError, MemoryError) as exc:
            raise HorizonTooSmall(f"sigma({j}) leaves the evaluable range") from exc
        ns.append(n)
        us.append(projections_u(n, v))
        ups.append(projections_u_prime(n, v))
    ell = limit_of_values([u.value / n for u, n in zip(us, ns)], tol)
    ell_p = limit_of_values([u.value / n for u, n in zip(ups, ns)], tol)
    lam_tower = _integer_limit([u.v for u in ups])
    ambient = [_ambient_v(n, v) for n in ns]
    lam_ambient = None if any(a is None for a in ambient) else _integer_limit(ambient)
    report = TowerConeReport(fs.name, v.name, ell, ell_p, lam_tower, lam_ambient, None)

    for name, lim in (("ell", ell), ("ell_prime", ell_p)):
        if isinstance(lim, Divergent):
            report.reason = f"filter does not decide: {name} diverges"
            return report
    if ell.degenerate and ell_p.degenerate:
        report.case = 1
        report.cone_points = [Fraction(0)]
        report.induced_map = [(Fraction(0), Fraction(0))]
        report.best_lipschitz = best_lipschitz(report.induced_map)
        return report
    if not (ell.finite_nonzero and ell_p.finite_nonzero):
        report.reason = "filter does not decide: one limit is degenerate and the other is not"
        return report
    if ell.kind != "exact":
        report.reason = "ell is not an exact limit along this filter"
        return report
    ell_f = ell.as_fraction()
    # induced map on the tower points: i fixes Y and sends p to 2^(2^m)(1 + 1/v)
    image_p = limit_of_values([u.image / n for u, n in zip(ups, ns)], tol)
    isometry = limit_of_values([_distance_ratio(a.value, b.value, n)
                                for a, b, n in zip(us, ups, ns)], tol)
    if lam_tower == INFINITY and abs(_as_float(ell_p.value) - float(ell_f)) <= tol:
        report.case = 2
        report.cone_points = [Fraction(0), ell_f]
        report.induced_map = [(Fraction(0), Fraction(0)), (ell_f, ell_f)]
        report.best_lipschitz = best_lipschitz(report.induced_map)
        report.isometry_defect = abs(_limit_float(isometry) - abs(float(ell_f) - _as_float(ell_p.value)))
        return report
    if isinstance(lam_tower, int) and ell_p.kind == "exact" and image_p.kind == "exact":
        lam = Fraction(lam_tower)
        ellp_f, image_f = ell_p.as_fraction(), image_p.as_fraction()
        if ellp_f != (1 + lam ** -2) * ell_f or image_f != (1 + 1 / lam) * ell_f:
            report.reason = "exact limits break the relation l' = (1 + lambda^-2) l"
            return report
        report.case = 3
        report.cone_points = [Fraction(0), ell_f, ellp_f]
        report.induced_map = [(Fraction(0), Fraction(0)), (ell_f, ell_f), (ellp_f, image_f)]
        report.best_lipschitz = best_lipschitz(report.induced_map)
        report.isometry_defect = abs(_limit_float(isometry) - float(ellp_f - ell_f))
        return report
    report.reason = "filter does not decide: lambda has no limit consistent with the cone points"
    return report


def _distance_ratio(a: ScaledRational, b: ScaledRational, n: ScaledRational):
    d = a.abs_diff(b)
    return Fraction(0) if d is None else d / n


def _limit_float(lim) -> float:
    if isinstance(lim, Divergent):
        return math.nan
    if lim.kind == "exact":
        return float(lim.as_fraction())
    if lim.kind == "cauchy":
        return lim.value
    return math.inf if lim.kind == "infinity" else math.nan


def lipschitz_family(lambdas: Sequence[int] = (1, 2, 5, 10)) -> dict:
    """best_lipschitz along the Case 3 preset for each lambda; unbounded in lambda."""
    return {lam: classify_case(parse_filter(f"case3_l{lam}")).best_lipschitz for lam in lambdas}
