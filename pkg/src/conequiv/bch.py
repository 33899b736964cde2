"""Baker-Campbell-Hausdorff products on nilpotent Lie algebras via Dynkin's formula.

The series is truncated at the nilpotency class, which makes it exact.
Coefficients are rational and attached to right-nested words in the letters
0 (for x) and 1 (for y): the word (a1, ..., ad) stands for [a1, [a2, ... ad]].
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Callable, Sequence

from .errors import NotNilpotent
from .lie_core import LieAlgebra, lower_central_series


def _compositions(total: int, parts: int):
    """(r_i, s_i) pairs with r_i + s_i >= 1 and sum r_i + s_i = total."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for r in range(first + 1):
            for rest in _compositions(total - first, parts - 1):
                yield ((r, first - r),) + rest


@lru_cache(maxsize=None)
def dynkin_coefficients(depth: int) -> dict:
    """Map word -> Fraction coefficient for all words of length <= depth."""
    coeffs: dict = {}
    for d in range(1, depth + 1):
        for n in range(1, d + 1):
            sign = Fraction((-1) ** (n - 1), n)
            for comp in _compositions(d, n):
                denom = d
                word = []
                for r, s in comp:
                    denom *= factorial(r) * factorial(s)
                    word.extend([0] * r + [1] * s)
                # a right-nested bracket whose two innermost letters agree is zero
                if d > 1 and word[-1] == word[-2]:
                    continue
                w = tuple(word)
                coeffs[w] = coeffs.get(w, Fraction(0)) + sign / denom
    return {w: c for w, c in coeffs.items() if c}


def nilpotency_class(g: LieAlgebra) -> int:
    series = lower_central_series(g)
    if series[-1].dim != 0:
        raise NotNilpotent("algebra is not nilpotent")
    return len(series) - 1


def sparse_bracket(g: LieAlgebra, convert: Callable = float):
    """A bracket on plain sequences using only the nonzero structure constants."""
    terms = []
    for i, j, k, v in g.nonzero_brackets():
        terms.append((i, j, k, convert(v)))
        terms.append((j, i, k, convert(-v)))
    n = g.dim

    def bracket(x: Sequence, y: Sequence) -> list:
        out = [0] * n
        for i, j, k, v in terms:
            xi, yj = x[i], y[j]
            if xi and yj:
                out[k] = out[k] + v * xi * yj
        return out
    return bracket


class BCH:
    """x * y = log(exp x exp y) on a nilpotent algebra, for any numeric scalar type."""

    def __init__(self, g: LieAlgebra, convert: Callable = float):
        self.algebra = g
        self.depth = max(nilpotency_class(g), 1) if g.dim else 1
        self.convert = convert
        self._bracket = sparse_bracket(g, convert)
        words = dynkin_coefficients(self.depth) if not g.is_abelian() else {(0,): 1, (1,): 1}
        self.words = sorted(((w, convert(c)) for w, c in words.items()), key=lambda t: len(t[0]))

    def bracket(self, x, y):
        return self._bracket(x, y)

    def __call__(self, x: Sequence, y: Sequence) -> list:
        n = self.algebra.dim
        if n == 0:
            return []
        pair = (list(x), list(y))
        cache: dict = {}

        def nested(word):
            # right-nested bracket, memoized by suffix since words share tails
            if len(word) == 1:
                return pair[word[0]]
            val = cache.get(word)
            if val is None:
                val = self._bracket(pair[word[0]], nested(word[1:]))
                cache[word] = val
            return val

        out = [a + b for a, b in zip(pair[0], pair[1])]
        for w, c in self.words:
            if len(w) > 1:
                out = [o + c * v for o, v in zip(out, nested(w))]
        return out

    def inverse(self, x: Sequence) -> list:
        return [-a for a in x]


def bch_multiply(g: LieAlgebra, x: Sequence, y: Sequence, convert: Callable = float) -> list:
    return BCH(g, convert)(x, y)
