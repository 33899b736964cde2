"""One test per acceptance criterion, each at its stated tolerance.

The conftest summary prints a [PASS]/[FAIL] line per criterion at the end of the run.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

import oracles
from conequiv import cone_analysis as ca
from conequiv import lie_core as lc
from conequiv import presets
from conequiv.cartan_split import build_actions, cartan_subalgebra, is_semisimple_real, unipotent_poly_bound
from conequiv.cone_construct import reduce
from conequiv.group_model import (
    GroupModel,
    log1p_ratio_bound_float,
    log1p_ratio_bound_holds,
    psi_constants,
    residual_study,
    sample_ratio_triples,
)
from conequiv import linalg as la
from conequiv.ultralimit import classify_case, parse_filter


def _criterion_algebras():
    return [presets.heis3(), presets.gJ(), presets.g4()] + [g for g, _ in presets.random_corpus()]


@pytest.mark.criterion(1, "series/radical oracle equivalence")
def test_c1_series_and_radical_match_brute_force():
    algebras = _criterion_algebras()
    assert len(algebras) == 23
    start = time.perf_counter()
    ours = [(lc.lower_central_series(g), lc.exponential_radical(g)) for g in algebras]
    elapsed = time.perf_counter() - start
    for g, (series, radical) in zip(algebras, ours):
        ref = oracles.brute_series_until_stable(g)
        assert [s.dim for s in series] == [t.rows for t in ref]
        for s, t in zip(series, ref):
            assert oracles.same_span([list(b) for b in s.basis], t.tolist())
        rad = oracles.brute_exponential_radical(g)
        assert oracles.same_span([list(b) for b in radical.basis], rad.tolist())
    assert elapsed < 5.0


@pytest.mark.criterion(2, "graded correctness")
def test_c2_graded_heis3_and_layer_compatibility():
    h = presets.heis3()
    gr = lc.associated_graded(h)
    assert gr.algebra.c == lc.change_basis(h, gr.adapted_basis).c
    assert gr.algebra.c == h.c
    for g in _criterion_algebras():
        if not lc.is_nilpotent(g):
            q, _ = lc.quotient(g, lc.exponential_radical(g))
            g = q
        gr = lc.associated_graded(g)
        assert lc.layer_compatible(gr)
        assert sum(layer.dim for layer in gr.layers) == g.dim
        series = lc.lower_central_series(g)
        # [g^i, g^j] inside g^(i+j) on the source algebra too
        for i, a in enumerate(series):
            for j, b in enumerate(series):
                target = series[min(i + j + 1, len(series) - 1)]
                assert lc.bracket_span(g, a, b) <= target


@pytest.mark.criterion(3, "Jordan split exact, exp(S)exp(N) = exp(alpha)")
def test_c3_jordan_split():
    rng = np.random.default_rng(3)
    for g in [presets.gJ(), presets.g4()] + [g for g, _ in presets.random_corpus()]:
        cd = cartan_subalgebra(g)
        sp = build_actions(cd, g)
        k = sp.dim_r
        for a, s, n in zip(sp.alpha, sp.S, sp.N):
            assert la.add(s, n) == a
            assert la.matmul(s, n) == la.matmul(n, s)
            assert la.is_zero(la.matpow(n, max(k, 1)))
            assert is_semisimple_real(s)
        if not k or not sp.v_basis:
            continue
        for _ in range(100):
            nu = rng.normal(size=len(sp.v_basis))
            A = sum(c * oracles.float_matrix(x) for c, x in zip(nu, sp.alpha))
            S = sum(c * oracles.float_matrix(x) for c, x in zip(nu, sp.S))
            N = sum(c * oracles.float_matrix(x) for c, x in zip(nu, sp.N))
            lhs = oracles.expm_oracle(S) @ oracles.expm_oracle(N)
            rhs = oracles.expm_oracle(A)
            assert np.max(np.abs(lhs - rhs)) <= 1e-9 * max(1.0, np.max(np.abs(rhs)))


@pytest.mark.criterion(4, "unipotent polynomial bound")
def test_c4_unipotent_polynomial_bound():
    grid = np.linspace(1.0, 1000.0, 200)
    for name in ("gJ", "g4", "gJ_heis"):
        g = presets.preset(name)
        cd = cartan_subalgebra(g)
        rep = unipotent_poly_bound(build_actions(cd, g), grid)
        assert rep.degree == cd.r.dim - 1
        assert rep.stable
    rep = unipotent_poly_bound(build_actions(cartan_subalgebra(presets.gJ()), presets.gJ()), grid)
    assert rep.C == pytest.approx(1.0, abs=0.01)


@pytest.mark.criterion(5, "residual bound |d1 - d2| on gJ and g4")
def test_c5_residual_bound():
    start = time.perf_counter()
    for name in ("gJ", "g4"):
        study = residual_study(GroupModel(presets.preset(name)), k_min=4, k_max=20,
                               pairs=10_000, seed=0)
        assert len(study.samples) >= 10_000
        assert sorted(study.K_per_bin) == list(range(4, 20))
        assert study.K_spread < 2.0, name
        assert study.ratio_drop >= 4.0, name
    assert time.perf_counter() - start < 60.0


@pytest.mark.criterion(6, "psi constants within [0.95, 1.05] on gJ")
def test_c6_psi_constants():
    consts = psi_constants(GroupModel(presets.gJ()), seed=0)
    assert 0.95 <= consts.C_best <= 1.05
    assert 0.95 <= consts.M_best <= 1.05


@pytest.mark.criterion(7, "tower-space exact table")
def test_c7_tower_table():
    start = time.perf_counter()
    r1 = classify_case(parse_filter("case1"))
    assert r1.case == 1 and r1.best_lipschitz == 0 and r1.cone_points == [0]
    r2 = classify_case(parse_filter("case2"))
    assert r2.case == 2 and r2.best_lipschitz == 1 and r2.cone_points == [0, 1]
    for lam in (1, 2, 5, 10):
        r3 = classify_case(parse_filter(f"case3_l{lam}"))
        ell = r3.ell.as_fraction()
        assert r3.case == 3
        assert r3.lambda_tower == lam
        assert r3.best_lipschitz == lam
        assert r3.cone_points == [0, ell, (1 + Fraction(1, lam * lam)) * ell]
        assert r3.induced_map[2] == ((1 + Fraction(1, lam * lam)) * ell, (1 + Fraction(1, lam)) * ell)
    assert time.perf_counter() - start < 10.0


@pytest.mark.criterion(8, "map gallery classifications")
def test_c8_map_gallery():
    cbrt = ca.analyze_map("cbrt")
    assert cbrt.constants.cone_null
    sqrt_map = ca.analyze_map("x_plus_sqrt")
    assert sqrt_map.cone_defined.cone_defined
    assert sqrt_map.equivalent_to_identity.verdict == ca.SUBLINEAR
    dil = ca.analyze_map("dilation")
    assert 1.9 <= dil.constants.C_best <= 2.1
    assert 1.9 <= dil.constants.M_best <= 2.1
    sq = ca.analyze_map("square")
    assert not sq.cone_defined.linear_growth


@pytest.mark.criterion(9, "log(1+a) ratio bound, 1e5 triples")
def test_c9_log1p_ratio_bound():
    triples = sample_ratio_triples(100_000, seed=9)
    assert len(triples) == 100_000
    violations = sum(1 for a, b, c in triples if not log1p_ratio_bound_holds(a, b, c))
    assert violations == 0
    float_violations = sum(1 for a, b, c in triples[:20_000]
                           if a > 0 and b > 0 and not log1p_ratio_bound_float(float(a), float(b), float(c)))
    assert float_violations == 0


@pytest.mark.criterion(10, "composite to the graded model on g4")
def test_c10_graded_composite():
    g = presets.g4()
    pair = reduce(g)
    q, _ = lc.quotient(g, lc.exponential_radical(g))
    assert lc.is_nilpotent(q) and q.is_abelian()
    assert not lc.subalgebra(g, lc.exponential_radical(g)).is_abelian()
    assert pair.dim_r == 3
    study = residual_study(GroupModel(g), k_min=4, k_max=20, pairs=10_000, seed=0, law="graded")
    assert study.K_spread < 2.0
    assert study.ratio_drop >= 4.0
    assert math.isfinite(study.K)
