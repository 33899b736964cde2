import oracles
from conequiv import linalg as la
from conequiv import lie_core as lc
from conequiv import presets
from conequiv.cone_construct import (
    check_pair,
    class_C_check,
    equal_up_to_permutation,
    reduce,
)


def span(g, *names):
    idx = {n: i for i, n in enumerate(g.labels)}
    return lc.Subspace.span(g.dim, [la.unit(g.dim, idx[n]) for n in names])


def brackets(g):
    """Nonzero brackets as {(a, b): {c: coeff}} for a < b in basis order."""
    out = {}
    for i in range(g.dim):
        for j in range(i + 1, g.dim):
            v = g.bracket(la.unit(g.dim, i), la.unit(g.dim, j))
            nz = {g.labels[k]: x for k, x in enumerate(v) if x}
            if nz:
                out[(g.labels[i], g.labels[j])] = nz
    return out


class TestBuild:
    def test_gJ_jordan_block_is_diagonalized(self):
        pair = reduce(presets.gJ())
        assert pair.g1.labels == ("T", "X", "Y")
        assert brackets(pair.g1) == {("T", "X"): {"X": 1}, ("T", "Y"): {"Y": 1}}

    def test_g4_is_a_fixed_point(self):
        g = presets.g4()
        assert equal_up_to_permutation(reduce(g).g1, g)

    def test_nilpotent_keeps_only_quotient_part(self):
        pair = reduce(presets.heis3())
        assert pair.dim_r == 0
        assert pair.g1.dim == 3 and pair.g1.c == presets.heis3().c

    def test_g5_drops_w(self):
        g = presets.g5()
        pair = reduce(g)
        assert pair.dim_v == 2 and pair.dim_r == 3
        assert pair.g1.dim == 5
        # [T1, T2] = Z lies in w, so it vanishes after projecting along w
        assert la.is_zero_vec(pair.g1.bracket(la.unit(5, 0), la.unit(5, 1)))

    def test_dimensions_and_radical_on_corpus(self, corpus):
        for g in corpus:
            pair = reduce(g)
            assert pair.g1.dim == pair.dim_r + pair.dim_v
            assert oracles.jacobi_ok(oracles.structure_tensor(pair.g1))
            rad = oracles.brute_exponential_radical(pair.g1)
            assert oracles.same_span([list(b) for b in pair.r_in_g1().basis], rad.tolist())
            assert check_pair(pair).passed

    def test_brackets_inside_r_unchanged(self):
        g = presets.gJ_heis()
        pair = reduce(g)
        m = pair.dim_v
        for i in range(pair.dim_r):
            for j in range(pair.dim_r):
                inner = pair.g1.bracket(la.unit(4, m + i), la.unit(4, m + j))[m:]
                outer = g.bracket(pair.r_embedding[i], pair.r_embedding[j])
                image = [sum(c * x[k] for c, x in zip(inner, pair.r_embedding)) for k in range(4)]
                assert tuple(image) == tuple(outer)

    def test_idempotent(self):
        for name in ("gJ", "g4", "g5", "gJ_heis"):
            g1 = reduce(presets.preset(name)).g1
            assert equal_up_to_permutation(reduce(g1).g1, g1)

    def test_provenance_records_discarded_part(self):
        prov = reduce(presets.gJ()).provenance()
        assert prov["discarded_nilpotent_nonzero"] == [True]
        assert prov["g1_labels"] == ["T", "X", "Y"]


class TestClassC:
    def test_reduced_gJ_passes(self):
        assert check_pair(reduce(presets.gJ())).passed

    def test_original_gJ_fails_diagonalizability_only(self):
        g = presets.gJ()
        v = class_C_check(g, span(g, "X", "Y"), span(g, "T"))
        assert not v.passed
        assert v.semidirect and v.commutator_centralizes and not v.semisimple_real
        assert v.failures == ("(2) action of h on r is not R-diagonalizable",)

    def test_abelian_plane(self):
        g = presets.abelian(2)
        assert class_C_check(g, span(g, "A1"), span(g, "A0")).passed

    def test_not_a_semidirect_sum(self):
        g = presets.g4()
        v = class_C_check(g, span(g, "X", "Y"), span(g, "T"))
        assert not v.semidirect

    def test_commutator_must_centralize(self):
        # Heisenberg acting on R^3 by strictly upper triangular matrices
        g = lc.from_brackets(["X", "Y", "Z", "E1", "E2", "E3"],
                             {("X", "Y"): {"Z": 1}, ("X", "E2"): {"E1": 1},
                              ("Y", "E3"): {"E2": 1}, ("Z", "E3"): {"E1": 1}})
        v = class_C_check(g, span(g, "E1", "E2", "E3"), span(g, "X", "Y", "Z"))
        assert v.semidirect and not v.commutator_centralizes
        assert "(3) [h, h] does not centralize r" in v.failures

    def test_verdict_json(self):
        js = check_pair(reduce(presets.g4())).to_json()
        assert js["passed"] and js["failures"] == []
