import math

import numpy as np
import pytest

from conequiv import cone_analysis as ca
from conequiv.errors import InsufficientData, NetTooCoarse

R = ca.REAL_LINE


def profile(fn, lo=4, hi=20, per_bin=40, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for k in range(lo, hi):
        for s in rng.uniform(2.0 ** k, 2.0 ** (k + 1), size=per_bin):
            out.append((float(s), fn(float(s))))
    return out


class TestSublinearFit:
    def test_sqrt_is_sublinear(self):
        assert ca.sublinear_fit(profile(math.sqrt)).verdict == ca.SUBLINEAR

    def test_linear_is_not(self):
        assert ca.sublinear_fit(profile(lambda s: 0.1 * s)).verdict == ca.NOT_SUBLINEAR

    def test_zero_is_sublinear(self):
        w = ca.sublinear_fit(profile(lambda s: 0.0))
        assert w.verdict == ca.SUBLINEAR and max(w.envelope) == 0

    def test_log_is_sublinear(self):
        assert ca.sublinear_fit(profile(math.log1p)).verdict == ca.SUBLINEAR

    def test_underpopulated_is_inconclusive(self):
        w = ca.sublinear_fit(profile(math.sqrt, per_bin=10))
        assert w.verdict == ca.INCONCLUSIVE and w.bins == ()

    def test_too_few_bins(self):
        assert ca.sublinear_fit(profile(math.sqrt, hi=12)).verdict == ca.INCONCLUSIVE

    def test_no_samples(self):
        with pytest.raises(InsufficientData):
            ca.sublinear_fit([])

    def test_envelope_non_increasing(self):
        w = ca.sublinear_fit(profile(lambda s: s ** 0.8))
        assert all(a >= b for a, b in zip(w.envelope, w.envelope[1:]))

    def test_late_growth_is_not_sublinear(self):
        # zero at small scales, then linear: the tail from the peak is too short
        w = ca.sublinear_fit(profile(lambda s: 0.0 if s < 2 ** 17 else s))
        assert w.verdict == ca.NOT_SUBLINEAR


class TestConeDefined:
    def test_identity(self):
        assert ca.check_cone_defined(lambda x: x, R, R).cone_defined

    def test_x_plus_cbrt(self):
        assert ca.check_cone_defined(ca.MAP_GALLERY["x_plus_cbrt"][0], R, R).cone_defined
        w = ca.check_cone_equivalent(lambda x: x, ca.MAP_GALLERY["x_plus_cbrt"][0], R, R)
        assert w.verdict == ca.SUBLINEAR

    def test_square_fails_growth(self):
        v = ca.check_cone_defined(lambda x: x * x, R, R)
        assert not v.linear_growth and not v.cone_defined


class TestConstants:
    def test_dilation(self):
        c = ca.estimate_cone_constants(lambda x: 2 * x, R, R)
        assert 1.9 <= c.C_best <= 2.1 and 1.9 <= c.M_best <= 2.1
        assert c.bilipschitz

    def test_cbrt_is_cone_null(self):
        c = ca.estimate_cone_constants(ca.MAP_GALLERY["cbrt"][0], R, R)
        assert c.cone_null and c.M_best == 0 and not c.bilipschitz

    def test_c_dominates_m(self):
        for name in ("identity", "dilation", "x_plus_log", "scale_1.01"):
            c = ca.estimate_cone_constants(ca.MAP_GALLERY[name][0], R, R, per_bin=40)
            assert c.C_best >= c.M_best >= 0

    def test_too_few_bins(self):
        with pytest.raises(InsufficientData):
            ca.estimate_cone_constants(lambda x: x, R, R, k_min=4, k_max=8)

    @pytest.mark.parametrize("t", [0.25, 4.0])
    def test_scale_invariance(self, t):
        base = ca.estimate_cone_constants(lambda x: 2 * x, R, R, per_bin=40)
        Rt = R.rescaled(t)
        scaled = ca.estimate_cone_constants(lambda x: 2 * x, Rt, Rt, per_bin=40)
        assert scaled.C_best == pytest.approx(base.C_best, rel=0.05)
        assert scaled.M_best == pytest.approx(base.M_best, rel=0.05)

    def test_rescaled_target_multiplies_constant(self):
        c = ca.estimate_cone_constants(lambda x: x, R, R.rescaled(3.0), per_bin=40)
        assert c.C_best == pytest.approx(3.0, rel=0.05)

    def test_composition(self):
        f = lambda x: 2 * x + math.sqrt(abs(x))  # noqa: E731
        g = lambda x: 1.5 * x  # noqa: E731
        cf = ca.estimate_cone_constants(f, R, R, per_bin=40).C_best
        cg = ca.estimate_cone_constants(g, R, R, per_bin=40).C_best
        cgf = ca.estimate_cone_constants(lambda x: g(f(x)), R, R, per_bin=40).C_best
        assert cgf <= 1.1 * cf * cg

    def test_deterministic(self):
        a = ca.estimate_cone_constants(ca.MAP_GALLERY["x_plus_sqrt"][0], R, R, seed=5)
        b = ca.estimate_cone_constants(ca.MAP_GALLERY["x_plus_sqrt"][0], R, R, seed=5)
        assert a.to_json() == b.to_json()


class TestEquivalence:
    def test_log_perturbation(self):
        w = ca.check_cone_equivalent(lambda x: x, lambda x: x + math.log1p(abs(x)), R, R)
        assert w.verdict == ca.SUBLINEAR

    def test_slight_dilation(self):
        w = ca.check_cone_equivalent(lambda x: x, lambda x: 1.01 * x, R, R)
        assert w.verdict == ca.NOT_SUBLINEAR

    def test_same_map(self):
        w = ca.check_cone_equivalent(math.sin, math.sin, R, R)
        assert w.verdict == ca.SUBLINEAR


class TestSurjectivity:
    def test_identity(self):
        v = ca.check_cone_surjective(lambda x: x, R, R, per_bin=30)
        assert v.image_dense and v.cone_surjective is None

    def test_cbrt_image_is_dense_but_map_is_cone_null(self):
        consts = ca.estimate_cone_constants(ca.MAP_GALLERY["cbrt"][0], R, R)
        v = ca.check_cone_surjective(ca.MAP_GALLERY["cbrt"][0], R, R, per_bin=30,
                                     constants=consts)
        assert v.image_dense and v.cone_surjective is False

    def test_line_in_plane(self):
        v = ca.check_cone_surjective(lambda x: (x, 0.0), R, ca.PLANE, per_bin=30)
        assert not v.image_dense

    def test_net_too_coarse(self):
        sparse = ca.PointedSpace(R.distance, 0.0, R.sampler, R.near,
                                 lambda k: sorted(s * 4.0 ** j for s in (-1, 1) for j in range(k)),
                                 None, "coarse")
        with pytest.raises(NetTooCoarse):
            ca.check_cone_surjective(lambda x: x, sparse, R, per_bin=30)


class TestGallery:
    def test_scale_not_equivalent_to_identity(self):
        rep = ca.analyze_map("scale_1.01")
        assert rep.constants.C_best == pytest.approx(1.01, abs=0.01)
        assert rep.equivalent_to_identity.verdict == ca.NOT_SUBLINEAR

    def test_embed_plane_json(self):
        js = ca.analyze_map("embed_plane").to_json()
        assert js["surjectivity"]["image_dense"] is False
        assert js["equivalent_to_identity"] is None
