import math

import numpy as np
import pytest
from scipy.integrate import quad

from funvol.convex import (
    Ball,
    Box,
    Cone,
    EpiScaled,
    EpiTranslated,
    Indicator,
    Quadratic,
    RadialPower,
    Rotated,
)
from funvol.errors import SchemaError
from funvol.numerics import QuadratureConfig, Rng, kappa
from funvol.subspaces import sample_rotation
from funvol.valuations import (
    ValuationSpec,
    classical_ck_check,
    cone_closed_form,
    conjugation_pushforward_check,
    eval_cauchy_kubota,
    eval_ck_general,
    eval_domain_gradient,
    eval_dual,
    eval_dual_ck,
    eval_smooth,
    hessian_measure_integral,
    retrieval_check,
    reilly_radial_check,
)
from funvol.weights import Bump, LogCap, Scaled, Tent

TENT = Tent(1.0)


class TestValuationSpec:
    def test_rejects_inadmissible(self):
        with pytest.raises(SchemaError):
            ValuationSpec(2, 2, LogCap())  # top degree needs a finite limit at 0

    def test_accepts(self):
        ValuationSpec(1, 2, LogCap())
        ValuationSpec(2, 2, TENT)


class TestSmoothRoute:
    def test_isotropic_2d(self):
        # oracle: 2 * 2*pi * int_0^1 (1-r) r dr = 2*pi/3
        r = eval_smooth(ValuationSpec(1, 2, TENT), Quadratic(np.eye(2)))
        assert r.value == pytest.approx(2 * math.pi / 3, rel=1e-10)

    def test_isotropic_3d(self):
        # oracle: 3 * 4*pi * int_0^1 (1-r) r^2 dr = pi
        r = eval_smooth(ValuationSpec(1, 3, TENT), Quadratic(np.eye(3)))
        assert r.value == pytest.approx(math.pi, rel=1e-10)

    def test_top_degree_matches_domain_route(self):
        spec = ValuationSpec(2, 2, TENT)
        u = Quadratic(np.eye(2))
        a = eval_smooth(spec, u)
        b = eval_domain_gradient(spec, u)
        assert a.value == pytest.approx(math.pi / 3, rel=1e-10)
        assert a.value == pytest.approx(b.value, rel=1e-10)

    def test_radial_power_oracle(self):
        # oracle by 1-d quadrature of the radial reduction
        u = RadialPower(3, 4.0)
        r = eval_smooth(ValuationSpec(1, 3, TENT), u)
        oracle = 4 * math.pi * quad(lambda t: (1 - t ** 3) * 7 * t ** 6, 0, 1)[0]
        assert r.value == pytest.approx(oracle, rel=1e-8)

    def test_translation_invariance(self):
        spec = ValuationSpec(1, 2, TENT)
        u = RadialPower(2, 4.0)
        base = eval_smooth(spec, u)
        moved = eval_smooth(spec, EpiTranslated(u, [0.7, -0.3], 2.0))
        assert moved.value == pytest.approx(base.value, rel=1e-9)

    def test_rotation_invariance(self):
        spec = ValuationSpec(1, 2, TENT)
        u = Quadratic(np.diag([1.0, 3.0]))
        q = sample_rotation(2, Rng(17))
        base = eval_smooth(spec, u)
        rotated = eval_smooth(spec, Rotated(u, q))
        assert rotated.value == pytest.approx(base.value, rel=1e-9)

    def test_box_scheme_cross_check(self):
        spec = ValuationSpec(1, 2, TENT)
        u = Quadratic(np.diag([1.0, 2.0]))
        polar = eval_smooth(spec, u)
        cfg = QuadratureConfig(abs_tol=1e-7, rel_tol=1e-7)
        box = eval_smooth(spec, u, cfg, scheme="box")
        assert box.value == pytest.approx(polar.value, abs=5e-6)

    def test_singular_weight(self):
        # log-singular weight: oracle 2 * 2*pi * int_0^1 ln(1/r) r dr = pi
        r = eval_smooth(ValuationSpec(1, 2, LogCap()), Quadratic(np.eye(2)))
        assert r.value == pytest.approx(math.pi, rel=1e-8)

    def test_degree_zero_rejected(self):
        with pytest.raises(SchemaError):
            eval_smooth(ValuationSpec(0, 2, TENT), Quadratic(np.eye(2)))


class TestDomainGradientRoute:
    def test_ball_indicator(self):
        r = eval_domain_gradient(ValuationSpec(2, 2, TENT), Indicator(Ball(1.0, [0, 0])))
        assert r.value == pytest.approx(math.pi)
        assert r.error == 0.0

    def test_cone(self):
        r = eval_domain_gradient(ValuationSpec(2, 2, TENT), Cone(2, 0.5, 1.0))
        assert r.value == pytest.approx(math.pi / 2)

    def test_box_indicator(self):
        r = eval_domain_gradient(ValuationSpec(2, 2, TENT),
                                 Indicator(Box([(0, 1), (0, 2)])))
        assert r.value == pytest.approx(2.0)


class TestCauchyKubotaRoute:
    def test_quadratic_matches_smooth(self):
        spec = ValuationSpec(1, 2, TENT)
        ck = eval_cauchy_kubota(spec, Quadratic(np.eye(2)), 64, Rng(5))
        assert ck.value == pytest.approx(2 * math.pi / 3, rel=1e-9)
        assert ck.subspace_samples == 64

    def test_cone_matches_closed_form(self):
        spec = ValuationSpec(1, 2, TENT)
        ck = eval_cauchy_kubota(spec, Cone(2, 0.5, 1.0), 64, Rng(5))
        assert ck.value == pytest.approx(0.75 * math.pi, rel=1e-12)
        assert ck.error <= 1e-10  # inner integral is subspace-independent

    def test_degree_zero_constant(self):
        spec = ValuationSpec(0, 2, TENT)
        vals = [eval_cauchy_kubota(spec, u, 8, Rng(1)).value
                for u in (Quadratic(np.eye(2)), Cone(2, 0.3, 1.0),
                          Indicator(Ball(2.0, [0, 0])), RadialPower(2, 4.0),
                          Indicator(Box([(0, 1), (0, 1)])))]
        # kappa_2 * T^2(zeta)(0) = pi * 1/3
        assert np.ptp(vals) == 0.0
        assert vals[0] == pytest.approx(math.pi / 3, rel=1e-12)

    def test_epi_homogeneity(self):
        spec = ValuationSpec(1, 2, TENT)
        base = eval_cauchy_kubota(spec, Cone(2, 0.5, 1.0), 32, Rng(2)).value
        for lam in (0.5, 2.0):
            scaled = eval_cauchy_kubota(spec, EpiScaled(Cone(2, 0.5, 1.0), lam),
                                        32, Rng(2)).value
            assert scaled == pytest.approx(lam ** 1 * base, rel=1e-10)

    def test_seed_determinism(self):
        spec = ValuationSpec(1, 3, TENT)
        u = Quadratic(np.diag([1.0, 2.0, 3.0]))
        a = eval_cauchy_kubota(spec, u, 16, Rng(9))
        b = eval_cauchy_kubota(spec, u, 16, Rng(9))
        assert a.value == b.value


class TestCkGeneral:
    @pytest.mark.parametrize("u,rel", [
        (Quadratic(np.eye(3)), None),
        (Quadratic(np.diag([1.0, 2.0, 4.0])), None),
        (RadialPower(3, 4.0), None),
    ])
    def test_matches_smooth_n3(self, u, rel):
        spec = ValuationSpec(1, 3, TENT)
        smooth = eval_smooth(spec, u)
        general = eval_ck_general(spec, u, 2, 64, Rng(3))
        combined = smooth.error + general.error
        assert abs(general.value - smooth.value) <= max(3 * combined, 1e-9)

    def test_k_equals_j_matches_plain_ck(self):
        spec = ValuationSpec(1, 3, TENT)
        u = Quadratic(np.diag([1.0, 2.0, 3.0]))
        a = eval_cauchy_kubota(spec, u, 32, Rng(4))
        b = eval_ck_general(spec, u, 1, 32, Rng(4))
        assert a.value == pytest.approx(b.value, rel=1e-12)

    def test_cone_any_k(self):
        # closed form is k-independent for the cone family
        spec = ValuationSpec(1, 3, TENT)
        expect = cone_closed_form(spec, 0.4)
        for k in (1, 2):
            got = eval_ck_general(spec, Cone(3, 0.4, 1.0), k, 16, Rng(5))
            assert got.value == pytest.approx(expect, rel=1e-10), k

    def test_degree_zero(self):
        spec = ValuationSpec(0, 2, TENT)
        got = eval_ck_general(spec, Quadratic(np.eye(2)), 1, 16, Rng(6))
        assert got.value == pytest.approx(math.pi / 3, rel=1e-10)


class TestDualRoute:
    def test_anisotropic_2d(self):
        # oracle: e_1(A) * 2*pi * int_0^1 (1-t) t dt = 5*pi/3
        spec = ValuationSpec(1, 2, TENT)
        v = Quadratic(np.diag([1.0, 4.0]))
        r = eval_dual(spec, v, "integral")
        assert r.value == pytest.approx(5 * math.pi / 3, rel=1e-10)

    def test_conjugate_path_agrees(self):
        for n, a in ((2, np.diag([1.0, 4.0])), (3, np.diag([1.0, 2.0, 4.0]))):
            for j in range(n + 1):
                spec = ValuationSpec(j, n, TENT)
                v = Quadratic(a)
                ia = eval_dual(spec, v, "integral")
                ib = eval_dual(spec, v, "conjugate")
                assert ia.value == pytest.approx(ib.value, rel=1e-5), (n, j)

    def test_degree_zero_constant(self):
        spec = ValuationSpec(0, 2, TENT)
        for v in (Quadratic(np.eye(2)), Quadratic(np.diag([2.0, 5.0]))):
            r = eval_dual(spec, v, "integral")
            assert r.value == pytest.approx(math.pi / 3, rel=1e-10)

    def test_dual_ck_quadratic(self):
        spec = ValuationSpec(1, 2, TENT)
        v = Quadratic(np.diag([1.0, 4.0]))
        r = eval_dual_ck(spec, v, 1, 512, Rng(7))
        direct = eval_dual(spec, v, "integral")
        assert abs(r.value - direct.value) <= 3 * (r.error + direct.error)

    def test_dual_ck_isotropic_exact(self):
        spec = ValuationSpec(1, 3, TENT)
        v = Quadratic(np.eye(3))
        r = eval_dual_ck(spec, v, 2, 16, Rng(8))
        direct = eval_dual(spec, v, "integral")
        assert r.value == pytest.approx(direct.value, rel=1e-9)

    def test_support_function_retrieval(self):
        # h of the unit ball: dual retrieval gives the same constant as indicators
        spec = ValuationSpec(1, 2, TENT)
        from funvol.convex import SupportFn
        v = SupportFn(Ball(1.0, [0.0, 0.0]))
        r = eval_dual(spec, v, "conjugate", samples=32, rng=Rng(9))
        assert r.value == pytest.approx(math.pi, rel=1e-9)


class TestConeClosedForm:
    def test_value(self):
        spec = ValuationSpec(1, 2, TENT)
        assert cone_closed_form(spec, 0.5) == pytest.approx(0.75 * math.pi)

    def test_zero_slope(self):
        spec = ValuationSpec(1, 2, TENT)
        # kappa_2 * C(2,1) * T(zeta)(0) = pi * 2 * 0.5
        assert cone_closed_form(spec, 0.0) == pytest.approx(math.pi)

    def test_zero_weight(self):
        from funvol.weights import PolyCapped
        spec = ValuationSpec(1, 2, PolyCapped([0.0], 1.0))
        assert cone_closed_form(spec, 0.5) == 0.0

    def test_radius_scaling(self):
        spec = ValuationSpec(1, 2, TENT)
        assert cone_closed_form(spec, 0.5, r=2.0) == pytest.approx(2.0 * 0.75 * math.pi)


class TestRetrieval:
    def test_ball_degree_one(self):
        res = retrieval_check(ValuationSpec(1, 2, TENT), Ball(1.0, [0, 0]), 64, Rng(1))
        assert res.lhs == pytest.approx(math.pi, rel=1e-10)
        assert res.rhs == pytest.approx(math.pi, rel=1e-12)

    def test_top_degree_box(self):
        res = retrieval_check(ValuationSpec(2, 2, TENT), Box([(0, 1), (0, 2)]))
        assert res.lhs == pytest.approx(2.0) and res.rhs == pytest.approx(2.0)

    def test_degree_zero(self):
        res = retrieval_check(ValuationSpec(0, 2, TENT), Ball(3.0, [0, 0]))
        assert res.lhs == pytest.approx(res.rhs, rel=1e-12)

    def test_box_mc_path(self):
        res = retrieval_check(ValuationSpec(1, 2, TENT), Box([(0, 1), (0, 2)]),
                              2000, Rng(2))
        assert abs(res.lhs - res.rhs) <= 3 * res.error


class TestClassicalCk:
    def test_ball_v1(self):
        res = classical_ck_check(Ball(1.0, [0, 0, 0]), 1, 1, 500, Rng(3))
        assert res.lhs == pytest.approx(4.0)
        assert res.rhs == pytest.approx(4.0, rel=1e-10)  # projections are exact disks

    def test_cube_v2(self):
        res = classical_ck_check(Box([(0, 1)] * 3, ), 2, 2, 4000, Rng(4))
        assert res.lhs == pytest.approx(3.0)
        assert abs(res.rhs - res.lhs) <= 3 * res.error

    def test_j_less_than_k(self):
        res = classical_ck_check(Ball(1.0, [0, 0, 0]), 1, 2, 500, Rng(5))
        assert res.lhs == pytest.approx(res.rhs, rel=1e-9)

    def test_degree_zero(self):
        res = classical_ck_check(Box([(0, 1)] * 2), 0, 0, 10, Rng(6))
        assert res.lhs == 1.0 and res.rhs == 1.0


class TestHessianMeasures:
    def test_self_dual_case(self):
        r = hessian_measure_integral(Quadratic(np.eye(2)), 1, TENT)
        assert r.value == pytest.approx(2 * math.pi / 3, rel=1e-10)

    def test_pushforward_conjugation(self):
        res = conjugation_pushforward_check(Quadratic(np.diag([1.0, 4.0])), 1, TENT)
        assert res.difference <= 1e-6

    def test_zero_test_function(self):
        from funvol.weights import PolyCapped
        res = conjugation_pushforward_check(Quadratic(np.eye(2)), 1,
                                            PolyCapped([0.0], 1.0))
        assert res.lhs == 0.0 and res.rhs == 0.0


class TestReillyRadial:
    def test_quadratic_profile(self):
        res = reilly_radial_check(2, 1, TENT, p=2.0)
        assert res.lhs == pytest.approx(2 * math.pi / 3, rel=1e-9)
        assert res.lhs == pytest.approx(res.rhs, rel=1e-9)

    def test_quartic_profile(self):
        res = reilly_radial_check(2, 1, TENT, p=4.0)
        # oracle: 2*pi*int_0^1 4 r^3 (1-r^3) dr = 6*pi/7
        assert res.lhs == pytest.approx(6 * math.pi / 7, rel=1e-9)
        assert res.lhs == pytest.approx(res.rhs, rel=1e-8)

    @pytest.mark.parametrize("n,j", [(2, 1), (3, 1), (3, 2)])
    @pytest.mark.parametrize("p", [2.0, 4.0])
    def test_matrix(self, n, j, p):
        for zeta in (TENT, LogCap()):
            res = reilly_radial_check(n, j, zeta, p=p)
            assert res.lhs == pytest.approx(res.rhs, rel=1e-6), (n, j, p)

    def test_zero_weight(self):
        from funvol.weights import PolyCapped
        res = reilly_radial_check(2, 1, PolyCapped([0.0], 1.0), p=2.0)
        assert res.lhs == 0.0 and res.rhs == 0.0


class TestValuationProperty:
    def test_indicator_boxes_sharing_facet(self):
        spec = ValuationSpec(1, 2, TENT)
        k1 = Box([(0.0, 1.0), (0.0, 1.0)])
        k2 = Box([(1.0, 2.0), (0.0, 1.0)])
        union = Box([(0.0, 2.0), (0.0, 1.0)])
        inter = Box([(1.0, 1.0), (0.0, 1.0)])
        vals = {}
        for name, body in (("k1", k1), ("k2", k2), ("union", union), ("inter", inter)):
            r = eval_cauchy_kubota(spec, Indicator(body), 128, Rng(12))
            vals[name] = (r.value, r.error)
        lhs = vals["k1"][0] + vals["k2"][0]
        rhs = vals["union"][0] + vals["inter"][0]
        err = sum(v[1] for v in vals.values())
        assert abs(lhs - rhs) <= max(3 * err, 1e-10)


class TestPipelineAgreement:
    """Smooth route vs projection average across the test matrix."""

    @pytest.mark.parametrize("n", [2, 3])
    def test_matrix(self, n):
        functions = [Quadratic(np.eye(n)),
                     Quadratic(np.diag(np.arange(1.0, n + 1.0))),
                     RadialPower(n, 2.0), RadialPower(n, 4.0)]
        weights = [TENT, LogCap(), Bump(0.2, 0.8)]
        for u in functions:
            for zeta in weights:
                for j in range(1, n):
                    spec = ValuationSpec(j, n, zeta)
                    smooth = eval_smooth(spec, u)
                    for k in range(j, n):
                        ck = eval_ck_general(spec, u, k, 48, Rng(13))
                        tol = 3 * (smooth.error + ck.error)
                        assert abs(ck.value - smooth.value) <= max(tol, 1e-8), \
                            (n, j, k, type(u).__name__, type(zeta).__name__)


class TestRecursiveCkOnIndicators:
    def test_ball_indicator_intermediate_k(self):
        from funvol.numerics import kappa
        from funvol.weights import transform_R_power
        spec = ValuationSpec(1, 3, TENT)
        expect = kappa(2) * transform_R_power(TENT, 2).value_at_zero() * 4.0
        got = eval_ck_general(spec, Indicator(Ball(1.0, [0, 0, 0])), 2, 16, Rng(5))
        assert got.value == pytest.approx(expect, rel=1e-12)


class TestThreadScheduleIndependence:
    def test_results_identical_across_worker_counts(self, monkeypatch):
        spec = ValuationSpec(1, 3, TENT)
        u = Quadratic(np.diag([1.0, 2.0, 3.0]))
        monkeypatch.delenv("FUNVOL_THREADS", raising=False)
        serial = eval_cauchy_kubota(spec, u, 24, Rng(2))
        monkeypatch.setenv("FUNVOL_THREADS", "4")
        threaded = eval_cauchy_kubota(spec, u, 24, Rng(2))
        assert serial.value == threaded.value
        assert serial.error == threaded.error


class TestDualCrossRoutes:
    def test_quartic_radial_dual_paths(self):
        # oracle: 2*pi * int_0^1 (1-r) * 4 r^2 * r dr = 2*pi/5
        spec = ValuationSpec(1, 2, TENT)
        v = RadialPower(2, 4.0)
        a = eval_dual(spec, v, "integral")
        b = eval_dual(spec, v, "conjugate")
        assert a.value == pytest.approx(2 * math.pi / 5, rel=1e-9)
        assert a.value == pytest.approx(b.value, rel=1e-9)

    def test_dual_ck_matches_ck_general_on_conjugate(self):
        # restrictions of v correspond to projections of its conjugate
        from funvol.convex import conjugate
        spec = ValuationSpec(1, 2, TENT)
        v = Quadratic(np.diag([1.0, 4.0]))
        u = conjugate(v)
        d = eval_dual_ck(spec, v, 1, 64, Rng(3))
        g = eval_ck_general(spec, u, 1, 64, Rng(3))
        assert d.value == pytest.approx(g.value, rel=1e-10)
