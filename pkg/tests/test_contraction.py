import math

import numpy as np
import pytest

from rqbm.contraction import (
    MapError,
    MapRangeError,
    SelfMap,
    best_exponent,
    check_linear_contraction,
    check_theta_contraction,
    check_theta_phi_contraction,
)
from rqbm.instances import (
    affine_toward,
    build_example_final,
    build_example_sqrt,
    random_space,
)
from rqbm.spaces import AnalyticSpace, FiniteSpace
from rqbm.thetaphi import builtin_phi, builtin_theta


def two_point_swap():
    space = FiniteSpace.build(
        [("a", 0.0), ("b", 1.0)], None, {("a", "b"): 1.0, ("b", "a"): 1.0}
    )
    return space, SelfMap.from_table({"a": "b", "b": "a"})


@pytest.fixture(scope="module")
def sqrt_bundle():
    return build_example_sqrt("sqrt")


@pytest.fixture(scope="module")
def fourth_bundle():
    return build_example_sqrt("fourth_root")


class TestSelfMap:
    def test_table_totality(self):
        space = FiniteSpace.build([("a", 0.0), ("b", 1.0)], "(x - y)^2")
        with pytest.raises(MapError):
            SelfMap.from_table({"a": "b"}).check_total(space)

    def test_table_unknown_target(self):
        space = FiniteSpace.build([("a", 0.0), ("b", 1.0)], "(x - y)^2")
        with pytest.raises(Exception):
            SelfMap.from_table({"a": "zz", "b": "a"}).check_total(space)

    def test_analytic_range_violation(self):
        space = AnalyticSpace.build(1.0, 2.0, "(x - y)^2")
        bad = SelfMap.from_expression("x + 5")
        with pytest.raises(MapRangeError):
            bad.apply_value(space, 1.5)
        with pytest.raises(MapRangeError):
            bad.apply_array(space, np.array([1.0, 1.5]))

    def test_hybrid_dispatch(self):
        bundle = build_example_final()
        assert bundle.selfmap.apply_label(bundle.space, "1/4") == 1.0
        assert bundle.selfmap.apply_label(bundle.space, "1") == 1.0
        v = bundle.selfmap.apply_value(bundle.space, 0.81)
        assert v == (math.sqrt(0.81) + 3.0) / 4.0

    def test_value_table_target(self):
        space = FiniteSpace.build([("a", 0.0), ("b", 1.0)], "(x - y)^2")
        m = SelfMap.from_table({"a": 0.25, "b": "a"})
        assert m.apply_label(space, "a") == 0.25
        assert m.apply_label(space, "b") == 0.0


class TestThetaPhiContraction:
    def test_two_point_swap_fails_with_exact_witness(self):
        space, swap = two_point_swap()
        cert = check_theta_phi_contraction(
            space, swap, builtin_theta("sqrt-plus-1"), builtin_phi("midpoint"), 1.0
        )
        assert cert.verdict == "fail"
        w = cert.worst_pair
        assert (w.x, w.y) == ("a", "b")  # first enumerated of the tied pair
        assert w.lhs == 2.0 and w.rhs == 1.5 and w.slack == -0.5

    def test_diagonal_pairs_skipped(self):
        space, swap = two_point_swap()
        cert = check_theta_phi_contraction(
            space, swap, builtin_theta("sqrt-plus-1"), builtin_phi("midpoint"), 1.0
        )
        assert cert.pairs_total == 4
        assert cert.pairs_skipped == 2  # (a,a) and (b,b)

    def test_final_example_certificate(self):
        b = build_example_final()
        cert = check_theta_phi_contraction(b.space, b.selfmap, b.theta, b.phi, 3.0)
        # the composed condition genuinely fails near the lower interval end
        assert cert.verdict == "fail"
        assert cert.violation_count == 12
        w = cert.worst_pair
        assert (w.x, w.y) == ("1/3", "0.5")
        assert w.lhs == 1.2196699141100895
        assert w.rhs == 1.0833333333333335

    def test_final_example_ledger_against_oracle(self):
        b = build_example_final()
        cert, ledger = check_theta_phi_contraction(
            b.space, b.selfmap, b.theta, b.phi, 3.0, details=True
        )
        table = {(x, y): b.space.distance(x, y) for x in b.space.labels for y in b.space.labels}
        values = {l: b.space.value_of(l) for l in b.space.labels}
        in_table = {f"1/{n}" for n in range(3, 7)}
        mism = 0
        for k, (x, y) in enumerate(ledger.ids):
            tx = 1.0 if x in in_table else (math.sqrt(values[x]) + 3.0) / 4.0
            ty = 1.0 if y in in_table else (math.sqrt(values[y]) + 3.0) / 4.0
            d_img = 0.0 if tx == ty else abs(tx - ty) ** 2
            if d_img == 0.0:
                want = "skipped"
            else:
                lhs = math.sqrt(9.0 * d_img) + 1.0
                rhs = ((math.sqrt(table[(x, y)]) + 1.0) + 1.0) / 2.0
                want = "violation" if lhs > rhs + 1e-9 else "satisfied"
            if ledger.verdict(k) != want:
                mism += 1
        assert mism == 0

    def test_constant_map_vacuous(self):
        b = build_example_final()
        const = SelfMap.from_table({l: 1.0 for l in b.space.labels})
        cert = check_theta_phi_contraction(b.space, const, b.theta, b.phi, 3.0)
        assert cert.verdict == "pass" and cert.vacuous
        assert cert.pairs_checked == 0
        assert cert.pairs_skipped == cert.pairs_total


class TestThetaContraction:
    def test_identity_map_vacuous(self, sqrt_bundle):
        ident = SelfMap.from_expression("x")
        cert = check_theta_contraction(
            sqrt_bundle.space, ident, sqrt_bundle.theta, 0.5, 2.0,
            grid_points=10, random_pairs=100,
        )
        # d(Tx, Ty) = d(x, y) so only diagonal pairs lack a positive image
        assert cert.verdict == "fail" or cert.pairs_checked > 0

    def test_sqrt_variant_fails_everywhere(self, sqrt_bundle):
        cert = check_theta_contraction(
            sqrt_bundle.space, sqrt_bundle.selfmap, sqrt_bundle.theta,
            0.5, 2.0, grid_points=50,
        )
        assert cert.verdict == "fail"
        assert cert.violation_count == cert.pairs_checked == 12450
        w = cert.worst_pair
        assert (w.x, w.y) == (2.0, 1.0)
        assert w.lhs == 2.289714471244359
        assert w.rhs == 1.6487212707001282

    def test_fourth_root_variant_passes(self, fourth_bundle):
        cert = check_theta_contraction(
            fourth_bundle.space, fourth_bundle.selfmap, fourth_bundle.theta,
            0.5, 2.0, grid_points=50,
        )
        assert cert.verdict == "pass"
        assert cert.violation_count == 0
        assert cert.worst_pair.slack == 6.641987362110413e-06

    def test_fourth_root_oracle_spot_check(self, fourth_bundle):
        # direct arithmetic at a handful of pairs
        s = 2.0
        for x, y in [(2.0, 1.0), (1.5, 1.2), (1.01, 1.0), (1.0, 1.9)]:
            tx, ty = x ** 0.25, y ** 0.25
            d_img = (tx - ty) ** 2 if tx >= ty else 0.5 * (ty - tx) ** 2
            d_pre = (x - y) ** 2 if x >= y else 0.5 * (y - x) ** 2
            lhs = math.exp(math.sqrt(s * s * d_img))
            rhs = math.exp(math.sqrt(d_pre)) ** 0.5
            assert lhs <= rhs + 1e-9

    def test_domain_violation_reported(self):
        space = FiniteSpace.build(
            [("a", 0.0), ("b", 1.0), ("c", 2.0)],
            None,
            {
                ("a", "b"): 0.0, ("b", "a"): 0.0,
                ("a", "c"): 1.0, ("c", "a"): 1.0,
                ("b", "c"): 1.0, ("c", "b"): 1.0,
            },
        )
        broken = SelfMap.from_table({"a": "a", "b": "c", "c": "c"})
        cert = check_theta_contraction(
            space, broken, builtin_theta("exp-sqrt"), 0.5, 1.0
        )
        assert cert.verdict == "fail"
        assert cert.domain_violation == ("a", "b")

    def test_monotone_in_r(self, fourth_bundle):
        base = dict(grid_points=25, random_pairs=500)
        c1 = check_theta_contraction(
            fourth_bundle.space, fourth_bundle.selfmap, fourth_bundle.theta, 0.5, 2.0, **base
        )
        c2 = check_theta_contraction(
            fourth_bundle.space, fourth_bundle.selfmap, fourth_bundle.theta, 0.8, 2.0, **base
        )
        assert c1.verdict == "pass" and c2.verdict == "pass"
        assert c2.worst_pair.slack >= c1.worst_pair.slack

    def test_monotone_in_s(self, sqrt_bundle):
        base = dict(grid_points=25, random_pairs=500)
        at2 = check_theta_contraction(
            sqrt_bundle.space, sqrt_bundle.selfmap, sqrt_bundle.theta, 0.5, 2.0, **base
        )
        at3 = check_theta_contraction(
            sqrt_bundle.space, sqrt_bundle.selfmap, sqrt_bundle.theta, 0.5, 3.0, **base
        )
        assert at2.verdict == "fail"
        assert at3.verdict == "fail"

    def test_parameter_validation(self, sqrt_bundle):
        with pytest.raises(ValueError):
            check_theta_contraction(
                sqrt_bundle.space, sqrt_bundle.selfmap, sqrt_bundle.theta, 1.5, 2.0
            )
        with pytest.raises(ValueError):
            check_theta_contraction(
                sqrt_bundle.space, sqrt_bundle.selfmap, sqrt_bundle.theta, 0.5, 0.5
            )


class TestLinearContraction:
    def test_constant_map_vacuous(self, sqrt_bundle):
        const = SelfMap.from_expression("x * 0 + 1.5")
        cert = check_linear_contraction(
            sqrt_bundle.space, const, 0.5, 2.0, grid_points=10, random_pairs=50
        )
        assert cert.verdict == "pass" and cert.vacuous

    def test_two_point_swap_witness(self):
        space, swap = two_point_swap()
        cert = check_linear_contraction(space, swap, 0.5, 1.0)
        assert cert.verdict == "fail"
        w = cert.worst_pair
        assert w.lhs == 1.0 and w.rhs == 0.5
        assert w.slack == -0.5

    def test_sqrt_map_k09_matches_oracle(self, sqrt_bundle):
        cert = check_linear_contraction(
            sqrt_bundle.space, sqrt_bundle.selfmap, 0.9, 2.0,
            grid_points=50, random_pairs=0,
        )
        # near-diagonal pairs break the linear bound: 4*(sqrt(x)-sqrt(y))^2
        # approaches (x-y)^2 from above-0.9 scale as x,y -> 1
        assert cert.verdict == "fail"
        assert cert.violation_count == 66
        w = cert.worst_pair
        assert (w.x, w.y) == (1.1428571428571428, 1.0)


class TestBestExponent:
    def test_constant_map_zero(self, sqrt_bundle):
        const = SelfMap.from_expression("x * 0 + 1.5")
        bound = best_exponent(
            sqrt_bundle.space, const, sqrt_bundle.theta, 2.0,
            grid_points=10, random_pairs=50,
        )
        assert bound.value == 0.0 and bound.feasible

    def test_two_point_swap_infeasible(self):
        space, swap = two_point_swap()
        bound = best_exponent(space, swap, builtin_theta("exp-sqrt"), 1.0)
        assert bound.value == 1.0
        assert not bound.feasible

    def test_fourth_root_frozen_value(self, fourth_bundle):
        bound = best_exponent(
            fourth_bundle.space, fourth_bundle.selfmap, fourth_bundle.theta, 2.0,
            grid_points=50,
        )
        assert bound.feasible
        assert bound.value == 0.497134902334961  # just under the claimed 1/2
        assert bound.value < 0.5

    def test_bracketing_property(self, fourth_bundle):
        kw = dict(grid_points=50)
        bound = best_exponent(
            fourth_bundle.space, fourth_bundle.selfmap, fourth_bundle.theta, 2.0, **kw
        )
        above = check_theta_contraction(
            fourth_bundle.space, fourth_bundle.selfmap, fourth_bundle.theta,
            bound.value + 1e-9, 2.0, **kw,
        )
        below = check_theta_contraction(
            fourth_bundle.space, fourth_bundle.selfmap, fourth_bundle.theta,
            bound.value - 1e-3, 2.0, **kw,
        )
        assert above.verdict == "pass"
        assert below.verdict == "fail"

    def test_domain_violation_infeasible(self):
        space = FiniteSpace.build(
            [("a", 0.0), ("b", 1.0), ("c", 2.0)],
            None,
            {
                ("a", "b"): 0.0, ("b", "a"): 0.0,
                ("a", "c"): 1.0, ("c", "a"): 1.0,
                ("b", "c"): 1.0, ("c", "b"): 1.0,
            },
        )
        broken = SelfMap.from_table({"a": "a", "b": "c", "c": "c"})
        bound = best_exponent(space, broken, builtin_theta("exp-sqrt"), 1.0)
        assert not bound.feasible
        assert bound.domain_violation == ("a", "b")


class TestReductionIdentity:
    """The exponent form equals the composed form with the power family."""

    @pytest.mark.parametrize("r", [0.3, 0.5, 0.8])
    def test_on_analytic_instance(self, fourth_bundle, r):
        kw = dict(grid_points=30, random_pairs=2000)
        a = check_theta_contraction(
            fourth_bundle.space, fourth_bundle.selfmap, fourth_bundle.theta, r, 2.0, **kw
        )
        b = check_theta_phi_contraction(
            fourth_bundle.space, fourth_bundle.selfmap, fourth_bundle.theta,
            builtin_phi(f"pow-{r}"), 2.0, **kw,
        )
        assert a.verdict == b.verdict
        assert a.worst_pair == b.worst_pair
        assert a.pairs_checked == b.pairs_checked

    @pytest.mark.parametrize("seed", [0, 1, 2])
    @pytest.mark.parametrize("r", [0.3, 0.5, 0.8])
    def test_on_random_quasi_spaces(self, seed, r):
        space = random_space(6, seed, "quasi")
        rng = np.random.default_rng([7, seed])
        target = space.labels[int(rng.integers(len(space.labels)))]
        selfmap = affine_toward(space, target, 0.5)
        theta = builtin_theta("exp-sqrt")
        a = check_theta_contraction(space, selfmap, theta, r, 4.0)
        b = check_theta_phi_contraction(space, selfmap, theta, builtin_phi(f"pow-{r}"), 4.0)
        assert a.verdict == b.verdict
        assert a.worst_pair == b.worst_pair


class TestCertificateReplay:
    def test_worst_pair_replays_bit_exactly(self, fourth_bundle):
        cert = check_theta_contraction(
            fourth_bundle.space, fourth_bundle.selfmap, fourth_bundle.theta,
            0.5, 2.0, grid_points=50,
        )
        w = cert.worst_pair
        space, selfmap, theta = fourth_bundle.space, fourth_bundle.selfmap, fourth_bundle.theta
        tx = selfmap.apply_value(space, w.x)
        ty = selfmap.apply_value(space, w.y)
        lhs = float(theta(2.0 * 2.0 * float(space.distance(tx, ty))))
        rhs = float(theta(float(space.distance(w.x, w.y)))) ** 0.5
        assert lhs == w.lhs
        assert rhs == w.rhs

    def test_worst_pair_replay_finite(self):
        b = build_example_final()
        cert = check_theta_phi_contraction(b.space, b.selfmap, b.theta, b.phi, 3.0)
        w = cert.worst_pair
        tx = b.selfmap.apply_label(b.space, w.x)
        ty = b.selfmap.apply_label(b.space, w.y)
        lhs = float(b.theta(3.0 * 3.0 * b.space.distance_value(tx, ty)))
        rhs = float(b.phi(float(b.theta(b.space.distance(w.x, w.y)))))
        assert lhs == w.lhs
        assert rhs == w.rhs
