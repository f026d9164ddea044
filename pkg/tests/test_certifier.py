from fractions import Fraction

import numpy as np
import pytest
from helpers import WORST_REPAIRED

from max3section.certifier import (
    Box,
    CertifyParams,
    CubeRecord,
    LP_INFEASIBLE,
    RATIO_BOUND,
    alpha_interval,
    audit_certificate,
    certify,
    final_approximation_bound,
    g_upper_interval,
    lp_feasible,
    ratio_bound_holds,
    ratio_lower_bound,
    read_certificate,
    stage1_tiles,
    write_certificate,
    _interval_infeasibility,
)
from max3section.configspace import Configuration, canonicalize, sample_feasible
from max3section.cutratio import cut_probability, sdp_contribution

CANON = canonicalize(WORST_REPAIRED)
CENTER = (CANON.x[0], CANON.x[1], CANON.w[0], CANON.w[1], *CANON.t)
P78 = CertifyParams(rho=0.78, delta_prime=0.01)
P80 = CertifyParams(rho=0.80, delta_prime=0.01)
P82 = CertifyParams(rho=0.82, delta_prime=0.01)
P83 = CertifyParams(rho=0.83, delta_prime=0.01)


def random_box(rng, halfwidth=None) -> Box:
    c = sample_feasible(rng)
    hw = halfwidth if halfwidth is not None else rng.uniform(0.005, 0.08)
    return Box.around((c.x[0], c.x[1], c.w[0], c.w[1], *c.t), hw)


class TestBox:
    def test_derived_simplex_intervals(self):
        b = Box((0.1, 0.2), (0.3, 0.4), (0.0, 0.5), (0.2, 0.3),
                (-1, 1), (-1, 1), (-1, 1))
        assert b.ix3 == (1 - 0.2 - 0.4, 1 - 0.1 - 0.3)
        assert b.iw3 == (1 - 0.5 - 0.3, 1 - 0.0 - 0.2)

    def test_split_marginals_partitions(self):
        rng = np.random.default_rng(0)
        b = random_box(rng, 0.05)
        kids = b.split_marginals()
        assert len(kids) == 16
        # children tile the box: each sampled point lies in exactly one child
        for _ in range(100):
            p = b.sample(rng)
            inner = [k for k in kids if k.contains(p)]
            assert len(inner) >= 1

    def test_split_t_partitions(self):
        rng = np.random.default_rng(1)
        b = random_box(rng, 0.05)
        kids = b.split_t()
        assert len(kids) == 8
        for _ in range(100):
            p = b.sample(rng)
            assert any(k.contains(p) for k in kids)

    def test_degenerate_dims_do_not_multiply(self):
        b = Box.at_point(CENTER)
        assert len(b.split_marginals()) == 1
        assert len(b.split_t()) == 1

    def test_key_round_trip(self):
        b = random_box(np.random.default_rng(2))
        assert Box.from_key(b.key()) == b

    def test_around_clips_to_domain(self):
        b = Box.around((0.01, 0.5, 0.5, 0.99, -0.98, 0.0, 0.98), 0.05)
        assert b.ix1[0] == 0.0 and b.iw2[1] == 1.0
        assert b.it1[0] == -1.0 and b.it3[1] == 1.0


class TestAlphaInterval:
    def test_contains_sampled_values(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            ix = tuple(sorted(rng.uniform(0, 1, 2)))
            iw = tuple(sorted(rng.uniform(0, 1, 2)))
            it = tuple(sorted(rng.uniform(-1, 1, 2)))
            lo, hi = alpha_interval(ix, iw, it)
            for _ in range(20):
                x = rng.uniform(*ix)
                w = rng.uniform(*iw)
                t = rng.uniform(*it)
                a = x * w + t * np.sqrt((x - x * x) * (w - w * w))
                assert lo - 1e-12 <= a <= hi + 1e-12

    def test_hump_handled(self):
        # radical maximal at marginal 1/2 even when endpoints are symmetric
        lo, hi = alpha_interval((0.4, 0.6), (0.4, 0.6), (1.0, 1.0))
        assert hi >= 0.4 * 0.4 + 0.25 - 1e-15

    def test_g_upper_dominates_samples(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            b = random_box(rng)
            g_up = g_upper_interval(b)
            if g_up is None:
                continue
            for _ in range(20):
                p = b.sample(rng)
                c = Configuration.from_t(
                    (p[0], p[1], 1 - p[0] - p[1]),
                    (p[2], p[3], 1 - p[2] - p[3]), p[4:])
                from max3section.configspace import is_feasible
                if is_feasible(c).feasible:
                    assert sdp_contribution(c) <= g_up + 1e-12


class TestLpFeasible:
    def test_box_containing_worst_config_feasible(self):
        b = Box.around(CENTER, 0.01)
        assert lp_feasible(b, P80).status == "FEASIBLE"

    def test_ordering_violation_certified(self):
        b = Box((0.6, 0.7), (0, 1), (0, 1), (0, 1), (-1, 1), (-1, 1), (-1, 1))
        v = lp_feasible(b, P80)
        assert v.infeasible and v.margin >= P80.tau_num

    def test_g_floor_violation_certified(self):
        b = Box((0.333, 0.334), (0.333, 0.334), (0.333, 0.334), (0.333, 0.334),
                (0.99, 1.0), (0.99, 1.0), (0.99, 1.0))
        v = lp_feasible(b, P80)
        assert v.infeasible and v.margin >= P80.tau_num

    def test_chain_constraint_needs_the_lp(self):
        # alpha_3 range falls below x3 + w3 - 1: only the coupled LP sees it
        hw = 0.002
        b = Box(*[(c - hw, c + hw) for c in CENTER[:6]], (-1.0, -0.99))
        assert _interval_infeasibility(b, P80) is None
        v = lp_feasible(b, P80)
        assert v.infeasible and v.margin >= P80.tau_num

    def test_zero_width_feasible_point(self):
        assert lp_feasible(Box.at_point(CENTER), P80).status == "FEASIBLE"


class TestRatioBound:
    def test_zero_width_at_worst_eliminated_at_080(self):
        rb = ratio_bound_holds(Box.at_point(CENTER), P80)
        assert rb.eliminated
        # margin = (ratio - rho) * g at the point, ~0.0186
        want = (cut_probability(CANON) - 0.80 * sdp_contribution(CANON))
        assert rb.margin == pytest.approx(want, abs=1e-6)

    def test_zero_width_at_worst_undecided_at_082(self):
        rb = ratio_bound_holds(Box.at_point(CENTER), P82)
        assert not rb.eliminated

    def test_wide_box_undecided(self):
        b = Box.around(CENTER, 0.2)
        assert not ratio_bound_holds(b, P78).eliminated

    def test_lower_bound_below_sampled_f(self):
        # midpoint bound consistency: 10^3 sampled feasible points per box
        from max3section.configspace import is_feasible

        rng = np.random.default_rng(5)
        checked = 0
        for _ in range(200):
            b = random_box(rng)
            lower = ratio_lower_bound(b)
            if lower is None:
                continue
            best = np.inf
            for _ in range(1000):
                p = b.sample(rng)
                x3 = 1 - p[0] - p[1]
                w3 = 1 - p[2] - p[3]
                if not (0 <= x3 <= 1 and 0 <= w3 <= 1):
                    continue
                c = Configuration.from_t((p[0], p[1], x3), (p[2], p[3], w3), p[4:])
                if is_feasible(c).feasible:
                    best = min(best, cut_probability(c))
            if np.isfinite(best):
                checked += 1
                assert lower <= best + P78.tau_num
        assert checked >= 50


class TestCertify:
    def test_small_region_certified_at_078(self):
        region = Box.around(CENTER, 0.01)
        params = CertifyParams(rho=0.78, delta_prime=0.01, max_depth=10,
                               region=region)
        res = certify(params)
        assert res.certified and not res.survivors
        assert all(r.margin >= params.tau_num
                   for r in res.records if r.eliminated)

    def test_same_region_exhausted_at_083(self):
        region = Box.around(CENTER, 0.01)
        params = CertifyParams(rho=0.83, delta_prime=0.01, max_depth=2,
                               region=region)
        res = certify(params)
        assert res.status == "EXHAUSTED"
        assert any(b.contains(CENTER, tol=1e-9) for b, _ in res.survivors)

    def test_worker_count_does_not_change_records(self):
        region = Box.around(CENTER, 0.012)
        mk = lambda w: CertifyParams(rho=0.78, delta_prime=0.01, max_depth=8,
                                     region=region, workers=w, eta1=0.012)
        r1 = certify(mk(1))
        r2 = certify(mk(2))
        key = lambda res: sorted((r.box.key(), r.reason, r.depth)
                                 for r in res.records)
        assert r1.status == r2.status
        assert key(r1) == key(r2)

    def test_smaller_rho_eliminates_superset(self):
        region = Box.around(CENTER, 0.01)
        mk = lambda rho: CertifyParams(rho=rho, delta_prime=0.01, max_depth=3,
                                       region=region)
        loose = certify(mk(0.76))
        tight = certify(mk(0.80))
        loose_boxes = [r.box for r in loose.records if r.eliminated]
        rng = np.random.default_rng(6)
        for rec in tight.records:
            if not rec.eliminated:
                continue
            for _ in range(10):
                p = rec.box.sample(rng)
                assert any(b.contains(p, tol=1e-12) for b in loose_boxes)

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            CertifyParams(rho=1.2)
        with pytest.raises(ValueError):
            CertifyParams(delta_prime=0.0)
        with pytest.raises(ValueError):
            CertifyParams(eta1=-1)


class TestComposition:
    def test_exact_fraction_identity(self):
        bound = final_approximation_bound(Fraction(80, 100), Fraction(1, 100))
        assert bound == Fraction(394, 495)
        assert bound >= Fraction(795, 1000)

    def test_float_value(self):
        assert final_approximation_bound(0.80, 0.01) == pytest.approx(
            0.7959595959595959, abs=1e-15)


@pytest.fixture(scope="module")
def small_run():
    region = Box.around(CENTER, 0.01)
    params = CertifyParams(rho=0.78, delta_prime=0.01, max_depth=10,
                           region=region)
    return certify(params), params


class TestCertificateIO:
    def test_round_trip(self, tmp_path, small_run):
        res, params = small_run
        path = tmp_path / "cert.txt"
        write_certificate(res.records, path)
        again = read_certificate(path)
        assert len(again) == len(res.records)
        for a, b in zip(again, res.records):
            assert a.box == b.box and a.reason == b.reason
            assert a.depth == b.depth and a.margin == b.margin

    def test_malformed_rejected(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("0 LP_INFEASIBLE 0.5 1 2 3\n")
        with pytest.raises(ValueError, match="expected 17 fields"):
            read_certificate(p)


class TestAudit:
    def test_valid_log_passes(self, small_run):
        res, params = small_run
        audit = audit_certificate(res.records, params, probes_per_cube=16, seed=3)
        assert audit.ok
        assert audit.probes_in_region > 0

    def test_serialized_log_passes(self, tmp_path, small_run):
        res, params = small_run
        path = tmp_path / "cert.txt"
        write_certificate(res.records, path)
        audit = audit_certificate(read_certificate(path), params,
                                  probes_per_cube=8, seed=4)
        assert audit.ok

    def test_stricter_rho_claim_fails_with_witness(self, small_run):
        # the 0.78 log cannot support a 0.83 claim: probes near the worst
        # configuration have ratio ~0.8193
        res, params = small_run
        lie = CertifyParams(rho=0.83, delta_prime=0.01,
                            max_depth=params.max_depth, region=params.region)
        audit = audit_certificate(res.records, lie, probes_per_cube=64, seed=5)
        assert not audit.ok
        assert audit.failure == "counterexample probe"
        assert audit.witness is not None
        x1, x2, w1, w2 = audit.witness[:4]
        assert abs(x1 - CENTER[0]) < 0.02 and abs(w1 - CENTER[2]) < 0.02

    def test_widened_box_breaks_coverage(self, small_run):
        res, params = small_run
        mutated = list(res.records)
        for i, rec in enumerate(mutated):
            if rec.eliminated:
                lo, hi = rec.box.ix1
                bigger = Box((max(0, lo - 0.2), min(1, hi + 0.2)),
                             rec.box.ix2, rec.box.iw1, rec.box.iw2,
                             rec.box.it1, rec.box.it2, rec.box.it3)
                mutated[i] = CubeRecord(bigger, rec.reason, rec.margin, rec.depth)
                break
        audit = audit_certificate(mutated, params, probes_per_cube=4, seed=6)
        assert not audit.ok
        assert "coverage gap" in audit.failure

    def test_unproved_region_with_survivors_passes_trivially(self):
        region = Box.around(CENTER, 0.01)
        params = CertifyParams(rho=0.78, delta_prime=0.01, max_depth=0,
                               region=region)
        tiles = stage1_tiles(params)
        survivors = [(t, 0) for t in tiles]
        audit = audit_certificate([], params, probes_per_cube=4, seed=7,
                                  survivors=survivors)
        assert audit.ok and audit.eliminated_boxes == 0

    def test_empty_log_without_survivors_fails_coverage(self):
        region = Box.around(CENTER, 0.01)
        params = CertifyParams(rho=0.78, delta_prime=0.01, region=region)
        audit = audit_certificate([], params, probes_per_cube=4, seed=8)
        assert not audit.ok
