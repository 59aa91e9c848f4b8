import math

import numpy as np
import pytest

from pairkey import montecarlo as mc
from pairkey import theory as th
from pairkey.channels import ChannelParams, DiskParams, disk_graph, match_rho, \
    sample_er, sample_positions
from pairkey.graph import intersect, is_connected, isolated_count
from pairkey.scheme import SchemeParams, k_adjacency_graph, sample_pairing


def object_path_trial(n, K, p, channel, entropy):
    """Compose the trial from the object-level pieces; must agree bitwise
    with run_trial given the same entropy."""
    rng = mc.rng_from_entropy(entropy)
    pt = sample_pairing(SchemeParams(n=n, K=K), rng)
    h = k_adjacency_graph(pt)
    if channel == "on_off":
        g = sample_er(n, ChannelParams(p=p), rng)
    else:
        rho = match_rho(p, allow_large_rho=(channel == "disk_forced")).rho
        pos = sample_positions(n, rng)
        g = disk_graph(pos, DiskParams(rho=rho, forced=rho >= 0.5))
    hg = intersect(h, g)
    return mc.TrialOutcome(connected=is_connected(hg),
                           isolated_count=isolated_count(hg),
                           edge_count=hg.edge_count)


class TestRunTrial:
    def test_deterministic(self):
        e = mc.trial_entropy(42, "on_off", 50, 2, 1, 7)
        assert mc.run_trial(50, 5, 0.3, "on_off", e) == \
            mc.run_trial(50, 5, 0.3, "on_off", e)

    def test_complete_intersection(self):
        out = mc.run_trial(20, 19, 1.0, "on_off", 5)
        assert out.connected and out.edge_count == 190

    def test_containment_invariant(self):
        for t in range(100):
            out = mc.run_trial(30, 2, 0.3, "on_off",
                               mc.trial_entropy(3, "on_off", 30, 0, 0, t))
            if out.connected:
                assert out.isolated_count == 0

    @pytest.mark.parametrize("channel", ["on_off", "disk"])
    def test_matches_object_path(self, channel):
        for t in range(25):
            e = mc.trial_entropy(11, channel, 25, 0, 0, t)
            assert mc.run_trial(25, 4, 0.4, channel, e) == \
                object_path_trial(25, 4, 0.4, channel, e)

    def test_forced_channel_matches_object_path(self):
        for t in range(10):
            e = mc.trial_entropy(11, "disk_forced", 25, 0, 0, t)
            assert mc.run_trial(25, 4, 0.9, "disk_forced", e) == \
                object_path_trial(25, 4, 0.9, "disk_forced", e)

    def test_full_visibility_connected(self):
        hits = sum(
            mc.run_trial(50, 5, 1.0, "on_off",
                         mc.trial_entropy(9, "on_off", 50, 0, 0, t)).connected
            for t in range(200))
        assert hits / 200 >= 0.99

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            mc.run_trial(10, 10, 0.5, "on_off", 1)
        with pytest.raises(ValueError):
            mc.run_trial(10, 2, 0.0, "on_off", 1)
        with pytest.raises(ValueError):
            mc.run_trial(10, 2, 0.5, "nope", 1)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            mc.ExperimentConfig(n=10, K_grid=(10,), p_grid=(0.5,), trials=5, seed=1)
        with pytest.raises(ValueError):
            mc.ExperimentConfig(n=10, K_grid=(2,), p_grid=(), trials=5, seed=1)
        with pytest.raises(ValueError):
            mc.ExperimentConfig(n=10, K_grid=(2,), p_grid=(0.5,), trials=0, seed=1)
        with pytest.raises(ValueError):
            mc.ExperimentConfig(n=10, K_grid=(2,), p_grid=(0.5,), trials=5,
                                seed=1, channel="bogus")


SMALL = mc.ExperimentConfig(n=25, K_grid=(2, 4, 6), p_grid=(0.3, 0.8),
                            trials=40, seed=77)


class TestSweep:
    def test_shape_and_order(self):
        t = mc.sweep(SMALL)
        assert len(t.rows) == 6
        keys = [(r.channel, r.p, r.K) for r in t.rows]
        assert keys == sorted(keys)

    def test_workers_bit_identical(self):
        t1 = mc.sweep(SMALL, workers=1)
        t2 = mc.sweep(SMALL, workers=3)
        assert t1 == t2
        assert t1.to_csv_text() == t2.to_csv_text()

    def test_containment_per_cell(self):
        for r in mc.sweep(SMALL).rows:
            assert r.count_connected <= r.count_no_isolated

    def test_p1_never_isolated(self):
        cfg = mc.ExperimentConfig(n=30, K_grid=(1, 3), p_grid=(1.0,),
                                  trials=60, seed=5)
        for r in mc.sweep(cfg).rows:
            assert r.prob_no_isolated == 1.0
            assert any("rule-of-three" in note for note in r.notes)

    def test_stderr(self):
        r = mc.sweep(SMALL).rows[0]
        q = r.prob_connected
        assert r.stderr_connected == pytest.approx(
            math.sqrt(q * (1 - q) / r.trials))

    def test_soft_monotone_in_k(self):
        cfg = mc.ExperimentConfig(n=50, K_grid=(1, 3, 5, 8, 12),
                                  p_grid=(0.5,), trials=150, seed=13)
        rows = mc.sweep(cfg).column(0.5)
        for lo, hi in zip(rows, rows[1:]):
            floor = lo.prob_connected - 4 * math.sqrt(
                max(lo.prob_connected * (1 - lo.prob_connected), 0.25 / lo.trials)
                / lo.trials)
            assert hi.prob_connected >= floor


class TestEstimateTable:
    def test_csv_header(self):
        text = mc.sweep(SMALL).to_csv_text()
        assert text.splitlines()[0] == ",".join(mc.CSV_COLUMNS)

    def test_json_round_trip(self):
        t = mc.sweep(SMALL)
        assert mc.EstimateTable.from_json_obj(t.to_json_obj()) == t

    def test_cell_lookup(self):
        t = mc.sweep(SMALL)
        assert t.cell("on_off", 4, 0.3).K == 4
        with pytest.raises(KeyError):
            t.cell("on_off", 99, 0.3)


class TestFindCrossover:
    def _table(self, probs, p=0.5):
        rows = tuple(
            mc.CellEstimate(channel="on_off", n=10, K=k, p=p, trials=100,
                            count_connected=int(q * 100),
                            count_no_isolated=int(q * 100), seed=1)
            for k, q in enumerate(probs, start=1))
        return mc.EstimateTable(rows=rows)

    def test_all_zero_none(self):
        assert mc.find_crossover(self._table([0, 0, 0]), 0.5) is None

    def test_monotone_column(self):
        assert mc.find_crossover(self._table([0.1, 0.4, 0.62, 0.9]), 0.5) == 3

    def test_level(self):
        assert mc.find_crossover(self._table([0.1, 0.4, 0.62, 0.9]), 0.5,
                                 level=0.9) == 4

    def test_missing_p(self):
        with pytest.raises(KeyError):
            mc.find_crossover(self._table([0.5]), 0.9)


class TestCompareChannels:
    def test_same_channel_zero_delta(self):
        t1 = mc.sweep(SMALL)
        t2 = mc.sweep(SMALL)
        for (r1, r2) in zip(t1.rows, t2.rows):
            assert r1.prob_connected == r2.prob_connected

    def test_comparison_structure(self):
        cfg = mc.ExperimentConfig(n=30, K_grid=(2, 5, 9), p_grid=(0.3,),
                                  trials=30, seed=21)
        cmp = mc.compare_channels(cfg)
        assert len(cmp.deltas) == 3
        assert len(cmp.crossovers) == 1
        assert cmp.forced_rho_ps == ()

    def test_forced_flagging(self):
        cfg = mc.ExperimentConfig(n=20, K_grid=(3,), p_grid=(0.9,),
                                  trials=10, seed=2)
        cmp = mc.compare_channels(cfg, allow_large_rho=True)
        assert cmp.forced_rho_ps == (0.9,)
        assert cmp.table_disk.rows[0].channel == "disk_forced"


class TestEstimateEdgeProb:
    def test_small_case(self):
        est, se = mc.estimate_edge_prob(5, 2, 0.5, trials=50_000, seed=4)
        assert abs(est - 0.375) <= 3 * math.sqrt(0.375 * 0.625 / 50_000)

    def test_large_n(self):
        q = th.edge_prob(200, 12, 0.2)
        est, se = mc.estimate_edge_prob(200, 12, 0.2, trials=50_000, seed=4)
        assert abs(est - q) <= 3 * math.sqrt(q * (1 - q) / 50_000)

    def test_deterministic(self):
        a = mc.estimate_edge_prob(10, 3, 0.4, trials=5000, seed=9)
        b = mc.estimate_edge_prob(10, 3, 0.4, trials=5000, seed=9)
        assert a == b


class TestValidateBounds:
    def test_passes_reference_point(self):
        report = mc.validate_bounds(5, 2, 0.5, samples=20_000, seed=3)
        assert report.all_passed
        names = {c.name for c in report.checks}
        assert names == {"edge_prob", "pairing_prob", "isolation_prob",
                         "b_leq_u_squared", "cross_moment_ratio",
                         "estar_mean", "estar_tail", "edge_covariance"}

    def test_p1_skips_cross_moment(self):
        report = mc.validate_bounds(5, 2, 1.0, samples=5_000, seed=3)
        check = next(c for c in report.checks if c.name == "cross_moment_ratio")
        assert check.status.startswith("skipped")
        assert "p=1" in check.status

    def test_small_sample_rejected(self):
        with pytest.raises(ValueError):
            mc.validate_bounds(5, 2, 0.5, samples=500)

    def test_n3_isolation(self):
        report = mc.validate_bounds(3, 1, 0.5, samples=20_000, seed=6)
        iso = next(c for c in report.checks if c.name == "isolation_prob")
        assert iso.reference == pytest.approx(0.375, rel=1e-12)
        assert iso.passed

    def test_report_dict(self):
        report = mc.validate_bounds(5, 2, 0.5, samples=2_000, seed=1)
        d = report.to_dict()
        assert d["n"] == 5 and len(d["checks"]) == 8

    def test_deterministic(self):
        a = mc.validate_bounds(5, 2, 0.5, samples=3_000, seed=8)
        b = mc.validate_bounds(5, 2, 0.5, samples=3_000, seed=8)
        assert a == b
