"""Sweep runners: configuration, determinism, and output formats."""

import json
import math

import pytest

from prefsim.errors import InvalidParameterError
from prefsim.experiments import (
    CSV_HEADER,
    Curve,
    ExperimentConfig,
    curve_metadata,
    curve_to_csv,
    replicate_rng,
    run_il_sweep,
    run_rlpo_dpo_sweep,
    run_slic_sweep,
    run_theory_check,
)

FAST = dict(num_seeds=5, master_seed=11)


class TestConfigValidation:
    def test_defaults_are_valid(self):
        config = ExperimentConfig()
        assert config.pool_m1 == 10 and config.pool_m2 == 100
        assert config.base_mass1 == 0.8 and config.p1 == 0.6

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(algorithm="nope"),
            dict(pool_m1=0),
            dict(base_mass1=1.0),
            dict(p1=0.0),
            dict(delta=0.0),
            dict(set_size=1),
            dict(data_grid=()),
            dict(m2_grid=(0,)),
            dict(num_seeds=0),
            dict(master_seed=-1),
            dict(algorithm="slic", set_size=3),
            dict(algorithm="dpo", beta=0.0),
        ],
    )
    def test_rejected(self, kwargs):
        with pytest.raises(InvalidParameterError):
            ExperimentConfig(**kwargs)

    def test_il_allows_zero_beta(self):
        ExperimentConfig(algorithm="il", beta=0.0)


class TestDeterminism:
    def test_identical_runs_identical_csv(self):
        config = ExperimentConfig(algorithm="rlpo", data_grid=(100, 316), **FAST)
        a = run_rlpo_dpo_sweep(config)
        b = run_rlpo_dpo_sweep(config)
        assert a == b
        assert curve_to_csv(a) == curve_to_csv(b)

    def test_master_seed_changes_output(self):
        base = ExperimentConfig(algorithm="rlpo", data_grid=(200,), num_seeds=5)
        other = ExperimentConfig(
            algorithm="rlpo", data_grid=(200,), num_seeds=5, master_seed=99
        )
        assert run_rlpo_dpo_sweep(base) != run_rlpo_dpo_sweep(other)

    def test_point_reruns_in_isolation(self):
        full = run_rlpo_dpo_sweep(
            ExperimentConfig(algorithm="dpo", data_grid=(100, 400), **FAST)
        )
        single = run_rlpo_dpo_sweep(
            ExperimentConfig(algorithm="dpo", data_grid=(400,), **FAST)
        )
        assert full.points[1] == single.points[0]

    def test_replicate_rng_is_stable(self):
        a = replicate_rng(3, 100, 7).integers(0, 1 << 30, size=4)
        b = replicate_rng(3, 100, 7).integers(0, 1 << 30, size=4)
        assert list(a) == list(b)


class TestSweepBehavior:
    def test_rlpo_directions_at_small_scale(self):
        pairwise = run_rlpo_dpo_sweep(
            ExperimentConfig(algorithm="rlpo", set_size=2, data_grid=(4000,), **FAST)
        )
        quads = run_rlpo_dpo_sweep(
            ExperimentConfig(algorithm="rlpo", set_size=4, data_grid=(4000,), **FAST)
        )
        assert pairwise.points[0].mean_p_m1 > 0.8
        assert quads.points[0].mean_p_m1 < 0.2

    def test_il_sweep_tracks_asymptotic_mass(self):
        curve = run_il_sweep(
            ExperimentConfig(
                algorithm="il",
                beta=0.01,
                num_data=20000,
                m2_grid=(10, 100),
                **FAST,
            )
        )
        assert curve.sweep_field == "pool_m2"
        assert curve.points[0].mean_p_m1 == pytest.approx(15 / 25, abs=0.03)
        assert curve.points[1].mean_p_m1 == pytest.approx(15 / 115, abs=0.03)

    def test_slic_sweep_decreases(self):
        curve = run_slic_sweep(
            ExperimentConfig(
                algorithm="slic", num_data=20000, m2_grid=(10, 1000), **FAST
            )
        )
        assert curve.points[0].mean_p_m1 > curve.points[1].mean_p_m1

    def test_symmetric_setup_stays_at_half(self):
        symmetric = dict(pool_m1=10, base_mass1=0.5, p1=0.5, num_data=20000, m2_grid=(10,))
        il = run_il_sweep(ExperimentConfig(algorithm="il", **symmetric, **FAST))
        assert il.points[0].mean_p_m1 == pytest.approx(0.5, abs=0.02)
        # Symmetric pairwise data make the hinge loss flat between its kinks,
        # so each seed's minimizer sits at one kink (mass ~ sigmoid(+/-delta))
        # and only the across-seed mean is centered.  With a small margin the
        # kink spread itself is inside the tolerance.
        slic_small = run_slic_sweep(
            ExperimentConfig(algorithm="slic", delta=0.1, num_seeds=100, **symmetric)
        )
        assert slic_small.points[0].mean_p_m1 == pytest.approx(0.5, abs=0.02)
        slic_unit = run_slic_sweep(
            ExperimentConfig(algorithm="slic", delta=1.0, num_seeds=100, **symmetric)
        )
        spread = abs(1 / (1 + math.e) - 0.5)  # per-seed kink offset at delta = 1
        assert slic_unit.points[0].mean_p_m1 == pytest.approx(
            0.5, abs=3 * spread / math.sqrt(100)
        )

    def test_slic_decreases_for_both_margins(self):
        for delta in (0.1, 1.0):
            config = ExperimentConfig(
                algorithm="slic", delta=delta, num_data=20000, m2_grid=(100, 1000), **FAST
            )
            curve = run_slic_sweep(config)
            assert curve.points[0].mean_p_m1 > curve.points[1].mean_p_m1
            assert curve_metadata(config, curve)["config"]["delta"] == delta

    def test_algorithm_mismatch_rejected(self):
        config = ExperimentConfig(algorithm="il", **FAST)
        with pytest.raises(InvalidParameterError):
            run_rlpo_dpo_sweep(config)
        with pytest.raises(InvalidParameterError):
            run_slic_sweep(config)


class TestOutputFormats:
    def test_csv_schema(self):
        curve = run_rlpo_dpo_sweep(
            ExperimentConfig(algorithm="rlpo", data_grid=(150,), **FAST)
        )
        text = curve_to_csv(curve)
        lines = text.strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert len(lines) == 2
        fields = lines[1].split(",")
        assert fields[0] == "150"
        assert 0.0 <= float(fields[1]) <= 1.0
        assert float(fields[2]) >= 0.0
        assert fields[3] == "5"
        assert 0.0 <= float(fields[4]) <= 1.0

    def test_metadata_payload(self):
        config = ExperimentConfig(algorithm="il", m2_grid=(10, 50), **FAST)
        curve = run_il_sweep(config)
        meta = curve_metadata(config, curve)
        assert meta["config_hash"] == curve.config_hash
        assert meta["seeds_per_point"] == 5
        assert meta["n_points"] == 2
        assert meta["config"]["pool_m1"] == 10
        json.dumps(meta)  # must be serializable

    def test_rows_sorted_by_sweep_value(self):
        curve = run_rlpo_dpo_sweep(
            ExperimentConfig(algorithm="rlpo", data_grid=(500, 100, 300), **FAST)
        )
        values = [p.sweep_value for p in curve.points]
        assert values == sorted(values)


class TestTheoryCheck:
    def test_report_contents(self):
        config = ExperimentConfig(set_size=4, data_grid=(200, 2000), num_seeds=50)
        report = run_theory_check(config, set_sizes=(2, 3, 4, 5))
        directions = [p.direction.value for p in report.predictions]
        assert directions == ["prefer_M1", "boundary", "collapse_to_M2", "collapse_to_M2"]
        assert [e.num_data for e in report.event_rates] == [200, 2000]
        assert report.event_rates[0].eta is not None
        assert report.event_rates[1].eta_event_rate >= report.event_rates[0].eta_event_rate
        rendered = report.render()
        assert "set_size,threshold,condition_holds,direction" in rendered
        assert "num_data,eta,eta_event_rate,il_event_rate" in rendered

    def test_eta_rate_empty_when_condition_fails(self):
        config = ExperimentConfig(set_size=2, data_grid=(100,), num_seeds=10)
        report = run_theory_check(config, set_sizes=(2,))
        assert report.event_rates[0].eta is None
        assert report.event_rates[0].eta_event_rate is None
        assert 0.0 <= report.event_rates[0].il_event_rate <= 1.0

    def test_single_record_events_are_impossible(self):
        # One record: a chosen-1 record has rho_data <= rho_chosen, a chosen-2
        # record has rho_chosen = 0, so the concentration event never holds;
        # the inclusive event needs |I1| > 1.
        config = ExperimentConfig(set_size=4, data_grid=(1,), num_seeds=500, master_seed=5)
        report = run_theory_check(config, set_sizes=(4,))
        assert report.event_rates[0].eta_event_rate == 0.0
        assert report.event_rates[0].il_event_rate == 0.0

    def test_two_record_event_rate_matches_enumeration(self):
        from itertools import product

        from oracles import binom_pmf_value
        from prefsim.theory import default_eta

        config = ExperimentConfig(set_size=4, data_grid=(2,), num_seeds=4000, master_seed=5)
        k, mass1, p1 = 4, 0.8, 0.6
        eta = default_eta(config.base, config.p_star, k)

        def choice_prob(n1, chosen):
            if n1 == k:
                return 1.0 if chosen == 1 else 0.0
            if n1 == 0:
                return 0.0 if chosen == 1 else 1.0
            return p1 if chosen == 1 else 1 - p1

        expected = 0.0
        for n1_a, ch_a, n1_b, ch_b in product(range(k + 1), (1, 2), range(k + 1), (1, 2)):
            rho_chosen = ((ch_a == 1) + (ch_b == 1)) / 2
            rho_data = (n1_a + n1_b) / (2 * k)
            if rho_chosen > 0 and rho_data - rho_chosen > eta:
                expected += (
                    binom_pmf_value(k, n1_a, mass1)
                    * choice_prob(n1_a, ch_a)
                    * binom_pmf_value(k, n1_b, mass1)
                    * choice_prob(n1_b, ch_b)
                )
        observed = run_theory_check(config, set_sizes=(4,)).event_rates[0].eta_event_rate
        sigma = (expected * (1 - expected) / 4000) ** 0.5
        assert abs(observed - expected) <= 4 * sigma
