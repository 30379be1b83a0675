from __future__ import annotations

import json
import math
import os

import pytest

from evocd.detectors import AlgoConfig
from evocd.harness import (
    DESK_LFR,
    AggregateResult,
    ExperimentSpec,
    RunRecord,
    aggregate,
    export_results,
    gain_bucket,
    import_records,
    profile_spec,
    profile_transform,
    responsiveness_experiment,
    run_experiment,
    run_experiment_detailed,
    timing_report,
)
from evocd.lfr import LfrParams
from evocd.transforms import TransformConfig
from evocd.validation import derive_seed


TINY_LFR = LfrParams(n=80, min_comm=10, max_comm=30, avg_degree=8, max_degree=20)


def tiny_spec(**kw) -> ExperimentSpec:
    defaults = dict(
        lfr=TINY_LFR,
        transform=TransformConfig(kind="intermittence", n_snapshots=8, start=2, end=6),
        algorithms=[AlgoConfig("gma"), AlgoConfig("sgma")],
        n_graphs=2,
        n_runs=2,
        master_seed=5,
    )
    defaults.update(kw)
    return ExperimentSpec(**defaults)


class TestSeeds:
    def test_derive_seed_stable(self):
        assert derive_seed("run", 0, 1, 2, "gma") == derive_seed("run", 0, 1, 2, "gma")
        assert derive_seed("run", 0, 1, 2, "gma") != derive_seed("run", 0, 1, 2, "sgma")
        assert derive_seed("a") < 2**63


class TestRunExperiment:
    def test_record_cardinality(self):
        records = run_experiment(tiny_spec(), serial=True)
        assert len(records) == 2 * 2 * 2
        keys = {(r.graph_id, r.run_id, r.algorithm) for r in records}
        assert len(keys) == len(records)

    def test_byte_identical_reruns(self):
        a = run_experiment(tiny_spec(), serial=True)
        b = run_experiment(tiny_spec(), serial=True)
        strip = lambda r: (r.graph_id, r.run_id, r.algorithm, r.transform, r.S, r.K, r.D, r.CP)
        assert [strip(r) for r in a] == [strip(r) for r in b]

    def test_serial_parallel_identical(self):
        a = run_experiment(tiny_spec(), serial=True)
        b = run_experiment(tiny_spec(), serial=False, max_workers=2)
        strip = lambda r: (r.graph_id, r.run_id, r.algorithm, r.S, r.K, r.D, r.CP)
        assert [strip(r) for r in a] == [strip(r) for r in b]

    def test_failed_graphs_skipped_with_count(self):
        spec = tiny_spec(
            transform=TransformConfig(kind="removal", n_snapshots=12, start=1, end=12,
                                      phi_rem=0.9),
        )
        result = run_experiment_detailed(spec, serial=True)
        assert result.skipped_graphs == 2
        assert result.records == []

    def test_morphing_records_have_delay(self):
        spec = tiny_spec(
            transform=TransformConfig(kind="merge", n_snapshots=8, start=2, end=6,
                                      tau=0.2, targets=1),
            algorithms=[AlgoConfig("gma")],
        )
        records = run_experiment(spec, serial=True)
        assert all(r.D is not None for r in records)
        assert all(r.K is not None for r in records)

    def test_disruptive_records_have_no_correctness(self):
        spec = tiny_spec(
            transform=TransformConfig(kind="removal", n_snapshots=8, start=2, end=6,
                                      phi_rem=0.02),
            algorithms=[AlgoConfig("gma")],
        )
        records = run_experiment(spec, serial=True)
        assert all(r.K is None and r.D is None for r in records)

    def test_responsiveness_requires_morphing(self):
        with pytest.raises(ValueError, match="morphing"):
            responsiveness_experiment(tiny_spec(), serial=True)

    def test_responsiveness_protocol_shape(self):
        spec = tiny_spec(
            transform=TransformConfig(kind="merge", targets=1),
            algorithms=[AlgoConfig("gma")],
        )
        records = responsiveness_experiment(spec, serial=True)
        assert len(records) == 4
        assert all(r.D is not None for r in records)


class TestAggregate:
    def _fixture_records(self):
        # two graphs x two runs; run-mean then across-graph median is
        # distinguishable from a flat median over all values
        data = {
            (0, 0): 0.8, (0, 1): 0.6,   # graph 0 mean 0.7
            (1, 0): 0.9, (1, 1): 0.9,   # graph 1 mean 0.9
        }
        records = [
            RunRecord(g, r, "gma", "merge", S=v, K=v / 2, D=None, CP=None,
                      wall_clock_per_snapshot=0.01)
            for (g, r), v in data.items()
        ]
        records += [
            RunRecord(g, r, "sgma", "merge", S=v + 0.08, K=v / 2 + 0.1, D=None, CP=None,
                      wall_clock_per_snapshot=0.005)
            for (g, r), v in data.items()
        ]
        return records

    def test_aggregation_order_run_mean_then_graph_median(self):
        agg = aggregate(self._fixture_records(), resamples=1000, seed=0)
        row = agg.row("gma", "merge", "S")
        assert row.median == pytest.approx(0.8)  # median of {0.7, 0.9}
        assert row.ci_lo <= row.median <= row.ci_hi

    def test_gain_vs_gma(self):
        agg = aggregate(self._fixture_records(), resamples=1000, seed=0)
        row = agg.row("sgma", "merge", "S")
        assert row.gain_pct == pytest.approx((0.88 - 0.8) / 0.8 * 100.0)
        assert agg.row("gma", "merge", "S").gain_pct == 0.0
        assert agg.row("gma", "merge", "S").bucket == "="

    def test_identical_records_zero_width(self):
        records = [
            RunRecord(g, r, "gma", "merge", S=0.5, K=0.5, D=None, CP=None,
                      wall_clock_per_snapshot=0.01)
            for g in range(3) for r in range(2)
        ]
        agg = aggregate(records, resamples=1000, seed=0)
        row = agg.row("gma", "merge", "S")
        assert row.median == row.ci_lo == row.ci_hi == 0.5
        assert row.gain_pct == 0.0 and row.bucket == "="

    def test_missing_baseline_raises(self):
        records = [RunRecord(0, 0, "sgma", "merge", S=0.5, K=None, D=None, CP=None,
                             wall_clock_per_snapshot=0.01)]
        with pytest.raises(ValueError, match="baseline"):
            aggregate(records, resamples=1000)

    def test_buckets(self):
        assert gain_bucket(0.0) == "="
        assert gain_bucket(0.4) == "="
        assert gain_bucket(3.0) == "+"
        assert gain_bucket(5.0) == "+"
        assert gain_bucket(5.2) == "++"
        assert gain_bucket(11.0) == "+++"
        assert gain_bucket(-0.3) == "="
        assert gain_bucket(-5.0) == "-"
        assert gain_bucket(-5.2) == "--"
        assert gain_bucket(-17.0) == "----"
        assert gain_bucket(None) == ""

    def test_reached_cp_fraction(self):
        records = [
            RunRecord(0, r, "gma", "split", S=0.9, K=0.8, D=float(10 if r else 0),
                      CP=None if r else 10, wall_clock_per_snapshot=0.01)
            for r in range(2)
        ]
        agg = aggregate(records, resamples=1000, seed=0)
        assert agg.row("gma", "split", "reached_cp").median == pytest.approx(0.5)


class TestTiming:
    def test_normalized_to_gma(self):
        records = [
            RunRecord(0, 0, "gma", "merge", 0.9, None, None, None, 0.010),
            RunRecord(0, 1, "gma", "merge", 0.9, None, None, None, 0.012),
            RunRecord(0, 0, "sgma", "merge", 0.9, None, None, None, 0.005),
            RunRecord(0, 1, "sgma", "merge", 0.9, None, None, None, 0.006),
        ]
        ratios = timing_report(records)
        assert ratios["gma"] == 1.0
        assert ratios["sgma"] == pytest.approx(0.0055 / 0.011)

    def test_requires_gma(self):
        with pytest.raises(ValueError, match="GMA"):
            timing_report([RunRecord(0, 0, "sgma", "merge", 0.9, None, None, None, 0.01)])


class TestExport:
    def test_round_trip(self, tmp_path):
        spec = tiny_spec()
        records = run_experiment(spec, serial=True)
        agg = aggregate(records, resamples=1000, seed=0)
        export_results(records, agg, tmp_path, spec=spec)
        assert (tmp_path / "runs.csv").exists()
        assert (tmp_path / "aggregate.csv").exists()
        back = import_records(tmp_path / "runs.csv")
        assert back == records

    def test_meta_contains_master_seed_and_flags(self, tmp_path):
        spec = tiny_spec()
        export_results([], None, tmp_path, spec=spec)
        meta = json.loads((tmp_path / "meta.json").read_text())
        assert meta["spec"]["master_seed"] == 5
        assert meta["design_flags"]["alpha_fresh_edges"] == "blend"

    def test_header_documented(self, tmp_path):
        export_results([], None, tmp_path)
        header = (tmp_path / "runs.csv").read_text().splitlines()[0]
        assert header == "graph_id,run_id,algorithm,transform,S,K,D,CP,wall_clock_per_snapshot"


class TestProfiles:
    def test_desk_profile(self):
        spec = profile_spec("desk", profile_transform("merge"), [AlgoConfig("gma")])
        assert spec.lfr.n == 250 and spec.n_graphs == 20 and spec.n_runs == 5

    def test_paper_profile(self):
        spec = profile_spec("paper", profile_transform("merge"), [AlgoConfig("gma")])
        assert spec.lfr.n == 500 and spec.n_graphs == 100 and spec.n_runs == 10

    def test_profile_transform_overrides(self):
        assert profile_transform("birth").birth_fraction == pytest.approx(0.3)
        assert profile_transform("merge").tau == 0.01
        assert profile_transform("birth", tau=1.0).tau == 1.0

    def test_unknown_profile(self):
        with pytest.raises(ValueError):
            profile_spec("galactic", profile_transform("merge"), [AlgoConfig("gma")])

    def test_duplicate_algorithms_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            tiny_spec(algorithms=[AlgoConfig("gma"), AlgoConfig("gma")])
