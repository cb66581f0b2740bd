"""Benchmark harness: report structure, determinism, artifact writing."""

import json

import pytest

from voxreg.bench import (
    BenchConfig,
    report_json,
    run_benchmark,
    timing_table,
    write_outputs,
    write_report_csv,
)

ROW_KEYS = {
    "scene",
    "valid",
    "num_inliers",
    "rte_m",
    "rre_deg",
    "success",
    "failure_reason",
    "stage_counts",
}


@pytest.fixture(scope="module")
def small_run():
    config = BenchConfig(n_scenes=2, n_points=900, voxel=0.25, base_seed=1)
    report, timings = run_benchmark(config)
    return config, report, timings


def test_report_structure(small_run):
    config, report, timings = small_run
    assert set(report) == {"config", "scenes", "summary"}
    assert report["config"]["n_scenes"] == config.n_scenes
    assert len(report["scenes"]) == config.n_scenes
    for row in report["scenes"]:
        assert set(row) == ROW_KEYS
        assert isinstance(row["valid"], bool)
        assert isinstance(row["success"], bool)
    summary = report["summary"]
    assert summary["n_scenes"] == config.n_scenes
    assert summary["n_success"] == sum(r["success"] for r in report["scenes"])
    assert 0.0 <= summary["success_rate"] <= 1.0
    assert len(timings) == config.n_scenes
    for entry in timings:
        assert entry["stage_ms"]
        assert all(ms >= 0.0 for ms in entry["stage_ms"].values())


def test_report_carries_no_wall_clock_or_worker_state(small_run):
    _, report, _ = small_run
    text = report_json(report)
    assert "stage_ms" not in text
    assert "workers" not in text
    json.loads(text)  # must parse back


def test_same_config_same_bytes(small_run):
    config, report, _ = small_run
    again, _ = run_benchmark(config)
    assert report_json(again) == report_json(report)


def test_worker_count_does_not_change_report(small_run):
    config, report, _ = small_run
    threaded, _ = run_benchmark(config, workers=3)
    assert report_json(threaded) == report_json(report)


def test_summary_means_are_none_when_nothing_succeeds():
    # A voxel far larger than the scene collapses every cloud to a
    # handful of points, so each scene fails softly.
    config = BenchConfig(n_scenes=2, n_points=300, voxel=80.0, base_seed=3)
    report, _ = run_benchmark(config)
    summary = report["summary"]
    assert summary["n_success"] == 0
    assert summary["success_rate"] == 0.0
    assert summary["mean_rte_m_success"] is None
    assert summary["mean_rre_deg_success"] is None
    assert all(not r["valid"] for r in report["scenes"])


def test_timing_table_layout(small_run):
    _, _, timings = small_run
    table = timing_table(timings)
    lines = table.splitlines()
    assert lines[0].split() == ["stage", "p50_ms", "p90_ms", "max_ms"]
    assert set(lines[1]) == {"-"}
    assert lines[-1].startswith("total")
    assert table.endswith("\n")


def test_write_report_csv_rows(small_run, tmp_path):
    _, report, _ = small_run
    path = tmp_path / "rows.csv"
    write_report_csv(report, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1 + len(report["scenes"])
    assert lines[0].startswith("scene,valid,num_inliers")


def test_write_outputs_produces_all_artifacts(small_run, tmp_path):
    _, report, timings = small_run
    out = tmp_path / "artifacts"
    paths = write_outputs(report, timings, out)
    names = sorted(p.name for p in paths)
    assert names == sorted(
        ["report.json", "report.csv", "timings.txt", "errors.png", "timings.png"]
    )
    for p in paths:
        assert p.exists() and p.stat().st_size > 0
    restored = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert restored["summary"] == report["summary"]
