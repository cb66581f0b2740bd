"""File formats and the command-line entry points."""

import json
import subprocess
import sys

import numpy as np
import pytest

from voxreg.cli import main
from voxreg.errors import CloudFormatError
from voxreg.geometry import PointCloud, Pose
from voxreg.io import _read_xyz, read_cloud, write_xyz
from voxreg.scenes import generate_scene, random_pose


def _cloud(seed=0, n=12):
    return PointCloud(np.random.default_rng(seed).normal(size=(n, 3)) * 3.0)


# ---------------------------------------------------------------------------
# xyz


def test_xyz_round_trip_is_bit_exact(tmp_path):
    cloud = _cloud()
    path = tmp_path / "c.xyz"
    write_xyz(cloud, path)
    again = read_cloud(path)
    assert np.array_equal(again.points, cloud.points)


def test_xyz_skips_comments_and_blanks(tmp_path):
    path = tmp_path / "c.xyz"
    path.write_text("# header\n\n1 2 3\n   \n# more\n4 5 6\n")
    cloud = read_cloud(path)
    assert np.array_equal(cloud.points, [[1, 2, 3], [4, 5, 6]])


def test_xyz_reports_offending_line():
    lines = ["1 2 3", "4 5 6", "7 8"]
    with pytest.raises(CloudFormatError, match="line 3"):
        _read_xyz(lines)


def test_xyz_rejects_non_numeric(tmp_path):
    path = tmp_path / "c.xyz"
    path.write_text("1 2 3\nfoo bar baz\n")
    with pytest.raises(CloudFormatError, match="line 2"):
        read_cloud(path)


def test_xyz_rejects_non_finite(tmp_path):
    path = tmp_path / "c.xyz"
    path.write_text("1 2 nan\n")
    with pytest.raises(CloudFormatError):
        read_cloud(path)


def test_empty_xyz_gives_empty_cloud(tmp_path):
    path = tmp_path / "c.xyz"
    path.write_text("# nothing here\n")
    assert len(read_cloud(path)) == 0


# ---------------------------------------------------------------------------
# ply


def _write_ply(path, body, count=2, extra_header=()):
    lines = ["ply", "format ascii 1.0", f"element vertex {count}",
             "property float x", "property float y", "property float z",
             *extra_header, "end_header", *body]
    path.write_text("\n".join(lines) + "\n")


def test_ply_reads_vertices(tmp_path):
    path = tmp_path / "c.ply"
    _write_ply(path, ["0 0 0", "1.5 2.5 3.5"])
    cloud = read_cloud(path)
    assert np.array_equal(cloud.points, [[0, 0, 0], [1.5, 2.5, 3.5]])


def test_ply_extra_properties_are_ignored(tmp_path):
    path = tmp_path / "c.ply"
    lines = ["ply", "format ascii 1.0", "element vertex 1",
             "property float x", "property float y", "property float z",
             "property uchar red",
             "end_header", "1 2 3 255"]
    path.write_text("\n".join(lines) + "\n")
    cloud = read_cloud(path)
    assert np.array_equal(cloud.points, [[1, 2, 3]])


def test_ply_binary_is_rejected(tmp_path):
    path = tmp_path / "c.ply"
    path.write_text("ply\nformat binary_little_endian 1.0\nend_header\n")
    with pytest.raises(CloudFormatError, match="binary"):
        read_cloud(path)


def test_ply_with_nul_bytes_is_rejected(tmp_path):
    path = tmp_path / "c.ply"
    path.write_bytes(b"ply\nformat ascii 1.0\x00\x01\x02")
    with pytest.raises(CloudFormatError):
        read_cloud(path)


def test_ply_count_mismatch_is_rejected(tmp_path):
    path = tmp_path / "c.ply"
    _write_ply(path, ["0 0 0"], count=2)
    with pytest.raises(CloudFormatError):
        read_cloud(path)


def test_ply_without_xyz_is_rejected(tmp_path):
    path = tmp_path / "c.ply"
    lines = ["ply", "format ascii 1.0", "element vertex 1",
             "property float x", "property float y",
             "end_header", "1 2"]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CloudFormatError):
        read_cloud(path)


def test_format_override(tmp_path):
    path = tmp_path / "cloud.dat"
    path.write_text("1 2 3\n")
    assert len(read_cloud(path, fmt="xyz")) == 1
    with pytest.raises(CloudFormatError):
        read_cloud(path, fmt="nope")


# ---------------------------------------------------------------------------
# command line


@pytest.fixture(scope="module")
def sample_pair(tmp_path_factory):
    folder = tmp_path_factory.mktemp("pair")
    pose = random_pose(np.random.default_rng(42), 60.0, 5.0)
    src, tgt, _ = generate_scene(seed=77, n_points=2500, extent=10.0,
                                 pose_gt=pose, noise_sigma=0.01,
                                 outlier_corr_ratio=0.0, n_pairs=10)
    s, t = folder / "src.xyz", folder / "tgt.xyz"
    write_xyz(src, s)
    write_xyz(tgt, t)
    return s, t


def test_cli_register_succeeds(sample_pair, tmp_path, capsys):
    s, t = sample_pair
    out = tmp_path / "pose.json"
    code = main(["register", "--source", str(s), "--target", str(t),
                 "--voxel", "0.2", "--json", str(out)])
    captured = capsys.readouterr().out
    assert code == 0
    assert "valid" in captured
    data = json.loads(out.read_text())
    assert data["valid"] is True
    assert len(data["pose"]) == 4
    assert data["num_inliers"] >= 5


def test_cli_register_missing_file_is_usage_error(tmp_path):
    code = main(["register", "--source", str(tmp_path / "no.xyz"),
                 "--target", str(tmp_path / "no2.xyz"), "--voxel", "0.2"])
    assert code == 1


def test_cli_register_failure_exits_two(sample_pair, tmp_path):
    s, _ = sample_pair
    # A line cloud cannot produce descriptors: registration fails cleanly.
    t = np.linspace(0, 10, 200)
    line = PointCloud(np.column_stack([t, np.zeros_like(t), np.zeros_like(t)]))
    line_path = tmp_path / "line.xyz"
    write_xyz(line, line_path)
    code = main(["register", "--source", str(s), "--target", str(line_path),
                 "--voxel", "0.2"])
    assert code == 2


def test_cli_rejects_unknown_arguments():
    with pytest.raises(SystemExit) as err:
        main(["register", "--nonsense"])
    assert err.value.code == 1


def test_cli_requires_a_subcommand():
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 1


def test_cli_extract_writes_descriptors(sample_pair, tmp_path):
    s, _ = sample_pair
    out = tmp_path / "desc.txt"
    code = main(["extract", "--input", str(s), "--voxel", "0.25",
                 "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines) > 100
    assert len(lines[0].split()) == 34


def test_cli_extract_empty_cloud_fails(tmp_path):
    empty = tmp_path / "empty.xyz"
    empty.write_text("")
    code = main(["extract", "--input", str(empty), "--voxel", "0.25",
                 "--out", str(tmp_path / "d.txt")])
    assert code == 2


def test_cli_bench_writes_report_bundle(tmp_path):
    out = tmp_path / "bench"
    code = main(["bench", "--out", str(out), "--scenes", "2",
                 "--points", "900", "--voxel", "0.25", "--seed", "1"])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["summary"]["n_scenes"] == 2
    assert (out / "report.csv").exists()
    assert (out / "timings.txt").exists()
    assert (out / "errors.png").stat().st_size > 0
    assert (out / "timings.png").stat().st_size > 0
    csv_lines = (out / "report.csv").read_text().strip().split("\n")
    assert len(csv_lines) == 3  # header + one row per scene


def test_module_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "voxreg.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "register" in proc.stdout
