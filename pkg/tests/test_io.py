import numpy as np
import pytest

from arcs import ParseError
from arcs.io import (
    load_cloud,
    load_pairs,
    load_truth,
    save_cloud,
    save_matches,
    save_pairs,
    save_truth,
)


def test_cloud_round_trip_bitwise(tmp_path):
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(57, 3))
    path = tmp_path / "cloud.csv"
    save_cloud(path, pts)
    np.testing.assert_array_equal(load_cloud(path), pts)


def test_cloud_without_header(tmp_path):
    path = tmp_path / "bare.csv"
    path.write_text("1,2,3\n4,5,6\n")
    np.testing.assert_array_equal(load_cloud(path), [[1, 2, 3], [4, 5, 6]])


def test_cloud_parse_error_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y,z\n1,2,3\noops,5,6\n")
    with pytest.raises(ParseError) as exc:
        load_cloud(path)
    assert exc.value.line_no == 3


def test_cloud_wrong_column_count(tmp_path):
    path = tmp_path / "cols.csv"
    path.write_text("1,2\n")
    with pytest.raises(ParseError):
        load_cloud(path)


def test_empty_file_warns_and_returns_empty(tmp_path, capsys):
    path = tmp_path / "empty.csv"
    path.write_text("")
    cloud = load_cloud(path)
    assert cloud.shape == (0, 3)
    assert "no data rows" in capsys.readouterr().err


def test_ascii_ply_with_extra_properties(tmp_path):
    path = tmp_path / "cloud.ply"
    path.write_text(
        "ply\n"
        "format ascii 1.0\n"
        "comment exported\n"
        "element vertex 2\n"
        "property float x\n"
        "property float y\n"
        "property float z\n"
        "property float nx\n"
        "property float ny\n"
        "property float nz\n"
        "end_header\n"
        "1 2 3 0 0 1\n"
        "4 5 6 0 1 0\n"
    )
    np.testing.assert_array_equal(load_cloud(path), [[1, 2, 3], [4, 5, 6]])


def test_binary_ply_rejected(tmp_path):
    path = tmp_path / "bin.ply"
    path.write_text(
        "ply\nformat binary_little_endian 1.0\nelement vertex 1\n"
        "property float x\nproperty float y\nproperty float z\nend_header\n"
    )
    with pytest.raises(ParseError) as exc:
        load_cloud(path)
    assert "ascii" in str(exc.value)


def test_ply_missing_coordinates(tmp_path):
    path = tmp_path / "noxyz.ply"
    path.write_text(
        "ply\nformat ascii 1.0\nelement vertex 1\n"
        "property float a\nproperty float b\nend_header\n1 2\n"
    )
    with pytest.raises(ParseError):
        load_cloud(path)


def test_ply_truncated_data(tmp_path):
    path = tmp_path / "short.ply"
    path.write_text(
        "ply\nformat ascii 1.0\nelement vertex 3\n"
        "property float x\nproperty float y\nproperty float z\nend_header\n1 2 3\n"
    )
    with pytest.raises(ParseError):
        load_cloud(path)


def test_pairs_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    y = rng.normal(size=(20, 3))
    x = rng.normal(size=(20, 3))
    path = tmp_path / "pairs.csv"
    save_pairs(path, y, x)
    y2, x2 = load_pairs(path)
    np.testing.assert_array_equal(y2, y)
    np.testing.assert_array_equal(x2, x)


def test_truth_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    R = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    path = tmp_path / "truth.json"
    save_truth(path, R, [3, 1, 4], 0.01, 7)
    R2, inliers, sigma, seed = load_truth(path)
    np.testing.assert_array_equal(R2, R)
    assert inliers.tolist() == [3, 1, 4]
    assert sigma == 0.01
    assert seed == 7


def test_truth_pair_indices(tmp_path):
    path = tmp_path / "truth.json"
    save_truth(path, np.eye(3), [[0, 1], [2, 3]], 0.0, 0)
    _, inliers, _, _ = load_truth(path)
    assert inliers.tolist() == [[0, 1], [2, 3]]


def test_matches_file(tmp_path):
    path = tmp_path / "m.csv"
    save_matches(path, [[0, 1], [5, 2]])
    lines = path.read_text().strip().splitlines()
    assert lines == ["i,j", "0,1", "5,2"]
