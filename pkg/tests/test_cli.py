import json

import numpy as np
import pytest

from interpoint.cli import UsageError, main, parse_distance


def write_points(path, rows, header=None):
    lines = [",".join(header)] if header else []
    lines += [",".join(repr(float(v)) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def pair(tmp_path):
    x = write_points(tmp_path / "x.csv", [[1.0, 2.0], [2.0, 1.0], [3.0, 3.0]], header=["a", "b"])
    y = write_points(tmp_path / "y.csv", [[1.5, 2.5], [2.5, 0.5], [4.0, 1.0]])
    return x, y


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dist_lists_every_pair(pair, capsys):
    code, out, _ = run(["dist", *pair, "--distance", "canberra"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "pair,distance"
    kinds = [line.split(",")[0] for line in lines[1:]]
    assert kinds.count("xx") == 3 and kinds.count("yy") == 3 and kinds.count("xy") == 9


def test_dist_canberra_accepts_negative_coordinates(tmp_path, capsys):
    x = write_points(tmp_path / "x.csv", [[-1.0, 2.0], [0.5, -3.0]])
    y = write_points(tmp_path / "y.csv", [[1.0, 1.0], [-2.0, 0.0]])
    code, out, _ = run(["dist", x, y, "--distance", "canberra"], capsys)
    assert code == 0
    values = [float(line.split(",")[1]) for line in out.strip().splitlines()[1:]]
    assert all(np.isfinite(values))


def test_dist_entropic_rejects_negative_coordinates(tmp_path, capsys):
    x = write_points(tmp_path / "x.csv", [[-1.0, 2.0], [0.5, 3.0]])
    y = write_points(tmp_path / "y.csv", [[1.0, 1.0], [2.0, 1.0]])
    code, _, err = run(["dist", x, y, "--distance", "entropic"], capsys)
    assert code == 2 and "DomainViolation" in err


def test_dimension_mismatch_exits_2(tmp_path, capsys):
    x = write_points(tmp_path / "x.csv", [[1.0, 2.0]])
    y = write_points(tmp_path / "y.csv", [[1.0], [2.0]])
    assert run(["dist", x, y], capsys)[0] == 2


def test_missing_file_exits_2(tmp_path, capsys):
    assert run(["dist", tmp_path / "nope.csv", tmp_path / "nope.csv"], capsys)[0] == 2


def test_unknown_distance_exits_1(pair, capsys):
    assert run(["dist", *pair, "--distance", "manhattan-ish"], capsys)[0] == 1


def test_missing_subcommand_exits_1(capsys):
    assert run([], capsys)[0] == 1


def test_parse_distance_shorthands():
    assert parse_distance("l1", 2).p == 1
    assert parse_distance("lp:3", 2).p == 3
    assert parse_distance("sphere", 3).family == "sphere"
    assert parse_distance('{"family": "canberra", "dim": 2}', 2).family == "canberra"
    with pytest.raises(UsageError):
        parse_distance("nonsense", 2)


def test_test_command_is_reproducible(pair, tmp_path, capsys):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["test", *pair, "-B", 99, "--seed", 3, "--out", out1], capsys)[0] == 0
    assert run(["test", *pair, "-B", 99, "--seed", 3, "--out", out2], capsys)[0] == 0
    assert out1.read_bytes() == out2.read_bytes()
    report = json.loads(out1.read_text())
    assert report["config"]["seed"] == 3 and report["config"]["B"] == 99
    assert 1 / 100 <= report["result"]["p_value"] <= 1


def test_config_rerun_is_byte_identical(pair, tmp_path, capsys):
    first, second = tmp_path / "first.json", tmp_path / "second.json"
    assert run(["test", *pair, "-B", 99, "--seed", 11, "--kind", "cvm", "--out", first], capsys)[0] == 0
    assert run(["test", "--config", first, "--out", second], capsys)[0] == 0
    assert first.read_bytes() == second.read_bytes()


def test_test_too_few_permutations_exits_1(pair, capsys):
    assert run(["test", *pair, "-B", 0], capsys)[0] == 1
    assert run(["test", *pair, "-B", 50], capsys)[0] == 1


def test_identical_samples_are_not_rejected(pair, capsys):
    code, out, _ = run(["test", pair[0], pair[0], "-B", 99], capsys)
    assert code == 0 and json.loads(out)["result"]["p_value"] > 0.5


def test_ecdf_table(pair, capsys):
    code, out, _ = run(["ecdf", *pair], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,f_xx,f_yy,f_xy,delta_k"
    table = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    assert np.all(np.diff(table[:, 0]) > 0)
    assert np.all((table[:, 1:4] >= 0) & (table[:, 1:4] <= 1))


def test_volume_table(capsys):
    code, out, _ = run(["volume", "--distance", "canberra", "--center", "2", "--t", "0.5,0.25"], capsys)
    assert code == 0
    rows = json.loads(out)["rows"]
    assert rows[0]["phi_exact"] == pytest.approx(16 / 3, rel=1e-12)
    assert rows[0]["lower"] <= rows[0]["phi_mc"] <= rows[0]["upper"]


def test_volume_rejects_bad_radius(capsys):
    assert run(["volume", "--center", "1", "--t", "-0.1"], capsys)[0] == 1


@pytest.mark.parametrize(
    "argv, alpha",
    [
        (["--distance", "entropic"], 1.0),
        (["--distance", "l2", "--dim", "3"], 3.0),
        (["--distance", "canberra"], 2.0),
    ],
)
def test_regularity_reports_alpha(argv, alpha, capsys):
    code, out, _ = run(["regularity", *argv, "--mc-n", 50000], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["ahlfors"]["alpha_hat"] == pytest.approx(alpha, abs=0.1)


def test_regularity_oscillatory_has_no_delta_limit(capsys):
    code, out, _ = run(["regularity", "--distance", "oscillatory:0.3", "--mc-n", 50000], capsys)
    assert code == 0
    report = json.loads(out)["regularity"]
    assert "delta_limit" not in report


def test_bounds_identical_densities(tmp_path, capsys):
    exp = {"f": {"family": "diag_gaussian", "loc": [0.0], "scale": [1.0]}, "t": [0.1]}
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(exp))
    code, out, _ = run(["bounds", path], capsys)
    assert code == 0
    for check in json.loads(out)["checks"]:
        assert check["holds"] and check["slack"] == 0.0


def test_bounds_gaussian_shift_with_rate(tmp_path, capsys):
    exp = {
        "f": {"family": "diag_gaussian", "loc": [0.0], "scale": [1.0]},
        "g": {"family": "diag_gaussian", "loc": [1.0], "scale": [1.0]},
        "t": [0.2, 0.05],
        "rate": {"ladder": [0.4, 0.2, 0.1, 0.05], "alpha": 1, "beta": 1},
    }
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(exp))
    out_file = tmp_path / "report.json"
    assert run(["bounds", path, "--out", out_file], capsys)[0] == 0
    report = json.loads(out_file.read_text())
    assert len(report["checks"]) == 4 and all(c["holds"] for c in report["checks"])
    assert report["rate"]["theoretical_exponent"] == 0.5 and report["rate"]["consistent"]
    rerun = tmp_path / "rerun.json"
    assert run(["bounds", "--config", out_file, "--out", rerun], capsys)[0] == 0
    assert rerun.read_bytes() == out_file.read_bytes()


def test_bounds_degenerate_ladder_exits_2(tmp_path, capsys):
    exp = {
        "f": {"family": "diag_gaussian", "loc": [0.0], "scale": [1.0]},
        "rate": {"ladder": [0.4, 0.2, 0.1, 0.0], "alpha": 1, "beta": 1},
    }
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(exp))
    assert run(["bounds", path], capsys)[0] == 2


def test_figures_command(tmp_path, capsys):
    code, out, _ = run(["figures", "fig1", "--resolution", 64, "--out", tmp_path], capsys)
    assert code == 0
    files = out.split()
    assert any(f.endswith("fig1.svg") for f in files)
    assert all((tmp_path / f.split("/")[-1]).exists() for f in files)


def test_figures_low_resolution_exits_1(tmp_path, capsys):
    assert run(["figures", "fig2", "--resolution", 32, "--out", tmp_path], capsys)[0] == 1
