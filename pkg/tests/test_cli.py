import csv
import json
import numpy as np
import pytest

from ossmax import Instance, make_semimetric_instance, read_instance, write_instance
from ossmax.cli import CSV_HEADER, main
from ossmax.polytopes import BoxPolytope


def run(argv):
    return main(argv)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture()
def linear_box_instance(tmp_path):
    # coincident points make M = 0, so the objective is b'x: linear on the box
    obj = make_semimetric_instance([[0.0], [0.0], [0.0]], [1.0, 1.0, 1.0])
    path = tmp_path / "linear.json"
    write_instance(path, Instance(obj, BoxPolytope(3, 1.0), label="linear-box"))
    return path


class TestGenerate:
    def test_coverage_regeneration_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["generate", "--kind", "coverage", "--n", "3", "--elements", "4", "--seed", "7"]
        assert run(args + ["--out", str(a)]) == 0
        assert run(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_collinear_quadratic_distances(self, tmp_path):
        # points on a line at 0, 1, 3 give the hand-checkable distance matrix
        obj = make_semimetric_instance([0.0, 1.0, 3.0], [0.0, 0.0, 0.0])
        path = tmp_path / "quad.json"
        write_instance(path, Instance(obj, BoxPolytope(3, 1.0)))
        back = read_instance(path)
        assert np.allclose(back.objective.M, [[0, 1, 3], [1, 0, 2], [3, 2, 0]])

    def test_generated_quadratic_reads_back(self, tmp_path):
        path = tmp_path / "q.json"
        assert run(["generate", "--kind", "quadratic-semimetric", "--n", "4", "--seed", "1",
                    "--polytope", "cardinality", "--k", "2", "--out", str(path)]) == 0
        inst = read_instance(path)
        assert inst.dimension == 4
        assert inst.polytope.budget == 2

    def test_malformed_kind_exits_one(self, tmp_path, capsys):
        code = run(["generate", "--kind", "nonsense", "--n", "3", "--out", str(tmp_path / "x.json")])
        assert code == 1
        assert "invalid choice" in capsys.readouterr().err.lower()

    def test_monotone_linear_requires_pairs(self, tmp_path):
        code = run(["generate", "--kind", "coverage", "--n", "2", "--polytope",
                    "monotone-linear", "--out", str(tmp_path / "x.json")])
        assert code == 1


class TestSolve:
    def test_jspg_ratio_near_one_on_linear_box(self, tmp_path, linear_box_instance, capsys):
        out = tmp_path / "runs.csv"
        code = run(["solve", str(linear_box_instance), "--solver", "jspg", "--out", str(out)])
        assert code == 0
        rows = read_rows(out)
        assert len(rows) == 1
        assert list(rows[0].keys()) == CSV_HEADER
        assert float(rows[0]["ratio"]) >= 0.99
        assert rows[0]["error"] == ""

    def test_spg_matches_jspg_within_two_percent(self, tmp_path, linear_box_instance):
        out = tmp_path / "runs.csv"
        assert run(["solve", str(linear_box_instance), "--solver", "jspg", "--out", str(out)]) == 0
        assert run(["solve", str(linear_box_instance), "--solver", "spg", "--theta", "0",
                    "--batch", "256", "--out", str(out)]) == 0
        rows = read_rows(out)
        jspg, spg = float(rows[0]["value"]), float(rows[1]["value"])
        assert abs(jspg - spg) <= 0.02 * max(jspg, spg)

    def test_serial_solver_runs(self, tmp_path, linear_box_instance):
        out = tmp_path / "runs.csv"
        assert run(["solve", str(linear_box_instance), "--solver", "serial", "--out", str(out)]) == 0
        rows = read_rows(out)
        assert float(rows[0]["value"]) >= 2.9

    def test_missing_instance_exits_nonzero_without_csv(self, tmp_path, capsys):
        out = tmp_path / "runs.csv"
        code = run(["solve", str(tmp_path / "absent.json"), "--out", str(out)])
        assert code == 1
        assert not out.exists()

    def test_grid_can_be_disabled(self, tmp_path, linear_box_instance):
        out = tmp_path / "runs.csv"
        assert run(["solve", str(linear_box_instance), "--grid-resolution", "0",
                    "--out", str(out)]) == 0
        rows = read_rows(out)
        assert rows[0]["grid_opt"] == ""
        assert rows[0]["ratio"] == ""

    def test_config_echo_replays_to_same_value(self, tmp_path, linear_box_instance):
        out = tmp_path / "runs.csv"
        args = ["solve", str(linear_box_instance), "--solver", "spg", "--theta", "0.2",
                "--seed", "11", "--out", str(out)]
        assert run(args) == 0
        assert run(args) == 0
        rows = read_rows(out)
        assert rows[0]["config"] == rows[1]["config"]
        assert rows[0]["value"] == rows[1]["value"]

    def test_out_dir_env_var(self, tmp_path, linear_box_instance, monkeypatch):
        monkeypatch.setenv("OSSMAX_OUT_DIR", str(tmp_path / "outputs"))
        assert run(["solve", str(linear_box_instance), "--out", "runs.csv"]) == 0
        assert (tmp_path / "outputs" / "runs.csv").exists()


class TestVerify:
    def test_coverage_instance_passes(self, tmp_path):
        path = tmp_path / "cov.json"
        assert run(["generate", "--kind", "coverage", "--n", "3", "--seed", "5",
                    "--out", str(path)]) == 0
        assert run(["verify", str(path), "--trials", "200"]) == 0

    def test_semimetric_instance_passes(self, tmp_path):
        path = tmp_path / "quad.json"
        assert run(["generate", "--kind", "quadratic-semimetric", "--n", "4", "--seed", "6",
                    "--out", str(path)]) == 0
        assert run(["verify", str(path), "--trials", "200"]) == 0

    def test_violating_sigma_fails_with_witness(self, tmp_path, capsys):
        obj = make_semimetric_instance([0.0, 1.0, 3.0], [0.0, 0.0, 0.0])
        path = tmp_path / "quad.json"
        write_instance(path, Instance(obj, BoxPolytope(3, 1.0)))
        # the 0-2 distance is tight at sigma = 1, so sigma = 0.3 must fail
        code = run(["verify", str(path), "--sigma", "0.3", "--trials", "50"])
        assert code == 3
        out = capsys.readouterr().out
        assert "witness triple" in out

    def test_eta_check_runs(self, tmp_path):
        path = tmp_path / "quad.json"
        assert run(["generate", "--kind", "quadratic-semimetric", "--n", "3", "--seed", "8",
                    "--out", str(path)]) == 0
        assert run(["verify", str(path), "--eta", "1.0", "--trials", "100"]) == 0


class TestBench:
    def test_empty_suite_writes_header_only(self, tmp_path):
        suite = tmp_path / "suite.json"
        suite.write_text(json.dumps({"rows": []}))
        out_dir = tmp_path / "bench"
        assert run(["bench", str(suite), "--out-dir", str(out_dir)]) == 0
        lines = (out_dir / "runs.csv").read_text().strip().splitlines()
        assert lines == [",".join(CSV_HEADER)]

    def test_suite_with_failure_continues(self, tmp_path, linear_box_instance):
        suite = tmp_path / "suite.json"
        suite.write_text(
            json.dumps(
                {
                    "rows": [
                        {"instance": str(linear_box_instance), "solver": "jspg",
                         "grid_resolution": 10},
                        {"instance": "missing.json", "solver": "jspg"},
                        {"instance": str(linear_box_instance), "solver": "serial"},
                    ]
                }
            )
        )
        out_dir = tmp_path / "bench"
        assert run(["bench", str(suite), "--out-dir", str(out_dir)]) == 0
        rows = read_rows(out_dir / "runs.csv")
        assert len(rows) == 3
        assert rows[0]["error"] == "" and float(rows[0]["ratio"]) >= 0.99
        assert rows[1]["error"] != ""
        assert rows[2]["error"] == ""
        assert (out_dir / "summary.txt").exists()


class TestUsageErrors:
    def test_unknown_solver_flag_value(self, tmp_path, linear_box_instance, capsys):
        code = run(["solve", str(linear_box_instance), "--solver", "hillclimb"])
        assert code == 1

    def test_no_command(self, capsys):
        assert run([]) == 1

    def test_solver_runtime_failure_exits_two(self, tmp_path, linear_box_instance, capsys):
        # an absurdly small outer-round cap trips the safety limit (sigma is
        # pinned to 0 so the threshold sweep actually needs several rounds)
        code = run(["solve", str(linear_box_instance), "--sigma", "0", "--max-outer-rounds", "1"])
        assert code == 2
        assert "solver failed" in capsys.readouterr().err
