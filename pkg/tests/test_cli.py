import json

import numpy as np
import pytest

from sigstream.cli import main
from sigstream.streams import Stream, signature, write_csv
from sigstream.tensor_algebra import from_json_dict

TWO_SEGMENT = "t,x1,x2\n0,0,0\n1,1,0\n2,1,1\n"
UNIT_SQUARE = "t,x1,x2\n0,0,0\n1,1,0\n2,1,1\n3,0,1\n4,0,0\n"


@pytest.fixture
def two_segment_csv(tmp_path):
    path = tmp_path / "two_segment.csv"
    path.write_text(TWO_SEGMENT)
    return path


@pytest.fixture
def square_csv(tmp_path):
    path = tmp_path / "square.csv"
    path.write_text(UNIT_SQUARE)
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestBasics:
    def test_no_arguments_usage_error(self, capsys):
        code, _, err = run(capsys)
        assert code == 2
        assert "usage" in err

    def test_unknown_subcommand(self, capsys):
        code, _, err = run(capsys, "frobnicate")
        assert code == 2

    def test_missing_file_is_data_error(self, capsys, tmp_path):
        code, _, err = run(capsys, "sig", "--depth", 2, tmp_path / "nope.csv")
        assert code == 3
        assert "data error" in err

    def test_malformed_csv_is_data_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("t,x1\n0,0\n0,1\n")
        code, _, err = run(capsys, "sig", "--depth", 2, bad)
        assert code == 3


class TestSig:
    def test_two_segment_golden(self, capsys, two_segment_csv):
        code, out, _ = run(capsys, "sig", "--depth", 2, two_segment_csv)
        assert code == 0
        payload = json.loads(out)
        assert payload["coefficients"]["1,2"] == 1.0
        assert payload["coefficients"]["2,1"] == 0.0
        assert payload["coefficients"]["1,1"] == 0.5

    def test_round_trip_equals_in_process(self, capsys, two_segment_csv):
        code, out, _ = run(capsys, "sig", "--depth", 3, two_segment_csv)
        payload = json.loads(out)
        reparsed = from_json_dict(payload)
        direct = signature(
            Stream([0, 1, 2], [[0, 0], [1, 0], [1, 1]]), 3
        )
        for a, b in zip(reparsed.levels, direct.levels):
            assert np.array_equal(a, b)

    def test_deterministic_output(self, capsys, two_segment_csv):
        _, out1, _ = run(capsys, "sig", "--depth", 4, two_segment_csv)
        _, out2, _ = run(capsys, "sig", "--depth", 4, two_segment_csv)
        assert out1 == out2

    def test_output_file(self, capsys, two_segment_csv, tmp_path):
        target = tmp_path / "sig.json"
        code, out, _ = run(
            capsys, "sig", "--depth", 2, two_segment_csv, "-o", target
        )
        assert code == 0
        assert out == ""
        assert json.loads(target.read_text())["d"] == 2


class TestLogsig:
    def test_square_levy_area_golden(self, capsys, square_csv):
        code, out, _ = run(capsys, "logsig", "--depth", 2, square_csv)
        assert code == 0
        payload = json.loads(out)
        assert payload["coords"]["[1,2]"] == pytest.approx(1.0, abs=1e-12)
        assert payload["coords"]["1"] == pytest.approx(0.0, abs=1e-12)
        assert [name for name, _ in payload["pairs"]] == ["1", "2", "[1,2]"]


class TestDpdist:
    def test_identical_streams(self, capsys, square_csv):
        code, out, _ = run(
            capsys, "dpdist", "--p", 1.5, "--levels", 3, square_csv, square_csv
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["estimates"] == [0.0, 0.0, 0.0]

    def test_bad_p_is_data_error(self, capsys, square_csv):
        code, _, err = run(
            capsys, "dpdist", "--p", 0.5, "--levels", 2, square_csv, square_csv
        )
        assert code == 3


class TestLogode:
    def test_linear_system_against_oracle(self, capsys, tmp_path):
        rng = np.random.default_rng(0)
        mats = (0.3 * rng.standard_normal((2, 3, 3))).tolist()
        spec = {"m": 3, "d": 2, "matrices": mats, "y0": [1.0, 0.0, -1.0]}
        system = tmp_path / "system.json"
        system.write_text(json.dumps(spec))
        driver = tmp_path / "driver.csv"
        s = Stream(
            np.linspace(0, 1, 9),
            0.4 * rng.standard_normal((9, 2)).cumsum(axis=0),
        )
        write_csv(s, driver)
        code, out, _ = run(
            capsys,
            "logode",
            "--depth", 2, "--steps", 16, "--substeps", 32,
            "--system", system, driver,
        )
        assert code == 0
        payload = json.loads(out)
        from sigstream.logode import LinearSystem, linear_solve

        exact = linear_solve(
            LinearSystem(np.array(spec["matrices"])), s, np.array(spec["y0"])
        )
        got = np.array(payload["states"][-1])
        assert np.abs(got - exact).max() < 1e-5
        assert len(payload["states"]) == 17

    def test_inconsistent_spec_is_data_error(self, capsys, tmp_path):
        spec = {"m": 2, "d": 2, "matrices": np.zeros((2, 3, 3)).tolist(), "y0": [0, 0]}
        system = tmp_path / "system.json"
        system.write_text(json.dumps(spec))
        driver = tmp_path / "driver.csv"
        driver.write_text(TWO_SEGMENT)
        code, _, _ = run(
            capsys, "logode", "--depth", 1, "--steps", 2, "--system", system, driver
        )
        assert code == 3


class TestDevelop:
    def test_policy_round_trip(self, capsys, tmp_path, square_csv):
        h1 = [[0.5, [0.0, 0.3]], [[0.0, -0.3], -0.5]]
        # generators as [re, im] pairs
        def pack(mat):
            out = []
            for row in mat:
                packed = []
                for z in row:
                    z = complex(*z) if isinstance(z, list) else complex(z)
                    packed.append([z.real, z.imag])
                out.append(packed)
            return out

        gens = [
            pack([[0.5, [0.0, 0.3]], [[0.0, -0.3], -0.5]]),
            pack([[0.0, [1.0, 0.0]], [[1.0, 0.0], 0.0]]),
        ]
        policy = tmp_path / "policy.json"
        policy.write_text(json.dumps({"u": 2, "generators": gens}))
        code, out, _ = run(capsys, "develop", "--policy", policy, square_csv)
        assert code == 0
        payload = json.loads(out)
        assert payload["unitarity_defect"] < 1e-10
        psi = np.array(
            [[complex(re, im) for re, im in row] for row in payload["psi"]]
        )
        assert np.abs(psi.conj().T @ psi - np.eye(2)).max() < 1e-10


class TestExpsig:
    def test_disk_center_values(self, capsys):
        code, out, _ = run(
            capsys, "expsig", "--domain", "disk:1.0", "--h", 0.05, "--depth", 2
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["values"]["1,1"] == pytest.approx(0.25, abs=1e-3)
        assert payload["values"]["1,2"] == pytest.approx(0.0, abs=1e-12)
        assert payload["values"][""] == 1.0

    def test_mc_deterministic(self, capsys):
        args = (
            "expsig-mc", "--domain", "disk:1.0", "--depth", 2,
            "--paths", 200, "--dt", 0.005, "--seed", 11,
        )
        code1, out1, _ = run(capsys, *args)
        code2, out2, _ = run(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2
        payload = json.loads(out1)
        assert payload["mean"][""] == 1.0
        assert payload["stderr"]["1,1"] > 0


class TestLearnPipeline:
    def test_gen_fit_score(self, capsys, tmp_path):
        train_dir = tmp_path / "train"
        test_dir = tmp_path / "test"
        code, out, _ = run(
            capsys, "gen-synth", "--out", train_dir,
            "--n-per-class", 40, "--steps", 32, "--strength", 0.8, "--seed", 1,
        )
        assert code == 0
        code, out, _ = run(
            capsys, "gen-synth", "--out", test_dir,
            "--n-per-class", 40, "--steps", 32, "--strength", 0.8, "--seed", 2,
        )
        assert code == 0
        model = tmp_path / "model.json"
        code, out, _ = run(
            capsys, "fit", "--depth", 3, "--method", "lasso", "--lambda", 0.01,
            train_dir / "manifest.txt", train_dir / "labels.txt", "-o", model,
        )
        assert code == 0
        summary = json.loads(out)
        assert summary["n_streams"] == 80
        code, out, _ = run(
            capsys, "score", model, test_dir / "manifest.txt", test_dir / "labels.txt"
        )
        assert code == 0
        report = json.loads(out)
        assert report["auc"] > 0.9
        assert 0.0 <= report["ks"] <= 1.0
        assert report["accuracy"] > 0.8
