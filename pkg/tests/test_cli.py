import json

import numpy as np
import pytest

from Cli.cli import EXIT_FAILURES, EXIT_INPUT, EXIT_OK, EXIT_USAGE, run
from Testbench.families import werner_decomposition, werner_state

FAST = ["--restarts", "4", "--max-iters", "500"]
FAST_SEARCH = FAST + ["--max-ancilla-dim", "2", "--search-restarts", "1"]


def _stdout(capsys):
    return json.loads(capsys.readouterr().out)


class TestCommands:
    def test_coherence(self, capsys, write_json, bell):
        assert run(["coherence", write_json(bell)]) == EXIT_OK
        out_ = _stdout(capsys)
        assert out_["measure"] == "l1"
        assert out_["C"] == pytest.approx(1)
        assert out_["C_A"] == pytest.approx(0, abs=1e-12)
        assert out_["C_B"] == pytest.approx(0, abs=1e-12)

    def test_corrcoh(self, capsys, write_json, bell):
        assert run(["corrcoh", write_json(bell), "--measure", "relent"]) == 0
        assert _stdout(capsys)["value"] == pytest.approx(1)

    def test_cmin(self, capsys, write_json, skewed):
        assert run(["cmin", write_json(skewed)] + FAST) == EXIT_OK
        assert _stdout(capsys)["value"] == pytest.approx(0.6)

    def test_entanglement_pure(self, capsys, write_json, skewed):
        assert run(["entanglement", write_json(skewed)] + FAST_SEARCH) == 0
        out_ = _stdout(capsys)
        assert out_["kind"] == "exact"
        assert out_["value"] == pytest.approx(0.6)

    def test_entanglement_with_decomposition(self, capsys, write_json):
        args_ = [
            "entanglement",
            write_json(werner_state(0.2)),
            "--decomposition",
            write_json(werner_decomposition(0.2), "ensemble.json"),
        ]
        assert run(args_ + FAST_SEARCH) == EXIT_OK
        out_ = _stdout(capsys)
        assert out_["kind"] == "exact"
        assert out_["value"] <= 1e-8

    def test_entanglement_mixed(self, capsys, write_json):
        args_ = ["entanglement", write_json(werner_state(0.8))]
        assert run(args_ + FAST_SEARCH) == EXIT_OK
        out_ = _stdout(capsys)
        assert out_["kind"] == "upper_bound"
        assert out_["diagnostics"]["candidates"]

    def test_entanglement_full_rank_non_square(self, capsys, tmp_path):
        path_ = str(tmp_path / "rho.json")
        args_ = ["sample", "--kind", "ginibre_mixed", "--dims", "2,3"]
        assert run(args_ + ["--seed", "1", "--out", path_]) == EXIT_OK
        assert run(["entanglement", path_] + FAST_SEARCH) == EXIT_OK
        out_ = _stdout(capsys)
        assert out_["kind"] == "upper_bound"
        assert out_["value"] >= 0

    def test_discord(self, capsys, write_json, bell):
        assert run(["discord", write_json(bell)] + FAST_SEARCH) == EXIT_OK
        assert _stdout(capsys)["value"] == pytest.approx(1, abs=1e-5)

    def test_classify(self, capsys, write_json, bell):
        assert run(["classify", write_json(bell)] + FAST) == EXIT_OK
        assert _stdout(capsys)["label"] == "neither"

    def test_sample(self, capsys):
        assert run(["sample", "--dims", "2,3", "--seed", "7"]) == EXIT_OK
        out_ = _stdout(capsys)
        assert out_["dims"] == [2, 3]
        assert len(out_["vector"]) == 6

    def test_sample_separable(self, capsys):
        args_ = ["sample", "--kind", "random_separable", "--seed", "1"]
        assert run(args_) == EXIT_OK
        assert set(_stdout(capsys)) == {"ensemble", "state"}


class TestValidate:
    def test_passes(self, capsys):
        args_ = ["validate", "--suites", "oracles,monotonicity", "--n", "3"]
        assert run(args_) == EXIT_OK
        out_ = _stdout(capsys)
        assert out_["passed"] is True
        assert [s_["suite"] for s_ in out_["suites"]] == [
            "oracles",
            "monotonicity",
        ]

    def test_csv(self, capsys):
        args_ = ["validate", "--suites", "oracles", "--n", "2"]
        args_ += ["--format", "csv"]
        assert run(args_) == EXIT_OK
        assert capsys.readouterr().out.startswith("suite,measure,seed")

    def test_byte_identical(self, tmp_path):
        paths_ = [tmp_path / "a.json", tmp_path / "b.json"]
        for path_ in paths_:
            args_ = ["validate", "--suites", "oracles", "--n", "3"]
            assert run(args_ + ["--seed", "42", "--out", str(path_)]) == 0
        assert paths_[0].read_bytes() == paths_[1].read_bytes()

    def test_suite_tolerance_flag(self, capsys):
        args_ = ["validate", "--suites", "oracles,monotonicity", "--n", "1"]
        args_ += ["--suite-tol", "oracle=1e-6", "--suite-tol", "locc=1e-7"]
        assert run(args_) == EXIT_OK
        out_ = _stdout(capsys)
        assert [s_["tolerances"] for s_ in out_["suites"]] == [
            {"oracle": 1e-6},
            {"locc": 1e-7},
        ]

    def test_failures_exit_one(self, capsys, monkeypatch):
        from Testbench.types import PropertySuiteReport

        def _failing(*args, **kwargs):
            return [
                PropertySuiteReport(
                    suite="oracles",
                    measure="l1",
                    seed=0,
                    trials=1,
                    failures=[
                        {"trial": 0, "seed": 1, "observed": {}, "required": ""}
                    ],
                )
            ]

        monkeypatch.setattr("Cli.cli.run_suites", _failing)
        assert run(["validate"]) == EXIT_FAILURES


class TestErrors:
    def test_unknown_suite(self, capsys):
        assert run(["validate", "--suites", "bogus"]) == EXIT_USAGE
        assert "bogus" in capsys.readouterr().err

    def test_unknown_tolerance(self, capsys):
        args_ = ["validate", "--suites", "oracles", "--suite-tol", "locc=1"]
        assert run(args_) == EXIT_USAGE
        assert "locc" in capsys.readouterr().err

    def test_malformed_tolerance(self):
        with pytest.raises(SystemExit) as e:
            run(["validate", "--suite-tol", "oracle=-1"])
        assert e.value.code == EXIT_USAGE

    def test_unknown_measure(self, write_json, bell):
        assert run(["coherence", write_json(bell), "--measure", "l2"]) == 2

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as e:
            run(["bogus"])
        assert e.value.code == EXIT_USAGE

    def test_csv_only_for_validate(self, write_json, bell):
        assert run(["coherence", write_json(bell), "--format", "csv"]) == 2

    def test_non_psd(self, capsys, tmp_path):
        data_ = np.diag([1.02, 0, 0, -0.02])
        doc_ = {
            "dims": [2, 2],
            "matrix": [[[float(x_), 0.0] for x_ in row_] for row_ in data_],
        }
        path_ = tmp_path / "bad.json"
        path_.write_text(json.dumps(doc_))
        assert run(["coherence", str(path_)]) == EXIT_INPUT
        assert "min eigenvalue" in capsys.readouterr().err

    def test_malformed_json(self, capsys, tmp_path):
        path_ = tmp_path / "bad.json"
        path_.write_text('{"dims": [2, 2],\n "vector": [')
        assert run(["coherence", str(path_)]) == EXIT_INPUT
        assert "bad.json:2:" in capsys.readouterr().err

    def test_classify_mixed_state(self, write_json):
        assert run(["classify", write_json(werner_state(0.1))] + FAST) == 0
