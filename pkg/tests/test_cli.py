"""Scenario runner, suites, exit codes, determinism, coverage."""

import json

import numpy as np
import pytest

from formcalc.cli import main
from formcalc.reporting import CLAIM_TAGS
from formcalc.scenarios import run_scenario
from formcalc.suites import run_suite


def write_scenarios(path, scenarios):
    path.write_text(json.dumps({"scenarios": scenarios}))
    return str(path)


DENSE2 = {"backend": "dense", "dim": 2, "p": 2.0}


def op_json(matrix):
    m = [[[float(np.real(z)), float(np.imag(z))] for z in row] for row in matrix]
    eye = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
    return {"backend": "dense", "direction": "to-dual",
            "domain_basis": eye, "action": m}


class TestScenarioDispatch:
    def test_pair_scenario(self):
        rep = run_scenario({
            "id": "pair-1", "op": "pair", "space": DENSE2,
            "v": {"coords": [[1, 0], [2, 0]]},
            "x": {"coords": [[1, 0], [1, 1]]},
            "expected": [3, -2],
        })
        assert rep.verdict == "pass"

    def test_associated_operator_scenario(self):
        rep = run_scenario({
            "id": "rep-1", "op": "associated-operator", "space": DENSE2,
            "gram": [[[2, 0], [0, 1]], [[0, -1], [2, 0]]],
        })
        assert rep.verdict == "pass"
        assert rep.claims == ("Thm1",)

    def test_friedrichs_scenario(self):
        rep = run_scenario({
            "id": "fr-1", "op": "friedrichs",
            "space": {"backend": "sequence", "truncation": 64, "p": 2.0},
            "generator": {"terms": [{"coef": [1, 0], "alpha": 2.0,
                                     "ratio": 1.0, "start": 1}]},
            "samples": [{"backend": "sequence",
                         "coords": [[0.5 ** n, 0.0] for n in range(1, 65)],
                         "tail": {"kind": "rule",
                                  "terms": [{"coef": [1, 0], "alpha": 0.0,
                                             "ratio": 0.5, "start": 1}]}}],
        })
        assert rep.verdict == "pass"

    def test_form_on_x_divergent(self):
        rep = run_scenario({
            "id": "form-inf", "op": "form-on-x",
            "A": {"backend": "sequence", "direction": "to-dual",
                  "diagonal": {"terms": [{"coef": [1, 0], "alpha": 2.0,
                                          "ratio": 1.0, "start": 1}]},
                  "domain": "finitely-supported"},
            "y": {"backend": "sequence",
                  "coords": [[1.0 / n, 0.0] for n in range(1, 49)],
                  "tail": {"kind": "rule",
                           "terms": [{"coef": [1, 0], "alpha": -1.0,
                                      "ratio": 1.0, "start": 1}]}},
            "expected": "inf",
        })
        assert rep.verdict == "pass"
        assert rep.certificates[0]["kind"] == "partial-sum-growth"

    def test_unknown_operation(self):
        with pytest.raises(KeyError):
            run_scenario({"id": "x", "op": "no-such-op"})


class TestCliRun:
    def test_empty_scenario_list(self, tmp_path, capsys):
        f = write_scenarios(tmp_path / "empty.json", [])
        assert main(["run", f]) == 0

    def test_theorem4_scenario_exit_zero(self, tmp_path):
        f = write_scenarios(tmp_path / "t4.json", [{
            "id": "thm4", "op": "form-sum", "space": DENSE2,
            "A": op_json([[1, 0], [0, 2]]),
            "B": op_json([[3, 0], [0, 4]]),
            "expected_matrix": [[[4, 0], [0, 0]], [[0, 0], [6, 0]]],
        }])
        out = tmp_path / "reports"
        assert main(["run", f, "--out", str(out)]) == 0
        report = json.loads((out / "thm4.json").read_text())
        assert report["verdict"] == "pass"
        assert report["residuals"]["matrix"] <= 1e-10

    def test_broken_commutation_exits_two(self, tmp_path):
        f = write_scenarios(tmp_path / "bad.json", [{
            "id": "broken-eq7", "op": "lift-commutant", "space": DENSE2,
            "A": op_json([[1, 0], [0, 2]]),
            "E": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]],
        }])
        assert main(["run", f]) == 2

    def test_parse_error_exits_four(self, tmp_path):
        f = tmp_path / "bad.json"
        f.write_text("{not json")
        assert main(["run", str(f)]) == 4

    def test_unknown_op_exits_four(self, tmp_path):
        f = write_scenarios(tmp_path / "unknown.json",
                            [{"id": "x", "op": "definitely-not-registered"}])
        assert main(["run", f]) == 4

    def test_jobs_parallel_deterministic(self, tmp_path):
        scenarios = [{
            "id": f"s{k}", "op": "associated-operator", "space": DENSE2,
            "gram": [[[2 + k, 0], [0, 0]], [[0, 0], [3 + k, 0]]],
        } for k in range(6)]
        f = write_scenarios(tmp_path / "par.json", scenarios)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert main(["run", f, "--jobs", "4", "--out", str(out1)]) == 0
        assert main(["run", f, "--out", str(out2)]) == 0
        s1 = (out1 / "summary.json").read_text()
        s2 = (out2 / "summary.json").read_text()
        assert s1 == s2

    def test_weak_solve_csv(self, tmp_path):
        f = write_scenarios(tmp_path / "solve.json", [{
            "id": "solve", "op": "weak-solve",
            "problem": {"length": 1.0, "a": "1", "b": "0", "gamma": 1.0},
            "m": 16, "g": "pi^2 * sin(pi*x)",
        }])
        out = tmp_path / "r"
        assert main(["run", f, "--out", str(out)]) == 0
        csv_text = (out / "solve-solution.csv").read_text().splitlines()
        assert csv_text[0] == "x,f_h"
        assert len(csv_text) == 18


class TestSuites:
    def test_determinism_byte_identical(self):
        s1 = json.dumps(run_suite("representation", seed=7).summary_dict(),
                        sort_keys=True)
        s2 = json.dumps(run_suite("representation", seed=7).summary_dict(),
                        sort_keys=True)
        assert s1 == s2

    def test_all_coverage_complete(self):
        res = run_suite("all", seed=1)
        cov = res.coverage()
        for tag in CLAIM_TAGS:
            assert cov[tag] >= 1, f"claim {tag} uncovered"

    def test_every_suite_has_control_that_fails(self):
        for name in ("representation", "friedrichs", "ordering", "formsum",
                     "covariance", "elliptic"):
            res = run_suite(name, seed=3)
            controls = [r for r in res.reports if r.control]
            assert controls, name
            assert all(r.verdict == "fail" for r in controls), name
            assert res.ok

    def test_suite_cli_exit_zero(self, tmp_path):
        out = tmp_path / "suite-out"
        assert main(["suite", "representation", "--seed", "5",
                     "--out", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["ok"]

    def test_suite_unknown_name(self):
        assert main(["suite", "nonsense"]) == 4

    def test_elliptic_artifact_csv(self, tmp_path):
        out = tmp_path / "ell"
        assert main(["suite", "elliptic", "--out", str(out)]) == 0
        rows = (out / "convergence.csv").read_text().splitlines()
        assert rows[0] == "m,h,l2_error,ratio"
        assert len(rows) == 5

    def test_tol_scale_env(self, monkeypatch, tmp_path):
        monkeypatch.setenv("FORMCALC_TOL_SCALE", "1000.0")
        out = tmp_path / "scaled"
        assert main(["suite", "representation", "--out", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        tol = summary["reports"][0]["tolerances"]["ab_identity"]
        assert tol == pytest.approx(1e-7)
