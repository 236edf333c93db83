import json
import subprocess
import sys

import pytest

from polycoeff import cli
from polycoeff.errors import SelfCheckFailed
from polycoeff.verify import VerdictReport, strip_timing

EXAMPLE = "y1*z1 + y1^2*z1 + y1*z1*z2 + z1"


def call(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def call_json(capsys, *argv):
    code, out, err = call(capsys, *argv)
    return code, json.loads(out) if out.strip() else None, err


class TestVerify:
    def test_imm_rank(self, capsys):
        code, rep, _ = call_json(capsys, "verify", "imm-rank", "--n", "2", "--d", "3")
        assert code == 0
        assert (rep["measured"], rep["bound"], rep["holds"]) == (4, 4, True)
        assert rep["seed"] == 0 and rep["field"] == 2 and rep["format"] == 1

    def test_propositions_csv(self, capsys):
        code, out, _ = call(capsys, "verify", "propositions", "--field", "3", "--trials", "60",
                            "--seed", "7", "--format", "csv")
        assert code == 0
        header, row = out.strip().splitlines()
        assert header == "claim,params,measured,bound,holds,seed,runtime_ms"
        assert row.startswith("propositions,") and ",0,0,true,7," in row

    def test_propositions_large_field_rejected(self, capsys):
        code, _, err = call(capsys, "verify", "propositions", "--field", "5")
        assert code == 2 and "--field 2 or 3" in err

    def test_q_rank_resource_exit(self, capsys):
        code, _, err = call(capsys, "verify", "q-rank", "--n", "12", "--rank-limit", "10")
        assert code == 3 and "rank limit" in err

    def test_missing_option(self, capsys):
        code, _, err = call(capsys, "verify", "imm-rank", "--n", "2")
        assert code == 2 and "--d" in err

    def test_circuit_inputs(self, capsys, tmp_path):
        circ = tmp_path / "c.json"
        circ.write_text(json.dumps({"kind": "sps", "gates": [[{"c": 0, "lin": {"y1": 1, "z1": 1}},
                                                              {"c": 0, "lin": {"y2": 1, "z2": 1}}]]}))
        code, rep, _ = call_json(capsys, "verify", "depth3", "--circuit", str(circ))
        assert code == 0 and (rep["measured"], rep["bound"]) == (4, 4)

    def test_product_sparse_with_partition(self, capsys):
        formula = {"kind": "formula", "root": {"op": "*", "l": {"op": "+", "l": {"var": "x1"}, "r": {"var": "x2"}},
                                               "r": {"op": "+", "l": {"var": "x3"}, "r": {"var": "x4"}}}}
        code, rep, _ = call_json(capsys, "verify", "product-sparse", "--circuit", json.dumps(formula),
                                 "--partition", '{"Y": ["x1", "x2"], "Z": ["x3", "x4"]}',
                                 "--s", "0", "--k", "1")
        assert code == 0 and rep["details"]["cases"]["disjoint"] == 1

    def test_failed_claim_exits_one(self, capsys, monkeypatch):
        fake = VerdictReport("imm-rank", {"n": 2, "d": 2}, 1, 2, False)
        monkeypatch.setattr(cli.vf, "check_imm_rank", lambda *a, **k: fake)
        code, rep, _ = call_json(capsys, "verify", "imm-rank", "--n", "2", "--d", "2")
        assert code == 1 and rep["holds"] is False

    def test_self_check_exits_one(self, capsys, monkeypatch):
        def boom(*a, **k):
            raise SelfCheckFailed("witness mismatch")
        monkeypatch.setattr(cli.vf, "check_q_rank", boom)
        code, _, err = call(capsys, "verify", "q-rank", "--n", "8")
        assert code == 1 and "witness mismatch" in err

    @pytest.mark.parametrize("argv", [
        ["verify", "imm-rank", "--n", "2", "--d", "3"],
        ["verify", "imm-grid", "--n", "2", "--d", "2"],
        ["verify", "q-rank", "--n", "8"],
        ["verify", "propositions", "--trials", "10", "--seed", "4"],
        ["verify", "depth3", "--trials", "10", "--seed", "4"],
        ["verify", "product-sparse", "--trials", "10", "--seed", "4"],
        ["verify", "preprocess", "--trials", "10", "--seed", "4"],
        ["verify", "abp", "--n", "3", "--trials", "1", "--seed", "4"],
        ["verify", "total-dimension", "--trials", "10", "--seed", "4"],
        ["verify", "fischer", "--trials", "5", "--seed", "4"],
        ["verify", "power-rewrite", "--trials", "10", "--seed", "4"],
    ])
    def test_byte_identical_reruns(self, capsys, argv):
        _, a, _ = call_json(capsys, *argv)
        _, b, _ = call_json(capsys, *argv)
        assert json.dumps(strip_timing(a), sort_keys=True) == json.dumps(strip_timing(b), sort_keys=True)
        assert set(a["timing"]) == {"runtime_ms"}


class TestTools:
    def test_maxrank_example(self, capsys):
        code, res, _ = call_json(capsys, "maxrank", "--poly", EXAMPLE, "--mode", "exhaustive",
                                 "--field", "2")
        assert code == 0 and res["value"] == 2 and res["exact"] is True
        assert res["provenance"]["field"] == 2

    def test_maxrank_sampled(self, capsys):
        code, res, _ = call_json(capsys, "maxrank", "--poly", EXAMPLE, "--mode", "sampled",
                                 "--field", "101", "--trials", "4", "--seed", "1")
        assert code == 0 and res["exact"] is False and res["value"] <= 2

    def test_maxrank_budget_exit(self, capsys):
        code, _, err = call(capsys, "maxrank", "--poly", "y1^2*z1 + y2^2*z2", "--mode", "exhaustive",
                            "--field", "101", "--maxrank-budget", "100")
        assert code == 3 and "budget" in err

    def test_matrix_csv(self, capsys):
        code, out, _ = call(capsys, "matrix", "--poly", EXAMPLE, "--field", "3", "--format", "csv")
        assert code == 0
        assert out.splitlines()[2] == "y1,z1,y1 + 1"

    def test_matrix_partition(self, capsys):
        code, res, _ = call_json(capsys, "matrix", "--poly", "x1*x2", "--partition",
                                 '{"Y": ["x1"], "Z": ["x2"]}')
        assert code == 0 and res["entries"] == [{"y": "y1", "z": "z1", "entry": "1"}]

    def test_unknown_variable_in_partition(self, capsys):
        code, _, err = call(capsys, "matrix", "--poly", "x1*x9", "--partition",
                            '{"Y": ["x1"], "Z": ["x2"]}')
        assert code == 2 and "x9" in err

    def test_parse_error(self, capsys):
        code, _, err = call(capsys, "maxrank", "--poly", "y1 + + z1")
        assert code == 2 and "offset" in err

    def test_decompose(self, capsys):
        gate = '[{"c": 0, "lin": {"x1": 1}}, {"c": 0, "lin": {"x2": 1}}]'
        code, terms, _ = call_json(capsys, "decompose", gate, "--method", "fischer", "--field", "5")
        assert code == 0 and len(terms) == 3 and all(t["d"] == 2 for t in terms)

    def test_decompose_characteristic(self, capsys):
        code, _, err = call(capsys, "decompose", '["x1", "x2", "x3"]', "--field", "2")
        assert code == 2 and "p > 3" in err

    def test_gen_and_analyze(self, capsys, tmp_path):
        out = tmp_path / "c.json"
        code, _, _ = call(capsys, "gen", "random-sps", "--k", "2", "--d", "3", "--seed", "5",
                          "--out", str(out))
        assert code == 0
        code, rep, _ = call_json(capsys, "analyze", str(out), "--field", "3")
        assert code == 0 and rep["kind"] == "sps" and rep["k"] == 2 and rep["gate_degrees"] == [3, 3]

    def test_gen_imm(self, capsys):
        code, body, _ = call_json(capsys, "gen", "imm", "--n", "2", "--d", "2")
        assert code == 0 and body["poly"] == "x1_1_1*x2_1_1 + x1_1_2*x2_2_1"

    def test_gen_deterministic(self, capsys):
        a = call(capsys, "gen", "ordered-abp", "--n", "3", "--seed", "2")[1]
        b = call(capsys, "gen", "ordered-abp", "--n", "3", "--seed", "2")[1]
        assert a == b

    def test_analyze_k_needs_partition(self, capsys, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps({"kind": "formula", "root": {"op": "+", "l": {"var": "x1"}, "r": {"var": "x2"}}}))
        code, _, err = call(capsys, "analyze", str(path), "--k", "1")
        assert code == 2 and "--partition" in err

    def test_experiment(self, capsys, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps({"kind": "formula", "root": {"op": "*", "l": {"var": "x1"}, "r": {"var": "x2"}}}))
        code, rep, _ = call_json(capsys, "experiment", "--circuit", str(path), "--k", "10")
        assert code == 0 and rep["measured"]["root_weak"] == 0 and rep["holds"] is None

    def test_bad_subcommand(self, capsys):
        assert call(capsys, "frobnicate")[0] == 2

    def test_bad_field(self, capsys):
        code, _, err = call(capsys, "verify", "imm-rank", "--n", "2", "--d", "2", "--field", "4")
        assert code == 2 and "prime" in err

    def test_missing_file(self, capsys):
        assert call(capsys, "analyze", "/nonexistent/c.json")[0] == 2

    def test_json_only(self, capsys):
        assert call(capsys, "gen", "q", "--n", "8", "--format", "csv")[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "polycoeff", "verify", "q-rank", "--n", "8"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["measured"] == 6
