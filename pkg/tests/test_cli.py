"""CLI surface: subcommands, JSON dumps, exit codes."""

import json
import math

import pytest

from laycirc.cli import main

from conftest import fixture_path, read_fixture


@pytest.fixture
def fig_klay(tmp_path, capsys):
    out = tmp_path / "fig.klay"
    assert main(["compile", fixture_path("fig_main.nnf"), "-o", str(out)]) == 0
    capsys.readouterr()  # drop the compile stats line
    return str(out)


@pytest.fixture
def half_weights(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"p": {"1": 0.5, "2": 0.5, "3": 0.5, "4": 0.5}}))
    return str(path)


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out.strip()
    return code, json.loads(out) if out else None


class TestCompile:
    def test_compile_prints_stats_line(self, capsys, tmp_path):
        out = tmp_path / "fig.klay"
        code, payload = run_json(
            capsys, ["compile", fixture_path("fig_main.nnf"), "-o", str(out)]
        )
        assert code == 0
        assert payload["nodes_per_layer"] == [8, 7, 6, 3, 1]
        assert out.exists()

    def test_multi_input_merge(self, capsys, tmp_path):
        out = tmp_path / "two.klay"
        code, payload = run_json(
            capsys,
            ["compile", fixture_path("conj.sdd"), fixture_path("conj.sdd"), "-o", str(out)],
        )
        assert code == 0
        assert payload["roots"] == 2
        single = tmp_path / "one.klay"
        code2, payload2 = run_json(
            capsys, ["compile", fixture_path("conj.sdd"), "-o", str(single)]
        )
        assert payload["nodes_total"] == payload2["nodes_total"]

    def test_parse_failure_exits_2(self, tmp_path):
        bad = tmp_path / "bad.nnf"
        bad.write_text("nnf x y z\n")
        assert main(["compile", str(bad), "-o", str(tmp_path / "o.klay")]) == 2

    def test_missing_input_exits_3(self, tmp_path):
        assert main(["compile", str(tmp_path / "nope.nnf"), "-o", str(tmp_path / "o.klay")]) == 3


class TestEvalAndGrad:
    def test_eval_uniform_half(self, capsys, fig_klay, half_weights):
        code, payload = run_json(capsys, ["eval", fig_klay, half_weights])
        assert code == 0
        assert payload["roots"] == [pytest.approx(0.8125)]

    def test_eval_log_domain(self, capsys, fig_klay, half_weights):
        code, payload = run_json(capsys, ["eval", fig_klay, half_weights, "--log"])
        assert code == 0
        assert payload["roots"][0] == pytest.approx(math.log(0.8125))

    def test_eval_bool_semiring(self, capsys, fig_klay, tmp_path):
        w = tmp_path / "bool.json"
        w.write_text(json.dumps({"w": {
            "1": 1, "-1": 0, "2": 0, "-2": 1, "3": 1, "-3": 0, "4": 0, "-4": 1}}))
        code, payload = run_json(capsys, ["eval", fig_klay, str(w), "--semiring", "bool"])
        assert code == 0
        assert payload["roots"] == [1.0]

    def test_grad_dump_schema(self, capsys, fig_klay, half_weights):
        code, payload = run_json(capsys, ["grad", fig_klay, half_weights])
        assert code == 0
        assert set(payload) == {"roots", "grad"}
        assert len(payload["grad"]) == 1 and len(payload["grad"][0]) == 8

    def test_batch_flag_replicates_rows(self, capsys, fig_klay, half_weights):
        code, payload = run_json(capsys, ["eval", fig_klay, half_weights, "--batch", "3"])
        assert code == 0
        assert len(payload["roots"]) == 3

    def test_out_file(self, fig_klay, half_weights, tmp_path):
        dump = tmp_path / "dump.json"
        assert main(["eval", fig_klay, half_weights, "--out", str(dump)]) == 0
        assert json.loads(dump.read_text())["roots"] == [pytest.approx(0.8125)]

    def test_shape_mismatch_exits_2(self, fig_klay, tmp_path):
        w = tmp_path / "short.json"
        w.write_text(json.dumps({"p": {"1": 0.5}}))
        assert main(["eval", fig_klay, str(w)]) == 2

    def test_corrupt_klay_exits_2(self, fig_klay, half_weights, tmp_path):
        text = open(fig_klay).read().replace("klay 1", "klay 9")
        bad = tmp_path / "bad.klay"
        bad.write_text(text)
        assert main(["eval", str(bad), half_weights]) == 2


class TestCheck:
    @pytest.mark.parametrize(
        "fixture", ["fig_main.nnf", "taut.nnf", "chain3.nnf", "conj.sdd", "equiv.sdd"]
    )
    def test_fixture_passes(self, fixture):
        assert main(["check", fixture_path(fixture), "--trials", "5"]) == 0

    def test_corrupted_klay_rejected_with_2(self, fig_klay, tmp_path):
        lines = open(fig_klay).read().splitlines()
        r_idx = next(i for i, ln in enumerate(lines) if ln.startswith("R "))
        toks = lines[r_idx].split()
        toks[1], toks[-1] = toks[-1], toks[1]
        lines[r_idx] = " ".join(toks)
        bad = tmp_path / "perm.klay"
        bad.write_text("\n".join(lines) + "\n")
        assert main(["check", str(bad)]) == 2  # rejected at read time

    def test_valid_klay_reports_ok(self, capsys, fig_klay):
        code, payload = run_json(capsys, ["check", fig_klay])
        assert code == 0
        assert payload["format"] == "ok"

    def test_enumeration_skipped_beyond_20_vars(self, capsys, tmp_path):
        # conjunction over 22 vars: post-order is still cross-checked
        n = 22
        text = (
            f"nnf {n + 1} {n} {n}\n"
            + "\n".join(f"L {v}" for v in range(1, n + 1))
            + f"\nA {n} " + " ".join(str(i) for i in range(n)) + "\n"
        )
        big = tmp_path / "big.nnf"
        big.write_text(text)
        code, payload = run_json(capsys, ["check", str(big), "--trials", "3"])
        assert code == 0
        assert payload["enumeration_checked"] is False


class TestStats:
    def test_stats_on_klay(self, capsys, fig_klay):
        code, payload = run_json(capsys, ["stats", fig_klay])
        assert code == 0
        assert payload["nodes_total"] == 25
        assert payload["sparsity_per_layer"][0] == pytest.approx(9 / 56)

    def test_stats_on_nnf(self, capsys):
        code, payload = run_json(capsys, ["stats", fixture_path("fig_main.nnf")])
        assert code == 0
        assert payload["nodes_per_layer"] == [8, 7, 6, 3, 1]

    def test_missing_path_exits_3(self, tmp_path):
        assert main(["stats", str(tmp_path / "ghost.klay")]) == 3


class TestBench:
    def test_small_sweep_writes_jsonl(self, tmp_path, capsys):
        out = tmp_path / "report.jsonl"
        code = main([
            "bench", "--vars", "6,7", "--clauses", "15,18", "--instances", "1",
            "--repetitions", "1", "--out", str(out),
        ])
        assert code == 0
        rows = [json.loads(ln) for ln in out.read_text().splitlines()]
        assert len(rows) == 2
        assert all("t_klay_ms" in r or "error" in r for r in rows)

    def test_missing_compiler_still_exits_0(self, tmp_path):
        out = tmp_path / "report.jsonl"
        code = main([
            "bench", "--vars", "6", "--clauses", "15", "--repetitions", "1",
            "--compiler", "no-such-binary {in} {out}", "--out", str(out),
        ])
        assert code == 0
        rows = [json.loads(ln) for ln in out.read_text().splitlines()]
        assert rows and all("error" in r for r in rows)
