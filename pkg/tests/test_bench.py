"""Benchmark harness: formula generation, external invocation, report schema."""

import os
import stat
import sys

import pytest

from laycirc.bench import (
    BenchConfig,
    BenchReport,
    CompilerError,
    CompilerTimeout,
    bench_instance,
    compile_external,
    gen_3cnf,
    gen_random_nnf,
    run_bench,
)
from laycirc.circuit import boolean_eval, iter_assignments

from conftest import fixture_path


class TestGen3Cnf:
    def test_three_vars_single_clause_uses_all(self):
        cnf = gen_3cnf(3, 1, 7)
        assert {lit.variable for lit in cnf.clauses[0]} == {1, 2, 3}

    def test_deterministic_under_seed(self):
        a = gen_3cnf(12, 30, 99)
        b = gen_3cnf(12, 30, 99)
        assert a.clauses == b.clauses
        c = gen_3cnf(12, 30, 100)
        assert a.clauses != c.clauses

    def test_bounds_and_distinct_vars(self):
        cnf = gen_3cnf(50, 100, 1)
        assert len(cnf.clauses) == 100
        for clause in cnf.clauses:
            assert len(clause) == 3
            assert len({lit.variable for lit in clause}) == 3
            assert all(1 <= lit.variable <= 50 for lit in clause)

    def test_too_few_vars_rejected(self):
        with pytest.raises(ValueError):
            gen_3cnf(2, 1, 0)


class TestCompileExternal:
    def test_missing_binary_is_structured_error(self):
        cnf = gen_3cnf(4, 6, 0)
        with pytest.raises(CompilerError) as err:
            compile_external(cnf, "definitely-not-a-compiler {in} {out}", timeout=5)
        assert "definitely-not-a-compiler" in str(err.value)

    def test_template_placeholders_required(self):
        with pytest.raises(CompilerError):
            compile_external(gen_3cnf(4, 6, 0), "compiler-without-slots")

    def test_timeout_is_structured(self, tmp_path):
        cnf = gen_3cnf(4, 6, 0)
        with pytest.raises(CompilerTimeout):
            compile_external(cnf, f"{sys.executable} -c 'import time; time.sleep(5)' {{in}} {{out}}", timeout=0.2)

    def test_fake_compiler_round_trip(self, tmp_path):
        # stand-in compiler: ignores the CNF and copies a known-good NNF
        script = tmp_path / "fakec2d.sh"
        script.write_text(
            "#!/bin/sh\ncp %s \"$2\"\n" % fixture_path("fig_main.nnf")
        )
        script.chmod(script.stat().st_mode | stat.S_IEXEC)
        circuit = compile_external(gen_3cnf(4, 6, 0), f"{script} {{in}} {{out}}")
        circuit.validate()
        assert circuit.num_vars == 4
        count = sum(boolean_eval(circuit, a)[0] for a in iter_assignments(4))
        assert count == 13

    def test_nonzero_exit_is_structured(self):
        cnf = gen_3cnf(4, 6, 0)
        with pytest.raises(CompilerError):
            compile_external(cnf, "false {in} {out}", timeout=5)


class TestRunBench:
    def test_empty_sweep_yields_empty_report(self):
        report = run_bench([])
        assert report.rows == []
        assert report.to_jsonl() == ""

    def test_row_schema_with_fallback_compiler(self):
        report = run_bench([BenchConfig(vars=6, clauses=15, seed=4, repetitions=2)])
        assert len(report.rows) == 1
        row = report.rows[0]
        assert "error" not in row, row
        for key in (
            "vars", "clauses", "seed", "nodes_src", "nodes_klay", "layers",
            "sparsity", "t_naive_ms", "t_klay_ms", "t_layerize_ms", "t_tensorize_ms",
        ):
            assert key in row

    def test_missing_compiler_yields_error_rows_not_abort(self):
        report = run_bench(
            [
                BenchConfig(vars=6, clauses=15, seed=4, repetitions=1,
                            compiler_cmd="no-such-compiler {in} {out}"),
                BenchConfig(vars=6, clauses=16, seed=5, repetitions=1,
                            compiler_cmd="no-such-compiler {in} {out}"),
            ]
        )
        assert len(report.rows) == 2
        assert all("error" in row for row in report.rows)

    def test_cumulative_is_sorted_prefix_sum(self):
        report = BenchReport(rows=[
            {"t_klay_ms": 3.0}, {"t_klay_ms": 1.0}, {"t_klay_ms": 2.0},
            {"error": "x"},
        ])
        assert report.cumulative("t_klay_ms") == [1.0, 3.0, 6.0]

    def test_config_validation(self):
        with pytest.raises(ValueError):
            BenchConfig(vars=2, clauses=1)
        with pytest.raises(ValueError):
            BenchConfig(vars=5, clauses=0)


class TestSyntheticCircuits:
    def test_random_nnf_is_valid_and_sized(self):
        circuit = gen_random_nnf(num_vars=6, width=30, depth=6, fanin=3, seed=1)
        circuit.validate()
        assert len(circuit.nodes) > 150

    def test_bench_instance_gates_on_oracle(self):
        circuit = gen_random_nnf(num_vars=5, width=12, depth=4, fanin=2, seed=2)
        row = bench_instance(circuit, repetitions=1, seed=0)
        assert row["t_klay_ms"] > 0 and row["t_naive_ms"] > 0
