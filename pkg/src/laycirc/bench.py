"""Synthetic benchmark pipeline: random 3-CNF instances, compiler invocation,
correctness-gated timing of the tensorized engine against the naive evaluator.

Randomness uses numpy's Philox generator (64-bit, counter-based) so the same
seed reproduces the same formulas on any platform. Timing covers repeated
forward+backward passes only; parsing, layerization, and tensorization are
reported separately, matching the compile-once / evaluate-often usage.
"""

from __future__ import annotations

import json
import os
import statistics
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Circuit, Literal, fold_constants
from .compile import compile_cnf
from .engine import backward, forward_real, weights_from_map
from .layerize import layerize, stats
from .oracle import postorder_backward, postorder_eval
from .parsers import CnfFormula, parse_circuit
from .tensorize import tensorize


class CompilerError(RuntimeError):
    def __init__(self, cmd: str, detail: str):
        super().__init__(f"external compiler failed: {cmd!r}: {detail}")
        self.cmd = cmd
        self.detail = detail


class CompilerTimeout(CompilerError):
    def __init__(self, cmd: str, elapsed: float):
        super().__init__(cmd, f"timed out after {elapsed:.1f}s")
        self.elapsed = elapsed


@dataclass
class BenchConfig:
    vars: int
    clauses: int
    seed: int = 0
    compiler_cmd: str | None = None  # template with {in}/{out}; None = bundled fallback
    repetitions: int = 10
    timeout: float = 120.0

    def __post_init__(self) -> None:
        if self.vars < 3:
            raise ValueError("3-CNF needs at least 3 variables")
        if self.clauses < 1 or self.repetitions < 1:
            raise ValueError("clauses and repetitions must be >= 1")


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def gen_3cnf(num_vars: int, num_clauses: int, seed: int) -> CnfFormula:
    """Uniform random 3-CNF: three distinct variables per clause, chosen
    without replacement, each polarity a fair coin. Deterministic under seed."""
    if num_vars < 3:
        raise ValueError("3-CNF needs at least 3 variables")
    rng = rng_for(seed)
    clauses = []
    for _ in range(num_clauses):
        chosen = rng.choice(num_vars, size=3, replace=False) + 1
        signs = rng.integers(0, 2, size=3)
        clauses.append(
            [Literal(int(v), bool(s)) for v, s in zip(chosen, signs)]
        )
    return CnfFormula(num_vars=num_vars, clauses=clauses)


def gen_random_nnf(
    num_vars: int,
    width: int,
    depth: int,
    fanin: int,
    seed: int,
) -> Circuit:
    """Random alternating And/Or DAG over all literals, for engine stress and
    timing runs. Not a d-DNNF; correctness checks go through the post-order
    oracle, which needs no structural properties."""
    rng = rng_for(seed)
    circuit = Circuit(num_vars=num_vars)
    prev = [
        circuit.add_leaf(Literal(v, pol))
        for v in range(1, num_vars + 1)
        for pol in (True, False)
    ]
    kind_cycle = ("and", "or")
    for level in range(depth):
        kind = kind_cycle[level % 2]
        # every node below must be read at least once to keep the DAG dead-node free
        assignments = rng.integers(0, width, size=len(prev))
        extra = rng.integers(0, len(prev), size=(width, fanin))
        order = np.argsort(assignments, kind="stable")
        bounds = np.searchsorted(assignments[order], np.arange(width + 1))
        layer = []
        for i in range(width):
            kids = {int(k) for k in extra[i]}
            kids.update(int(order[j]) for j in range(bounds[i], bounds[i + 1]))
            layer.append(circuit.add_node(kind, [prev[k] for k in sorted(kids)]))
        prev = layer
    root_kind = kind_cycle[depth % 2]
    circuit.set_roots([circuit.add_node(root_kind, prev)])
    return circuit


def compile_external(cnf: CnfFormula, cmd: str, timeout: float = 120.0) -> Circuit:
    """Write DIMACS, run the compiler command, and parse whatever it produced.

    ``cmd`` must contain ``{in}`` and ``{out}`` placeholders. The output format
    is sniffed from the file extension and content.
    """
    if "{in}" not in cmd or "{out}" not in cmd:
        raise CompilerError(cmd, "command template must contain {in} and {out}")
    with tempfile.TemporaryDirectory(prefix="laycirc_bench_") as tmp:
        cnf_path = os.path.join(tmp, "instance.cnf")
        out_path = os.path.join(tmp, "instance.nnf")
        with open(cnf_path, "w") as fh:
            fh.write(cnf.to_dimacs())
        concrete = cmd.format_map({"in": cnf_path, "out": out_path})
        started = time.perf_counter()
        try:
            proc = subprocess.run(
                concrete,
                shell=True,
                capture_output=True,
                text=True,
                timeout=timeout,
            )
        except subprocess.TimeoutExpired:
            raise CompilerTimeout(concrete, time.perf_counter() - started) from None
        except FileNotFoundError as exc:
            raise CompilerError(concrete, str(exc)) from None
        if proc.returncode != 0:
            raise CompilerError(
                concrete, f"exit {proc.returncode}: {proc.stderr.strip()[:400]}"
            )
        if not os.path.exists(out_path):
            raise CompilerError(concrete, "produced no output file")
        with open(out_path, "rb") as fh:
            try:
                return parse_circuit(fh.read(), filename=out_path)
            except ValueError as exc:
                raise CompilerError(concrete, f"unparsable output: {exc}") from exc


@dataclass
class BenchReport:
    rows: list[dict] = field(default_factory=list)

    def ok_rows(self) -> list[dict]:
        return [r for r in self.rows if "error" not in r]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(row) + "\n" for row in self.rows)

    def cumulative(self, key: str) -> list[float]:
        """Prefix sums of the per-instance times, fastest first."""
        times = sorted(r[key] for r in self.ok_rows())
        out, acc = [], 0.0
        for t in times:
            acc += t
            out.append(acc)
        return out


def _median_ms(fn, repetitions: int) -> float:
    samples = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(samples)


def _consistent_weights(circuit: Circuit, rng) -> dict[Literal, float]:
    weights = {}
    for v in range(1, circuit.num_vars + 1):
        p = float(rng.uniform(0.05, 0.95))
        weights[Literal(v, True)] = p
        weights[Literal(v, False)] = 1.0 - p
    return weights


def bench_instance(circuit: Circuit, repetitions: int, seed: int, checks: int = 3) -> dict:
    """Correctness-gated timing row for one compiled circuit."""
    rng = rng_for(seed ^ 0x5EED)
    t0 = time.perf_counter()
    layered = layerize([circuit])
    t_layerize = (time.perf_counter() - t0) * 1e3
    t0 = time.perf_counter()
    tc = tensorize(layered)
    t_tensorize = (time.perf_counter() - t0) * 1e3
    st = stats(layered)

    weight_maps = [_consistent_weights(circuit, rng) for _ in range(checks)]
    assignments = [weights_from_map(tc.input_map, w) for w in weight_maps]
    for w, wa in zip(weight_maps, assignments):
        expected = postorder_eval(circuit, w)
        got = forward_real(tc, wa, retain_trace=False).outputs[0]
        for e, g in zip(expected, got):
            scale = max(abs(e), abs(g), 1e-30)
            if abs(e - g) / scale > 1e-9:
                raise AssertionError(f"oracle mismatch: naive {e} vs layered {g}")

    w0, wa0 = weight_maps[0], assignments[0]

    def run_naive():
        postorder_backward(circuit, w0)

    def run_layered():
        trace = forward_real(tc, wa0)
        backward(tc, trace)

    return {
        "nodes_src": len(circuit.nodes),
        "nodes_klay": st.nodes_total,
        "layers": len(st.nodes_per_layer),
        "edges": st.edges_total,
        "sparsity": st.sparsity,
        "t_layerize_ms": t_layerize,
        "t_tensorize_ms": t_tensorize,
        "t_naive_ms": _median_ms(run_naive, repetitions),
        "t_klay_ms": _median_ms(run_layered, repetitions),
    }


def run_bench(configs: Sequence[BenchConfig]) -> BenchReport:
    """Sweep the given instances; compiler failures become per-row errors and
    never abort the sweep."""
    report = BenchReport()
    for config in configs:
        row = {"vars": config.vars, "clauses": config.clauses, "seed": config.seed}
        try:
            cnf = gen_3cnf(config.vars, config.clauses, config.seed)
            if config.compiler_cmd:
                circuit = compile_external(cnf, config.compiler_cmd, config.timeout)
            else:
                circuit = fold_constants(compile_cnf(cnf))
            row.update(bench_instance(circuit, config.repetitions, config.seed))
        except Exception as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        report.rows.append(row)
    return report
