"""Command-line entry point.

Subcommands: compile, eval, grad, check, stats, bench. Exit codes: 0 success,
1 oracle mismatch (check), 2 parse/format/shape failure, 3 I/O failure.

Weight files always hold real-domain values ("p" probabilities or "w" raw
per-literal weights); ``--log`` switches the computation to the logarithmic
domain (weights are logged internally, outputs are log values).
"""

from __future__ import annotations

import os


def _cap_threads() -> None:
    cap = os.environ.get("KLAY_THREADS")
    if cap:
        for var in (
            "OMP_NUM_THREADS",
            "OPENBLAS_NUM_THREADS",
            "MKL_NUM_THREADS",
            "NUMEXPR_NUM_THREADS",
        ):
            os.environ.setdefault(var, cap)


_cap_threads()  # must run before the numpy import chain below

import argparse
import json
import sys

import numpy as np

from .bench import BenchConfig, run_bench
from .circuit import CircuitError, Literal, fold_constants
from .engine import (
    EvalError,
    WeightAssignment,
    backward,
    evaluate_semiring,
    forward_log,
    forward_real,
    weights_from_json,
)
from .layerize import layerize, stats
from .oracle import ENUMERATION_VAR_LIMIT, enumerate_wmc, postorder_eval
from .parsers import ParseError, parse_circuit
from .tensorize import KlayFormatError, read_klay, tensorize, write_klay

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_FORMAT = 2
EXIT_IO = 3

FORMAT_ERRORS = (ParseError, KlayFormatError, EvalError, CircuitError, ValueError)


def _read_file(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _roots_payload(outputs: np.ndarray) -> list:
    rows = outputs.tolist()
    return rows[0] if len(rows) == 1 else rows


def _load_weights(path: str, tc, batch: int | None) -> WeightAssignment:
    payload = json.loads(_read_file(path))
    weights = weights_from_json(payload, tc.input_map)
    if batch is not None and batch != weights.batch:
        if weights.batch != 1:
            raise EvalError(f"--batch {batch} conflicts with {weights.batch} weight rows")
        weights = WeightAssignment(np.repeat(weights.values, batch, axis=0))
    return weights


def cmd_compile(args) -> int:
    circuits = []
    for path in args.inputs:
        circuits.append(
            fold_constants(parse_circuit(_read_file(path), fmt=args.format, filename=path))
        )
    layered = layerize(circuits)
    tc = tensorize(layered)
    with open(args.out, "w") as fh:
        write_klay(tc, fh)
    st = stats(layered)
    print(
        json.dumps(
            {
                "out": args.out,
                "roots": tc.num_roots,
                **st.as_dict(),
            }
        )
    )
    return EXIT_OK


def cmd_eval(args) -> int:
    tc = read_klay(_read_file(args.circuit))
    weights = _load_weights(args.weights, tc, args.batch)
    if args.log:
        trace = forward_log(tc, weights.to_log(), epsilon=args.epsilon, retain_trace=False)
        outputs = trace.outputs
    else:
        outputs = evaluate_semiring(tc, weights, args.semiring)
    _emit({"roots": _roots_payload(outputs)}, args.out)
    return EXIT_OK


def cmd_grad(args) -> int:
    tc = read_klay(_read_file(args.circuit))
    weights = _load_weights(args.weights, tc, args.batch)
    if args.log:
        trace = forward_log(tc, weights.to_log(), epsilon=args.epsilon)
    else:
        trace = forward_real(tc, weights)
    grad = backward(tc, trace)
    _emit({"roots": _roots_payload(trace.outputs), "grad": grad.tolist()}, args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    if args.source.endswith(".klay"):
        read_klay(_read_file(args.source))
        print(json.dumps({"source": args.source, "format": "ok"}))
        return EXIT_OK
    circuit = fold_constants(parse_circuit(_read_file(args.source), filename=args.source))
    layered = layerize([circuit])
    tc = tensorize(layered)
    rng = np.random.Generator(np.random.Philox(key=args.seed))
    worst = 0.0
    worst_info = None
    enumerable = circuit.num_vars <= min(20, ENUMERATION_VAR_LIMIT)
    for trial in range(args.trials):
        per_lit = {}
        for v in range(1, circuit.num_vars + 1):
            p = float(rng.uniform(0.05, 0.95))
            per_lit[Literal(v, True)] = p
            per_lit[Literal(v, False)] = 1.0 - p
        row = np.zeros((1, tc.num_inputs))
        for lit, slot in tc.input_map.items():
            row[0, slot] = per_lit[lit]
        got = forward_real(tc, WeightAssignment(row), retain_trace=False).outputs[0]
        references = {"postorder": postorder_eval(circuit, per_lit)}
        if enumerable:
            references["enumeration"] = enumerate_wmc(circuit, per_lit)
        for name, expected in references.items():
            for k, (e, g) in enumerate(zip(expected, got)):
                rel = abs(e - g) / max(abs(e), abs(g), 1e-30)
                if rel > worst:
                    worst = rel
                    worst_info = {"trial": trial, "oracle": name, "root": k,
                                  "expected": e, "got": float(g)}
    verdict = {"source": args.source, "trials": args.trials, "worst_rel_err": worst,
               "enumeration_checked": enumerable}
    if worst > 1e-9:
        verdict["worst_case"] = worst_info
        print(json.dumps(verdict))
        return EXIT_MISMATCH
    print(json.dumps(verdict))
    return EXIT_OK


def cmd_stats(args) -> int:
    data = _read_file(args.circuit)
    if args.circuit.endswith(".klay"):
        st = stats(read_klay(data))
    else:
        circuit = fold_constants(parse_circuit(data, filename=args.circuit))
        st = stats(layerize([circuit]))
    print(json.dumps(st.as_dict()))
    return EXIT_OK


def cmd_bench(args) -> int:
    vars_list = [int(v) for v in args.vars.split(",")]
    clauses_list = [int(c) for c in args.clauses.split(",")]
    if len(vars_list) != len(clauses_list):
        raise ValueError("--vars and --clauses need the same number of entries")
    configs = [
        BenchConfig(
            vars=v,
            clauses=c,
            seed=args.seed + i,
            compiler_cmd=args.compiler,
            repetitions=args.repetitions,
            timeout=args.timeout,
        )
        for v, c in zip(vars_list, clauses_list)
        for i in range(args.instances)
    ]
    report = run_bench(configs)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.to_jsonl())
    else:
        sys.stdout.write(report.to_jsonl())
    cumulative = report.cumulative("t_klay_ms")
    if cumulative:
        print(f"# cumulative t_klay_ms over {len(cumulative)} instances: "
              f"{[round(x, 3) for x in cumulative]}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laycirc",
        description="Layerize, tensorize, and evaluate compiled Boolean circuits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="merge circuit files into one .klay file")
    p.add_argument("inputs", nargs="+")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--format", default="auto", choices=["auto", "c2d", "d4", "sdd"])
    p.set_defaults(fn=cmd_compile)

    for name, fn in (("eval", cmd_eval), ("grad", cmd_grad)):
        p = sub.add_parser(name, help=f"{name} a .klay circuit on JSON weights")
        p.add_argument("circuit")
        p.add_argument("weights")
        p.add_argument("--log", action="store_true")
        p.add_argument("--epsilon", type=float, default=0.0)
        p.add_argument("--batch", type=int, default=None)
        p.add_argument("--out", default=None, help="write the JSON dump here instead of stdout")
        if name == "eval":
            p.add_argument(
                "--semiring", default="real", choices=["real", "log", "bool", "maxprod"]
            )
        p.set_defaults(fn=fn)

    p = sub.add_parser("check", help="cross-check the pipeline against the oracles")
    p.add_argument("source")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("stats", help="layer/edge statistics for a circuit or .klay file")
    p.add_argument("circuit")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("bench", help="random 3-CNF benchmark sweep")
    p.add_argument("--vars", default="10")
    p.add_argument("--clauses", default="40")
    p.add_argument("--instances", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--compiler", default=None,
                   help="external command with {in}/{out}; bundled compiler if omitted")
    p.add_argument("--repetitions", type=int, default=10)
    p.add_argument("--timeout", type=float, default=120.0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except OSError as exc:
        print(f"laycirc: io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"laycirc: bad json: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except FORMAT_ERRORS as exc:
        print(f"laycirc: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
