"""CLI mirror of the producer's eval/grad dumps, for file-level diffing:

    python -m array_consumer circuit.klay weights.json [--log] [--epsilon E]
                             [--grad] [--out PATH]
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .loader import load
from .runner import LOG, REAL, decode_weights, dump_payload, forward, gradient


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="array_consumer")
    parser.add_argument("circuit")
    parser.add_argument("weights")
    parser.add_argument("--log", action="store_true")
    parser.add_argument("--epsilon", type=float, default=0.0)
    parser.add_argument("--grad", action="store_true")
    parser.add_argument("--out", default=None)
    args = parser.parse_args(argv)

    program = load(args.circuit)
    with open(args.weights) as fh:
        rows = decode_weights(json.load(fh), program)
    domain = LOG if args.log else REAL
    with np.errstate(divide="ignore"):
        values = np.log(rows) if args.log else rows
    outputs = forward(program, values, domain, args.epsilon)
    grads = gradient(program, values, domain, args.epsilon) if args.grad else None
    text = json.dumps(dump_payload(outputs, grads))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
