#!/usr/bin/env python3
"""Regenerate the consumer's cross-check corpus.

Everything flows through the public CLI so the committed .klay files, weight
files, and expected dumps are exactly what an external consumer would see:

    python scripts/make_consumer_fixtures.py
"""

import json
import os

from laycirc.cli import main as cli

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SRC = os.path.join(ROOT, "tests", "fixtures")
DST = os.path.join(ROOT, "consumer", "tests", "fixtures")


def run(argv):
    code = cli(argv)
    assert code == 0, f"cli {argv} exited {code}"


def write_json(name, payload):
    with open(os.path.join(DST, name), "w") as fh:
        json.dump(payload, fh, indent=None)
        fh.write("\n")


def main() -> None:
    os.makedirs(DST, exist_ok=True)

    fig = os.path.join(DST, "fig_main.klay")
    run(["compile", os.path.join(SRC, "fig_main.nnf"), "-o", fig])
    pair = os.path.join(DST, "pair.klay")
    run(["compile", os.path.join(SRC, "conj.sdd"), os.path.join(SRC, "equiv.sdd"), "-o", pair])

    write_json("w_half.json", {"p": {str(v): 0.5 for v in range(1, 5)}})
    write_json(
        "w_mixed.json",
        {"w": {"1": 0.9, "-1": 0.2, "2": 0.4, "-2": 0.7, "3": 0.55, "-3": 0.45,
               "4": 0.15, "-4": 0.8}},
    )
    write_json(
        "w_batch.json",
        [
            {"p": {"1": p, "2": 1 - p, "3": 0.3 + p / 2, "4": 0.9 - p / 2}}
            for p in (0.1, 0.35, 0.6, 0.85)
        ],
    )
    write_json("w_pair.json", {"p": {"1": 0.25, "2": 0.65}})

    dumps = [
        (["eval", fig, os.path.join(DST, "w_half.json")], "fig_half_eval.json"),
        (["eval", fig, os.path.join(DST, "w_mixed.json")], "fig_mixed_eval.json"),
        (["eval", fig, os.path.join(DST, "w_mixed.json"), "--log"], "fig_mixed_eval_log.json"),
        (
            ["eval", fig, os.path.join(DST, "w_mixed.json"), "--log", "--epsilon", "1e-3"],
            "fig_mixed_eval_log_eps.json",
        ),
        (["eval", fig, os.path.join(DST, "w_batch.json")], "fig_batch_eval.json"),
        (["grad", fig, os.path.join(DST, "w_mixed.json")], "fig_mixed_grad.json"),
        (["grad", fig, os.path.join(DST, "w_mixed.json"), "--log"], "fig_mixed_grad_log.json"),
        (["grad", fig, os.path.join(DST, "w_batch.json")], "fig_batch_grad.json"),
        (["eval", pair, os.path.join(DST, "w_pair.json")], "pair_eval.json"),
        (["grad", pair, os.path.join(DST, "w_pair.json")], "pair_grad.json"),
    ]
    for argv, name in dumps:
        run(argv + ["--out", os.path.join(DST, name)])
    print(f"wrote corpus to {DST}")


if __name__ == "__main__":
    main()
