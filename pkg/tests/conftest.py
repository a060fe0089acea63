"""Shared fixtures: the figure circuits, a deterministic random-circuit corpus,
and small weight/tolerance helpers."""

from __future__ import annotations

import os

import numpy as np
import pytest

from laycirc import (
    Circuit,
    Literal,
    WeightAssignment,
    fold_constants,
    layerize,
    tensorize,
    weights_from_map,
)
from laycirc.bench import gen_3cnf, rng_for
from laycirc.compile import compile_cnf

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURE_DIR, name)


def read_fixture(name: str) -> bytes:
    with open(fixture_path(name), "rb") as fh:
        return fh.read()


def build_fig_main() -> Circuit:
    """The running-example d-DNNF: (~a & (~b|~c|d)) | (a & (c|~d)) with
    a,b,c,d as variables 1..4; children kept in the drawn order."""
    c = Circuit(num_vars=4)
    na = c.add_leaf(Literal(1, False))
    nb = c.add_leaf(Literal(2, False))
    b = c.add_leaf(Literal(2))
    nc = c.add_leaf(Literal(3, False))
    cc = c.add_leaf(Literal(3))
    d = c.add_leaf(Literal(4))
    nd = c.add_leaf(Literal(4, False))
    a = c.add_leaf(Literal(1))
    and_cd = c.add_and([cc, d])
    or_c = c.add_or([and_cd, nc])
    or_d = c.add_or([and_cd, nd])
    and_b = c.add_and([nb, na])
    and_na = c.add_and([na, b, or_c])
    and_a = c.add_and([or_d, a])
    c.set_roots([c.add_or([and_b, and_na, and_a])])
    return c


def fig_main_formula(a: bool, b: bool, cc: bool, d: bool) -> bool:
    return (not a and ((not b) or (not cc) or d)) or (a and (cc or not d))


def build_fig_second() -> Circuit:
    """Companion multi-root example sharing subcircuits with the main figure:
    ((c&d | ~d) & a) | (e & ~a), with e as variable 5."""
    c = Circuit(num_vars=5)
    cc = c.add_leaf(Literal(3))
    d = c.add_leaf(Literal(4))
    nd = c.add_leaf(Literal(4, False))
    a = c.add_leaf(Literal(1))
    e = c.add_leaf(Literal(5))
    na = c.add_leaf(Literal(1, False))
    and_cd = c.add_and([cc, d])
    or_d = c.add_or([and_cd, nd])
    and_a = c.add_and([or_d, a])
    and_e = c.add_and([e, na])
    c.set_roots([c.add_or([and_a, and_e])])
    return c


def build_single_leaf() -> Circuit:
    c = Circuit(num_vars=1)
    c.set_roots([c.add_leaf(Literal(1))])
    return c


def build_tautology() -> Circuit:
    c = Circuit(num_vars=1)
    x = c.add_leaf(Literal(1))
    nx = c.add_leaf(Literal(1, False))
    c.set_roots([c.add_or([x, nx])])
    return c


def compiled_corpus(count: int = 8, max_vars: int = 12, seed: int = 2024) -> list[Circuit]:
    """Deterministic smooth d-DNNF circuits from the bundled compiler."""
    rng = rng_for(seed)
    out = []
    while len(out) < count:
        nv = int(rng.integers(4, max_vars + 1))
        nc = int(rng.integers(nv, 4 * nv))
        circ = fold_constants(compile_cnf(gen_3cnf(nv, nc, int(rng.integers(0, 2**31)))))
        if circ.nodes[circ.roots[0]].kind not in ("true", "false"):
            out.append(circ)
    return out


def smooth_fixtures() -> list[tuple[str, Circuit]]:
    named = [("tautology", build_tautology()), ("single_leaf", build_single_leaf())]
    named += [(f"compiled_{i}", c) for i, c in enumerate(compiled_corpus())]
    return named


def all_fixtures() -> list[tuple[str, Circuit]]:
    return smooth_fixtures() + [
        ("fig_main", build_fig_main()),
        ("fig_second", build_fig_second()),
    ]


def pipeline(circuits):
    layered = layerize(list(circuits))
    return layered, tensorize(layered)


def consistent_weights(num_vars: int, rng) -> dict[Literal, float]:
    w = {}
    for v in range(1, num_vars + 1):
        p = float(rng.uniform(0.05, 0.95))
        w[Literal(v, True)] = p
        w[Literal(v, False)] = 1.0 - p
    return w


def independent_weights(num_vars: int, rng, lo: float = 0.05, hi: float = 0.95):
    return {
        Literal(v, pol): float(rng.uniform(lo, hi))
        for v in range(1, num_vars + 1)
        for pol in (True, False)
    }


def all_weights(num_vars: int, value: float) -> dict[Literal, float]:
    return {
        Literal(v, pol): value for v in range(1, num_vars + 1) for pol in (True, False)
    }


def weight_row(tc, mapping) -> WeightAssignment:
    return weights_from_map(tc.input_map, mapping)


def rel_err(a, b) -> float:
    a, b = float(a), float(b)
    return abs(a - b) / max(abs(a), abs(b), 1e-30)


@pytest.fixture
def fig_main() -> Circuit:
    return build_fig_main()


@pytest.fixture
def fig_second() -> Circuit:
    return build_fig_second()


@pytest.fixture
def rng() -> np.random.Generator:
    return rng_for(1234)
