"""Ground-truth evaluators, independent of the tensorized engine.

``postorder_eval`` walks the linked circuit child-before-parent with per-node
memoization (shared nodes are computed once); it doubles as the honest naive
baseline for benchmarks, together with ``postorder_backward``.
``enumerate_wmc`` brute-forces all variable assignments and is the final
arbiter for weighted-model-counting semantics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .circuit import AND, FALSE, LEAF, OR, TRUE, Circuit, CircuitError, Literal

ENUMERATION_VAR_LIMIT = 24


@dataclass(frozen=True)
class ScalarSemiring:
    """Scalar (add, mul) pair with identities, used by the reference evaluator."""

    name: str
    zero: float
    one: float
    add: Callable[[float, float], float]
    mul: Callable[[float, float], float]


def _logaddexp(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    m = max(a, b)
    return m + math.log(math.exp(a - m) + math.exp(b - m))


REAL_SCALAR = ScalarSemiring("real", 0.0, 1.0, lambda a, b: a + b, lambda a, b: a * b)
BOOLEAN_SCALAR = ScalarSemiring("bool", 0.0, 1.0, max, min)
MAX_PRODUCT_SCALAR = ScalarSemiring("maxprod", 0.0, 1.0, max, lambda a, b: a * b)
LOG_SCALAR = ScalarSemiring("log", -math.inf, 0.0, _logaddexp, lambda a, b: a + b)

SCALAR_SEMIRINGS = {
    s.name: s for s in (REAL_SCALAR, BOOLEAN_SCALAR, MAX_PRODUCT_SCALAR, LOG_SCALAR)
}


def postorder_eval(
    circuit: Circuit,
    weights: Mapping[Literal, float],
    semiring: ScalarSemiring = REAL_SCALAR,
) -> list[float]:
    """Evaluate every root bottom-up; sums on Or gates, products on And gates."""
    values: list[float] = []
    for node in circuit.nodes:
        if node.kind == LEAF:
            if node.literal not in weights:
                raise CircuitError(f"missing weight for literal {node.literal}")
            values.append(weights[node.literal])
        elif node.kind == AND:
            acc = semiring.one
            for c in node.children:
                acc = semiring.mul(acc, values[c])
            values.append(acc)
        elif node.kind == OR:
            acc = semiring.zero
            for c in node.children:
                acc = semiring.add(acc, values[c])
            values.append(acc)
        elif node.kind == TRUE:
            values.append(semiring.one)
        else:
            values.append(semiring.zero)
    return [values[r] for r in circuit.roots]


def postorder_backward(
    circuit: Circuit,
    weights: Mapping[Literal, float],
) -> tuple[list[float], dict[Literal, float]]:
    """Real-semiring forward plus a reverse sweep over the linked nodes.

    Returns per-root values and the gradient of the root sum with respect to
    each literal weight. And-gate adjoints use prefix/suffix sibling products,
    so the pass stays linear in the edge count.
    """
    values: list[float] = []
    for node in circuit.nodes:
        if node.kind == LEAF:
            values.append(weights[node.literal])
        elif node.kind == AND:
            acc = 1.0
            for c in node.children:
                acc *= values[c]
            values.append(acc)
        elif node.kind == OR:
            acc = 0.0
            for c in node.children:
                acc += values[c]
            values.append(acc)
        else:
            values.append(1.0 if node.kind == TRUE else 0.0)

    grads = [0.0] * len(circuit.nodes)
    for r in circuit.roots:
        grads[r] += 1.0
    lit_grads: dict[Literal, float] = {}
    for nid in range(len(circuit.nodes) - 1, -1, -1):
        node = circuit.nodes[nid]
        g = grads[nid]
        if node.kind == LEAF:
            lit_grads[node.literal] = lit_grads.get(node.literal, 0.0) + g
        elif node.kind == OR:
            if g:
                for c in node.children:
                    grads[c] += g
        elif node.kind == AND and g:
            kids = node.children
            prefix = 1.0
            suffix = [1.0] * (len(kids) + 1)
            for i in range(len(kids) - 1, -1, -1):
                suffix[i] = suffix[i + 1] * values[kids[i]]
            for i, c in enumerate(kids):
                grads[c] += g * prefix * suffix[i + 1]
                prefix *= values[c]
    return [values[r] for r in circuit.roots], lit_grads


def truth_table(circuit: Circuit, chunk_bits: int = 14) -> np.ndarray:
    """Per-root satisfaction over all 2^n assignments (assignment i sets
    variable v to bit v-1 of i). Guarded to num_vars <= 24. Computed in
    chunks so per-node scratch stays bounded."""
    n = circuit.num_vars
    if n > ENUMERATION_VAR_LIMIT:
        raise CircuitError(f"enumeration limited to {ENUMERATION_VAR_LIMIT} vars, got {n}")
    total = 1 << n
    table = np.zeros((len(circuit.roots), total), dtype=bool)
    chunk = min(total, 1 << chunk_bits)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        bits = [None] + [
            ((idx >> np.uint64(v - 1)) & np.uint64(1)).astype(bool) for v in range(1, n + 1)
        ]
        vals: list[np.ndarray] = []
        for node in circuit.nodes:
            if node.kind == LEAF:
                b = bits[node.literal.variable]
                vals.append(b if node.literal.positive else ~b)
            elif node.kind == AND:
                acc = np.ones(len(idx), dtype=bool)
                for c in node.children:
                    acc &= vals[c]
                vals.append(acc)
            elif node.kind == OR:
                acc = np.zeros(len(idx), dtype=bool)
                for c in node.children:
                    acc |= vals[c]
                vals.append(acc)
            elif node.kind == TRUE:
                vals.append(np.ones(len(idx), dtype=bool))
            else:
                vals.append(np.zeros(len(idx), dtype=bool))
        for k, r in enumerate(circuit.roots):
            table[k, start : start + len(idx)] = vals[r]
    return table


def assignment_weights(
    num_vars: int, weights: Mapping[Literal, float]
) -> np.ndarray:
    """Product of matching literal weights for every assignment, in the same
    order as ``truth_table``."""
    w_pos = np.empty(num_vars + 1)
    w_neg = np.empty(num_vars + 1)
    for v in range(1, num_vars + 1):
        pos, neg = Literal(v, True), Literal(v, False)
        if pos not in weights or neg not in weights:
            raise CircuitError(f"enumeration requires weights for both polarities of {v}")
        w_pos[v], w_neg[v] = weights[pos], weights[neg]
    idx = np.arange(1 << num_vars, dtype=np.uint64)
    product = np.ones(len(idx))
    for v in range(1, num_vars + 1):
        bit = ((idx >> np.uint64(v - 1)) & np.uint64(1)).astype(bool)
        product *= np.where(bit, w_pos[v], w_neg[v])
    return product


def enumerate_wmc(
    circuit: Circuit,
    weights: Mapping[Literal, float],
    chunk_bits: int = 14,
) -> list[float]:
    """Sum, over all 2^n assignments, the product of matching literal weights
    for every satisfied root. Guarded to num_vars <= 24; requires weights for
    both polarities of every variable."""
    table = truth_table(circuit, chunk_bits=chunk_bits)
    product = assignment_weights(circuit.num_vars, weights)
    return [float(product[row].sum()) for row in table]


def enumerate_model_count(circuit: Circuit) -> list[int]:
    """Exact satisfying-assignment count per root (enumeration with unit weights)."""
    ones = {}
    for v in range(1, circuit.num_vars + 1):
        ones[Literal(v, True)] = 1.0
        ones[Literal(v, False)] = 1.0
    return [round(x) for x in enumerate_wmc(circuit, ones)]
