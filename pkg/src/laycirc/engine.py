"""Batched forward and backward evaluation of tensorized circuits.

A forward pass is, per layer, one gather (``values[:, sources]``) followed by
one segment reduction grouped by ``segments``. Products run on odd layers and
sums on even ones; in the log domain the sum layers use the max trick
(segment-max, shifted exp, segment-sum, log) so that all-zero segments come
out as -inf instead of NaN. Within a segment the reduction order is the fixed
edge order, so repeated evaluations are bit-identical.

The backward pass reuses the same index vectors: segment-reduce adjoints are
gathers, and the gather adjoint is a segment-sum over the edge list sorted by
source (precomputed once per circuit).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .circuit import Literal
from .layerize import PRODUCT
from .tensorize import TensorizedCircuit

REAL_DOMAIN = "real"
LOG_DOMAIN = "log"


class EvalError(ValueError):
    """Shape or domain mismatch between circuit, weights, and traces."""


@dataclass
class WeightAssignment:
    """Per-input-slot values, one row per batch element."""

    values: np.ndarray  # [batch, num_inputs]
    domain: str = REAL_DOMAIN

    def __post_init__(self) -> None:
        self.values = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        if self.values.ndim != 2 or self.values.shape[0] < 1:
            raise EvalError("weights must be a [batch, num_inputs] matrix with batch >= 1")
        if self.domain not in (REAL_DOMAIN, LOG_DOMAIN):
            raise EvalError(f"unknown weight domain {self.domain!r}")
        if self.domain == REAL_DOMAIN and not np.all(np.isfinite(self.values)):
            raise EvalError("real-domain weights must be finite")
        if self.domain == LOG_DOMAIN and np.any(self.values == np.inf):
            raise EvalError("log-domain weights must be < +inf")

    @property
    def batch(self) -> int:
        return self.values.shape[0]

    @property
    def num_inputs(self) -> int:
        return self.values.shape[1]

    def to_log(self) -> "WeightAssignment":
        if self.domain == LOG_DOMAIN:
            return self
        with np.errstate(divide="ignore"):
            return WeightAssignment(np.log(self.values), LOG_DOMAIN)


def weights_from_map(
    input_map: Mapping[Literal, int],
    per_literal: Mapping[Literal, float],
    domain: str = REAL_DOMAIN,
) -> WeightAssignment:
    """Build a single-row assignment from an explicit literal -> value map."""
    row = np.empty(len(input_map), dtype=np.float64)
    for lit, slot in input_map.items():
        if lit not in per_literal:
            raise EvalError(f"missing weight for literal {lit}")
        row[slot] = per_literal[lit]
    return WeightAssignment(row[np.newaxis, :], domain)


def weights_from_probabilities(
    input_map: Mapping[Literal, int],
    prob: Mapping[int, float],
) -> WeightAssignment:
    """Build real-domain weights from variable probabilities; the negative
    literal defaults to one minus the variable's probability."""
    per_literal = {}
    for lit in input_map:
        if lit.variable not in prob:
            raise EvalError(f"missing probability for variable {lit.variable}")
        p = float(prob[lit.variable])
        per_literal[lit] = p if lit.positive else 1.0 - p
    return weights_from_map(input_map, per_literal)


def weights_from_json(payload, input_map: Mapping[Literal, int]) -> WeightAssignment:
    """Decode the weight-file JSON schema.

    A single object is either ``{"p": {"var": prob, ...}}`` or
    ``{"w": {"lit": value, ...}}`` with DIMACS-signed literal keys; a batched
    file is a JSON array of such objects.
    """
    rows = payload if isinstance(payload, list) else [payload]
    if not rows:
        raise EvalError("weight file contains no rows")
    built = []
    for row in rows:
        if not isinstance(row, dict) or len(row.keys() & {"p", "w"}) != 1:
            raise EvalError("each weight row must have exactly one of 'p' or 'w'")
        if "p" in row:
            prob = {int(k): float(v) for k, v in row["p"].items()}
            built.append(weights_from_probabilities(input_map, prob).values[0])
        else:
            per_lit = {
                Literal.from_dimacs(int(k)): float(v) for k, v in row["w"].items()
            }
            built.append(weights_from_map(input_map, per_lit).values[0])
    return WeightAssignment(np.stack(built), REAL_DOMAIN)


@dataclass
class EvalTrace:
    """Forward-pass record: per-layer node values (when retained) and root outputs."""

    domain: str
    outputs: np.ndarray  # [batch, num_roots]
    node_values: list[np.ndarray] | None  # [batch, width_l] per layer 0..L
    epsilon: float = 0.0


@dataclass
class _LayerPlan:
    starts: np.ndarray  # segment starts for the aggregation reduceat
    gather_order: np.ndarray  # edge order sorted by source index
    gather_starts: np.ndarray  # segment starts of the sorted source groups


def _plans(tc: TensorizedCircuit) -> list[_LayerPlan]:
    cached = getattr(tc, "_plans_cache", None)
    if cached is not None:
        return cached
    plans = []
    for layer in tc.layers:
        counts = np.bincount(layer.segments, minlength=layer.width)
        starts = np.zeros(layer.width, dtype=np.int64)
        np.cumsum(counts[:-1], out=starts[1:])
        order = np.argsort(layer.sources, kind="stable")
        src_sorted = layer.sources[order]
        prev_width = int(src_sorted[-1]) + 1 if len(src_sorted) else 0
        gcounts = np.bincount(src_sorted, minlength=prev_width)
        gstarts = np.zeros(prev_width, dtype=np.int64)
        np.cumsum(gcounts[:-1], out=gstarts[1:])
        plans.append(_LayerPlan(starts, order, gstarts))
    tc._plans_cache = plans
    return plans


@dataclass(frozen=True)
class Semiring:
    """Pair of segment reductions (additive and multiplicative) with identities."""

    name: str
    zero: float
    one: float
    reduce_sum: Callable[[np.ndarray, np.ndarray], np.ndarray]
    reduce_prod: Callable[[np.ndarray, np.ndarray], np.ndarray]


REAL = Semiring(
    "real",
    zero=0.0,
    one=1.0,
    reduce_sum=lambda edges, starts: np.add.reduceat(edges, starts, axis=-1),
    reduce_prod=lambda edges, starts: np.multiply.reduceat(edges, starts, axis=-1),
)

BOOLEAN = Semiring(
    "bool",
    zero=0.0,
    one=1.0,
    reduce_sum=lambda edges, starts: np.maximum.reduceat(edges, starts, axis=-1),
    reduce_prod=lambda edges, starts: np.minimum.reduceat(edges, starts, axis=-1),
)

MAX_PRODUCT = Semiring(
    "maxprod",
    zero=0.0,
    one=1.0,
    reduce_sum=lambda edges, starts: np.maximum.reduceat(edges, starts, axis=-1),
    reduce_prod=lambda edges, starts: np.multiply.reduceat(edges, starts, axis=-1),
)

SEMIRINGS = {s.name: s for s in (REAL, BOOLEAN, MAX_PRODUCT)}


def _check_shapes(tc: TensorizedCircuit, weights: WeightAssignment) -> None:
    if weights.num_inputs != tc.num_inputs:
        raise EvalError(
            f"weights have {weights.num_inputs} columns, circuit expects {tc.num_inputs}"
        )


def _assemble_outputs(
    tc: TensorizedCircuit, last: np.ndarray, zero: float, one: float
) -> np.ndarray:
    out = np.empty((last.shape[0], tc.num_roots), dtype=last.dtype)
    non_const = (p for p in range(tc.num_roots) if p not in tc.constant_roots)
    for p, r in zip(non_const, tc.root_indices):
        out[:, p] = last[:, r]
    for p, b in tc.constant_roots.items():
        out[:, p] = one if b else zero
    return out


def _run_layers(tc, values, reduce_for_layer, retain):
    node_values = [values] if retain else None
    cur = values
    for layer, plan in zip(tc.layers, _plans(tc)):
        edges = np.take(cur, layer.sources, axis=1)
        cur = reduce_for_layer(layer, plan, edges)
        if retain:
            node_values.append(cur)
    return cur, node_values


def forward_real(
    tc: TensorizedCircuit,
    weights: WeightAssignment,
    retain_trace: bool = True,
    dtype=None,
) -> EvalTrace:
    """Evaluate in the real semiring; returns the trace with root outputs."""
    if weights.domain != REAL_DOMAIN:
        raise EvalError("forward_real requires real-domain weights")
    _check_shapes(tc, weights)
    values = weights.values.astype(dtype) if dtype is not None else weights.values

    def step(layer, plan, edges):
        reduce_fn = REAL.reduce_prod if layer.op == PRODUCT else REAL.reduce_sum
        return reduce_fn(edges, plan.starts)

    last, node_values = _run_layers(tc, values, step, retain_trace)
    outputs = _assemble_outputs(tc, last, REAL.zero, REAL.one)
    return EvalTrace(REAL_DOMAIN, outputs, node_values)


def forward_log(
    tc: TensorizedCircuit,
    weights: WeightAssignment,
    epsilon: float = 0.0,
    retain_trace: bool = True,
    dtype=None,
) -> EvalTrace:
    """Evaluate in the log semiring: products become sums, sums become a
    max-trick logsumexp. Segments whose maximum is -inf yield -inf, never NaN;
    ``epsilon`` is added inside the log as a training-stability knob."""
    if weights.domain != LOG_DOMAIN:
        raise EvalError("forward_log requires log-domain weights")
    if epsilon < 0:
        raise EvalError("epsilon must be >= 0")
    _check_shapes(tc, weights)
    values = weights.values.astype(dtype) if dtype is not None else weights.values

    def step(layer, plan, edges):
        if layer.op == PRODUCT:
            return np.add.reduceat(edges, plan.starts, axis=-1)
        return _segment_logsumexp(edges, plan.starts, layer.segments, epsilon)

    last, node_values = _run_layers(tc, values, step, retain_trace)
    outputs = _assemble_outputs(tc, last, -np.inf, 0.0)
    return EvalTrace(LOG_DOMAIN, outputs, node_values, epsilon=epsilon)


def _segment_logsumexp(edges, starts, segments, epsilon):
    peak = np.maximum.reduceat(edges, starts, axis=-1)
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        shifted = np.exp(edges - np.take(peak, segments, axis=1))
        # an all -inf segment produces NaN in the shift; it is masked below
        shifted = np.where(np.isnan(shifted), 0.0, shifted)
        total = np.add.reduceat(shifted, starts, axis=-1)
        result = np.log(total + epsilon) + peak
    return np.where(peak == -np.inf, -np.inf, result)


def evaluate_semiring(
    tc: TensorizedCircuit,
    weights: WeightAssignment,
    semiring: Semiring | str,
) -> np.ndarray:
    """Forward evaluation under an arbitrary semiring; returns [batch, roots]."""
    if isinstance(semiring, str):
        if semiring == "log":
            return forward_log(tc, weights.to_log(), retain_trace=False).outputs
        if semiring not in SEMIRINGS:
            raise EvalError(f"unknown semiring {semiring!r}")
        semiring = SEMIRINGS[semiring]
    _check_shapes(tc, weights)

    def step(layer, plan, edges):
        reduce_fn = semiring.reduce_prod if layer.op == PRODUCT else semiring.reduce_sum
        return reduce_fn(edges, plan.starts)

    last, _ = _run_layers(tc, weights.values, step, retain=False)
    return _assemble_outputs(tc, last, semiring.zero, semiring.one)


def backward(
    tc: TensorizedCircuit,
    trace: EvalTrace,
    seed: np.ndarray | None = None,
) -> np.ndarray:
    """Gradient of ``sum_r seed[:, r] * root_r`` with respect to the input slots.

    Works on traces from forward_real and forward_log. Product-layer adjoints
    are zero-safe: segments with one zero edge route the sibling product to
    that edge only, segments with two or more zeros propagate nothing.
    """
    if trace.node_values is None:
        raise EvalError("backward requires a trace with retain_trace=True")
    if len(trace.node_values) != len(tc.layers) + 1:
        raise EvalError("trace does not match circuit layer count")
    batch = trace.node_values[0].shape[0]
    dtype = trace.node_values[0].dtype
    if seed is None:
        seed = np.ones((batch, tc.num_roots), dtype=dtype)
    seed = np.asarray(seed, dtype=dtype)
    if seed.shape != (batch, tc.num_roots):
        raise EvalError(f"seed must have shape {(batch, tc.num_roots)}")

    last_width = tc.layers[-1].width if tc.layers else tc.num_inputs
    grad = np.zeros((batch, last_width), dtype=dtype)
    non_const = (p for p in range(tc.num_roots) if p not in tc.constant_roots)
    for p, r in zip(non_const, tc.root_indices):
        grad[:, r] += seed[:, p]

    plans = _plans(tc)
    for l in range(len(tc.layers) - 1, -1, -1):
        layer, plan = tc.layers[l], plans[l]
        if layer.op == PRODUCT and trace.domain == REAL_DOMAIN:
            edges = np.take(trace.node_values[l], layer.sources, axis=1)
            grad_edges = _product_adjoint(edges, grad, plan.starts, layer.segments)
        elif layer.op == PRODUCT or trace.domain == REAL_DOMAIN:
            # log-domain products (sums of logs) and real-domain sums both
            # pass the parent gradient straight through to every edge
            grad_edges = np.take(grad, layer.segments, axis=1)
        else:
            edges = np.take(trace.node_values[l], layer.sources, axis=1)
            out_seg = np.take(trace.node_values[l + 1], layer.segments, axis=1)
            with np.errstate(invalid="ignore"):
                soft = np.exp(edges - out_seg)
            soft = np.where(np.isnan(soft) | np.isinf(soft), 0.0, soft)
            grad_edges = np.take(grad, layer.segments, axis=1) * soft
        # gather adjoint: scatter-add grad_edges over the source indices
        grad = np.add.reduceat(np.take(grad_edges, plan.gather_order, axis=1), plan.gather_starts, axis=-1)
    return grad


def _product_adjoint(edges, grad_out, starts, segments):
    zero = edges == 0.0
    if not zero.any():
        prod = np.multiply.reduceat(edges, starts, axis=-1)
        return np.take(grad_out * prod, segments, axis=1) / edges
    safe = np.where(zero, 1.0, edges)
    prod_nonzero = np.multiply.reduceat(safe, starts, axis=-1)
    zero_count = np.add.reduceat(zero.astype(edges.dtype), starts, axis=-1)
    g = np.take(grad_out, segments, axis=1)
    p = np.take(prod_nonzero, segments, axis=1)
    zc = np.take(zero_count, segments, axis=1)
    return np.where(zc == 0, g * p / safe, np.where((zc == 1) & zero, g * p, 0.0))


def gradient(
    tc: TensorizedCircuit,
    weights: WeightAssignment,
    log_domain: bool = False,
    epsilon: float = 0.0,
    seed: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Convenience wrapper: forward + backward; returns (outputs, input grads)."""
    if log_domain:
        trace = forward_log(tc, weights.to_log(), epsilon=epsilon)
    else:
        trace = forward_real(tc, weights)
    return trace.outputs, backward(tc, trace, seed)
