"""Replay a loaded layered program on JAX gather and segment-reduce primitives.

Forward evaluation is, per layer, a gather (``values[sources]``) followed by a
segment reduction over ``segments``: products on odd layers, sums on even
ones. The log domain composes the reduction from segment-max, shifted exp,
segment-sum, and log (the segment maximum is treated as a constant shift), so
the epsilon knob and the -inf conventions match the reference engine rather
than whatever a fused logsumexp would do.

Gradients come from ``jax.grad``. JAX cannot differentiate repeated-index
scatter multiplication, so the product reduction carries a custom VJP built
from the same native segment primitives, using the zero-safe sibling-product
rule: with no zero edge in a segment the adjoint is grad * product / edge,
with exactly one zero edge the sibling product flows to that edge alone, and
with two or more zeros nothing flows.
"""

from __future__ import annotations

from functools import partial

import jax
import jax.numpy as jnp
import numpy as np
from jax.ops import segment_max, segment_prod, segment_sum

from .loader import LayeredProgram

jax.config.update("jax_enable_x64", True)

REAL = "real"
LOG = "log"


@partial(jax.custom_vjp, nondiff_argnums=(2,))
def _segment_product(edges, segments, width):
    return segment_prod(edges, segments, num_segments=width)


def _segment_product_fwd(edges, segments, width):
    return _segment_product(edges, segments, width), (edges, segments)


def _segment_product_bwd(width, residual, grad_out):
    edges, segments = residual
    zero = edges == 0.0
    safe = jnp.where(zero, 1.0, edges)
    prod_nonzero = segment_prod(safe, segments, num_segments=width)
    zero_count = segment_sum(zero.astype(edges.dtype), segments, num_segments=width)
    scaled = (grad_out * prod_nonzero)[segments]
    zc = zero_count[segments]
    grad_edges = jnp.where(
        zc == 0, scaled / safe, jnp.where((zc == 1) & zero, scaled, 0.0)
    )
    return grad_edges, None


_segment_product.defvjp(_segment_product_fwd, _segment_product_bwd)


def _segment_logsumexp(edges, segments, width, epsilon):
    peak = jax.lax.stop_gradient(segment_max(edges, segments, num_segments=width))
    finite_peak = jnp.where(jnp.isneginf(peak), 0.0, peak)
    shifted = jnp.exp(edges - finite_peak[segments])
    total = segment_sum(shifted, segments, num_segments=width)
    result = jnp.log(total + epsilon) + finite_peak
    return jnp.where(jnp.isneginf(peak), -jnp.inf, result)


def _layer_values(program: LayeredProgram, values, domain: str, epsilon: float):
    # values travel as [width, batch]; segment ops reduce over the leading axis
    for layer in program.layers:
        edges = values[layer.sources]
        if layer.op == "prod":
            if domain == REAL:
                values = _segment_product(edges, layer.segments, layer.width)
            else:
                values = segment_sum(edges, layer.segments, num_segments=layer.width)
        else:
            if domain == REAL:
                values = segment_sum(edges, layer.segments, num_segments=layer.width)
            else:
                values = _segment_logsumexp(edges, layer.segments, layer.width, epsilon)
    return values


def _assemble(program: LayeredProgram, last, batch: int, domain: str):
    zero, one = (0.0, 1.0) if domain == REAL else (-jnp.inf, 0.0)
    columns = []
    next_root = iter(program.root_indices)
    for position in range(program.num_roots):
        if position in program.constant_roots:
            value = one if program.constant_roots[position] else zero
            columns.append(jnp.full((batch,), value, dtype=last.dtype))
        else:
            columns.append(last[next(next_root)])
    return jnp.stack(columns, axis=1)  # [batch, roots]


def forward(program: LayeredProgram, rows, domain: str = REAL, epsilon: float = 0.0):
    """Evaluate batched input rows [batch, num_inputs]; returns [batch, roots]."""
    rows = jnp.atleast_2d(jnp.asarray(rows, dtype=jnp.float64))
    if rows.shape[1] != program.num_inputs:
        raise ValueError(
            f"input rows have {rows.shape[1]} columns, program expects {program.num_inputs}"
        )
    if domain not in (REAL, LOG):
        raise ValueError(f"unknown domain {domain!r}")
    last = _layer_values(program, rows.T, domain, epsilon)
    return _assemble(program, last, rows.shape[0], domain)


def gradient(
    program: LayeredProgram,
    rows,
    domain: str = REAL,
    epsilon: float = 0.0,
    seed=None,
):
    """Input-slot gradients of ``sum_r seed[:, r] * root_r`` via jax.grad."""
    rows = jnp.atleast_2d(jnp.asarray(rows, dtype=jnp.float64))
    if seed is None:
        seed = jnp.ones((rows.shape[0], program.num_roots), dtype=rows.dtype)

    def objective(x):
        return jnp.sum(forward(program, x, domain, epsilon) * seed)

    return jax.grad(objective)(rows)


def decode_weights(payload, program: LayeredProgram) -> np.ndarray:
    """Weight-file JSON -> [batch, num_inputs]; same schema as the producer:
    ``{"p": {...}}`` per-variable probabilities (negative literal gets 1-p),
    ``{"w": {...}}`` per-literal values, or an array of such objects."""
    rows = payload if isinstance(payload, list) else [payload]
    if not rows:
        raise ValueError("weight file contains no rows")
    out = np.empty((len(rows), program.num_inputs), dtype=np.float64)
    for i, row in enumerate(rows):
        if not isinstance(row, dict) or len(row.keys() & {"p", "w"}) != 1:
            raise ValueError("each weight row must have exactly one of 'p' or 'w'")
        if "p" in row:
            prob = {int(k): float(v) for k, v in row["p"].items()}
            for lit, slot in program.input_map.items():
                var = abs(lit)
                if var not in prob:
                    raise ValueError(f"missing probability for variable {var}")
                out[i, slot] = prob[var] if lit > 0 else 1.0 - prob[var]
        else:
            per_lit = {int(k): float(v) for k, v in row["w"].items()}
            for lit, slot in program.input_map.items():
                if lit not in per_lit:
                    raise ValueError(f"missing weight for literal {lit}")
                out[i, slot] = per_lit[lit]
    return out


def dump_payload(outputs, grads=None) -> dict:
    """The producer's JSON dump schema: flat roots for a single row, nested
    otherwise; gradients always one row per batch element."""
    rows = np.asarray(outputs).tolist()
    payload = {"roots": rows[0] if len(rows) == 1 else rows}
    if grads is not None:
        payload["grad"] = np.asarray(grads).tolist()
    return payload
