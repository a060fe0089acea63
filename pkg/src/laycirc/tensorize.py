"""Flatten a LayeredCircuit into per-layer index vectors, and (de)serialize them.

Each gate layer is characterized by two equally long integer vectors: for
every edge between consecutive layers, ``sources`` holds the child's index in
the previous layer (gather indices) and ``segments`` holds the parent's index
in the current layer (segment-reduce ids, nondecreasing because edges are
emitted parent by parent). Together with the literal-to-slot input map these
vectors fully describe the circuit, so evaluation needs no linked nodes.

The on-disk ``.klay`` format is line-oriented ASCII::

    klay 1
    inputs K
    vars V
    roots r1 r2 ...
    constants p1:b1 ...      (only when some root folded to a constant)
    inputmap lit:slot ...    (DIMACS-signed literals)
    layer l OP width E       (OP is 'prod' or 'sum'; then the two index lines)
    S i1 ... iE
    R j1 ... jE

Readers must reject files violating the structural invariants, never repair
them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .circuit import Literal
from .layerize import PRODUCT, SUM, LayeredCircuit

KLAY_VERSION = 1


class KlayFormatError(ValueError):
    """Malformed or invariant-violating .klay content."""


@dataclass
class TensorLayer:
    op: str  # "prod" | "sum"
    width: int
    sources: np.ndarray  # edge gather indices into the previous layer
    segments: np.ndarray  # nondecreasing parent ids, one per edge

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TensorLayer):
            return NotImplemented
        return (
            self.op == other.op
            and self.width == other.width
            and np.array_equal(self.sources, other.sources)
            and np.array_equal(self.segments, other.segments)
        )

    @property
    def num_edges(self) -> int:
        return len(self.sources)


@dataclass
class TensorizedCircuit:
    num_inputs: int
    num_vars: int
    layers: list[TensorLayer]
    input_map: dict[Literal, int]
    root_indices: list[int]
    constant_roots: dict[int, bool] = field(default_factory=dict)

    @property
    def num_roots(self) -> int:
        return len(self.root_indices) + len(self.constant_roots)

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TensorizedCircuit):
            return NotImplemented
        return (
            self.num_inputs == other.num_inputs
            and self.num_vars == other.num_vars
            and self.layers == other.layers
            and self.input_map == other.input_map
            and self.root_indices == other.root_indices
            and self.constant_roots == other.constant_roots
        )

    def validate(self) -> None:
        """Check all structural invariants; raises KlayFormatError on violation."""
        if self.num_inputs < 0 or self.num_vars < 0:
            raise KlayFormatError("negative input or variable count")
        slots = sorted(self.input_map.values())
        if slots != list(range(self.num_inputs)):
            raise KlayFormatError("input map does not cover slots 0..K-1 exactly once")
        for lit in self.input_map:
            if lit.variable > self.num_vars:
                raise KlayFormatError(f"input literal {lit} exceeds declared vars")
        prev_width = self.num_inputs
        for l, layer in enumerate(self.layers, start=1):
            expected_op = PRODUCT if l % 2 == 1 else SUM
            if layer.op != expected_op:
                raise KlayFormatError(f"layer {l} op {layer.op!r}, expected {expected_op!r}")
            if layer.width <= 0:
                raise KlayFormatError(f"layer {l} has nonpositive width")
            if len(layer.sources) != len(layer.segments):
                raise KlayFormatError(f"layer {l}: edge vectors differ in length")
            if len(layer.sources) == 0:
                raise KlayFormatError(f"layer {l} has no edges")
            seg = np.asarray(layer.segments)
            src = np.asarray(layer.sources)
            if np.any(np.diff(seg) < 0):
                raise KlayFormatError(f"layer {l}: aggregation indices not nondecreasing")
            if seg[0] != 0 or seg[-1] != layer.width - 1 or len(np.unique(seg)) != layer.width:
                raise KlayFormatError(f"layer {l}: aggregation indices must cover 0..width-1")
            if src.min() < 0 or src.max() >= prev_width:
                raise KlayFormatError(f"layer {l}: edge index out of range")
            if len(np.unique(src)) != prev_width:
                raise KlayFormatError(f"layer {l}: some previous-layer node is never read")
            prev_width = layer.width
        last_width = self.layers[-1].width if self.layers else self.num_inputs
        for r in self.root_indices:
            if not 0 <= r < last_width:
                raise KlayFormatError(f"root index {r} outside final layer")
        positions = set(self.constant_roots)
        if positions and (min(positions) < 0 or max(positions) >= self.num_roots):
            raise KlayFormatError("constant root position out of range")


def tensorize(
    layered: LayeredCircuit,
    layer_orders: Mapping[int, Sequence[int]] | None = None,
) -> TensorizedCircuit:
    """Emit the per-layer index vectors for a LayeredCircuit.

    ``layer_orders`` optionally overrides the canonical within-layer node
    order for gate layers: ``layer_orders[l]`` lists, for each new position,
    the old node index it takes (used to pin a specific published ordering in
    golden tests). All index vectors and root indices are remapped
    accordingly.
    """
    orders = dict(layer_orders or {})
    # old index -> new index, per layer; layer 0 is never permuted.
    remap: list[list[int]] = [list(range(len(layered.layers[0])))]
    for l in range(1, len(layered.layers)):
        n = len(layered.layers[l])
        if l in orders:
            perm = list(orders.pop(l))
            if sorted(perm) != list(range(n)):
                raise ValueError(f"layer {l} order is not a permutation of 0..{n - 1}")
        else:
            perm = list(range(n))
        old_to_new = [0] * n
        for new, old in enumerate(perm):
            old_to_new[old] = new
        remap.append(old_to_new)
    if orders:
        raise ValueError(f"layer order given for nonexistent layers {sorted(orders)}")

    layers: list[TensorLayer] = []
    for l in range(1, len(layered.layers)):
        nodes = layered.layers[l]
        order = sorted(range(len(nodes)), key=remap[l].__getitem__)
        sources: list[int] = []
        segments: list[int] = []
        for old in order:
            for child in nodes[old].children:
                segments.append(remap[l][old])
                sources.append(remap[l - 1][child])
        layers.append(
            TensorLayer(
                op=nodes[0].op,
                width=len(nodes),
                sources=np.asarray(sources, dtype=np.int64),
                segments=np.asarray(segments, dtype=np.int64),
            )
        )

    last = remap[-1]
    tc = TensorizedCircuit(
        num_inputs=layered.num_inputs,
        num_vars=layered.num_vars,
        layers=layers,
        input_map=dict(layered.input_map),
        root_indices=[last[r] for r in layered.root_indices],
        constant_roots=dict(layered.constant_roots),
    )
    tc.validate()
    return tc


def write_klay(tc: TensorizedCircuit, sink) -> None:
    """Serialize to the .klay text format (see module docstring)."""
    tc.validate()
    lines = [f"klay {KLAY_VERSION}", f"inputs {tc.num_inputs}", f"vars {tc.num_vars}"]
    lines.append("roots " + " ".join(str(r) for r in tc.root_indices))
    if tc.constant_roots:
        lines.append(
            "constants "
            + " ".join(f"{p}:{int(b)}" for p, b in sorted(tc.constant_roots.items()))
        )
    by_slot = sorted(tc.input_map.items(), key=lambda kv: kv[1])
    lines.append("inputmap " + " ".join(f"{lit.to_dimacs()}:{slot}" for lit, slot in by_slot))
    for l, layer in enumerate(tc.layers, start=1):
        lines.append(f"layer {l} {layer.op} {layer.width} {layer.num_edges}")
        lines.append("S " + " ".join(str(int(i)) for i in layer.sources))
        lines.append("R " + " ".join(str(int(i)) for i in layer.segments))
    text = "\n".join(lines) + "\n"
    try:
        sink.write(text)
    except TypeError:  # binary stream
        sink.write(text.encode("ascii"))


def _expect(cond: bool, message: str) -> None:
    if not cond:
        raise KlayFormatError(message)


def read_klay(source) -> TensorizedCircuit:
    """Parse and validate a .klay file; invalid content is rejected, not repaired."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = source
    if isinstance(text, bytes):
        text = text.decode("ascii")
    lines = [ln.split() for ln in text.splitlines() if ln.split()]
    _expect(bool(lines), "empty file")
    it = iter(lines)

    def take(expected: str) -> list[str]:
        toks = next(it, None)
        _expect(toks is not None, f"unexpected end of file, wanted {expected!r}")
        _expect(toks[0] == expected, f"expected {expected!r} line, got {toks[0]!r}")
        return toks

    head = take("klay")
    _expect(len(head) == 2 and head[1].isdigit(), "malformed version header")
    _expect(int(head[1]) == KLAY_VERSION, f"unsupported format version {head[1]}")
    inputs = take("inputs")
    _expect(len(inputs) == 2, "malformed inputs line")
    num_inputs = int(inputs[1])
    vars_line = take("vars")
    _expect(len(vars_line) == 2, "malformed vars line")
    num_vars = int(vars_line[1])
    roots = [int(t) for t in take("roots")[1:]]

    toks = next(it, None)
    constant_roots: dict[int, bool] = {}
    if toks is not None and toks[0] == "constants":
        for entry in toks[1:]:
            pos_s, _, val_s = entry.partition(":")
            _expect(val_s in ("0", "1"), f"malformed constants entry {entry!r}")
            pos = int(pos_s)
            _expect(pos not in constant_roots, f"duplicate constant root position {pos}")
            constant_roots[pos] = val_s == "1"
        toks = next(it, None)

    _expect(toks is not None and toks[0] == "inputmap", "missing inputmap line")
    input_map: dict[Literal, int] = {}
    for entry in toks[1:]:
        lit_s, _, slot_s = entry.partition(":")
        try:
            lit = Literal.from_dimacs(int(lit_s))
        except ValueError as exc:
            raise KlayFormatError(f"malformed inputmap entry {entry!r}") from exc
        _expect(lit not in input_map, f"duplicate literal in inputmap: {entry!r}")
        input_map[lit] = int(slot_s)

    layers: list[TensorLayer] = []
    toks = next(it, None)
    while toks is not None:
        _expect(toks[0] == "layer" and len(toks) == 5, f"expected layer header, got {toks!r}")
        index, op, width, edges = int(toks[1]), toks[2], int(toks[3]), int(toks[4])
        _expect(index == len(layers) + 1, f"layer {index} out of sequence")
        _expect(op in (PRODUCT, SUM), f"unknown layer op {op!r}")
        s_line = take("S")
        r_line = take("R")
        _expect(
            len(s_line) - 1 == edges and len(r_line) - 1 == edges,
            f"layer {index}: edge count mismatch with header",
        )
        layers.append(
            TensorLayer(
                op=op,
                width=width,
                sources=np.array([int(t) for t in s_line[1:]], dtype=np.int64),
                segments=np.array([int(t) for t in r_line[1:]], dtype=np.int64),
            )
        )
        toks = next(it, None)

    tc = TensorizedCircuit(
        num_inputs=num_inputs,
        num_vars=num_vars,
        layers=layers,
        input_map=input_map,
        root_indices=roots,
        constant_roots=constant_roots,
    )
    try:
        tc.validate()
    except KlayFormatError:
        raise
    except Exception as exc:  # malformed ints etc. surface as format errors
        raise KlayFormatError(str(exc)) from exc
    return tc
