"""Standalone .klay reader.

This package deliberately shares no code with the engine that produces the
files; the text format is its only contract. The structural checks mirror the
producer's reader: invalid files are rejected, never repaired.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KLAY_VERSION = 1


class KlayFormatError(ValueError):
    """Malformed or invariant-violating .klay content."""


@dataclass
class Layer:
    op: str  # "prod" | "sum"
    width: int
    sources: np.ndarray
    segments: np.ndarray


@dataclass
class LayeredProgram:
    num_inputs: int
    num_vars: int
    layers: list[Layer]
    input_map: dict[int, int]  # DIMACS-signed literal -> slot
    root_indices: list[int]
    constant_roots: dict[int, bool] = field(default_factory=dict)

    @property
    def num_roots(self) -> int:
        return len(self.root_indices) + len(self.constant_roots)

    def layer_widths(self) -> list[int]:
        return [layer.width for layer in self.layers]


def _expect(cond: bool, message: str) -> None:
    if not cond:
        raise KlayFormatError(message)


def _validate(program: LayeredProgram) -> None:
    slots = sorted(program.input_map.values())
    _expect(
        slots == list(range(program.num_inputs)),
        "input map does not cover slots 0..K-1 exactly once",
    )
    for lit in program.input_map:
        _expect(lit != 0 and abs(lit) <= program.num_vars, f"literal {lit} out of range")
    prev_width = program.num_inputs
    for l, layer in enumerate(program.layers, start=1):
        expected = "prod" if l % 2 == 1 else "sum"
        _expect(layer.op == expected, f"layer {l} op {layer.op!r}, expected {expected!r}")
        _expect(layer.width > 0, f"layer {l} has nonpositive width")
        _expect(len(layer.sources) == len(layer.segments), f"layer {l}: edge vectors differ")
        _expect(len(layer.sources) > 0, f"layer {l} has no edges")
        seg, src = layer.segments, layer.sources
        _expect(not np.any(np.diff(seg) < 0), f"layer {l}: segment ids not nondecreasing")
        _expect(
            seg[0] == 0 and seg[-1] == layer.width - 1 and len(np.unique(seg)) == layer.width,
            f"layer {l}: segment ids must cover 0..width-1",
        )
        _expect(
            src.min() >= 0 and src.max() < prev_width,
            f"layer {l}: source index out of range",
        )
        _expect(
            len(np.unique(src)) == prev_width,
            f"layer {l}: some previous-layer node is never read",
        )
        prev_width = layer.width
    last_width = program.layers[-1].width if program.layers else program.num_inputs
    for r in program.root_indices:
        _expect(0 <= r < last_width, f"root index {r} outside final layer")
    for p in program.constant_roots:
        _expect(0 <= p < program.num_roots, f"constant root position {p} out of range")


def load(path) -> LayeredProgram:
    """Parse and validate the .klay file at ``path``."""
    with open(path, "r") as fh:
        return loads(fh.read())


def loads(text) -> LayeredProgram:
    """Parse and validate .klay content given as str or bytes."""
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

    def ints(tokens, context):
        try:
            return [int(t) for t in tokens]
        except ValueError:
            raise KlayFormatError(f"non-integer token in {context}") from None

    head = take("klay")
    _expect(len(head) == 2 and head[1] == str(KLAY_VERSION), "unsupported format version")
    num_inputs = ints(take("inputs")[1:], "inputs")[0]
    num_vars = ints(take("vars")[1:], "vars")[0]
    roots = ints(take("roots")[1:], "roots")

    toks = next(it, None)
    constant_roots: dict[int, bool] = {}
    if toks is not None and toks[0] == "constants":
        for entry in toks[1:]:
            pos_s, _, val_s = entry.partition(":")
            _expect(val_s in ("0", "1"), f"malformed constants entry {entry!r}")
            pos = ints([pos_s], "constants")[0]
            _expect(pos not in constant_roots, f"duplicate constant position {pos}")
            constant_roots[pos] = val_s == "1"
        toks = next(it, None)

    _expect(toks is not None and toks[0] == "inputmap", "missing inputmap line")
    input_map: dict[int, int] = {}
    for entry in toks[1:]:
        lit_s, _, slot_s = entry.partition(":")
        lit, slot = ints([lit_s, slot_s], "inputmap")
        _expect(lit not in input_map, f"duplicate literal {lit} in inputmap")
        input_map[lit] = slot

    layers: list[Layer] = []
    toks = next(it, None)
    while toks is not None:
        _expect(toks[0] == "layer" and len(toks) == 5, f"expected layer header, got {toks!r}")
        index, op = ints([toks[1]], "layer header")[0], toks[2]
        width, edges = ints(toks[3:5], "layer header")
        _expect(index == len(layers) + 1, f"layer {index} out of sequence")
        _expect(op in ("prod", "sum"), f"unknown layer op {op!r}")
        s_line = take("S")
        r_line = take("R")
        _expect(
            len(s_line) - 1 == edges and len(r_line) - 1 == edges,
            f"layer {index}: edge count mismatch with header",
        )
        layers.append(
            Layer(
                op=op,
                width=width,
                sources=np.array(ints(s_line[1:], "S line"), dtype=np.int64),
                segments=np.array(ints(r_line[1:], "R line"), dtype=np.int64),
            )
        )
        toks = next(it, None)

    program = LayeredProgram(
        num_inputs=num_inputs,
        num_vars=num_vars,
        layers=layers,
        input_map=input_map,
        root_indices=roots,
        constant_roots=constant_roots,
    )
    _validate(program)
    return program
