"""Group circuit nodes into alternating product/sum layers with adjacent-layer edges.

Every node is assigned a height (leaves at 0, gates at one above their highest
child, bumped once more when the gate kind disagrees with the layer parity).
Edges that would skip layers are bridged with chains of single-child
pass-through nodes. Structurally identical nodes, including identical chains,
are merged through a Merkle-style digest with a structural-equality check on
every digest match, so a hash collision can never merge distinct nodes.

Layer parity is fixed: layer 1 holds products, layer 2 sums, and so on
alternating; layer 0 holds the inputs (one slot per used literal, ordered by
variable with the positive polarity first).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

from .circuit import (
    AND,
    CONST_KINDS,
    LEAF,
    OR,
    TRUE,
    Circuit,
    CircuitError,
    Literal,
    literal_order,
)

INPUT = "input"
PRODUCT = "prod"
SUM = "sum"

_MASK64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """64-bit avalanche finalizer (shift-xor-multiply), deterministic across platforms."""
    x &= _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


def _wrapping_add(a: int, b: int) -> int:
    return (a + b) & _MASK64


# Fixed per-op tags so a pass-through product and a pass-through sum over the
# same child can never share a digest.
_OP_TAGS = {
    INPUT: 0x9E3779B97F4A7C15,
    PRODUCT: 0xC2B2AE3D27D4EB4F,
    SUM: 0x165667B19E3779F9,
}


@dataclass(frozen=True)
class MerkleHasher:
    """Digest scheme for structural node identity.

    ``combine`` must be commutative and associative (addition by default,
    which unlike XOR does not cancel duplicated children). Digest equality is
    never trusted on its own; callers re-check structural equality on match.
    """

    mix: Callable[[int], int] = mix64
    combine: Callable[[int, int], int] = _wrapping_add

    def node_hash(self, op: str, child_hashes: Iterable[int]) -> int:
        acc = _OP_TAGS[op]
        for h in child_hashes:
            acc = self.combine(acc, self.mix(h))
        return self.mix(acc)

    def leaf_hash(self, lit: Literal) -> int:
        encoded = 2 * lit.variable + (0 if lit.positive else 1)
        return self.node_hash(INPUT, (encoded,))


DEFAULT_HASHER = MerkleHasher()


def node_hash(op: str, child_hashes: Iterable[int]) -> int:
    """Digest of a node from its op kind and the multiset of child digests."""
    return DEFAULT_HASHER.node_hash(op, child_hashes)


class LayeredNode(NamedTuple):
    op: str
    children: tuple[int, ...]  # indices into the previous layer, source order kept
    digest: int


@dataclass
class LayeredCircuit:
    """Circuit regrouped into layers; all edges connect adjacent layers.

    ``root_indices`` holds one final-layer index per non-constant source root,
    in addition order; roots that folded to a constant are listed in
    ``constant_roots`` by their global root position instead.
    """

    layers: list[list[LayeredNode]]
    input_map: dict[Literal, int]
    root_indices: list[int]
    constant_roots: dict[int, bool]
    num_vars: int

    @property
    def num_roots(self) -> int:
        return len(self.root_indices) + len(self.constant_roots)

    @property
    def num_inputs(self) -> int:
        return len(self.input_map)

    def layer_widths(self) -> list[int]:
        return [len(layer) for layer in self.layers]


def layer_op(layer: int) -> str:
    if layer == 0:
        return INPUT
    return PRODUCT if layer % 2 == 1 else SUM


def _gate_op(kind: str) -> str:
    return PRODUCT if kind == AND else SUM


class _LayerBuilder:
    """Hash-consed accumulator for one layer."""

    __slots__ = ("op", "nodes", "buckets")

    def __init__(self, op: str):
        self.op = op
        self.nodes: list[LayeredNode] = []
        self.buckets: dict[int, list[int]] = {}

    def intern(self, children: tuple[int, ...], digest: int) -> int:
        key = tuple(sorted(children))
        for pos in self.buckets.get(digest, ()):
            if tuple(sorted(self.nodes[pos].children)) == key:
                return pos
        pos = len(self.nodes)
        self.nodes.append(LayeredNode(self.op, children, digest))
        self.buckets.setdefault(digest, []).append(pos)
        return pos


def layerize(
    circuits: Sequence[Circuit],
    hasher: MerkleHasher = DEFAULT_HASHER,
) -> LayeredCircuit:
    """Merge one or more constant-folded circuits into a single LayeredCircuit.

    All roots end up in the final layer (shorter circuits are padded with
    pass-through chains), duplicate subcircuits are stored once, and node
    order within each layer is canonical: ascending digest, insertion order
    on ties.
    """
    if not circuits:
        raise CircuitError("layerize requires at least one circuit")

    # Root positions are global across circuits, in addition order.
    constant_roots: dict[int, bool] = {}
    pending: list[tuple[Circuit, list[int], list[tuple[int, int]]]] = []
    num_vars = 0
    position = 0
    literals: set[Literal] = set()
    for circuit in circuits:
        if not circuit.roots:
            raise CircuitError("circuit has no roots")
        num_vars = max(num_vars, circuit.num_vars)
        reachable = circuit.reachable_from_roots()
        root_positions = []
        for r in circuit.roots:
            kind = circuit.nodes[r].kind
            if kind in CONST_KINDS:
                constant_roots[position] = kind == TRUE
            else:
                root_positions.append((position, r))
            position += 1
        pending.append((circuit, reachable, root_positions))
        for nid in reachable:
            node = circuit.nodes[nid]
            if node.kind == LEAF:
                literals.add(node.literal)
            elif node.kind in CONST_KINDS and nid not in circuit.roots:
                raise CircuitError("internal constant node: run fold_constants first")

    ordered_literals = sorted(literals, key=literal_order)
    input_map = {lit: slot for slot, lit in enumerate(ordered_literals)}

    layers: list[_LayerBuilder] = [_LayerBuilder(INPUT)]
    for lit in ordered_literals:
        layers[0].nodes.append(LayeredNode(INPUT, (), hasher.leaf_hash(lit)))

    def builder(layer: int) -> _LayerBuilder:
        while len(layers) <= layer:
            layers.append(_LayerBuilder(layer_op(len(layers))))
        return layers[layer]

    def lift(layer: int, pos: int, target: int) -> int:
        # One pass-through per intermediate layer; hash-consing shares chains.
        while layer < target:
            digest = layers[layer].nodes[pos].digest
            layer += 1
            b = builder(layer)
            pos = b.intern((pos,), hasher.node_hash(b.op, (digest,)))
        return pos

    root_refs: list[tuple[int, int, int]] = []  # (global position, layer, pos)
    for circuit, reachable, root_positions in pending:
        placed: dict[int, tuple[int, int]] = {}
        for nid in reachable:
            node = circuit.nodes[nid]
            if node.kind == LEAF:
                placed[nid] = (0, input_map[node.literal])
                continue
            if node.kind in CONST_KINDS:
                continue  # constant roots bypass layer placement
            op = _gate_op(node.kind)
            height = 1 + max(placed[c][0] for c in node.children)
            if layer_op(height) != op:
                height += 1
            b = builder(height)
            kids = tuple(lift(*placed[c], height - 1) for c in node.children)
            digest = hasher.node_hash(op, (layers[height - 1].nodes[k].digest for k in kids))
            placed[nid] = (height, b.intern(kids, digest))
        for pos, r in root_positions:
            root_refs.append((pos, *placed[r]))

    if root_refs:
        top = max(layer for _, layer, _ in root_refs)
        root_refs = [(p, top, lift(layer, idx, top)) for p, layer, idx in root_refs]
    elif not constant_roots:
        raise CircuitError("no roots to layerize")

    # Canonical within-layer order: ascending digest, ties by insertion order.
    final_layers: list[list[LayeredNode]] = [layers[0].nodes]
    prev_map = list(range(len(layers[0].nodes)))
    for builder_l in layers[1:]:
        order = sorted(range(len(builder_l.nodes)), key=lambda i: (builder_l.nodes[i].digest, i))
        old_to_new = [0] * len(order)
        for new, old in enumerate(order):
            old_to_new[old] = new
        remapped = [
            LayeredNode(n.op, tuple(prev_map[c] for c in n.children), n.digest)
            for n in (builder_l.nodes[old] for old in order)
        ]
        final_layers.append(remapped)
        prev_map = old_to_new

    by_position = {p: prev_map[idx] for p, _, idx in root_refs}
    root_indices = [by_position[p] for p in sorted(by_position)]

    return LayeredCircuit(
        layers=final_layers,
        input_map=input_map,
        root_indices=root_indices,
        constant_roots=dict(sorted(constant_roots.items())),
        num_vars=num_vars,
    )


@dataclass
class LayerStats:
    nodes_total: int
    nodes_per_layer: list[int]
    edges_total: int
    edges_per_layer: list[int]
    sparsity: float | None
    sparsity_per_layer: list[float]

    def as_dict(self) -> dict:
        return {
            "nodes_total": self.nodes_total,
            "nodes_per_layer": self.nodes_per_layer,
            "edges_total": self.edges_total,
            "edges_per_layer": self.edges_per_layer,
            "sparsity": self.sparsity,
            "sparsity_per_layer": self.sparsity_per_layer,
        }


def stats(layered) -> LayerStats:
    """Node/edge counts plus sparsity: edges present over edges in a dense
    interconnection of consecutive layers. Accepts a LayeredCircuit or a
    TensorizedCircuit."""
    if isinstance(layered, LayeredCircuit):
        widths = layered.layer_widths()
        edges = [sum(len(n.children) for n in layer) for layer in layered.layers[1:]]
    else:
        widths = [layered.num_inputs] + [layer.width for layer in layered.layers]
        edges = [len(layer.sources) for layer in layered.layers]
    dense = [widths[l] * widths[l + 1] for l in range(len(widths) - 1)]
    total_dense = sum(dense)
    return LayerStats(
        nodes_total=sum(widths),
        nodes_per_layer=widths,
        edges_total=sum(edges),
        edges_per_layer=edges,
        sparsity=(sum(edges) / total_dense) if total_dense else None,
        sparsity_per_layer=[e / d for e, d in zip(edges, dense)],
    )
