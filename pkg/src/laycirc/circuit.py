"""Core in-memory circuit representation: a multi-rooted DAG of literal/AND/OR nodes.

Node ids are dense integers in insertion order, which doubles as a topological
order (every child id is strictly smaller than its parent's id). The True/False
kinds exist only transiently between parsing and constant folding, except when
an entire root folds down to a constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, NamedTuple

LEAF = "leaf"
AND = "and"
OR = "or"
TRUE = "true"
FALSE = "false"

GATE_KINDS = frozenset({AND, OR})
CONST_KINDS = frozenset({TRUE, FALSE})
NODE_KINDS = frozenset({LEAF}) | GATE_KINDS | CONST_KINDS


class CircuitError(ValueError):
    """Malformed circuit construction, lookup, or evaluation."""


@dataclass(frozen=True)
class Literal:
    """A propositional variable (1-based) or its negation."""

    variable: int
    positive: bool = True

    def __post_init__(self) -> None:
        if self.variable < 1:
            raise CircuitError(f"variable index must be >= 1, got {self.variable}")

    def __neg__(self) -> "Literal":
        return Literal(self.variable, not self.positive)

    @classmethod
    def from_dimacs(cls, code: int) -> "Literal":
        if code == 0:
            raise CircuitError("0 is not a DIMACS literal")
        return cls(abs(code), code > 0)

    def to_dimacs(self) -> int:
        return self.variable if self.positive else -self.variable

    def __str__(self) -> str:
        return str(self.to_dimacs())


def literal_order(lit: Literal) -> tuple[int, bool]:
    """Canonical sort key: by variable, positive polarity before negative."""
    return (lit.variable, not lit.positive)


class Node(NamedTuple):
    kind: str
    literal: Literal | None
    children: tuple[int, ...]


class Circuit:
    """Append-only DAG of circuit nodes with one or more roots.

    Treat instances as immutable once fully built; `add_node` may only append.
    """

    def __init__(self, num_vars: int = 0):
        self.nodes: list[Node] = []
        self.roots: list[int] = []
        self.num_vars = num_vars

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.roots == other.roots
            and self.num_vars == other.num_vars
        )

    def __repr__(self) -> str:
        return f"Circuit(nodes={len(self.nodes)}, roots={self.roots}, num_vars={self.num_vars})"

    def add_node(
        self,
        kind: str,
        children: Iterable[int] = (),
        literal: Literal | None = None,
    ) -> int:
        """Append a node and return its id (strictly greater than all children)."""
        if kind not in NODE_KINDS:
            raise CircuitError(f"unknown node kind {kind!r}")
        kids = tuple(children)
        if kind in GATE_KINDS:
            if literal is not None:
                raise CircuitError("gate nodes carry no literal")
        else:
            if kids:
                raise CircuitError(f"{kind} node cannot have children")
            if kind == LEAF:
                if literal is None:
                    raise CircuitError("leaf node requires a literal")
                self.num_vars = max(self.num_vars, literal.variable)
            elif literal is not None:
                raise CircuitError("constant nodes carry no literal")
        nid = len(self.nodes)
        for c in kids:
            if not 0 <= c < nid:
                raise CircuitError(f"child id {c} does not exist (adding node {nid})")
        self.nodes.append(Node(kind, literal, kids))
        return nid

    def add_leaf(self, lit: Literal) -> int:
        return self.add_node(LEAF, literal=lit)

    def add_and(self, children: Iterable[int]) -> int:
        return self.add_node(AND, children)

    def add_or(self, children: Iterable[int]) -> int:
        return self.add_node(OR, children)

    def add_true(self) -> int:
        return self.add_node(TRUE)

    def add_false(self) -> int:
        return self.add_node(FALSE)

    def set_roots(self, roots: Iterable[int]) -> None:
        roots = list(roots)
        for r in roots:
            if not 0 <= r < len(self.nodes):
                raise CircuitError(f"root id {r} does not exist")
        self.roots = roots

    def reachable_from_roots(self) -> list[int]:
        """Ids of nodes reachable from any root, in ascending (topological) order."""
        seen = set()
        stack = list(self.roots)
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            stack.extend(self.nodes[nid].children)
        return sorted(seen)

    def used_literals(self) -> set[Literal]:
        lits = set()
        for nid in self.reachable_from_roots():
            node = self.nodes[nid]
            if node.kind == LEAF:
                lits.add(node.literal)
        return lits

    def validate(self) -> None:
        """Check the structural invariants; raises CircuitError on violation."""
        if not self.roots:
            raise CircuitError("circuit has no roots")
        for nid, node in enumerate(self.nodes):
            for c in node.children:
                if not 0 <= c < nid:
                    raise CircuitError(f"node {nid} references invalid child {c}")
            if node.kind == LEAF and node.literal is None:
                raise CircuitError(f"leaf node {nid} has no literal")
            if node.kind == LEAF and node.literal.variable > self.num_vars:
                raise CircuitError(f"leaf node {nid} exceeds num_vars")
        for r in self.roots:
            if not 0 <= r < len(self.nodes):
                raise CircuitError(f"invalid root id {r}")


def fold_constants(circuit: Circuit) -> Circuit:
    """Remove True/False nodes by algebraic simplification.

    And(x, True) -> x; And(x, False) -> False; Or duals. Gates left with a
    single child collapse to that child; gates left with no children become
    the neutral constant (empty And is True, empty Or is False). Only a root
    may remain constant, in which case it is kept as a single constant node.
    The result contains only nodes reachable from the roots.
    """
    # phase 1: resolve every node to a constant marker, an alias of another
    # node, or a kept gate/leaf with folded children (still old ids)
    resolved: list = [None] * len(circuit.nodes)  # TRUE | FALSE | old id
    kept_children: dict[int, tuple[str, tuple[int, ...]]] = {}
    for nid, node in enumerate(circuit.nodes):
        if node.kind == LEAF:
            resolved[nid] = nid
            kept_children[nid] = (LEAF, ())
        elif node.kind in CONST_KINDS:
            resolved[nid] = node.kind
        else:
            absorbing = FALSE if node.kind == AND else TRUE
            neutral = TRUE if node.kind == AND else FALSE
            kids: list[int] = []
            dead = False
            for c in node.children:
                fc = resolved[c]
                if fc == absorbing:
                    dead = True
                    break
                if fc == neutral:
                    continue
                kids.append(fc)
            if dead:
                resolved[nid] = absorbing
            elif not kids:
                resolved[nid] = neutral
            elif len(kids) == 1:
                resolved[nid] = kids[0]
            else:
                resolved[nid] = nid
                kept_children[nid] = (node.kind, tuple(kids))

    # phase 2: emit only nodes reachable from the folded roots
    root_targets = [resolved[r] for r in circuit.roots]
    stack = [t for t in root_targets if t not in CONST_KINDS]
    reachable: set[int] = set()
    while stack:
        nid = stack.pop()
        if nid in reachable:
            continue
        reachable.add(nid)
        stack.extend(kept_children[nid][1])

    out = Circuit(num_vars=circuit.num_vars)
    new_id: dict[int, int] = {}
    for nid in sorted(reachable):
        kind, kids = kept_children[nid]
        if kind == LEAF:
            new_id[nid] = out.add_leaf(circuit.nodes[nid].literal)
        else:
            new_id[nid] = out.add_node(kind, [new_id[c] for c in kids])

    consts: dict[str, int] = {}
    new_roots = []
    for target in root_targets:
        if target in CONST_KINDS:
            if target not in consts:
                consts[target] = out.add_node(target)
            new_roots.append(consts[target])
        else:
            new_roots.append(new_id[target])
    out.set_roots(new_roots)
    return out


def boolean_eval(circuit: Circuit, assignment: Mapping[int, bool]) -> list[bool]:
    """Evaluate each root under a variable->bool assignment by post-order traversal."""
    values: list[bool] = []
    for node in circuit.nodes:
        if node.kind == LEAF:
            var = node.literal.variable
            if var not in assignment:
                raise CircuitError(f"assignment is missing variable {var}")
            values.append(assignment[var] if node.literal.positive else not assignment[var])
        elif node.kind == AND:
            values.append(all(values[c] for c in node.children))
        elif node.kind == OR:
            values.append(any(values[c] for c in node.children))
        elif node.kind == TRUE:
            values.append(True)
        else:
            values.append(False)
    return [values[r] for r in circuit.roots]


def iter_assignments(num_vars: int) -> Iterator[dict[int, bool]]:
    """All 2^n assignments over variables 1..num_vars, in binary counting order."""
    for bits in range(1 << num_vars):
        yield {v: bool((bits >> (v - 1)) & 1) for v in range(1, num_vars + 1)}
