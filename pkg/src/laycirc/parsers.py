"""Readers for external circuit and CNF file formats.

Supported formats, all line-oriented ASCII (whitespace = any run of spaces/tabs):

* c2d NNF archive format: header ``nnf V E n``, then one node per line
  (``L lit``, ``A c i1..ic``, ``O j c i1..ic``); the last line is the root.
* d4 output format: node declarations ``o/a/t/f id 0`` plus edge lines
  ``parent child lit.. 0`` where the literals are conjoined onto the child.
* sdd library archive format: header ``sdd N``, then ``T id``/``F id``,
  ``L id vtree lit``, ``D id vtree c p1 s1 .. pc sc``.
* DIMACS CNF.

d-DNNF structural properties (determinism, decomposability) are trusted from
the compiler, never verified here.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .circuit import AND, FALSE, OR, TRUE, Circuit, Literal, fold_constants


class ParseError(ValueError):
    """Malformed input file."""


@dataclass
class CnfFormula:
    num_vars: int
    clauses: list[list[Literal]] = field(default_factory=list)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        for clause in self.clauses:
            lines.append(" ".join(str(lit.to_dimacs()) for lit in clause) + " 0")
        return "\n".join(lines) + "\n"


def _as_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("ascii")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("ascii") if isinstance(data, bytes) else data


def _int(token: str, context: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"expected integer, got {token!r} in {context}") from None


def parse_c2d_nnf(source) -> Circuit:
    """Parse the c2d archive NNF format into a single-rooted circuit.

    ``A 0`` denotes the constant True and ``O j 0`` the constant False; both
    are folded away afterwards. A V/E count mismatch against the header is
    tolerated with a warning since such files exist in the wild.
    """
    lines = [ln.split() for ln in _as_text(source).splitlines() if ln.split()]
    if not lines or lines[0][0] != "nnf" or len(lines[0]) != 4:
        raise ParseError("c2d: missing or malformed 'nnf V E n' header")
    decl_nodes = _int(lines[0][1], "header")
    decl_edges = _int(lines[0][2], "header")
    num_vars = _int(lines[0][3], "header")

    circuit = Circuit(num_vars=num_vars)
    ids: list[int] = []  # line order -> circuit node id
    edges = 0
    for lineno, toks in enumerate(lines[1:]):
        tag = toks[0]
        if tag == "L":
            if len(toks) != 2:
                raise ParseError(f"c2d: malformed literal line {toks}")
            code = _int(toks[1], "L line")
            if code == 0 or abs(code) > num_vars:
                raise ParseError(f"c2d: literal {code} out of range 1..{num_vars}")
            ids.append(circuit.add_leaf(Literal.from_dimacs(code)))
        elif tag in ("A", "O"):
            skip = 1 if tag == "A" else 2  # O lines carry a decision var, parsed and discarded
            if len(toks) < skip + 1:
                raise ParseError(f"c2d: malformed {tag} line {toks}")
            count = _int(toks[skip], f"{tag} line")
            kids_toks = toks[skip + 1 :]
            if len(kids_toks) != count:
                raise ParseError(f"c2d: {tag} line declares {count} children, has {len(kids_toks)}")
            if count == 0:
                ids.append(circuit.add_true() if tag == "A" else circuit.add_false())
                continue
            kids = []
            for t in kids_toks:
                ref = _int(t, f"{tag} line")
                if not 0 <= ref < lineno:
                    raise ParseError(f"c2d: node line {lineno} references undeclared node {ref}")
                kids.append(ids[ref])
            edges += count
            ids.append(circuit.add_node(AND if tag == "A" else OR, kids))
        else:
            raise ParseError(f"c2d: unknown line tag {tag!r}")

    if not ids:
        raise ParseError("c2d: file declares no nodes")
    if len(ids) != decl_nodes or edges != decl_edges:
        warnings.warn(
            f"c2d: header declares {decl_nodes} nodes/{decl_edges} edges, "
            f"file contains {len(ids)}/{edges}",
            stacklevel=2,
        )
    circuit.set_roots([ids[-1]])
    return fold_constants(circuit)


def parse_d4_nnf(source) -> Circuit:
    """Parse the d4 output format; node 1 is the root.

    Edge lines ``i j l1..lk 0`` attach to node i the child "node j conjoined
    with literals l1..lk"; the conjunction becomes an explicit And node so
    downstream passes only see the plain node grammar.
    """
    kinds: dict[int, str] = {}
    children: dict[int, list[tuple[int, tuple[int, ...]]]] = {}
    num_vars = 0
    for raw in _as_text(source).splitlines():
        toks = raw.split()
        if not toks or toks[0] == "c":
            continue
        if toks[0] in ("o", "a", "t", "f"):
            if len(toks) != 3 or toks[2] != "0":
                raise ParseError(f"d4: malformed node declaration {raw!r}")
            nid = _int(toks[1], "node declaration")
            if nid in kinds:
                raise ParseError(f"d4: duplicate declaration of node {nid}")
            kinds[nid] = toks[0]
            children[nid] = []
        else:
            if toks[-1] != "0" or len(toks) < 3:
                raise ParseError(f"d4: malformed edge line {raw!r}")
            src = _int(toks[0], "edge")
            dst = _int(toks[1], "edge")
            for ref in (src, dst):
                if ref not in kinds:
                    raise ParseError(f"d4: edge references undeclared node {ref}")
            lits = tuple(_int(t, "edge literal") for t in toks[2:-1])
            if any(l == 0 for l in lits):
                raise ParseError(f"d4: literal 0 in edge line {raw!r}")
            num_vars = max(num_vars, *(abs(l) for l in lits)) if lits else num_vars
            children[src].append((dst, lits))

    if 1 not in kinds:
        raise ParseError("d4: no root node (id 1) declared")

    circuit = Circuit(num_vars=num_vars)
    leaf_cache: dict[int, int] = {}

    def leaf(code: int) -> int:
        if code not in leaf_cache:
            leaf_cache[code] = circuit.add_leaf(Literal.from_dimacs(code))
        return leaf_cache[code]

    built: dict[int, int] = {}

    def build(nid: int) -> int:
        if nid in built:
            return built[nid]
        kind = kinds[nid]
        if kind == "t":
            out = circuit.add_true()
        elif kind == "f":
            out = circuit.add_false()
        else:
            kids = []
            for dst, lits in children[nid]:
                child = build(dst)
                if lits:
                    child = circuit.add_and([*(leaf(l) for l in lits), child])
                kids.append(child)
            if not kids:
                # edge-less gates follow the c2d convention for constants
                out = circuit.add_true() if kind == "a" else circuit.add_false()
            else:
                out = circuit.add_node(AND if kind == "a" else OR, kids)
        built[nid] = out
        return out

    circuit.set_roots([build(1)])
    return fold_constants(circuit)


def parse_sdd(source) -> Circuit:
    """Parse the sdd library archive format.

    Each decision node becomes an Or over And(prime, sub) pairs. The root is
    the last declared node. Elements with a constant-False sub are removed by
    constant folding, which leaves the computed value unchanged.
    """
    text = _as_text(source)
    circuit = Circuit()
    ids: dict[int, int] = {}
    saw_header = False
    last_declared: int | None = None

    def ref(token: str) -> int:
        sid = _int(token, "sdd element")
        if sid not in ids:
            raise ParseError(f"sdd: reference to undeclared node {sid}")
        return ids[sid]

    for raw in text.splitlines():
        toks = raw.split()
        if not toks or toks[0] == "c":
            continue
        tag = toks[0]
        if tag == "sdd":
            if len(toks) != 2:
                raise ParseError("sdd: malformed header")
            saw_header = True
            continue
        if not saw_header:
            raise ParseError("sdd: missing 'sdd N' header")
        if tag in ("T", "F"):
            if len(toks) != 2:
                raise ParseError(f"sdd: malformed constant line {raw!r}")
            sid = _int(toks[1], "constant")
            if sid in ids:
                raise ParseError(f"sdd: duplicate node id {sid}")
            ids[sid] = circuit.add_true() if tag == "T" else circuit.add_false()
        elif tag == "L":
            if len(toks) != 4:
                raise ParseError(f"sdd: malformed literal line {raw!r}")
            sid = _int(toks[1], "literal node")
            code = _int(toks[3], "literal")
            if sid in ids:
                raise ParseError(f"sdd: duplicate node id {sid}")
            ids[sid] = circuit.add_leaf(Literal.from_dimacs(code))
        elif tag == "D":
            if len(toks) < 4:
                raise ParseError(f"sdd: malformed decision line {raw!r}")
            sid = _int(toks[1], "decision node")
            count = _int(toks[3], "element count")
            pairs = toks[4:]
            if len(pairs) != 2 * count:
                raise ParseError(
                    f"sdd: decision node {sid} declares {count} elements, has {len(pairs) // 2}"
                )
            if sid in ids:
                raise ParseError(f"sdd: duplicate node id {sid}")
            elements = [
                circuit.add_and([ref(pairs[2 * k]), ref(pairs[2 * k + 1])])
                for k in range(count)
            ]
            ids[sid] = circuit.add_or(elements)
        else:
            raise ParseError(f"sdd: unknown line tag {tag!r}")
        last_declared = ids[_int(toks[1], "node id")]

    if last_declared is None:
        raise ParseError("sdd: file declares no nodes")
    circuit.set_roots([last_declared])
    return fold_constants(circuit)


def parse_dimacs(source) -> CnfFormula:
    """Parse DIMACS CNF; clauses are 0-terminated runs of signed integers."""
    num_vars = None
    num_clauses = None
    clauses: list[list[Literal]] = []
    current: list[Literal] = []
    for raw in _as_text(source).splitlines():
        toks = raw.split()
        if not toks or toks[0] == "c":
            continue
        if toks[0] == "p":
            if len(toks) != 4 or toks[1] != "cnf":
                raise ParseError("dimacs: malformed 'p cnf V C' header")
            num_vars = _int(toks[2], "header")
            num_clauses = _int(toks[3], "header")
            continue
        if num_vars is None:
            raise ParseError("dimacs: clause before 'p cnf' header")
        for t in toks:
            code = _int(t, "clause")
            if code == 0:
                if not current:
                    raise ParseError("dimacs: empty clause")
                clauses.append(current)
                current = []
            else:
                if abs(code) > num_vars:
                    raise ParseError(f"dimacs: literal {code} out of range 1..{num_vars}")
                current.append(Literal.from_dimacs(code))
    if num_vars is None:
        raise ParseError("dimacs: missing 'p cnf' header")
    if current:
        raise ParseError("dimacs: unterminated final clause")
    if num_clauses is not None and len(clauses) != num_clauses:
        warnings.warn(
            f"dimacs: header declares {num_clauses} clauses, file contains {len(clauses)}",
            stacklevel=2,
        )
    return CnfFormula(num_vars=num_vars, clauses=clauses)


def sniff_format(text: str, filename: str = "") -> str:
    """Guess the circuit format from the filename extension, then content."""
    if filename.endswith(".sdd"):
        return "sdd"
    if filename.endswith(".cnf"):
        return "dimacs"
    for raw in text.splitlines():
        toks = raw.split()
        if not toks or toks[0] == "c":
            continue
        if toks[0] == "nnf":
            return "c2d"
        if toks[0] == "sdd":
            return "sdd"
        if toks[0] == "p":
            return "dimacs"
        return "d4"
    raise ParseError("cannot sniff format of empty file")


_CIRCUIT_PARSERS = {"c2d": parse_c2d_nnf, "d4": parse_d4_nnf, "sdd": parse_sdd}


def parse_circuit(source, fmt: str = "auto", filename: str = "") -> Circuit:
    """Parse a circuit file in c2d/d4/sdd format, auto-sniffing by default."""
    text = _as_text(source)
    if fmt == "auto":
        fmt = sniff_format(text, filename)
    if fmt not in _CIRCUIT_PARSERS:
        raise ParseError(f"unknown circuit format {fmt!r}")
    return _CIRCUIT_PARSERS[fmt](text)
