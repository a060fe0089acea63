"""Bundled CNF -> d-DNNF compiler via Shannon expansion.

This is the fallback used when no external knowledge compiler is installed:
unit propagation, connected-component decomposition, and caching of residual
subformulas yield a deterministic decomposable circuit. By default the output
is also smooth (every disjunct mentions the same variables, via tautology
gadgets ``v or not-v`` for the missing ones), so its arithmetic evaluation
equals weighted model counting for arbitrary per-literal weights.

Intended for small inputs (roughly <= 20 variables at hard clause ratios);
real workloads should use an external compiler through the bench harness.
"""

from __future__ import annotations

from collections import Counter

from .circuit import AND, OR, Circuit, Literal
from .parsers import CnfFormula

_FALSE = "UNSAT"  # sentinel distinct from any node id
_TRUE = "TAUT"

Clause = frozenset[int]
ClauseSet = frozenset[Clause]


class CompileBudgetError(RuntimeError):
    """Raised when the decision budget is exhausted."""


class _Builder:
    """Circuit construction with structural node caching."""

    def __init__(self, num_vars: int):
        self.circuit = Circuit(num_vars=num_vars)
        self._cache: dict[tuple, int] = {}

    def leaf(self, code: int) -> int:
        key = ("leaf", code)
        if key not in self._cache:
            self._cache[key] = self.circuit.add_leaf(Literal.from_dimacs(code))
        return self._cache[key]

    def gate(self, kind: str, children: list[int]) -> int:
        if len(children) == 1:
            return children[0]
        key = (kind, tuple(sorted(children)))
        if key not in self._cache:
            self._cache[key] = self.circuit.add_node(kind, children)
        return self._cache[key]

    def tautology(self, var: int) -> int:
        return self.gate(OR, [self.leaf(var), self.leaf(-var)])


def _unit_propagate(clauses: ClauseSet):
    """Returns (forced literals, residual clauses) or (None, None) on conflict."""
    forced: set[int] = set()
    work = set(clauses)
    while True:
        units = {next(iter(c)) for c in work if len(c) == 1}
        if not units:
            return forced, frozenset(work)
        for l in units:
            if -l in forced or -l in units:
                return None, None
        forced |= units
        simplified = set()
        for c in work:
            if c & units:
                continue
            reduced = c - {-l for l in units}
            if not reduced:
                return None, None
            simplified.add(reduced)
        work = simplified


def _components(clauses: ClauseSet) -> list[ClauseSet]:
    parent: dict[int, int] = {}

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for clause in clauses:
        vs = [abs(l) for l in clause]
        for v in vs:
            parent.setdefault(v, v)
        for v in vs[1:]:
            parent[find(vs[0])] = find(v)
    groups: dict[int, set[Clause]] = {}
    for clause in clauses:
        groups.setdefault(find(abs(next(iter(clause)))), set()).add(clause)
    return [frozenset(g) for g in groups.values()]


def compile_cnf(
    cnf: CnfFormula,
    smooth: bool = True,
    max_decisions: int | None = None,
) -> Circuit:
    """Compile a CNF formula into a (smooth) d-DNNF circuit.

    The root covers all variables 1..num_vars when ``smooth`` is set, so even
    variables absent from every clause contribute their weight sum. An
    unsatisfiable input yields a single constant-False root.
    """
    builder = _Builder(cnf.num_vars)
    memo: dict[tuple[ClauseSet, frozenset[int]], int | str] = {}
    decisions = 0

    def scope_nodes(free_vars) -> list[int]:
        return [builder.tautology(v) for v in sorted(free_vars)] if smooth else []

    def compile_rec(clauses: ClauseSet, scope: frozenset[int]):
        nonlocal decisions
        key = (clauses, scope)
        if key in memo:
            return memo[key]
        if frozenset() in clauses:
            memo[key] = _FALSE
            return _FALSE

        forced, residual = _unit_propagate(clauses)
        if forced is None:
            memo[key] = _FALSE
            return _FALSE
        children = [builder.leaf(l) for l in sorted(forced)]
        residual_vars = {abs(l) for c in residual for l in c}
        forced_vars = {abs(l) for l in forced}
        children += scope_nodes(scope - forced_vars - residual_vars)
        parts = _components(residual)

        if len(parts) == 1 and not children and parts[0] == clauses:
            decisions += 1
            if max_decisions is not None and decisions > max_decisions:
                raise CompileBudgetError(f"exceeded {max_decisions} decisions")
            counts = Counter(abs(l) for c in clauses for l in c)
            var = min(v for v, n in counts.items() if n == counts.most_common(1)[0][1])
            sub_scope = scope - {var}
            branches = []
            for code in (var, -var):
                pruned = frozenset(
                    c - {-code} for c in clauses if code not in c
                )
                sub = compile_rec(pruned, sub_scope)
                if sub is _FALSE:
                    continue
                kids = [builder.leaf(code)] + ([] if sub is _TRUE else [sub])
                branches.append(builder.gate(AND, kids))
            if not branches:
                result = _FALSE
            else:
                result = builder.gate(OR, branches)
        else:
            result = None
            for part in parts:
                sub = compile_rec(part, frozenset(abs(l) for c in part for l in c))
                if sub is _FALSE:
                    result = _FALSE
                    break
                if sub is not _TRUE:
                    children.append(sub)
            if result is None:
                result = builder.gate(AND, children) if children else _TRUE
        memo[key] = result
        return result

    clause_set = frozenset(frozenset(l.to_dimacs() for l in c) for c in cnf.clauses)
    root = compile_rec(clause_set, frozenset(range(1, cnf.num_vars + 1)))
    circuit = builder.circuit
    if root is _FALSE:
        circuit.set_roots([circuit.add_false()])
    elif root is _TRUE:
        circuit.set_roots([circuit.add_true()])
    else:
        circuit.set_roots([root])
    return circuit
