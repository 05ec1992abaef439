"""Datalog core: ground facts, Horn rules with explicit negation, and a
bottom-up evaluator with stratification checking.

Explicit negation is handled by treating ~p as an independent "twin" of p:
rules may conclude ~p(...) and body literals may require a derived or
asserted ~p atom. Nothing is inferred from absence during evaluation; the
closed-world reading applies only when `answer` resolves a negative query.

`Model.depth` records the first naive-iteration round in which each atom
becomes derivable (facts are round 0). The fixpoint itself is computed
semi-naively, which derives every atom in exactly its naive round, so the
two views agree.
"""

from __future__ import annotations

import heapq
import re
from collections import defaultdict
from dataclasses import dataclass, replace

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class EngineError(Exception):
    """Base class for evaluation-side failures."""


class UnsafeRuleError(EngineError):
    """A rule violates the range restriction (unbound head or negated variable)."""

    def __init__(self, rule_index: int, rule: "Rule", message: str):
        super().__init__(f"rule {rule_index}: {message}: {rule}")
        self.rule_index = rule_index
        self.rule = rule


class UnstratifiableError(EngineError):
    """A negative dependency lies on a predicate cycle."""

    def __init__(self, predicates):
        super().__init__(
            "negative dependency cycle through " + ", ".join(sorted(predicates))
        )
        self.predicates = frozenset(predicates)


class InconsistencyError(EngineError):
    """Both polarities of the same ground atom are derivable."""

    def __init__(self, literal: "Literal"):
        super().__init__(f"derived both polarities of {literal}")
        self.literal = literal


@dataclass(frozen=True, slots=True)
class Term:
    """A constant (lowercase-initial) or variable (uppercase-initial)."""

    name: str

    def __post_init__(self):
        if not _IDENT.match(self.name):
            raise ValueError(f"bad term name {self.name!r}")

    @property
    def is_variable(self) -> bool:
        return self.name[0].isupper()

    @property
    def kind(self) -> str:
        return "variable" if self.is_variable else "constant"

    def __str__(self) -> str:
        return self.name


def const(name: str) -> Term:
    t = Term(name)
    if t.is_variable:
        raise ValueError(f"{name!r} is not a constant")
    return t


def var(name: str) -> Term:
    t = Term(name)
    if not t.is_variable:
        raise ValueError(f"{name!r} is not a variable")
    return t


@dataclass(frozen=True, slots=True)
class Literal:
    """A possibly-negated atom of arity 1 or 2."""

    predicate: str
    args: tuple[Term, ...]
    negative: bool = False

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        if not _IDENT.match(self.predicate) or self.predicate[0].isupper():
            raise ValueError(f"bad predicate name {self.predicate!r}")
        if not 1 <= len(self.args) <= 2:
            raise ValueError(f"arity of {self.predicate} must be 1 or 2")

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def is_ground(self) -> bool:
        return not any(t.is_variable for t in self.args)

    def negated(self) -> "Literal":
        return replace(self, negative=not self.negative)

    def sort_key(self):
        return (self.predicate, self.negative, tuple(t.name for t in self.args))

    def __str__(self) -> str:
        sign = "~" if self.negative else ""
        return f"{sign}{self.predicate}({', '.join(t.name for t in self.args)})"


@dataclass(frozen=True, slots=True)
class Rule:
    """head :- body. The head may be negative; the body is a conjunction."""

    head: Literal
    body: tuple[Literal, ...]

    def __post_init__(self):
        if not isinstance(self.body, tuple):
            object.__setattr__(self, "body", tuple(self.body))
        if not self.body:
            raise ValueError("rule body must be non-empty")

    def safety_violation(self) -> str | None:
        """Range restriction: head vars and negated-body vars need a positive
        body occurrence. Returns a message, or None when the rule is safe."""
        positive = {
            t.name
            for lit in self.body
            if not lit.negative
            for t in lit.args
            if t.is_variable
        }
        for t in self.head.args:
            if t.is_variable and t.name not in positive:
                return f"head variable {t.name} is not bound by a positive body literal"
        for lit in self.body:
            if lit.negative:
                for t in lit.args:
                    if t.is_variable and t.name not in positive:
                        return (
                            f"variable {t.name} of negative literal {lit} "
                            "is not bound by a positive body literal"
                        )
        return None

    @property
    def is_safe(self) -> bool:
        return self.safety_violation() is None

    def sort_key(self):
        return (self.head.sort_key(), tuple(lit.sort_key() for lit in self.body))

    def __str__(self) -> str:
        return f"{self.head} :- {', '.join(str(lit) for lit in self.body)}"


@dataclass(frozen=True, eq=False, slots=True)
class Program:
    """Closed problem: ground facts, rules, and one ground query.

    Equality is structural and order-insensitive: facts are a set and rules
    compare as a multiset, matching what the canonical text form preserves.
    """

    facts: frozenset[Literal]
    rules: tuple[Rule, ...]
    query: Literal

    def __post_init__(self):
        if not isinstance(self.facts, frozenset):
            object.__setattr__(self, "facts", frozenset(self.facts))
        if not isinstance(self.rules, tuple):
            object.__setattr__(self, "rules", tuple(self.rules))
        for f in self.facts:
            if not f.is_ground:
                raise ValueError(f"fact {f} is not ground")
        if not self.query.is_ground:
            raise ValueError(f"query {self.query} is not ground")

    def _rule_multiset(self):
        return tuple(sorted((r.sort_key() for r in self.rules)))

    def __eq__(self, other):
        if not isinstance(other, Program):
            return NotImplemented
        return (
            self.facts == other.facts
            and self._rule_multiset() == other._rule_multiset()
            and self.query == other.query
        )

    def __hash__(self):
        return hash((self.facts, self._rule_multiset(), self.query))

    def literals(self):
        yield from self.facts
        for rule in self.rules:
            yield rule.head
            yield from rule.body
        yield self.query

    def predicates(self) -> set[str]:
        return {lit.predicate for lit in self.literals()}

    def constants(self) -> set[str]:
        return {
            t.name for lit in self.literals() for t in lit.args if not t.is_variable
        }


@dataclass(frozen=True)
class Model:
    """Least model plus the naive-iteration round of first derivation."""

    atoms: frozenset[Literal]
    depth: dict[Literal, int]


def _dependency_graph(program: Program):
    preds = program.predicates()
    edges: dict[str, set[tuple[str, bool]]] = {p: set() for p in preds}
    for rule in program.rules:
        for lit in rule.body:
            edges[lit.predicate].add((rule.head.predicate, lit.negative))
    return preds, edges


def _tarjan_sccs(nodes, edges):
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    onstack: set[str] = set()
    stack: list[str] = []
    sccs: list[list[str]] = []
    counter = 0

    def successors(n):
        return iter(sorted({dst for dst, _ in edges.get(n, ())}))

    for root in sorted(nodes):
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        onstack.add(root)
        work = [(root, successors(root))]
        while work:
            node, it = work[-1]
            descended = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    onstack.add(nxt)
                    work.append((nxt, successors(nxt)))
                    descended = True
                    break
                if nxt in onstack:
                    low[node] = min(low[node], index[nxt])
            if descended:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                scc = []
                while True:
                    w = stack.pop()
                    onstack.discard(w)
                    scc.append(w)
                    if w == node:
                        break
                sccs.append(sorted(scc))
    return sccs


def stratify(program: Program) -> list[list[str]]:
    """Check safety and negation layering; return predicate strata in
    dependency order (one stratum per strongly connected component, ties
    broken by name so the order is deterministic).

    A predicate and its negative twin always share a stratum: the graph is
    built over base predicate names, and a negated body literal marks its
    edge negative. A negative edge inside a cycle is unstratifiable.
    """
    for i, rule in enumerate(program.rules):
        violation = rule.safety_violation()
        if violation is not None:
            raise UnsafeRuleError(i, rule, violation)

    preds, edges = _dependency_graph(program)
    sccs = _tarjan_sccs(preds, edges)
    comp = {p: ci for ci, scc in enumerate(sccs) for p in scc}

    for src, outs in edges.items():
        for dst, neg in outs:
            if neg and comp[src] == comp[dst]:
                raise UnstratifiableError(sccs[comp[src]])

    # Deterministic topological order over the condensation.
    cadj: dict[int, set[int]] = defaultdict(set)
    indeg = {ci: 0 for ci in range(len(sccs))}
    for src, outs in edges.items():
        for dst, _ in outs:
            a, b = comp[src], comp[dst]
            if a != b and b not in cadj[a]:
                cadj[a].add(b)
                indeg[b] += 1
    ready = [(sccs[ci][0], ci) for ci in indeg if indeg[ci] == 0]
    heapq.heapify(ready)
    strata: list[list[str]] = []
    while ready:
        _, ci = heapq.heappop(ready)
        strata.append(sccs[ci])
        for nxt in cadj[ci]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(ready, (sccs[nxt][0], nxt))
    return strata


def _unify(pattern: tuple[Term, ...], ground: tuple[str, ...], binding: dict):
    if len(pattern) != len(ground):
        return None
    out = binding
    for t, name in zip(pattern, ground):
        if t.is_variable:
            bound = out.get(t.name)
            if bound is None:
                if out is binding:
                    out = dict(binding)
                out[t.name] = name
            elif bound != name:
                return None
        elif t.name != name:
            return None
    return out


def _instantiate(head: Literal, binding: dict) -> Literal:
    args = tuple(
        Term(binding[t.name]) if t.is_variable else t for t in head.args
    )
    return Literal(head.predicate, args, head.negative)


def _fire(rule: Rule, full, delta):
    """All head instantiations with the whole body in `full` and at least one
    body atom in `delta` (the previous round's new atoms)."""
    derived: set[Literal] = set()
    body = rule.body

    def rec(i: int, binding: dict, pivot: int):
        if i == len(body):
            derived.add(_instantiate(rule.head, binding))
            return
        lit = body[i]
        source = delta if i == pivot else full
        for ground_args in source.get((lit.predicate, lit.negative), ()):
            nxt = _unify(lit.args, ground_args, binding)
            if nxt is not None:
                rec(i + 1, nxt, pivot)

    for pivot in range(len(body)):
        key = (body[pivot].predicate, body[pivot].negative)
        if delta.get(key):
            rec(0, {}, pivot)
    return derived


def evaluate(program: Program) -> Model:
    """Least fixpoint by semi-naive iteration, with per-atom first rounds.

    New atoms derived in round r only become join inputs in round r+1, so an
    atom's recorded round equals its naive-iteration round.
    """
    stratify(program)

    atoms: dict[Literal, int] = {}
    full: dict[tuple[str, bool], set[tuple[str, ...]]] = defaultdict(set)

    for f in sorted(program.facts, key=Literal.sort_key):
        if f.negated() in program.facts:
            raise InconsistencyError(f)
        atoms[f] = 0
        full[(f.predicate, f.negative)].add(tuple(t.name for t in f.args))

    delta = {k: set(v) for k, v in full.items()}
    rnd = 0
    while any(delta.values()):
        rnd += 1
        derived: set[Literal] = set()
        for rule in program.rules:
            derived |= _fire(rule, full, delta)
        fresh = [lit for lit in sorted(derived, key=Literal.sort_key) if lit not in atoms]
        fresh_set = set(fresh)
        for lit in fresh:
            twin = lit.negated()
            if twin in atoms or twin in fresh_set:
                raise InconsistencyError(lit)
        delta = defaultdict(set)
        for lit in fresh:
            atoms[lit] = rnd
            key = (lit.predicate, lit.negative)
            ground_args = tuple(t.name for t in lit.args)
            full[key].add(ground_args)
            delta[key].add(ground_args)
    return Model(atoms=frozenset(atoms), depth=atoms)


def answer(program: Program) -> bool:
    """TRUE/FALSE for the program's ground query.

    Positive query: membership in the least model. Negative query ~q: true
    when the twin was derived, or when q itself is underivable (closed-world
    assumption); false only when q holds and ~q does not.
    """
    model = evaluate(program)
    q = program.query
    if not q.negative:
        return q in model.atoms
    return q in model.atoms or q.negated() not in model.atoms


def proof_depth(model: Model, literal: Literal) -> int | None:
    """First derivation round of `literal`, or None when absent from the model."""
    return model.depth.get(literal)
