"""Closed-world completion of meta attributes.

A unary predicate that no rule concludes positively is a "meta attribute":
its truth can only come from the given facts. For every entity that states
neither the attribute nor its negation, completion adds the explicit
negative fact, so chains whose premises require the absence of an attribute
can fire. Binary relations are left alone; in these corpora they are
premises, never derived.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import Literal, Program, Term


@dataclass(frozen=True)
class MetaPredicateReport:
    """Which (predicate, polarity) pairs no rule can derive, the entity pool,
    and the negative facts supplementation would add."""

    meta_predicates: frozenset[tuple[str, str]]
    entities: frozenset[str]
    added: tuple[Literal, ...]


def _unary_predicates(program: Program) -> set[str]:
    return {lit.predicate for lit in program.literals() if lit.arity == 1}


def find_meta_predicates(program: Program) -> set[str]:
    """Unary predicates that never appear as a positive rule head."""
    positive_heads = {r.head.predicate for r in program.rules if not r.head.negative}
    return {p for p in _unary_predicates(program) if p not in positive_heads}


def _supplements(program: Program) -> list[Literal]:
    meta = sorted(find_meta_predicates(program))
    entities = sorted(program.constants())
    added: list[Literal] = []
    for predicate in meta:
        for entity in entities:
            positive = Literal(predicate, (Term(entity),))
            if positive in program.facts or positive.negated() in program.facts:
                continue
            added.append(positive.negated())
    return added


def supplement(program: Program) -> Program:
    """Add ~p(e) for every meta predicate p and entity e with no stated
    polarity for p. Idempotent; never contradicts an existing fact, and
    never blocks a positive derivation."""
    added = _supplements(program)
    if not added:
        return program
    return Program(program.facts | frozenset(added), program.rules, program.query)


def analyze(program: Program) -> MetaPredicateReport:
    positive_heads = {r.head.predicate for r in program.rules if not r.head.negative}
    negative_heads = {r.head.predicate for r in program.rules if r.head.negative}
    pairs: set[tuple[str, str]] = set()
    for p in _unary_predicates(program):
        if p not in positive_heads:
            pairs.add((p, "positive"))
        if p not in negative_heads:
            pairs.add((p, "negative"))
    return MetaPredicateReport(
        meta_predicates=frozenset(pairs),
        entities=frozenset(program.constants()),
        added=tuple(_supplements(program)),
    )
