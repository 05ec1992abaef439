"""Meta-attribute detection and closed-world supplementation."""

from dedulog.cwa import analyze, find_meta_predicates, supplement
from dedulog.engine import Literal, Program, Rule, Term, evaluate
from progen import random_programs


def lit(pred, *args, neg=False):
    return Literal(pred, tuple(Term(a) for a in args), neg)


def prog(facts, rules, query):
    return Program(frozenset(facts), tuple(rules), query)


BIG_SCENARIO = prog(
    [lit("poor", "bob")],
    [Rule(lit("bad", "X"), (lit("poor", "X"),)),
     Rule(lit("strong", "X"), (lit("big", "X"),))],
    lit("bad", "bob"),
)


class TestFindMeta:
    def test_underivable_attributes_are_meta(self):
        assert find_meta_predicates(BIG_SCENARIO) == {"poor", "big"}

    def test_no_meta_when_every_predicate_has_a_positive_head(self):
        p = prog([lit("a", "e")],
                 [Rule(lit("a", "X"), (lit("b", "X"),)),
                  Rule(lit("b", "X"), (lit("a", "X"),))],
                 lit("b", "e"))
        assert find_meta_predicates(p) == set()

    def test_no_rules_means_everything_is_meta(self):
        p = prog([lit("poor", "bob"), lit("kind", "erin")], [], lit("poor", "bob"))
        assert find_meta_predicates(p) == {"poor", "kind"}

    def test_negative_heads_do_not_count(self):
        p = prog([lit("poor", "bob")],
                 [Rule(lit("big", "X", neg=True), (lit("poor", "X"),))],
                 lit("poor", "bob"))
        assert "big" in find_meta_predicates(p)

    def test_binary_predicates_excluded(self):
        p = prog([lit("like", "dog", "cat"), lit("big", "dog")], [], lit("big", "dog"))
        assert find_meta_predicates(p) == {"big"}


class TestSupplement:
    def test_big_scenario_gains_negative_big(self):
        completed = supplement(BIG_SCENARIO)
        assert lit("big", "bob", neg=True) in completed.facts

    def test_asserted_polarity_is_left_alone(self):
        p = prog([lit("poor", "bob"), lit("big", "bob")],
                 [Rule(lit("strong", "X"), (lit("big", "X"),))],
                 lit("strong", "bob"))
        completed = supplement(p)
        assert lit("big", "bob", neg=True) not in completed.facts
        assert lit("big", "bob") in completed.facts

    def test_idempotent(self):
        for program in random_programs(71, 120):
            once = supplement(program)
            assert supplement(once) == once

    def test_conservative(self):
        # nothing derivable before completion goes missing after it
        for program in random_programs(73, 120):
            before = evaluate(program).atoms
            after = evaluate(supplement(program)).atoms
            assert before <= after

    def test_original_statements_preserved(self):
        completed = supplement(BIG_SCENARIO)
        assert BIG_SCENARIO.facts <= completed.facts
        assert completed.rules == BIG_SCENARIO.rules
        assert completed.query == BIG_SCENARIO.query

    def test_supplement_never_contradicts_facts(self):
        for program in random_programs(79, 80):
            completed = supplement(program)
            for fact in completed.facts:
                assert fact.negated() not in completed.facts


class TestAnalyze:
    def test_report_fields(self):
        report = analyze(BIG_SCENARIO)
        assert ("big", "positive") in report.meta_predicates
        assert ("bad", "negative") in report.meta_predicates
        assert ("bad", "positive") not in report.meta_predicates
        assert report.entities == frozenset({"bob"})
        assert lit("big", "bob", neg=True) in report.added

    def test_added_only_meta_and_known_entities(self):
        for program in random_programs(83, 60):
            report = analyze(program)
            meta_positive = {p for p, pol in report.meta_predicates if pol == "positive"}
            for added in report.added:
                assert added.negative
                assert added.predicate in meta_positive
                assert added.args[0].name in report.entities
