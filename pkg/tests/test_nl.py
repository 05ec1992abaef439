"""Sentence grammar, back-translation, and the deterministic comparator."""

import pytest

from dedulog.dsl import format_program, parse_program
from dedulog.engine import Literal, Program, Rule, Term
from dedulog.nl import (
    Instance,
    InstanceTranslationError,
    UnrecognizedSentenceError,
    back_translate,
    canonical_compare,
    install_lexicon,
    parse_proposition,
    parse_sentence,
    render_literal_sentence,
    render_rule_sentence,
    translate_instance,
)
from progen import random_programs

X = Term("X")


def lit(pred, *args, neg=False):
    return Literal(pred, tuple(Term(a) for a in args), neg)


class TestParseSentence:
    def test_unary_fact(self):
        assert parse_sentence("Bob is poor") == lit("poor", "bob")

    def test_binary_plural_fact(self):
        assert parse_sentence("Dogs like cats") == lit("like", "dog", "cat")

    def test_simple_rule(self):
        assert parse_sentence("If someone is poor then they are bad.") == Rule(
            lit("bad", "X"), (lit("poor", "X"),)
        )

    def test_negated_fact(self):
        assert parse_sentence("Bob is not big") == lit("big", "bob", neg=True)

    def test_articles_and_third_person(self):
        assert parse_sentence("The dog likes the cat.") == lit("like", "dog", "cat")
        assert parse_sentence("the tiger is big.") == lit("big", "tiger")

    def test_negated_binary(self):
        assert parse_sentence("Bob does not like Dave.") == lit("like", "bob", "dave", neg=True)
        assert parse_sentence("Dogs do not need cats.") == lit("need", "dog", "cat", neg=True)

    def test_animal_rule_pattern(self):
        assert parse_sentence("If something is big then it is strong.") == Rule(
            lit("strong", "X"), (lit("big", "X"),)
        )

    def test_multi_premise_rule_with_negation(self):
        rule = parse_sentence("If someone is quiet and is not nice then they are rough.")
        assert rule == Rule(lit("rough", "X"), (lit("quiet", "X"), lit("nice", "X", neg=True)))

    def test_premise_without_repeated_copula(self):
        rule = parse_sentence("If someone is quiet and not nice then they are rough.")
        assert rule == Rule(lit("rough", "X"), (lit("quiet", "X"), lit("nice", "X", neg=True)))

    def test_binary_premise_and_head(self):
        rule = parse_sentence("If something likes the cat then it is big.")
        assert rule == Rule(lit("big", "X"), (lit("like", "X", "cat"),))
        rule = parse_sentence("If someone is kind then they help bob.")
        assert rule == Rule(lit("help", "X", "bob"), (lit("kind", "X"),))

    def test_negative_conclusion(self):
        rule = parse_sentence("If someone is poor then they are not happy.")
        assert rule == Rule(lit("happy", "X", neg=True), (lit("poor", "X"),))

    def test_unrecognized_sentences(self):
        for text in ("", "colorless green ideas sleep furiously here",
                     "if then", "bob is very poor indeed", "is poor"):
            with pytest.raises(UnrecognizedSentenceError):
                parse_sentence(text)

    def test_lexicon_override(self):
        install_lexicon({"mice": "mouse"})
        try:
            assert parse_sentence("Mice like cats") == lit("like", "mouse", "cat")
        finally:
            install_lexicon({})

    def test_proposition_wrapper(self):
        prop = parse_proposition("Bob is poor.")
        assert prop.kind == "fact"
        assert prop.parsed == lit("poor", "bob")


class TestRender:
    def test_fact_sentences(self):
        assert render_literal_sentence(lit("poor", "bob")) == "bob is poor."
        assert render_literal_sentence(lit("big", "bob", neg=True)) == "bob is not big."
        assert render_literal_sentence(lit("like", "dog", "cat")) == "dog likes cat."
        assert render_literal_sentence(lit("like", "dog", "cat", neg=True)) == "dog does not like cat."

    def test_rule_sentence_people_and_animal(self):
        rule = Rule(lit("bad", "X"), (lit("poor", "X"),))
        assert render_rule_sentence(rule) == "if someone is poor then they are bad."
        assert render_rule_sentence(rule, "animal") == "if something is poor then it is bad."

    def test_every_canonical_sentence_reparses(self):
        rule = Rule(lit("sad", "X"), (lit("poor", "X"), lit("big", "X", neg=True)))
        sentence = render_rule_sentence(rule)
        assert parse_sentence(sentence) == rule


class TestBackTranslate:
    def test_canonical_order_and_query_last(self):
        program = parse_program("bad(X) :- poor(X). poor(bob). ? bad(bob).")
        assert back_translate(program) == [
            "bob is poor.",
            "if someone is poor then they are bad.",
            "bob is bad.",
        ]

    def test_round_trip_reconstruction(self):
        for program in random_programs(55, 200, nl_safe=True):
            sentences = back_translate(program)
            parsed = [parse_sentence(s) for s in sentences]
            query = parsed[-1]
            facts = [x for x in parsed[:-1] if isinstance(x, Literal)]
            rules = [x for x in parsed[:-1] if isinstance(x, Rule)]
            assert Program(frozenset(facts), tuple(rules), query) == program


class TestTranslateInstance:
    def test_three_sentence_instance(self):
        instance = Instance(
            id="t", facts=["Bob is poor"],
            rules=["If someone is poor then they are bad."],
            question="Bob is bad",
        )
        program = translate_instance(instance)
        assert format_program(program) == "poor(bob).\nbad(X) :- poor(X).\n? bad(bob).\n"

    def test_query_only_instance_answers_false_under_cwa(self):
        from dedulog.engine import answer

        instance = Instance(id="t", facts=[], rules=[], question="Bob is poor")
        program = translate_instance(instance)
        assert not program.facts and not program.rules
        assert answer(program) is False

    def test_errors_carry_section_and_index(self):
        instance = Instance(
            id="t", facts=["Bob is poor", "gibberish sentence of doom"],
            rules=["Bob is rich"], question="Bob is bad",
        )
        with pytest.raises(InstanceTranslationError) as err:
            translate_instance(instance)
        sections = {(section, index) for section, index, _, _ in err.value.errors}
        assert ("facts", 1) in sections
        assert ("rules", 0) in sections


class TestCompare:
    def test_order_insensitive_same(self):
        a = ["Bob is poor", "If someone is poor then they are bad."]
        b = ["if someone is poor then they are bad.", "bob is poor."]
        assert canonical_compare(a, b).same

    def test_missing_sentence_named_in_detail(self):
        a = ["Bob is poor", "Bob is kind"]
        b = ["Bob is kind"]
        verdict = canonical_compare(a, b)
        assert not verdict.same
        assert "bob is poor." in verdict.detail

    def test_mutated_predicate_differs(self):
        verdict = canonical_compare(["Bob is rich"], ["Bob is poor"])
        assert not verdict.same
        assert "rich" in verdict.detail and "poor" in verdict.detail

    def test_unparseable_side_is_different_not_error(self):
        verdict = canonical_compare(["Bob is poor"], ["???"])
        assert not verdict.same
        assert "unparseable" in verdict.detail

    def test_premise_order_ignored(self):
        a = ["If someone is quiet and is nice then they are rough."]
        b = ["If someone is nice and is quiet then they are rough."]
        assert canonical_compare(a, b).same

    def test_reflexive_and_symmetric(self):
        a = ["Bob is poor", "Dogs like cats"]
        b = ["Bob is rich"]
        assert canonical_compare(a, a).same
        assert canonical_compare(a, b).same == canonical_compare(b, a).same
