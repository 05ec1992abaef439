"""Parser totality, diagnostics, and the canonical printer."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dedulog.dsl import (
    ParseDiagnostic,
    ProgramParseError,
    SourceProgramText,
    format_program,
    lenient_statements,
    parse_program,
    try_parse_program,
)
from dedulog.engine import Literal, Rule, Term
from progen import random_programs


def diag_kinds(text):
    _, diags = try_parse_program(text)
    return [d.kind for d in diags]


class TestParse:
    def test_three_statement_program(self):
        program = parse_program("poor(bob). bad(X) :- poor(X). ? bad(bob).")
        assert program.facts == frozenset({Literal("poor", (Term("bob"),))})
        assert program.rules == (
            Rule(Literal("bad", (Term("X"),)), (Literal("poor", (Term("X"),)),)),
        )
        assert program.query == Literal("bad", (Term("bob"),))

    def test_empty_string_reports_missing_query(self):
        program, diags = try_parse_program("")
        assert program is None
        assert len(diags) == 1
        assert diags[0].kind == "syntax"
        assert "missing query" in diags[0].message

    def test_unsafe_rule_reports_safety_kind(self):
        kinds = diag_kinds("bad(X) :- poor(Y).")
        assert "safety" in kinds

    def test_source_program_text_wrapper(self):
        src = SourceProgramText("poor(bob). ? poor(bob).", origin="oracle-generated")
        assert parse_program(src).query == Literal("poor", (Term("bob"),))

    def test_duplicate_query(self):
        kinds = diag_kinds("poor(bob). ? poor(bob). ? bad(bob).")
        assert kinds == ["duplicate-query"]

    def test_arity_mismatch(self):
        kinds = diag_kinds("like(dog, cat). like(dog). ? like(dog, cat).")
        assert "arity" in kinds

    def test_arity_above_two(self):
        kinds = diag_kinds("like(a, b, c). ? like(a, b, c).")
        assert kinds.count("arity") >= 1

    def test_non_ground_fact_and_query(self):
        kinds = diag_kinds("poor(X). ? poor(Y).")
        assert kinds.count("safety") == 2

    def test_lex_diagnostic_position(self):
        _, diags = try_parse_program("poor(bob).\n$ bad(bob).\n? poor(bob).")
        lex = [d for d in diags if d.kind == "lex"]
        assert lex and lex[0].line == 2 and lex[0].column == 1

    def test_comment_lines_ignored(self):
        program = parse_program("# a comment\npoor(bob). # trailing\n? poor(bob).")
        assert len(program.facts) == 1

    def test_uppercase_predicate_rejected(self):
        kinds = diag_kinds("Poor(bob). ? poor(bob).")
        assert "syntax" in kinds

    def test_query_with_body_rejected(self):
        kinds = diag_kinds("? bad(X) :- poor(X).")
        assert "syntax" in kinds

    def test_error_recovery_collects_multiple_diagnostics(self):
        _, diags = try_parse_program("poor(bob.\nbad(X) : poor(X).\n")
        assert len(diags) >= 3  # broken fact, broken rule, missing query

    def test_parse_program_raises_with_diagnostics(self):
        with pytest.raises(ProgramParseError) as err:
            parse_program("poor(bob)")
        assert all(isinstance(d, ParseDiagnostic) for d in err.value.diagnostics)

    def test_diagnostics_nonempty_iff_parse_fails(self):
        for text in ("poor(bob). ? poor(bob).", "poor(bob).", "", "? x(y)."):
            program, diags = try_parse_program(text)
            assert (program is None) == bool(diags)


class TestFormat:
    def test_golden_single_rule_program(self):
        program = parse_program("bad(X) :- poor(X). poor(bob). ? bad(bob).")
        assert format_program(program) == "poor(bob).\nbad(X) :- poor(X).\n? bad(bob).\n"

    def test_negative_fact_renders_with_tilde(self):
        program = parse_program("~big(bob). ? big(bob).")
        assert "~big(bob)." in format_program(program).splitlines()

    def test_round_trip_structural_identity(self):
        for program in random_programs(101, 200):
            assert parse_program(format_program(program)) == program

    def test_canonical_idempotence(self):
        for program in random_programs(103, 50):
            once = format_program(program)
            assert format_program(parse_program(once)) == once


class TestTotality:
    def test_random_bytes_never_crash(self):
        rng = random.Random(2024)
        for _ in range(2000):
            blob = rng.randbytes(rng.randrange(0, 160)).decode("latin-1")
            program, diags = try_parse_program(blob)
            assert program is not None or diags

    @settings(max_examples=300, deadline=None)
    @given(st.text(max_size=200))
    def test_arbitrary_text_never_crashes(self, text):
        program, diags = try_parse_program(text)
        assert (program is None) == bool(diags)


class TestLenient:
    def test_recovers_intact_statements(self):
        statements = lenient_statements("poor(bob.\nbad(X) :- poor(X).\n? bad(bob).")
        kinds = [k for k, _ in statements]
        assert kinds == ["rule", "query"]

    def test_keeps_unsafe_rules(self):
        statements = lenient_statements("bad(Z9) :- poor(X).\n? bad(bob).")
        assert [k for k, _ in statements] == ["rule", "query"]

    def test_missing_query_tolerated(self):
        statements = lenient_statements("poor(bob).")
        assert [k for k, _ in statements] == ["fact"]
