"""Textual surface syntax for programs (`.dlp` files) and its parser.

Grammar, one statement per line by convention but whitespace-insensitive:

    program := statement+
    fact    := literal "."
    rule    := literal ":-" literal ("," literal)* "."
    query   := "?" literal "."
    literal := ["~"] ident "(" term ("," term)* ")"

Constants start lowercase, variables uppercase; `#` starts a line comment;
exactly one query per program; arity is 1 or 2 and consistent per predicate.

The parser is total: any byte sequence yields either a Program or a list of
positioned diagnostics, never an exception other than ProgramParseError.
Diagnostics are rendered verbatim into repair prompts, so their messages
are written for a reader that only sees the program text.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import Literal, Program, Rule, Term

GRAMMAR_HELP = """\
A program is a list of statements, each ending with a period:
  fact:   attribute(entity).             e.g. poor(bob).
  fact:   relation(entity, entity).      e.g. like(dog, cat).
  rule:   head(X) :- premise(X), premise(X).
  query:  ? attribute(entity).           exactly one query per program.
A leading ~ negates: ~big(bob).  Rules may conclude a negation:
  ~happy(X) :- poor(X).
Constants start with a lowercase letter, variables with an uppercase letter.
Every rule variable must appear in a positive premise. Each predicate takes
one or two arguments, consistently. `#` starts a comment line.\
"""

DIAGNOSTIC_KINDS = ("lex", "syntax", "safety", "arity", "duplicate-query")


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    kind: str
    message: str

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}: {self.kind}: {self.message}"


@dataclass(frozen=True)
class SourceProgramText:
    text: str
    origin: str = "file"  # llm-generated | oracle-generated | file


class ProgramParseError(Exception):
    def __init__(self, diagnostics: list[ParseDiagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = list(diagnostics)


# --- lexer -------------------------------------------------------------

_STRUCTURAL = {"(": "(", ")": ")", ",": ",", ".": ".", "~": "~", "?": "?"}


def _is_ascii_letter(ch: str) -> bool:
    return "a" <= ch <= "z" or "A" <= ch <= "Z"


def _is_ident_char(ch: str) -> bool:
    return _is_ascii_letter(ch) or "0" <= ch <= "9" or ch == "_"


@dataclass(frozen=True)
class _Token:
    kind: str  # ident | ( | ) | , | . | :- | ~ | ? | eof
    value: str
    line: int
    column: int


def _lex(text: str):
    tokens: list[_Token] = []
    diags: list[ParseDiagnostic] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif _is_ascii_letter(ch):
            start = i
            while i < n and _is_ident_char(text[i]):
                i += 1
            tokens.append(_Token("ident", text[start:i], line, col))
            col += i - start
        elif ch in _STRUCTURAL:
            tokens.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
        elif ch == ":":
            if i + 1 < n and text[i + 1] == "-":
                tokens.append(_Token(":-", ":-", line, col))
                i += 2
                col += 2
            else:
                diags.append(ParseDiagnostic(line, col, "lex", "expected ':-' after ':'"))
                i += 1
                col += 1
        else:
            start = i
            while i < n and not (
                _is_ascii_letter(text[i]) or text[i] in " \t\r\n#:" or text[i] in _STRUCTURAL
            ):
                i += 1
            chunk = text[start:i]
            shown = chunk if len(chunk) <= 12 else chunk[:12] + "..."
            diags.append(ParseDiagnostic(line, col, "lex", f"unexpected text {shown!r}"))
            col += i - start
    tokens.append(_Token("eof", "", line, col))
    return tokens, diags


# --- statement parser --------------------------------------------------

@dataclass
class _RawLiteral:
    negative: bool
    predicate: str
    args: list[Term]
    line: int
    column: int


@dataclass
class _RawStatement:
    kind: str  # fact | rule | query
    head: _RawLiteral
    body: list[_RawLiteral]
    line: int
    column: int


class _StatementError(Exception):
    def __init__(self, diag: ParseDiagnostic):
        self.diag = diag


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, tok: _Token, message: str) -> _StatementError:
        return _StatementError(ParseDiagnostic(tok.line, tok.column, "syntax", message))

    def recover(self):
        # Skip to just past the next '.' so later statements still parse.
        while True:
            tok = self.take()
            if tok.kind in (".", "eof"):
                return

    def literal(self) -> _RawLiteral:
        start = self.peek()
        negative = False
        if self.peek().kind == "~":
            self.take()
            negative = True
        tok = self.peek()
        if tok.kind != "ident":
            raise self.error(tok, f"expected a predicate name, found {tok.value or 'end of input'!r}")
        self.take()
        if tok.value[0].isupper():
            raise self.error(tok, f"predicate {tok.value!r} must start with a lowercase letter")
        predicate = tok.value
        opener = self.peek()
        if opener.kind != "(":
            raise self.error(opener, f"expected '(' after predicate {predicate!r}")
        self.take()
        args: list[Term] = []
        while True:
            arg = self.peek()
            if arg.kind != "ident":
                raise self.error(arg, "expected a constant or variable name")
            self.take()
            args.append(Term(arg.value))
            nxt = self.peek()
            if nxt.kind == ",":
                self.take()
                continue
            if nxt.kind == ")":
                self.take()
                break
            raise self.error(nxt, "expected ',' or ')' in the argument list")
        return _RawLiteral(negative, predicate, args, start.line, start.column)

    def statement(self) -> _RawStatement:
        start = self.peek()
        if start.kind == "?":
            self.take()
            head = self.literal()
            closer = self.peek()
            if closer.kind == ":-":
                raise self.error(closer, "a query cannot have a rule body")
            if closer.kind != ".":
                raise self.error(closer, "expected '.' after the query")
            self.take()
            return _RawStatement("query", head, [], start.line, start.column)
        head = self.literal()
        nxt = self.peek()
        if nxt.kind == ".":
            self.take()
            return _RawStatement("fact", head, [], start.line, start.column)
        if nxt.kind == ":-":
            self.take()
            body = [self.literal()]
            while True:
                tok = self.peek()
                if tok.kind == ",":
                    self.take()
                    body.append(self.literal())
                    continue
                if tok.kind == ".":
                    self.take()
                    break
                raise self.error(tok, "expected ',' or '.' after a rule premise")
            return _RawStatement("rule", head, body, start.line, start.column)
        raise self.error(nxt, "expected '.' or ':-' after the literal")


def _parse_statements(tokens):
    parser = _Parser(tokens)
    statements: list[_RawStatement] = []
    diags: list[ParseDiagnostic] = []
    while parser.peek().kind != "eof":
        try:
            statements.append(parser.statement())
        except _StatementError as exc:
            diags.append(exc.diag)
            parser.recover()
    return statements, diags


# --- semantic checks ---------------------------------------------------

def _build_literal(raw: _RawLiteral) -> Literal:
    return Literal(raw.predicate, tuple(raw.args), raw.negative)


def _analyze(statements, last_token):
    diags: list[ParseDiagnostic] = []
    arity_seen: dict[str, tuple[int, int, int]] = {}  # predicate -> (arity, line, col)

    def check_literal(raw: _RawLiteral) -> bool:
        ok = True
        if not 1 <= len(raw.args) <= 2:
            diags.append(
                ParseDiagnostic(
                    raw.line, raw.column, "arity",
                    f"{raw.predicate} takes {len(raw.args)} arguments; only 1 or 2 are allowed",
                )
            )
            ok = False
        else:
            seen = arity_seen.get(raw.predicate)
            if seen is None:
                arity_seen[raw.predicate] = (len(raw.args), raw.line, raw.column)
            elif seen[0] != len(raw.args):
                diags.append(
                    ParseDiagnostic(
                        raw.line, raw.column, "arity",
                        f"{raw.predicate} used with {len(raw.args)} arguments here "
                        f"but with {seen[0]} at line {seen[1]}, column {seen[2]}",
                    )
                )
                ok = False
        return ok

    facts: list[Literal] = []
    rules: list[Rule] = []
    queries: list[tuple[Literal, _RawStatement]] = []

    for stmt in statements:
        literals_ok = check_literal(stmt.head)
        for raw in stmt.body:
            literals_ok = check_literal(raw) and literals_ok
        if not literals_ok:
            continue
        if stmt.kind == "fact":
            lit = _build_literal(stmt.head)
            if not lit.is_ground:
                diags.append(
                    ParseDiagnostic(stmt.line, stmt.column, "safety",
                                    f"fact {lit} must not contain variables")
                )
                continue
            facts.append(lit)
        elif stmt.kind == "rule":
            rule = Rule(_build_literal(stmt.head), tuple(_build_literal(b) for b in stmt.body))
            violation = rule.safety_violation()
            if violation is not None:
                diags.append(ParseDiagnostic(stmt.line, stmt.column, "safety", violation))
                continue
            rules.append(rule)
        else:
            lit = _build_literal(stmt.head)
            if not lit.is_ground:
                diags.append(
                    ParseDiagnostic(stmt.line, stmt.column, "safety",
                                    f"query {lit} must not contain variables")
                )
                continue
            queries.append((lit, stmt))

    if not queries:
        diags.append(
            ParseDiagnostic(last_token.line, last_token.column, "syntax",
                            "missing query: end the program with '? literal.'")
        )
    for _, stmt in queries[1:]:
        diags.append(
            ParseDiagnostic(stmt.line, stmt.column, "duplicate-query",
                            "only one query is allowed per program")
        )

    if diags:
        return None, diags
    return Program(frozenset(facts), tuple(rules), queries[0][0]), []


# --- public API ---------------------------------------------------------

def _text_of(src) -> str:
    return src.text if isinstance(src, SourceProgramText) else src


def try_parse_program(src) -> tuple[Program | None, list[ParseDiagnostic]]:
    """Parse; on failure return (None, diagnostics). Never raises."""
    text = _text_of(src)
    tokens, lex_diags = _lex(text)
    statements, stmt_diags = _parse_statements(tokens)
    program, sem_diags = _analyze(statements, tokens[-1])
    diags = sorted(lex_diags + stmt_diags + sem_diags, key=lambda d: (d.line, d.column))
    if diags:
        return None, diags
    return program, []


def parse_program(src) -> Program:
    """Parse or raise ProgramParseError carrying all diagnostics."""
    program, diags = try_parse_program(src)
    if program is None:
        raise ProgramParseError(diags)
    return program


def lenient_statements(src) -> list[tuple[str, object]]:
    """Best-effort statement recovery for back-translation of damaged text.

    Structurally broken statements are dropped; semantic problems (unsafe
    rules, arity drift, missing or extra queries, non-ground facts that can
    still be read) are tolerated. Returns ('fact'|'rule'|'query', obj) pairs
    in textual order.
    """
    text = _text_of(src)
    tokens, _ = _lex(text)
    statements, _ = _parse_statements(tokens)
    out: list[tuple[str, object]] = []
    for stmt in statements:
        try:
            if stmt.kind == "rule":
                obj: object = Rule(
                    _build_literal(stmt.head), tuple(_build_literal(b) for b in stmt.body)
                )
            else:
                obj = _build_literal(stmt.head)
        except ValueError:
            continue
        out.append((stmt.kind, obj))
    return out


def canonical_order(program: Program) -> tuple[list[Literal], list[Rule]]:
    """Facts sorted lexicographically by rendered text, rules by (head, body)."""
    facts = sorted(program.facts, key=str)
    rules = sorted(program.rules, key=lambda r: (str(r.head), tuple(str(b) for b in r.body)))
    return facts, rules


def format_program(program: Program) -> str:
    """Canonical text: sorted facts, then sorted rules, then the query."""
    facts, rules = canonical_order(program)
    lines = [f"{lit}." for lit in facts]
    lines += [f"{rule}." for rule in rules]
    lines.append(f"? {program.query}.")
    return "\n".join(lines) + "\n"
