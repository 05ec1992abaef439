"""Deterministic translator between the benchmarks' synthetic English and
logic programs.

The sentence grammar covers the closed shapes the corpora use:

    facts:  "bob is poor"        -> poor(bob)
            "bob is not big"     -> ~big(bob)
            "dogs like cats"     -> like(dog, cat)
            "bob does not like dave" -> ~like(bob, dave)
    rules:  "if someone is poor then they are bad"           -> bad(X) :- poor(X)
            "if something is big and is not nice then it is fierce"
            "if someone likes cat then they are kind"        -> kind(X) :- like(X, cat)

Extraction is exact rather than statistical: the vocabulary is closed, so a
grammar plus a small lemma table replaces NER-style tagging. An override
lexicon (one `surface=lemma` per line) can be installed for corpora with
irregular forms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .dsl import canonical_order
from .engine import Literal, Program, Rule, Term

_WORD = re.compile(r"[a-z][a-z0-9_]*\Z")
_PRONOUN_SUBJECTS = ("someone", "something", "somebody")
_PRONOUN_CONCLUSIONS = ("they", "it")
_RESERVED = {
    "is", "are", "not", "do", "does", "the", "if", "then", "and",
    "they", "it", "someone", "something", "somebody",
}

_RULE_VAR = Term("X")

# surface -> lemma overrides, installable from a lexicon file
_LEXICON: dict[str, str] = {}


class UnrecognizedSentenceError(Exception):
    def __init__(self, sentence: str, reason: str = "sentence does not match the grammar"):
        super().__init__(f"{reason}: {sentence!r}")
        self.sentence = sentence


class InstanceTranslationError(Exception):
    """Aggregate of sentence-level failures for one instance."""

    def __init__(self, errors: list[tuple[str, int, str, str]]):
        lines = [f"{sec}[{idx}] {msg}: {sent!r}" for sec, idx, sent, msg in errors]
        super().__init__("; ".join(lines))
        self.errors = errors


@dataclass(frozen=True)
class CompareVerdict:
    same: bool
    detail: str = ""


@dataclass(frozen=True)
class Proposition:
    kind: str  # fact | rule
    surface: str
    parsed: Literal | Rule


@dataclass
class Instance:
    """One benchmark problem in natural-language form."""

    id: str
    facts: list[str]
    rules: list[str]
    question: str
    gold_label: bool | None = None
    depth: int | None = None
    pattern: str = "other"  # people | animal | other


def install_lexicon(mapping: dict[str, str]) -> None:
    _LEXICON.clear()
    _LEXICON.update({k.lower(): v.lower() for k, v in mapping.items()})


def load_lexicon_file(path) -> dict[str, str]:
    mapping = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            surface, lemma = line.split("=", 1)
            mapping[surface.strip()] = lemma.strip()
    return mapping


def _lemma(word: str) -> str:
    """Strip plural/third-person suffixes: watches->watch, dogs->dog."""
    if word in _LEXICON:
        return _LEXICON[word]
    if word.endswith("es"):
        stem = word[:-2]
        if stem.endswith(("x", "z", "ch", "sh", "ss")):
            return stem
    if word.endswith("s") and not word.endswith("ss"):
        return word[:-1]
    return word


def third_person(verb: str) -> str:
    if verb.endswith(("x", "z", "ch", "sh", "ss", "o")):
        return verb + "es"
    return verb + "s"


def _require_word(word: str, sentence: str) -> str:
    if word in _RESERVED or not _WORD.match(word):
        raise UnrecognizedSentenceError(sentence, f"unusable word {word!r}")
    return word


def _strip_article(tokens: list[str]) -> list[str]:
    return tokens[1:] if tokens and tokens[0] == "the" else tokens


def _tokens(sentence: str) -> list[str]:
    cleaned = sentence.strip().lower().rstrip(".?!").strip()
    return cleaned.split()


def _parse_copula_tail(tokens: list[str], sentence: str) -> tuple[bool, str]:
    negative = False
    if tokens and tokens[0] == "not":
        negative = True
        tokens = tokens[1:]
    if len(tokens) != 1:
        raise UnrecognizedSentenceError(sentence)
    return negative, _require_word(tokens[0], sentence)


def _parse_fact(tokens: list[str], sentence: str) -> Literal:
    tokens = _strip_article(tokens)
    if len(tokens) < 2:
        raise UnrecognizedSentenceError(sentence)
    subject = _require_word(_lemma(tokens[0]), sentence)
    rest = tokens[1:]
    if rest[0] in ("is", "are"):
        negative, attr = _parse_copula_tail(rest[1:], sentence)
        return Literal(attr, (Term(subject),), negative)
    negative = False
    if rest[:2] in (["do", "not"], ["does", "not"]):
        negative = True
        rest = rest[2:]
    if not rest:
        raise UnrecognizedSentenceError(sentence)
    verb = _require_word(_lemma(rest[0]), sentence)
    obj_tokens = _strip_article(rest[1:])
    if len(obj_tokens) != 1:
        raise UnrecognizedSentenceError(sentence)
    obj = _require_word(_lemma(obj_tokens[0]), sentence)
    return Literal(verb, (Term(subject), Term(obj)), negative)


def _split_conjuncts(tokens: list[str], sentence: str) -> list[list[str]]:
    groups: list[list[str]] = [[]]
    for tok in tokens:
        if tok == "and":
            groups.append([])
        else:
            groups[-1].append(tok)
    if any(not g for g in groups):
        raise UnrecognizedSentenceError(sentence)
    return groups


def _parse_premise(conjunct: list[str], sentence: str) -> Literal:
    if conjunct and conjunct[0] in ("is", "are"):
        conjunct = conjunct[1:]
    if not conjunct:
        raise UnrecognizedSentenceError(sentence)
    if conjunct[0] == "not":
        if len(conjunct) != 2:
            raise UnrecognizedSentenceError(sentence)
        return Literal(_require_word(conjunct[1], sentence), (_RULE_VAR,), True)
    if len(conjunct) == 1:
        return Literal(_require_word(conjunct[0], sentence), (_RULE_VAR,), False)
    negative = False
    if conjunct[:2] == ["does", "not"] or conjunct[:2] == ["do", "not"]:
        negative = True
        conjunct = conjunct[2:]
    if not conjunct:
        raise UnrecognizedSentenceError(sentence)
    verb = _require_word(_lemma(conjunct[0]), sentence)
    obj_tokens = _strip_article(conjunct[1:])
    if len(obj_tokens) != 1:
        raise UnrecognizedSentenceError(sentence)
    obj = _require_word(_lemma(obj_tokens[0]), sentence)
    return Literal(verb, (_RULE_VAR, Term(obj)), negative)


def _parse_conclusion(tokens: list[str], sentence: str) -> Literal:
    if not tokens or tokens[0] not in _PRONOUN_CONCLUSIONS:
        raise UnrecognizedSentenceError(sentence)
    rest = tokens[1:]
    if not rest:
        raise UnrecognizedSentenceError(sentence)
    if rest[0] in ("are", "is"):
        negative, attr = _parse_copula_tail(rest[1:], sentence)
        return Literal(attr, (_RULE_VAR,), negative)
    negative = False
    if rest[:2] in (["do", "not"], ["does", "not"]):
        negative = True
        rest = rest[2:]
    if not rest:
        raise UnrecognizedSentenceError(sentence)
    verb = _require_word(_lemma(rest[0]), sentence)
    obj_tokens = _strip_article(rest[1:])
    if len(obj_tokens) != 1:
        raise UnrecognizedSentenceError(sentence)
    obj = _require_word(_lemma(obj_tokens[0]), sentence)
    return Literal(verb, (_RULE_VAR, Term(obj)), negative)


def _parse_rule(tokens: list[str], sentence: str) -> Rule:
    try:
        then_at = tokens.index("then")
    except ValueError:
        raise UnrecognizedSentenceError(sentence, "rule sentence lacks 'then'") from None
    premise_tokens = tokens[1:then_at]
    conclusion_tokens = tokens[then_at + 1:]
    if not premise_tokens or premise_tokens[0] not in _PRONOUN_SUBJECTS:
        raise UnrecognizedSentenceError(sentence, "rule must start 'if someone/something'")
    conjuncts = _split_conjuncts(premise_tokens[1:], sentence)
    body = tuple(_parse_premise(c, sentence) for c in conjuncts)
    head = _parse_conclusion(conclusion_tokens, sentence)
    return Rule(head, body)


def parse_sentence(sentence: str) -> Literal | Rule:
    """Map one sentence to a ground literal (facts, questions) or a rule."""
    tokens = _tokens(sentence)
    if not tokens:
        raise UnrecognizedSentenceError(sentence, "empty sentence")
    try:
        if tokens[0] == "if":
            return _parse_rule(tokens, sentence)
        return _parse_fact(tokens, sentence)
    except ValueError as exc:  # Term/Literal constructor rejections
        raise UnrecognizedSentenceError(sentence, str(exc)) from None


def parse_proposition(sentence: str) -> Proposition:
    parsed = parse_sentence(sentence)
    kind = "rule" if isinstance(parsed, Rule) else "fact"
    return Proposition(kind, sentence, parsed)


# --- rendering ----------------------------------------------------------

def render_literal_sentence(lit: Literal) -> str:
    """Canonical declarative sentence for a ground literal."""
    if not lit.is_ground:
        raise ValueError(f"cannot render non-ground literal {lit}")
    if lit.arity == 1:
        polarity = "is not" if lit.negative else "is"
        return f"{lit.args[0]} {polarity} {lit.predicate}."
    subj, obj = lit.args
    if lit.negative:
        return f"{subj} does not {lit.predicate} {obj}."
    return f"{subj} {third_person(lit.predicate)} {obj}."


def _render_premise(lit: Literal, rule_var: str) -> str:
    if lit.arity == 1:
        if lit.args[0].name != rule_var:
            raise ValueError(f"premise {lit} does not mention the rule subject")
        return f"is not {lit.predicate}" if lit.negative else f"is {lit.predicate}"
    subj, obj = lit.args
    if subj.name != rule_var or obj.is_variable:
        raise ValueError(f"premise {lit} is not expressible as a sentence")
    if lit.negative:
        return f"does not {lit.predicate} {obj}"
    return f"{third_person(lit.predicate)} {obj}"


def _render_conclusion(lit: Literal, rule_var: str, pronoun: str) -> str:
    if lit.arity == 1:
        if lit.args[0].name != rule_var:
            raise ValueError(f"conclusion {lit} does not mention the rule subject")
        polarity = "not " if lit.negative else ""
        copula = "are" if pronoun == "they" else "is"
        return f"{pronoun} {copula} {polarity}{lit.predicate}"
    subj, obj = lit.args
    if subj.name != rule_var or obj.is_variable:
        raise ValueError(f"conclusion {lit} is not expressible as a sentence")
    if lit.negative:
        aux = "do" if pronoun == "they" else "does"
        return f"{pronoun} {aux} not {lit.predicate} {obj}"
    verb = lit.predicate if pronoun == "they" else third_person(lit.predicate)
    return f"{pronoun} {verb} {obj}"


def render_rule_sentence(rule: Rule, style: str = "people") -> str:
    """Canonical conditional sentence; people style says someone/they,
    animal style says something/it. Both parse back to the same rule."""
    rule_vars = {t.name for lit in (rule.head, *rule.body) for t in lit.args if t.is_variable}
    if len(rule_vars) != 1:
        raise ValueError(f"rule {rule} does not have exactly one subject variable")
    rule_var = next(iter(rule_vars))
    subject, pronoun = ("something", "it") if style == "animal" else ("someone", "they")
    premises = " and ".join(_render_premise(lit, rule_var) for lit in rule.body)
    conclusion = _render_conclusion(rule.head, rule_var, pronoun)
    return f"if {subject} {premises} then {conclusion}."


def render_statement(obj: Literal | Rule, style: str = "people") -> str:
    if isinstance(obj, Rule):
        return render_rule_sentence(obj, style)
    return render_literal_sentence(obj)


def back_translate(program: Program) -> list[str]:
    """Canonical sentences in canonical program order, query last.
    Every returned sentence re-parses to the statement that produced it."""
    facts, rules = canonical_order(program)
    sentences = [render_literal_sentence(f) for f in facts]
    sentences += [render_rule_sentence(r) for r in rules]
    sentences.append(render_literal_sentence(program.query))
    return sentences


# --- instance translation and comparison ---------------------------------

def translate_instance(instance: Instance) -> Program:
    """Oracle translation: parse every sentence and assemble the program.
    No closed-world supplementation happens here."""
    errors: list[tuple[str, int, str, str]] = []
    facts: list[Literal] = []
    rules: list[Rule] = []

    for i, sentence in enumerate(instance.facts):
        try:
            parsed = parse_sentence(sentence)
            if isinstance(parsed, Rule):
                errors.append(("facts", i, sentence, "expected a fact sentence"))
            else:
                facts.append(parsed)
        except UnrecognizedSentenceError as exc:
            errors.append(("facts", i, sentence, str(exc)))

    for i, sentence in enumerate(instance.rules):
        try:
            parsed = parse_sentence(sentence)
            if isinstance(parsed, Rule):
                rules.append(parsed)
            else:
                errors.append(("rules", i, sentence, "expected a rule sentence"))
        except UnrecognizedSentenceError as exc:
            errors.append(("rules", i, sentence, str(exc)))

    query: Literal | None = None
    try:
        parsed = parse_sentence(instance.question)
        if isinstance(parsed, Rule) or not parsed.is_ground:
            errors.append(("question", 0, instance.question, "question must be a ground fact sentence"))
        else:
            query = parsed
    except UnrecognizedSentenceError as exc:
        errors.append(("question", 0, instance.question, str(exc)))

    if errors or query is None:
        raise InstanceTranslationError(errors)
    return Program(frozenset(facts), tuple(rules), query)


def _canonical_key(obj: Literal | Rule):
    if isinstance(obj, Rule):
        return ("rule", obj.head.sort_key(), tuple(sorted(b.sort_key() for b in obj.body)))
    return ("lit", obj.sort_key())


def _canonicalize_side(sentences) -> tuple[set, dict, list[str]]:
    keys: set = set()
    rendering: dict = {}
    bad: list[str] = []
    for sentence in sentences:
        if not str(sentence).strip():
            continue
        try:
            parsed = parse_sentence(str(sentence))
        except UnrecognizedSentenceError:
            bad.append(str(sentence))
            continue
        key = _canonical_key(parsed)
        keys.add(key)
        rendering[key] = render_statement(parsed)
    return keys, rendering, bad


def canonical_compare(a, b) -> CompareVerdict:
    """Set comparison of two sentence lists after parsing and
    canonicalization (rule premise order is ignored). Unparseable entries
    make the verdict `different`, never an error."""
    keys_a, render_a, bad_a = _canonicalize_side(a)
    keys_b, render_b, bad_b = _canonicalize_side(b)
    if bad_a or bad_b:
        shown = "; ".join(repr(s) for s in (bad_a + bad_b)[:4])
        return CompareVerdict(False, f"unparseable sentences: {shown}")
    if keys_a == keys_b:
        return CompareVerdict(True)
    only_a = sorted(render_a[k] for k in keys_a - keys_b)
    only_b = sorted(render_b[k] for k in keys_b - keys_a)
    parts = []
    if only_a:
        parts.append("only in the first list: " + " | ".join(only_a))
    if only_b:
        parts.append("only in the second list: " + " | ".join(only_b))
    return CompareVerdict(False, "; ".join(parts))
