"""Chat-completion backends.

Three kinds share one interface:

  * live          -- OpenAI-style HTTP chat completion with retry/backoff.
  * perfect-mock  -- proxies the deterministic oracle: translation prompts
                     get the exact oracle program, back-translation prompts
                     get the canonical sentences, comparisons get the
                     deterministic comparator's verdict.
  * faulty-mock   -- wraps the perfect mock and corrupts its output at
                     configured rates. Corruption is text-level so parser
                     diagnostics point at real positions. Faults are keyed
                     to the request content (not call order), so runs are
                     reproducible under any concurrency interleaving, and
                     they heal after a configured number of repair attempts.

No network traffic ever happens unless kind == "live".
"""

from __future__ import annotations

import os
import random
import re
import threading
import time
from dataclasses import dataclass, field

import requests

from .chat import ChatRequest, TASK_TAGS, extract_sections, find_task_tag, marked_payload, section_lines
from .dsl import format_program, lenient_statements, try_parse_program
from .engine import Literal, Rule, Term
from .nl import (
    Instance,
    canonical_compare,
    render_statement,
    translate_instance,
)
from .util import stable_seed


class LlmError(Exception):
    """Base class for backend failures."""


class TransportError(LlmError):
    pass


class AuthError(LlmError):
    pass


class BudgetExceededError(LlmError):
    pass


class MalformedResponseError(LlmError):
    pass


class UnknownTaskError(LlmError):
    pass


SEMANTIC_FAULT_KINDS = frozenset({"drop-statement", "rename-predicate", "flip-polarity"})
SYNTAX_FAULT_KINDS = frozenset({"break-token", "unsafe-rule"})
ALL_FAULT_KINDS = SEMANTIC_FAULT_KINDS | SYNTAX_FAULT_KINDS


@dataclass(frozen=True)
class FaultProfile:
    """Seeded corruption behavior for the faulty mock.

    faults_heal_after=k means the k-th repair (or retranslation) attempt for
    a corrupted exchange gets the pristine text; None means it never does.
    """

    syntax_fault_rate: float = 0.0
    semantic_fault_rate: float = 0.0
    fault_kinds: frozenset[str] = ALL_FAULT_KINDS
    rng_seed: int = 0
    faults_heal_after: int | None = 1

    def __post_init__(self):
        if not isinstance(self.fault_kinds, frozenset):
            object.__setattr__(self, "fault_kinds", frozenset(self.fault_kinds))
        for rate in (self.syntax_fault_rate, self.semantic_fault_rate):
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"fault rate {rate} outside [0, 1]")
        unknown = self.fault_kinds - ALL_FAULT_KINDS
        if unknown:
            raise ValueError(f"unknown fault kinds {sorted(unknown)}")

    def to_dict(self):
        return {
            "syntax_fault_rate": self.syntax_fault_rate,
            "semantic_fault_rate": self.semantic_fault_rate,
            "fault_kinds": sorted(self.fault_kinds),
            "rng_seed": self.rng_seed,
            "faults_heal_after": self.faults_heal_after,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FaultProfile":
        kwargs = dict(data)
        if "fault_kinds" in kwargs:
            kwargs["fault_kinds"] = frozenset(kwargs["fault_kinds"])
        return cls(**kwargs)


@dataclass
class BackendConfig:
    kind: str = "perfect-mock"  # live | perfect-mock | faulty-mock
    endpoint: str = ""
    api_key_env: str = ""
    model: str = "gpt-3.5-turbo"
    request_timeout: float = 30.0
    max_retries: int = 2
    request_budget: int | None = None
    fault_profile: FaultProfile = field(default_factory=FaultProfile)

    def __post_init__(self):
        if self.kind not in ("live", "perfect-mock", "faulty-mock"):
            raise ValueError(f"unknown backend kind {self.kind!r}")

    def to_dict(self):
        return {
            "kind": self.kind,
            "endpoint": self.endpoint,
            "api_key_env": self.api_key_env,
            "model": self.model,
            "request_timeout": self.request_timeout,
            "max_retries": self.max_retries,
            "request_budget": self.request_budget,
            "fault_profile": self.fault_profile.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BackendConfig":
        banned = {k for k in data if "key" in k and k != "api_key_env"}
        if banned:
            # Credentials live in the environment, never in config files.
            raise ValueError(f"config must not carry credentials: {sorted(banned)}")
        kwargs = dict(data)
        if "fault_profile" in kwargs and isinstance(kwargs["fault_profile"], dict):
            kwargs["fault_profile"] = FaultProfile.from_dict(kwargs["fault_profile"])
        return cls(**kwargs)


def classify_request(request: ChatRequest) -> str:
    """Task tag embedded by the template store; UnknownTaskError without one."""
    tag = find_task_tag(request)
    if tag is None or tag not in TASK_TAGS:
        raise UnknownTaskError(f"request carries no recognized task marker (got {tag!r})")
    return tag


class LlmBackend:
    """Shared budget accounting; subclasses implement `_complete`."""

    def __init__(self, config: BackendConfig):
        self.config = config
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return self._calls

    def complete(self, request: ChatRequest) -> str:
        budget = self.config.request_budget
        with self._lock:
            if budget is not None and self._calls >= budget:
                raise BudgetExceededError(f"request budget of {budget} exhausted")
            self._calls += 1
        return self._complete(request)

    def _complete(self, request: ChatRequest) -> str:
        raise NotImplementedError


def _with_newline(text: str) -> str:
    return text if not text or text.endswith("\n") else text + "\n"


def _erase_variable_names(obj):
    """Sentences carry no variable identity ("someone ... they"), so reading
    a rule aloud maps every variable to the same subject."""
    if not isinstance(obj, Rule):
        return obj
    def fold(lit: Literal) -> Literal:
        args = tuple(Term("X") if t.is_variable else t for t in lit.args)
        return Literal(lit.predicate, args, lit.negative)
    return Rule(fold(obj.head), tuple(fold(b) for b in obj.body))


class PerfectMockBackend(LlmBackend):
    """Oracle proxy: deterministic, always correct, no network."""

    def _complete(self, request: ChatRequest) -> str:
        tag = classify_request(request)
        payload = marked_payload(request) or ""
        sections = extract_sections(payload)
        if tag == "translate":
            return self._translate(sections)
        if tag == "back-translate":
            return self._back_translate(sections)
        if tag == "compare-step1":
            return self._compare_step1(sections)
        if tag == "compare-step2":
            return self._compare_step2(sections)
        return self._repair(sections)

    def _translate(self, sections) -> str:
        question = section_lines(sections, "question")
        if len(question) != 1:
            raise MalformedResponseError("translate prompt must carry exactly one question line")
        instance = Instance(
            id="prompt",
            facts=section_lines(sections, "facts") + section_lines(sections, "supplements"),
            rules=section_lines(sections, "rules"),
            question=question[0],
        )
        return format_program(translate_instance(instance))

    def _back_translate(self, sections) -> str:
        statements = lenient_statements(sections.get("program", ""))
        sentences = []
        for _, obj in statements:
            try:
                sentences.append(render_statement(_erase_variable_names(obj)))
            except ValueError:
                continue  # outside the sentence grammar; a human would skip it too
        return "\n".join(sentences)

    def _compare_step1(self, sections) -> str:
        verdict = canonical_compare(
            section_lines(sections, "original"), section_lines(sections, "roundtrip")
        )
        finding = (
            "Every fact, rule, and question lines up after reordering."
            if verdict.same
            else f"Mismatch found: {verdict.detail}"
        )
        return "\n".join(
            [
                "Let's think step by step.",
                "I will parse both lists and compare the stated facts, rules, and question as sets.",
                finding,
                f"STATUS: {'same' if verdict.same else 'different'}",
            ]
        )

    def _compare_step2(self, sections) -> str:
        analysis = sections.get("analysis", "")
        match = re.search(r"STATUS:\s*(same|different)", analysis, re.IGNORECASE)
        if match and match.group(1).lower() == "same":
            return "SAME"
        return "DIFFERENT"

    def _repair(self, sections) -> str:
        text = _with_newline(sections.get("program", ""))
        program, _ = try_parse_program(text)
        if program is not None:
            return format_program(program)
        return text  # nothing known about the author's intent; echo it back


# --- fault engine --------------------------------------------------------

_PRED_CALL = re.compile(r"(~?)\b([a-z][a-z0-9_]*)\s*\(")


def _statement_lines(text: str) -> list[str]:
    return [line for line in text.splitlines() if line.strip()]


def _predicate_arities(text: str) -> dict[str, int]:
    arities: dict[str, int] = {}
    for match in _PRED_CALL.finditer(text):
        tail = text[match.end():]
        close = tail.find(")")
        if close < 0:
            continue
        arity = tail[:close].count(",") + 1
        arities.setdefault(match.group(2), arity)
    return arities


def _apply_semantic_fault(text: str, kind: str, rng: random.Random) -> str:
    lines = _statement_lines(text)
    if not lines:
        return text
    if kind == "drop-statement":
        if len(lines) <= 1:
            return text
        del lines[rng.randrange(len(lines))]
    elif kind == "rename-predicate":
        arities = _predicate_arities(text)
        spots = []
        for i, line in enumerate(lines):
            for match in _PRED_CALL.finditer(line):
                spots.append((i, match))
        if not spots:
            return text
        i, match = spots[rng.randrange(len(spots))]
        old = match.group(2)
        candidates = sorted(
            p for p, a in arities.items() if p != old and a == arities.get(old)
        )
        new = rng.choice(candidates) if candidates else old + "x"
        lines[i] = lines[i][: match.start(2)] + new + lines[i][match.end(2):]
    elif kind == "flip-polarity":
        i = rng.randrange(len(lines))
        line = lines[i]
        match = re.match(r"(\s*\?\s*)?(~?)", line)
        prefix_end = match.end(1) if match.group(1) else 0
        if match.group(2):
            lines[i] = line[:prefix_end] + line[prefix_end + 1:]
        else:
            lines[i] = line[:prefix_end] + "~" + line[prefix_end:]
    return "\n".join(lines) + "\n"


def _apply_syntax_fault(text: str, kind: str, rng: random.Random) -> str:
    lines = _statement_lines(text)
    if not lines:
        return text
    if kind == "unsafe-rule":
        var_re = re.compile(r"\b[A-Z][A-Za-z0-9_]*\b")
        rule_spots = []
        for i, line in enumerate(lines):
            if ":-" not in line:
                continue
            head = line.split(":-", 1)[0]
            match = var_re.search(head)
            if match:
                rule_spots.append((i, match))
        if rule_spots:
            i, match = rule_spots[rng.randrange(len(rule_spots))]
            fresh = "Z9" if match.group(0) != "Z9" else "Q9"
            line = lines[i]
            lines[i] = line[: match.start()] + fresh + line[match.end():]
            return "\n".join(lines) + "\n"
        kind = "break-token"  # no rule with a head variable to corrupt
    # break-token: delete one structural character
    i = rng.randrange(len(lines))
    line = lines[i]
    spots = [j for j, ch in enumerate(line) if ch in "(),.:-"]
    if not spots:
        return text
    j = spots[rng.randrange(len(spots))]
    lines[i] = line[:j] + line[j + 1:]
    return "\n".join(lines) + "\n"


class FaultyMockBackend(PerfectMockBackend):
    """Perfect mock plus seeded, content-keyed corruption.

    Semantic faults (drop-statement, rename-predicate, flip-polarity) change
    what the program says while usually staying parseable, so the semantic
    loop's back-translation comparison catches them. break-token destroys a
    statement, which back-translation also surfaces as missing content.
    unsafe-rule only perturbs a rule variable: back-translation erases
    variables, so the comparison cannot see it and only the syntax loop's
    diagnostics can trigger its repair.
    """

    def __init__(self, config: BackendConfig):
        super().__init__(config)
        self.profile = config.fault_profile
        self._pristine: dict[str, str] = {}
        self._translate_attempts: dict[str, int] = {}
        self._repair_attempts: dict[str, int] = {}
        self._state_lock = threading.Lock()

    def _exchange_key(self, sections) -> str:
        parts = tuple(
            sections.get(name, "").strip()
            for name in ("facts", "supplements", "rules", "question")
        )
        return f"{stable_seed(parts):016x}"

    def _translate(self, sections) -> str:
        pristine = super()._translate(sections)
        key = self._exchange_key(sections)
        with self._state_lock:
            attempt = self._translate_attempts.get(key, 0)
            self._translate_attempts[key] = attempt + 1
        heal = self.profile.faults_heal_after
        if heal is not None and attempt >= heal:
            return pristine

        decide = random.Random(stable_seed(self.profile.rng_seed, "decide", key))
        semantic_roll = decide.random()
        syntax_roll = decide.random()
        semantic_kinds = sorted(self.profile.fault_kinds & SEMANTIC_FAULT_KINDS)
        syntax_kinds = sorted(self.profile.fault_kinds & SYNTAX_FAULT_KINDS)
        semantic_kind = (
            decide.choice(semantic_kinds)
            if semantic_kinds and semantic_roll < self.profile.semantic_fault_rate
            else None
        )
        syntax_kind = (
            decide.choice(syntax_kinds)
            if syntax_kinds and syntax_roll < self.profile.syntax_fault_rate
            else None
        )
        if semantic_kind is None and syntax_kind is None:
            return pristine

        mutate = random.Random(stable_seed(self.profile.rng_seed, "mutate", key, attempt))
        text = pristine
        if semantic_kind is not None:
            text = _apply_semantic_fault(text, semantic_kind, mutate)
        if syntax_kind is not None:
            text = _apply_syntax_fault(text, syntax_kind, mutate)
        if text != pristine:
            with self._state_lock:
                self._pristine[text.strip()] = pristine
        return text

    def _back_translate(self, sections) -> str:
        # A model reading damaged code still reports the statements it can
        # make sense of; the lenient reader models exactly that.
        return super()._back_translate(sections)

    def _repair(self, sections) -> str:
        text = _with_newline(sections.get("program", ""))
        key = text.strip()
        with self._state_lock:
            pristine = self._pristine.get(key)
            attempts = self._repair_attempts.get(key, 0) + 1
            self._repair_attempts[key] = attempts
        if pristine is None:
            return super()._repair(sections)
        heal = self.profile.faults_heal_after
        if heal is not None and attempts >= heal:
            return pristine
        return text


class LiveBackend(LlmBackend):
    """OpenAI-style chat completion over HTTPS with bounded retries."""

    _TRANSIENT = (429, 500, 502, 503, 504)

    def _complete(self, request: ChatRequest) -> str:
        cfg = self.config
        key_env = cfg.api_key_env
        api_key = os.environ.get(key_env) if key_env else None
        if not api_key:
            raise AuthError(f"environment variable {key_env or '<unset>'!r} holds no API key")
        if not cfg.endpoint:
            raise TransportError("live backend has no endpoint configured")
        body = {
            "model": request.model or cfg.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {"Authorization": f"Bearer {api_key}"}
        delay = 0.5
        last_error: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            try:
                response = requests.post(
                    cfg.endpoint, json=body, headers=headers, timeout=cfg.request_timeout
                )
            except requests.RequestException as exc:
                last_error = exc
            else:
                if response.status_code in (401, 403):
                    raise AuthError(f"endpoint rejected the API key (http {response.status_code})")
                if response.status_code in self._TRANSIENT:
                    last_error = TransportError(f"http {response.status_code}")
                elif response.status_code >= 400:
                    raise TransportError(f"http {response.status_code}: {response.text[:200]}")
                else:
                    try:
                        content = response.json()["choices"][0]["message"]["content"]
                    except (ValueError, KeyError, IndexError, TypeError) as exc:
                        raise MalformedResponseError(f"unexpected response shape: {exc}") from exc
                    if not isinstance(content, str):
                        raise MalformedResponseError("assistant content is not a string")
                    return content
            if attempt < cfg.max_retries:
                time.sleep(delay)
                delay *= 2
        raise TransportError(f"giving up after {cfg.max_retries + 1} attempts: {last_error}")


def make_backend(config: BackendConfig) -> LlmBackend:
    if config.kind == "perfect-mock":
        return PerfectMockBackend(config)
    if config.kind == "faulty-mock":
        return FaultyMockBackend(config)
    return LiveBackend(config)
