"""End-to-end run of one instance: closed-world supplementation, LLM
translation, the semantic-correction loop (back-translate and compare), the
syntax-correction loop (parse, feed diagnostics back, bounded retries), and
local execution.

Everything a run does is captured in a TranslationTrace; failures become
recorded outcomes, never exceptions past `run_instance`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import engine
from .chat import ChatRequest
from .cwa import supplement
from .dsl import GRAMMAR_HELP, try_parse_program
from .engine import InconsistencyError, UnsafeRuleError, UnstratifiableError
from .llm import (
    BackendConfig,
    BudgetExceededError,
    LlmBackend,
    LlmError,
    make_backend,
)
from .nl import (
    CompareVerdict,
    Instance,
    InstanceTranslationError,
    UnrecognizedSentenceError,
    canonical_compare,
    render_literal_sentence,
    translate_instance,
)
from .prompts import MissingSlotError, TemplateStore, UnparseableVerdictError, extract_verdict

TRACE_SCHEMA_VERSION = 1

FAILURE_KINDS = (
    "untranslatable",
    "unparseable",
    "unparseable-after-repair",
    "unstratifiable",
    "inconsistent",
    "timeout",
    "budget-exceeded",
    "backend-error",
)

ABLATIONS = ("base", "se", "se-syn")


@dataclass
class PipelineConfig:
    backend: BackendConfig = field(default_factory=BackendConfig)
    max_semantic_iterations: int = 3
    max_syntax_iterations: int = 3
    per_instance_timeout: float = 60.0
    comparator: str = "deterministic"  # deterministic | llm
    cwa_enabled: bool = True
    ablation: str = "se-syn"  # base | se | se-syn

    def __post_init__(self):
        if self.ablation not in ABLATIONS:
            raise ValueError(f"unknown ablation {self.ablation!r}")
        if self.comparator not in ("deterministic", "llm"):
            raise ValueError(f"unknown comparator {self.comparator!r}")
        if self.max_semantic_iterations < 1 or self.max_syntax_iterations < 1:
            raise ValueError("iteration limits must be positive")
        if self.per_instance_timeout <= 0:
            raise ValueError("per-instance timeout must be positive")

    def to_dict(self):
        return {
            "backend": self.backend.to_dict(),
            "max_semantic_iterations": self.max_semantic_iterations,
            "max_syntax_iterations": self.max_syntax_iterations,
            "per_instance_timeout": self.per_instance_timeout,
            "comparator": self.comparator,
            "cwa_enabled": self.cwa_enabled,
            "ablation": self.ablation,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        kwargs = dict(data)
        if "backend" in kwargs and isinstance(kwargs["backend"], dict):
            kwargs["backend"] = BackendConfig.from_dict(kwargs["backend"])
        return cls(**kwargs)


@dataclass
class ExchangeRecord:
    phase: str
    prompt_name: str
    iteration: int
    request_messages: list[dict]
    reply: str


@dataclass
class TranslationTrace:
    """Append-only record of one pipeline run."""

    instance_id: str
    gold_label: bool | None = None
    supplements: list[str] = field(default_factory=list)
    exchanges: list[ExchangeRecord] = field(default_factory=list)
    verdicts: list[dict] = field(default_factory=list)
    semantic_iterations: int = 0
    syntax_repairs: int = 0
    final_program: str | None = None
    final_diagnostics: list[str] = field(default_factory=list)
    answer: bool | None = None
    failure: str | None = None
    phase_ms: dict[str, float] = field(default_factory=dict)
    backend_calls: int = 0
    notes: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": TRACE_SCHEMA_VERSION,
            "instance_id": self.instance_id,
            "gold_label": self.gold_label,
            "supplements": list(self.supplements),
            "exchanges": [
                {
                    "phase": ex.phase,
                    "prompt_name": ex.prompt_name,
                    "iteration": ex.iteration,
                    "request_messages": ex.request_messages,
                    "reply": ex.reply,
                }
                for ex in self.exchanges
            ],
            "verdicts": list(self.verdicts),
            "semantic_iterations": self.semantic_iterations,
            "syntax_repairs": self.syntax_repairs,
            "final_program": self.final_program,
            "final_diagnostics": list(self.final_diagnostics),
            "answer": self.answer,
            "failure": self.failure,
            "phase_ms": dict(self.phase_ms),
            "backend_calls": self.backend_calls,
            "notes": list(self.notes),
        }


@dataclass
class PipelineResult:
    answer: bool | None
    failure: str | None
    trace: TranslationTrace


@dataclass
class ExecutionOutcome:
    answer: bool | None
    failure: str | None
    diagnostics: tuple[str, ...] = ()

    @property
    def executable(self) -> bool:
        return self.failure is None


def _strip_fences(text: str) -> str:
    stripped = text.strip()
    if stripped.startswith("```"):
        lines = stripped.splitlines()
        lines = lines[1:]
        if lines and lines[-1].strip().startswith("```"):
            lines = lines[:-1]
        stripped = "\n".join(lines)
    return stripped + "\n" if stripped else stripped


def _feedback_text(detail: str) -> str:
    if not detail:
        return ""
    return (
        "A previous translation attempt did not match the problem statement. "
        f"Difference: {detail}\nProduce a corrected translation."
    )


def execute_final(program_text: str) -> ExecutionOutcome:
    """Parse, evaluate, answer; no repairs and no supplementation. An
    instance counts as executable when this yields TRUE or FALSE."""
    program, diags = try_parse_program(_strip_fences(program_text))
    if program is None:
        return ExecutionOutcome(None, "unparseable", tuple(str(d) for d in diags))
    try:
        return ExecutionOutcome(engine.answer(program), None)
    except (UnstratifiableError, UnsafeRuleError) as exc:
        return ExecutionOutcome(None, "unstratifiable", (str(exc),))
    except InconsistencyError as exc:
        return ExecutionOutcome(None, "inconsistent", (str(exc),))


class Pipeline:
    """Runs instances against one backend. Safe to share across threads:
    per-run state lives in locals and the trace, and the backend guards its
    own budget counter."""

    def __init__(
        self,
        config: PipelineConfig,
        backend: LlmBackend | None = None,
        templates: TemplateStore | None = None,
    ):
        self.config = config
        self.backend = backend if backend is not None else make_backend(config.backend)
        self.templates = templates if templates is not None else TemplateStore()

    # -- helpers ---------------------------------------------------------

    def _call(self, trace: TranslationTrace, phase: str, prompt_name: str,
              slots: dict, iteration: int) -> str:
        messages = self.templates.render(prompt_name, slots)
        request = ChatRequest(model=self.config.backend.model, messages=tuple(messages))
        reply = self.backend.complete(request)
        trace.exchanges.append(
            ExchangeRecord(
                phase=phase,
                prompt_name=prompt_name,
                iteration=iteration,
                request_messages=[{"role": m.role, "content": m.content} for m in messages],
                reply=reply,
            )
        )
        return reply

    def _compute_supplements(self, instance: Instance, trace: TranslationTrace) -> list[str]:
        try:
            base = translate_instance(instance)
        except (InstanceTranslationError, UnrecognizedSentenceError) as exc:
            trace.notes.append(f"cwa supplementation skipped: {exc}")
            return []
        completed = supplement(base)
        added = sorted(completed.facts - base.facts, key=lambda lit: lit.sort_key())
        return [render_literal_sentence(lit) for lit in added]

    def judge_similarity(self, originals, roundtrip, trace: TranslationTrace | None = None,
                         iteration: int = 0) -> CompareVerdict:
        """Deterministic comparator, or the two-step zero-shot CoT judgment
        when the llm comparator is configured. An unparseable step-2 verdict
        conservatively counts as different."""
        if self.config.comparator == "deterministic":
            verdict = canonical_compare(originals, roundtrip)
        else:
            assert trace is not None
            analysis = self._call(
                trace, "semantic", "compare-step1",
                {
                    "original_sentences": "\n".join(originals),
                    "roundtrip_sentences": "\n".join(roundtrip),
                },
                iteration,
            )
            reply = self._call(
                trace, "semantic", "compare-step2", {"step1_analysis": analysis}, iteration
            )
            try:
                word = extract_verdict(reply)
            except UnparseableVerdictError:
                if trace is not None:
                    trace.notes.append("unparseable comparison verdict; treated as different")
                word = "different"
            verdict = CompareVerdict(word == "same", "" if word == "same" else analysis[:500])
        if trace is not None:
            trace.verdicts.append(
                {"iteration": iteration, "verdict": "same" if verdict.same else "different",
                 "detail": verdict.detail}
            )
        return verdict

    def translate_once(self, instance: Instance) -> str:
        """Single translation round-trip (used by the CLI); no loops."""
        trace = TranslationTrace(instance_id=instance.id, gold_label=instance.gold_label)
        supplements = self._compute_supplements(instance, trace) if self.config.cwa_enabled else []
        slots = self._translate_slots(instance, supplements, "")
        return _strip_fences(self._call(trace, "translate", "translate", slots, 1))

    def _translate_slots(self, instance: Instance, supplements: list[str], feedback: str) -> dict:
        return {
            "facts": "\n".join(instance.facts),
            "rules": "\n".join(instance.rules),
            "question": instance.question,
            "supplements": "\n".join(supplements),
            "dsl_grammar": GRAMMAR_HELP,
            "feedback": _feedback_text(feedback),
        }

    # -- the algorithm ----------------------------------------------------

    def run_instance(self, instance: Instance) -> PipelineResult:
        cfg = self.config
        trace = TranslationTrace(instance_id=instance.id, gold_label=instance.gold_label)
        started = time.perf_counter()
        calls_before = self.backend.calls
        failure: str | None = None
        answer_value: bool | None = None

        try:
            phase_start = time.perf_counter()
            supplements = self._compute_supplements(instance, trace) if cfg.cwa_enabled else []
            trace.supplements = supplements
            trace.phase_ms["supplement"] = (time.perf_counter() - phase_start) * 1000

            originals = list(instance.facts) + supplements + list(instance.rules)
            originals.append(instance.question)

            # Translation, wrapped in the semantic loop when enabled. The
            # different-flag starts true, so translation always runs once.
            phase_start = time.perf_counter()
            semantic_on = cfg.ablation in ("se", "se-syn")
            program_text = ""
            detail = ""
            if not semantic_on:
                program_text = self._call(
                    trace, "translate", "translate",
                    self._translate_slots(instance, supplements, ""), 1,
                )
            else:
                for iteration in range(1, cfg.max_semantic_iterations + 1):
                    trace.semantic_iterations = iteration
                    program_text = self._call(
                        trace, "translate", "translate",
                        self._translate_slots(instance, supplements, detail), iteration,
                    )
                    roundtrip_reply = self._call(
                        trace, "semantic", "back-translate",
                        {"program_text": _strip_fences(program_text)}, iteration,
                    )
                    roundtrip = [ln.strip() for ln in roundtrip_reply.splitlines() if ln.strip()]
                    verdict = self.judge_similarity(originals, roundtrip, trace, iteration)
                    if verdict.same:
                        break
                    detail = verdict.detail or "the reconstructed sentences differ"
            trace.phase_ms["semantic"] = (time.perf_counter() - phase_start) * 1000

            # Parse, then the syntax loop when enabled. The wall-clock guard
            # sits here, mirroring the run-time overflow check of the
            # correction algorithm; the semantic loop is bounded by count.
            phase_start = time.perf_counter()
            program_text = _strip_fences(program_text)
            program, diags = try_parse_program(program_text)
            repairs = 0
            syntax_on = cfg.ablation == "se-syn"
            while program is None and syntax_on and repairs < cfg.max_syntax_iterations:
                if time.perf_counter() - started > cfg.per_instance_timeout:
                    failure = "timeout"
                    break
                repairs += 1
                reply = self._call(
                    trace, "syntax", "repair",
                    {
                        "program_text": program_text,
                        "diagnostics": "\n".join(str(d) for d in diags),
                    },
                    repairs,
                )
                program_text = _strip_fences(reply)
                program, diags = try_parse_program(program_text)
            trace.syntax_repairs = repairs
            trace.final_program = program_text
            trace.phase_ms["syntax"] = (time.perf_counter() - phase_start) * 1000

            if failure is None and program is None:
                trace.final_diagnostics = [str(d) for d in diags]
                failure = "unparseable-after-repair" if repairs else "unparseable"

            if failure is None:
                phase_start = time.perf_counter()
                try:
                    answer_value = engine.answer(program)
                except (UnstratifiableError, UnsafeRuleError) as exc:
                    failure = "unstratifiable"
                    trace.notes.append(str(exc))
                except InconsistencyError as exc:
                    failure = "inconsistent"
                    trace.notes.append(str(exc))
                trace.phase_ms["evaluate"] = (time.perf_counter() - phase_start) * 1000

        except BudgetExceededError as exc:
            failure = "budget-exceeded"
            trace.notes.append(str(exc))
        except (InstanceTranslationError, UnrecognizedSentenceError) as exc:
            failure = "untranslatable"
            trace.notes.append(str(exc))
        except (LlmError, MissingSlotError) as exc:
            failure = "backend-error"
            trace.notes.append(f"{type(exc).__name__}: {exc}")

        trace.answer = answer_value
        trace.failure = failure
        trace.backend_calls = self.backend.calls - calls_before
        return PipelineResult(answer_value, failure, trace)


def run_instance(config: PipelineConfig, instance: Instance,
                 backend: LlmBackend | None = None) -> PipelineResult:
    return Pipeline(config, backend=backend).run_instance(instance)


def judge_similarity(config: PipelineConfig, originals, roundtrip,
                     backend: LlmBackend | None = None) -> CompareVerdict:
    pipeline = Pipeline(config, backend=backend)
    trace = TranslationTrace(instance_id="adhoc")
    return pipeline.judge_similarity(originals, roundtrip, trace, 1)
