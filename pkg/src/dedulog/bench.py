"""Dataset adapters, a synthetic instance generator, experiment runners,
and report emitters.

The generator plants a derivation chain of exactly the requested depth from
meta-attribute facts to the question, surrounds it with distractors that
cannot shorten it, and guarantees that the oracle translation plus
closed-world completion answers the planted gold label. On-disk adapters
read JSON/JSONL records with documented fields and pool every split before
sampling, so draws are seeded and reproducible.
"""

from __future__ import annotations

import json
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .cwa import supplement
from .engine import Literal, Rule, Term, evaluate, proof_depth
from .engine import answer as engine_answer
from .llm import make_backend
from .nl import Instance, render_rule_sentence, third_person, translate_instance
from .pipeline import ABLATIONS, Pipeline, PipelineConfig
from .util import canonical_json, content_hash, stable_seed

DATASET_NAMES = ("pararule-plus", "conceptrules-v1", "conceptrules-v2", "generated")
REPORT_SCHEMA_VERSION = 1


class DatasetFormatError(Exception):
    def __init__(self, source: str, record: str, message: str):
        super().__init__(f"{source} [{record}]: {message}")
        self.source = source
        self.record = record


class InsufficientSamplesError(Exception):
    pass


@dataclass
class DatasetSpec:
    name: str
    variant: str = "n/a"  # simplified | full | n/a
    path: str | None = None
    sample_size: int = 100
    seed: int = 0
    depth_filter: tuple[int, ...] | None = None
    stratified: bool = True

    def __post_init__(self):
        if self.name not in DATASET_NAMES:
            raise ValueError(f"unknown dataset {self.name!r}")
        if self.variant not in ("simplified", "full", "n/a"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.depth_filter is not None:
            self.depth_filter = tuple(sorted(set(self.depth_filter)))

    def to_dict(self):
        return {
            "name": self.name,
            "variant": self.variant,
            "path": self.path,
            "sample_size": self.sample_size,
            "seed": self.seed,
            "depth_filter": list(self.depth_filter) if self.depth_filter else None,
            "stratified": self.stratified,
        }


# --- synthetic instance generator ----------------------------------------

_PEOPLE_NAMES = ("alan", "bob", "dave", "erin", "fiona", "gary", "kate", "paula")
_ANIMAL_NAMES = ("bear", "bird", "cat", "dog", "horse", "lion", "rabbit", "tiger")
_PEOPLE_ATTRS = (
    "bad", "big", "bored", "brave", "calm", "clever", "dull", "eager", "funny",
    "gentle", "happy", "honest", "kind", "nice", "old", "polite", "poor", "proud",
    "quiet", "rich", "rough", "sad", "smart", "strong", "wealthy", "young",
)
_ANIMAL_ATTRS = (
    "angry", "big", "bold", "cute", "dull", "fast", "fierce", "funny", "furry",
    "heavy", "hungry", "kind", "lazy", "lovely", "mean", "nice", "quiet", "round",
    "rough", "slow", "small", "smart", "strong", "tame", "tired", "wild",
)
_VERBS = ("follow", "help", "like", "need", "see", "visit", "want")


def _fact_sentence(lit: Literal, pattern: str) -> str:
    the = "the " if pattern == "animal" else ""
    if lit.arity == 1:
        subject = f"{the}{lit.args[0]}" if pattern == "animal" else str(lit.args[0]).capitalize()
        polarity = "is not" if lit.negative else "is"
        sentence = f"{subject} {polarity} {lit.predicate}."
    else:
        a, b = (str(t) for t in lit.args)
        if pattern == "animal":
            subj, obj = f"the {a}", f"the {b}"
        else:
            subj, obj = a.capitalize(), b.capitalize()
        if lit.negative:
            sentence = f"{subj} does not {lit.predicate} {obj}."
        else:
            sentence = f"{subj} {third_person(lit.predicate)} {obj}."
    return sentence[0].upper() + sentence[1:]


def _rule_surface(rule: Rule, pattern: str) -> str:
    style = "animal" if pattern == "animal" else "people"
    sentence = render_rule_sentence(rule, style)
    return sentence[0].upper() + sentence[1:]


def _build_instance(rng: random.Random, iid: str, depth: int, pattern: str,
                    want_true: bool) -> Instance:
    names = _ANIMAL_NAMES if pattern == "animal" else _PEOPLE_NAMES
    attr_pool = list(_ANIMAL_ATTRS if pattern == "animal" else _PEOPLE_ATTRS)
    rng.shuffle(attr_pool)

    def draw_attr() -> str:
        return attr_pool.pop()

    entity = rng.choice(names)
    chain = [draw_attr() for _ in range(depth + 1)]
    x = Term("X")

    # Which chain steps conclude a negation. A broken-chain FALSE instance
    # needs a positive final conclusion so the closed-world reading cannot
    # rescue the query.
    break_link = want_true is False and rng.random() < 0.5
    step_negative = [rng.random() < 0.3 for _ in range(depth)]
    if break_link:
        step_negative[-1] = False

    facts: list[Literal] = [Literal(chain[0], (Term(entity),))]
    rules: list[Rule] = []
    cwa_needed = False

    prev = Literal(chain[0], (x,))
    for j in range(1, depth + 1):
        head = Literal(chain[j], (x,), step_negative[j - 1])
        body: list[Literal] = []
        if prev.negative:
            # A negated premise alone is unsafe; anchor on the chain start.
            body.append(Literal(chain[0], (x,)))
        body.append(prev)
        roll = rng.random()
        if roll < 0.25 and attr_pool:
            extra = draw_attr()
            body.append(Literal(extra, (x,)))
            facts.append(Literal(extra, (Term(entity),)))
        elif roll < 0.45 and attr_pool:
            # Premise the instance never states; only closed-world
            # completion can satisfy it.
            extra = draw_attr()
            body.append(Literal(extra, (x,), True))
            cwa_needed = True
        rules.append(Rule(head, tuple(body)))
        if head.negative and attr_pool:
            # Keep the negated attribute non-meta, otherwise completion
            # would hand the twin out as a fact and shorten the chain.
            blocker = draw_attr()
            rules.append(Rule(Literal(chain[j], (x,)), (Literal(blocker, (x,)),)))
        prev = head

    final = Literal(chain[depth], (Term(entity),), step_negative[-1])
    if want_true:
        query = final
    elif break_link:
        j = rng.randrange(len(chain) - 1) + 1  # rule index 1..depth
        target = rules[[r.head.predicate for r in rules].index(chain[j])]
        idx = rules.index(target)
        broken_attr = draw_attr() if attr_pool else None
        if broken_attr is None:
            query = final.negated()
        else:
            new_body = tuple(
                Literal(broken_attr, (x,)) if lit.predicate == chain[j - 1] else lit
                for lit in target.body
            )
            rules[idx] = Rule(target.head, new_body)
            query = final
    else:
        query = final.negated()

    # Distractors: off-chain facts and rules that cannot reach the query.
    others = rng.sample([n for n in names if n != entity], k=2)
    distractor_attrs: list[str] = []
    for other in others:
        for _ in range(rng.randrange(1, 3)):
            if not attr_pool:
                break
            attr = draw_attr()
            distractor_attrs.append(attr)
            facts.append(Literal(attr, (Term(other),)))
    if rng.random() < 0.6:
        verb = rng.choice(_VERBS)
        a, b = rng.sample([entity, *others], k=2)
        facts.append(Literal(verb, (Term(a), Term(b)), rng.random() < 0.3))
    for _ in range(rng.randrange(0, 3)):
        if not attr_pool:
            break
        head_attr = draw_attr()
        if distractor_attrs and rng.random() < 0.5:
            premise_attr = rng.choice(distractor_attrs)  # fires for a bystander
        elif attr_pool:
            premise_attr = draw_attr()
        else:
            break
        rules.append(Rule(Literal(head_attr, (x,)), (Literal(premise_attr, (x,)),)))

    fact_sentences = [_fact_sentence(lit, pattern) for lit in facts]
    rule_sentences = [_rule_surface(rule, pattern) for rule in rules]
    rng.shuffle(fact_sentences)
    rng.shuffle(rule_sentences)

    instance = Instance(
        id=iid + ("-cwa" if cwa_needed else ""),
        facts=fact_sentences,
        rules=rule_sentences,
        question=_fact_sentence(query, pattern),
        gold_label=want_true,
        depth=depth,
        pattern=pattern,
    )

    # The construction argument above is easy to get wrong; re-check every
    # instance against the engine before handing it out.
    program = supplement(translate_instance(instance))
    got = engine_answer(program)
    if got is not want_true:
        raise RuntimeError(f"generator bug: {iid} answers {got}, planted {want_true}")
    if want_true:
        model = evaluate(program)
        d = proof_depth(model, program.query)
        if d != depth:
            raise RuntimeError(f"generator bug: {iid} proof depth {d}, planted {depth}")
    return instance


def generate_instances(seed: int, count: int, depth: int, pattern: str = "both") -> list[Instance]:
    """Deterministic corpus of `count` instances at exactly `depth` rule
    applications. Gold labels alternate TRUE/FALSE; with pattern="both" the
    People/Animal scenarios alternate too."""
    if depth not in (2, 3, 4, 5):
        raise ValueError("depth must be between 2 and 5")
    if pattern not in ("people", "animal", "both"):
        raise ValueError(f"unknown pattern {pattern!r}")
    instances = []
    for i in range(count):
        pat = pattern if pattern != "both" else ("people" if i % 2 == 0 else "animal")
        want_true = (i // 2) % 2 == 0 if pattern == "both" else i % 2 == 0
        rng = random.Random(stable_seed(seed, depth, pat, i))
        iid = f"gen-d{depth}-{i:04d}-{pat}"
        instances.append(_build_instance(rng, iid, depth, pat, want_true))
    return instances


# --- on-disk adapters -----------------------------------------------------

def instance_to_dict(instance: Instance) -> dict:
    return {
        "id": instance.id,
        "facts": list(instance.facts),
        "rules": list(instance.rules),
        "question": instance.question,
        "label": instance.gold_label,
        "depth": instance.depth,
        "pattern": instance.pattern,
    }


def _split_context(context) -> tuple[list[str], list[str]]:
    if isinstance(context, str):
        sentences = [s.strip() for s in context.replace("\n", " ").split(".") if s.strip()]
        sentences = [s + "." for s in sentences]
    else:
        sentences = [str(s).strip() for s in context if str(s).strip()]
    facts = [s for s in sentences if not s.lower().startswith("if ")]
    rules = [s for s in sentences if s.lower().startswith("if ")]
    return facts, rules


def _parse_label(value, source, ref) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, int) and value in (0, 1):
        return bool(value)
    if isinstance(value, str) and value.strip().lower() in ("true", "false"):
        return value.strip().lower() == "true"
    raise DatasetFormatError(source, ref, f"unusable label {value!r}")


def record_to_instance(record: dict, source: str, index: int) -> Instance:
    """Adapter schema: id, question, label required; context (string or
    sentence list) or separate facts/rules lists; optional depth, pattern.
    Unknown extra fields are ignored."""
    ref = str(record.get("id", f"record {index}"))
    if not isinstance(record, dict):
        raise DatasetFormatError(source, ref, "record is not an object")
    if "question" not in record:
        raise DatasetFormatError(source, ref, "missing question")
    if "label" not in record and "answer" not in record:
        raise DatasetFormatError(source, ref, "missing label")
    if "facts" in record or "rules" in record:
        facts = [str(s) for s in record.get("facts", [])]
        rules = [str(s) for s in record.get("rules", [])]
    elif "context" in record:
        facts, rules = _split_context(record["context"])
    else:
        raise DatasetFormatError(source, ref, "missing context or facts/rules")
    meta = record.get("meta", {}) if isinstance(record.get("meta"), dict) else {}
    depth = record.get("depth", meta.get("depth"))
    pattern = str(record.get("pattern", meta.get("pattern", "other"))).lower()
    if pattern not in ("people", "animal"):
        pattern = "other"
    return Instance(
        id=ref,
        facts=facts,
        rules=rules,
        question=str(record["question"]),
        gold_label=_parse_label(record.get("label", record.get("answer")), source, ref),
        depth=int(depth) if depth is not None else None,
        pattern=pattern,
    )


def _read_records(path: Path) -> list[tuple[str, int, dict]]:
    out = []
    if path.suffix == ".jsonl":
        with path.open(encoding="utf-8") as fh:
            for i, line in enumerate(fh):
                line = line.strip()
                if not line:
                    continue
                try:
                    out.append((str(path), i, json.loads(line)))
                except json.JSONDecodeError as exc:
                    raise DatasetFormatError(str(path), f"line {i + 1}", str(exc)) from exc
    else:
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(str(path), "file", str(exc)) from exc
        records = data if isinstance(data, list) else [data]
        out.extend((str(path), i, rec) for i, rec in enumerate(records))
    return out


def load_instance_file(path: str | Path) -> list[Instance]:
    p = Path(path)
    return [record_to_instance(rec, src, i) for src, i, rec in _read_records(p)]


def _pool_from_disk(spec: DatasetSpec) -> list[Instance]:
    root = Path(spec.path or "")
    if not root.exists():
        raise DatasetFormatError(str(root), "path", "dataset path does not exist")
    if root.is_file():
        files = [root]
    else:
        files = sorted(p for p in root.rglob("*") if p.suffix in (".json", ".jsonl"))
    if spec.variant != "n/a":
        matching = [p for p in files if spec.variant in str(p.relative_to(root))]
        if matching:
            files = matching
    if not files:
        raise DatasetFormatError(str(root), "path", "no .json/.jsonl files found")
    # All splits (train/test/dev) pool together before sampling.
    pool = []
    for f in files:
        for src, i, rec in _read_records(f):
            pool.append(record_to_instance(rec, src, i))
    return pool


def load_dataset(spec: DatasetSpec) -> list[Instance]:
    """Exactly spec.sample_size instances, drawn with spec.seed. Generated
    specs synthesize per depth; disk specs sample the pooled records,
    stratified 50/50 People/Animal per depth when requested."""
    if spec.name == "generated":
        depths = spec.depth_filter or (2, 3, 4, 5)
        per_depth, remainder = divmod(spec.sample_size, len(depths))
        out = []
        for i, depth in enumerate(depths):
            n = per_depth + (1 if i < remainder else 0)
            out.extend(generate_instances(stable_seed(spec.seed, "gen", depth), n, depth))
        return out

    pool = _pool_from_disk(spec)
    rng = random.Random(stable_seed(spec.seed, "sample", spec.name, spec.variant))
    if spec.depth_filter:
        pool = [inst for inst in pool if inst.depth in spec.depth_filter]

    if spec.name == "pararule-plus" and spec.depth_filter and spec.stratified:
        depths = spec.depth_filter
        per_depth, rem = divmod(spec.sample_size, len(depths))
        chosen = []
        for i, depth in enumerate(depths):
            n = per_depth + (1 if i < rem else 0)
            half = n // 2
            quotas = {"people": half, "animal": n - half}
            for pattern, quota in quotas.items():
                bucket = [x for x in pool if x.depth == depth and x.pattern == pattern]
                if len(bucket) < quota:
                    raise InsufficientSamplesError(
                        f"need {quota} {pattern} instances at depth {depth}, have {len(bucket)}"
                    )
                chosen.extend(rng.sample(bucket, quota))
        return chosen

    if len(pool) < spec.sample_size:
        raise InsufficientSamplesError(
            f"need {spec.sample_size} instances, pool holds {len(pool)}"
        )
    return rng.sample(pool, spec.sample_size)


# --- experiment running ----------------------------------------------------

@dataclass
class CellStats:
    attempted: int = 0
    correct: int = 0
    incorrect: int = 0
    failed: int = 0

    @property
    def accuracy(self) -> float:
        return self.correct / self.attempted if self.attempted else 0.0

    def to_dict(self):
        return {
            "attempted": self.attempted,
            "correct": self.correct,
            "incorrect": self.incorrect,
            "failed": self.failed,
            "accuracy": self.accuracy,
        }


@dataclass
class RunStats:
    ablation: str
    cells: dict[str, CellStats]
    total_accuracy: float
    executability: float
    failures: dict[str, int]

    def to_dict(self):
        return {
            "ablation": self.ablation,
            "cells": {name: cell.to_dict() for name, cell in sorted(self.cells.items())},
            "total_accuracy": self.total_accuracy,
            "executability": self.executability,
            "failures": dict(sorted(self.failures.items())),
        }


@dataclass
class ExperimentReport:
    kind: str  # experiment | ablation
    group_label: str  # depth | variant
    dataset: dict
    backend: dict
    pipeline: dict
    config_hash: str
    sampling: dict
    instance_ids: list[str]
    runs: dict[str, RunStats]

    def cell_names(self) -> list[str]:
        names: set[str] = set()
        for run in self.runs.values():
            names.update(run.cells)
        return sorted(names)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "kind": self.kind,
            "group_label": self.group_label,
            "dataset": self.dataset,
            "backend": self.backend,
            "pipeline": self.pipeline,
            "config_hash": self.config_hash,
            "sampling": self.sampling,
            "instance_ids": list(self.instance_ids),
            "runs": {name: run.to_dict() for name, run in sorted(self.runs.items())},
        }


def _group_key(spec: DatasetSpec, instance: Instance) -> str:
    if spec.name in ("generated", "pararule-plus"):
        return f"depth={instance.depth}" if instance.depth is not None else "depth=?"
    return spec.variant if spec.variant != "n/a" else "all"


def _aggregate(spec: DatasetSpec, config: PipelineConfig, instances, results) -> RunStats:
    cells: dict[str, CellStats] = {}
    failures: dict[str, int] = {}
    executable = 0
    for instance in instances:
        result = results[instance.id]
        cell = cells.setdefault(_group_key(spec, instance), CellStats())
        cell.attempted += 1
        if result.failure is not None:
            cell.failed += 1
            failures[result.failure] = failures.get(result.failure, 0) + 1
        else:
            executable += 1
            if result.answer is instance.gold_label:
                cell.correct += 1
            else:
                cell.incorrect += 1
    accuracies = [cell.accuracy for _, cell in sorted(cells.items())]
    total = sum(accuracies) / len(accuracies) if accuracies else 0.0
    return RunStats(
        ablation=config.ablation,
        cells=cells,
        total_accuracy=total,
        executability=executable / len(instances) if instances else 0.0,
        failures=failures,
    )


def _default_workers() -> int:
    return max(1, os.cpu_count() or 1)


def _run_all(pipeline: Pipeline, instances, workers: int):
    results = {}
    if workers <= 1:
        for instance in instances:
            results[instance.id] = pipeline.run_instance(instance)
        return results
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(pipeline.run_instance, inst): inst.id for inst in instances}
        for future, iid in futures.items():
            results[iid] = future.result()
    return results


def _write_traces(results, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    for iid in sorted(results):
        safe = iid.replace(os.sep, "_")
        path = out_dir / f"{safe}.trace.json"
        path.write_text(canonical_json(results[iid].trace.to_json_dict()), encoding="utf-8")


def _report_shell(spec: DatasetSpec, config: PipelineConfig, instances, kind: str) -> dict:
    return {
        "kind": kind,
        "group_label": "depth" if spec.name in ("generated", "pararule-plus") else "variant",
        "dataset": spec.to_dict(),
        "backend": config.backend.to_dict(),
        "pipeline": config.to_dict(),
        "config_hash": content_hash({"dataset": spec.to_dict(), "pipeline": config.to_dict()}),
        "sampling": {"stratified": spec.stratified and spec.depth_filter is not None},
        "instance_ids": sorted(inst.id for inst in instances),
    }


def run_experiment(spec: DatasetSpec, config: PipelineConfig, *, backend=None,
                   workers: int | None = None, out_dir: str | Path | None = None,
                   instances=None) -> ExperimentReport:
    """Run every sampled instance through the pipeline and aggregate
    accuracy per depth (or variant), executability, and failure kinds."""
    if instances is None:
        instances = load_dataset(spec)
    pipeline = Pipeline(config, backend=backend)
    results = _run_all(pipeline, instances, workers or _default_workers())
    if out_dir is not None:
        _write_traces(results, Path(out_dir))
    stats = _aggregate(spec, config, instances, results)
    shell = _report_shell(spec, config, instances, "experiment")
    return ExperimentReport(runs={config.ablation: stats}, **shell)


def run_ablation(spec: DatasetSpec, config: PipelineConfig, *,
                 workers: int | None = None, out_dir: str | Path | None = None) -> ExperimentReport:
    """Same sample three times, with ablation base / se / se-syn and a fresh
    identically-seeded backend each time."""
    instances = load_dataset(spec)
    runs: dict[str, RunStats] = {}
    for ablation in ABLATIONS:
        sub_config = replace(config, ablation=ablation)
        sub_out = Path(out_dir) / ablation if out_dir is not None else None
        report = run_experiment(
            spec, sub_config,
            backend=make_backend(sub_config.backend),
            workers=workers, out_dir=sub_out, instances=instances,
        )
        runs[ablation] = report.runs[ablation]
    shell = _report_shell(spec, config, instances, "ablation")
    return ExperimentReport(runs=runs, **shell)


# --- report emission --------------------------------------------------------

def _fmt(value: float) -> str:
    text = f"{value:.4f}".rstrip("0").rstrip(".")
    return text or "0"


def _cell_title(name: str) -> str:
    if name.startswith("depth="):
        return "Depth=" + name.split("=", 1)[1]
    return name


def _emit_markdown(report: ExperimentReport) -> str:
    dataset = report.dataset
    lines = [
        "# Reasoning benchmark report",
        "",
        f"- dataset: {dataset['name']} (variant {dataset['variant']}, "
        f"seed {dataset['seed']}, sample {dataset['sample_size']})",
        f"- backend: {report.backend['kind']} (model {report.backend['model']})",
        f"- comparator: {report.pipeline['comparator']}, cwa "
        f"{'on' if report.pipeline['cwa_enabled'] else 'off'}",
        f"- config hash: {report.config_hash[:16]}",
        f"- sampling stratified: {report.sampling['stratified']}",
        "",
    ]
    cells = report.cell_names()
    headers = [_cell_title(c) for c in cells]

    if report.kind == "ablation":
        lines.append("## Executability")
        lines.append("")
        lines.append("| Dataset | Model | Base | SE | SE+SYN |")
        lines.append("| --- | --- | --- | --- | --- |")
        row = [dataset["name"], report.backend["kind"]]
        row += [_fmt(report.runs[a].executability) if a in report.runs else "-" for a in ABLATIONS]
        lines.append("| " + " | ".join(row) + " |")
        lines.append("")

    lines.append("## Accuracy")
    lines.append("")
    lines.append("| Method | " + " | ".join(headers) + " | Total |")
    lines.append("| --- | " + " | ".join("---" for _ in headers) + " | --- |")
    order = [a for a in ABLATIONS if a in report.runs] or sorted(report.runs)
    for name in order:
        run = report.runs[name]
        row = [name]
        row += [_fmt(run.cells[c].accuracy) if c in run.cells else "-" for c in cells]
        row.append(_fmt(run.total_accuracy))
        lines.append("| " + " | ".join(row) + " |")
    lines.append("")

    if report.kind != "ablation":
        only = next(iter(report.runs.values()))
        lines.append(f"- executability: {_fmt(only.executability)}")
    for name in order:
        failures = report.runs[name].failures
        shown = ", ".join(f"{k}: {v}" for k, v in sorted(failures.items())) or "none"
        lines.append(f"- failures ({name}): {shown}")
    lines.append("")
    return "\n".join(lines)


def _emit_csv(report: ExperimentReport) -> str:
    rows = ["run,cell,accuracy,correct,incorrect,failed,attempted,executability"]
    order = [a for a in ABLATIONS if a in report.runs] or sorted(report.runs)
    for name in order:
        run = report.runs[name]
        for cell_name in sorted(run.cells):
            cell = run.cells[cell_name]
            rows.append(
                f"{name},{cell_name},{_fmt(cell.accuracy)},{cell.correct},"
                f"{cell.incorrect},{cell.failed},{cell.attempted},"
            )
        totals = CellStats(
            attempted=sum(c.attempted for c in run.cells.values()),
            correct=sum(c.correct for c in run.cells.values()),
            incorrect=sum(c.incorrect for c in run.cells.values()),
            failed=sum(c.failed for c in run.cells.values()),
        )
        rows.append(
            f"{name},total,{_fmt(run.total_accuracy)},{totals.correct},"
            f"{totals.incorrect},{totals.failed},{totals.attempted},"
            f"{_fmt(run.executability)}"
        )
    return "\n".join(rows) + "\n"


def emit_report(report: ExperimentReport, fmt: str) -> str:
    if fmt == "json":
        return canonical_json(report.to_json_dict())
    if fmt == "markdown":
        return _emit_markdown(report)
    if fmt == "csv":
        return _emit_csv(report)
    raise ValueError(f"unknown report format {fmt!r}")


def write_run_outputs(report: ExperimentReport, out_dir: str | Path) -> dict[str, Path]:
    """Write report.json/.md/.csv plus rendered figures into the run dir."""
    from .figures import render_report_figures  # matplotlib import stays lazy

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for fmt, filename in (("json", "report.json"), ("markdown", "report.md"), ("csv", "report.csv")):
        path = out / filename
        path.write_text(emit_report(report, fmt), encoding="utf-8")
        paths[fmt] = path
    for path in render_report_figures(report, out):
        paths[path.stem] = path
    return paths
