"""Command-line interface: translate, eval, run, ablate, gen."""

from __future__ import annotations

import json
import sys
from dataclasses import replace
from pathlib import Path

import click

from . import nl
from .bench import (
    DatasetSpec,
    emit_report,
    generate_instances,
    instance_to_dict,
    load_instance_file,
    run_ablation,
    run_experiment,
    write_run_outputs,
)
from .cwa import supplement
from .dsl import format_program
from .llm import BackendConfig
from .pipeline import Pipeline, PipelineConfig, execute_final
from .nl import translate_instance


def _load_config(path: str | None) -> PipelineConfig:
    if not path:
        return PipelineConfig()
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    backend = BackendConfig.from_dict(data.get("backend", {}))
    pipeline = dict(data.get("pipeline", {}))
    pipeline["backend"] = backend
    if "lexicon" in data:
        nl.install_lexicon(nl.load_lexicon_file(data["lexicon"]))
    return PipelineConfig.from_dict(pipeline)


def _apply_backend_kind(config: PipelineConfig, backend_kind: str | None) -> PipelineConfig:
    if backend_kind is None:
        return config
    return replace(config, backend=replace(config.backend, kind=backend_kind))


def _pick_comparator(config: PipelineConfig, comparator: str | None) -> PipelineConfig:
    if comparator is not None:
        return replace(config, comparator=comparator)
    # Live runs judge with the model itself; everything else stays deterministic.
    default = "llm" if config.backend.kind == "live" else "deterministic"
    return replace(config, comparator=default)


def _parse_depths(text: str | None) -> tuple[int, ...] | None:
    if not text:
        return None
    return tuple(int(part) for part in text.replace(" ", "").split(",") if part)


@click.group()
@click.version_option(package_name="dedulog")
def main():
    """Answer natural-language deduction problems through a logic engine."""


@main.command()
@click.argument("instance_file", type=click.Path(exists=True))
@click.option("--id", "instance_id", default=None, help="Pick one instance by id (default: first).")
@click.option("--backend", "backend_kind", type=click.Choice(["oracle", "perfect-mock", "faulty-mock", "live"]),
              default="oracle", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--no-cwa", is_flag=True, help="Skip closed-world supplementation.")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write the .dlp here instead of stdout.")
def translate(instance_file, instance_id, backend_kind, config_path, no_cwa, out_path):
    """Translate one instance file to the program syntax."""
    instances = load_instance_file(instance_file)
    if instance_id is not None:
        instances = [inst for inst in instances if inst.id == instance_id]
        if not instances:
            raise click.ClickException(f"no instance with id {instance_id!r}")
    instance = instances[0]
    if backend_kind == "oracle":
        program = translate_instance(instance)
        if not no_cwa:
            program = supplement(program)
        text = format_program(program)
    else:
        config = _pick_comparator(
            _apply_backend_kind(_load_config(config_path), backend_kind), None
        )
        config = replace(config, cwa_enabled=not no_cwa)
        text = Pipeline(config).translate_once(instance)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text, nl=False)


@main.command("eval")
@click.argument("program_file", type=click.Path(exists=True))
def eval_command(program_file):
    """Parse and answer a .dlp program; prints TRUE or FALSE."""
    text = Path(program_file).read_text(encoding="utf-8")
    outcome = execute_final(text)
    if outcome.failure is not None:
        for diagnostic in outcome.diagnostics:
            click.echo(diagnostic, err=True)
        raise click.ClickException(f"program is not executable: {outcome.failure}")
    click.echo("TRUE" if outcome.answer else "FALSE")


def _dataset_options(fn):
    options = [
        click.option("--dataset", type=click.Choice(["generated", "pararule-plus",
                                                     "conceptrules-v1", "conceptrules-v2"]),
                     default="generated", show_default=True),
        click.option("--variant", type=click.Choice(["simplified", "full"]), default=None),
        click.option("--path", "data_path", type=click.Path(), default=None,
                     help="Dataset directory or file (non-generated datasets)."),
        click.option("--count", default=100, show_default=True, help="Sample size."),
        click.option("--depth", "depths", default=None,
                     help="Comma-separated depth filter, e.g. 2,3,4,5."),
        click.option("--seed", default=0, show_default=True),
        click.option("--unstratified", is_flag=True,
                     help="Sample without the per-depth People/Animal split."),
        click.option("--backend", "backend_kind",
                     type=click.Choice(["perfect-mock", "faulty-mock", "live"]), default=None),
        click.option("--config", "config_path", type=click.Path(exists=True), default=None),
        click.option("--comparator", type=click.Choice(["deterministic", "llm"]), default=None),
        click.option("--no-cwa", is_flag=True),
        click.option("--workers", default=None, type=int),
        click.option("--out", "out_dir", type=click.Path(), required=True),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _build_spec_and_config(dataset, variant, data_path, count, depths, seed, unstratified,
                           backend_kind, config_path, comparator, no_cwa):
    spec = DatasetSpec(
        name=dataset,
        variant=variant or "n/a",
        path=data_path,
        sample_size=count,
        seed=seed,
        depth_filter=_parse_depths(depths),
        stratified=not unstratified,
    )
    config = _pick_comparator(_apply_backend_kind(_load_config(config_path), backend_kind),
                              comparator)
    config = replace(config, cwa_enabled=not no_cwa)
    return spec, config


def _finish(report, out_dir):
    paths = write_run_outputs(report, out_dir)
    click.echo(emit_report(report, "markdown"))
    click.echo(f"outputs under {out_dir}: " + ", ".join(p.name for p in paths.values()))


@main.command()
@_dataset_options
@click.option("--ablation", type=click.Choice(["base", "se", "se-syn"]),
              default="se-syn", show_default=True)
def run(dataset, variant, data_path, count, depths, seed, unstratified, backend_kind,
        config_path, comparator, no_cwa, workers, out_dir, ablation):
    """Run one experiment and emit report files plus figures."""
    spec, config = _build_spec_and_config(dataset, variant, data_path, count, depths, seed,
                                          unstratified, backend_kind, config_path,
                                          comparator, no_cwa)
    config = replace(config, ablation=ablation)
    report = run_experiment(spec, config, workers=workers, out_dir=out_dir)
    _finish(report, out_dir)


@main.command()
@_dataset_options
def ablate(dataset, variant, data_path, count, depths, seed, unstratified, backend_kind,
           config_path, comparator, no_cwa, workers, out_dir):
    """Run the base / se / se-syn ablation over one shared sample."""
    spec, config = _build_spec_and_config(dataset, variant, data_path, count, depths, seed,
                                          unstratified, backend_kind, config_path,
                                          comparator, no_cwa)
    report = run_ablation(spec, config, workers=workers, out_dir=out_dir)
    _finish(report, out_dir)


@main.command()
@click.option("--depth", required=True, type=click.IntRange(2, 5))
@click.option("--count", default=20, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--pattern", type=click.Choice(["people", "animal", "both"]),
              default="both", show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write JSONL here instead of stdout.")
def gen(depth, count, seed, pattern, out_path):
    """Generate synthetic instances in the adapter JSONL format."""
    instances = generate_instances(seed, count, depth, pattern)
    lines = [json.dumps(instance_to_dict(inst), sort_keys=True) for inst in instances]
    body = "\n".join(lines) + "\n"
    if out_path:
        Path(out_path).write_text(body, encoding="utf-8")
        click.echo(f"wrote {len(instances)} instances to {out_path}")
    else:
        sys.stdout.write(body)


if __name__ == "__main__":
    main()
