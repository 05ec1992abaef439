"""The end-to-end correction pipeline against mock backends."""

from dedulog.bench import generate_instances
from dedulog.dsl import format_program
from dedulog.engine import answer as engine_answer
from dedulog.llm import BackendConfig, FaultProfile, make_backend
from dedulog.nl import Instance, back_translate, translate_instance
from dedulog.cwa import supplement
from dedulog.pipeline import (
    FAILURE_KINDS,
    Pipeline,
    PipelineConfig,
    execute_final,
    judge_similarity,
    run_instance,
)
from progen import random_programs

FIGURE_INSTANCE = Instance(
    id="figure-1",
    facts=["Bob is able"],
    rules=[
        "If someone is able then they are brave.",
        "If someone is brave then they are calm.",
        "If someone is calm then they are eager.",
        "If someone is eager then they are fair.",
    ],
    question="Bob is fair",
    gold_label=True,
    depth=4,
)


def perfect_config(**overrides):
    return PipelineConfig(backend=BackendConfig(kind="perfect-mock"), **overrides)


def faulty_config(profile, **overrides):
    return PipelineConfig(
        backend=BackendConfig(kind="faulty-mock", fault_profile=profile), **overrides
    )


class TestPerfectMockRuns:
    def test_figure_instance_true_one_iteration_no_repairs(self):
        result = run_instance(perfect_config(), FIGURE_INSTANCE)
        assert result.answer is True
        assert result.failure is None
        assert result.trace.semantic_iterations == 1
        assert result.trace.syntax_repairs == 0

    def test_fidelity_matches_oracle_answer(self):
        config = perfect_config()
        pipeline = Pipeline(config)
        for instance in generate_instances(61, 24, 4):
            result = pipeline.run_instance(instance)
            oracle = engine_answer(supplement(translate_instance(instance)))
            assert result.answer == oracle == instance.gold_label

    def test_trace_counts_match_backend_calls(self):
        config = perfect_config()
        backend = make_backend(config.backend)
        pipeline = Pipeline(config, backend=backend)
        before = backend.calls
        result = pipeline.run_instance(FIGURE_INSTANCE)
        assert backend.calls - before == result.trace.backend_calls
        assert result.trace.backend_calls == len(result.trace.exchanges)

    def test_trace_completeness_across_a_shared_backend_run(self):
        profile = FaultProfile(semantic_fault_rate=0.3, syntax_fault_rate=0.3,
                               rng_seed=43, faults_heal_after=1)
        config = faulty_config(profile, comparator="llm")
        backend = make_backend(config.backend)
        pipeline = Pipeline(config, backend=backend)
        results = [pipeline.run_instance(i) for i in generate_instances(83, 10, 2)]
        recorded = sum(r.trace.backend_calls for r in results)
        assert recorded == backend.calls
        assert all(len(r.trace.exchanges) == r.trace.backend_calls for r in results)

    def test_base_ablation_skips_loops(self):
        result = run_instance(perfect_config(ablation="base"), FIGURE_INSTANCE)
        assert result.answer is True
        assert result.trace.semantic_iterations == 0
        assert [e.prompt_name for e in result.trace.exchanges] == ["translate"]

    def test_untranslatable_instance(self):
        broken = Instance(id="x", facts=["total gibberish beyond grammar"],
                          rules=[], question="Bob is bad")
        result = run_instance(perfect_config(), broken)
        assert result.failure == "untranslatable"
        assert result.answer is None

    def test_trace_serializes(self):
        result = run_instance(perfect_config(), FIGURE_INSTANCE)
        doc = result.trace.to_json_dict()
        assert doc["schema_version"] == 1
        assert doc["answer"] is True
        assert doc["instance_id"] == "figure-1"
        assert len(doc["exchanges"]) == doc["backend_calls"]


class TestFaultyMockRuns:
    def test_rename_heals_on_second_iteration(self):
        profile = FaultProfile(semantic_fault_rate=1.0, rng_seed=7,
                               fault_kinds=frozenset({"rename-predicate"}),
                               faults_heal_after=1)
        result = run_instance(faulty_config(profile), FIGURE_INSTANCE)
        assert [v["verdict"] for v in result.trace.verdicts] == ["different", "same"]
        assert result.trace.semantic_iterations == 2
        assert result.answer is FIGURE_INSTANCE.gold_label

    def test_break_token_with_tight_budget_fails_after_one_repair(self):
        profile = FaultProfile(syntax_fault_rate=1.0, rng_seed=7,
                               fault_kinds=frozenset({"break-token"}),
                               faults_heal_after=2)
        config = faulty_config(profile, max_semantic_iterations=1, max_syntax_iterations=1)
        result = run_instance(config, FIGURE_INSTANCE)
        assert result.failure == "unparseable-after-repair"
        assert result.trace.syntax_repairs == 1

    def test_unsafe_rule_needs_the_syntax_loop(self):
        profile = FaultProfile(syntax_fault_rate=1.0, rng_seed=19,
                               fault_kinds=frozenset({"unsafe-rule"}),
                               faults_heal_after=1)
        healed = run_instance(faulty_config(profile), FIGURE_INSTANCE)
        assert healed.answer is True
        assert healed.trace.semantic_iterations == 1  # comparison cannot see it
        assert healed.trace.syntax_repairs == 1
        se_only = run_instance(faulty_config(profile, ablation="se"), FIGURE_INSTANCE)
        assert se_only.failure == "unparseable"

    def test_budget_exhaustion_is_a_failure_outcome(self):
        profile = FaultProfile(syntax_fault_rate=1.0, rng_seed=3,
                               fault_kinds=frozenset({"break-token"}),
                               faults_heal_after=None)
        config = faulty_config(profile)
        config.backend.request_budget = 3
        result = run_instance(config, FIGURE_INSTANCE)
        assert result.failure == "budget-exceeded"

    def test_all_failures_are_declared_kinds(self):
        profile = FaultProfile(syntax_fault_rate=0.8, semantic_fault_rate=0.5,
                               rng_seed=23, faults_heal_after=None)
        config = faulty_config(profile, max_semantic_iterations=2, max_syntax_iterations=2)
        pipeline = Pipeline(config)
        for instance in generate_instances(67, 16, 3):
            result = pipeline.run_instance(instance)
            if result.failure is not None:
                assert result.failure in FAILURE_KINDS


class TestJudgeSimilarity:
    def test_deterministic_same_and_different(self):
        config = perfect_config()
        same = judge_similarity(config, ["Bob is poor"], ["bob is poor."])
        assert same.same
        different = judge_similarity(
            config,
            ["Bob is poor", "If someone is poor then they are bad."],
            ["Bob is poor"],
        )
        assert not different.same and different.detail

    def test_llm_comparator_agrees_with_deterministic_on_random_pairs(self):
        det = perfect_config()
        llm = perfect_config(comparator="llm")
        programs = random_programs(91, 100, nl_safe=True)
        mutated = random_programs(92, 100, nl_safe=True)
        checked = 0
        for left, right in zip(programs, mutated):
            a = back_translate(left)
            b = back_translate(left) if checked % 2 == 0 else back_translate(right)
            expected = judge_similarity(det, a, b)
            got = judge_similarity(llm, a, b)
            assert got.same == expected.same
            checked += 1
        assert checked == 100


class TestExecuteFinal:
    def test_figure_program_text_true(self):
        text = format_program(supplement(translate_instance(FIGURE_INSTANCE)))
        outcome = execute_final(text)
        assert outcome.answer is True and outcome.executable

    def test_missing_period_unparseable(self):
        outcome = execute_final("poor(bob)\n? poor(bob).")
        assert outcome.failure == "unparseable"
        assert outcome.diagnostics

    def test_unstratifiable_program(self):
        outcome = execute_final("q(a). p(X) :- q(X), ~p(X). ? p(a).")
        assert outcome.failure == "unstratifiable"

    def test_inconsistent_program(self):
        outcome = execute_final("poor(bob). ~bad(bob). bad(X) :- poor(X). ? bad(bob).")
        assert outcome.failure == "inconsistent"

    def test_code_fences_are_tolerated(self):
        outcome = execute_final("```\npoor(bob).\n? poor(bob).\n```")
        assert outcome.answer is True


class TestTermination:
    def test_adversarial_mock_never_hangs(self):
        profile = FaultProfile(syntax_fault_rate=1.0, rng_seed=41,
                               faults_heal_after=None)
        config = faulty_config(profile)
        pipeline = Pipeline(config)
        for instance in generate_instances(71, 10, 2):
            result = pipeline.run_instance(instance)
            assert result.failure is not None
            max_calls = (config.max_semantic_iterations * 2
                         + config.max_syntax_iterations)
            assert result.trace.backend_calls <= max_calls
