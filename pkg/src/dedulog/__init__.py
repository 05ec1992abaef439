"""dedulog: natural-language deduction problems answered through a small
Datalog engine, with LLM translation and bounded self-correction loops."""

from .chat import ChatRequest, Message
from .cwa import MetaPredicateReport, analyze, find_meta_predicates, supplement
from .dsl import (
    GRAMMAR_HELP,
    ParseDiagnostic,
    ProgramParseError,
    SourceProgramText,
    format_program,
    parse_program,
    try_parse_program,
)
from .engine import (
    InconsistencyError,
    Literal,
    Model,
    Program,
    Rule,
    Term,
    UnsafeRuleError,
    UnstratifiableError,
    answer,
    evaluate,
    proof_depth,
    stratify,
)
from .llm import (
    AuthError,
    BackendConfig,
    BudgetExceededError,
    FaultProfile,
    FaultyMockBackend,
    LiveBackend,
    MalformedResponseError,
    PerfectMockBackend,
    TransportError,
    UnknownTaskError,
    classify_request,
    make_backend,
)
from .nl import (
    CompareVerdict,
    Instance,
    InstanceTranslationError,
    Proposition,
    UnrecognizedSentenceError,
    back_translate,
    canonical_compare,
    parse_sentence,
    translate_instance,
)
from .pipeline import (
    ExecutionOutcome,
    Pipeline,
    PipelineConfig,
    PipelineResult,
    TranslationTrace,
    execute_final,
    judge_similarity,
    run_instance,
)
from .prompts import (
    MissingSlotError,
    PromptTemplate,
    TemplateStore,
    UnparseableVerdictError,
    extract_verdict,
)
from .bench import (
    DatasetFormatError,
    DatasetSpec,
    ExperimentReport,
    InsufficientSamplesError,
    emit_report,
    generate_instances,
    load_dataset,
    run_ablation,
    run_experiment,
    write_run_outputs,
)

__version__ = "0.1.0"
