"""swati: skill- and willingness-aware volunteer task assignment.

The pipeline: canonicalize skills out of unstructured volunteer and task
documents, score pairwise skill/content similarity and willingness, run a
deterministic capacity-constrained greedy matcher against baselines, and
commit the result to a tamper-evident hash-chained ledger.
"""

__version__ = "0.1.0"

from .assignment import (
    Assignment,
    AssignedPair,
    CapacityMap,
    EpochResult,
    UtilityForm,
    UtilityMatrix,
    UtilityParams,
    assign_optimal_bruteforce,
    assign_random,
    assign_skill_only,
    assign_swati,
    build_utility_matrix,
    compute_utility,
    run_epoch,
    utility_matrix_from_components,
    validate_assignment,
)
from .config import EngineConfig, build_config, load_config
from .corpus import (
    Corpus,
    Document,
    SyntheticConfig,
    corpus_stats,
    generate_synthetic,
    generate_synthetic_history,
    load_corpus,
    save_corpus,
    save_history,
)
from .extraction import (
    ExtractionResult,
    Market,
    PreferenceCues,
    Profile,
    RemoteExtractorConfig,
    SkillMention,
    TaskSpec,
    build_market,
    build_profile,
    build_taskspec,
    extract_remote,
    extract_rule_based,
    extraction_stats,
    validate_extraction,
)
from .ledger import Ledger, LedgerRecord, TaskState, VerifyResult, load_ledger, save_ledger, verify
from .metrics import QualityReport, TimingReport, bench_scaling, quality, utility_cdf
from .ontology import Ontology, SkillEntry, load_builtin_ontology, load_ontology
from .similarity import (
    SparseVector,
    VectorizerModel,
    VectorizerSettings,
    content_sim,
    fit_vectorizer,
    skill_sim,
    vectorize,
)
from .willingness import (
    History,
    HistoryRecord,
    WillingnessParams,
    WillingnessState,
    cue_vector,
    histories_from_records,
    history_tendency,
    load_history,
    pair_willingness,
    profile_score,
    raw_willingness,
    smooth_willingness,
)
