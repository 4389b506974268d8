"""Interview scheduling for stable matching under preference uncertainty."""
from .bipartite import maximum_matching
from .core import (
    UNMATCHED,
    AgentId,
    FixedMatricesModel,
    FourPointModel,
    FourPointSide,
    InputError,
    Instance,
    InterviewLedger,
    InterviewRecord,
    Matching,
    PreconditionError,
    RejectionSet,
    RunMetrics,
    RunResult,
    Side,
    TwoPointOrderedModel,
    UniformModel,
    UnsupportedConfiguration,
    applicant,
    conduct_interview,
    interim_likes,
    interim_prefers,
    interim_utility,
    position,
)
from .da import PreferenceProfile, applicant_proposing_da, truncated_da
from .harness import ExperimentConfig, generate_instance, replay, run_experiment
from .hybrid import Variant, all_interviews, pick_next_interviews, run_hybrid
from .sequential import TieBreak, run_sequential
from .stability import (
    DecouplingMode,
    StabilityReport,
    all_applicants_like_match,
    check_interim_stability,
    decoupled_da,
)

__version__ = "0.1.0"
