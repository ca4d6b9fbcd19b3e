"""symskill: learn symbolic predicate/operator models of black-box skills
by contrastive predicate invention, then plan with what was learned."""

from .core import (
    AbstractState,
    AbstractionCache,
    Classifier,
    ClassifierError,
    ConfigurationError,
    Dataset,
    FluentSpec,
    GroundAtom,
    GroundOperator,
    InapplicableOperatorError,
    LiftedAtom,
    Literal,
    Model,
    ObjectRef,
    Operator,
    PlanningTask,
    Predicate,
    Skill,
    SkillInstance,
    StateHandle,
    SymskillError,
    Transition,
    TypeHierarchy,
    Variable,
    VocabularyMismatchError,
    abstract,
    alpha_holds,
    apply,
    ground_predicates,
    zeta_holds,
)
from .env import (
    KitchenEnv,
    ReplayMissError,
    TranscriptEnv,
    kitchen_task_suite,
    load_transcript,
    make_task,
    write_transcript,
)
from .explore import (
    PairCountMatrix,
    chainability,
    coverage,
    pareto_front,
    pareto_select,
)
from .invent import Conflict, find_conflicts, invent, reevaluate, skill_score
from .operators import cluster_transitions, effect_diff, learn_operators, model_rebuild
from .oracle import (
    FMProposer,
    Proposal,
    Proposer,
    ScriptedClassifier,
    ScriptedOracle,
    TableClassifier,
)
from .pddl import ParsedDomain, emit_domain, emit_problem, parse_domain
from .plan import (
    EvalReport,
    GroundProblem,
    Plan,
    TopKResult,
    build_problem,
    evaluate,
    ground_all,
    load_tasks,
    save_tasks,
    solve_topk,
)
from .runio import canonical_json, derive_seed, load_model, save_model
from .theory import (
    ConsistencyReport,
    SampleBound,
    check_consistency,
    check_soundness,
    empirical_d_compl,
    sample_bound,
)

__version__ = "0.1.0"
