"""Cycle-aware orchestration of virtual machine live migrations.

Workloads are characterized sample-by-sample as suitable (LM) or hostile
(NLM) to pre-copy live migration; recurring LM/NLM cycles are recovered by
spectral analysis and used to defer migration requests to suitable moments.
A fluid pre-copy model and a deterministic cluster event loop quantify what
the deferral buys in migration time and network traffic.
"""

from .classifier import (
    LM,
    NLM,
    ClassificationSeries,
    ClassifierError,
    LabelRule,
    NBModel,
    TrainingError,
    classify,
    classify_series,
    default_model,
    discretize,
    posterior_distribution,
    synthetic_corpus,
    train,
)
from .consolidation import (
    HostSpec,
    MigrationRequest,
    PlanningError,
    VMSpec,
    plan,
)
from .cycles import (
    AcyclicWorkloadError,
    CycleError,
    CycleEstimate,
    CycleProfile,
    InsufficientDataError,
    PostponeResult,
    decompose,
    detect_cycle_size,
    oracle_cycle_size,
    remaining_time,
    spectrum,
)
from .migration import (
    MigrationModelError,
    MigrationOutcome,
    MigrationParams,
    PrecopyState,
    bounds,
    simulate_precopy,
)
from .orchestrator import (
    Decision,
    Policy,
    Scenario,
    ScenarioError,
    ScenarioReport,
    Trigger,
    decide,
    load_scenario,
    run,
    throughput_probe,
)
from .report import ReductionTable, compare, emit_cycle_diagram
from .scenarios import bundled_scenario, bundled_scenario_names
from .trace import (
    LoadSample,
    LoadSeries,
    PhaseSpec,
    StepRate,
    TraceError,
    TraceParseError,
    parse_trace,
    resample,
    synthesize,
    write_trace,
)

__version__ = "0.1.0"
