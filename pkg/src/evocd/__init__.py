"""evocd: evolutionary community detection on dynamic weighted graphs.

Library + benchmark harness: LFR-style generation, nine scripted graph
transformations, four modularity-based detectors (GMA, alpha-GMA, sGMA,
NeGMA) and Stability/Correctness/Delay scoring.
"""

__version__ = "0.1.0"

from .graph import (  # noqa: F401
    DynamicGraph,
    Partition,
    Snapshot,
    community_modularity,
    load_json,
    modularity,
    restrict,
    save_json,
    total_weight,
    weighted_degree,
)
from .lfr import LfrParams, empirical_mixing, generate  # noqa: F401
from .louvain import LouvainState, louvain, move_gain  # noqa: F401
from .detectors import (  # noqa: F401
    AlgoConfig,
    AlphaGMA,
    GMA,
    MemoryGraph,
    NeGMA,
    SGMA,
    make_detector,
    memory_update,
    negma_init,
    run_alpha_gma,
    run_gma,
    run_negma,
    run_sgma,
)
from .metrics import (  # noqa: F401
    ami,
    bootstrap_median_ci,
    correctness_morphing,
    correctness_noise,
    crossing_point,
    delay,
    stability,
)
from .transforms import (  # noqa: F401
    EPS_W,
    TransformConfig,
    TransformKind,
    evolve,
    plan,
    step,
)
from .harness import (  # noqa: F401
    AggregateResult,
    ExperimentSpec,
    RunRecord,
    aggregate,
    export_results,
    import_records,
    profile_spec,
    responsiveness_experiment,
    run_experiment,
    run_experiment_detailed,
    timing_report,
)
from .ingest import ingest_contacts  # noqa: F401
from .validation import EvolutionError, GenerationError, derive_seed  # noqa: F401
