"""Crash-tolerant clique protocols under a synchronous round engine.

The pieces, bottom up: a round engine with per-pair bandwidth accounting and
adversarial crash injection (netsim), load-balancing covering families
(covering), the shrinking-guess task-completion loop (taskcomp), MDS-coded
distributed storage (erasure, storage), a fault-masking simulation that runs
crash-free algorithms on a crashy network (robustsim), crash policies
(adversaries), and a scenario/metrics harness with a CLI (harness, cli).
"""

from .netsim import (
    BOTTOM,
    AdversaryError,
    BandwidthExceeded,
    Broadcast,
    BudgetExceeded,
    ConfigError,
    CrashAdversary,
    Engine,
    InvariantViolation,
    MaxRoundsExceeded,
    Message,
    RoundOutcome,
    RoundSpec,
    SimConfig,
    SimError,
    Unicast,
)
from .covering import (
    BalanceCertificate,
    ConstructionFailed,
    CoveringFamily,
    FamilyParams,
    certify_load_balance,
    derive_constants,
    generate,
    get_family,
    load,
    verify_size_bounds,
)
from .taskcomp import (
    IncompleteAfterSchedule,
    TaskLedger,
    TCInstance,
    iteration_schedule,
    run_batched,
    run_task_completion,
)
from .erasure import Codec, CodecError, CodecParams, TooManyErasures, codec_params_for
from .storage import StoreConflict, SymbolStore, net_retrieve, net_store
from .robustsim import ALGORITHMS, RobustSimulation, reference_states, run_robust_simulation
from .adversaries import SUITE, build

__version__ = "0.1.0"

__all__ = [
    "BOTTOM", "AdversaryError", "BandwidthExceeded", "Broadcast",
    "BudgetExceeded", "ConfigError", "CrashAdversary", "Engine",
    "InvariantViolation", "MaxRoundsExceeded", "Message", "RoundOutcome",
    "RoundSpec", "SimConfig", "SimError", "Unicast",
    "BalanceCertificate", "ConstructionFailed", "CoveringFamily",
    "FamilyParams", "certify_load_balance", "derive_constants", "generate",
    "get_family", "load", "verify_size_bounds",
    "IncompleteAfterSchedule", "TaskLedger", "TCInstance",
    "iteration_schedule", "run_batched", "run_task_completion",
    "Codec", "CodecError", "CodecParams", "TooManyErasures",
    "codec_params_for",
    "StoreConflict", "SymbolStore", "net_retrieve", "net_store",
    "ALGORITHMS", "RobustSimulation", "reference_states",
    "run_robust_simulation",
    "SUITE", "build",
    "__version__",
]
