"""Reduced-order modeling toolkit: kernel and linear snapshot bases with a
neural-network regressor mapping (time, parameters) to reduced coefficients.
"""

from .config import (
    FomConfig,
    NnConfig,
    PipelineConfig,
    ReductionConfig,
    RunConfig,
    SamplingConfig,
    default_config,
    grid_and_stride,
    load_config,
    parameter_box,
)
from .errors import (
    CflViolation,
    ConvergenceFailure,
    DegenerateSpectrum,
    DimensionMismatch,
    Diverged,
    KpodnnError,
    NumericalError,
    TooFewRows,
    ValidationError,
    ZeroNormSnapshot,
    ZeroTargetNorm,
)
from .network import (
    AdamState,
    CrossValReport,
    Network,
    NetworkSpec,
    TrainConfig,
    TrainReport,
    adam_step,
    architecture_for,
    backward,
    cross_validate,
    forward,
    init_glorot,
    loss,
    parameter_count,
    prelu,
    relative_l2,
    train,
    weight_penalty,
)
from .pipeline import (
    EvalReport,
    RomModel,
    build_building_set,
    build_test_set,
    compare,
    evaluate,
    gamma_sweep,
    load_rom,
    make_basis,
    offline,
    offline_from_snapshots,
    online,
    save_rom,
)
from .reduction import (
    KernelConfig,
    ReducedBasis,
    Spectrum,
    kernel_matrix,
    kpod_basis,
    kpod_spectrum,
    pod_basis,
    pod_spectrum,
    project,
    qr_positive,
    reconstruct,
    spectrum_table,
    sym_eig,
    truncation_rank,
)
from .sampling import (
    Dataset,
    FoldPlan,
    InputScaling,
    ParameterBox,
    SnapshotMatrix,
    assemble_snapshots,
    build_io_pairs,
    kfold_split,
    latin_hypercube,
)
from .storage import (
    load_basis,
    load_network,
    load_snapshots,
    save_basis,
    save_network,
    save_snapshots,
)
from .wave import (
    GridSpec,
    Trajectory,
    WaveParams,
    cfl_courant,
    initial_pulse,
    solve_from_state,
    solve_wave,
    stable_step_count,
)

__version__ = "0.1.0"
