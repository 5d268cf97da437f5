"""Graph-theoretic emergence measures and emergence-promoting initialization."""

from .errors import (
    CycleError,
    DomainError,
    EmrgError,
    FormatError,
    InvalidShape,
    IoError,
    LengthMismatch,
    ParseError,
    ShapeMismatch,
    Underflow,
    UnknownEdge,
    VersionError,
)
from .graphs import (
    ActivationProfile,
    Edge,
    LayeredShape,
    Quiver,
    QuiverRep,
    build_layered_quiver,
    count_paths_dp,
    enumerate_paths,
)
from .measures import (
    PivotReport,
    choose_pivot,
    derived_functor_dim,
    emergence_conv,
    emergence_layered,
    emergence_network,
    exact_delta,
    observation_rep,
    pivot_delta,
)
from .scaling import (
    InitConfig,
    ScaleSchedule,
    WeightSet,
    alpha_for_learning_rate,
    apply_emergence_scaling,
    base_init,
    init_weights,
    layerwise_learning_rates,
    recommended_alpha,
    scale_schedule,
)
from .trainer import (
    EpochLog,
    MLPModel,
    TrainConfig,
    activation_profile,
    forward,
    loss_and_grads,
    sgd_step,
    train_epoch,
)
from .dataio import (
    Dataset,
    ExperimentRecord,
    append_log,
    gen_blobs,
    load_cifar_bin,
    load_idx,
    load_weights,
    read_logs,
    read_network_spec,
    save_weights,
    write_network_spec,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
