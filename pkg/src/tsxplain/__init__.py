"""Explainable workbench for 1-D convolutional time-series classifiers.

Train or load a small convolutional network, attribute its decisions to input
time steps, rank attribution methods by how much hiding their top features
hurts accuracy, project samples into linked 2-D maps, and probe the model with
edits and counterfactuals, all over one session API.
"""

from .attributions import (
    METHOD_NAMES,
    Attribution,
    AttributionMatrix,
    build_attribution_matrix,
    compute_attribution,
    segment_bounds,
)
from .counterfactuals import (
    Counterfactual,
    native_guide_cf,
    nearest_unlike_neighbor,
    wachter_cf,
)
from .data import (
    TEST,
    TRAIN,
    ConfusionCell,
    TimeSeriesDataset,
    confusion_assign,
    load_ucr_files,
    parse_ucr,
    serialize_ucr,
    z_normalize,
)
from .errors import *  # noqa: F401,F403
from .evaluation import (
    AbsValue,
    DatasetStats,
    EvalResult,
    PerturbationConfig,
    RankEntry,
    TopPercent,
    default_config_grid,
    evaluate_grid,
    evaluate_method,
    perturb,
    rank_methods,
    ranking_table,
    select_relevant,
)
from .nn import (
    ConvNetClassifier,
    Model,
    TrainConfig,
    TrainHistory,
    activation_maximization,
    build_cnn,
    mc_dropout_predict,
    train,
    train_arrays,
)
from .projections import (
    KernelPCA2D,
    PCA2D,
    TSNE2D,
    ClusterScore,
    ProjectionCell,
    cluster_score,
    fit_projection,
    project_oos,
    set_visibility,
)
from .session import (
    Session,
    SessionConfig,
    SessionStore,
    run_automatic_phase,
)
from .transforms import TRANSFORM_NAMES, dct2, derivative, fft_magnitude, sax, transform_block
from .whatif import (
    DragEdit,
    EditContext,
    RegionEdit,
    apply_edits,
    drag_edit,
    nearest_in_matrix,
    parse_edit,
    parse_space,
    region_edit,
)

__version__ = "0.1.0"
