"""maxtda: robust maximal-persistence estimation and inference.

Level-set rejection sampling over a KDE produces smooth subsamples whose
persistence diagrams keep the dominant features of the data while shedding
noise; bootstrap rejection bands then flag the statistically significant
ones. Includes VR/DTM/KDE filtration pipelines and a time-delay-embedding
periodicity toolchain.
"""

__version__ = "0.1.0"

from .datagen import gen_ellipses3d, gen_rv_series, gen_two_circles
from .density import (
    Envelope,
    KdeModel,
    ProposalRegion,
    default_region,
    dtm_eval,
    estimate_envelope,
    kde_eval,
    smooth_subsample,
)
from .filtration import (
    FilteredComplex,
    PersistenceDiagram,
    build_function_complex,
    build_vr,
    compute_persistence,
    from_simplices,
    load_diagram,
    save_diagram,
)
from .geometry import (
    dist_to_set,
    hausdorff,
    mean_knn_distance,
    read_point_cloud,
    write_point_cloud,
)
from .inference import (
    BootstrapRecord,
    ParameterGrid,
    RejectionBand,
    adaptive_feature_count,
    bootstrap_talpha,
    classify_features,
    select_parameters,
)
from .metrics import bottleneck, diagonal_diagram, max_persistence
from .pipelines import PipelineSpec, pipeline_diagram
from .timeseries import (
    AmiResult,
    EmbeddingConfig,
    TimeSeries,
    ami_profile,
    cao_dimension,
    delay_embed,
    pca_project,
    periodicity_score,
    read_time_series,
    write_time_series,
)

__all__ = [
    "__version__",
    "AmiResult",
    "BootstrapRecord",
    "EmbeddingConfig",
    "Envelope",
    "FilteredComplex",
    "KdeModel",
    "ParameterGrid",
    "PersistenceDiagram",
    "PipelineSpec",
    "ProposalRegion",
    "RejectionBand",
    "TimeSeries",
    "adaptive_feature_count",
    "ami_profile",
    "bootstrap_talpha",
    "bottleneck",
    "build_function_complex",
    "build_vr",
    "cao_dimension",
    "classify_features",
    "compute_persistence",
    "default_region",
    "delay_embed",
    "diagonal_diagram",
    "dist_to_set",
    "dtm_eval",
    "estimate_envelope",
    "from_simplices",
    "gen_ellipses3d",
    "gen_rv_series",
    "gen_two_circles",
    "hausdorff",
    "kde_eval",
    "load_diagram",
    "max_persistence",
    "mean_knn_distance",
    "pca_project",
    "periodicity_score",
    "pipeline_diagram",
    "read_point_cloud",
    "read_time_series",
    "save_diagram",
    "select_parameters",
    "smooth_subsample",
    "write_point_cloud",
    "write_time_series",
]
