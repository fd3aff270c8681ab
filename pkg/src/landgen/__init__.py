"""Human-guided conditional variational land-use generation toolkit."""

from .cluvae import (
    CluvaeModel,
    ConditionEmbedding,
    GuidanceEmbedding,
    LossBreakdown,
    ModelDims,
    TrainConfig,
    TrainedBundle,
    decode,
    encode,
    generate,
    loss,
    make_condition,
    reparameterize,
    train,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .context_features import (
    BusEvent,
    ContextFeatureRow,
    ContextGraph,
    FeatureScaler,
    TaxiTrip,
    build_context_graph,
    house_price_change,
    poi_ratio,
    private_transport_features,
    public_transport_features,
)
from .errors import (
    ContractError,
    DatasetFormatError,
    LandgenError,
    ParameterError,
    ShapeError,
    TrainingDivergedError,
)
from .evaluation import (
    MetricReport,
    cos_dist,
    evaluate,
    group_distribution,
    hd,
    held_out_split,
    js,
    kl,
    square_size_study,
    stability_study,
    weighted_average,
)
from .graph_embedding import (
    ContextEmbedding,
    VgaeModel,
    embed_context,
    gcn_forward,
    init_vgae,
    train_vgae,
    vgae_loss,
)
from .grid_data import (
    BoundingBox,
    DatasetSample,
    FunctionalZoneGrid,
    GreenLevel,
    LandUseConfiguration,
    PoiPoint,
    SynthesisParams,
    assign_green_level,
    build_configuration,
    cluster_zones,
    load_dataset,
    save_dataset,
    synthesize_city,
)
from .neural_core import (
    AdamState,
    DenseLayer,
    adam_step,
    dense_backward,
    dense_forward,
    finite_difference_check,
)
from .rng import Rng, derive_rng

__version__ = "0.1.0"
