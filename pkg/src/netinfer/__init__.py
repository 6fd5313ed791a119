"""Statistical network inference toolkit.

Simulation of random graphs, spectral embeddings, edge-probability model
fitting with goodness-of-fit, two-graph hypothesis tests, model-selection
clustering, and deterministic SVG figures. See the `netinfer` CLI for the
file-based pipeline.
"""

__version__ = "0.1.0"

from .cluster import (
    COVARIANCE_TYPES,
    GmmFit,
    KMeansFit,
    SweepResult,
    gmm_fit,
    gmm_sweep,
    kmeans_fit,
    kmeans_sweep,
    silhouette_score,
)
from .embed import (
    ElbowSelection,
    Embedding,
    MaseEmbedding,
    ase,
    lse,
    mase,
    omnibus_embed,
    select_dimension,
)
from .graphs import (
    Graph,
    GraphProperties,
    ParseError,
    export_edge_list,
    graph_from_json,
    graph_properties,
    graph_to_json,
    import_adjacency_csv,
    import_edge_list,
    import_graph_csv,
    largest_connected_component,
    multigraph_lcc_intersection,
    symmetrize,
)
from .inference import (
    TestResult,
    latent_distribution_test,
    latent_position_test,
    mmd_ustat,
    procrustes_align,
)
from .models import (
    MODEL_KINDS,
    GoodnessOfFit,
    ModelFit,
    fit_dcer,
    fit_dcsbm,
    fit_er,
    fit_ier,
    fit_model,
    fit_rdpg,
    fit_sbm,
    goodness_of_fit,
    sample_from_fit,
)
from .sims import (
    SbmParams,
    WeightDistribution,
    sample_er_nm,
    sample_er_np,
    sample_ier,
    sample_rdpg,
    sample_sbm,
    sbm_probability_matrix,
)
from .viz import SortSpec, gridplot_svg, heatmap_svg, pairplot_svg, sort_indices

__all__ = [name for name in dir() if not name.startswith("_")]
