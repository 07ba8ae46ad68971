"""noisemap: rebuild noise datasets from legend-coded heatmaps and measure
how noise moves housing prices with tree-ensemble regressors."""

from .colorspace import (
    DEFAULT_MATCH_THRESHOLD,
    LabColor,
    RgbColor,
    classify_color,
    delta_e_2000,
    rgb_to_lab,
)
from .ensemble import (
    CvResult,
    ModelSpec,
    TreeEnsemble,
    TreeNode,
    cross_validate,
    fit_boosted,
    fit_forest,
    fit_model,
    fit_tree,
    learning_curve,
    load_model,
    mae,
    mape,
    predict,
    random_search,
    save_model,
)
from .errors import (
    ConfigurationError,
    DataError,
    DegenerateGridError,
    GeometryError,
    InsufficientDataError,
    NoisemapError,
    SchemaError,
    StateError,
    UnseenCategoryError,
)
from .georef import (
    AffineTransform,
    GroundControlPoint,
    fit_affine,
    pixel_to_geo,
    read_gcps,
    residual_rmse,
)
from .interpret import (
    DependenceCurve,
    ImportanceReport,
    partial_dependence,
    permutation_importance,
    split_and_gain_importance,
)
from .legend import (
    KALAMARIA,
    THESSALONIKI_NEAPOLI,
    LegendBand,
    band_for_value,
    band_midpoint,
    builtin_palette,
    load_palette,
)
from .property_prep import (
    FeatureMatrix,
    PropertyEncoder,
    encode,
    filter_outliers,
    impute,
    iqr_bounds,
)
from .reconstruct import NoiseSample, load_image, read_samples, scan_image, write_samples
from .spatial_join import (
    EARTH_RADIUS_M,
    JoinConfig,
    NoiseCharacteristic,
    TileIndex,
    attach_noise,
    haversine_m,
    noise_at,
)
from .tessellate import Tile, read_tiles, reduction_ratio, tessellate, truncate_coord, write_tiles

__version__ = "0.1.0"
