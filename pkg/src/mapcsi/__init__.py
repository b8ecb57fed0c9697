"""Single-site map-assisted localization from massive-MIMO CSI."""

from .adp import AdpPeak, bin_to_aod, bin_to_delay, compute_adp, dft_f, dft_v, extract_peaks
from .channel import (
    SPEED_OF_LIGHT,
    Mpc,
    SystemConfig,
    array_response,
    enumerate_paths,
    path_gain,
    synthesize_csi,
)
from .cluster import ClusterResult, estimate_location, kmeans, select_k, silhouette_mean
from .envmap import (
    Aoi,
    EnvironmentMap,
    Material,
    Point2,
    RayTerminal,
    Surface,
    in_aoi,
    nearest_hit,
    reflect_direction,
    trace_path,
)
from .harness import Scenario, build_scenario, evaluate, sweep
from .localize import (
    CandidatePoint,
    LocationEstimate,
    PipelineParams,
    RayHypothesis,
    UnlocalizableError,
    candidates_from_ray,
    localize_csi,
    localize_mapat,
)

__version__ = "0.1.0"
