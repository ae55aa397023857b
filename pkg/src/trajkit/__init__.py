"""trajkit: parse, transform, sample, match and serve vehicle trajectories."""

from trajkit.model import (
    EARTH_RADIUS_M,
    EmptyTrajectory,
    GeoCoordinate,
    MissingGps,
    MissingHeading,
    PointCloud,
    Pose,
    Trajectory,
    gps_to_local,
    haversine_distance,
    heading_difference,
    normalize_angle,
    planar_distance,
)
from trajkit.parsers import (
    ParseError,
    ParserDescriptor,
    interpolate_image_poses,
    load_trajectory,
    parse_bdd_json,
    parse_csv_ins,
    parse_delimited,
    parse_kitti,
    parse_nvm,
    sniff_format,
)
from trajkit.transforms import (
    OffsetSettings,
    apply_offsets,
    apply_settings,
    colormap_viridis,
    depth_percentile_threshold,
    encode_time_in_z,
    flatten_altitude,
    gradient_color_for_index,
    normalize_depths_for_color,
)
from trajkit.sampling import (
    SampleResult,
    SamplingParams,
    sample,
    sample_adaptive,
    sample_uniform,
)
from trajkit.matching import (
    Correspondence,
    MatchParams,
    accumulated_angle,
    find_correspondences,
    match_loss,
)
from trajkit.analysis import (
    HTMapOverlay,
    RetrievalEpoch,
    SettingsBundle,
    SettingsStore,
    is_dirty,
    load_htmap,
    restore_settings,
    save_settings,
    topk,
    topk_accuracy,
)
from trajkit.server import create_app, discover_datasets

__version__ = "0.1.0"
