"""Global point cloud registration parameterized by a single voxel size.

The pipeline: voxel downsampling, reliability-filtered histogram
descriptors, mutual matching, consistency-graph pruning, and a
graduated robust pose solver. All length scales derive from one voxel
size, so one number tunes the whole stack.
"""

from .bench import BenchConfig, run_benchmark, timing_table, write_outputs
from .errors import (
    CloudFormatError,
    DegenerateNeighborhoodError,
    EmptyCloudError,
    InsufficientSupportError,
    MatchingError,
    NoReliablePointsError,
    RankDeficientError,
    RegistrationError,
    SolverDegenerateError,
)
from .features import (
    DescriptorSet,
    NormalEstimate,
    ReliabilityTables,
    angular_features,
    bin_index,
    compute_fpfh,
    compute_spfh,
    estimate_normal_pca,
    estimate_reliable_normals,
    extract,
    extract_with_tables,
)
from .geometry import (
    PointCloud,
    Pose,
    pose_from_json_dict,
    pose_from_text,
    pose_to_json_dict,
    pose_to_quaternion,
    pose_to_text,
    rotation_from_axis_angle,
    se3_apply,
    se3_inverse,
)
from .io import read_cloud, write_xyz
from .matching import (
    Correspondence,
    CorrespondenceSet,
    from_index_pairs,
    mutual_match,
    ratio_filter,
)
from .metrics import is_success, pose_errors, rre, rte
from .neighbors import RadiusSearcher, build_index, radius_search
from .params import GncSettings, Params
from .pipeline import register
from .preprocess import geometric_suppression, voxel_downsample
from .pruning import (
    CompatGraph,
    build_compat_graph,
    compatibility_test,
    core_numbers,
    dump_graph,
    from_edge_list,
    max_kcore,
    prune,
)
from .scenes import LabeledPairs, generate_scene, random_pose
from .solver import (
    RegistrationResult,
    StageRecord,
    gnc_solve,
    tls_surrogate_cost,
    tls_weights,
    validate,
    weighted_procrustes,
)

__version__ = "0.1.0"

__all__ = [
    "BenchConfig",
    "CloudFormatError",
    "CompatGraph",
    "Correspondence",
    "CorrespondenceSet",
    "DegenerateNeighborhoodError",
    "DescriptorSet",
    "EmptyCloudError",
    "GncSettings",
    "InsufficientSupportError",
    "LabeledPairs",
    "MatchingError",
    "NoReliablePointsError",
    "NormalEstimate",
    "Params",
    "PointCloud",
    "Pose",
    "RadiusSearcher",
    "RankDeficientError",
    "RegistrationError",
    "RegistrationResult",
    "ReliabilityTables",
    "SolverDegenerateError",
    "StageRecord",
    "angular_features",
    "bin_index",
    "build_compat_graph",
    "build_index",
    "compatibility_test",
    "compute_fpfh",
    "compute_spfh",
    "core_numbers",
    "dump_graph",
    "estimate_normal_pca",
    "estimate_reliable_normals",
    "extract",
    "extract_with_tables",
    "from_edge_list",
    "from_index_pairs",
    "generate_scene",
    "gnc_solve",
    "is_success",
    "max_kcore",
    "mutual_match",
    "pose_errors",
    "pose_from_json_dict",
    "pose_from_text",
    "pose_to_json_dict",
    "pose_to_quaternion",
    "pose_to_text",
    "prune",
    "radius_search",
    "random_pose",
    "ratio_filter",
    "read_cloud",
    "register",
    "rotation_from_axis_angle",
    "rre",
    "rte",
    "run_benchmark",
    "se3_apply",
    "se3_inverse",
    "timing_table",
    "tls_surrogate_cost",
    "tls_weights",
    "validate",
    "voxel_downsample",
    "weighted_procrustes",
    "write_outputs",
    "write_xyz",
]
