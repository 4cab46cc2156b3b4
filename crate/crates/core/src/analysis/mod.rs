//! Neighbourhood censuses, distances between laws, extremes, patched
//! metrics, Gibbs partitions and the named experiments.

pub mod ball;
pub mod canon;
pub mod experiments;
pub mod extremes;
pub mod gibbs;
pub mod patch;
pub mod stats;

pub use ball::{ball, ball_graph, distances, map_ball, map_graph, Metric};
pub use canon::{canonical_code, canonical_code_capped, CanonicalCode, CANON_CAP};
pub use experiments::{run_experiment, Check, Params, Relation, Report, EXPERIMENTS};
pub use extremes::{block_sizes, face_sizes, Faces};
pub use gibbs::{gibbs_sample, starter_ratio, GibbsPartition, GibbsSampler};
pub use patch::{patch_metric, EdgeLaw, LocalMetric, PatchedMetric, PieceMetric, UnitStar};
pub use stats::{frechet_cdf, ks_against, ks_two_sample, tv_distance, tv_pmf, EmpiricalDistribution};
