//! Road-user trajectory clustering.
//!
//! Trajectories are compared with dynamic time warping, grouped by one of
//! several base clusterers over the dissimilarity matrix, and optionally
//! refined: clusters are split by mean-shift on their endpoints, then
//! fragments whose medoids follow the same path are merged back using a
//! medoid projection test. A sweep over the cluster count picks the best
//! partition by a validity score.
//!
//! ```
//! use trajclust::io::{generate, SyntheticSpec};
//! use trajclust::dtw::build_matrix;
//! use trajclust::pipeline::{sweep, Method, SweepConfig};
//!
//! let data = generate(&SyntheticSpec::intersection(8, 0.005, 0, 1)).unwrap();
//! let matrix = build_matrix(&data.trajectories).unwrap();
//! let result = sweep(&data.trajectories, &matrix, &SweepConfig::new(Method::Agglo, 2, 6)).unwrap();
//! assert_eq!(result.best_partition().k_effective(), 4);
//! ```

pub mod cli;
pub mod cluster;
pub mod dtw;
pub mod error;
pub mod io;
pub mod metrics;
pub mod model;
mod parallel;
pub mod pipeline;
pub mod refine;
pub mod report;

pub use cluster::{Bandwidth, Cluster, Partition};
pub use dtw::{build_matrix, dtw, DissimilarityMatrix, MatrixCache};
pub use error::{Error, Result};
pub use metrics::ValidityReport;
pub use model::{normalize, NormalizationParams, Point2, TrajPoint, Trajectory, UserClass};
pub use parallel::with_workers;
pub use pipeline::{run_once, sweep, Method, Selection, SweepConfig, SweepResult};
