//! Base clustering algorithms over a dissimilarity matrix, plus mean-shift
//! for endpoint sets.

mod agglomerative;
mod dissim;
pub mod mean_shift;
mod pam;
mod partition;

pub use agglomerative::{agglomerate, agglomerative, MergeStep};
pub use dissim::{dissim_row_clustering, kmeans_1d, KMeans1d};
pub use mean_shift::{estimate_bandwidth, mean_shift, Bandwidth, MeanShiftResult};
pub use pam::{build_medoids, pam};
pub use partition::{Cluster, Partition};
