//! Dataset loading, synthetic generation and result persistence.

pub mod generic;
pub mod output;
pub mod recordings;
pub mod synthetic;

pub use generic::{load_generic, save_generic, GenericFormat};
pub use output::{load_partition, save_result, write_summary, Manifest, PartitionFile};
pub use recordings::{load_recordings, LoadOptions, LoadOutcome, RecordingBundle, RecordingFiles, TrackDiagnostic};
pub use synthetic::{generate, GroundTruth, ManeuverTemplate, SyntheticDataset, SyntheticSpec};
