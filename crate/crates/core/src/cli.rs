//! Experiment descriptions, presets and CSV output behind the `dcsk-cd` binary.

pub mod config;
pub mod presets;
pub mod report;

pub use config::{parse_config, ExperimentSpec};
pub use presets::{preset, preset_names, Curve, Preset};
pub use report::{run_curve, write_csv, CurveReport};
