//! Threshold sweeps, protocol datasets, the train/retrain/evaluate pipeline
//! and artifact emission.

mod dataset;
mod pipeline;
mod report;
mod sweep;

pub use dataset::{
    build_dataset, curve_csv, stepped_range, DatasetBuild, ProtocolTag, ThetaDataset, Traversal,
};
pub use pipeline::{compare_at, run_pipeline, PipelineConfig, PipelineRun, DEFAULT_KERNELS, THETA_CLIP};
pub use report::{
    emit_reports, render_reports, sha256_hex, CompareRow, Manifest, ManifestEntry, ReportSet,
};
pub use sweep::{
    averaged_iterations, select_optimum, solve_point, sweep_instance, sweep_theta, DatasetRow,
    SweepConfig, SweepPoint, SweepResult,
};
