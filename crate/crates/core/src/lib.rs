//! Compressed-domain rate-accuracy machinery for video classification.
//!
//! The crate is organised around the pipeline that turns codec motion
//! vectors into classifier inputs and decides, per video, which classifier
//! the video is routed to under a bitrate budget:
//!
//! * [`mv_field`]: block motion-vector grids, the `MVSC` sidecar format,
//!   neighbour interpolation, classifier input volumes and dense-flow lifting.
//! * [`flow_metrics`]: average end-point error against dense flow.
//! * [`rate_model`]: Gamma source model over the motion-vector rate and the
//!   linear per-classifier rate models.
//! * [`mcnn_selector`]: the three-band routing policy, closed-form expected
//!   accuracy / transmitted rate, and the constrained threshold optimizer.
//! * [`eval_harness`]: manifests, empirical policy evaluation, overlap
//!   binning, rate tables and brute-force oracles.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eval_harness;
pub mod flow_metrics;
pub mod mcnn_selector;
pub mod mv_field;
pub mod rate_model;

pub use eval_harness::{Codec, EmpiricalReport, VideoRecord};
pub use flow_metrics::EpeReport;
pub use mcnn_selector::{
    Accuracies, OptimizationProblem, OptimizationResult, Route, SelectorPolicy, SweepPoint,
};
pub use mv_field::{CropDescriptor, FlowFieldDense, InputVolume, MvCell, MvField, VolumeLayout};
pub use rate_model::{RateFit, RateModel, SourceModel};
