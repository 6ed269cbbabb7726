//! Average end-point error between motion-vector flow and dense flow.

use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mv_field::{interpolate_missing, mv_to_dense_flow, FlowFieldDense, MvError, MvField};

#[derive(Debug, Error, PartialEq)]
pub enum EpeError {
    #[error("flow dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("no ground-truth frames to evaluate")]
    EmptySequence,
    #[error("{gt} ground-truth frames but only {mv} motion-vector frames")]
    TooManyFrames { gt: usize, mv: usize },
    #[error(transparent)]
    Field(#[from] MvError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpeReport {
    pub per_frame_aepe: Vec<f64>,
    pub mean_aepe: f64,
    pub frames_evaluated: usize,
}

impl EpeReport {
    pub fn from_frames(per_frame_aepe: Vec<f64>) -> Result<Self, EpeError> {
        if per_frame_aepe.is_empty() {
            return Err(EpeError::EmptySequence);
        }
        let mean_aepe = per_frame_aepe.iter().sum::<f64>() / per_frame_aepe.len() as f64;
        Ok(EpeReport {
            frames_evaluated: per_frame_aepe.len(),
            per_frame_aepe,
            mean_aepe,
        })
    }

    /// `frame_index,aepe` rows with a header line.
    pub fn write_csv<W: io::Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "frame_index,aepe")?;
        for (i, e) in self.per_frame_aepe.iter().enumerate() {
            writeln!(out, "{i},{e}")?;
        }
        Ok(())
    }
}

/// Mean over pixels of the Euclidean distance between the two flows.
pub fn aepe_frame(approx: &FlowFieldDense, gt: &FlowFieldDense) -> Result<f64, EpeError> {
    if approx.width() != gt.width() || approx.height() != gt.height() {
        return Err(EpeError::DimensionMismatch(
            approx.width(),
            approx.height(),
            gt.width(),
            gt.height(),
        ));
    }
    let total: f64 = approx
        .data()
        .iter()
        .zip(gt.data())
        .map(|(a, g)| (a[0] - g[0]).hypot(a[1] - g[1]))
        .sum();
    Ok(total / approx.data().len() as f64)
}

/// Interpolates `field`, lifts each frame to pixel flow and scores it
/// against the matching ground-truth frame.
///
/// Sidecar frame `i` is the `i`-th inter frame and pairs with
/// `gt_frames[i]`; extra motion-vector frames beyond the ground truth are
/// ignored.
pub fn aepe_sequence(field: &MvField, gt_frames: &[FlowFieldDense]) -> Result<EpeReport, EpeError> {
    if gt_frames.is_empty() {
        return Err(EpeError::EmptySequence);
    }
    if gt_frames.len() > field.frame_count() {
        return Err(EpeError::TooManyFrames {
            gt: gt_frames.len(),
            mv: field.frame_count(),
        });
    }
    let filled = interpolate_missing(field);
    let per_frame = gt_frames
        .par_iter()
        .enumerate()
        .map(|(i, gt)| {
            let approx = mv_to_dense_flow(&filled, i, gt.width(), gt.height())?;
            aepe_frame(&approx, gt)
        })
        .collect::<Result<Vec<_>, _>>()?;
    EpeReport::from_frames(per_frame)
}
