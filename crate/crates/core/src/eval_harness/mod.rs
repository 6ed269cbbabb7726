//! Dataset-level evaluation: manifests, empirical routing results, overlap
//! binning, rate tables and the brute-force threshold oracle.

mod manifest;
pub mod quadrature;

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mcnn_selector::{
    classify_route, grid_search, OptimizationProblem, OptimizationResult, Route, SelectorError,
    SelectorPolicy,
};
use crate::rate_model::{RateModel, SourceModel};

pub use manifest::{
    load_manifest, parse_manifest, parse_record, write_manifest, Codec, VideoRecord,
};

/// Default upper end of the grid oracle, as a source CDF level.
pub const GRID_ORACLE_CDF_LEVEL: f64 = 0.999;

#[derive(Debug, Error, PartialEq)]
pub enum HarnessError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: malformed record: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("line {line}: invalid {field}: {message}")]
    InvariantViolation {
        line: usize,
        field: &'static str,
        message: String,
    },
    #[error("line {line}: missing required field {field}")]
    MissingRequiredField { line: usize, field: &'static str },
    #[error("video {id}: no correctness bit for route {route}")]
    MissingCorrectnessBit { id: String, route: Route },
    #[error("video {id}: missing field {field}")]
    MissingField { id: String, field: &'static str },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("bin width must be positive, got {0}")]
    NonPositiveBinWidth(f64),
    #[error("grid step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error(transparent)]
    Selector(#[from] SelectorError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteCounts {
    pub cnn_3d: usize,
    pub cnn_2d: usize,
    pub spatial: usize,
}

impl RouteCounts {
    fn bump(&mut self, route: Route) {
        match route {
            Route::Cnn3d => self.cnn_3d += 1,
            Route::Cnn2d => self.cnn_2d += 1,
            Route::Spatial => self.spatial += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.cnn_3d + self.cnn_2d + self.spatial
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub n_videos: usize,
    pub routed: RouteCounts,
    pub correct: RouteCounts,
    pub empirical_accuracy: f64,
    /// Mean over videos of the rate implied by each video's route, kbps.
    pub empirical_r_sent: f64,
    /// Closed-form predictions under the supplied source model, using the
    /// dataset-average `i_sp`.
    pub model_accuracy: Option<f64>,
    pub model_r_sent: Option<f64>,
}

impl EmpiricalReport {
    pub fn to_text(&self) -> String {
        let fmt_opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
        format!(
            "{:<20}{:>12}\n{:<20}{:>12}\n{:<20}{:>12}\n{:<20}{:>12}\n{:<20}{:>12.6}\n{:<20}{:>12.6}\n{:<20}{:>12}\n{:<20}{:>12}\n",
            "videos", self.n_videos,
            "routed_3d", self.routed.cnn_3d,
            "routed_2d", self.routed.cnn_2d,
            "routed_spatial", self.routed.spatial,
            "empirical_accuracy", self.empirical_accuracy,
            "empirical_r_sent", self.empirical_r_sent,
            "model_accuracy", fmt_opt(self.model_accuracy),
            "model_r_sent", fmt_opt(self.model_r_sent),
        )
    }
}

fn sorted_by_id(records: &[VideoRecord]) -> Vec<&VideoRecord> {
    let mut sorted: Vec<&VideoRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    sorted
}

/// Routes every video and scores the routed classifier's correctness bit.
///
/// Temporal routes are charged the fitted linear rate of `r_motion`; the
/// spatial route is charged the video's own `i_sp`. Sums run in id order so
/// the report does not depend on record order.
pub fn evaluate_policy(
    records: &[VideoRecord],
    policy: &SelectorPolicy,
    rates: &RateModel,
    source: Option<&SourceModel>,
) -> Result<EmpiricalReport, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::EmptyDataset);
    }
    let mut routed = RouteCounts::default();
    let mut correct = RouteCounts::default();
    let mut rate_sum = 0.0;
    let mut i_sp_sum = 0.0;
    for r in sorted_by_id(records) {
        let route = classify_route(policy, r.r_motion)?;
        let (bit, rate) = match route {
            Route::Cnn3d => (r.correct_3d, rates.rate_3d(r.r_motion)),
            Route::Cnn2d => (r.correct_2d, rates.rate_2d(r.r_motion)),
            Route::Spatial => (r.correct_sp, r.i_sp),
        };
        let bit = bit.ok_or_else(|| HarnessError::MissingCorrectnessBit {
            id: r.id.clone(),
            route,
        })?;
        routed.bump(route);
        if bit {
            correct.bump(route);
        }
        rate_sum += rate;
        i_sp_sum += r.i_sp;
    }
    let n = records.len();
    let (model_accuracy, model_r_sent) = match source {
        Some(source) => {
            let problem = OptimizationProblem {
                source: *source,
                rates: *rates,
                i_sp: i_sp_sum / n as f64,
                accuracies: policy.accuracies,
                r_available: f64::MAX,
            };
            (
                Some(crate::mcnn_selector::a_mcnn_closed(
                    &problem,
                    policy.r_low,
                    policy.r_high,
                )?),
                Some(crate::mcnn_selector::r_sent_closed(
                    &problem,
                    policy.r_low,
                    policy.r_high,
                )?),
            )
        }
        None => (None, None),
    };
    Ok(EmpiricalReport {
        n_videos: n,
        routed,
        correct,
        empirical_accuracy: correct.total() as f64 / n as f64,
        empirical_r_sent: rate_sum / n as f64,
        model_accuracy,
        model_r_sent,
    })
}

/// Route of every video, in input order.
pub fn route_records(
    records: &[VideoRecord],
    policy: &SelectorPolicy,
) -> Result<Vec<(String, f64, Route)>, HarnessError> {
    records
        .iter()
        .map(|r| {
            Ok((
                r.id.clone(),
                r.r_motion,
                classify_route(policy, r.r_motion)?,
            ))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapBin {
    pub bin: usize,
    pub lower_kbps: f64,
    pub upper_kbps: f64,
    pub videos: usize,
    pub count_correct_3d: usize,
    pub count_correct_2d: usize,
}

/// Counts, per equal-width `r_motion` bin `[k·w, (k+1)·w)`, how many videos
/// each temporal classifier got right. Bins cover `[0, max r_motion]`.
pub fn bin_overlap(
    records: &[VideoRecord],
    bin_width: f64,
) -> Result<Vec<OverlapBin>, HarnessError> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(HarnessError::NonPositiveBinWidth(bin_width));
    }
    if records.is_empty() {
        return Err(HarnessError::EmptyDataset);
    }
    let max = records.iter().map(|r| r.r_motion).fold(0.0, f64::max);
    let n_bins = (max / bin_width).floor() as usize + 1;
    let mut bins: Vec<OverlapBin> = (0..n_bins)
        .map(|k| OverlapBin {
            bin: k,
            lower_kbps: k as f64 * bin_width,
            upper_kbps: (k + 1) as f64 * bin_width,
            videos: 0,
            count_correct_3d: 0,
            count_correct_2d: 0,
        })
        .collect();
    for r in records {
        let c3 = r
            .correct_3d
            .ok_or_else(|| HarnessError::MissingCorrectnessBit {
                id: r.id.clone(),
                route: Route::Cnn3d,
            })?;
        let c2 = r
            .correct_2d
            .ok_or_else(|| HarnessError::MissingCorrectnessBit {
                id: r.id.clone(),
                route: Route::Cnn2d,
            })?;
        let k = ((r.r_motion / bin_width).floor() as usize).min(n_bins - 1);
        bins[k].videos += 1;
        bins[k].count_correct_3d += c3 as usize;
        bins[k].count_correct_2d += c2 as usize;
    }
    Ok(bins)
}

pub fn write_overlap_csv<W: io::Write>(bins: &[OverlapBin], mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "bin,lower_kbps,upper_kbps,videos,count_correct_3d,count_correct_2d"
    )?;
    for b in bins {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            b.bin, b.lower_kbps, b.upper_kbps, b.videos, b.count_correct_3d, b.count_correct_2d
        )?;
    }
    Ok(())
}

/// Average rates of one `(codec, qp)` group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub codec: Codec,
    pub qp: u8,
    pub videos: usize,
    pub mean_r_orig: f64,
    pub mean_r_cropped: f64,
    pub mean_r_motion: f64,
    /// `100 · mean(r_motion) / mean(r_orig)`
    pub pct_motion_orig: f64,
    /// `100 · mean(r_motion) / mean(r_cropped)`
    pub pct_motion_cropped: f64,
}

pub fn round_one_decimal(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Groups by `(codec, qp)` in ascending order.
pub fn rate_table(records: &[VideoRecord]) -> Result<Vec<RateRow>, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::EmptyDataset);
    }
    let mut groups: BTreeMap<(Codec, u8), Vec<&VideoRecord>> = BTreeMap::new();
    for r in sorted_by_id(records) {
        groups.entry((r.codec, r.qp)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((codec, qp), rows)| {
            let n = rows.len() as f64;
            let (mut orig, mut cropped, mut motion) = (0.0, 0.0, 0.0);
            for r in &rows {
                orig += r.r_orig.ok_or_else(|| HarnessError::MissingField {
                    id: r.id.clone(),
                    field: "r_orig",
                })?;
                cropped += r.r_cropped.ok_or_else(|| HarnessError::MissingField {
                    id: r.id.clone(),
                    field: "r_cropped",
                })?;
                motion += r.r_motion;
            }
            let (orig, cropped, motion) = (orig / n, cropped / n, motion / n);
            Ok(RateRow {
                codec,
                qp,
                videos: rows.len(),
                mean_r_orig: orig,
                mean_r_cropped: cropped,
                mean_r_motion: motion,
                pct_motion_orig: 100.0 * motion / orig,
                pct_motion_cropped: 100.0 * motion / cropped,
            })
        })
        .collect()
}

/// Full-precision CSV.
pub fn write_rate_table_csv<W: io::Write>(rows: &[RateRow], mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "codec,qp,videos,mean_r_orig,mean_r_cropped,mean_r_motion,pct_motion_orig,pct_motion_cropped"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.codec.as_str(),
            r.qp,
            r.videos,
            r.mean_r_orig,
            r.mean_r_cropped,
            r.mean_r_motion,
            r.pct_motion_orig,
            r.pct_motion_cropped
        )?;
    }
    Ok(())
}

/// Aligned columns, rates to one decimal and percentages rounded to one
/// decimal.
pub fn rate_table_text(rows: &[RateRow]) -> String {
    let mut out = format!(
        "{:<6}{:>4}{:>10}{:>10}{:>10}{:>8}{:>8}\n",
        "codec", "qp", "R_orig", "R_crop", "R_motion", "%orig", "%crop"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<6}{:>4}{:>10.1}{:>10.1}{:>10.1}{:>8.1}{:>8.1}\n",
            r.codec.as_str(),
            r.qp,
            r.mean_r_orig,
            r.mean_r_cropped,
            r.mean_r_motion,
            round_one_decimal(r.pct_motion_orig),
            round_one_decimal(r.pct_motion_cropped),
        ));
    }
    out
}

/// Exhaustive search over threshold pairs on the lattice
/// `{0, step, 2·step, ...} ∩ [0, upper]`, `upper` defaulting to the source
/// model's 99.9th percentile.
pub fn grid_oracle(
    problem: &OptimizationProblem,
    step: f64,
    upper: Option<f64>,
) -> Result<OptimizationResult, HarnessError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(HarnessError::NonPositiveStep(step));
    }
    problem.validate()?;
    let upper = upper.unwrap_or_else(|| problem.source.quantile(GRID_ORACLE_CDF_LEVEL));
    let n = (upper / step + 1e-9).floor() as usize;
    let values: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    Ok(grid_search(problem, &values))
}
