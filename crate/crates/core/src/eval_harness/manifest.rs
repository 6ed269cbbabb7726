use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Codec {
    Avc,
    Hevc,
}

impl Codec {
    pub fn as_str(self) -> &'static str {
        match self {
            Codec::Avc => "avc",
            Codec::Hevc => "hevc",
        }
    }
}

/// Per-video measurements. Rates are kbps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub id: String,
    pub codec: Codec,
    pub qp: u8,
    pub r_motion: f64,
    pub i_sp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_cropped: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_orig: Option<f64>,
    /// Observed rate of the 3D-classifier input stream, for rate fitting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_3d: Option<f64>,
    /// Observed rate of the 2D-classifier input stream, for rate fitting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_2d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct_3d: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct_2d: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct_sp: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mv_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow_gt_path: Option<String>,
}

impl VideoRecord {
    /// Minimal record with only the required fields.
    pub fn new(id: impl Into<String>, codec: Codec, qp: u8, r_motion: f64, i_sp: f64) -> Self {
        VideoRecord {
            id: id.into(),
            codec,
            qp,
            r_motion,
            i_sp,
            r_cropped: None,
            r_orig: None,
            r_3d: None,
            r_2d: None,
            correct_3d: None,
            correct_2d: None,
            correct_sp: None,
            mv_path: None,
            flow_gt_path: None,
        }
    }
}

// Everything optional so that missing fields are reported by name.
#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    codec: Option<Codec>,
    qp: Option<i64>,
    r_motion: Option<f64>,
    i_sp: Option<f64>,
    r_cropped: Option<f64>,
    r_orig: Option<f64>,
    r_3d: Option<f64>,
    r_2d: Option<f64>,
    correct_3d: Option<bool>,
    correct_2d: Option<bool>,
    correct_sp: Option<bool>,
    mv_path: Option<String>,
    flow_gt_path: Option<String>,
}

fn required<T>(value: Option<T>, line: usize, field: &'static str) -> Result<T, HarnessError> {
    value.ok_or(HarnessError::MissingRequiredField { line, field })
}

fn violation(line: usize, field: &'static str, message: String) -> HarnessError {
    HarnessError::InvariantViolation {
        line,
        field,
        message,
    }
}

fn check_rate(value: f64, line: usize, field: &'static str) -> Result<f64, HarnessError> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(violation(
            line,
            field,
            format!("rate must be finite and >= 0, got {value}"),
        ))
    }
}

fn check_opt_rate(
    value: Option<f64>,
    line: usize,
    field: &'static str,
) -> Result<Option<f64>, HarnessError> {
    value.map(|v| check_rate(v, line, field)).transpose()
}

/// Parses and validates one manifest line (`line` is 1-based, for errors).
pub fn parse_record(text: &str, line: usize) -> Result<VideoRecord, HarnessError> {
    let raw: RawRecord = serde_json::from_str(text).map_err(|e| HarnessError::MalformedLine {
        line,
        message: e.to_string(),
    })?;
    let id = required(raw.id, line, "id")?;
    let codec = required(raw.codec, line, "codec")?;
    let qp = required(raw.qp, line, "qp")?;
    if !(0..=51).contains(&qp) {
        return Err(violation(
            line,
            "qp",
            format!("qp must lie in [0, 51], got {qp}"),
        ));
    }
    let r_motion = check_rate(required(raw.r_motion, line, "r_motion")?, line, "r_motion")?;
    let i_sp = check_rate(required(raw.i_sp, line, "i_sp")?, line, "i_sp")?;
    let r_cropped = check_opt_rate(raw.r_cropped, line, "r_cropped")?;
    let r_orig = check_opt_rate(raw.r_orig, line, "r_orig")?;
    if let (Some(c), Some(o)) = (r_cropped, r_orig) {
        if c > o {
            return Err(violation(
                line,
                "r_cropped",
                format!("cropped rate {c} exceeds original rate {o}"),
            ));
        }
    }
    Ok(VideoRecord {
        id,
        codec,
        qp: qp as u8,
        r_motion,
        i_sp,
        r_cropped,
        r_orig,
        r_3d: check_opt_rate(raw.r_3d, line, "r_3d")?,
        r_2d: check_opt_rate(raw.r_2d, line, "r_2d")?,
        correct_3d: raw.correct_3d,
        correct_2d: raw.correct_2d,
        correct_sp: raw.correct_sp,
        mv_path: raw.mv_path,
        flow_gt_path: raw.flow_gt_path,
    })
}

/// Parses JSON-lines text; blank lines are skipped.
pub fn parse_manifest(text: &str) -> Result<Vec<VideoRecord>, HarnessError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_record(l, i + 1))
        .collect()
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<VideoRecord>, HarnessError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_manifest(&text)
}

/// Serialises records as JSON lines.
pub fn write_manifest(records: &[VideoRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serialises"));
        out.push('\n');
    }
    out
}
