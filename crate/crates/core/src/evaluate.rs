//! Ground-truth manifests and dataset scoring.
//!
//! Tilt correctness is judged by circular distance modulo 180° between the
//! true tilt and the nearest detected reflection axis:
//!
//! * exact: below half the angle step (and within the strict bound),
//! * strict: at most 2°,
//! * lenient: at most 10°.
//!
//! Tilt rates are taken over reflectional ground truth only; order and type
//! rates over every image.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{detect_at_working_size, DetectorConfig, SymmetryType};
use crate::error::{Error, Result};
use crate::image::load_image;

pub const STRICT_TOLERANCE_DEG: f64 = 2.0;
pub const LENIENT_TOLERANCE_DEG: f64 = 10.0;

const MANIFEST_HEADER: [&str; 4] = ["filename", "type", "order", "tilt_deg"];

/// Expected symmetry of one dataset image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub filename: String,
    pub symmetry_type: SymmetryType,
    pub order: u32,
    pub tilt_deg: Option<f64>,
}

/// Writes `filename,type,order,tilt_deg`; tilt has three decimals and is
/// empty for non-reflectional rows.
pub fn write_manifest(records: &[GroundTruthRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
    w.write_record(MANIFEST_HEADER).map_err(csv_io)?;
    for r in records {
        let tilt = match (r.symmetry_type, r.tilt_deg) {
            (SymmetryType::Reflectional, Some(t)) => format!("{t:.3}"),
            _ => String::new(),
        };
        w.write_record([
            r.filename.as_str(),
            r.symmetry_type.as_str(),
            &r.order.to_string(),
            &tilt,
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::MalformedManifest(format!("{other:?}")),
    }
}

/// Reads a manifest written by [`write_manifest`] (or by hand).
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<GroundTruthRecord>> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_io)?;
    let headers = rdr.headers().map_err(|e| Error::MalformedManifest(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != MANIFEST_HEADER {
        return Err(Error::MalformedManifest(format!(
            "expected header {}, found {}",
            MANIFEST_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::MalformedManifest(e.to_string()))?;
        let bad = |what: &str| Error::MalformedManifest(format!("row {}: {what}", line + 2));
        let filename = row
            .get(0)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| bad("empty filename"))?;
        let symmetry_type: SymmetryType = row
            .get(1)
            .unwrap_or_default()
            .parse()
            .map_err(|_| bad("unknown type"))?;
        let order: u32 = row
            .get(2)
            .unwrap_or_default()
            .parse()
            .map_err(|_| bad("order is not an integer"))?;
        let tilt_deg = match row.get(3).unwrap_or_default() {
            "" => None,
            t => Some(t.parse::<f64>().map_err(|_| bad("tilt is not a number"))?),
        };
        if symmetry_type == SymmetryType::Reflectional && tilt_deg.is_none() {
            return Err(bad("reflection row without tilt"));
        }
        if order == 0 {
            return Err(bad("order must be positive"));
        }
        out.push(GroundTruthRecord {
            filename: filename.to_string(),
            symmetry_type,
            order,
            tilt_deg,
        });
    }
    Ok(out)
}

/// Distance between two axis tilts, modulo 180°; result in `[0, 90]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(180.0);
    d.min(180.0 - d)
}

/// Tilt success under the three criteria.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TiltCriteria {
    pub exact: bool,
    pub strict: bool,
    pub lenient: bool,
}

impl TiltCriteria {
    pub fn judge(error_deg: Option<f64>, angle_step: f64) -> Self {
        match error_deg {
            Some(e) => Self {
                exact: e < angle_step / 2.0 && e <= STRICT_TOLERANCE_DEG,
                strict: e <= STRICT_TOLERANCE_DEG,
                lenient: e <= LENIENT_TOLERANCE_DEG,
            },
            None => Self {
                exact: false,
                strict: false,
                lenient: false,
            },
        }
    }
}

/// Per-image outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageVerdict {
    pub filename: String,
    pub truth_type: SymmetryType,
    pub truth_order: u32,
    pub truth_tilt_deg: Option<f64>,
    pub detected_type: Option<SymmetryType>,
    pub detected_order: Option<u32>,
    pub detected_tilt_deg: Option<f64>,
    pub detected_axes: Vec<f64>,
    /// Distance from the true tilt to the nearest detected axis.
    pub tilt_error_deg: Option<f64>,
    pub order_hit: bool,
    pub type_hit: bool,
    /// Present only for reflectional ground truth.
    pub tilt: Option<TiltCriteria>,
    /// Detector error, if the image could not be analysed.
    pub error: Option<String>,
}

impl ImageVerdict {
    fn new(truth: &GroundTruthRecord) -> Self {
        Self {
            filename: truth.filename.clone(),
            truth_type: truth.symmetry_type,
            truth_order: truth.order,
            truth_tilt_deg: truth.tilt_deg,
            detected_type: None,
            detected_order: None,
            detected_tilt_deg: None,
            detected_axes: Vec::new(),
            tilt_error_deg: None,
            order_hit: false,
            type_hit: false,
            tilt: None,
            error: None,
        }
    }

    /// Scores a detection outcome against the truth.
    pub fn score(
        truth: &GroundTruthRecord,
        detected: std::result::Result<(SymmetryType, u32, Option<f64>, Vec<f64>), String>,
        angle_step: f64,
    ) -> Self {
        let mut v = Self::new(truth);
        let reflectional_truth = truth.symmetry_type == SymmetryType::Reflectional;
        match detected {
            Ok((kind, order, tilt, axes)) => {
                v.detected_type = Some(kind);
                v.detected_order = Some(order);
                v.detected_tilt_deg = tilt;
                v.order_hit = order == truth.order;
                v.type_hit = kind == truth.symmetry_type;
                if let Some(t) = truth.tilt_deg.filter(|_| reflectional_truth) {
                    v.tilt_error_deg = axes.iter().map(|&a| circular_distance(a, t)).min_by(f64::total_cmp);
                }
                v.detected_axes = axes;
            }
            Err(msg) => v.error = Some(msg),
        }
        if reflectional_truth {
            v.tilt = Some(TiltCriteria::judge(v.tilt_error_deg, angle_step));
        }
        v
    }
}

/// Aggregate and per-image results of a dataset run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: DetectorConfig,
    pub image_count: usize,
    pub reflectional_count: usize,
    pub order_rate: f64,
    pub type_rate: f64,
    /// `None` when the dataset has no reflectional ground truth.
    pub exact_rate: Option<f64>,
    pub strict_rate: Option<f64>,
    pub lenient_rate: Option<f64>,
    pub verdicts: Vec<ImageVerdict>,
}

impl EvaluationReport {
    /// Aggregates verdicts; they are sorted by filename first.
    pub fn from_verdicts(config: DetectorConfig, mut verdicts: Vec<ImageVerdict>) -> Self {
        verdicts.sort_by(|a, b| a.filename.cmp(&b.filename));
        let n = verdicts.len();
        let rate = |hits: usize, total: usize| if total == 0 { 0.0 } else { hits as f64 / total as f64 };
        let tilts: Vec<TiltCriteria> = verdicts.iter().filter_map(|v| v.tilt).collect();
        let tilt_rate = |pick: fn(&TiltCriteria) -> bool| {
            (!tilts.is_empty()).then(|| rate(tilts.iter().filter(|t| pick(t)).count(), tilts.len()))
        };
        Self {
            image_count: n,
            reflectional_count: tilts.len(),
            order_rate: rate(verdicts.iter().filter(|v| v.order_hit).count(), n),
            type_rate: rate(verdicts.iter().filter(|v| v.type_hit).count(), n),
            exact_rate: tilt_rate(|t| t.exact),
            strict_rate: tilt_rate(|t| t.strict),
            lenient_rate: tilt_rate(|t| t.lenient),
            config,
            verdicts,
        }
    }
}

/// Resolves every manifest entry under `images_dir`.
pub fn resolve_images(images_dir: &Path, truth: &[GroundTruthRecord]) -> Result<Vec<PathBuf>> {
    truth
        .iter()
        .map(|r| {
            let p = images_dir.join(&r.filename);
            if p.is_file() {
                Ok(p)
            } else {
                Err(Error::MissingImage(p))
            }
        })
        .collect()
}

/// Runs the detector over a dataset. Input and I/O errors abort the run;
/// per-image detector failures are recorded in the verdicts.
pub fn evaluate_dataset(
    images_dir: &Path,
    truth: &[GroundTruthRecord],
    cfg: &DetectorConfig,
) -> Result<EvaluationReport> {
    cfg.validate()?;
    let paths = resolve_images(images_dir, truth)?;
    let verdicts = truth
        .par_iter()
        .zip(paths.par_iter())
        .map(|(record, path)| {
            let img = load_image(path)?;
            let detected = match detect_at_working_size(&img, cfg) {
                Ok(r) => Ok((r.symmetry_type, r.order, r.tilt_deg, r.tilt_axes)),
                Err(e @ (Error::ZeroVarianceImage | Error::NearGaussianImage { .. })) => Err(e.to_string()),
                Err(e) => return Err(e),
            };
            Ok(ImageVerdict::score(record, detected, cfg.angle_step))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvaluationReport::from_verdicts(cfg.clone(), verdicts))
}
