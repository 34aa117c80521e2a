//! Symmetry detection from negentropy curves.
//!
//! The image is averaged with rotated copies (by `360°/K`) and with reflected
//! copies (across axes sampled over `[0°, 180°)`). A true symmetry leaves the
//! negentropy of the average at the baseline value, so the 2-D search turns
//! into three 1-D tests:
//!
//! 1. candidate orders: rotational negentropy within `δ` of the baseline;
//! 2. order selection: the largest candidate `K` for which the reflectional
//!    curve repeats with period `180°/K`;
//! 3. tilt: a local extremum of the reflectional curve, within `δ` of the
//!    baseline, about which the curve is mirror symmetric.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{standardize, DiskMask, GreyImage};
use crate::negentropy::{curve_negentropy, negentropy};
use crate::transform::{average, PlanarTransform};

/// Kind of symmetry reported by the detector or recorded as ground truth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SymmetryType {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "rotation")]
    Rotational,
    #[serde(rename = "reflection")]
    Reflectional,
}

impl SymmetryType {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Rotational => "rotation",
            Self::Reflectional => "reflection",
        }
    }
}

impl fmt::Display for SymmetryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SymmetryType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(Self::None),
            "rotation" | "rotational" => Ok(Self::Rotational),
            "reflection" | "reflectional" => Ok(Self::Reflectional),
            other => Err(Error::MalformedManifest(format!("unknown symmetry type {other:?}"))),
        }
    }
}

/// How [`neg_tilt_angle`] chooses among extrema that are mirror centres.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiltSelection {
    /// Among extrema whose mirror error is within tolerance, take the one
    /// whose reflectional negentropy is closest to the baseline.
    #[default]
    BaselineProximity,
    /// Take the extremum with the smallest mirror error.
    MirrorError,
}

/// Detector parameters.
///
/// `delta` is shared by the three tolerance tests unless one of the
/// per-test overrides is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub k_max: u32,
    pub delta: f64,
    /// Spacing of the reflection-axis samples in degrees; must divide 180.
    pub angle_step: f64,
    /// Side length images are resampled to before detection.
    pub working_size: usize,
    pub baseline_floor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodicity_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extremum_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mirror_delta: Option<f64>,
    #[serde(default)]
    pub tilt_selection: TiltSelection,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            k_max: 9,
            delta: 0.05,
            angle_step: 1.0,
            working_size: 256,
            baseline_floor: 1e-6,
            periodicity_delta: None,
            extremum_delta: None,
            mirror_delta: None,
            tilt_selection: TiltSelection::default(),
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !(2..=36).contains(&self.k_max) {
            return fail(format!("k_max {} not in 2..=36", self.k_max));
        }
        for (name, d) in [
            ("delta", Some(self.delta)),
            ("periodicity_delta", self.periodicity_delta),
            ("extremum_delta", self.extremum_delta),
            ("mirror_delta", self.mirror_delta),
        ] {
            if let Some(d) = d {
                if !(0.0..1.0).contains(&d) {
                    return fail(format!("{name} {d} not in [0, 1)"));
                }
            }
        }
        let steps = 180.0 / self.angle_step;
        if self.angle_step.is_nan()
            || self.angle_step <= 0.0
            || (steps - steps.round()).abs() > 1e-9
            || steps.round() < 8.0
        {
            return fail(format!(
                "angle_step {} must divide 180 into at least 8 samples",
                self.angle_step
            ));
        }
        if self.working_size < crate::image::MIN_SIZE {
            return fail(format!("working_size {} is too small", self.working_size));
        }
        if self.baseline_floor.is_nan() || self.baseline_floor <= 0.0 {
            return fail("baseline_floor must be positive".into());
        }
        Ok(())
    }

    /// Number of reflection-axis samples, `180 / angle_step`.
    pub fn angle_count(&self) -> usize {
        (180.0 / self.angle_step).round() as usize
    }

    pub fn periodicity_tolerance(&self) -> f64 {
        self.periodicity_delta.unwrap_or(self.delta)
    }

    pub fn extremum_tolerance(&self) -> f64 {
        self.extremum_delta.unwrap_or(self.delta)
    }

    pub fn mirror_tolerance(&self) -> f64 {
        self.mirror_delta.unwrap_or(self.delta)
    }
}

/// Negentropy of the image averaged with its rotation by `360°/K`, for
/// `K = 1..=k_max`. `K = 1` is the baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RotationalCurve {
    values: Vec<f64>,
}

impl RotationalCurve {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "rotational curve needs the baseline entry");
        Self { values }
    }

    pub fn baseline(&self) -> f64 {
        self.values[0]
    }

    /// Value at order `k` (1-based). Panics outside `1..=k_max`.
    pub fn at(&self, order: u32) -> f64 {
        self.values[order as usize - 1]
    }

    pub fn k_max(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Negentropy of the image averaged with its reflection across the axis at
/// `i * angle_step` degrees; circular with period 180°.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionalCurve {
    values: Vec<f64>,
    angle_step: f64,
}

impl ReflectionalCurve {
    pub fn new(values: Vec<f64>, angle_step: f64) -> Self {
        Self { values, angle_step }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn angle_step(&self) -> f64 {
        self.angle_step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn angle(&self, index: usize) -> f64 {
        index as f64 * self.angle_step
    }
}

/// Outcome of [`detect`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryResult {
    pub order: u32,
    pub symmetry_type: SymmetryType,
    pub tilt_deg: Option<f64>,
    /// All reflection axes, `tilt + k * 180 / order` reduced to `[0, 180)`,
    /// ascending. Empty unless the type is reflectional.
    pub tilt_axes: Vec<f64>,
    pub candidate_orders: Vec<u32>,
    pub rotational: RotationalCurve,
    pub reflectional: ReflectionalCurve,
}

impl SymmetryResult {
    pub fn baseline(&self) -> f64 {
        self.rotational.baseline()
    }
}

fn relative_gap(value: f64, baseline: f64) -> f64 {
    (value - baseline).abs() / baseline
}

/// Negentropy of the disk samples of `img`.
pub fn image_negentropy(img: &GreyImage, mask: &DiskMask) -> Result<f64> {
    Ok(negentropy(&standardize(img, mask)?)?.value())
}

/// Negentropy of `img` averaged with `transform(img)`.
pub fn averaged_negentropy(img: &GreyImage, mask: &DiskMask, transform: PlanarTransform) -> Result<f64> {
    let averaged = average(img, &transform.apply(img))?;
    image_negentropy(&averaged, mask)
}

/// Baseline plus the averaged negentropies for orders `2..=k_max`.
pub fn rotational_negentropy(img: &GreyImage, cfg: &DetectorConfig) -> Result<RotationalCurve> {
    let mask = DiskMask::for_image(img);
    let baseline = image_negentropy(img, &mask)?;
    let rest = (2..=cfg.k_max)
        .into_par_iter()
        .map(|k| averaged_negentropy(img, &mask, PlanarTransform::Rotation(360.0 / k as f64)))
        .collect::<Result<Vec<f64>>>()?;
    let mut values = Vec::with_capacity(cfg.k_max as usize);
    values.push(baseline);
    values.extend(rest);
    Ok(RotationalCurve::new(values))
}

/// Orders whose rotational negentropy lies within `δ` of the baseline,
/// always including 1, ascending.
pub fn candidate_orders(curve: &RotationalCurve, cfg: &DetectorConfig) -> Result<Vec<u32>> {
    let baseline = curve.baseline();
    if baseline.is_nan() || baseline < cfg.baseline_floor {
        return Err(Error::NearGaussianImage {
            baseline,
            floor: cfg.baseline_floor,
        });
    }
    Ok(std::iter::once(1)
        .chain((2..=curve.k_max()).filter(|&k| relative_gap(curve.at(k), baseline) <= cfg.delta))
        .collect())
}

/// Reflectional negentropy sampled every `angle_step` degrees over `[0, 180)`.
pub fn reflectional_negentropy(img: &GreyImage, cfg: &DetectorConfig) -> Result<ReflectionalCurve> {
    let mask = DiskMask::for_image(img);
    let step = cfg.angle_step;
    let values = (0..cfg.angle_count())
        .into_par_iter()
        .map(|i| averaged_negentropy(img, &mask, PlanarTransform::Reflection(i as f64 * step)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ReflectionalCurve::new(values, step))
}

/// Mean absolute difference between the curve and itself shifted by
/// `180° / order`, relative to `baseline`.
///
/// Whole-sample lags are plain circular shifts. Fractional lags evaluate the
/// curve's trigonometric interpolant, which suits a curve that is periodic
/// over the sampled half-turn.
pub fn periodicity_deviation(curve: &ReflectionalCurve, order: u32, baseline: f64) -> f64 {
    let m = curve.len();
    if order <= 1 || m == 0 {
        return 0.0;
    }
    let values = curve.values();
    let lag = 180.0 / (order as f64 * curve.angle_step());
    let shifted: Vec<f64> = if lag.fract() == 0.0 {
        let whole = lag as usize;
        (0..m).map(|i| values[(i + whole) % m]).collect()
    } else {
        fractional_shift(values, lag)
    };
    let total: f64 = values.iter().zip(&shifted).map(|(a, b)| (a - b).abs()).sum();
    total / m as f64 / baseline
}

/// `out[i] = f(i + lag)` for the band-limited periodic `f` through `values`.
fn fractional_shift(values: &[f64], lag: f64) -> Vec<f64> {
    let m = values.len();
    let mut planner = FftPlanner::new();
    let mut spectrum: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(m).process(&mut spectrum);
    for (k, c) in spectrum.iter_mut().enumerate() {
        if 2 * k == m {
            // Nyquist bin: keep the real cosine so the output stays real.
            *c *= (std::f64::consts::PI * lag).cos();
            continue;
        }
        let freq = if 2 * k < m { k as f64 } else { k as f64 - m as f64 };
        *c *= Complex64::from_polar(1.0, std::f64::consts::TAU * freq * lag / m as f64);
    }
    planner.plan_fft_inverse(m).process(&mut spectrum);
    spectrum.iter().map(|c| c.re / m as f64).collect()
}

/// Whether the curve repeats with period `180° / order`. Order 1 always does.
pub fn is_periodic(curve: &ReflectionalCurve, order: u32, baseline: f64, cfg: &DetectorConfig) -> bool {
    order <= 1 || periodicity_deviation(curve, order, baseline) <= cfg.periodicity_tolerance()
}

/// Indices of local extrema (circular neighbours) whose value is within `δ`
/// of the baseline, ascending.
///
/// A run of equal values counts as one point located at its centre, with
/// ties going to the lower index. A completely flat curve is a single
/// plateau reported at index 0.
pub fn find_extrema(curve: &ReflectionalCurve, baseline: f64, cfg: &DetectorConfig) -> Vec<usize> {
    let values = curve.values();
    let m = values.len();
    let tol = cfg.extremum_tolerance();
    let eligible = |v: f64| relative_gap(v, baseline) <= tol;
    if m == 0 {
        return Vec::new();
    }
    // Start at the beginning of a run so no run wraps around the end.
    let Some(start) = (0..m).find(|&i| values[i] != values[(i + m - 1) % m]) else {
        return if eligible(values[0]) { vec![0] } else { Vec::new() };
    };

    // (first index, length, value)
    let mut runs: Vec<(usize, usize, f64)> = Vec::new();
    for step in 0..m {
        let i = (start + step) % m;
        match runs.last_mut() {
            Some(run) if run.2 == values[i] => run.1 += 1,
            _ => runs.push((i, 1, values[i])),
        }
    }

    let r = runs.len();
    let mut out: Vec<usize> = (0..r)
        .filter_map(|j| {
            let (first, len, v) = runs[j];
            let prev = runs[(j + r - 1) % r].2;
            let next = runs[(j + 1) % r].2;
            let is_extremum = (v > prev && v > next) || (v < prev && v < next);
            (is_extremum && eligible(v)).then_some((first + (len - 1) / 2) % m)
        })
        .collect();
    out.sort_unstable();
    out
}

/// Mirror-symmetry error of the curve about each extremum.
///
/// The curve is rotated so the extremum sits at index `M / 2`, mirrored
/// circularly about that index, and averaged with the mirror. The error is
/// the relative change in curve negentropy caused by that averaging. A flat
/// curve or a flat average scores 0.
pub fn mirror_errors(curve: &ReflectionalCurve, extrema: &[usize]) -> Vec<f64> {
    let values = curve.values();
    let m = values.len();
    let centre = m / 2;
    extrema
        .iter()
        .map(|&e| {
            let centred: Vec<f64> = (0..m).map(|i| values[(i + e + m - centre) % m]).collect();
            let symmetric: Vec<f64> = (0..m)
                .map(|i| 0.5 * (centred[i] + centred[(2 * centre + m - i) % m]))
                .collect();
            match (curve_negentropy(&centred), curve_negentropy(&symmetric)) {
                (Ok(j), Ok(jp)) => (j.value() - jp.value()).abs() / j.value(),
                (Err(Error::ZeroVarianceCurve), _) | (_, Err(Error::ZeroVarianceCurve)) => 0.0,
                _ => f64::INFINITY,
            }
        })
        .collect()
}

/// Tilt of a reflection axis in degrees, or `None` when no extremum is a
/// centre of mirror symmetry within tolerance.
///
/// A reflection-symmetric image also makes its curve mirror symmetric about
/// the midpoints between axes, where the value is that of a non-symmetric
/// rotation. [`TiltSelection::BaselineProximity`] uses the distance to the
/// baseline to tell the two apart.
pub fn neg_tilt_angle(
    curve: &ReflectionalCurve,
    extrema: &[usize],
    baseline: f64,
    cfg: &DetectorConfig,
) -> Option<f64> {
    let errors = mirror_errors(curve, extrema);
    let tol = cfg.mirror_tolerance();
    let score = |i: usize| match cfg.tilt_selection {
        TiltSelection::MirrorError => errors[i],
        TiltSelection::BaselineProximity => relative_gap(curve.values()[extrema[i]], baseline),
    };
    let candidates = (0..extrema.len()).filter(|&i| match cfg.tilt_selection {
        TiltSelection::MirrorError => true,
        TiltSelection::BaselineProximity => errors[i] <= tol,
    });
    // First minimum wins, so ties go to the lower angle.
    let best = candidates.fold(None, |best: Option<usize>, i| match best {
        Some(b) if score(b) <= score(i) => best,
        _ => Some(i),
    })?;
    (errors[best] <= tol).then(|| curve.angle(extrema[best]))
}

/// Reflection axes generated by one tilt under an order-`order` dihedral group.
pub fn reflection_axes(tilt_deg: f64, order: u32) -> Vec<f64> {
    let mut axes: Vec<f64> = (0..order.max(1))
        .map(|k| (tilt_deg + k as f64 * 180.0 / order.max(1) as f64).rem_euclid(180.0))
        .collect();
    axes.sort_by(f64::total_cmp);
    axes
}

/// Full detection on an image already at its working resolution.
pub fn detect(img: &GreyImage, cfg: &DetectorConfig) -> Result<SymmetryResult> {
    cfg.validate()?;
    let rotational = rotational_negentropy(img, cfg)?;
    let candidates = candidate_orders(&rotational, cfg)?;
    let baseline = rotational.baseline();
    let reflectional = reflectional_negentropy(img, cfg)?;

    // Largest periodic candidate wins; order 1 is always periodic.
    let order = candidates
        .iter()
        .rev()
        .copied()
        .find(|&k| is_periodic(&reflectional, k, baseline, cfg))
        .unwrap_or(1);
    let extrema = find_extrema(&reflectional, baseline, cfg);
    let tilt = neg_tilt_angle(&reflectional, &extrema, baseline, cfg);

    let symmetry_type = match (tilt, order) {
        (Some(_), _) => SymmetryType::Reflectional,
        (None, 1) => SymmetryType::None,
        (None, _) => SymmetryType::Rotational,
    };
    Ok(SymmetryResult {
        order,
        symmetry_type,
        tilt_deg: tilt,
        tilt_axes: tilt.map(|t| reflection_axes(t, order)).unwrap_or_default(),
        candidate_orders: candidates,
        rotational,
        reflectional,
    })
}

/// Resamples to the configured working size, then detects.
pub fn detect_at_working_size(img: &GreyImage, cfg: &DetectorConfig) -> Result<SymmetryResult> {
    let working = crate::image::resize(img, cfg.working_size)?;
    detect(&working, cfg)
}
