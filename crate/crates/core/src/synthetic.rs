//! Images with exact, known planar symmetries.
//!
//! Each image is a sum of angular harmonics on smooth radial bumps,
//!
//! ```text
//! f(r, φ) = Σ_m g_m(r) · [c_m + Σ_k w_k (a_mk cos(K k (φ - t)) + b_mk sin(K k (φ - t)))]
//! ```
//!
//! where `K` is the order and `t` the tilt. Reflectional specs drop the sine
//! terms, which makes `φ ↦ 2t - φ` an exact symmetry; rotational specs keep
//! both. Angular factors are evaluated as powers of the unit complex number
//! `(x + iy) / r` by repeated multiplication, which commutes exactly with the
//! lattice symmetries (multiplying by ±1, ±i and conjugating are exact in
//! floating point). Lattice-aligned symmetries therefore hold bit-for-bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detector::SymmetryType;
use crate::error::{Error, Result};
use crate::evaluate::{write_manifest, GroundTruthRecord};
use crate::image::{write_pgm, GreyImage, MIN_SIZE};

/// Largest order the generator accepts.
pub const MAX_ORDER: u32 = 9;

/// Shortest angular wavelength, in pixels at a bump's centre radius, that
/// a harmonic keeps most of its amplitude for.
const MIN_WAVELENGTH_PX: f64 = 6.0;

/// Amplitude of the rotation-invariant offset each radial bump carries.
/// Kept small against the angular terms so the symmetric pattern dominates.
const RADIAL_OFFSET: f64 = 0.3;

/// SplitMix64: a 64-bit state, fixed-increment generator.
///
/// Output for seed `s` is fully specified, so datasets are reproducible in
/// any language that implements the same three-line mixer.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..bound`.
    pub fn below(&mut self, bound: u64) -> u64 {
        // Bias is at most bound / 2^64.
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}

/// Description of one synthetic image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetrySpec {
    pub symmetry_type: SymmetryType,
    pub order: u32,
    pub tilt_deg: f64,
    pub seed: u64,
    pub harmonic_count: u32,
    pub radial_count: u32,
    pub size: usize,
}

impl SymmetrySpec {
    pub fn reflectional(order: u32, tilt_deg: f64, seed: u64) -> Self {
        Self {
            symmetry_type: SymmetryType::Reflectional,
            order,
            tilt_deg,
            seed,
            ..Self::default()
        }
    }

    pub fn rotational(order: u32, seed: u64) -> Self {
        Self {
            symmetry_type: SymmetryType::Rotational,
            order,
            seed,
            ..Self::default()
        }
    }

    pub fn asymmetric(seed: u64) -> Self {
        Self {
            symmetry_type: SymmetryType::None,
            order: 1,
            seed,
            ..Self::default()
        }
    }

    pub fn with_size(mut self, size: usize) -> Self {
        self.size = size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSpec(msg));
        if self.size < MIN_SIZE {
            return fail(format!("size {} is below {MIN_SIZE}", self.size));
        }
        if self.harmonic_count == 0 || self.radial_count == 0 {
            return fail("harmonic and radial counts must be positive".into());
        }
        match self.symmetry_type {
            SymmetryType::Reflectional => {
                if !(1..=MAX_ORDER).contains(&self.order) {
                    return fail(format!("reflectional order {} not in 1..={MAX_ORDER}", self.order));
                }
                if !(0.0..180.0).contains(&self.tilt_deg) {
                    return fail(format!("tilt {} not in [0, 180)", self.tilt_deg));
                }
            }
            SymmetryType::Rotational => {
                if !(2..=MAX_ORDER).contains(&self.order) {
                    return fail(format!("rotational order {} not in 2..={MAX_ORDER}", self.order));
                }
            }
            SymmetryType::None => {}
        }
        Ok(())
    }
}

impl Default for SymmetrySpec {
    fn default() -> Self {
        Self {
            symmetry_type: SymmetryType::None,
            order: 1,
            tilt_deg: 0.0,
            seed: 0,
            harmonic_count: 8,
            radial_count: 6,
            size: 256,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Complex {
    re: f64,
    im: f64,
}

impl Complex {
    const ONE: Self = Self { re: 1.0, im: 0.0 };

    #[inline]
    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    fn powi(self, n: u32) -> Self {
        (0..n).fold(Self::ONE, |acc, _| acc.mul(self))
    }
}

/// `(sin, cos)` of an angle in degrees, exact at multiples of 45°.
fn sin_cos_deg(deg: f64) -> (f64, f64) {
    use std::f64::consts::FRAC_1_SQRT_2 as H;
    let a = deg.rem_euclid(360.0);
    match a {
        0.0 => (0.0, 1.0),
        45.0 => (H, H),
        90.0 => (1.0, 0.0),
        135.0 => (H, -H),
        180.0 => (0.0, -1.0),
        225.0 => (-H, -H),
        270.0 => (-1.0, 0.0),
        315.0 => (-H, H),
        _ => a.to_radians().sin_cos(),
    }
}

struct Bump {
    centre: f64,
    width: f64,
    offset: f64,
    cos_coeffs: Vec<f64>,
    sin_coeffs: Vec<f64>,
}

/// Renders the image described by `spec`.
pub fn generate(spec: &SymmetrySpec) -> Result<GreyImage> {
    spec.validate()?;
    let n = spec.size;
    let radius = (n as f64 - 1.0) / 2.0;
    let (order, tilt, keep_sine) = match spec.symmetry_type {
        SymmetryType::Reflectional => (spec.order, spec.tilt_deg, false),
        SymmetryType::Rotational => (spec.order, spec.tilt_deg, true),
        SymmetryType::None => (1, 0.0, true),
    };

    let mut rng = SplitMix64::new(spec.seed);
    let m_count = spec.radial_count as usize;
    let bumps: Vec<Bump> = (0..m_count)
        .map(|m| {
            let frac = if m_count == 1 {
                0.5
            } else {
                0.2 + 0.6 * m as f64 / (m_count - 1) as f64
            };
            let centre = frac * radius;
            let width = 0.6 * radius / m_count as f64;
            let offset = rng.uniform(-1.0, 1.0) * RADIAL_OFFSET;
            let mut cos_coeffs = Vec::with_capacity(spec.harmonic_count as usize);
            let mut sin_coeffs = Vec::with_capacity(spec.harmonic_count as usize);
            for k in 1..=spec.harmonic_count {
                let freq = (order * k) as f64;
                // Fade harmonics that the pixel grid cannot carry at this radius.
                let limit = std::f64::consts::TAU * centre / MIN_WAVELENGTH_PX;
                let weight = (-(freq / limit).powi(2)).exp() / k as f64;
                let a = rng.uniform(-1.0, 1.0);
                let b = rng.uniform(-1.0, 1.0);
                cos_coeffs.push(weight * a);
                sin_coeffs.push(if keep_sine { weight * b } else { 0.0 });
            }
            Bump {
                centre,
                width,
                offset,
                cos_coeffs,
                sin_coeffs,
            }
        })
        .collect();

    let (s, c) = sin_cos_deg(tilt);
    let centre_px = radius;
    let mut raw = Vec::with_capacity(n * n);
    for row in 0..n {
        let y = centre_px - row as f64;
        for col in 0..n {
            let x = col as f64 - centre_px;
            let r = (x * x + y * y).sqrt();
            if r > radius {
                raw.push(0.0);
                continue;
            }
            // Coordinates in the frame whose x-axis is the tilt direction.
            let xt = c * x + s * y;
            let yt = -s * x + c * y;
            let unit = if r > 0.0 {
                Complex { re: xt / r, im: yt / r }
            } else {
                Complex { re: 0.0, im: 0.0 }
            };
            let base = unit.powi(order);
            let taper = {
                let q = 1.0 - (r / radius) * (r / radius);
                q * q
            };
            let mut value = 0.0;
            for bump in &bumps {
                let d = (r - bump.centre) / bump.width;
                let g = taper * (-0.5 * d * d).exp();
                let mut angular = bump.offset;
                let mut h = base;
                for (a, b) in bump.cos_coeffs.iter().zip(&bump.sin_coeffs) {
                    angular += a * h.re + b * h.im;
                    h = h.mul(base);
                }
                value += g * angular;
            }
            raw.push(value);
        }
    }

    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if span.is_nan() || span <= 0.0 {
        return Err(Error::InvalidSpec("generated image is constant".into()));
    }
    let pixels = raw.into_iter().map(|v| ((v - lo) / span).clamp(0.0, 1.0)).collect();
    GreyImage::from_pixels(n, pixels)
}

/// Classes in a generated dataset: reflectional orders 1..=9 then
/// rotational orders 2..=9.
pub fn dataset_classes() -> Vec<(SymmetryType, u32)> {
    (1..=MAX_ORDER)
        .map(|o| (SymmetryType::Reflectional, o))
        .chain((2..=MAX_ORDER).map(|o| (SymmetryType::Rotational, o)))
        .collect()
}

/// Specs for a full dataset, in manifest order, with their file names.
///
/// Tilts are whole degrees drawn uniformly from `[0, 180)`.
pub fn dataset_specs(count_per_class: usize, seed: u64, size: usize) -> Vec<(String, SymmetrySpec)> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::new();
    for (kind, order) in dataset_classes() {
        for idx in 0..count_per_class {
            let image_seed = rng.next_u64();
            let tilt = rng.below(180) as f64;
            let spec = match kind {
                SymmetryType::Reflectional => SymmetrySpec::reflectional(order, tilt, image_seed),
                _ => SymmetrySpec::rotational(order, image_seed),
            }
            .with_size(size);
            out.push((file_name(kind, order, idx), spec));
        }
    }
    out
}

pub fn file_name(kind: SymmetryType, order: u32, idx: usize) -> String {
    format!("{}_o{order}_{idx:03}.pgm", kind.as_str())
}

/// Ground-truth record for a spec.
pub fn truth_for(filename: &str, spec: &SymmetrySpec) -> GroundTruthRecord {
    GroundTruthRecord {
        filename: filename.to_string(),
        symmetry_type: spec.symmetry_type,
        order: match spec.symmetry_type {
            SymmetryType::None => 1,
            _ => spec.order,
        },
        tilt_deg: (spec.symmetry_type == SymmetryType::Reflectional).then_some(spec.tilt_deg),
    }
}

/// Writes images plus `manifest.csv` for the given specs into `out_dir`.
pub fn write_dataset(specs: &[(String, SymmetrySpec)], out_dir: &Path) -> Result<Vec<GroundTruthRecord>> {
    use rayon::prelude::*;

    fs::create_dir_all(out_dir)?;
    specs
        .par_iter()
        .map(|(name, spec)| write_pgm(&generate(spec)?, out_dir.join(name)))
        .collect::<Result<Vec<()>>>()?;
    let records: Vec<GroundTruthRecord> = specs.iter().map(|(name, spec)| truth_for(name, spec)).collect();
    write_manifest(&records, out_dir.join(MANIFEST_NAME))?;
    Ok(records)
}

/// File name of the manifest written next to a dataset.
pub const MANIFEST_NAME: &str = "manifest.csv";

/// Generates the full class-balanced dataset.
pub fn generate_dataset(
    count_per_class: usize,
    seed: u64,
    size: usize,
    out_dir: &Path,
) -> Result<Vec<GroundTruthRecord>> {
    write_dataset(&dataset_specs(count_per_class, seed, size), out_dir)
}
