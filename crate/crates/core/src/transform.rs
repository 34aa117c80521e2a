//! Rotations and reflections about the image centre, and pixelwise averaging.
//!
//! General angles use inverse mapping with bilinear interpolation. Rotations
//! by multiples of 90° and reflections across axes tilted 0°, 45°, 90° or
//! 135° map the pixel lattice onto itself and are done as index permutations.
//! Preimages that fall off the grid read as 0; they never land inside the
//! [`DiskMask`](crate::image::DiskMask).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GreyImage;

/// A rotation or a reflection about the image centre, angle in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "angle_deg", rename_all = "lowercase")]
pub enum PlanarTransform {
    /// Counter-clockwise rotation.
    Rotation(f64),
    /// Reflection across the line through the centre tilted this far from
    /// the x-axis.
    Reflection(f64),
}

impl PlanarTransform {
    /// Angle reduced to `[0, 360)` for rotations and `[0, 180)` for reflections.
    pub fn normalized_angle(&self) -> f64 {
        match *self {
            Self::Rotation(a) => a.rem_euclid(360.0),
            Self::Reflection(a) => a.rem_euclid(180.0),
        }
    }

    pub fn apply(&self, img: &GreyImage) -> GreyImage {
        match *self {
            Self::Rotation(a) => rotate(img, a),
            Self::Reflection(a) => reflect(img, a),
        }
    }

    /// Maps a point given in centred coordinates to its image under the
    /// transform.
    pub fn map_point(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            Self::Rotation(a) => {
                let (s, c) = a.to_radians().sin_cos();
                (c * x - s * y, s * x + c * y)
            }
            Self::Reflection(a) => {
                let (s, c) = (2.0 * a).to_radians().sin_cos();
                (c * x + s * y, s * x - c * y)
            }
        }
    }
}

/// Which lattice permutation, if any, realizes a transform exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Permutation {
    Identity,
    Rot90,
    Rot180,
    Rot270,
    /// Axis along x: rows flip.
    FlipRows,
    /// Axis along y: columns flip.
    FlipCols,
    /// Axis at 45°.
    AntiTranspose,
    /// Axis at 135°.
    Transpose,
}

impl Permutation {
    fn of(t: PlanarTransform) -> Option<Self> {
        let a = t.normalized_angle();
        match t {
            PlanarTransform::Rotation(_) => match a {
                0.0 => Some(Self::Identity),
                90.0 => Some(Self::Rot90),
                180.0 => Some(Self::Rot180),
                270.0 => Some(Self::Rot270),
                _ => None,
            },
            PlanarTransform::Reflection(_) => match a {
                0.0 => Some(Self::FlipRows),
                45.0 => Some(Self::AntiTranspose),
                90.0 => Some(Self::FlipCols),
                135.0 => Some(Self::Transpose),
                _ => None,
            },
        }
    }

    /// Source `(row, col)` for output pixel `(row, col)`.
    #[inline]
    fn source(self, n: usize, row: usize, col: usize) -> (usize, usize) {
        let last = n - 1;
        match self {
            Self::Identity => (row, col),
            Self::Rot90 => (col, last - row),
            Self::Rot180 => (last - row, last - col),
            Self::Rot270 => (last - col, row),
            Self::FlipRows => (last - row, col),
            Self::FlipCols => (row, last - col),
            Self::AntiTranspose => (last - col, last - row),
            Self::Transpose => (col, row),
        }
    }

    fn apply(self, img: &GreyImage) -> GreyImage {
        let n = img.size();
        if self == Self::Identity {
            return img.clone();
        }
        let mut out = Vec::with_capacity(n * n);
        for row in 0..n {
            for col in 0..n {
                let (sr, sc) = self.source(n, row, col);
                out.push(img.get(sr, sc));
            }
        }
        GreyImage::from_raw(n, out)
    }
}

/// Rotates `img` counter-clockwise by `theta_deg` about its centre.
pub fn rotate(img: &GreyImage, theta_deg: f64) -> GreyImage {
    let t = PlanarTransform::Rotation(theta_deg);
    if let Some(p) = Permutation::of(t) {
        return p.apply(img);
    }
    // Inverse map: output p reads the source at Rot(-theta) p.
    let (s, c) = theta_deg.to_radians().sin_cos();
    resample(img, |x, y| (c * x + s * y, -s * x + c * y))
}

/// Reflects `img` across the line through its centre tilted `theta_deg`
/// from the x-axis.
pub fn reflect(img: &GreyImage, theta_deg: f64) -> GreyImage {
    let t = PlanarTransform::Reflection(theta_deg);
    if let Some(p) = Permutation::of(t) {
        return p.apply(img);
    }
    // A reflection is its own inverse.
    let (s, c) = (2.0 * theta_deg).to_radians().sin_cos();
    resample(img, |x, y| (c * x + s * y, s * x - c * y))
}

/// Pixelwise mean of two equally sized images.
pub fn average(a: &GreyImage, b: &GreyImage) -> Result<GreyImage> {
    if a.size() != b.size() {
        return Err(Error::SizeMismatch {
            left: a.size(),
            right: b.size(),
        });
    }
    let pixels = a.pixels().iter().zip(b.pixels()).map(|(x, y)| 0.5 * (x + y)).collect();
    Ok(GreyImage::from_raw(a.size(), pixels))
}

/// Inverse-mapped bilinear resampling; `preimage` works in centred
/// coordinates (x right, y up).
fn resample(img: &GreyImage, preimage: impl Fn(f64, f64) -> (f64, f64)) -> GreyImage {
    let n = img.size();
    let centre = img.centre();
    let last = (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for row in 0..n {
        let y = centre - row as f64;
        for col in 0..n {
            let x = col as f64 - centre;
            let (sx, sy) = preimage(x, y);
            out.push(bilinear(img, centre - sy, sx + centre, last));
        }
    }
    GreyImage::from_raw(n, out)
}

#[inline]
fn bilinear(img: &GreyImage, row: f64, col: f64, last: f64) -> f64 {
    const EPS: f64 = 1e-9;
    if !(row >= -EPS && col >= -EPS && row <= last + EPS && col <= last + EPS) {
        return 0.0;
    }
    let n = img.size();
    let row = row.clamp(0.0, last);
    let col = col.clamp(0.0, last);
    let r0 = row.floor() as usize;
    let c0 = col.floor() as usize;
    let r1 = (r0 + 1).min(n - 1);
    let c1 = (c0 + 1).min(n - 1);
    let fr = row - r0 as f64;
    let fc = col - c0 as f64;
    let top = img.get(r0, c0) * (1.0 - fc) + img.get(r0, c1) * fc;
    let bottom = img.get(r1, c0) * (1.0 - fc) + img.get(r1, c1) * fc;
    (top * (1.0 - fr) + bottom * fr).clamp(0.0, 1.0)
}
