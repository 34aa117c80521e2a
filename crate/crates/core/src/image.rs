//! Square greyscale images, the inscribed evaluation disk, and intensity
//! standardization.
//!
//! Pixels are stored row-major as `f64` intensities in `[0, 1]`. Geometry
//! uses a centred frame: the origin sits at `((n - 1) / 2, (n - 1) / 2)`,
//! `x` grows with the column index and `y` grows towards row 0, so angles
//! are measured counter-clockwise from the positive x-axis as drawn on
//! screen.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::imageops::FilterType;
use image::{DynamicImage, ImageBuffer, ImageReader, Luma};

use crate::error::{Error, Result};

/// Smallest accepted side length.
pub const MIN_SIZE: usize = 8;

/// Intensity variance at or below this value counts as a constant signal.
pub const VARIANCE_FLOOR: f64 = 1e-12;

const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

/// Square, row-major greyscale image with intensities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GreyImage {
    size: usize,
    pixels: Vec<f64>,
}

impl GreyImage {
    /// Wraps a row-major buffer of `size * size` intensities.
    pub fn from_pixels(size: usize, pixels: Vec<f64>) -> Result<Self> {
        if size < MIN_SIZE {
            return Err(Error::DegenerateImage { size, min: MIN_SIZE });
        }
        if pixels.len() != size * size {
            return Err(Error::InvalidConfig(format!(
                "pixel buffer has {} entries, expected {}",
                pixels.len(),
                size * size
            )));
        }
        if let Some(bad) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidConfig(format!("intensity {bad} is outside [0, 1]")));
        }
        Ok(Self { size, pixels })
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(size * size);
        for row in 0..size {
            for col in 0..size {
                pixels.push(f(row, col));
            }
        }
        Self::from_pixels(size, pixels)
    }

    /// Constant image; handy for tests and degenerate-input checks.
    pub fn constant(size: usize, value: f64) -> Result<Self> {
        Self::from_pixels(size, vec![value; size * size])
    }

    // Constructor for transform outputs that are known to be in range.
    pub(crate) fn from_raw(size: usize, pixels: Vec<f64>) -> Self {
        debug_assert_eq!(pixels.len(), size * size);
        Self { size, pixels }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.size + col]
    }

    /// Centre of the grid in pixel units (same value for rows and columns).
    pub fn centre(&self) -> f64 {
        (self.size as f64 - 1.0) * 0.5
    }

    /// Mean absolute difference against `other`, restricted to `mask`.
    pub fn disk_mean_abs_diff(&self, other: &GreyImage, mask: &DiskMask) -> Result<f64> {
        if self.size != other.size {
            return Err(Error::SizeMismatch {
                left: self.size,
                right: other.size,
            });
        }
        let sum: f64 = mask
            .indices()
            .iter()
            .map(|&i| (self.pixels[i] - other.pixels[i]).abs())
            .sum();
        Ok(sum / mask.len() as f64)
    }
}

/// Pixels whose centre lies within `(n - 1) / 2` of the image centre.
///
/// Membership is decided in doubled integer coordinates, so it is exact and
/// symmetric under every lattice rotation and reflection about the centre.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiskMask {
    size: usize,
    indices: Vec<usize>,
}

impl DiskMask {
    pub fn new(size: usize) -> Result<Self> {
        if size < MIN_SIZE {
            return Err(Error::DegenerateImage { size, min: MIN_SIZE });
        }
        let indices = (0..size * size)
            .filter(|&idx| Self::inside(size, idx / size, idx % size))
            .collect();
        Ok(Self { size, indices })
    }

    pub fn for_image(img: &GreyImage) -> Self {
        Self::new(img.size()).expect("GreyImage is never degenerate")
    }

    fn inside(size: usize, row: usize, col: usize) -> bool {
        let span = size as i64 - 1;
        let dy = 2 * row as i64 - span;
        let dx = 2 * col as i64 - span;
        dx * dx + dy * dy <= span * span
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row < self.size && col < self.size && Self::inside(self.size, row, col)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Row-major indices of member pixels, ascending.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// A 1-D sample with zero mean and unit (population) variance.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardizedSamples {
    values: Vec<f64>,
}

impl StandardizedSamples {
    /// Standardizes arbitrary values. Returns `None` when the variance does
    /// not exceed [`VARIANCE_FLOOR`] or fewer than two values are given.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.len() < 2 {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        if var.is_nan() || var <= VARIANCE_FLOOR {
            return None;
        }
        let inv_sd = 1.0 / var.sqrt();
        Some(Self {
            values: values.iter().map(|v| (v - mean) * inv_sd).collect(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / self.values.len() as f64
    }
}

/// Gathers the disk pixels of `img` and standardizes them.
pub fn standardize(img: &GreyImage, mask: &DiskMask) -> Result<StandardizedSamples> {
    if img.size() != mask.size() {
        return Err(Error::SizeMismatch {
            left: img.size(),
            right: mask.size(),
        });
    }
    let samples: Vec<f64> = mask.indices().iter().map(|&i| img.pixels[i]).collect();
    StandardizedSamples::from_values(&samples).ok_or(Error::ZeroVarianceImage)
}

/// Loads a PGM or PNG raster, converts it to luma and centre-crops it square.
pub fn load_image(path: impl AsRef<Path>) -> Result<GreyImage> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let decoded = ImageReader::open(path)?
        .with_guessed_format()?
        .decode()
        .map_err(|e| Error::UnsupportedFormat(format!("{}: {e}", path.display())))?;
    from_dynamic(&decoded)
}

/// Converts a decoded raster into a [`GreyImage`].
pub fn from_dynamic(decoded: &DynamicImage) -> Result<GreyImage> {
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    let side = width.min(height);
    if side < MIN_SIZE {
        return Err(Error::DegenerateImage {
            size: side,
            min: MIN_SIZE,
        });
    }
    let (x0, y0) = ((width - side) / 2, (height - side) / 2);

    let full: Vec<f64> = match decoded {
        DynamicImage::ImageLuma8(buf) => buf.as_raw().iter().map(|&v| v as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(buf) => buf.as_raw().iter().map(|&v| v as f64 / 65535.0).collect(),
        other => other
            .to_rgb8()
            .pixels()
            .map(|p| {
                let [r, g, b] = p.0;
                ((LUMA_R * r as f64 + LUMA_G * g as f64 + LUMA_B * b as f64) / 255.0).clamp(0.0, 1.0)
            })
            .collect(),
    };

    let mut pixels = Vec::with_capacity(side * side);
    for row in y0..y0 + side {
        pixels.extend_from_slice(&full[row * width + x0..row * width + x0 + side]);
    }
    GreyImage::from_pixels(side, pixels)
}

/// Resamples to `target × target` with a triangle (bilinear) kernel.
pub fn resize(img: &GreyImage, target: usize) -> Result<GreyImage> {
    if target < MIN_SIZE {
        return Err(Error::DegenerateImage {
            size: target,
            min: MIN_SIZE,
        });
    }
    if target == img.size() {
        return Ok(img.clone());
    }
    let n = img.size() as u32;
    let buf: ImageBuffer<Luma<f32>, Vec<f32>> =
        ImageBuffer::from_raw(n, n, img.pixels().iter().map(|&v| v as f32).collect())
            .expect("buffer length matches dimensions");
    let out = image::imageops::resize(&buf, target as u32, target as u32, FilterType::Triangle);
    let pixels = out.into_raw().into_iter().map(|v| (v as f64).clamp(0.0, 1.0)).collect();
    Ok(GreyImage::from_raw(target, pixels))
}

/// Quantizes to 8 bits (`round(v * 255)`).
pub fn to_bytes(img: &GreyImage) -> Vec<u8> {
    img.pixels()
        .iter()
        .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Writes a binary (P5) PGM with maxval 255.
pub fn write_pgm(img: &GreyImage, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P5\n{} {}\n255\n", img.size(), img.size())?;
    out.write_all(&to_bytes(img))?;
    out.flush()?;
    Ok(())
}
