//! Detection of global rotational and reflectional symmetry in greyscale
//! images.
//!
//! An image is averaged with transformed copies of itself. A transform that
//! is a true symmetry leaves the negentropy of the intensity distribution
//! unchanged; any other transform mixes unrelated regions and moves it.
//! Sweeping rotations by `360°/K` and reflections across tilted axes yields
//! two 1-D negentropy curves from which the order of symmetry and the tilt of
//! a reflection axis are read off.
//!
//! # Modules
//! - [`image`]: square greyscale images, the evaluation disk, loading/saving.
//! - [`transform`]: rotations, reflections and averaging about the centre.
//! - [`negentropy`]: the two-function negentropy estimator.
//! - [`detector`]: negentropy curves and the detection procedure.
//! - [`synthetic`]: images with exact, known symmetries.
//! - [`evaluate`]: ground-truth manifests and dataset scoring.
//!
//! ```no_run
//! use negsym::{detect_at_working_size, load_image, DetectorConfig};
//!
//! let img = load_image("snowflake.png")?;
//! let result = detect_at_working_size(&img, &DetectorConfig::default())?;
//! println!("order {} {:?} tilt {:?}", result.order, result.symmetry_type, result.tilt_deg);
//! # Ok::<(), negsym::Error>(())
//! ```

pub mod detector;
pub mod error;
pub mod evaluate;
pub mod image;
pub mod negentropy;
pub mod synthetic;
pub mod transform;

pub use detector::{
    candidate_orders, detect, detect_at_working_size, find_extrema, is_periodic, neg_tilt_angle,
    reflectional_negentropy, rotational_negentropy, DetectorConfig, ReflectionalCurve, RotationalCurve, SymmetryResult,
    SymmetryType,
};
pub use error::{Error, Result};
pub use evaluate::{evaluate_dataset, read_manifest, EvaluationReport, GroundTruthRecord};
pub use image::{load_image, resize, standardize, write_pgm, DiskMask, GreyImage, StandardizedSamples};
pub use negentropy::{curve_negentropy, entropy_approx, negentropy, Negentropy};
pub use synthetic::{generate, generate_dataset, SymmetrySpec};
pub use transform::{average, reflect, rotate, PlanarTransform};
