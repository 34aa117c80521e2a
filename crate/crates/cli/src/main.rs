//! `negsym`: symmetry detection, dataset evaluation and synthetic data.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use negsym::evaluate::{evaluate_dataset, read_manifest};
use negsym::synthetic::{file_name, generate_dataset, write_dataset, MANIFEST_NAME};
use negsym::{detect_at_working_size, load_image, DetectorConfig, Error, SymmetryResult, SymmetrySpec};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "negsym", version, about = "Negentropy-based planar symmetry detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect the symmetry of one image and print the evidence as JSON.
    Detect {
        image: PathBuf,
        #[command(flatten)]
        knobs: Knobs,
        /// Also write both negentropy curves to this CSV file.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Score the detector against a ground-truth manifest.
    Evaluate {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Also write the report JSON to this file.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        knobs: Knobs,
    },
    /// Write synthetic images with known symmetry plus a manifest.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct Knobs {
    /// Largest rotational order tested.
    #[arg(long = "kmax", default_value_t = 9)]
    k_max: u32,
    /// Relative tolerance shared by the detector's tests.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Reflection-axis sampling step in degrees.
    #[arg(long = "angle-step", default_value_t = 1.0)]
    angle_step: f64,
    /// Working resolution images are resampled to.
    #[arg(long, default_value_t = 256)]
    size: usize,
}

impl Knobs {
    fn config(&self) -> DetectorConfig {
        DetectorConfig {
            k_max: self.k_max,
            delta: self.delta,
            angle_step: self.angle_step,
            working_size: self.size,
            ..DetectorConfig::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Reflection,
    Rotation,
    None,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    /// Images per class for a full dataset.
    #[arg(long = "per-class", default_value_t = 10)]
    per_class: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    size: usize,
    /// Write a single image instead of a full dataset.
    #[arg(long, requires = "kind")]
    single: bool,
    #[arg(long = "type", value_enum)]
    kind: Option<Kind>,
    #[arg(long, default_value_t = 1)]
    order: u32,
    /// Axis tilt in degrees for a reflectional image.
    #[arg(long, default_value_t = 0.0)]
    tilt: f64,
}

#[derive(Serialize)]
struct DetectOutput<'a> {
    order: u32,
    #[serde(rename = "type")]
    symmetry_type: negsym::SymmetryType,
    tilt_deg: Option<f64>,
    tilt_axes: &'a [f64],
    baseline_j: f64,
    candidate_orders: &'a [u32],
    rotational_curve: &'a [f64],
    reflectional_curve: &'a [f64],
    config: &'a DetectorConfig,
}

impl<'a> DetectOutput<'a> {
    fn new(result: &'a SymmetryResult, config: &'a DetectorConfig) -> Self {
        Self {
            order: result.order,
            symmetry_type: result.symmetry_type,
            tilt_deg: result.tilt_deg,
            tilt_axes: &result.tilt_axes,
            baseline_j: result.baseline(),
            candidate_orders: &result.candidate_orders,
            rotational_curve: result.rotational.values(),
            reflectional_curve: result.reflectional.values(),
            config,
        }
    }
}

/// Failure of a subcommand, carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn input_error(message: String) -> Failure {
    Failure { code: 2, message }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::DegenerateImage { .. } | Error::ZeroVarianceImage | Error::ZeroVarianceCurve => 3,
        Error::NearGaussianImage { .. } => 4,
        _ => 2,
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| input_error(format!("serializing output: {e}")))
}

fn write_curves(path: &Path, result: &SymmetryResult) -> Result<(), Failure> {
    let mut out = String::from("curve,index_or_angle,j\n");
    for (k, j) in result.rotational.values().iter().enumerate() {
        out.push_str(&format!("rotational,{},{j}\n", k + 1));
    }
    let refl = &result.reflectional;
    for (i, j) in refl.values().iter().enumerate() {
        out.push_str(&format!("reflectional,{},{j}\n", refl.angle(i)));
    }
    fs::write(path, out)?;
    Ok(())
}

fn cmd_detect(image: &Path, knobs: &Knobs, curves: Option<&Path>) -> Result<String, Failure> {
    let cfg = knobs.config();
    cfg.validate()?;
    let img = load_image(image)?;
    let result = detect_at_working_size(&img, &cfg)?;
    if let Some(path) = curves {
        write_curves(path, &result)?;
    }
    to_json(&DetectOutput::new(&result, &cfg))
}

fn cmd_evaluate(images: &Path, truth: &Path, report: Option<&Path>, knobs: &Knobs) -> Result<String, Failure> {
    let cfg = knobs.config();
    let records = read_manifest(truth)?;
    let evaluation = evaluate_dataset(images, &records, &cfg)?;
    let json = to_json(&evaluation)?;
    if let Some(path) = report {
        fs::write(path, format!("{json}\n"))?;
    }
    Ok(json)
}

fn cmd_generate(args: &GenerateArgs) -> Result<String, Failure> {
    let records = match (args.single, args.kind) {
        (false, None) => generate_dataset(args.per_class, args.seed, args.size, &args.out)?,
        (_, Some(kind)) => {
            let spec = match kind {
                Kind::Reflection => SymmetrySpec::reflectional(args.order, args.tilt, args.seed),
                Kind::Rotation => SymmetrySpec::rotational(args.order, args.seed),
                Kind::None => SymmetrySpec::asymmetric(args.seed),
            }
            .with_size(args.size);
            spec.validate()?;
            let count = if args.single { 1 } else { args.per_class };
            let specs: Vec<(String, SymmetrySpec)> = (0..count as u64)
                .map(|i| {
                    let s = SymmetrySpec {
                        seed: args.seed.wrapping_add(i),
                        ..spec.clone()
                    };
                    (file_name(s.symmetry_type, s.order, i as usize), s)
                })
                .collect();
            write_dataset(&specs, &args.out)?
        }
        (true, None) => return Err(input_error("--single needs --type".into())),
    };
    Ok(format!(
        "wrote {} images and {}",
        records.len(),
        args.out.join(MANIFEST_NAME).display()
    ))
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("NEGSYM_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| input_error(format!("NEGSYM_THREADS must be a positive integer, got {raw:?}")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| input_error(format!("cannot start worker pool: {e}")))
}

fn run(cli: Cli) -> Result<String, Failure> {
    let pool = thread_pool()?;
    pool.install(|| match &cli.command {
        Command::Detect { image, knobs, curves } => cmd_detect(image, knobs, curves.as_deref()),
        Command::Evaluate {
            images,
            truth,
            report,
            knobs,
        } => cmd_evaluate(images, truth, report.as_deref(), knobs),
        Command::Generate(args) => cmd_generate(args),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("negsym: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
