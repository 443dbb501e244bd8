//! Driver for the verification suites: each subcommand runs one suite and
//! writes its report (CSV or JSON), exiting nonzero if any check missed its
//! tolerance.  Flags override the optional JSON config file; the
//! `S3WAVE_OUT_DIR` environment variable picks the output directory when
//! `--out` is relative or absent.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use s3wave::report::{resolve_out_path, run_suite, ConfigFile, OutputFormat, Suite};

#[derive(Parser)]
#[command(name = "s3wave", version, about = "Verification suites for wave mechanics on the 3-sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config file; any flag below overrides its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Sphere radius R.
    #[arg(long, global = true)]
    radius: Option<f64>,

    /// Planck constant.
    #[arg(long, global = true)]
    hbar: Option<f64>,

    /// Particle mass.
    #[arg(long, global = true)]
    mass: Option<f64>,

    /// Largest principal quantum number the suites sweep (max 8).
    #[arg(long, global = true)]
    nmax: Option<u32>,

    /// Seed for the randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Report file; relative paths land in $S3WAVE_OUT_DIR if set.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    #[arg(long, global = true, value_name = "TOL")]
    tol_kernels: Option<f64>,
    #[arg(long, global = true, value_name = "TOL")]
    tol_norms: Option<f64>,
    #[arg(long, global = true, value_name = "TOL")]
    tol_overlaps: Option<f64>,
    #[arg(long, global = true, value_name = "TOL")]
    tol_roundtrip: Option<f64>,
    #[arg(long, global = true, value_name = "TOL")]
    tol_spectrum: Option<f64>,
    #[arg(long, global = true, value_name = "TOL")]
    tol_evolve: Option<f64>,
    #[arg(long, global = true, value_name = "TOL")]
    tol_group: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Bessel-kernel Fourier pairs, convolution closure, reproducing identity.
    VerifyKernels,
    /// Stationary normalization constants against the reference table.
    NormConsts,
    /// Frame-state overlaps and the basis Gram matrices.
    Overlaps,
    /// Transform unitarity and both round-trip compositions.
    FtRoundtrip,
    /// Energy levels and Helmholtz residual scaling.
    Spectrum,
    /// Spectral time evolution and the cross-picture residual.
    Evolve,
    /// Group-law axioms and geodesic invariants.
    GroupCheck,
}

impl Command {
    fn suite(&self) -> Suite {
        match self {
            Command::VerifyKernels => Suite::Kernels,
            Command::NormConsts => Suite::NormConsts,
            Command::Overlaps => Suite::Overlaps,
            Command::FtRoundtrip => Suite::FtRoundtrip,
            Command::Spectrum => Suite::Spectrum,
            Command::Evolve => Suite::Evolve,
            Command::GroupCheck => Suite::GroupCheck,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

impl Cli {
    fn overrides(&self) -> ConfigFile {
        ConfigFile {
            radius: self.radius,
            hbar: self.hbar,
            mass: self.mass,
            n_max: self.nmax,
            seed: self.seed,
            tol_kernels: self.tol_kernels,
            tol_norms: self.tol_norms,
            tol_overlaps: self.tol_overlaps,
            tol_roundtrip: self.tol_roundtrip,
            tol_spectrum: self.tol_spectrum,
            tol_evolve: self.tol_evolve,
            tol_group: self.tol_group,
            out: self.out.clone(),
            format: self.format.map(Into::into),
        }
    }
}

fn run(cli: &Cli) -> s3wave::Result<bool> {
    let mut file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    file.override_with(&cli.overrides());
    let cfg = file.resolve()?;
    let suite = cli.command.suite();
    let report = run_suite(suite, &cfg)?;
    let path = resolve_out_path(&cfg, suite);
    report.write_to(&path, cfg.format)?;
    for row in report.failures() {
        eprintln!(
            "FAIL {}: computed {:+.12e}{:+.12e}i, expected {:+.12e}{:+.12e}i, err {:.3e} > tol {:.3e}",
            row.check_id, row.computed_re, row.computed_im, row.expected_re, row.expected_im,
            row.abs_err, row.tol
        );
    }
    let failed = report.failures().count();
    println!(
        "{}: {} checks, {} failed; report written to {}",
        suite.command(),
        report.rows.len(),
        failed,
        path.display()
    );
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
