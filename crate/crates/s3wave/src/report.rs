//! Verification reports and the suites behind the command-line driver.
//!
//! Every suite reduces to a list of [`CheckRow`]s: a computed value, the
//! expected value it is held against, and a tolerance.  Rows serialize to a
//! fixed CSV column set (`suite, check_id, computed_re, computed_im,
//! expected_re, expected_im, abs_err, tol, pass`) so runs are diffable, or
//! to JSON.  Independent blocks of a suite run on scoped threads; assembly
//! of the final report is single-threaded and keeps a fixed row order.
//!
//! Numeric tolerances come in two kinds.  Each suite has one headline
//! tolerance, adjustable per run ([`Tolerances`]); rows that check exact
//! arithmetic identities (multiplier algebra, group axioms) instead pin
//! their own tolerance in code, because loosening them would not make any
//! failure more acceptable.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ball::{BallPoly, PolyCSum};
use crate::config_space::{
    apply_config_op, inner_product_c, inner_product_c_with, op_matrix_element, stationary_state,
    BasisCoeff, BasisExpansion, ConfigOp, PhysicalParams, SphereGrid,
};
use crate::dynamics::{
    energy_level, evolve_consistency_check, evolve_spectral, geodesic_flow, geodesic_frequency,
    geodesic_trajectory, group_compose, group_inverse, GroupElement,
};
use crate::fourier_bridge::{forward_ft, inverse_ft, pi_frame_overlap, pi_frame_state_c, FrameKind, FrameLabel};
use crate::kernels::{
    apply_multiplier, convolve_radial_1d, fourier_pair_residual, kernel_value, RadialKernel,
};
use crate::momentum_space::{
    inner_product_m_direct, inner_product_m_spectral, norm_const_m, orthonormal_const_m,
    stationary_state_m, stationary_wf_m, CauchyData, MomentumPoint,
};
use crate::{C64, Error, QuantumNumbers, Result};

/// One verified quantity.  `abs_err = |computed - expected|` and
/// `pass = abs_err <= tol` are derived on construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckRow {
    pub suite: String,
    pub check_id: String,
    pub computed_re: f64,
    pub computed_im: f64,
    pub expected_re: f64,
    pub expected_im: f64,
    pub abs_err: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn new(suite: &str, check_id: impl Into<String>, computed: C64, expected: C64, tol: f64) -> Self {
        let abs_err = (computed - expected).norm();
        Self {
            suite: suite.to_string(),
            check_id: check_id.into(),
            computed_re: computed.re,
            computed_im: computed.im,
            expected_re: expected.re,
            expected_im: expected.im,
            abs_err,
            tol,
            pass: abs_err <= tol,
        }
    }

    pub fn real(suite: &str, check_id: impl Into<String>, computed: f64, expected: f64, tol: f64) -> Self {
        Self::new(suite, check_id, C64::new(computed, 0.0), C64::new(expected, 0.0), tol)
    }
}

pub const CSV_HEADER: &str =
    "suite,check_id,computed_re,computed_im,expected_re,expected_im,abs_err,tol,pass";

/// Ordered collection of check rows.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<CheckRow>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// Fixed-column CSV; identifiers are plain kebab-case, so no quoting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            debug_assert!(!r.suite.contains(',') && !r.check_id.contains(','));
            writeln!(
                out,
                "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.3e},{:.3e},{}",
                r.suite,
                r.check_id,
                r.computed_re,
                r.computed_im,
                r.expected_re,
                r.expected_im,
                r.abs_err,
                r.tol,
                r.pass
            )
            .expect("string write");
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = serde_json::json!({ "all_pass": self.all_pass(), "rows": self.rows });
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => Ok(self.to_csv()),
            OutputFormat::Json => self.to_json(),
        }
    }

    pub fn write_to(&self, path: &Path, format: OutputFormat) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        std::fs::write(path, self.render(format)?)?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Domain(format!("unknown output format {other:?}; use csv or json"))),
        }
    }
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.extension())
    }
}

/// The verification suites, one per driver subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Kernels,
    NormConsts,
    Overlaps,
    FtRoundtrip,
    Spectrum,
    Evolve,
    GroupCheck,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Kernels,
        Suite::NormConsts,
        Suite::Overlaps,
        Suite::FtRoundtrip,
        Suite::Spectrum,
        Suite::Evolve,
        Suite::GroupCheck,
    ];

    /// Short name used in row labels, tolerance flags, and file names.
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Kernels => "kernels",
            Suite::NormConsts => "norms",
            Suite::Overlaps => "overlaps",
            Suite::FtRoundtrip => "roundtrip",
            Suite::Spectrum => "spectrum",
            Suite::Evolve => "evolve",
            Suite::GroupCheck => "group",
        }
    }

    /// Subcommand spelling.
    pub fn command(&self) -> &'static str {
        match self {
            Suite::Kernels => "verify-kernels",
            Suite::NormConsts => "norm-consts",
            Suite::Overlaps => "overlaps",
            Suite::FtRoundtrip => "ft-roundtrip",
            Suite::Spectrum => "spectrum",
            Suite::Evolve => "evolve",
            Suite::GroupCheck => "group-check",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|c| c.command() == s || c.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown suite {s:?}")))
    }
}

/// Headline tolerance of each suite.  Defaults are the values the checks
/// are expected to hold with comfortable margin.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub kernels: f64,
    pub norms: f64,
    pub overlaps: f64,
    pub roundtrip: f64,
    pub spectrum: f64,
    pub evolve: f64,
    pub group: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            kernels: 1e-6,
            norms: 1e-9,
            overlaps: 1e-8,
            roundtrip: 1e-8,
            spectrum: 1e-8,
            evolve: 1e-4,
            group: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn for_suite(&self, suite: Suite) -> f64 {
        match suite {
            Suite::Kernels => self.kernels,
            Suite::NormConsts => self.norms,
            Suite::Overlaps => self.overlaps,
            Suite::FtRoundtrip => self.roundtrip,
            Suite::Spectrum => self.spectrum,
            Suite::Evolve => self.evolve,
            Suite::GroupCheck => self.group,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kernels", self.kernels),
            ("norms", self.norms),
            ("overlaps", self.overlaps),
            ("roundtrip", self.roundtrip),
            ("spectrum", self.spectrum),
            ("evolve", self.evolve),
            ("group", self.group),
        ] {
            if !(v > 0.0) {
                return Err(Error::Domain(format!("tolerance {name} = {v} must be positive")));
            }
        }
        Ok(())
    }
}

/// Everything a suite run depends on.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub n_max: u32,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: PhysicalParams::default(),
            n_max: 3,
            tolerances: Tolerances::default(),
            seed: 7,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max > 8 {
            return Err(Error::Domain(format!(
                "n_max = {} exceeds the supported range (8): factorial normalizations degrade past it",
                self.n_max
            )));
        }
        self.tolerances.validate()
    }
}

/// On-disk JSON configuration; any field may be omitted and is then filled
/// from the defaults, and command-line flags override whatever the file
/// says.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub radius: Option<f64>,
    pub hbar: Option<f64>,
    pub mass: Option<f64>,
    pub n_max: Option<u32>,
    pub seed: Option<u64>,
    pub tol_kernels: Option<f64>,
    pub tol_norms: Option<f64>,
    pub tol_overlaps: Option<f64>,
    pub tol_roundtrip: Option<f64>,
    pub tol_spectrum: Option<f64>,
    pub tol_evolve: Option<f64>,
    pub tol_group: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Fields set in `other` win.
    pub fn override_with(&mut self, other: &ConfigFile) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f.clone(); } )* };
        }
        take!(
            radius, hbar, mass, n_max, seed, tol_kernels, tol_norms, tol_overlaps, tol_roundtrip,
            tol_spectrum, tol_evolve, tol_group, out, format
        );
    }

    /// Fill the gaps with defaults and validate.
    pub fn resolve(&self) -> Result<RunConfig> {
        let base = RunConfig::default();
        let d = Tolerances::default();
        let cfg = RunConfig {
            params: PhysicalParams::new(
                self.radius.unwrap_or(base.params.radius),
                self.hbar.unwrap_or(base.params.hbar),
                self.mass.unwrap_or(base.params.mass),
            )?,
            n_max: self.n_max.unwrap_or(base.n_max),
            tolerances: Tolerances {
                kernels: self.tol_kernels.unwrap_or(d.kernels),
                norms: self.tol_norms.unwrap_or(d.norms),
                overlaps: self.tol_overlaps.unwrap_or(d.overlaps),
                roundtrip: self.tol_roundtrip.unwrap_or(d.roundtrip),
                spectrum: self.tol_spectrum.unwrap_or(d.spectrum),
                evolve: self.tol_evolve.unwrap_or(d.evolve),
                group: self.tol_group.unwrap_or(d.group),
            },
            seed: self.seed.unwrap_or(base.seed),
            out: self.out.clone(),
            format: self.format.unwrap_or(base.format),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Where a suite's report lands.  The `S3WAVE_OUT_DIR` environment variable
/// names the output directory only: an absolute `--out` ignores it, a
/// relative one is joined onto it, and with no `--out` the file is
/// `s3wave-<suite>.<ext>` inside it.
pub fn resolve_out_path(cfg: &RunConfig, suite: Suite) -> PathBuf {
    let dir = std::env::var_os("S3WAVE_OUT_DIR").map(PathBuf::from).unwrap_or_default();
    match &cfg.out {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => dir.join(p),
        None => dir.join(format!("s3wave-{}.{}", suite.name(), cfg.format.extension())),
    }
}

/// Run one suite and assemble its report.
pub fn run_suite(suite: Suite, cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let rows = match suite {
        Suite::Kernels => suite_kernels(cfg),
        Suite::NormConsts => suite_norms(cfg),
        Suite::Overlaps => suite_overlaps(cfg),
        Suite::FtRoundtrip => suite_roundtrip(cfg),
        Suite::Spectrum => suite_spectrum(cfg),
        Suite::Evolve => suite_evolve(cfg),
        Suite::GroupCheck => suite_group(cfg),
    }?;
    Ok(Report { rows })
}

type Block<'a> = Box<dyn FnOnce() -> Result<Vec<CheckRow>> + Send + 'a>;

/// Run independent blocks on scoped threads, then concatenate their rows in
/// the declared order.
fn run_blocks(blocks: Vec<Block<'_>>) -> Result<Vec<CheckRow>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = blocks.into_iter().map(|b| scope.spawn(b)).collect();
        let mut rows = Vec::new();
        for h in handles {
            rows.extend(h.join().map_err(|_| Error::Domain("suite worker panicked".into()))??);
        }
        Ok(rows)
    })
}

fn suite_seed(cfg: &RunConfig, salt: u64) -> u64 {
    cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt)
}

// ---------------------------------------------------------------- kernels

fn pair_block(suite: &'static str, dim: u32, alpha: f64, tol: f64) -> Result<Vec<CheckRow>> {
    let kernel = RadialKernel::new(alpha, dim)?;
    let mut rows = Vec::new();
    // [0.16, 0.92]: tiny transform radii stretch the oscillation arches past
    // what the quadrature window can accelerate
    for i in 1..=20 {
        let x = (3 + i) as f64 / 25.0;
        let residual = fourier_pair_residual(&kernel, x)?;
        rows.push(CheckRow::real(
            suite,
            format!("pair-d{dim}-a{alpha}-x{i:02}"),
            residual,
            0.0,
            tol,
        ));
    }
    Ok(rows)
}

fn suite_kernels(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let suite = Suite::Kernels.name();
    let tol = cfg.tolerances.kernels;
    run_blocks(vec![
        Box::new(move || pair_block(suite, 1, 0.5, tol)),
        Box::new(move || pair_block(suite, 3, 1.0, tol)),
        Box::new(move || pair_block(suite, 3, 2.0, tol)),
        Box::new(move || {
            let mut rows = Vec::new();
            // at the critical order the multiplier is the plain cutoff, so
            // band-limited data reproduce themselves exactly
            let critical = RadialKernel::new(1.5, 3)?;
            let mut worst: f64 = 0.0;
            for i in 0..11 {
                let x = i as f64 / 10.5;
                worst = worst.max((critical.multiplier(x) - 1.0).abs());
            }
            rows.push(CheckRow::real(suite, "reproducing-multiplier", worst, 0.0, 1e-12));
            let data = PolyCSum::from_poly(
                1,
                BallPoly::monomial((2, 0, 0), C64::new(0.7, 0.0))
                    .add(&BallPoly::monomial((0, 1, 1), C64::new(0.0, -0.4))),
            );
            let reproduced = apply_multiplier(&critical, &data)?;
            let mut dev: f64 = 0.0;
            for x in [[0.2, 0.1, -0.3], [0.5, -0.4, 0.6], [0.0, 0.8, 0.1]] {
                dev = dev.max((reproduced.eval(x) - data.eval(x)).norm());
            }
            rows.push(CheckRow::real(suite, "reproducing-on-data", dev, 0.0, 1e-12));
            // convolution closure in multiplier arithmetic; composed orders
            // must stay above the dimension threshold
            for (a, b) in [(1.5, 2.0), (1.0, 2.0), (2.0, 2.0)] {
                let ka = RadialKernel::new(a, 3)?;
                let kb = RadialKernel::new(b, 3)?;
                let (c, composed) = ka.compose(&kb)?;
                for x in [0.3, 0.7] {
                    rows.push(CheckRow::real(
                        suite,
                        format!("closure-a{a}-b{b}-x{x}"),
                        ka.multiplier(x) * kb.multiplier(x),
                        c * composed.multiplier(x),
                        1e-12,
                    ));
                }
            }
            // the same closure by literal 1-d convolution, tails truncated
            let k2 = RadialKernel::new(2.0, 1)?;
            let (c, composed) = k2.compose(&k2)?;
            for x in [0.3, 0.9, 1.7, 2.6, 3.4] {
                rows.push(CheckRow::real(
                    suite,
                    format!("convolution-1d-x{x}"),
                    convolve_radial_1d(2.0, 2.0, x, 40.0, 1e-9)?,
                    c * kernel_value(composed.alpha, x)?,
                    tol,
                ));
            }
            Ok(rows)
        }),
    ])
}

// ------------------------------------------------------------------ norms

/// Six reference values of [`norm_const_m`] at `hbar = 1` as commonly
/// tabulated.  The `(3, 2)` entry is the one the closed form does not
/// reproduce: the limit converges to `8 / (3 sqrt 10) = 0.8432...` instead
/// of the tabulated `1`, and the suite reports that disagreement as an
/// honest failing row next to a passing self-consistency row.
pub fn reference_norm_table() -> [(u32, u32, f64); 6] {
    [
        (0, 0, 2f64.sqrt()),
        (1, 0, 2f64.sqrt()),
        (1, 1, 2.0 * 2f64.sqrt() / 3f64.sqrt()),
        (2, 0, -1.0),
        (3, 0, -1.0 / 3f64.sqrt()),
        (3, 2, 1.0),
    ]
}

fn suite_norms(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let suite = Suite::NormConsts.name();
    let tol = cfg.tolerances.norms;
    let params = cfg.params;
    let n_cap = cfg.n_max.min(4);
    run_blocks(vec![
        Box::new(move || {
            let mut rows = Vec::new();
            for (n, l, expected) in reference_norm_table() {
                rows.push(CheckRow::real(
                    suite,
                    format!("ref-n{n}-l{l}"),
                    norm_const_m(n, l, 1.0)?,
                    expected,
                    tol,
                ));
            }
            rows.push(CheckRow::real(
                suite,
                "consistency-n3-l2",
                norm_const_m(3, 2, 1.0)?,
                8.0 / (3.0 * 10f64.sqrt()),
                tol,
            ));
            for n in 0..=n_cap {
                for l in 0..=n {
                    let fact: f64 = (1..=(n - l)).map(f64::from).product::<f64>().max(1.0);
                    rows.push(CheckRow::real(
                        suite,
                        format!("factorial-link-n{n}-l{l}"),
                        norm_const_m(n, l, params.hbar)?.abs(),
                        orthonormal_const_m(n, l, params.hbar)? / fact.sqrt(),
                        tol,
                    ));
                }
            }
            Ok(rows)
        }),
        Box::new(move || {
            let mut rows = Vec::new();
            for n in 0..=n_cap {
                for l in 0..=n {
                    let qn = QuantumNumbers::new(n, l, 0)?;
                    let f = stationary_state(qn, &params)?;
                    rows.push(CheckRow::new(
                        suite,
                        format!("unit-norm-c-n{n}-l{l}"),
                        inner_product_c(&f, &f)?,
                        C64::new(1.0, 0.0),
                        tol,
                    ));
                    let g = stationary_state_m(qn, &params)?;
                    rows.push(CheckRow::new(
                        suite,
                        format!("unit-norm-m-n{n}-l{l}"),
                        inner_product_m_spectral(&g, &g)?,
                        C64::new(1.0, 0.0),
                        tol,
                    ));
                }
            }
            Ok(rows)
        }),
    ])
}

// --------------------------------------------------------------- overlaps

/// Maximum deviations of a Gram matrix from the identity.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GramSummary {
    pub max_diag_dev: f64,
    pub max_offdiag: f64,
    pub modes: usize,
}

fn gram_summary(products: &[Vec<C64>]) -> GramSummary {
    let mut diag: f64 = 0.0;
    let mut off: f64 = 0.0;
    for (i, row) in products.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i == j {
                diag = diag.max((v - C64::new(1.0, 0.0)).norm());
            } else {
                off = off.max(v.norm());
            }
        }
    }
    GramSummary { max_diag_dev: diag, max_offdiag: off, modes: products.len() }
}

/// Gram matrix of the position-representation stationary family through the
/// chart quadrature (each mode evaluated once per node), for all modes with
/// `n <= n_max`.
pub fn config_gram_quadrature(
    n_max: u32,
    params: &PhysicalParams,
    grid: &SphereGrid,
) -> Result<GramSummary> {
    let modes = QuantumNumbers::modes_up_to(n_max);
    let nodes = grid.nodes();
    let mut values = Vec::with_capacity(modes.len());
    for &qn in &modes {
        let f = stationary_state(qn, params)?;
        let Some((plus, minus)) = f.chart_polys() else {
            return Err(Error::Domain("stationary states are polynomial".into()));
        };
        let per_node: Vec<(C64, C64)> =
            nodes.iter().map(|&(x, _)| (plus.eval(x), minus.eval(x))).collect();
        values.push(per_node);
    }
    let r2 = params.radius * params.radius;
    let mut products = vec![vec![C64::new(0.0, 0.0); modes.len()]; modes.len()];
    for i in 0..modes.len() {
        for j in 0..=i {
            let mut acc = C64::new(0.0, 0.0);
            for (k, &(_, w)) in nodes.iter().enumerate() {
                let (fp, fm) = values[i][k];
                let (gp, gm) = values[j][k];
                acc += (fp.conj() * gp + fm.conj() * gm) * w;
            }
            products[i][j] = acc * r2;
            products[j][i] = products[i][j].conj();
        }
    }
    Ok(gram_summary(&products))
}

/// Which integration path evaluates the momentum pairing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GramPath {
    /// Diagonalized single-ball form, exact on polynomial data.
    Spectral,
    /// Literal double integral by oscillatory quadrature, to the given
    /// tolerance.
    Direct { quad_tol: f64 },
}

/// Gram matrix of the momentum-representation stationary family through the
/// chosen pairing path, for all modes with `n <= n_max`.
pub fn momentum_gram(n_max: u32, params: &PhysicalParams, path: GramPath) -> Result<GramSummary> {
    let modes = QuantumNumbers::modes_up_to(n_max);
    let states: Vec<CauchyData> = modes
        .iter()
        .map(|&qn| stationary_state_m(qn, params))
        .collect::<Result<_>>()?;
    let mut products = vec![vec![C64::new(0.0, 0.0); modes.len()]; modes.len()];
    for i in 0..modes.len() {
        for j in 0..=i {
            let v = match path {
                GramPath::Spectral => inner_product_m_spectral(&states[i], &states[j])?,
                GramPath::Direct { quad_tol } => {
                    inner_product_m_direct(&states[i], &states[j], quad_tol)?
                }
            };
            products[i][j] = v;
            products[j][i] = v.conj();
        }
    }
    Ok(gram_summary(&products))
}

fn suite_overlaps(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let suite = Suite::Overlaps.name();
    let tol = cfg.tolerances.overlaps;
    let params = cfg.params;
    let n_config = cfg.n_max.min(4);
    let n_spectral = cfg.n_max.min(3);
    // the literal double integrals are minutes-per-matrix beyond n = 2
    let n_direct = cfg.n_max.min(2);
    run_blocks(vec![
        Box::new(move || {
            let grid = SphereGrid { n_chi: 64, n_theta: 36, n_phi: 72 };
            let kappa = params.kappa();
            let base = FrameLabel { pi0: [0.3, -0.1, 0.2], kind: FrameKind::Circ };
            let mut rows = Vec::new();
            let quad = |a: &FrameLabel, b: &FrameLabel| -> Result<C64> {
                inner_product_c_with(
                    &pi_frame_state_c(a, &params),
                    &pi_frame_state_c(b, &params),
                    &grid,
                )
            };
            for (k, sep) in [1.3, 2.9].into_iter().enumerate() {
                for kind in [FrameKind::Circ, FrameKind::Bullet] {
                    let a = FrameLabel { pi0: base.pi0, kind };
                    let b = FrameLabel {
                        pi0: [base.pi0[0] + sep / kappa, base.pi0[1], base.pi0[2]],
                        kind,
                    };
                    let tag = match kind {
                        FrameKind::Circ => "circ",
                        FrameKind::Bullet => "bullet",
                    };
                    rows.push(CheckRow::new(
                        suite,
                        format!("frame-{tag}-sep{k}"),
                        quad(&a, &b)?,
                        pi_frame_overlap(&a, &b, &params)?,
                        tol,
                    ));
                }
            }
            let bullet = FrameLabel { pi0: [0.5, 0.1, -0.3], kind: FrameKind::Bullet };
            rows.push(CheckRow::new(
                suite,
                "frame-cross-kind",
                quad(&base, &bullet)?,
                C64::new(0.0, 0.0),
                tol,
            ));
            for (tag, label) in [("circ", base), ("bullet", bullet)] {
                rows.push(CheckRow::new(
                    suite,
                    format!("frame-{tag}-self-norm"),
                    quad(&label, &label)?,
                    C64::new(1.0, 0.0),
                    tol,
                ));
            }
            Ok(rows)
        }),
        Box::new(move || {
            let summary = config_gram_quadrature(n_config, &params, &SphereGrid::default())?;
            Ok(vec![
                CheckRow::real(suite, format!("gram-c-diag-n{n_config}"), summary.max_diag_dev, 0.0, tol),
                CheckRow::real(suite, format!("gram-c-offdiag-n{n_config}"), summary.max_offdiag, 0.0, tol),
            ])
        }),
        Box::new(move || {
            let summary = momentum_gram(n_spectral, &params, GramPath::Spectral)?;
            Ok(vec![
                CheckRow::real(suite, format!("gram-m-spectral-diag-n{n_spectral}"), summary.max_diag_dev, 0.0, 1e-10),
                CheckRow::real(suite, format!("gram-m-spectral-offdiag-n{n_spectral}"), summary.max_offdiag, 0.0, 1e-10),
            ])
        }),
        Box::new(move || {
            let summary = momentum_gram(n_direct, &params, GramPath::Direct { quad_tol: 1e-6 })?;
            Ok(vec![
                CheckRow::real(suite, format!("gram-m-direct-diag-n{n_direct}"), summary.max_diag_dev, 0.0, 1e-4),
                CheckRow::real(suite, format!("gram-m-direct-offdiag-n{n_direct}"), summary.max_offdiag, 0.0, 1e-4),
            ])
        }),
    ])
}

// -------------------------------------------------------------- roundtrip

fn random_superposition(
    n_max: u32,
    params: &PhysicalParams,
    rng: &mut ChaCha8Rng,
) -> BasisExpansion {
    let coeffs = QuantumNumbers::modes_up_to(n_max)
        .into_iter()
        .map(|qn| BasisCoeff {
            n: qn.n,
            l: qn.l,
            m: qn.m,
            re: rng.gen_range(-1.0..1.0),
            im: rng.gen_range(-1.0..1.0),
        })
        .collect();
    BasisExpansion { params: *params, coeffs }
}

fn relative_l2_c(diff: &crate::config_space::ChartedWaveFunction, reference_norm2: f64) -> Result<f64> {
    Ok((inner_product_c(diff, diff)?.re.max(0.0) / reference_norm2).sqrt())
}

fn suite_roundtrip(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let suite = Suite::FtRoundtrip.name();
    let tol = cfg.tolerances.roundtrip;
    let params = cfg.params;
    let n_cap = cfg.n_max.min(4);
    let seed = suite_seed(cfg, 4);
    run_blocks(vec![
        Box::new(move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rows = Vec::new();
            for k in 0..20 {
                let f = random_superposition(n_cap, &params, &mut rng).to_wavefunction()?;
                let g = random_superposition(n_cap, &params, &mut rng).to_wavefunction()?;
                rows.push(CheckRow::new(
                    suite,
                    format!("unitarity-{k:02}"),
                    inner_product_m_spectral(&forward_ft(&f)?, &forward_ft(&g)?)?,
                    inner_product_c(&f, &g)?,
                    tol,
                ));
            }
            Ok(rows)
        }),
        Box::new(move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
            let f = random_superposition(n_cap, &params, &mut rng).to_wavefunction()?;
            let back = inverse_ft(&forward_ft(&f)?)?;
            let diff = back.add(&f.scale(C64::new(-1.0, 0.0)))?;
            let config_err = relative_l2_c(&diff, inner_product_c(&f, &f)?.re)?;
            // the reverse order, on band-limited momentum data
            let data = forward_ft(&random_superposition(n_cap, &params, &mut rng).to_wavefunction()?)?;
            let there = forward_ft(&inverse_ft(&data)?)?;
            let mdiff = there.add(&data.scale(C64::new(-1.0, 0.0)))?;
            let m_err = (inner_product_m_spectral(&mdiff, &mdiff)?.re.max(0.0)
                / inner_product_m_spectral(&data, &data)?.re)
                .sqrt();
            Ok(vec![
                CheckRow::real(suite, "roundtrip-config", config_err, 0.0, tol),
                CheckRow::real(suite, "roundtrip-momentum", m_err, 0.0, tol),
            ])
        }),
        Box::new(move || {
            let mut rows = Vec::new();
            for (n, l, m) in [(0, 0, 0), (1, 1, 0), (2, 1, 1), (2, 2, -2)] {
                let qn = QuantumNumbers::new(n, l, m)?;
                let mapped = forward_ft(&stationary_state(qn, &params)?)?;
                // the transform carries each stationary mode onto its
                // momentum twin up to the fixed phase (-i)^n
                let phase = C64::new(0.0, -1.0).powu(n);
                let twin = stationary_state_m(qn, &params)?.scale(phase);
                let diff = mapped.add(&twin.scale(C64::new(-1.0, 0.0)))?;
                rows.push(CheckRow::real(
                    suite,
                    format!("stationary-map-n{n}-l{l}-m{m}"),
                    inner_product_m_spectral(&diff, &diff)?.re.max(0.0).sqrt(),
                    0.0,
                    1e-10,
                ));
            }
            Ok(rows)
        }),
    ])
}

// --------------------------------------------------------------- spectrum

fn helmholtz_ratio(at: impl Fn([f64; 3], f64) -> C64, kappa: f64, base: [f64; 3], base4: f64) -> f64 {
    let residual = |h: f64| -> f64 {
        let mut lap = -8.0 * at(base, base4);
        for i in 0..3 {
            let mut up = base;
            up[i] += h;
            let mut dn = base;
            dn[i] -= h;
            lap += at(up, base4) + at(dn, base4);
        }
        lap += at(base, base4 + h) + at(base, base4 - h);
        (lap / (h * h) + at(base, base4) * (kappa * kappa)).norm()
    };
    residual(0.05) / residual(0.025)
}

fn suite_spectrum(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let suite = Suite::Spectrum.name();
    let tol = cfg.tolerances.spectrum;
    let params = cfg.params;
    let n_max = cfg.n_max;
    run_blocks(vec![
        Box::new(move || {
            let mut rows = Vec::new();
            for n in 0..=n_max {
                let qn = QuantumNumbers::new(n, 0, 0)?;
                rows.push(CheckRow::new(
                    suite,
                    format!("energy-n{n}"),
                    op_matrix_element(ConfigOp::H, qn, qn, &params)?,
                    C64::new(energy_level(n, &params), 0.0),
                    tol,
                ));
            }
            let modes = QuantumNumbers::modes_up_to(n_max.min(2));
            let mut worst: f64 = 0.0;
            for (i, &a) in modes.iter().enumerate() {
                for &b in modes.iter().skip(i + 1) {
                    worst = worst.max(op_matrix_element(ConfigOp::H, a, b, &params)?.norm());
                }
            }
            rows.push(CheckRow::real(suite, "h-offdiag-max", worst, 0.0, tol));
            Ok(rows)
        }),
        Box::new(move || {
            let kappa = params.kappa();
            let qn = QuantumNumbers::new(2, 1, 0)?;
            let closed = |pi: [f64; 3], pi4: f64| {
                stationary_wf_m(qn, &MomentumPoint::new(pi, pi4), 1.0, 0.0, &params)
                    .expect("closed-form profile")
            };
            let ratio_closed = helmholtz_ratio(closed, kappa, [0.62, -0.35, 0.41], 0.57);
            let data = stationary_state_m(QuantumNumbers::new(1, 1, -1)?, &params)?
                .add(&stationary_state_m(QuantumNumbers::new(2, 0, 0)?, &params)?.scale(C64::new(0.4, 0.3)))?;
            let synthesized =
                |pi: [f64; 3], pi4: f64| data.solve_ivp(&MomentumPoint::new(pi, pi4));
            let ratio_synth = helmholtz_ratio(synthesized, kappa, [0.3, -0.2, 0.5], 0.4);
            // second differences of a solution shrink as h^2, so halving
            // the step divides the defect by 4
            Ok(vec![
                CheckRow::real(suite, "helmholtz-ratio-closed-form", ratio_closed, 4.0, 0.8),
                CheckRow::real(suite, "helmholtz-ratio-synthesis", ratio_synth, 4.0, 0.8),
            ])
        }),
    ])
}

// ----------------------------------------------------------------- evolve

fn suite_evolve(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let suite = Suite::Evolve.name();
    let tol = cfg.tolerances.evolve;
    let params = cfg.params;
    let n_cap = cfg.n_max.min(3);
    let seed = suite_seed(cfg, 6);
    run_blocks(vec![
        Box::new(move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_superposition(n_cap, &params, &mut rng);
            let moved = evolve_spectral(&s, 1.7);
            let mut rows = vec![CheckRow::real(
                suite,
                "norm-preserved",
                moved.norm_sqr(),
                s.norm_sqr(),
                1e-12,
            )];
            let single = BasisExpansion {
                params,
                coeffs: vec![
                    BasisCoeff { n: 1, l: 0, m: 0, re: 0.6, im: 0.0 },
                    BasisCoeff { n: 1, l: 1, m: 1, re: 0.0, im: 0.8 },
                ],
            };
            let period = std::f64::consts::TAU * params.hbar / energy_level(1, &params);
            let around = evolve_spectral(&single, period);
            let mut drift: f64 = 0.0;
            for (a, b) in around.coeffs.iter().zip(&single.coeffs) {
                drift = drift.max((C64::new(a.re, a.im) - C64::new(b.re, b.im)).norm());
            }
            rows.push(CheckRow::real(suite, "period-n1", drift, 0.0, 1e-12));
            let level = BasisExpansion {
                params,
                coeffs: vec![
                    BasisCoeff { n: 2, l: 1, m: -1, re: 0.5, im: 0.1 },
                    BasisCoeff { n: 2, l: 1, m: 1, re: -0.3, im: 0.7 },
                ],
            };
            let j3 = |s: &BasisExpansion| -> Result<C64> {
                let f = s.to_wavefunction()?;
                inner_product_c(&f, &apply_config_op(ConfigOp::J(2), &f)?)
            };
            let drift = (j3(&evolve_spectral(&level, 1.3))? - j3(&level)?).norm();
            rows.push(CheckRow::real(suite, "j3-constant", drift, 0.0, 1e-10));
            Ok(rows)
        }),
        Box::new(move || {
            let two_mode = BasisExpansion {
                params,
                coeffs: vec![
                    BasisCoeff { n: 0, l: 0, m: 0, re: 0.8, im: 0.0 },
                    BasisCoeff { n: 2, l: 1, m: 1, re: 0.0, im: 0.6 },
                ],
            };
            let mut rows = Vec::new();
            for t in [0.0, 1.0] {
                rows.push(CheckRow::real(
                    suite,
                    format!("cross-picture-two-mode-t{t}"),
                    evolve_consistency_check(&two_mode, t)?,
                    0.0,
                    tol,
                ));
            }
            let eigen = BasisExpansion {
                params,
                coeffs: vec![BasisCoeff { n: 3, l: 2, m: 0, re: 1.0, im: 0.0 }],
            };
            rows.push(CheckRow::real(
                suite,
                "cross-picture-eigenmode-t2.4",
                evolve_consistency_check(&eigen, 2.4)?,
                0.0,
                tol,
            ));
            Ok(rows)
        }),
    ])
}

// ------------------------------------------------------------------ group

fn random_group_element(rng: &mut ChaCha8Rng, radius: f64) -> GroupElement {
    let r = radius * rng.gen_range(0.05..0.95);
    let (z, phi) = (rng.gen_range(-1.0..1.0_f64), rng.gen_range(0.0..std::f64::consts::TAU));
    let s = (1.0 - z * z).sqrt();
    GroupElement::new(
        [r * s * phi.cos(), r * s * phi.sin(), r * z],
        if rng.gen_range(0..2) == 0 { 1 } else { -1 },
        [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
        rng.gen_range(-2.0..2.0),
        C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)),
        radius,
    )
    .expect("sampled inside the ball")
}

fn element_distance(a: &GroupElement, b: &GroupElement, radius: f64) -> f64 {
    let mut d = (a.eps4(radius) - b.eps4(radius)).abs();
    for i in 0..3 {
        d = d.max((a.eps[i] - b.eps[i]).abs()).max((a.pi[i] - b.pi[i]).abs());
    }
    d.max((a.pi4 - b.pi4).abs()).max((a.zeta - b.zeta).norm())
}

/// The position-sector rows of the composition written out literally, the
/// cross-encoding used against the quaternion product inside
/// [`group_compose`].
fn eps_rows_componentwise(g1: &GroupElement, g2: &GroupElement, radius: f64) -> ([f64; 3], f64) {
    let (e4p, e4) = (g1.eps4(radius), g2.eps4(radius));
    let (a, b) = (g1.eps, g2.eps);
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    (
        [
            (e4 * a[0] + e4p * b[0] + cross[0]) / radius,
            (e4 * a[1] + e4p * b[1] + cross[1]) / radius,
            (e4 * a[2] + e4p * b[2] + cross[2]) / radius,
        ],
        (e4p * e4 - (a[0] * b[0] + a[1] * b[1] + a[2] * b[2])) / radius,
    )
}

fn suite_group(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let suite = Suite::GroupCheck.name();
    let tol = cfg.tolerances.group;
    let params = cfg.params;
    let radius = params.radius;
    let seed = suite_seed(cfg, 7);
    run_blocks(vec![
        Box::new(move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = GroupElement::identity();
            let (mut id_dev, mut inv_dev, mut assoc_dev, mut eps_dev, mut zeta_dev) =
                (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
            let mut kept = 0;
            while kept < 1000 {
                let g1 = random_group_element(&mut rng, radius);
                let g2 = random_group_element(&mut rng, radius);
                let g3 = random_group_element(&mut rng, radius);
                let left = group_compose(&group_compose(&g1, &g2, &params), &g3, &params);
                // stay away from the equator, where the chart flag is
                // discontinuous and componentwise comparison meaningless
                let pair = group_compose(&g1, &g2, &params);
                if left.eps4(radius).abs() < 1e-6 || pair.eps4(radius).abs() < 1e-6 {
                    continue;
                }
                kept += 1;
                id_dev = id_dev
                    .max(element_distance(&group_compose(&g1, &e, &params), &g1, radius))
                    .max(element_distance(&group_compose(&e, &g1, &params), &g1, radius));
                let inv = group_inverse(&g1, &params);
                inv_dev = inv_dev
                    .max(element_distance(&group_compose(&inv, &g1, &params), &e, radius))
                    .max(element_distance(&group_compose(&g1, &inv, &params), &e, radius));
                let right = group_compose(&g1, &group_compose(&g2, &g3, &params), &params);
                assoc_dev = assoc_dev.max(element_distance(&left, &right, radius));
                let (eps_lit, eps4_lit) = eps_rows_componentwise(&g1, &g2, radius);
                let mut dev = (pair.eps4(radius) - eps4_lit).abs();
                for i in 0..3 {
                    dev = dev.max((pair.eps[i] - eps_lit[i]).abs());
                }
                eps_dev = eps_dev.max(dev);
                zeta_dev = zeta_dev.max((pair.zeta.norm() - 1.0).abs());
            }
            Ok(vec![
                CheckRow::real(suite, "identity-max", id_dev, 0.0, tol),
                CheckRow::real(suite, "inverse-max", inv_dev, 0.0, tol),
                CheckRow::real(suite, "assoc-max", assoc_dev, 0.0, tol),
                CheckRow::real(suite, "eps-row-cross-check", eps_dev, 0.0, tol),
                CheckRow::real(suite, "cocycle-unit-modulus", zeta_dev, 0.0, tol),
            ])
        }),
        Box::new(move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
            let mut sphere_dev: f64 = 0.0;
            let mut noether_dev: f64 = 0.0;
            let mut freq_dev: f64 = 0.0;
            let mut return_dev: f64 = 0.0;
            for _ in 0..5 {
                let eps0 = [
                    rng.gen_range(-0.5..0.5) * radius,
                    rng.gen_range(-0.5..0.5) * radius,
                    rng.gen_range(-0.5..0.5) * radius,
                ];
                let epsdot0 =
                    [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
                let omega = geodesic_frequency(eps0, epsdot0, &params)?;
                let start = geodesic_flow(eps0, epsdot0, 0.0, &params)?;
                let speed = ((0..3).map(|i| epsdot0[i] * epsdot0[i]).sum::<f64>()
                    + start.eps4dot * start.eps4dot)
                    .sqrt();
                freq_dev = freq_dev.max((omega - speed / radius).abs());
                let period = std::f64::consts::TAU / omega;
                for p in geodesic_trajectory(eps0, epsdot0, 2.0 * period, 160, &params)? {
                    let norm2 = p.eps.iter().map(|v| v * v).sum::<f64>() + p.eps4 * p.eps4;
                    sphere_dev = sphere_dev.max((norm2 - radius * radius).abs() / (radius * radius));
                    for i in 0..3 {
                        noether_dev = noether_dev.max((p.theta[i] - start.theta[i]).abs());
                    }
                }
                let back = geodesic_flow(eps0, epsdot0, period, &params)?;
                for i in 0..3 {
                    return_dev = return_dev.max((back.eps[i] - eps0[i]).abs());
                }
            }
            Ok(vec![
                CheckRow::real(suite, "sphere-constraint-max", sphere_dev, 0.0, tol),
                CheckRow::real(suite, "noether-drift-max", noether_dev, 0.0, tol),
                CheckRow::real(suite, "frequency-cross-check", freq_dev, 0.0, tol),
                CheckRow::real(suite, "geodesic-period-return", return_dev, 0.0, 1e-9),
            ])
        }),
    ])
}
