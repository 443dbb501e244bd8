//! Momentum representation: bounded solutions of the four-dimensional
//! Helmholtz equation `(Lap + kappa^2) phi(pi, pi_4) = 0`.
//!
//! A solution is determined by Cauchy data on the `pi_4 = 0` slice, and it
//! stays bounded in `pi_4` exactly when the ordinary Fourier transform of
//! that data lives in the ball of radius R (band-limited, "oscillatory"
//! data).  All states here are stored in that Fourier form: a pair of
//! functions `(fhat0, fhat1)` of `eps` on the ball, synthesized through
//!
//! ```text
//! phi(pi, pi_4) = int_{B_R} deps/(2 pi hbar)^{3/2} e^{-(i/hbar) eps.pi}
//!     [ cos(|eps_4| pi_4 / hbar) fhat0(eps)
//!       + hbar sin(|eps_4| pi_4 / hbar)/|eps_4| fhat1(eps) ] .
//! ```
//!
//! The non-local Bessel-kernel pairing of two solutions diagonalizes in this
//! form as `int_{B_R} deps [ |eps_4| conj(a0) b0 + (hbar^2/|eps_4|) conj(a1) b1 ]`,
//! which is what [`inner_product_m_spectral`] evaluates (exactly, for
//! polynomial data).  [`inner_product_m_direct`] instead computes the
//! literal double integral against the non-local Bessel kernels, reduced
//! per angular channel to radial quadratures; it exists purely as a
//! cross-check of the diagonal form.

use std::f64::consts::PI;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::ball::{gegenbauer_parity_split, solid_harmonic, PolyCSum};
use crate::config_space::{ConfigOp, PhysicalParams};
use crate::quadrature::{bessel_product_integral, gauss_legendre, ProductWeight};
use crate::specfun::{bessel_j, bessel_y, binomial, gamma, gegenbauer, gegenbauer_zero_arg, ln_gamma, sph_harm};
use crate::{C64, Error, QuantumNumbers, Result};

/// A point of momentum space `(pi, pi_4)` in R^4.
#[derive(Clone, Copy, Debug)]
pub struct MomentumPoint {
    pi: [f64; 3],
    pi4: f64,
}

impl MomentumPoint {
    pub fn new(pi: [f64; 3], pi4: f64) -> Self {
        Self { pi, pi4 }
    }

    /// Four-dimensional polar angles: `pi_r` the 4D radius, `pi_chi` the
    /// angle from the `pi_4` axis, then spherical `(pi_theta, pi_phi)` of
    /// the 3-vector part.
    pub fn from_hyperspherical(pi_r: f64, pi_chi: f64, pi_theta: f64, pi_phi: f64) -> Result<Self> {
        if pi_r < 0.0 {
            return Err(Error::Domain(format!("pi_r = {pi_r} must be nonnegative")));
        }
        if !(0.0..=PI).contains(&pi_chi) || !(0.0..=PI).contains(&pi_theta) {
            return Err(Error::Domain(format!(
                "angles pi_chi = {pi_chi}, pi_theta = {pi_theta} outside [0, pi]"
            )));
        }
        let rho = pi_r * pi_chi.sin();
        Ok(Self {
            pi: [
                rho * pi_theta.sin() * pi_phi.cos(),
                rho * pi_theta.sin() * pi_phi.sin(),
                rho * pi_theta.cos(),
            ],
            pi4: pi_r * pi_chi.cos(),
        })
    }

    pub fn pi(&self) -> [f64; 3] {
        self.pi
    }

    pub fn pi4(&self) -> f64 {
        self.pi4
    }

    /// Length of the 3-vector part.
    pub fn pi_rho(&self) -> f64 {
        (self.pi[0] * self.pi[0] + self.pi[1] * self.pi[1] + self.pi[2] * self.pi[2]).sqrt()
    }

    /// 4D radius.
    pub fn pi_r(&self) -> f64 {
        (self.pi_rho().powi(2) + self.pi4 * self.pi4).sqrt()
    }

    pub fn hyperspherical(&self) -> (f64, f64, f64, f64) {
        let r = self.pi_r();
        let chi = if r == 0.0 { 0.0 } else { (self.pi4 / r).clamp(-1.0, 1.0).acos() };
        let rho = self.pi_rho();
        let theta = if rho == 0.0 {
            0.0
        } else {
            (self.pi[2] / rho).clamp(-1.0, 1.0).acos()
        };
        let phi = self.pi[1].atan2(self.pi[0]);
        (r, chi, theta, phi)
    }
}

/// One component of band-limited Cauchy data, as a function of the
/// dimensionless ball variable `x = eps/R`.
#[derive(Clone)]
enum FourierDatum {
    /// Exact polynomial-with-boundary-powers representation.
    PolyC(PolyCSum),
    /// Black-box sampler, assumed supported in the closed unit ball.
    Sampler(Rc<dyn Fn([f64; 3]) -> C64>),
    /// `weight` times a unit-mass Gaussian of width `width` (both in `eps`
    /// units) centered at `center`, truncated at five widths.
    Delta { center: [f64; 3], weight: C64, width: f64 },
}

impl FourierDatum {
    fn zero() -> Self {
        FourierDatum::PolyC(PolyCSum::zero())
    }

    fn eval(&self, x: [f64; 3], radius: f64) -> C64 {
        match self {
            FourierDatum::PolyC(p) => p.eval(x),
            FourierDatum::Sampler(f) => f(x),
            FourierDatum::Delta { center, weight, width } => {
                let d2: f64 = (0..3).map(|i| (radius * x[i] - center[i]).powi(2)).sum();
                if d2 > 25.0 * width * width {
                    return C64::new(0.0, 0.0);
                }
                *weight * (2.0 * PI * width * width).powf(-1.5) * (-d2 / (2.0 * width * width)).exp()
            }
        }
    }

    /// Support box in `x` units, when the datum is localized.
    fn support(&self, radius: f64) -> Option<([f64; 3], f64)> {
        match self {
            FourierDatum::Delta { center, width, .. } => Some((
                [center[0] / radius, center[1] / radius, center[2] / radius],
                5.0 * width / radius,
            )),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, FourierDatum::PolyC(p) if p.is_zero())
    }
}

/// Band-limited Cauchy data `(fhat0, fhat1)` of a bounded Helmholtz
/// solution, in the Fourier form described in the module docs.
///
/// When the state is known as a combination of the stationary family, the
/// expansion is carried along so that the literal double-integral pairing
/// can be evaluated channel by channel.
#[derive(Clone)]
pub struct CauchyData {
    pub params: PhysicalParams,
    fhat0: FourierDatum,
    fhat1: FourierDatum,
    modes: Option<Vec<(QuantumNumbers, C64)>>,
}

impl CauchyData {
    /// Exact polynomial data.  The first slot may carry at most one inverse
    /// power of the boundary factor `sqrt(1 - |x|^2)` and the second none,
    /// which keeps every pairing integral convergent.
    pub fn from_polys(params: PhysicalParams, fhat0: PolyCSum, fhat1: PolyCSum) -> Result<Self> {
        let min_power = |p: &PolyCSum| p.parts().map(|(q, _)| q).min().unwrap_or(0);
        if min_power(&fhat0) < -1 {
            return Err(Error::Domain(
                "first Cauchy slot may diverge at the band edge no faster than one inverse power".into(),
            ));
        }
        if min_power(&fhat1) < 0 {
            return Err(Error::Domain("second Cauchy slot must stay bounded at the band edge".into()));
        }
        Ok(Self {
            params,
            fhat0: FourierDatum::PolyC(fhat0),
            fhat1: FourierDatum::PolyC(fhat1),
            modes: None,
        })
    }

    /// Wrap raw samplers of `eps` (physical units) after verifying that
    /// their mass is band-limited; rejects data with support outside the
    /// ball or with the second component touching the rim.
    pub fn from_samplers(
        params: PhysicalParams,
        fhat0: Rc<dyn Fn([f64; 3]) -> C64>,
        fhat1: Rc<dyn Fn([f64; 3]) -> C64>,
        grid_n: usize,
    ) -> Result<Self> {
        let class = classify_data(fhat0.as_ref(), fhat1.as_ref(), &params, grid_n);
        if !class.oscillatory {
            return Err(Error::Domain(format!(
                "data is not band-limited: outside mass {:?}, rim mass of second component {}",
                class.outside, class.rim[1]
            )));
        }
        let r = params.radius;
        let f0 = move |x: [f64; 3]| fhat0([r * x[0], r * x[1], r * x[2]]);
        let f1 = move |x: [f64; 3]| fhat1([r * x[0], r * x[1], r * x[2]]);
        Ok(Self {
            params,
            fhat0: FourierDatum::Sampler(Rc::new(f0)),
            fhat1: FourierDatum::Sampler(Rc::new(f1)),
            modes: None,
        })
    }

    /// In-crate constructor for samplers (of `x = eps/R`) that are
    /// band-limited by construction, bypassing the classification gate.
    pub(crate) fn from_raw_samplers(
        params: PhysicalParams,
        fhat0: Rc<dyn Fn([f64; 3]) -> C64>,
        fhat1: Rc<dyn Fn([f64; 3]) -> C64>,
    ) -> Self {
        Self {
            params,
            fhat0: FourierDatum::Sampler(fhat0),
            fhat1: FourierDatum::Sampler(fhat1),
            modes: None,
        }
    }

    /// Scale the two slots independently (kills any mode tags).
    pub(crate) fn scale_slots(&self, s0: C64, s1: C64) -> Self {
        let scale_datum = |d: &FourierDatum, s: C64| match d {
            FourierDatum::PolyC(p) => FourierDatum::PolyC(p.scale(s)),
            FourierDatum::Sampler(f) => {
                let f = f.clone();
                FourierDatum::Sampler(Rc::new(move |x| s * f(x)))
            }
            FourierDatum::Delta { center, weight, width } => {
                FourierDatum::Delta { center: *center, weight: s * *weight, width: *width }
            }
        };
        Self {
            params: self.params,
            fhat0: scale_datum(&self.fhat0, s0),
            fhat1: scale_datum(&self.fhat1, s1),
            modes: None,
        }
    }

    pub fn polys(&self) -> Option<(&PolyCSum, &PolyCSum)> {
        match (&self.fhat0, &self.fhat1) {
            (FourierDatum::PolyC(a), FourierDatum::PolyC(b)) => Some((a, b)),
            _ => None,
        }
    }

    /// Stationary-basis expansion, when this state was built from one.
    pub fn modes(&self) -> Option<&[(QuantumNumbers, C64)]> {
        self.modes.as_deref()
    }

    pub fn eval_fhat0(&self, x: [f64; 3]) -> C64 {
        self.fhat0.eval(x, self.params.radius)
    }

    pub fn eval_fhat1(&self, x: [f64; 3]) -> C64 {
        self.fhat1.eval(x, self.params.radius)
    }

    pub fn scale(&self, s: C64) -> Self {
        let scale_datum = |d: &FourierDatum| match d {
            FourierDatum::PolyC(p) => FourierDatum::PolyC(p.scale(s)),
            FourierDatum::Sampler(f) => {
                let f = f.clone();
                FourierDatum::Sampler(Rc::new(move |x| s * f(x)))
            }
            FourierDatum::Delta { center, weight, width } => {
                FourierDatum::Delta { center: *center, weight: s * *weight, width: *width }
            }
        };
        Self {
            params: self.params,
            fhat0: scale_datum(&self.fhat0),
            fhat1: scale_datum(&self.fhat1),
            modes: self
                .modes
                .as_ref()
                .map(|m| m.iter().map(|(q, c)| (*q, s * c)).collect()),
        }
    }

    /// Superposition; both operands must hold exact polynomial data.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.params != other.params {
            return Err(Error::Domain("cannot add data with different parameters".into()));
        }
        match (self.polys(), other.polys()) {
            (Some((a0, a1)), Some((b0, b1))) => Ok(Self {
                params: self.params,
                fhat0: FourierDatum::PolyC(a0.add(b0)),
                fhat1: FourierDatum::PolyC(a1.add(b1)),
                modes: match (&self.modes, &other.modes) {
                    (Some(a), Some(b)) => {
                        let mut m = a.clone();
                        for (q, c) in b {
                            if let Some(slot) = m.iter_mut().find(|(p, _)| p == q) {
                                slot.1 += *c;
                            } else {
                                m.push((*q, *c));
                            }
                        }
                        Some(m)
                    }
                    _ => None,
                },
            }),
            _ => Err(Error::Domain("superposition needs exact polynomial data on both sides".into())),
        }
    }

    /// Projection onto the cosine sector (`fhat1 = 0`).
    pub fn project_even(&self) -> Self {
        Self {
            params: self.params,
            fhat0: self.fhat0.clone(),
            fhat1: FourierDatum::zero(),
            modes: self.modes.as_ref().map(|m| {
                m.iter().filter(|(q, _)| (q.n - q.l) % 2 == 0).cloned().collect()
            }),
        }
    }

    /// Projection onto the sine sector (`fhat0 = 0`).
    pub fn project_odd(&self) -> Self {
        Self {
            params: self.params,
            fhat0: FourierDatum::zero(),
            fhat1: self.fhat1.clone(),
            modes: self.modes.as_ref().map(|m| {
                m.iter().filter(|(q, _)| (q.n - q.l) % 2 == 1).cloned().collect()
            }),
        }
    }

    /// Evaluate the solution at a point, with a caller-chosen ball grid for
    /// the synthesis integral.
    pub fn solve_ivp_with(&self, p: &MomentumPoint, grid: &crate::config_space::SphereGrid) -> C64 {
        self.synthesize(p, grid, false)
    }

    /// Evaluate the solution at a point (default quadrature grid; exact for
    /// localized delta data).
    pub fn solve_ivp(&self, p: &MomentumPoint) -> C64 {
        self.synthesize(p, &crate::config_space::SphereGrid::default(), false)
    }

    /// The `pi_4`-derivative of the solution at a point.
    pub fn solve_ivp_dpi4(&self, p: &MomentumPoint) -> C64 {
        self.synthesize(p, &crate::config_space::SphereGrid::default(), true)
    }

    fn synthesize(&self, p: &MomentumPoint, grid: &crate::config_space::SphereGrid, dpi4: bool) -> C64 {
        let r = self.params.radius;
        let hb = self.params.hbar;
        let norm = (2.0 * PI * hb).powf(-1.5);
        // per-component pi_4 factors and their derivatives
        let kern0 = |abs_e4: f64| {
            if dpi4 {
                -(abs_e4 / hb) * (abs_e4 * p.pi4 / hb).sin()
            } else {
                (abs_e4 * p.pi4 / hb).cos()
            }
        };
        let kern1 = |abs_e4: f64| {
            if dpi4 {
                (abs_e4 * p.pi4 / hb).cos()
            } else if abs_e4 == 0.0 {
                p.pi4 // sin(z) hbar / (z hbar / pi4) limit keeps rim data finite
            } else {
                (abs_e4 * p.pi4 / hb).sin() * hb / abs_e4
            }
        };
        let phase = |eps: [f64; 3]| {
            let arg = -(eps[0] * p.pi[0] + eps[1] * p.pi[1] + eps[2] * p.pi[2]) / hb;
            C64::new(arg.cos(), arg.sin())
        };
        let mut out = C64::new(0.0, 0.0);
        for (datum, first) in [(&self.fhat0, true), (&self.fhat1, false)] {
            if datum.is_zero() {
                continue;
            }
            if let FourierDatum::Delta { center, weight, .. } = datum {
                // sifting limit: the integral collapses onto the center
                let abs_e4 = (r * r - center.iter().map(|v| v * v).sum::<f64>()).max(0.0).sqrt();
                let k = if first { kern0(abs_e4) } else { kern1(abs_e4) };
                out += *weight * phase(*center) * (k * norm);
                continue;
            }
            // int_{B_R} deps g = R^3 sum w c g(x) on the 1/c-weighted grid
            let mut acc = C64::new(0.0, 0.0);
            for (x, w) in grid.nodes() {
                let c = (1.0 - x.iter().map(|v| v * v).sum::<f64>()).max(0.0).sqrt();
                let abs_e4 = r * c;
                let k = if first { kern0(abs_e4) } else { kern1(abs_e4) };
                let v = datum.eval(x, r);
                if v != C64::new(0.0, 0.0) {
                    acc += v * phase([r * x[0], r * x[1], r * x[2]]) * (w * c * k);
                }
            }
            out += acc * (norm * r * r * r);
        }
        out
    }
}

/// Mass distribution of raw Fourier data relative to the ball of radius R.
#[derive(Clone, Copy, Debug)]
pub struct DataClassification {
    /// `|f|^2` mass strictly inside the ball, per component.
    pub inside: [f64; 2],
    /// mass within one grid cell of the rim, per component.
    pub rim: [f64; 2],
    /// mass outside, per component.
    pub outside: [f64; 2],
    /// no outside mass, and the second component stays off the rim.
    pub oscillatory: bool,
}

/// Scan both data components on a uniform grid over `[-1.5 R, 1.5 R]^3` and
/// report where their mass sits.  Data with any mass outside the ball belong
/// to exponentially growing solutions; second-component mass on the rim
/// belongs to the linearly growing ones.  Neither admits the bounded
/// synthesis used here.
pub fn classify_data(
    fhat0: &dyn Fn([f64; 3]) -> C64,
    fhat1: &dyn Fn([f64; 3]) -> C64,
    params: &PhysicalParams,
    grid_n: usize,
) -> DataClassification {
    let r = params.radius;
    let half = 1.5 * r;
    let n = grid_n.max(8);
    let step = 2.0 * half / n as f64;
    let band = 1.5 * step;
    let vol = step * step * step;
    let mut inside = [0.0; 2];
    let mut rim = [0.0; 2];
    let mut outside = [0.0; 2];
    for i in 0..n {
        let x = -half + (i as f64 + 0.5) * step;
        for j in 0..n {
            let y = -half + (j as f64 + 0.5) * step;
            for k in 0..n {
                let z = -half + (k as f64 + 0.5) * step;
                let rho = (x * x + y * y + z * z).sqrt();
                for (c, f) in [(0, &fhat0), (1, &fhat1)] {
                    let m = f([x, y, z]).norm_sqr() * vol;
                    if m == 0.0 {
                        continue;
                    }
                    if (rho - r).abs() <= band {
                        rim[c] += m;
                    } else if rho < r {
                        inside[c] += m;
                    } else {
                        outside[c] += m;
                    }
                }
            }
        }
    }
    let total0 = inside[0] + rim[0] + outside[0];
    let total1 = inside[1] + rim[1] + outside[1];
    let tol0 = 1e-12 * total0.max(1e-300);
    let tol1 = 1e-12 * total1.max(1e-300);
    DataClassification {
        inside,
        rim,
        outside,
        oscillatory: outside[0] <= tol0 && outside[1] <= tol1 && rim[1] <= tol1,
    }
}

/// Normalization constant under which the stationary family is orthonormal
/// for the momentum pairing: `2^l l! sqrt(2 (n+1) (n-l)! / (hbar (n+l+1)!))`.
pub fn orthonormal_const_m(n: u32, l: u32, hbar: f64) -> Result<f64> {
    if l > n {
        return Err(Error::Domain(format!("l = {l} exceeds n = {n}")));
    }
    if hbar <= 0.0 {
        return Err(Error::Domain(format!("hbar = {hbar} must be positive")));
    }
    let (nf, lf) = (n as f64, l as f64);
    let ln = lf * std::f64::consts::LN_2
        + ln_gamma(lf + 1.0)
        + 0.5
            * ((2.0 * (nf + 1.0)).ln() + ln_gamma(nf - lf + 1.0)
                - hbar.ln()
                - ln_gamma(nf + lf + 2.0));
    Ok(ln.exp())
}

/// The closed-form normalization constant of the stationary family,
/// evaluated by analytic continuation in the degree.
///
/// The closed form is a ratio of trigonometric poles; at integer degree it
/// is evaluated at `n + delta` for two small offsets and extrapolated to
/// `delta = 0`.  Branch signs are fixed so that the lowest degree of each
/// sector (`n = l` even, `n = l + 1` odd) comes out positive.  The limit
/// satisfies `|norm_const_m| = orthonormal_const_m / sqrt((n-l)!)`: the two
/// agree for `n - l <= 1` and differ beyond that, so this value is kept as
/// a reference table, not used to normalize states.
pub fn norm_const_m(n: u32, l: u32, hbar: f64) -> Result<f64> {
    if l > n {
        return Err(Error::Domain(format!("l = {l} exceeds n = {n}")));
    }
    if hbar <= 0.0 {
        return Err(Error::Domain(format!("hbar = {hbar} must be positive")));
    }
    let even = (n - l) % 2 == 0;
    let value = |delta: f64| -> C64 {
        let nf = n as f64 + delta;
        let lf = l as f64;
        let i = C64::new(0.0, 1.0);
        let phase = (i * (PI / 2.0) * (nf - lf)).exp();
        let csc_full = 1.0 / (PI * (lf - nf)).sin();
        let root = (0.5 * ((2.0 * (nf + 1.0)).ln() - hbar.ln() - ln_gamma(nf + lf + 2.0))).exp();
        let amp = 2f64.powi(l as i32 + 1) * gamma(lf + 1.0) * root;
        if even {
            let denom = C64::new(1.0, 0.0)
                + i * (i * PI * nf).exp() * (PI / 2.0 * (lf - nf)).cos() / (PI / 2.0 * (nf + lf)).sin();
            // overall sign flipped to make the n = l values positive
            -(i * amp * phase * csc_full) / denom
        } else {
            let denom = C64::new(1.0, 0.0)
                + i * (i * PI * nf).exp() * (PI / 2.0 * (lf - nf)).sin() / (PI / 2.0 * (nf + lf)).cos();
            -(amp * phase * csc_full) / denom
        }
    };
    let coarse = value(1e-5);
    let fine = value(5e-6);
    let limit = fine * 2.0 - coarse;
    if limit.im.abs() > 1e-7 * limit.norm().max(1e-12) {
        return Err(Error::Convergence {
            what: format!("pole-cancelling limit at n = {n}, l = {l} kept an imaginary part"),
            best: limit.im.abs(),
        });
    }
    Ok(limit.re)
}

/// Which of the two radial pair integrals is meant: against `p dp` (the
/// first Cauchy component) or `dp` (the second).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HankelKind {
    Circ,
    Bullet,
}

/// Closed form of the Weber-Schafheitlin pair integrals
///
/// ```text
/// int_0^inf j_l(x t) J_{n+1}(t) t dt = K_circ   x^l C^{l+1}_{n-l}(c) / c ,
/// int_0^inf j_l(x t) J_{n+1}(t) dt   = K_bullet x^l C^{l+1}_{n-l}(c) ,
/// ```
///
/// with `c = sqrt(1 - x^2)`, `0 < x < 1`.  Both saturate the identities
/// `|C^{l+1}_{n-l}(0) K_circ| = 1` (`n - l` even) and
/// `|2 (l+1) C^{l+2}_{n-l-1}(0) K_bullet| = 1` (`n - l` odd) that make the
/// stationary normalization come out as a pure factorial expression.
pub fn hankel_constant(n: u32, l: u32, kind: HankelKind) -> Result<f64> {
    if l > n {
        return Err(Error::Domain(format!("l = {l} exceeds n = {n}")));
    }
    let (nf, lf) = (n as f64, l as f64);
    let choose = binomial(n + l + 1, n - l);
    Ok(match kind {
        HankelKind::Circ => {
            PI.sqrt() * gamma((nf + lf + 3.0) / 2.0)
                / (gamma((nf - lf + 1.0) / 2.0) * gamma(lf + 1.5) * choose)
        }
        HankelKind::Bullet => {
            0.5 * PI.sqrt() * gamma((nf + lf + 2.0) / 2.0)
                / (gamma((nf - lf + 2.0) / 2.0) * gamma(lf + 1.5) * choose)
        }
    })
}

fn i_pow(l: u32) -> C64 {
    match l % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Cauchy data of the orthonormal stationary state `(n, l, m)`.
///
/// For `n - l` even only the first slot is populated (one inverse boundary
/// power), for `n - l` odd only the second (one positive power); the two
/// sectors are orthogonal by construction.
pub fn stationary_state_m(qn: QuantumNumbers, params: &PhysicalParams) -> Result<CauchyData> {
    let (n, l) = (qn.n, qn.l);
    let kappa = params.kappa();
    let hb = params.hbar;
    let m_const = orthonormal_const_m(n, l, hb)?;
    let s = solid_harmonic(l, qn.m)?;
    let (even_part, odd_part) = gegenbauer_parity_split(n - l, l as f64 + 1.0)?;
    let angular_norm = 4.0 * PI * (2.0 * PI * hb).powf(-1.5);
    let (fhat0, fhat1);
    if (n - l) % 2 == 0 {
        let c0 = gegenbauer_zero_arg(n - l, l as f64 + 1.0)?;
        let k_circ = hankel_constant(n, l, HankelKind::Circ)?;
        let amp = i_pow(l) * (m_const * c0 * k_circ * angular_norm / (kappa * kappa));
        fhat0 = PolyCSum::from_poly(-1, s.mul(&even_part)).scale(amp);
        fhat1 = PolyCSum::zero();
    } else {
        let c0 = gegenbauer_zero_arg(n - l - 1, l as f64 + 2.0)?;
        let k_bullet = hankel_constant(n, l, HankelKind::Bullet)?;
        let amp = i_pow(l) * (m_const * 2.0 * (l as f64 + 1.0) * c0 * k_bullet * angular_norm / kappa);
        fhat0 = PolyCSum::zero();
        fhat1 = PolyCSum::from_poly(1, s.mul(&odd_part)).scale(amp);
    }
    let mut data = CauchyData::from_polys(*params, fhat0, fhat1)?;
    data.modes = Some(vec![(qn, C64::new(1.0, 0.0))]);
    Ok(data)
}

/// Pointwise separable Helmholtz solution in 4D polar form:
///
/// `M sin^l(chi) C^{l+1}_{n-l}(cos chi) Y_lm(theta, phi)
///  (a J_{n+1}(kappa r) + b Y_{n+1}(kappa r)) / r`.
///
/// Only `b = 0` keeps the pairing finite; the second kind is provided for
/// completeness.  As `r -> 0` the `b = 0` branch tends to `0` for `n >= 1`
/// and to the finite value `M Y_00 kappa / 2` for `n = 0`.
pub fn stationary_wf_m(
    qn: QuantumNumbers,
    p: &MomentumPoint,
    a_coef: f64,
    b_coef: f64,
    params: &PhysicalParams,
) -> Result<C64> {
    let (r, chi, theta, phi) = p.hyperspherical();
    let kappa = params.kappa();
    let m_const = orthonormal_const_m(qn.n, qn.l, params.hbar)?;
    let radial = if r == 0.0 {
        if b_coef != 0.0 {
            return Err(Error::Domain("second-kind profile diverges at the origin".into()));
        }
        if qn.n == 0 {
            a_coef * kappa / 2.0
        } else {
            0.0
        }
    } else {
        let mut v = a_coef * bessel_j(qn.n as f64 + 1.0, kappa * r)?;
        if b_coef != 0.0 {
            v += b_coef * bessel_y(qn.n + 1, kappa * r)?;
        }
        v / r
    };
    let angular = chi.sin().powi(qn.l as i32)
        * gegenbauer(qn.n - qn.l, qn.l as f64 + 1.0, chi.cos())?
        * sph_harm(qn.l, qn.m, theta, phi)?;
    Ok(angular * (m_const * radial))
}

/// Cauchy data of the localized eigenstate of position with eigenvalues
/// `(eps0, sign |eps_4(eps0)|)`: weight `1/sqrt(2)` on a unit-mass Gaussian
/// at `eps0` in the first slot, `-sign (i/hbar) |eps_4|` times the same in
/// the second.  `width` is the mollifier scale; the data must fit strictly
/// inside the ball.
pub fn plane_wave_state(
    eps0: [f64; 3],
    sign: i8,
    width: f64,
    params: &PhysicalParams,
) -> Result<CauchyData> {
    if !(sign == 1 || sign == -1) {
        return Err(Error::Domain(format!("sign {sign} must be +1 or -1")));
    }
    if width <= 0.0 {
        return Err(Error::Domain(format!("mollifier width {width} must be positive")));
    }
    let rho = (eps0[0] * eps0[0] + eps0[1] * eps0[1] + eps0[2] * eps0[2]).sqrt();
    if rho + 5.0 * width >= params.radius {
        return Err(Error::Domain(format!(
            "mollified data at |eps0| = {rho} with width {width} leaks out of the ball; reduce the width"
        )));
    }
    let abs_e4 = (params.radius * params.radius - rho * rho).sqrt();
    let w0 = C64::new(1.0 / 2f64.sqrt(), 0.0);
    let w1 = C64::new(0.0, -(sign as f64) * abs_e4 / params.hbar) * w0;
    Ok(CauchyData {
        params: *params,
        fhat0: FourierDatum::Delta { center: eps0, weight: w0, width },
        fhat1: FourierDatum::Delta { center: eps0, weight: w1, width },
        modes: None,
    })
}

/// The diagonalized pairing
/// `int_{B_R} deps [ |eps_4| conj(a0) b0 + (hbar^2/|eps_4|) conj(a1) b1 ]`.
///
/// Exact for polynomial data; localized data integrate over their support
/// box, anything else over the hyperspherical product grid.
pub fn inner_product_m_spectral(a: &CauchyData, b: &CauchyData) -> Result<C64> {
    if a.params != b.params {
        return Err(Error::Domain("pairing between different parameter sets".into()));
    }
    let r = a.params.radius;
    let h2 = a.params.hbar * a.params.hbar;
    if let (Some((a0, a1)), Some((b0, b1))) = (a.polys(), b.polys()) {
        let oo = a0.conj().mul(b0).mul_c_pow(1).ball_moment()?;
        let dd = a1.conj().mul(b1).mul_c_pow(-1).ball_moment()?;
        return Ok(oo * r.powi(4) + dd * (h2 * r * r));
    }
    // quadrature paths; weights c and 1/c against plain dV
    let pair = |first: bool, x: [f64; 3]| -> C64 {
        if first {
            a.fhat0.eval(x, r).conj() * b.fhat0.eval(x, r)
        } else {
            a.fhat1.eval(x, r).conj() * b.fhat1.eval(x, r)
        }
    };
    let boxes = |first: bool| -> Option<([f64; 3], f64)> {
        let (da, db) = if first { (&a.fhat0, &b.fhat0) } else { (&a.fhat1, &b.fhat1) };
        match (da.support(r), db.support(r)) {
            (Some(sa), Some(sb)) => Some(intersect_boxes(sa, sb)?),
            (Some(s), None) | (None, Some(s)) => Some(s),
            (None, None) => None,
        }
    };
    let mut out = C64::new(0.0, 0.0);
    for first in [true, false] {
        let (da, db) = if first { (&a.fhat0, &b.fhat0) } else { (&a.fhat1, &b.fhat1) };
        if da.is_zero() || db.is_zero() {
            continue;
        }
        let weight_scale = if first { r.powi(4) } else { h2 * r * r };
        let acc = if let Some((center, half)) = boxes(first) {
            let n = 32;
            let (t, w) = gauss_legendre(n);
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let x = [
                            center[0] + half * t[i],
                            center[1] + half * t[j],
                            center[2] + half * t[k],
                        ];
                        let r2: f64 = x.iter().map(|v| v * v).sum();
                        if r2 >= 1.0 - 1e-14 {
                            continue;
                        }
                        let c = (1.0 - r2).sqrt();
                        let cw = if first { c } else { 1.0 / c };
                        acc += pair(first, x) * (w[i] * w[j] * w[k] * half.powi(3) * cw);
                    }
                }
            }
            acc
        } else {
            let grid = crate::config_space::SphereGrid::default();
            let mut acc = C64::new(0.0, 0.0);
            for (x, w) in grid.nodes() {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let c = (1.0 - r2).max(0.0).sqrt();
                // grid weight carries 1/c already
                let cw = if first { c * c } else { 1.0 };
                acc += pair(first, x) * (w * cw);
            }
            acc
        };
        out += acc * weight_scale;
    }
    Ok(out)
}

fn intersect_boxes(a: ([f64; 3], f64), b: ([f64; 3], f64)) -> Option<([f64; 3], f64)> {
    let mut center = [0.0; 3];
    let mut half = f64::INFINITY;
    for i in 0..3 {
        let lo = (a.0[i] - a.1).max(b.0[i] - b.1);
        let hi = (a.0[i] + a.1).min(b.0[i] + b.1);
        if lo >= hi {
            return None;
        }
        center[i] = 0.5 * (lo + hi);
        half = half.min(0.5 * (hi - lo));
    }
    Some((center, half))
}

/// The literal non-local pairing, reduced per angular channel to an outer
/// radial quadrature over two numerically evaluated pair integrals.  Both
/// states must carry a stationary-basis expansion.  `tol` sizes the outer
/// rule; the inner integrals run at their own fixed tolerance.
pub fn inner_product_m_direct(a: &CauchyData, b: &CauchyData, tol: f64) -> Result<C64> {
    if a.params != b.params {
        return Err(Error::Domain("pairing between different parameter sets".into()));
    }
    let (ma, mb) = match (a.modes(), b.modes()) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            return Err(Error::Domain(
                "the literal pairing needs states decomposed over the stationary family".into(),
            ))
        }
    };
    let n_nodes = if tol < 1e-6 { 120 } else { 80 };
    let mut out = C64::new(0.0, 0.0);
    for (qa, ca) in ma {
        for (qb, cb) in mb {
            if qa.l != qb.l || qa.m != qb.m || (qa.n + qb.n) % 2 != 0 {
                continue; // distinct channels and sectors never mix
            }
            let g = direct_mode_product(*qa, *qb, &a.params, n_nodes)?;
            out += ca.conj() * cb * g;
        }
    }
    Ok(out)
}

fn direct_mode_product(
    qa: QuantumNumbers,
    qb: QuantumNumbers,
    params: &PhysicalParams,
    n_nodes: usize,
) -> Result<f64> {
    let l = qa.l;
    let hb = params.hbar;
    let ma = orthonormal_const_m(qa.n, l, hb)?;
    let mb = orthonormal_const_m(qb.n, l, hb)?;
    let even = (qa.n - l) % 2 == 0;
    let (t, w) = gauss_legendre(n_nodes);
    let mut quad = 0.0;
    for (tk, wk) in t.iter().zip(&w) {
        let chi = (tk + 1.0) * PI / 4.0;
        let (s, c) = chi.sin_cos();
        let x = s;
        let (pa, pb, geom) = if even {
            (
                bessel_product_integral(l, qa.n as f64 + 1.0, x, ProductWeight::Linear)?,
                bessel_product_integral(l, qb.n as f64 + 1.0, x, ProductWeight::Linear)?,
                s * s * c * c,
            )
        } else {
            (
                bessel_product_integral(l, qa.n as f64 + 1.0, x, ProductWeight::Flat)?,
                bessel_product_integral(l, qb.n as f64 + 1.0, x, ProductWeight::Flat)?,
                s * s,
            )
        };
        quad += wk * (PI / 4.0) * geom * pa * pb;
    }
    let channel = if even {
        let c0a = gegenbauer_zero_arg(qa.n - l, l as f64 + 1.0)?;
        let c0b = gegenbauer_zero_arg(qb.n - l, l as f64 + 1.0)?;
        c0a * c0b
    } else {
        let c0a = gegenbauer_zero_arg(qa.n - l - 1, l as f64 + 2.0)?;
        let c0b = gegenbauer_zero_arg(qb.n - l - 1, l as f64 + 2.0)?;
        4.0 * (l as f64 + 1.0).powi(2) * c0a * c0b
    };
    Ok(2.0 * hb / PI * ma * mb * channel * quad)
}

/// One spherical-harmonic channel of serialized Cauchy data: samples of the
/// two radial profiles on the shared grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialChannel {
    pub l: u32,
    pub m: i32,
    pub f0_re: Vec<f64>,
    pub f0_im: Vec<f64>,
    pub f1_re: Vec<f64>,
    pub f1_im: Vec<f64>,
}

/// Serialized band-limited Cauchy data: physical parameters, a radial grid
/// in the dimensionless variable `|eps|/R`, and per-channel samples.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialChannelData {
    pub params: PhysicalParams,
    pub r_nodes: Vec<f64>,
    pub channels: Vec<RadialChannel>,
}

/// Project data onto spherical-harmonic channels sampled on a uniform
/// radial grid, the interchange format used by the command line tools.
/// Faithful when the data's angular content stops at `l_max`; the radial
/// resolution is `n_r`.
pub fn to_radial_channels(data: &CauchyData, l_max: u32, n_r: usize) -> Result<RadialChannelData> {
    if n_r < 2 {
        return Err(Error::Domain("radial grid needs at least two nodes".into()));
    }
    let r_nodes: Vec<f64> = (0..n_r).map(|k| (k as f64 + 0.5) / n_r as f64).collect();
    let n_u = 24;
    let (u, wu) = gauss_legendre(n_u);
    let n_phi = 48;
    let lm: Vec<(u32, i32)> = (0..=l_max)
        .flat_map(|l| (-(l as i32)..=(l as i32)).map(move |m| (l, m)))
        .collect();
    let mut channels: Vec<RadialChannel> = lm
        .iter()
        .map(|&(l, m)| RadialChannel {
            l,
            m,
            f0_re: Vec::with_capacity(n_r),
            f0_im: Vec::with_capacity(n_r),
            f1_re: Vec::with_capacity(n_r),
            f1_im: Vec::with_capacity(n_r),
        })
        .collect();
    for &r in &r_nodes {
        let mut c0 = vec![C64::new(0.0, 0.0); lm.len()];
        let mut c1 = vec![C64::new(0.0, 0.0); lm.len()];
        for (ui, wi) in u.iter().zip(&wu) {
            let theta = ui.clamp(-1.0, 1.0).acos();
            for p in 0..n_phi {
                let phi = 2.0 * PI * p as f64 / n_phi as f64;
                let x = [
                    r * theta.sin() * phi.cos(),
                    r * theta.sin() * phi.sin(),
                    r * *ui,
                ];
                let w = wi * 2.0 * PI / n_phi as f64;
                let v0 = data.eval_fhat0(x) * w;
                let v1 = data.eval_fhat1(x) * w;
                for (k, &(l, m)) in lm.iter().enumerate() {
                    let y = sph_harm(l, m, theta, phi)?.conj();
                    c0[k] += y * v0;
                    c1[k] += y * v1;
                }
            }
        }
        for (k, ch) in channels.iter_mut().enumerate() {
            ch.f0_re.push(c0[k].re);
            ch.f0_im.push(c0[k].im);
            ch.f1_re.push(c1[k].re);
            ch.f1_im.push(c1[k].im);
        }
    }
    Ok(RadialChannelData { params: data.params, r_nodes, channels })
}

/// Resynthesize Cauchy data from serialized channels, with linear
/// interpolation between radial nodes (zero beyond the last node).
pub fn from_radial_channels(ser: &RadialChannelData) -> Result<CauchyData> {
    if ser.r_nodes.len() < 2 || ser.r_nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("radial grid must be increasing with at least two nodes".into()));
    }
    if ser.r_nodes.iter().any(|&r| !(0.0..1.0).contains(&r)) {
        return Err(Error::Domain("radial nodes must lie in [0, 1)".into()));
    }
    let nodes = ser.r_nodes.clone();
    let channels = ser.channels.clone();
    let interp = move |samples_re: &[f64], samples_im: &[f64], r: f64, nodes: &[f64]| -> C64 {
        if r >= *nodes.last().unwrap() || r <= nodes[0] {
            // hold the end values inside, vanish outside the sampled range
            if r > *nodes.last().unwrap() {
                return C64::new(0.0, 0.0);
            }
            let k = if r <= nodes[0] { 0 } else { nodes.len() - 1 };
            return C64::new(samples_re[k], samples_im[k]);
        }
        let j = nodes.partition_point(|&n| n < r).max(1);
        let t = (r - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
        C64::new(
            samples_re[j - 1] * (1.0 - t) + samples_re[j] * t,
            samples_im[j - 1] * (1.0 - t) + samples_im[j] * t,
        )
    };
    let make = |first: bool| -> Rc<dyn Fn([f64; 3]) -> C64> {
        let nodes = nodes.clone();
        let channels = channels.clone();
        let interp = interp.clone();
        Rc::new(move |x: [f64; 3]| {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            if r > *nodes.last().unwrap() {
                return C64::new(0.0, 0.0);
            }
            let theta = if r == 0.0 { 0.0 } else { (x[2] / r).clamp(-1.0, 1.0).acos() };
            let phi = x[1].atan2(x[0]);
            let mut acc = C64::new(0.0, 0.0);
            for ch in channels.iter() {
                let radial = if first {
                    interp(&ch.f0_re, &ch.f0_im, r, &nodes)
                } else {
                    interp(&ch.f1_re, &ch.f1_im, r, &nodes)
                };
                if radial != C64::new(0.0, 0.0) {
                    acc += radial * sph_harm(ch.l, ch.m, theta, phi).unwrap_or(C64::new(0.0, 0.0));
                }
            }
            acc
        })
    };
    Ok(CauchyData {
        params: ser.params,
        fhat0: FourierDatum::Sampler(make(true)),
        fhat1: FourierDatum::Sampler(make(false)),
        modes: None,
    })
}

/// Apply a position/symmetry operator to band-limited data.
///
/// In this representation `eps_i` multiplies, `eps_4` swaps the slots with
/// the Helmholtz factor `R^2 - |eps|^2`, and the generators act by first
/// order differential expressions; every action is exact on polynomial
/// data.  The Hamiltonian is not a pointwise operation here (it is diagonal
/// over the stationary family instead) and is rejected.
pub fn op_apply_m(op: ConfigOp, data: &CauchyData) -> Result<CauchyData> {
    let p = &data.params;
    let r2 = p.radius * p.radius;
    let hb = p.hbar;
    if let ConfigOp::Eps(i) | ConfigOp::J(i) | ConfigOp::K(i) = op {
        if i > 2 {
            return Err(Error::Domain(format!("component index {i} out of range")));
        }
    }
    // localized data admit the multiplicative actions exactly
    if let (ConfigOp::Eps(_) | ConfigOp::Eps4, FourierDatum::Delta { .. }) = (op, &data.fhat0) {
        if let (
            FourierDatum::Delta { center, weight: w0, width },
            FourierDatum::Delta { center: c1, weight: w1, width: wd1 },
        ) = (&data.fhat0, &data.fhat1)
        {
            if center == c1 && width == wd1 {
                let (new0, new1) = match op {
                    ConfigOp::Eps(i) => (*w0 * center[i], *w1 * center[i]),
                    _ => {
                        let e4sq = r2 - center.iter().map(|v| v * v).sum::<f64>();
                        (
                            *w1 * C64::new(0.0, hb),
                            *w0 * C64::new(0.0, -e4sq / hb),
                        )
                    }
                };
                return Ok(CauchyData {
                    params: *p,
                    fhat0: FourierDatum::Delta { center: *center, weight: new0, width: *width },
                    fhat1: FourierDatum::Delta { center: *center, weight: new1, width: *width },
                    modes: None,
                });
            }
        }
    }
    let Some((f0, f1)) = data.polys() else {
        return Err(Error::Domain(
            "operator actions need exact polynomial data (or localized data for the multiplicative ones)".into(),
        ));
    };
    let radius = p.radius;
    let kappa = p.kappa();
    // derivatives are with respect to eps = R x
    let d = |g: &PolyCSum, i: usize| g.dx(i).scale(C64::new(1.0 / radius, 0.0));
    let (g0, g1) = match op {
        ConfigOp::Eps(i) => (
            f0.mul_x(i).scale(C64::new(radius, 0.0)),
            f1.mul_x(i).scale(C64::new(radius, 0.0)),
        ),
        ConfigOp::Eps4 => (
            f1.scale(C64::new(0.0, hb)),
            f0.mul_c_pow(2).scale(C64::new(0.0, -r2 / hb)).reduce(),
        ),
        ConfigOp::J(i) => (
            f0.x_cross_grad(i).scale(C64::new(0.0, -hb)),
            f1.x_cross_grad(i).scale(C64::new(0.0, -hb)),
        ),
        ConfigOp::K(i) => {
            let g0 = f0
                .x_cross_grad(i)
                .add(&d(f1, i).scale(C64::new(0.0, hb)))
                .scale(C64::new(0.0, -1.0 / kappa))
                .reduce();
            let curl = f1.x_cross_grad(i).scale(C64::new(0.0, -1.0 / kappa));
            // (R^2 - |eps|^2) d/deps_i - eps_i acting on c^q P collapses to
            // R [ c^{q+2} dP/dx_i - (q+1) x_i c^q P ]; assembling it per part
            // keeps the boundary classes exact (the q = -1 term cancels
            // identically rather than to roundoff)
            let mut helm = PolyCSum::zero();
            for (q, part) in f0.parts() {
                helm = helm.add(&PolyCSum::from_poly(q + 2, part.dx(i)));
                if q != -1 {
                    helm = helm.add(
                        &PolyCSum::from_poly(q, part.mul_x(i))
                            .scale(C64::new(-(q as f64 + 1.0), 0.0)),
                    );
                }
            }
            let helm = helm.scale(C64::new(-radius / (hb * kappa), 0.0));
            (g0, curl.add(&helm).reduce())
        }
        ConfigOp::H => {
            return Err(Error::Domain(
                "the energy acts diagonally over the stationary family; apply it spectrally".into(),
            ))
        }
    };
    CauchyData::from_polys(*p, g0, g1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::BallPoly;
    use crate::config_space::SphereGrid;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn qn(n: u32, l: u32, m: i32) -> QuantumNumbers {
        QuantumNumbers::new(n, l, m).unwrap()
    }

    #[test]
    fn momentum_point_round_trip() {
        let p = MomentumPoint::from_hyperspherical(2.3, 1.9, 0.6, -2.5).unwrap();
        let (r, chi, theta, phi) = p.hyperspherical();
        assert_abs_diff_eq!(r, 2.3, epsilon = 1e-13);
        assert_abs_diff_eq!(chi, 1.9, epsilon = 1e-13);
        assert_abs_diff_eq!(theta, 0.6, epsilon = 1e-13);
        assert_abs_diff_eq!(phi, -2.5, epsilon = 1e-13);
        let q = MomentumPoint::new(p.pi(), p.pi4());
        assert_abs_diff_eq!(q.pi_r(), 2.3, epsilon = 1e-13);
        assert!(q.pi4() < 0.0);
        assert!(MomentumPoint::from_hyperspherical(-1.0, 0.5, 0.5, 0.0).is_err());
    }

    #[test]
    fn pair_integral_constants_match_quadrature() {
        // closed forms against the oscillatory quadrature at x = 1/2
        let x = 0.5f64;
        let c = (1.0 - x * x).sqrt();
        for (n, l) in [(0u32, 0u32), (2, 0), (1, 1)] {
            let num = bessel_product_integral(l, n as f64 + 1.0, x, ProductWeight::Linear).unwrap();
            let k = hankel_constant(n, l, HankelKind::Circ).unwrap();
            let want = k * x.powi(l as i32) * gegenbauer(n - l, l as f64 + 1.0, c).unwrap() / c;
            assert!(
                (num - want).abs() < 1e-6 * want.abs().max(1.0),
                "circ ({n},{l}): {num} vs {want}"
            );
        }
        for (n, l) in [(1u32, 0u32), (3, 0), (0, 0)] {
            let num = bessel_product_integral(l, n as f64 + 1.0, x, ProductWeight::Flat).unwrap();
            let k = hankel_constant(n, l, HankelKind::Bullet).unwrap();
            let want = k * x.powi(l as i32) * gegenbauer(n - l, l as f64 + 1.0, c).unwrap();
            assert!(
                (num - want).abs() < 1e-6 * want.abs().max(1.0),
                "bullet ({n},{l}): {num} vs {want}"
            );
        }
        // unit-modulus identities behind the factorial normalization
        for n in (0..=4).step_by(2) {
            for l in (0..=n).step_by(2) {
                let prod = gegenbauer_zero_arg(n - l, l as f64 + 1.0).unwrap()
                    * hankel_constant(n, l, HankelKind::Circ).unwrap();
                assert_abs_diff_eq!(prod.abs(), 1.0, epsilon = 1e-12);
            }
        }
        for (n, l) in [(1u32, 0u32), (3, 0), (3, 2), (2, 1), (4, 1)] {
            let prod = 2.0
                * (l as f64 + 1.0)
                * gegenbauer_zero_arg(n - l - 1, l as f64 + 2.0).unwrap()
                * hankel_constant(n, l, HankelKind::Bullet).unwrap();
            assert_abs_diff_eq!(prod.abs(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_form_norm_limits() {
        // the limit against its factorial form, all sectors through n = 4
        for n in 0..=4u32 {
            for l in 0..=n {
                let lim = norm_const_m(n, l, 1.0).unwrap();
                let ortho = orthonormal_const_m(n, l, 1.0).unwrap();
                let fact: f64 = (1..=(n - l)).map(|k| k as f64).product::<f64>().max(1.0);
                assert!(
                    (lim.abs() - ortho / fact.sqrt()).abs() < 1e-9,
                    "({n},{l}): |{lim}| vs {ortho}/sqrt({fact})"
                );
            }
        }
        // reference values; the (3,2) entry of the usual table rounds to 1
        // but the closed form itself converges to 8/(3 sqrt(10))
        assert_abs_diff_eq!(norm_const_m(0, 0, 1.0).unwrap(), 2f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(norm_const_m(1, 0, 1.0).unwrap(), 2f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(
            norm_const_m(1, 1, 1.0).unwrap(),
            2.0 * 2f64.sqrt() / 3f64.sqrt(),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(norm_const_m(2, 0, 1.0).unwrap(), -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(norm_const_m(3, 0, 1.0).unwrap(), -1.0 / 3f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(
            norm_const_m(3, 2, 1.0).unwrap(),
            8.0 / (3.0 * 10f64.sqrt()),
            epsilon = 1e-9
        );
        // hbar enters as an overall inverse square root
        assert_abs_diff_eq!(
            norm_const_m(2, 0, 4.0).unwrap(),
            norm_const_m(2, 0, 1.0).unwrap() / 2.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn stationary_gram_is_identity() {
        let params = PhysicalParams::new(1.4, 0.8, 1.0).unwrap();
        let modes = QuantumNumbers::modes_up_to(3);
        let states: Vec<_> = modes
            .iter()
            .map(|&q| stationary_state_m(q, &params).unwrap())
            .collect();
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let g = inner_product_m_spectral(a, b).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (g - C64::new(want, 0.0)).norm() < 1e-12,
                    "gram({:?}, {:?}) = {g}",
                    modes[i],
                    modes[j]
                );
            }
        }
    }

    #[test]
    fn direct_pairing_agrees_with_spectral() {
        let params = PhysicalParams::default();
        let pairs = [
            (qn(0, 0, 0), qn(0, 0, 0), 1.0),
            (qn(1, 0, 0), qn(1, 0, 0), 1.0),
            (qn(0, 0, 0), qn(2, 0, 0), 0.0),
            (qn(2, 1, 1), qn(2, 1, 1), 1.0),
        ];
        for (a, b, want) in pairs {
            let da = stationary_state_m(a, &params).unwrap();
            let db = stationary_state_m(b, &params).unwrap();
            let direct = inner_product_m_direct(&da, &db, 1e-5).unwrap();
            assert!(
                (direct - C64::new(want, 0.0)).norm() < 1e-5,
                "direct({a}, {b}) = {direct}, want {want}"
            );
        }
        // superposition cross-check against the diagonal form
        let s1 = stationary_state_m(qn(0, 0, 0), &params)
            .unwrap()
            .scale(C64::new(0.6, 0.1))
            .add(&stationary_state_m(qn(2, 0, 0), &params).unwrap().scale(C64::new(0.0, -0.7)))
            .unwrap();
        let s2 = stationary_state_m(qn(2, 0, 0), &params).unwrap();
        let direct = inner_product_m_direct(&s1, &s2, 1e-5).unwrap();
        let spectral = inner_product_m_spectral(&s1, &s2).unwrap();
        assert!((direct - spectral).norm() < 1e-5, "{direct} vs {spectral}");
    }

    #[test]
    fn ivp_reproduces_plane_waves() {
        let params = PhysicalParams::new(1.0, 0.5, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for sign in [1i8, -1] {
            let eps0 = [0.31, -0.2, 0.12];
            let state = plane_wave_state(eps0, sign, 0.01, &params).unwrap();
            let abs_e4 =
                (params.radius.powi(2) - eps0.iter().map(|v| v * v).sum::<f64>()).sqrt();
            let n_const = 1.0 / (2f64.sqrt() * (2.0 * PI * params.hbar).powf(1.5));
            for _ in 0..10 {
                let p = MomentumPoint::new(
                    [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                    rng.gen_range(-2.0..2.0),
                );
                let got = state.solve_ivp(&p);
                let arg = -(eps0[0] * p.pi()[0]
                    + eps0[1] * p.pi()[1]
                    + eps0[2] * p.pi()[2]
                    + sign as f64 * abs_e4 * p.pi4())
                    / params.hbar;
                let want = C64::new(arg.cos(), arg.sin()) * n_const;
                assert!((got - want).norm() < 1e-10, "sign {sign}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn ivp_matches_separable_solutions() {
        let params = PhysicalParams::new(1.0, 1.0, 1.0).unwrap();
        let grid = SphereGrid { n_chi: 60, n_theta: 40, n_phi: 80 };
        let points = [
            MomentumPoint::new([0.7, -0.4, 1.1], 0.9),
            MomentumPoint::new([0.2, 0.1, -0.5], 2.0),
        ];
        for q in [qn(0, 0, 0), qn(1, 1, 0), qn(2, 1, 1)] {
            let data = stationary_state_m(q, &params).unwrap();
            for p in &points {
                let via_ivp = data.solve_ivp_with(p, &grid);
                let direct = stationary_wf_m(q, p, 1.0, 0.0, &params).unwrap();
                assert!(
                    (via_ivp - direct).norm() < 1e-6,
                    "{q:?} at pi4 = {}: {via_ivp} vs {direct}",
                    p.pi4()
                );
            }
        }
        // cosine-sector data are even in pi_4
        let even = stationary_state_m(qn(2, 0, 0), &params).unwrap();
        let p = MomentumPoint::new([0.4, 0.2, -0.3], 1.3);
        let q = MomentumPoint::new([0.4, 0.2, -0.3], -1.3);
        assert!((even.solve_ivp(&p) - even.solve_ivp(&q)).norm() < 1e-14);
        // and the slice derivative of sine-sector data at pi_4 = 0 recovers
        // the second slot's transform: cross-check via the odd state's value
        let odd = stationary_state_m(qn(1, 0, 0), &params).unwrap();
        let slice = MomentumPoint::new([0.4, 0.2, -0.3], 0.0);
        assert!(odd.solve_ivp(&slice).norm() < 1e-14);
        assert!(odd.solve_ivp_dpi4(&slice).norm() > 1e-3);
    }

    #[test]
    fn helmholtz_residual_scales_quadratically() {
        let params = PhysicalParams::new(1.0, 0.5, 1.0).unwrap();
        let q = qn(2, 1, 0);
        let at = |pi: [f64; 3], pi4: f64| {
            stationary_wf_m(q, &MomentumPoint::new(pi, pi4), 1.0, 0.0, &params).unwrap()
        };
        let base = [0.62, -0.35, 0.41];
        let base4 = 0.57;
        let kappa = params.kappa();
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
        let coarse = residual(0.05);
        let fine = residual(0.025);
        let ratio = coarse / fine;
        assert!(
            (3.2..=4.8).contains(&ratio),
            "residuals {coarse} -> {fine}, ratio {ratio}"
        );
    }

    fn random_poly_data(rng: &mut ChaCha8Rng, params: &PhysicalParams) -> CauchyData {
        let mut build = || {
            let mut p = BallPoly::zero();
            for i in 0..2u8 {
                for j in 0..2u8 {
                    for k in 0..2u8 {
                        p = p.add(&BallPoly::monomial(
                            (i, j, k),
                            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                        ));
                    }
                }
            }
            PolyCSum::from_poly(0, p)
        };
        CauchyData::from_polys(*params, build(), build()).unwrap()
    }

    #[test]
    fn position_operators_close_the_sphere_relation() {
        let params = PhysicalParams::new(1.7, 0.9, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data = random_poly_data(&mut rng, &params);
        let mut acc0 = PolyCSum::zero();
        let mut acc1 = PolyCSum::zero();
        for i in 0..3 {
            let once = op_apply_m(ConfigOp::Eps(i), &data).unwrap();
            let twice = op_apply_m(ConfigOp::Eps(i), &once).unwrap();
            let (t0, t1) = twice.polys().unwrap();
            acc0 = acc0.add(t0);
            acc1 = acc1.add(t1);
        }
        let e4 = op_apply_m(ConfigOp::Eps4, &data).unwrap();
        let e44 = op_apply_m(ConfigOp::Eps4, &e4).unwrap();
        let (t0, t1) = e44.polys().unwrap();
        acc0 = acc0.add(t0);
        acc1 = acc1.add(t1);
        let (f0, f1) = data.polys().unwrap();
        let r2 = C64::new(params.radius * params.radius, 0.0);
        assert!(acc0.approx_eq_function(&f0.scale(r2), 1e-13));
        assert!(acc1.approx_eq_function(&f1.scale(r2), 1e-13));
        // localized states are eigenstates of the fourth coordinate
        let eps0 = [0.4, 0.1, -0.2];
        let abs_e4 = (params.radius.powi(2) - eps0.iter().map(|v| v * v).sum::<f64>()).sqrt();
        for sign in [1i8, -1] {
            let pw = plane_wave_state(eps0, sign, 0.01, &params).unwrap();
            let moved = op_apply_m(ConfigOp::Eps4, &pw).unwrap();
            let p = MomentumPoint::new([0.3, -0.8, 0.5], 0.7);
            let ratio = moved.solve_ivp(&p) / pw.solve_ivp(&p);
            assert!(
                (ratio - C64::new(sign as f64 * abs_e4, 0.0)).norm() < 1e-12,
                "sign {sign}: ratio {ratio}"
            );
        }
    }

    #[test]
    fn operators_are_hermitian_for_the_pairing() {
        let params = PhysicalParams::new(1.2, 0.7, 1.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let ops = [
            ConfigOp::Eps(0),
            ConfigOp::Eps(1),
            ConfigOp::Eps(2),
            ConfigOp::Eps4,
            ConfigOp::J(0),
            ConfigOp::J(1),
            ConfigOp::J(2),
            ConfigOp::K(0),
            ConfigOp::K(1),
            ConfigOp::K(2),
        ];
        for _ in 0..5 {
            let a = random_poly_data(&mut rng, &params);
            let b = random_poly_data(&mut rng, &params);
            for op in ops {
                let lhs = inner_product_m_spectral(&a, &op_apply_m(op, &b).unwrap()).unwrap();
                let rhs = inner_product_m_spectral(&op_apply_m(op, &a).unwrap(), &b).unwrap();
                assert!(
                    (lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0),
                    "{op:?}: {lhs} vs {rhs}"
                );
            }
        }
        assert!(op_apply_m(ConfigOp::H, &random_poly_data(&mut rng, &params)).is_err());
    }

    #[test]
    fn localized_overlaps_recover_the_weight() {
        let params = PhysicalParams::default();
        let eps1 = [0.30, 0.05, -0.10];
        let w = 0.004;
        let plus = plane_wave_state(eps1, 1, w, &params).unwrap();
        let minus = plane_wave_state(eps1, -1, w, &params).unwrap();
        let self_overlap = inner_product_m_spectral(&plus, &plus).unwrap();
        let cross = inner_product_m_spectral(&plus, &minus).unwrap();
        // same-sign pairing divided by the mollifier mass gives |eps_4|
        let mass = (4.0 * PI * w * w).powf(-1.5); // Gaussian squared, integrated
        let abs_e4 = (1.0 - eps1.iter().map(|v| v * v).sum::<f64>()).sqrt();
        assert!(
            (self_overlap.re / mass - abs_e4).abs() < 1e-3 * abs_e4,
            "{} vs {abs_e4}",
            self_overlap.re / mass
        );
        assert!(cross.norm() < 1e-3 * self_overlap.norm());
        // separated states of the same sign: the ratio follows the Gaussian
        let eps2 = [0.30 + 3.0 * w, 0.05, -0.10];
        let near = plane_wave_state(eps2, 1, w, &params).unwrap();
        let near_overlap = inner_product_m_spectral(&plus, &near).unwrap();
        let expected_ratio = (-(9.0 * w * w) / (4.0 * w * w)).exp();
        assert!(
            (near_overlap.re / self_overlap.re - expected_ratio).abs() < 1e-2,
            "{} vs {expected_ratio}",
            near_overlap.re / self_overlap.re
        );
        // disjoint supports never meet
        let far = plane_wave_state([-0.3, 0.0, 0.0], 1, w, &params).unwrap();
        assert_eq!(inner_product_m_spectral(&plus, &far).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn classification_flags_support_violations() {
        let params = PhysicalParams::default();
        let inside = |x: [f64; 3]| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            C64::new(if r2 < 0.25 { 1.0 } else { 0.0 }, 0.0)
        };
        let zero = |_: [f64; 3]| C64::new(0.0, 0.0);
        let class = classify_data(&inside, &zero, &params, 40);
        assert!(class.oscillatory);
        assert!(class.inside[0] > 0.0 && class.outside[0] == 0.0);

        // second component touching the rim is rejected
        let shell = |x: [f64; 3]| {
            let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            C64::new(if (r - 1.0).abs() < 0.02 { 1.0 } else { 0.0 }, 0.0)
        };
        let class = classify_data(&zero, &shell, &params, 40);
        assert!(!class.oscillatory);
        assert!(class.rim[1] > 0.0);

        // a Gaussian has mass everywhere
        let gaussian = |x: [f64; 3]| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            C64::new((-r2).exp(), 0.0)
        };
        let class = classify_data(&gaussian, &zero, &params, 40);
        assert!(!class.oscillatory);
        assert!(class.outside[0] > 0.0);

        // the sampler constructor applies the same gate
        assert!(CauchyData::from_samplers(
            params,
            Rc::new(gaussian),
            Rc::new(zero),
            32
        )
        .is_err());
        assert!(CauchyData::from_samplers(params, Rc::new(inside), Rc::new(zero), 32).is_ok());
    }

    #[test]
    fn radial_channel_serialization_round_trips() {
        let params = PhysicalParams::new(1.3, 0.9, 1.0).unwrap();
        let state = stationary_state_m(qn(1, 1, 1), &params)
            .unwrap()
            .add(&stationary_state_m(qn(1, 0, 0), &params).unwrap().scale(C64::new(0.0, 0.5)))
            .unwrap();
        let ser = to_radial_channels(&state, 1, 160).unwrap();
        assert_eq!(ser.channels.len(), 4);
        let text = serde_json::to_string(&ser).unwrap();
        let back: RadialChannelData = serde_json::from_str(&text).unwrap();
        let rebuilt = from_radial_channels(&back).unwrap();
        for x in [[0.3, -0.2, 0.4], [0.0, 0.55, 0.1], [-0.45, 0.3, -0.35]] {
            let scale = state.eval_fhat0(x).norm().max(state.eval_fhat1(x).norm());
            assert!(
                (state.eval_fhat0(x) - rebuilt.eval_fhat0(x)).norm() < 2e-3 * scale,
                "f0 at {x:?}: {} vs {}",
                state.eval_fhat0(x),
                rebuilt.eval_fhat0(x)
            );
            assert!(
                (state.eval_fhat1(x) - rebuilt.eval_fhat1(x)).norm() < 2e-3 * scale,
                "f1 at {x:?}: {} vs {}",
                state.eval_fhat1(x),
                rebuilt.eval_fhat1(x)
            );
        }
        assert!(from_radial_channels(&RadialChannelData {
            params,
            r_nodes: vec![0.5],
            channels: vec![],
        })
        .is_err());
    }

    #[test]
    fn sector_projectors_split_the_data() {
        let params = PhysicalParams::default();
        let s = stationary_state_m(qn(0, 0, 0), &params)
            .unwrap()
            .add(&stationary_state_m(qn(1, 0, 0), &params).unwrap())
            .unwrap();
        let even = s.project_even();
        let odd = s.project_odd();
        let back = even.add(&odd).unwrap();
        let (s0, s1) = s.polys().unwrap();
        let (b0, b1) = back.polys().unwrap();
        assert!(b0.approx_eq_function(s0, 1e-15));
        assert!(b1.approx_eq_function(s1, 1e-15));
        assert!(even.project_odd().polys().unwrap().1.is_zero());
        let cross = inner_product_m_spectral(&even, &odd).unwrap();
        assert_eq!(cross, C64::new(0.0, 0.0));
        // positive definiteness on a random band-limited sample
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let d = random_poly_data(&mut rng, &params);
            let norm = inner_product_m_spectral(&d, &d).unwrap();
            assert!(norm.re > 0.0 && norm.im.abs() < 1e-12 * norm.re);
        }
    }
}
