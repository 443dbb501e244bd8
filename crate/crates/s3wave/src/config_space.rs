//! Wavefunctions on the three-sphere in the two-chart picture.
//!
//! A point of the sphere of radius R projects to `eps` in the closed ball
//! B_R along with the sign of its fourth coordinate; a state is a pair of
//! chart functions (phi_plus, phi_minus) on the ball, paired by
//!
//! ```text
//! <f, g> = int_{B_R} (conj(f+) g+ + conj(f-) g-) / |eps_4| d^3 eps .
//! ```
//!
//! The stationary basis (Gegenbauer radial factor times a spherical
//! harmonic) lives in the exact polynomial class of [`crate::ball`], so
//! basis products, operator actions, and matrix elements all have a
//! closed-form path; sampled states fall back to hyperspherical or
//! box quadrature.

use std::f64::consts::PI;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::ball::{gegenbauer_parity_split, solid_harmonic, PolyCSum};
use crate::quadrature::gauss_legendre;
use crate::specfun::{gegenbauer, ln_gamma, sph_harm};
use crate::{C64, Error, QuantumNumbers, Result};

/// Physical constants of one model instance: sphere radius, Planck constant,
/// particle mass.  The derived wave number kappa = radius/hbar shows up in
/// every kernel argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub radius: f64,
    pub hbar: f64,
    pub mass: f64,
}

impl PhysicalParams {
    pub fn new(radius: f64, hbar: f64, mass: f64) -> crate::Result<Self> {
        if !(radius > 0.0 && hbar > 0.0 && mass > 0.0) {
            return Err(crate::Error::Domain(format!(
                "parameters must be positive: radius={radius}, hbar={hbar}, mass={mass}"
            )));
        }
        Ok(Self { radius, hbar, mass })
    }

    /// kappa = radius / hbar.
    pub fn kappa(&self) -> f64 {
        self.radius / self.hbar
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self { radius: 1.0, hbar: 1.0, mass: 1.0 }
    }
}

/// A point of the sphere: ball coordinates plus the chart sign, with
/// `eps_4 = chart * sqrt(R^2 - |eps|^2)`. Chart 0 marks the equatorial rim.
#[derive(Clone, Copy, Debug)]
pub struct ConfigPoint {
    eps: [f64; 3],
    chart: i8,
    radius: f64,
}

impl ConfigPoint {
    pub fn new(eps: [f64; 3], chart: i8, radius: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::Domain(format!("radius {radius} must be positive")));
        }
        let r = (eps[0] * eps[0] + eps[1] * eps[1] + eps[2] * eps[2]).sqrt();
        if r > radius * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("|eps| = {r} exceeds radius {radius}")));
        }
        let on_rim = (radius - r).abs() <= 1e-12 * radius;
        match chart {
            0 if !on_rim => Err(Error::Domain(
                "chart 0 is reserved for the equatorial rim |eps| = R".into(),
            )),
            -1 | 1 if on_rim => Err(Error::Domain(
                "points on the rim |eps| = R carry chart 0".into(),
            )),
            -1 | 0 | 1 => Ok(Self { eps, chart, radius }),
            c => Err(Error::Domain(format!("chart {c} not in {{-1, 0, 1}}"))),
        }
    }

    /// Hyperspherical angles: `chi` from the pole (`eps_4 = R cos chi`),
    /// then standard spherical `(theta, phi)` for the ball direction.
    pub fn from_hyperspherical(radius: f64, chi: f64, theta: f64, phi: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::Domain(format!("radius {radius} must be positive")));
        }
        if !(0.0..=PI).contains(&chi) || !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain(format!(
                "angles chi = {chi}, theta = {theta} outside [0, pi]"
            )));
        }
        let (sc, cc) = chi.sin_cos();
        let eps = [
            radius * sc * theta.sin() * phi.cos(),
            radius * sc * theta.sin() * phi.sin(),
            radius * sc * theta.cos(),
        ];
        let chart = if cc > 1e-14 {
            1
        } else if cc < -1e-14 {
            -1
        } else {
            0
        };
        Ok(Self { eps, chart, radius })
    }

    pub fn eps(&self) -> [f64; 3] {
        self.eps
    }

    pub fn chart(&self) -> i8 {
        self.chart
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eps_norm(&self) -> f64 {
        (self.eps[0] * self.eps[0] + self.eps[1] * self.eps[1] + self.eps[2] * self.eps[2]).sqrt()
    }

    pub fn eps4(&self) -> f64 {
        let s = (self.radius * self.radius
            - self.eps.iter().map(|v| v * v).sum::<f64>())
        .max(0.0)
        .sqrt();
        self.chart as f64 * s
    }

    /// Dimensionless ball coordinates `eps / R`.
    pub fn x(&self) -> [f64; 3] {
        [
            self.eps[0] / self.radius,
            self.eps[1] / self.radius,
            self.eps[2] / self.radius,
        ]
    }

    pub fn embedding(&self) -> [f64; 4] {
        [self.eps[0], self.eps[1], self.eps[2], self.eps4()]
    }

    pub fn hyperspherical(&self) -> (f64, f64, f64) {
        let chi = (self.eps4() / self.radius).clamp(-1.0, 1.0).acos();
        let r = self.eps_norm();
        let theta = if r == 0.0 {
            0.0
        } else {
            (self.eps[2] / r).clamp(-1.0, 1.0).acos()
        };
        let phi = self.eps[1].atan2(self.eps[0]);
        (chi, theta, phi)
    }
}

/// Sampler signature: chart sign (+1 or -1) and dimensionless `x = eps/R`.
pub type ChartFn = Rc<dyn Fn(i8, [f64; 3]) -> C64>;

/// Axis-aligned box in `x` units, used as a quadrature hint for localized
/// samplers.
#[derive(Clone, Copy, Debug)]
pub struct BoxSupport {
    pub center: [f64; 3],
    pub halfwidth: f64,
}

#[derive(Clone)]
enum Rep {
    Poly { plus: PolyCSum, minus: PolyCSum },
    Sampled { f: ChartFn, support: Option<BoxSupport> },
}

/// A state in the two-chart picture.
#[derive(Clone)]
pub struct ChartedWaveFunction {
    pub params: PhysicalParams,
    rep: Rep,
}

impl ChartedWaveFunction {
    /// Exact polynomial charts, functions of `x = eps/R`.
    pub fn from_charts(params: PhysicalParams, plus: PolyCSum, minus: PolyCSum) -> Self {
        Self { params, rep: Rep::Poly { plus, minus } }
    }

    pub fn from_sampler(params: PhysicalParams, f: ChartFn) -> Self {
        Self { params, rep: Rep::Sampled { f, support: None } }
    }

    /// Sampler known to vanish outside a box; products against it integrate
    /// over the box only.
    pub fn from_local_sampler(params: PhysicalParams, f: ChartFn, support: BoxSupport) -> Self {
        Self { params, rep: Rep::Sampled { f, support: Some(support) } }
    }

    pub fn is_poly(&self) -> bool {
        matches!(self.rep, Rep::Poly { .. })
    }

    pub fn chart_polys(&self) -> Option<(&PolyCSum, &PolyCSum)> {
        match &self.rep {
            Rep::Poly { plus, minus } => Some((plus, minus)),
            Rep::Sampled { .. } => None,
        }
    }

    fn support(&self) -> Option<BoxSupport> {
        match &self.rep {
            Rep::Poly { .. } => None,
            Rep::Sampled { support, .. } => *support,
        }
    }

    /// Value of the chart function; `chart = 0` reads the plus chart.
    pub fn eval_chart(&self, chart: i8, x: [f64; 3]) -> C64 {
        match &self.rep {
            Rep::Poly { plus, minus } => {
                if chart >= 0 {
                    plus.eval(x)
                } else {
                    minus.eval(x)
                }
            }
            Rep::Sampled { f, .. } => f(if chart >= 0 { 1 } else { -1 }, x),
        }
    }

    pub fn eval(&self, p: &ConfigPoint) -> C64 {
        self.eval_chart(p.chart(), p.x())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.params != other.params {
            return Err(Error::Domain("cannot add states with different parameters".into()));
        }
        match (&self.rep, &other.rep) {
            (Rep::Poly { plus: ap, minus: am }, Rep::Poly { plus: bp, minus: bm }) => {
                Ok(Self::from_charts(self.params, ap.add(bp), am.add(bm)))
            }
            _ => {
                let a = self.clone();
                let b = other.clone();
                Ok(Self::from_sampler(
                    self.params,
                    Rc::new(move |chart, x| a.eval_chart(chart, x) + b.eval_chart(chart, x)),
                ))
            }
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        match &self.rep {
            Rep::Poly { plus, minus } => {
                Self::from_charts(self.params, plus.scale(s), minus.scale(s))
            }
            Rep::Sampled { f, support } => {
                let f = f.clone();
                Self {
                    params: self.params,
                    rep: Rep::Sampled {
                        f: Rc::new(move |chart, x| s * f(chart, x)),
                        support: *support,
                    },
                }
            }
        }
    }
}

/// `2^l l! sqrt(2 (n+1) (n-l)! / (pi (n+l+1)!))`, the dimensionless
/// orthonormalization constant of the stationary basis (the state carries an
/// extra `1/R`).
pub fn norm_const_n(n: u32, l: u32) -> Result<f64> {
    if l > n {
        return Err(Error::Domain(format!("l = {l} exceeds n = {n}")));
    }
    let (nf, lf) = (n as f64, l as f64);
    let ln = lf * std::f64::consts::LN_2
        + ln_gamma(lf + 1.0)
        + 0.5 * ((2.0 * (nf + 1.0)).ln() + ln_gamma(nf - lf + 1.0) - PI.ln() - ln_gamma(nf + lf + 2.0));
    Ok(ln.exp())
}

/// Energy of the `n`-th level: `n (n + 2) / (2 m kappa^2)`.
pub fn hamiltonian_eigenvalue(qn: QuantumNumbers, params: &PhysicalParams) -> f64 {
    let k = params.kappa();
    (qn.n * (qn.n + 2)) as f64 / (2.0 * params.mass * k * k)
}

/// Pointwise stationary wavefunction
/// `(N_nl / R) (sin chi)^l C^{l+1}_{n-l}(cos chi) Y_lm(theta, phi)`.
pub fn stationary_wf(qn: QuantumNumbers, p: &ConfigPoint) -> Result<C64> {
    let (chi, theta, phi) = p.hyperspherical();
    let n_nl = norm_const_n(qn.n, qn.l)? / p.radius();
    let radial = chi.sin().powi(qn.l as i32)
        * gegenbauer(qn.n - qn.l, qn.l as f64 + 1.0, chi.cos())?;
    Ok(sph_harm(qn.l, qn.m, theta, phi)? * n_nl * radial)
}

/// The stationary state as exact polynomial charts.
///
/// With `S_lm` the solid harmonic and the Gegenbauer factor split by parity
/// of its argument, the two charts are `N (S E +- c S O)`; even `n - l`
/// states satisfy `minus = plus`, odd ones `minus = -plus`.
pub fn stationary_state(qn: QuantumNumbers, params: &PhysicalParams) -> Result<ChartedWaveFunction> {
    let s = solid_harmonic(qn.l, qn.m)?;
    let (even, odd) = gegenbauer_parity_split(qn.n - qn.l, qn.l as f64 + 1.0)?;
    let n_nl = C64::new(norm_const_n(qn.n, qn.l)? / params.radius, 0.0);
    let se = PolyCSum::from_poly(0, s.mul(&even).scale(n_nl));
    let so = PolyCSum::from_poly(1, s.mul(&odd).scale(n_nl));
    Ok(ChartedWaveFunction::from_charts(
        *params,
        se.add(&so),
        se.sub(&so),
    ))
}

/// Localized state approximating the position eigenstate at `eps0` on the
/// chart `sign`: a normalized Gaussian of width `smear` (truncated at five
/// widths) times `|eps_4|`, carried on that chart only, with the minus chart
/// taking a negative amplitude.
pub fn position_eigenstate(
    eps0: [f64; 3],
    sign: i8,
    smear: f64,
    params: &PhysicalParams,
) -> Result<ChartedWaveFunction> {
    let r0 = (eps0[0] * eps0[0] + eps0[1] * eps0[1] + eps0[2] * eps0[2]).sqrt();
    let radius = params.radius;
    if r0 >= radius {
        return Err(Error::Domain(format!("|eps0| = {r0} not inside the open ball of radius {radius}")));
    }
    if !(sign == 1 || sign == -1) {
        return Err(Error::Domain(format!("chart sign {sign} must be +1 or -1")));
    }
    if smear <= 0.0 {
        return Err(Error::Domain(format!("mollifier width {smear} must be positive")));
    }
    let amp = sign as f64; // the paper-side convention: minus chart carries -|eps_4| delta
    let norm = (2.0 * PI * smear * smear).powf(-1.5);
    let f: ChartFn = Rc::new(move |chart, x| {
        if chart != sign {
            return C64::new(0.0, 0.0);
        }
        let d2: f64 = (0..3).map(|i| (radius * x[i] - eps0[i]).powi(2)).sum();
        if d2 > (5.0 * smear) * (5.0 * smear) {
            return C64::new(0.0, 0.0);
        }
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let abs_eps4 = radius * (1.0 - r2).max(0.0).sqrt();
        C64::new(amp * abs_eps4 * norm * (-d2 / (2.0 * smear * smear)).exp(), 0.0)
    });
    Ok(ChartedWaveFunction::from_local_sampler(
        *params,
        f,
        BoxSupport {
            center: [eps0[0] / radius, eps0[1] / radius, eps0[2] / radius],
            halfwidth: 5.0 * smear / radius,
        },
    ))
}

/// Hyperspherical product grid: Gauss-Legendre in `chi` on `[0, pi/2]` and
/// in `cos theta`, uniform (trapezoid-exact) in `phi`.
#[derive(Clone, Copy, Debug)]
pub struct SphereGrid {
    pub n_chi: usize,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for SphereGrid {
    fn default() -> Self {
        Self { n_chi: 40, n_theta: 28, n_phi: 56 }
    }
}

impl SphereGrid {
    /// Nodes `x` in the unit ball with weights for the measure
    /// `d^3x / c = sin^2 chi  dchi dOmega`, one chart's worth.
    pub fn nodes(&self) -> Vec<([f64; 3], f64)> {
        let (chi_n, chi_w) = gauss_legendre(self.n_chi);
        let (u_n, u_w) = gauss_legendre(self.n_theta);
        let mut out = Vec::with_capacity(self.n_chi * self.n_theta * self.n_phi);
        for (chi_t, wc) in chi_n.iter().zip(&chi_w) {
            // map [-1, 1] -> [0, pi/2]
            let chi = (chi_t + 1.0) * PI / 4.0;
            let jacobian = PI / 4.0 * chi.sin() * chi.sin();
            for (u, wu) in u_n.iter().zip(&u_w) {
                let st = (1.0 - u * u).max(0.0).sqrt();
                for k in 0..self.n_phi {
                    let phi = 2.0 * PI * k as f64 / self.n_phi as f64;
                    let x = [chi.sin() * st * phi.cos(), chi.sin() * st * phi.sin(), chi.sin() * u];
                    let w = wc * jacobian * wu * 2.0 * PI / self.n_phi as f64;
                    out.push((x, w));
                }
            }
        }
        out
    }
}

/// `<f, g>` in the chart form. Exact coefficient arithmetic when both states
/// are polynomial; box quadrature when a sampler advertises local support;
/// the hyperspherical grid otherwise.
pub fn inner_product_c(f: &ChartedWaveFunction, g: &ChartedWaveFunction) -> Result<C64> {
    inner_product_c_with(f, g, &SphereGrid::default())
}

pub fn inner_product_c_with(
    f: &ChartedWaveFunction,
    g: &ChartedWaveFunction,
    grid: &SphereGrid,
) -> Result<C64> {
    if f.params != g.params {
        return Err(Error::Domain("inner product between different parameter sets".into()));
    }
    let r2 = f.params.radius * f.params.radius;
    if let (Rep::Poly { plus: fp, minus: fm }, Rep::Poly { plus: gp, minus: gm }) = (&f.rep, &g.rep)
    {
        let integrand = fp.conj().mul(gp).add(&fm.conj().mul(gm)).mul_c_pow(-1);
        return Ok(integrand.ball_moment()? * r2);
    }
    let support = match (f.support(), g.support()) {
        (Some(a), Some(b)) => {
            let mut lo = [0.0; 3];
            let mut hi = [0.0; 3];
            for i in 0..3 {
                lo[i] = (a.center[i] - a.halfwidth).max(b.center[i] - b.halfwidth);
                hi[i] = (a.center[i] + a.halfwidth).min(b.center[i] + b.halfwidth);
                if lo[i] >= hi[i] {
                    return Ok(C64::new(0.0, 0.0));
                }
            }
            Some((lo, hi))
        }
        (Some(a), None) | (None, Some(a)) => Some((
            [a.center[0] - a.halfwidth, a.center[1] - a.halfwidth, a.center[2] - a.halfwidth],
            [a.center[0] + a.halfwidth, a.center[1] + a.halfwidth, a.center[2] + a.halfwidth],
        )),
        (None, None) => None,
    };
    let chart_sum = |x: [f64; 3]| -> C64 {
        f.eval_chart(1, x).conj() * g.eval_chart(1, x) + f.eval_chart(-1, x).conj() * g.eval_chart(-1, x)
    };
    if let Some((lo, hi)) = support {
        // tensor Gauss-Legendre over the box, weight 1/c, nodes outside the
        // open unit ball skipped (the samplers are truncated there anyway)
        let n = 32;
        let (t, w) = gauss_legendre(n);
        let mut acc = C64::new(0.0, 0.0);
        let map = |i: usize, axis: usize| {
            let half = (hi[axis] - lo[axis]) / 2.0;
            (lo[axis] + half * (t[i] + 1.0), half * w[i])
        };
        for i in 0..n {
            let (x0, w0) = map(i, 0);
            for j in 0..n {
                let (x1, w1) = map(j, 1);
                for k in 0..n {
                    let (x2, w2) = map(k, 2);
                    let rr = x0 * x0 + x1 * x1 + x2 * x2;
                    if rr >= 1.0 - 1e-14 {
                        continue;
                    }
                    acc += chart_sum([x0, x1, x2]) * (w0 * w1 * w2 / (1.0 - rr).sqrt());
                }
            }
        }
        return Ok(acc * r2);
    }
    let mut acc = C64::new(0.0, 0.0);
    for (x, w) in grid.nodes() {
        acc += chart_sum(x) * w;
    }
    Ok(acc * r2)
}

/// Coordinate and symmetry operators in the chart representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfigOp {
    /// Multiplication by `eps_i`, `i` in 0..3.
    Eps(usize),
    /// Multiplication by `eps_4 = +- R c` (sign per chart).
    Eps4,
    /// `-(i/kappa) (eps_4 grad_i + (eps x grad)_i)` per chart.
    K(usize),
    /// `-(i hbar) (eps x grad)_i`.
    J(usize),
    /// `-(1 / 2 m kappa^2) [ (delta_ij - x_i x_j) d_i d_j - 3 x_i d_i ]`.
    H,
}

/// Apply an operator to a polynomial state. The polynomial class is closed
/// under every listed operator; `H` passes through `c^{-1}`, `c^{-3}`
/// intermediaries that [`PolyCSum::reduce`] reassembles exactly.
pub fn apply_config_op(op: ConfigOp, f: &ChartedWaveFunction) -> Result<ChartedWaveFunction> {
    let Some((plus, minus)) = f.chart_polys() else {
        return Err(Error::Domain("operators act on polynomial states; project samplers first".into()));
    };
    let p = &f.params;
    let per_chart = |g: &PolyCSum, sign: f64| -> PolyCSum {
        match op {
            ConfigOp::Eps(i) => g.mul_x(i).scale(C64::new(p.radius, 0.0)),
            ConfigOp::Eps4 => g.mul_c_pow(1).scale(C64::new(sign * p.radius, 0.0)),
            ConfigOp::J(i) => g.x_cross_grad(i).scale(C64::new(0.0, -p.hbar)),
            ConfigOp::K(i) => {
                let radial = g.dx(i).mul_c_pow(1).scale(C64::new(sign, 0.0));
                radial.add(&g.x_cross_grad(i)).scale(C64::new(0.0, -1.0 / p.kappa())).reduce()
            }
            ConfigOp::H => {
                let mut bracket = PolyCSum::zero();
                for i in 0..3 {
                    let di = g.dx(i);
                    bracket = bracket.add(&di.dx(i));
                    bracket = bracket.sub(&di.mul_x(i).scale(C64::new(3.0, 0.0)));
                    for j in 0..3 {
                        bracket = bracket.sub(&di.dx(j).mul_x(j).mul_x(i));
                    }
                }
                let k = p.kappa();
                bracket.scale(C64::new(-1.0 / (2.0 * p.mass * k * k), 0.0)).reduce()
            }
        }
    };
    match op {
        ConfigOp::Eps(i) | ConfigOp::J(i) if i > 2 => {
            return Err(Error::Domain(format!("component index {i} out of range")))
        }
        ConfigOp::K(i) if i > 2 => {
            return Err(Error::Domain(format!("component index {i} out of range")))
        }
        _ => {}
    }
    Ok(ChartedWaveFunction::from_charts(
        *p,
        per_chart(plus, 1.0),
        per_chart(minus, -1.0),
    ))
}

/// Chart swap `(f+, f-) -> (f-, f+)`, the reflection `eps_4 -> -eps_4`.
pub fn reflect(f: &ChartedWaveFunction) -> ChartedWaveFunction {
    match &f.rep {
        Rep::Poly { plus, minus } => {
            ChartedWaveFunction::from_charts(f.params, minus.clone(), plus.clone())
        }
        Rep::Sampled { f: s, support } => {
            let s = s.clone();
            ChartedWaveFunction {
                params: f.params,
                rep: Rep::Sampled {
                    f: Rc::new(move |chart, x| s(-chart, x)),
                    support: *support,
                },
            }
        }
    }
}

/// `(I + reflect) / 2`.
pub fn project_even(f: &ChartedWaveFunction) -> Result<ChartedWaveFunction> {
    Ok(f.add(&reflect(f))?.scale(C64::new(0.5, 0.0)))
}

/// `(I - reflect) / 2`.
pub fn project_odd(f: &ChartedWaveFunction) -> Result<ChartedWaveFunction> {
    Ok(f.add(&reflect(f).scale(C64::new(-1.0, 0.0)))?.scale(C64::new(0.5, 0.0)))
}

/// Multiplication by the sign of `eps_4`: `(f+, f-) -> (f+, -f-)`.
pub fn sign_op(f: &ChartedWaveFunction) -> ChartedWaveFunction {
    match &f.rep {
        Rep::Poly { plus, minus } => ChartedWaveFunction::from_charts(
            f.params,
            plus.clone(),
            minus.scale(C64::new(-1.0, 0.0)),
        ),
        Rep::Sampled { f: s, support } => {
            let s = s.clone();
            ChartedWaveFunction {
                params: f.params,
                rep: Rep::Sampled {
                    f: Rc::new(move |chart, x| {
                        let v = s(chart, x);
                        if chart < 0 {
                            -v
                        } else {
                            v
                        }
                    }),
                    support: *support,
                },
            }
        }
    }
}

/// Multiplication of both charts by `|eps_4| = R sqrt(1 - |x|^2)`.
pub fn abs_eps4_op(f: &ChartedWaveFunction) -> ChartedWaveFunction {
    let radius = f.params.radius;
    match &f.rep {
        Rep::Poly { plus, minus } => ChartedWaveFunction::from_charts(
            f.params,
            plus.mul_c_pow(1).scale(C64::new(radius, 0.0)),
            minus.mul_c_pow(1).scale(C64::new(radius, 0.0)),
        ),
        Rep::Sampled { f: s, support } => {
            let s = s.clone();
            ChartedWaveFunction {
                params: f.params,
                rep: Rep::Sampled {
                    f: Rc::new(move |chart, x| {
                        let r2: f64 = x.iter().map(|v| v * v).sum();
                        s(chart, x) * (radius * (1.0 - r2).max(0.0).sqrt())
                    }),
                    support: *support,
                },
            }
        }
    }
}

/// `<psi_qn1, Op psi_qn2>` by exact coefficient arithmetic.
pub fn op_matrix_element(
    op: ConfigOp,
    qn1: QuantumNumbers,
    qn2: QuantumNumbers,
    params: &PhysicalParams,
) -> Result<C64> {
    let bra = stationary_state(qn1, params)?;
    let ket = apply_config_op(op, &stationary_state(qn2, params)?)?;
    inner_product_c(&bra, &ket)
}

/// A state expanded over the stationary basis; the JSON wire format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisExpansion {
    pub params: PhysicalParams,
    pub coeffs: Vec<BasisCoeff>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BasisCoeff {
    pub n: u32,
    pub l: u32,
    pub m: i32,
    pub re: f64,
    pub im: f64,
}

impl BasisExpansion {
    pub fn to_wavefunction(&self) -> Result<ChartedWaveFunction> {
        let mut plus = PolyCSum::zero();
        let mut minus = PolyCSum::zero();
        for c in &self.coeffs {
            let qn = QuantumNumbers::new(c.n, c.l, c.m)?;
            let state = stationary_state(qn, &self.params)?;
            let (sp, sm) = state.chart_polys().expect("stationary states are polynomial");
            let z = C64::new(c.re, c.im);
            plus = plus.add(&sp.scale(z));
            minus = minus.add(&sm.scale(z));
        }
        Ok(ChartedWaveFunction::from_charts(self.params, plus, minus))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.re * c.re + c.im * c.im).sum()
    }
}

/// Project a state onto the stationary basis through `n <= n_max` by
/// quadrature (exact products when the state is polynomial).
pub fn project_onto_basis(
    f: &ChartedWaveFunction,
    n_max: u32,
    grid: &SphereGrid,
) -> Result<BasisExpansion> {
    let mut coeffs = Vec::new();
    for qn in QuantumNumbers::modes_up_to(n_max) {
        let basis = stationary_state(qn, &f.params)?;
        let c = if f.is_poly() {
            inner_product_c(&basis, f)?
        } else {
            inner_product_c_with(&basis, f, grid)?
        };
        coeffs.push(BasisCoeff { n: qn.n, l: qn.l, m: qn.m, re: c.re, im: c.im });
    }
    Ok(BasisExpansion { params: f.params, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn qn(n: u32, l: u32, m: i32) -> QuantumNumbers {
        QuantumNumbers::new(n, l, m).unwrap()
    }

    #[test]
    fn point_round_trip_and_validation() {
        let p = ConfigPoint::from_hyperspherical(2.0, 1.1, 0.7, -2.0).unwrap();
        let (chi, theta, phi) = p.hyperspherical();
        assert_abs_diff_eq!(chi, 1.1, epsilon = 1e-13);
        assert_abs_diff_eq!(theta, 0.7, epsilon = 1e-13);
        assert_abs_diff_eq!(phi, -2.0, epsilon = 1e-13);
        let q = ConfigPoint::new(p.eps(), p.chart(), 2.0).unwrap();
        assert_abs_diff_eq!(q.eps4(), 2.0 * 1.1f64.cos(), epsilon = 1e-13);
        // lower chart
        let low = ConfigPoint::from_hyperspherical(1.0, 2.6, 0.4, 0.1).unwrap();
        assert_eq!(low.chart(), -1);
        assert!(low.eps4() < 0.0);
        // rim
        let rim = ConfigPoint::from_hyperspherical(1.0, PI / 2.0, 1.0, 1.0).unwrap();
        assert_eq!(rim.chart(), 0);
        assert!(ConfigPoint::new([1.5, 0.0, 0.0], 1, 1.0).is_err());
        assert!(ConfigPoint::new([0.3, 0.0, 0.0], 0, 1.0).is_err());
        assert!(ConfigPoint::new([1.0, 0.0, 0.0], 1, 1.0).is_err());
        assert!(ConfigPoint::new([1.0, 0.0, 0.0], 0, 1.0).is_ok());
    }

    #[test]
    fn stationary_polynomials_match_pointwise_form() {
        let params = PhysicalParams::default();
        for (n, l, m) in [(0, 0, 0), (1, 0, 0), (1, 1, -1), (2, 1, 1), (3, 2, -2), (4, 0, 0)] {
            let state = stationary_state(qn(n, l, m), &params).unwrap();
            for &(chi, theta, phi) in
                &[(0.4f64, 1.0f64, 0.3f64), (2.2, 2.8, -1.4), (1.5707963, 0.2, 2.0)]
            {
                let pt = ConfigPoint::from_hyperspherical(1.0, chi, theta, phi).unwrap();
                let direct = stationary_wf(qn(n, l, m), &pt).unwrap();
                let poly = state.eval(&pt);
                assert!(
                    (direct - poly).norm() < 1e-12,
                    "mismatch at n={n} l={l} m={m}: {direct} vs {poly}"
                );
            }
        }
        // pinned values: psi_000 = N_00 / sqrt(4 pi), N_00 = sqrt(2/pi)
        let pt = ConfigPoint::from_hyperspherical(1.0, 0.9, 0.5, 0.5).unwrap();
        let v = stationary_wf(qn(0, 0, 0), &pt).unwrap();
        assert_abs_diff_eq!(v.re, (2.0 / PI).sqrt() / (4.0 * PI).sqrt(), epsilon = 1e-14);
        // psi_110 at chi = pi/2, theta = 0: N_11 sqrt(3/(4 pi))
        let pt = ConfigPoint::from_hyperspherical(1.0, PI / 2.0, 0.0, 0.0).unwrap();
        let v = stationary_wf(qn(1, 1, 0), &pt).unwrap();
        let n11 = norm_const_n(1, 1).unwrap();
        assert_abs_diff_eq!(v.re, n11 * (3.0 / (4.0 * PI)).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(n11, 2.0 * (4.0 / (6.0 * PI)).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(norm_const_n(0, 0).unwrap(), (2.0 / PI).sqrt(), epsilon = 1e-14);
        assert!(norm_const_n(1, 2).is_err());
    }

    #[test]
    fn basis_is_orthonormal_exactly() {
        let params = PhysicalParams::new(1.7, 1.0, 1.0).unwrap();
        let modes = QuantumNumbers::modes_up_to(3);
        let states: Vec<_> = modes
            .iter()
            .map(|&q| stationary_state(q, &params).unwrap())
            .collect();
        for (a, sa) in states.iter().enumerate() {
            for (b, sb) in states.iter().enumerate() {
                let g = inner_product_c(sa, sb).unwrap();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (g - C64::new(want, 0.0)).norm() < 1e-12,
                    "gram({:?}, {:?}) = {g}",
                    modes[a],
                    modes[b]
                );
            }
        }
    }

    #[test]
    fn quadrature_product_matches_exact() {
        let params = PhysicalParams::default();
        let pairs = [
            (qn(2, 1, 1), qn(2, 1, 1)),
            (qn(3, 2, -1), qn(3, 2, -1)),
            (qn(2, 0, 0), qn(4, 0, 0)),
        ];
        let grid = SphereGrid::default();
        for (a, b) in pairs {
            let sa = stationary_state(a, &params).unwrap();
            let sb = stationary_state(b, &params).unwrap();
            let exact = inner_product_c(&sa, &sb).unwrap();
            // route one argument through a sampler to force the grid path
            let sb2 = sb.clone();
            let sampled = ChartedWaveFunction::from_sampler(
                params,
                Rc::new(move |chart, x| sb2.eval_chart(chart, x)),
            );
            let quad = inner_product_c_with(&sa, &sampled, &grid).unwrap();
            assert!((exact - quad).norm() < 1e-12, "quadrature off: {exact} vs {quad}");
        }
    }

    #[test]
    fn eigen_equations_hold_exactly() {
        let params = PhysicalParams::new(1.3, 0.7, 2.0).unwrap();
        for (n, l, m) in [(0, 0, 0), (1, 1, 0), (2, 1, -1), (3, 2, 2), (3, 0, 0)] {
            let q = qn(n, l, m);
            let state = stationary_state(q, &params).unwrap();
            let (sp, sm) = state.chart_polys().unwrap();

            let h = apply_config_op(ConfigOp::H, &state).unwrap();
            let (hp, hm) = h.chart_polys().unwrap();
            let lambda = C64::new(hamiltonian_eigenvalue(q, &params), 0.0);
            assert!(hp.approx_eq_function(&sp.scale(lambda), 1e-12), "H+ at {q:?}");
            assert!(hm.approx_eq_function(&sm.scale(lambda), 1e-12), "H- at {q:?}");

            let jz = apply_config_op(ConfigOp::J(2), &state).unwrap();
            let (jp, jm) = jz.chart_polys().unwrap();
            let mu = C64::new(m as f64 * params.hbar, 0.0);
            assert!(jp.approx_eq_function(&sp.scale(mu), 1e-12), "Jz+ at {q:?}");
            assert!(jm.approx_eq_function(&sm.scale(mu), 1e-12), "Jz- at {q:?}");
        }
    }

    #[test]
    fn position_operator_identity() {
        // sum eps_i^2 + eps_4^2 = R^2 on the nose
        let params = PhysicalParams::new(1.7, 1.0, 1.0).unwrap();
        let state = stationary_state(qn(2, 1, -1), &params).unwrap();
        let mut acc = ChartedWaveFunction::from_charts(params, PolyCSum::zero(), PolyCSum::zero());
        for i in 0..3 {
            let ei = apply_config_op(ConfigOp::Eps(i), &state).unwrap();
            acc = acc.add(&apply_config_op(ConfigOp::Eps(i), &ei).unwrap()).unwrap();
        }
        let e4 = apply_config_op(ConfigOp::Eps4, &state).unwrap();
        acc = acc.add(&apply_config_op(ConfigOp::Eps4, &e4).unwrap()).unwrap();
        let r2 = C64::new(params.radius * params.radius, 0.0);
        let (ap, am) = acc.chart_polys().unwrap();
        let (sp, sm) = state.chart_polys().unwrap();
        assert!(ap.approx_eq_function(&sp.scale(r2), 1e-13));
        assert!(am.approx_eq_function(&sm.scale(r2), 1e-13));
    }

    #[test]
    fn parity_structure_and_projectors() {
        let params = PhysicalParams::default();
        for (n, l, m) in [(2, 0, 0), (3, 2, 1), (3, 1, 0), (4, 1, -1)] {
            let state = stationary_state(qn(n, l, m), &params).unwrap();
            let refl = reflect(&state);
            let sign = if (n - l) % 2 == 0 { 1.0 } else { -1.0 };
            let (rp, rm) = refl.chart_polys().unwrap();
            let (sp, sm) = state.chart_polys().unwrap();
            assert!(rp.approx_eq_function(&sp.scale(C64::new(sign, 0.0)), 1e-13));
            assert!(rm.approx_eq_function(&sm.scale(C64::new(sign, 0.0)), 1e-13));
        }
        // projectors resolve the identity pointwise on a sampler
        let f = ChartedWaveFunction::from_sampler(
            params,
            Rc::new(|chart, x| C64::new(x[0] + 0.2 * chart as f64, x[1] * x[2])),
        );
        let even = project_even(&f).unwrap();
        let odd = project_odd(&f).unwrap();
        let back = even.add(&odd).unwrap();
        for x in [[0.1, 0.2, 0.3], [-0.5, 0.0, 0.4]] {
            for chart in [1i8, -1] {
                assert_abs_diff_eq!(
                    (back.eval_chart(chart, x) - f.eval_chart(chart, x)).norm(),
                    0.0,
                    epsilon = 1e-15
                );
            }
        }
        // eps_4 flips parity: <psi_000, eps4 psi_000> = 0
        let ground = stationary_state(qn(0, 0, 0), &params).unwrap();
        let moved = apply_config_op(ConfigOp::Eps4, &ground).unwrap();
        let overlap = inner_product_c(&ground, &moved).unwrap();
        assert!(overlap.norm() < 1e-15);
    }

    #[test]
    fn matrix_element_examples() {
        let params = PhysicalParams::default();
        let h = op_matrix_element(ConfigOp::H, qn(1, 0, 0), qn(1, 0, 0), &params).unwrap();
        assert_abs_diff_eq!(h.re, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(h.im, 0.0, epsilon = 1e-15);
        let j3 = op_matrix_element(ConfigOp::J(2), qn(1, 1, 1), qn(1, 1, 1), &params).unwrap();
        assert_abs_diff_eq!(j3.re, 1.0, epsilon = 1e-12);
        let e4 = op_matrix_element(ConfigOp::Eps4, qn(0, 0, 0), qn(0, 0, 0), &params).unwrap();
        assert!(e4.norm() < 1e-15);
        // hermiticity through the weighted product
        for op in [ConfigOp::Eps(0), ConfigOp::Eps4, ConfigOp::J(2), ConfigOp::H, ConfigOp::K(1)] {
            let ab = op_matrix_element(op, qn(2, 1, 0), qn(3, 1, 0), &params).unwrap();
            let ba = op_matrix_element(op, qn(3, 1, 0), qn(2, 1, 0), &params).unwrap();
            assert!(
                (ab - ba.conj()).norm() < 1e-12,
                "{op:?} not hermitian: {ab} vs {ba}"
            );
        }
    }

    #[test]
    fn localized_states_evaluate_the_chart() {
        let params = PhysicalParams::default();
        let eps0 = [0.25, -0.1, 0.3];
        let plus_state = position_eigenstate(eps0, 1, 0.08, &params).unwrap();
        let minus_state = position_eigenstate(eps0, -1, 0.08, &params).unwrap();
        // disjoint charts never overlap
        let cross = inner_product_c(&plus_state, &minus_state).unwrap();
        assert!(cross.norm() < 1e-15);
        // mollified evaluation of the plus chart, Richardson in the width
        let target = stationary_state(qn(1, 1, 0), &params).unwrap();
        let value = |w: f64| {
            let probe = position_eigenstate(eps0, 1, w, &params).unwrap();
            inner_product_c(&probe, &target).unwrap()
        };
        let coarse = value(0.1);
        let fine = value(0.05);
        let extrapolated = (fine * 4.0 - coarse) / 3.0;
        let pt = ConfigPoint::new(eps0, 1, 1.0).unwrap();
        let direct = target.eval(&pt);
        assert!(
            (extrapolated - direct).norm() < 2e-4,
            "mollified evaluation {extrapolated} vs direct {direct}"
        );
        assert!(position_eigenstate([1.2, 0.0, 0.0], 1, 0.1, &params).is_err());
        assert!(position_eigenstate(eps0, 0, 0.1, &params).is_err());
    }

    #[test]
    fn expansion_serde_and_projection() {
        let params = PhysicalParams::default();
        let expansion = BasisExpansion {
            params,
            coeffs: vec![
                BasisCoeff { n: 1, l: 0, m: 0, re: 0.8, im: 0.0 },
                BasisCoeff { n: 2, l: 1, m: 1, re: 0.0, im: 0.3 },
            ],
        };
        let json = serde_json::to_string(&expansion).unwrap();
        let back: BasisExpansion = serde_json::from_str(&json).unwrap();
        assert_eq!(back.coeffs.len(), 2);
        assert_abs_diff_eq!(back.coeffs[1].im, 0.3, epsilon = 0.0);

        let f = expansion.to_wavefunction().unwrap();
        let projected = project_onto_basis(&f, 3, &SphereGrid::default()).unwrap();
        for c in &projected.coeffs {
            let want = match (c.n, c.l, c.m) {
                (1, 0, 0) => C64::new(0.8, 0.0),
                (2, 1, 1) => C64::new(0.0, 0.3),
                _ => C64::new(0.0, 0.0),
            };
            assert!(
                (C64::new(c.re, c.im) - want).norm() < 1e-12,
                "coefficient ({}, {}, {}) off",
                c.n,
                c.l,
                c.m
            );
        }
        assert_abs_diff_eq!(projected.norm_sqr(), 0.64 + 0.09, epsilon = 1e-12);
    }
}
