//! Free motion on the sphere, classical and quantum.
//!
//! Classically a free particle follows great circles: in the embedding
//! coordinates `E = (eps, eps_4)` the flow is a rotation in the plane of
//! `E(0)` and `Edot(0)`, with angular frequency `omega = |Edot| / R`
//! ([`geodesic_flow`]).  The conserved quantities of the left action,
//! `theta^i = (eps_4 epsdot^i - eps^i epsdot_4 + (epsdot x eps)^i) / R`,
//! double as a regression check on every trajectory.
//!
//! The full symmetry is a central extension of `R^4 x| SU(2)`; its group
//! law ([`group_compose`]) acts on `(eps, chart)` by quaternion
//! multiplication, on the momenta `(pi_4, pi)` by a rotated translation,
//! and on the `U(1)` phase by a cocycle with parameter `kappa = R / hbar`.
//!
//! Quantum mechanically the free Hamiltonian is diagonal in the stationary
//! basis with levels `n (n + 2) / (2 m kappa^2)` ([`energy_level`]), so time
//! evolution is a phase per mode ([`evolve_spectral`]);
//! [`evolve_consistency_check`] replays the same evolution through the
//! momentum picture and reports the mismatch.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config_space::{inner_product_c, BasisCoeff, BasisExpansion, PhysicalParams};
use crate::fourier_bridge::{forward_ft, inverse_ft};
use crate::momentum_space::{inner_product_m_spectral, stationary_state_m, CauchyData};
use crate::{C64, Error, QuantumNumbers, Result};

/// Quaternion as (scalar, vector), the double cover bookkeeping for the
/// position sector.
type Quat = (f64, [f64; 3]);

fn qmul(a: Quat, b: Quat) -> Quat {
    let (s, u) = a;
    let (t, v) = b;
    (
        s * t - u[0] * v[0] - u[1] * v[1] - u[2] * v[2],
        [
            s * v[0] + t * u[0] + u[1] * v[2] - u[2] * v[1],
            s * v[1] + t * u[1] + u[2] * v[0] - u[0] * v[2],
            s * v[2] + t * u[2] + u[0] * v[1] - u[1] * v[0],
        ],
    )
}

fn qconj(q: Quat) -> Quat {
    (q.0, [-q.1[0], -q.1[1], -q.1[2]])
}

/// Element of the extended symmetry group: a point of the sphere (ball
/// coordinates plus chart sign), a four-momentum, and a central phase.
#[derive(Clone, Copy, Debug)]
pub struct GroupElement {
    pub eps: [f64; 3],
    /// Sign of `eps_4`; the equator is a measure-zero edge carried as `+1`.
    pub chart: i8,
    pub pi: [f64; 3],
    pub pi4: f64,
    pub zeta: C64,
}

impl GroupElement {
    pub fn new(
        eps: [f64; 3],
        chart: i8,
        pi: [f64; 3],
        pi4: f64,
        zeta: C64,
        radius: f64,
    ) -> Result<Self> {
        if !(chart == 1 || chart == -1) {
            return Err(Error::Domain(format!("chart sign {chart} must be +1 or -1")));
        }
        let r = (eps[0] * eps[0] + eps[1] * eps[1] + eps[2] * eps[2]).sqrt();
        if r > radius * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("|eps| = {r} exceeds the radius {radius}")));
        }
        let zn = zeta.norm();
        if (zn - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("|zeta| = {zn} is not on the unit circle")));
        }
        Ok(Self { eps, chart, pi, pi4, zeta: zeta / zn })
    }

    pub fn identity() -> Self {
        Self {
            eps: [0.0; 3],
            chart: 1,
            pi: [0.0; 3],
            pi4: 0.0,
            zeta: C64::new(1.0, 0.0),
        }
    }

    /// Signed fourth coordinate.
    pub fn eps4(&self, radius: f64) -> f64 {
        let r2: f64 = self.eps.iter().map(|v| v * v).sum();
        self.chart as f64 * (radius * radius - r2).max(0.0).sqrt()
    }

    /// The unit quaternion `(eps_4 + eps . i) / R` of the position sector.
    fn unit_quat(&self, radius: f64) -> Quat {
        (
            self.eps4(radius) / radius,
            [self.eps[0] / radius, self.eps[1] / radius, self.eps[2] / radius],
        )
    }
}

/// Compose two elements, first argument acting from the left.
///
/// Position sectors multiply as unit quaternions (which is the literal
/// composition rule with signed `eps_4`), the momentum quaternion
/// `P = (pi_4, pi)` transports as `P'' = P' + u' P`, and the central phase
/// picks up the cocycle `exp(-i kappa (Sc(u' P) - pi_4))`.
pub fn group_compose(g1: &GroupElement, g2: &GroupElement, params: &PhysicalParams) -> GroupElement {
    let r = params.radius;
    let u1 = g1.unit_quat(r);
    let u2 = g2.unit_quat(r);
    let (sc, vec) = qmul(u1, u2);
    let rot = qmul(u1, (g2.pi4, g2.pi));
    let phase = -params.kappa() * (rot.0 - g2.pi4);
    GroupElement {
        eps: [r * vec[0], r * vec[1], r * vec[2]],
        chart: if sc >= 0.0 { 1 } else { -1 },
        pi: [g1.pi[0] + rot.1[0], g1.pi[1] + rot.1[1], g1.pi[2] + rot.1[2]],
        pi4: g1.pi4 + rot.0,
        zeta: g1.zeta * g2.zeta * C64::from_polar(1.0, phase),
    }
}

/// The two-sided inverse under [`group_compose`].
pub fn group_inverse(g: &GroupElement, params: &PhysicalParams) -> GroupElement {
    let r = params.radius;
    let rot = qmul(qconj(g.unit_quat(r)), (g.pi4, g.pi));
    GroupElement {
        eps: [-g.eps[0], -g.eps[1], -g.eps[2]],
        chart: g.chart,
        pi: [-rot.1[0], -rot.1[1], -rot.1[2]],
        pi4: -rot.0,
        // cancels the cocycle of inverse * g
        zeta: g.zeta.conj() * C64::from_polar(1.0, params.kappa() * (rot.0 - g.pi4)),
    }
}

/// One point of a geodesic, with the conserved frame velocities along.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GeodesicPoint {
    pub t: f64,
    pub eps: [f64; 3],
    /// Signed; its sign is the chart flag of the point.
    pub eps4: f64,
    pub epsdot: [f64; 3],
    pub eps4dot: f64,
    /// Conserved quantities of the flow.
    pub theta: [f64; 3],
}

impl GeodesicPoint {
    pub fn chart(&self) -> i8 {
        if self.eps4 >= 0.0 {
            1
        } else {
            -1
        }
    }
}

/// The conserved frame velocities
/// `theta^i = (eps_4 epsdot^i - eps^i epsdot_4 + (epsdot x eps)^i) / R`.
pub fn noether_theta(
    eps: [f64; 3],
    eps4: f64,
    epsdot: [f64; 3],
    eps4dot: f64,
    radius: f64,
) -> [f64; 3] {
    let cross = [
        epsdot[1] * eps[2] - epsdot[2] * eps[1],
        epsdot[2] * eps[0] - epsdot[0] * eps[2],
        epsdot[0] * eps[1] - epsdot[1] * eps[0],
    ];
    [
        (eps4 * epsdot[0] - eps[0] * eps4dot + cross[0]) / radius,
        (eps4 * epsdot[1] - eps[1] * eps4dot + cross[1]) / radius,
        (eps4 * epsdot[2] - eps[2] * eps4dot + cross[2]) / radius,
    ]
}

/// Angular frequency of the great-circle motion, from the chart metric:
/// `omega = sqrt(|epsdot|^2 + (eps . epsdot)^2 / eps_4^2) / R`, which equals
/// the embedding speed over `R`.
pub fn geodesic_frequency(eps0: [f64; 3], epsdot0: [f64; 3], params: &PhysicalParams) -> Result<f64> {
    let r = params.radius;
    let r2: f64 = eps0.iter().map(|v| v * v).sum();
    if r2 >= r * r {
        return Err(Error::Domain(format!(
            "initial position with |eps|^2 = {r2} is not strictly inside the chart"
        )));
    }
    let dot: f64 = (0..3).map(|i| eps0[i] * epsdot0[i]).sum();
    let v2: f64 = epsdot0.iter().map(|v| v * v).sum();
    Ok((v2 + dot * dot / (r * r - r2)).sqrt() / r)
}

/// Evaluate the geodesic through `(eps0, epsdot0)` (started on the upper
/// chart) at time `t`.  The motion may leave the chart; the returned point
/// carries the signed `eps_4`, so the chart flag travels with it.
pub fn geodesic_flow(
    eps0: [f64; 3],
    epsdot0: [f64; 3],
    t: f64,
    params: &PhysicalParams,
) -> Result<GeodesicPoint> {
    let r = params.radius;
    let omega = geodesic_frequency(eps0, epsdot0, params)?;
    let r2: f64 = eps0.iter().map(|v| v * v).sum();
    let eps4 = (r * r - r2).sqrt();
    let dot: f64 = (0..3).map(|i| eps0[i] * epsdot0[i]).sum();
    let eps4dot = -dot / eps4;
    let e = [eps0[0], eps0[1], eps0[2], eps4];
    let de = [epsdot0[0], epsdot0[1], epsdot0[2], eps4dot];
    let (cos, sin_over, dsin) = if omega == 0.0 {
        (1.0, t, 0.0)
    } else {
        ((omega * t).cos(), (omega * t).sin() / omega, omega * (omega * t).sin())
    };
    let mut pos = [0.0; 4];
    let mut vel = [0.0; 4];
    for i in 0..4 {
        pos[i] = e[i] * cos + de[i] * sin_over;
        vel[i] = -e[i] * dsin + de[i] * cos;
    }
    let eps = [pos[0], pos[1], pos[2]];
    let epsdot = [vel[0], vel[1], vel[2]];
    Ok(GeodesicPoint {
        t,
        eps,
        eps4: pos[3],
        epsdot,
        eps4dot: vel[3],
        theta: noether_theta(eps, pos[3], epsdot, vel[3], r),
    })
}

/// Uniform sampling of a geodesic on `[0, t_max]`, `steps + 1` points.
pub fn geodesic_trajectory(
    eps0: [f64; 3],
    epsdot0: [f64; 3],
    t_max: f64,
    steps: usize,
    params: &PhysicalParams,
) -> Result<Vec<GeodesicPoint>> {
    if steps == 0 {
        return Err(Error::Domain("need at least one step".into()));
    }
    (0..=steps)
        .map(|k| geodesic_flow(eps0, epsdot0, t_max * k as f64 / steps as f64, params))
        .collect()
}

/// CSV rows `t, eps1..eps3, eps4, theta1..theta3` of a trajectory.
pub fn trajectory_csv(points: &[GeodesicPoint]) -> String {
    let mut out = String::from("t,eps1,eps2,eps3,eps4,theta1,theta2,theta3\n");
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.t, p.eps[0], p.eps[1], p.eps[2], p.eps4, p.theta[0], p.theta[1], p.theta[2]
        )
        .expect("string write");
    }
    out
}

/// Energy of the `n`-th level, `n (n + 2) / (2 mass kappa^2)`.
pub fn energy_level(n: u32, params: &PhysicalParams) -> f64 {
    let k = params.kappa();
    (n * (n + 2)) as f64 / (2.0 * params.mass * k * k)
}

/// Free evolution in the stationary basis: each coefficient turns by
/// `exp(-i E_n t / hbar)`.
pub fn evolve_spectral(s: &BasisExpansion, t: f64) -> BasisExpansion {
    let coeffs = s
        .coeffs
        .iter()
        .map(|c| {
            let z = C64::new(c.re, c.im)
                * C64::from_polar(1.0, -energy_level(c.n, &s.params) * t / s.params.hbar);
            BasisCoeff { n: c.n, l: c.l, m: c.m, re: z.re, im: z.im }
        })
        .collect();
    BasisExpansion { params: s.params, coeffs }
}

/// Replay the evolution through the momentum picture and compare.
///
/// One path evolves the coefficients directly.  The other builds the chart
/// wave function, crosses to Cauchy data, projects onto the stationary
/// family there (under the diagonal pairing), turns each mode by its phase,
/// and crosses back.  Returns the relative chart-norm mismatch of the two
/// results at time `t`.
pub fn evolve_consistency_check(s: &BasisExpansion, t: f64) -> Result<f64> {
    let mut n_max = 0;
    for c in &s.coeffs {
        if c.n > 3 {
            return Err(Error::Domain(format!(
                "mode n = {} out of range; the cross-picture replay is kept to n <= 3",
                c.n
            )));
        }
        n_max = n_max.max(c.n);
    }
    let params = s.params;
    let data = forward_ft(&s.to_wavefunction()?)?;
    let mut evolved: Option<CauchyData> = None;
    for qn in QuantumNumbers::modes_up_to(n_max) {
        let basis = stationary_state_m(qn, &params)?;
        let c = inner_product_m_spectral(&basis, &data)?;
        let turned = c * C64::from_polar(1.0, -energy_level(qn.n, &params) * t / params.hbar);
        let term = basis.scale(turned);
        evolved = Some(match evolved {
            Some(acc) => acc.add(&term)?,
            None => term,
        });
    }
    let via_momentum = inverse_ft(&evolved.expect("at least one mode"))?;
    let direct = evolve_spectral(s, t).to_wavefunction()?;
    let norm2 = inner_product_c(&direct, &direct)?.re;
    if norm2 <= 0.0 {
        return Err(Error::Domain("zero-norm state".into()));
    }
    let diff = via_momentum.add(&direct.scale(C64::new(-1.0, 0.0)))?;
    Ok((inner_product_c(&diff, &diff)?.re.max(0.0) / norm2).sqrt())
}
