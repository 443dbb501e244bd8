//! Radial Bessel kernels and their band-limited Fourier multipliers.
//!
//! The family `k_alpha(r) = J_alpha(r) / r^alpha` is closed under
//! convolution: in dimension `d` its Fourier transform is the compactly
//! supported multiplier `N_{alpha-d/2} (1 - x^2)_+^{alpha-d/2}`, so a
//! convolution of two members is another member times an explicit constant.
//! Two members of the family, suitably scaled, realize the `|eps_4|` and
//! `1/|eps_4|` weights that appear in the sphere inner products, which is why
//! everything downstream leans on the identities checked here.
//!
//! Also hosts the small dense linear-algebra helpers used to express
//! adjoints with respect to a weighted (Gram-matrix) inner product.

use crate::quadrature::{
    bessel_product_integral, integrate_1d, integrate_oscillatory_bessel, ProductWeight,
};
use crate::specfun::{bessel_j, n_alpha, ramp_power};
use crate::{ball::PolyCSum, C64, Error, Result};

/// The kernel `k_alpha(r) = J_alpha(r) / r^alpha` viewed in `dim` dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialKernel {
    pub alpha: f64,
    pub dim: u32,
}

impl RadialKernel {
    /// Requires `alpha >= 0`, `dim` in 1..=3, and `alpha > dim/2 - 1` so that
    /// both the kernel and its multiplier are locally integrable.
    pub fn new(alpha: f64, dim: u32) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Domain(format!("kernel dimension {dim} not in 1..=3")));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::Domain(format!("kernel order {alpha} must be >= 0")));
        }
        if alpha <= dim as f64 / 2.0 - 1.0 {
            return Err(Error::Domain(format!(
                "kernel order {alpha} too small for dimension {dim}"
            )));
        }
        Ok(Self { alpha, dim })
    }

    /// `k_alpha(r)`; the removable singularity at `r = 0` is filled by the
    /// power series.
    pub fn value(&self, r: f64) -> Result<f64> {
        kernel_value(self.alpha, r)
    }

    /// `k_alpha(0) = 1 / (2^alpha Gamma(alpha + 1))`.
    pub fn value_at_zero(&self) -> f64 {
        n_alpha(self.alpha).expect("validated on construction")
    }

    /// Fourier multiplier `N_{alpha-d/2} (1 - x^2)_+^{alpha-d/2}`.
    pub fn multiplier(&self, x: f64) -> f64 {
        let e = self.alpha - self.dim as f64 / 2.0;
        n_alpha(e).expect("validated on construction") * ramp_power(e, x)
    }

    /// Infimum and supremum of the multiplier on the open support `(-1, 1)`.
    ///
    /// Below the critical order `alpha = d/2` the multiplier is unbounded;
    /// at it the multiplier is the plain bandlimiting cutoff; above it the
    /// multiplier decays to zero at the rim.
    pub fn multiplier_bounds(&self) -> (f64, f64) {
        let e = self.alpha - self.dim as f64 / 2.0;
        let n = n_alpha(e).expect("validated on construction");
        if e < 0.0 {
            (n, f64::INFINITY)
        } else if e == 0.0 {
            (1.0, 1.0)
        } else {
            (0.0, n)
        }
    }

    /// Convolution closure: `k_alpha * k_beta = const . k_{alpha+beta-d/2}`
    /// in the transform normalization where convolution multiplies
    /// multipliers. Returns the constant and the composed kernel.
    pub fn compose(&self, other: &Self) -> Result<(f64, Self)> {
        if self.dim != other.dim {
            return Err(Error::Domain(format!(
                "cannot compose kernels in dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        let d = self.dim as f64;
        let gamma = self.alpha + other.alpha - d / 2.0;
        let composed = Self::new(gamma, self.dim).map_err(|_| {
            Error::Domain(format!(
                "composed order {gamma} leaves the kernel family in dimension {}",
                self.dim
            ))
        })?;
        let c = n_alpha(self.alpha - d / 2.0)? * n_alpha(other.alpha - d / 2.0)?
            / n_alpha(gamma - d / 2.0)?;
        Ok((c, composed))
    }
}

/// `J_alpha(r) / r^alpha` for `r >= 0`, series-filled near the origin.
pub fn kernel_value(alpha: f64, r: f64) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::Domain(format!("kernel radius {r} negative")));
    }
    if r < 1e-4 {
        // k_alpha(r) = N_alpha sum_j t_j, t_0 = 1, t_j / t_{j-1} = -r^2 / (4 j (alpha + j))
        let mut term = 1.0;
        let mut acc = 1.0;
        for j in 1..4 {
            term *= -r * r / (4.0 * j as f64 * (alpha + j as f64));
            acc += term;
        }
        Ok(n_alpha(alpha)? * acc)
    } else {
        Ok(bessel_j(alpha, r)? / r.powf(alpha))
    }
}

/// Apply a kernel's multiplier to exact ball data.
///
/// On the unit ball the multiplier is `N_{alpha-3/2} c^{2 alpha - 3}` with
/// `c = sqrt(1 - r^2)`, so for half-integer-compatible orders (integer
/// `2 alpha - 3`) the polynomial-times-`c`-power class is preserved exactly.
pub fn apply_multiplier(kernel: &RadialKernel, data: &PolyCSum) -> Result<PolyCSum> {
    if kernel.dim != 3 {
        return Err(Error::Domain(format!(
            "exact multiplier action requires dimension 3, got {}",
            kernel.dim
        )));
    }
    let e = 2.0 * kernel.alpha - 3.0;
    let k = e.round();
    if (e - k).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "multiplier exponent {e} is not an integer power of c"
        )));
    }
    let scale = n_alpha(kernel.alpha - 1.5)?;
    Ok(data.mul_c_pow(k as i32).scale(C64::new(scale, 0.0)))
}

/// Residual `|FT[k_alpha](x) - multiplier(x)|` at a transform radius
/// `0 < x < 1`, with the transform evaluated by direct oscillatory
/// quadrature. Wired for the radial transforms in dimensions 3 and 1
/// (the latter at the Dirichlet order `alpha = 1/2` only).
pub fn fourier_pair_residual(kernel: &RadialKernel, x: f64) -> Result<f64> {
    if !(0.0 < x && x < 1.0) {
        return Err(Error::Domain(format!("transform radius {x} outside (0, 1)")));
    }
    let transform = match kernel.dim {
        3 => {
            // (4 pi / x) (2 pi)^{-3/2} int_0^inf k(p) sin(xp) p dp; with
            // sin(xp) = xp j_0(xp) the integral is x int j_0(xp) J_a(p)
            // p^{2-a} dp, which for the integer orders is a regularized
            // product integral (the two-frequency arch series defeats plain
            // acceleration at many radii)
            let alpha = kernel.alpha;
            let pref = 4.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI).powf(-1.5);
            if (alpha - 1.0).abs() < 1e-12 {
                pref * bessel_product_integral(0, 1.0, x, ProductWeight::Linear)?
            } else if (alpha - 2.0).abs() < 1e-12 {
                pref * bessel_product_integral(0, 2.0, x, ProductWeight::Flat)?
            } else {
                let f = |p: f64| {
                    kernel_value(alpha, p).unwrap_or(f64::NAN)
                        * (std::f64::consts::PI * x / 2.0).sqrt()
                        * p.powf(1.5)
                };
                // keep the Bessel arguments inside the supported range
                let max_zeros = ((x * 9.5e3 / std::f64::consts::PI) as usize).clamp(40, 220);
                let integral = integrate_oscillatory_bessel(f, 0.5, x, 1e-9, max_zeros, 1.0)?;
                integral.value * pref / x
            }
        }
        1 => {
            if (kernel.alpha - 0.5).abs() > 1e-12 {
                return Err(Error::Domain(
                    "1d transform is wired for order 1/2 only".into(),
                ));
            }
            // k_{1/2}(p) cos(xp) = sqrt(2/pi) [sin((1+x)p) + sin((1-x)p)] / (2p)
            let sine_integral = |c: f64| -> Result<f64> {
                let f = move |p: f64| (std::f64::consts::PI * c * p / 2.0).sqrt() / p;
                Ok(integrate_oscillatory_bessel(f, 0.5, c, 1e-10, 200, 0.0)?.value)
            };
            (sine_integral(1.0 + x)? + sine_integral(1.0 - x)?) / std::f64::consts::PI
        }
        d => {
            return Err(Error::Domain(format!(
                "no transform quadrature wired for dimension {d}"
            )))
        }
    };
    Ok((transform - kernel.multiplier(x)).abs())
}

/// Literal 1d convolution `(2 pi)^{-1/2} int_{-L}^{L} k_a(|t|) k_b(|x-t|) dt`,
/// the truncated form of the composition law.
pub fn convolve_radial_1d(alpha: f64, beta: f64, x: f64, halfwidth: f64, tol: f64) -> Result<f64> {
    let f = |t: f64| {
        kernel_value(alpha, t.abs()).unwrap_or(f64::NAN)
            * kernel_value(beta, (x - t).abs()).unwrap_or(f64::NAN)
    };
    let q = integrate_1d(f, -halfwidth, halfwidth, tol)?;
    Ok(q.value / (2.0 * std::f64::consts::PI).sqrt())
}

/// Dense complex matrix, row-major.
pub type CMat = Vec<Vec<C64>>;

pub fn mat_mul(a: &CMat, b: &CMat) -> CMat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![C64::new(0.0, 0.0); m]; n];
    for i in 0..n {
        for (t, brow) in b.iter().enumerate().take(k) {
            let aik = a[i][t];
            for j in 0..m {
                out[i][j] += aik * brow[j];
            }
        }
    }
    out
}

pub fn mat_adjoint(a: &CMat) -> CMat {
    let n = a.len();
    let m = a[0].len();
    let mut out = vec![vec![C64::new(0.0, 0.0); n]; m];
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[j][i] = v.conj();
        }
    }
    out
}

/// Solve `A X = B` by LU with partial pivoting; `B` may have many columns.
pub fn lu_solve(a: &CMat, b: &CMat) -> Result<CMat> {
    let n = a.len();
    if n == 0 || a.iter().any(|r| r.len() != n) || b.len() != n {
        return Err(Error::Domain("lu_solve: shape mismatch".into()));
    }
    let m = b[0].len();
    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let (piv, piv_mag) = (col..n)
            .map(|r| (r, lu[r][col].norm_sqr()))
            .max_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        if piv_mag < 1e-280 {
            return Err(Error::Singular("lu_solve: pivot vanished".into()));
        }
        lu.swap(col, piv);
        x.swap(col, piv);
        let d = lu[col][col];
        for r in col + 1..n {
            let factor = lu[r][col] / d;
            lu[r][col] = factor;
            for c in col + 1..n {
                let sub = factor * lu[col][c];
                lu[r][c] -= sub;
            }
            for c in 0..m {
                let sub = factor * x[col][c];
                x[r][c] -= sub;
            }
        }
    }
    for col in (0..n).rev() {
        for c in 0..m {
            x[col][c] /= lu[col][col];
        }
        for r in 0..col {
            let factor = lu[r][col];
            for c in 0..m {
                let sub = factor * x[col][c];
                x[r][c] -= sub;
            }
        }
    }
    Ok(x)
}

/// Adjoint of `op` with respect to the inner product `<u, v> = u^H gram v`:
/// `gram^{-1} op^H gram`.
pub fn weighted_adjoint(gram: &CMat, op: &CMat) -> Result<CMat> {
    let rhs = mat_mul(&mat_adjoint(op), gram);
    lu_solve(gram, &rhs)
}
