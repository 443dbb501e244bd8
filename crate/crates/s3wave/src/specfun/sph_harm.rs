//! Spherical harmonics with the Condon-Shortley phase, through the stable
//! normalized associated-Legendre recursion.

use crate::{C64, Error, Result};

/// Y_lm(theta, phi).  Errors if |m| > l.
pub fn sph_harm(l: u32, m: i32, theta: f64, phi: f64) -> Result<C64> {
    if m.unsigned_abs() > l {
        return Err(Error::Domain(format!("sph_harm: |m| = {} exceeds l = {l}", m.abs())));
    }
    let ma = m.unsigned_abs();
    let p = normalized_assoc_legendre(l, ma, theta.cos(), theta.sin());
    let phase = C64::new(0.0, ma as f64 * phi).exp();
    let y_pos = p * phase;
    if m >= 0 {
        Ok(y_pos)
    } else {
        // Y_{l,-m} = (-1)^m conj(Y_{l,m})
        let sign = if ma % 2 == 0 { 1.0 } else { -1.0 };
        Ok(sign * y_pos.conj())
    }
}

/// Fully normalized P-tilde_l^m(cos theta) including the 1/sqrt(4 pi) and the
/// Condon-Shortley (-1)^m, so that Y_lm = P-tilde * e^{i m phi} for m >= 0.
fn normalized_assoc_legendre(l: u32, m: u32, ct: f64, st: f64) -> f64 {
    // P-tilde_mm = (-1)^m sqrt((2m+1)/(4 pi)) sqrt((2m-1)!!/(2m)!!) st^m,
    // accumulated multiplicatively.
    let mut pmm = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        pmm *= -st * ((2.0 * kf + 1.0) / (2.0 * kf)).sqrt();
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = pmm;
    let mut p = (2.0 * m as f64 + 3.0).sqrt() * ct * pmm;
    if l == m + 1 {
        return p;
    }
    let mf = m as f64;
    for ll in (m + 2)..=l {
        let lf = ll as f64;
        let a = ((2.0 * lf + 1.0) * (2.0 * lf - 1.0) / ((lf - mf) * (lf + mf))).sqrt();
        let b = ((2.0 * lf + 1.0) * (lf - mf - 1.0) * (lf + mf - 1.0)
            / ((2.0 * lf - 3.0) * (lf - mf) * (lf + mf)))
            .sqrt();
        let next = a * ct * p - b * pm1;
        pm1 = p;
        p = next;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_closed_forms() {
        let pi = std::f64::consts::PI;
        let y00 = sph_harm(0, 0, 0.7, 1.3).unwrap();
        assert!((y00.re - 0.5 / pi.sqrt()).abs() < 1e-15 && y00.im.abs() < 1e-16);

        // Y_11(pi/2, 0) = -sqrt(3/(8 pi))  (Condon-Shortley phase)
        let y11 = sph_harm(1, 1, pi / 2.0, 0.0).unwrap();
        assert!((y11.re + (3.0 / (8.0 * pi)).sqrt()).abs() < 1e-15);

        // Y_10 = sqrt(3/(4 pi)) cos theta
        let th = 0.9;
        let y10 = sph_harm(1, 0, th, 2.0).unwrap();
        assert!((y10.re - (3.0 / (4.0 * pi)).sqrt() * th.cos()).abs() < 1e-15);

        // Y_22(theta, phi) = (1/4) sqrt(15/(2 pi)) sin^2 theta e^{2 i phi}
        let (th, ph) = (1.1f64, 0.4f64);
        let want = 0.25 * (15.0 / (2.0 * pi)).sqrt() * th.sin().powi(2);
        let y22 = sph_harm(2, 2, th, ph).unwrap();
        assert!((y22 - want * C64::new(0.0, 2.0 * ph).exp()).norm() < 1e-15);
    }

    #[test]
    fn negative_m_symmetry() {
        for l in 0..6u32 {
            for m in 0..=l as i32 {
                let (th, ph) = (0.77, -1.9);
                let a = sph_harm(l, -m, th, ph).unwrap();
                let b = sph_harm(l, m, th, ph).unwrap().conj()
                    * if m % 2 == 0 { 1.0 } else { -1.0 };
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn orthonormal_on_the_sphere() {
        // Gauss-Legendre in cos(theta), trapezoid in phi
        let n = 24;
        let (nodes, weights) = crate::quadrature::gauss_legendre(n);
        let nphi = 32;
        let check = |l1: u32, m1: i32, l2: u32, m2: i32, want: f64| {
            let mut acc = C64::new(0.0, 0.0);
            for (ct, w) in nodes.iter().zip(&weights) {
                let th = ct.acos();
                for k in 0..nphi {
                    let ph = 2.0 * std::f64::consts::PI * k as f64 / nphi as f64;
                    let a = sph_harm(l1, m1, th, ph).unwrap();
                    let b = sph_harm(l2, m2, th, ph).unwrap();
                    acc += w * a.conj() * b * (2.0 * std::f64::consts::PI / nphi as f64);
                }
            }
            assert!(
                (acc - C64::new(want, 0.0)).norm() < 1e-12,
                "({l1},{m1})x({l2},{m2}): {acc}"
            );
        };
        check(3, 2, 3, 2, 1.0);
        check(4, -3, 4, -3, 1.0);
        check(2, 1, 3, 1, 0.0);
        check(5, 2, 5, -2, 0.0);
    }

    #[test]
    fn domain_error() {
        assert!(sph_harm(2, 3, 0.0, 0.0).is_err());
    }
}
