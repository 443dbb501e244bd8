//! Gegenbauer (ultraspherical) polynomials C^lambda_k via the three-term
//! recurrence, plus coefficient vectors and closed forms at the origin.

use super::gamma::{gamma, ln_gamma};
use crate::{Error, Result};

fn check(k: u32, lambda: f64) -> Result<()> {
    if k > 200 {
        return Err(Error::Domain(format!("gegenbauer: degree {k} exceeds 200")));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("gegenbauer: lambda = {lambda} must be positive")));
    }
    Ok(())
}

/// C^lambda_k(x), degree k <= 200, lambda > 0.
pub fn gegenbauer(k: u32, lambda: f64, x: f64) -> Result<f64> {
    check(k, lambda)?;
    if k == 0 {
        return Ok(1.0);
    }
    let mut cm = 1.0;
    let mut c = 2.0 * lambda * x;
    for n in 2..=k {
        let nf = n as f64;
        let next = (2.0 * x * (nf + lambda - 1.0) * c - (nf + 2.0 * lambda - 2.0) * cm) / nf;
        cm = c;
        c = next;
    }
    Ok(c)
}

/// d/dx C^lambda_k(x) = 2 lambda C^{lambda+1}_{k-1}(x).
pub fn gegenbauer_deriv(k: u32, lambda: f64, x: f64) -> Result<f64> {
    check(k, lambda)?;
    if k == 0 {
        return Ok(0.0);
    }
    Ok(2.0 * lambda * gegenbauer(k - 1, lambda + 1.0, x)?)
}

/// C^lambda_k(0): zero for odd k, (-1)^{k/2} Gamma(lambda + k/2) / (Gamma(lambda) (k/2)!)
/// for even k.
pub fn gegenbauer_zero_arg(k: u32, lambda: f64) -> Result<f64> {
    check(k, lambda)?;
    if k % 2 == 1 {
        return Ok(0.0);
    }
    let h = (k / 2) as f64;
    let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let ln = ln_gamma(lambda + h) - ln_gamma(lambda) - ln_gamma(h + 1.0);
    let _ = gamma; // magnitude via logs keeps large degrees in range
    Ok(sign * ln.exp())
}

/// Coefficients of C^lambda_k in ascending powers of x (length k+1).
/// Built by the same recurrence applied to coefficient vectors; exact in
/// f64 for the small degrees used elsewhere in the crate.
pub fn gegenbauer_coeffs(k: u32, lambda: f64) -> Result<Vec<f64>> {
    check(k, lambda)?;
    let mut cm = vec![0.0; k as usize + 1];
    cm[0] = 1.0;
    if k == 0 {
        return Ok(cm);
    }
    let mut c = vec![0.0; k as usize + 1];
    c[1] = 2.0 * lambda;
    if k == 1 {
        return Ok(c);
    }
    for n in 2..=k as usize {
        let nf = n as f64;
        let mut next = vec![0.0; k as usize + 1];
        for j in 0..n {
            next[j + 1] += 2.0 * (nf + lambda - 1.0) * c[j] / nf;
        }
        for j in 0..=n - 2 {
            next[j] -= (nf + 2.0 * lambda - 2.0) * cm[j] / nf;
        }
        cm = c;
        c = next;
    }
    Ok(c)
}
