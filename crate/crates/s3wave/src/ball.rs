//! Exact polynomial algebra on the unit three-ball.
//!
//! After rescaling by the sphere radius, every discrete-basis chart function
//! and every hatted momentum profile used in this crate lives in one function
//! class: polynomials in the dimensionless coordinates `x = eps/R` times an
//! integer power of `c = sqrt(1 - |x|^2)`. The class is closed under sums,
//! products, partial derivatives, and multiplication by `x_i` or `c`, and its
//! integrals over the ball reduce to Beta functions. Working at the
//! coefficient level therefore gives a quadrature-free reference path for the
//! inner products and operator identities checked elsewhere.

use std::collections::BTreeMap;

use crate::specfun::{double_factorial_odd, gegenbauer_coeffs, ln_gamma};
use crate::{C64, Error, Result};

/// Monomial exponents `(i, j, k)` for `x^i y^j z^k`.
type Key = (u8, u8, u8);

// squared-magnitude floor below which a coefficient is treated as zero
const COEF_FLOOR_SQ: f64 = 1e-300;

/// Complex-coefficient polynomial in three variables, sparse by monomial.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BallPoly {
    terms: BTreeMap<Key, C64>,
}

impl BallPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(v: C64) -> Self {
        let mut p = Self::zero();
        p.add_term((0, 0, 0), v);
        p
    }

    pub fn monomial(key: Key, v: C64) -> Self {
        let mut p = Self::zero();
        p.add_term(key, v);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree, or 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|&(i, j, k)| i as u32 + j as u32 + k as u32)
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Key, C64)> + '_ {
        self.terms.iter().map(|(&k, &v)| (k, v))
    }

    fn add_term(&mut self, key: Key, v: C64) {
        let entry = self.terms.entry(key).or_insert_with(|| C64::new(0.0, 0.0));
        *entry += v;
        if entry.norm_sqr() < COEF_FLOOR_SQ {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in other.terms() {
            out.add_term(k, v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        if s.norm_sqr() == 0.0 {
            return Self::zero();
        }
        let mut out = Self::zero();
        for (k, v) in self.terms() {
            out.add_term(k, v * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, va) in self.terms() {
            for (b, vb) in other.terms() {
                out.add_term((a.0 + b.0, a.1 + b.1, a.2 + b.2), va * vb);
            }
        }
        out
    }

    /// Partial derivative along `axis` (0, 1, or 2).
    pub fn dx(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for (k, v) in self.terms() {
            let e = [k.0, k.1, k.2];
            if e[axis] == 0 {
                continue;
            }
            let mut ek = e;
            ek[axis] -= 1;
            out.add_term((ek[0], ek[1], ek[2]), v * e[axis] as f64);
        }
        out
    }

    /// Multiplication by the coordinate `x_axis`.
    pub fn mul_x(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for (k, v) in self.terms() {
            let mut e = [k.0, k.1, k.2];
            e[axis] += 1;
            out.add_term((e[0], e[1], e[2]), v);
        }
        out
    }

    /// Multiplication by `r^2 = x^2 + y^2 + z^2`.
    pub fn mul_r2(&self) -> Self {
        let mut out = Self::zero();
        for axis in 0..3 {
            for (k, v) in self.mul_x(axis).mul_x(axis).terms() {
                out.add_term(k, v);
            }
        }
        out
    }

    /// The rotation generator `(x cross grad)_axis`.
    pub fn x_cross_grad(&self, axis: usize) -> Self {
        let a = (axis + 1) % 3;
        let b = (axis + 2) % 3;
        self.dx(b).mul_x(a).sub(&self.dx(a).mul_x(b))
    }

    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (k, v) in self.terms() {
            out.add_term(k, v.conj());
        }
        out
    }

    pub fn eval(&self, x: [f64; 3]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (k, v) in self.terms() {
            acc += v * x[0].powi(k.0 as i32) * x[1].powi(k.1 as i32) * x[2].powi(k.2 as i32);
        }
        acc
    }

    /// Write `self = remainder + (1 - r^2) * quotient` with the remainder of
    /// `z`-degree at most one (the canonical transversal of the ideal
    /// generated by `1 - r^2`, eliminating `z^2 -> 1 - x^2 - y^2`).
    pub fn split_one_minus_r2(&self) -> (Self, Self) {
        let mut work = self.clone();
        let mut quot = Self::zero();
        loop {
            let Some((key, v)) = work.terms().find(|&((_, _, k), _)| k >= 2) else {
                break;
            };
            work.add_term(key, -v);
            let base = (key.0, key.1, key.2 - 2);
            work.add_term(base, v);
            work.add_term((base.0 + 2, base.1, base.2), -v);
            work.add_term((base.0, base.1 + 2, base.2), -v);
            quot.add_term(base, -v);
        }
        (work, quot)
    }
}

/// Finite sum of `c^q * P(x)` pieces, `c = sqrt(1 - |x|^2)`, `q` an integer.
///
/// The representation is not unique (`c^2` can be traded against the factor
/// `1 - r^2` in the polynomial); [`PolyCSum::normalize`] folds powers `q >= 2`
/// down so that only `q <= 1` survives. Negative powers are kept symbolic and
/// are integrable over the ball for `q > -2`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PolyCSum {
    parts: BTreeMap<i32, BallPoly>,
}

impl PolyCSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_poly(c_power: i32, poly: BallPoly) -> Self {
        let mut s = Self::zero();
        s.add_part(c_power, poly);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn parts(&self) -> impl Iterator<Item = (i32, &BallPoly)> + '_ {
        self.parts.iter().map(|(&q, p)| (q, p))
    }

    fn add_part(&mut self, q: i32, poly: BallPoly) {
        if poly.is_zero() {
            return;
        }
        let slot = self.parts.entry(q).or_insert_with(BallPoly::zero);
        *slot = slot.add(&poly);
        if slot.is_zero() {
            self.parts.remove(&q);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (q, p) in other.parts() {
            out.add_part(q, p.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = Self::zero();
        for (q, p) in self.parts() {
            out.add_part(q, p.scale(s));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (qa, pa) in self.parts() {
            for (qb, pb) in other.parts() {
                out.add_part(qa + qb, pa.mul(pb));
            }
        }
        out
    }

    /// Multiply by `c^k` (shift every stored power).
    pub fn mul_c_pow(&self, k: i32) -> Self {
        let mut out = Self::zero();
        for (q, p) in self.parts() {
            out.add_part(q + k, p.clone());
        }
        out
    }

    /// Partial derivative along `axis`; uses `d c / d x_i = -x_i / c`.
    pub fn dx(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for (q, p) in self.parts() {
            out.add_part(q, p.dx(axis));
            if q != 0 {
                out.add_part(q - 2, p.mul_x(axis).scale(C64::new(-(q as f64), 0.0)));
            }
        }
        out
    }

    pub fn mul_x(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for (q, p) in self.parts() {
            out.add_part(q, p.mul_x(axis));
        }
        out
    }

    /// `(x cross grad)_axis`; `c` is rotation invariant so only the
    /// polynomial factors are touched.
    pub fn x_cross_grad(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for (q, p) in self.parts() {
            out.add_part(q, p.x_cross_grad(axis));
        }
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (q, p) in self.parts() {
            out.add_part(q, p.conj());
        }
        out
    }

    /// Canonical form: fold `q >= 2` down into the polynomials, and lift the
    /// `(1 - r^2)`-divisible content of each negative level up two powers at
    /// a time. Operator compositions that leave the polynomial class only
    /// apparently (second derivatives of `c` produce `c^{-1}`, `c^{-3}`
    /// intermediaries that reassemble) come back clean.
    pub fn reduce(&self) -> Self {
        let folded = self.normalize();
        let mut out = Self::zero();
        let mut pending: Vec<(i32, BallPoly)> = folded.parts().map(|(q, p)| (q, p.clone())).collect();
        while let Some((q, p)) = pending.pop() {
            if p.is_zero() {
                continue;
            }
            if q >= 0 {
                out.add_part(q, p);
                continue;
            }
            let (rem, quot) = p.split_one_minus_r2();
            out.add_part(q, rem);
            pending.push((q + 2, quot));
        }
        out.normalize()
    }

    /// Fold `c^q` with `q >= 2` into the polynomial via `c^2 = 1 - r^2`,
    /// leaving only powers `q <= 1`.
    pub fn normalize(&self) -> Self {
        let one_minus_r2 = BallPoly::constant(C64::new(1.0, 0.0)).sub(&BallPoly::constant(C64::new(1.0, 0.0)).mul_r2());
        let mut out = Self::zero();
        for (q, p) in self.parts() {
            let mut q = q;
            let mut p = p.clone();
            while q >= 2 {
                p = p.mul(&one_minus_r2);
                q -= 2;
            }
            out.add_part(q, p);
        }
        out
    }

    /// Largest coefficient magnitude over all stored parts.
    pub fn max_coefficient(&self) -> f64 {
        self.parts()
            .flat_map(|(_, p)| p.terms().map(|(_, v)| v.norm()))
            .fold(0.0f64, f64::max)
    }

    /// Whether the sum vanishes identically as a function on the ball, up to
    /// coefficients of absolute size `tol_abs`.
    ///
    /// The stored form is not unique, so coefficient emptiness is too strong
    /// a test. Splitting by parity of the `c` power and folding each group
    /// onto its lowest power via `c^2 = 1 - r^2` yields two polynomials that
    /// vanish exactly when the function does.
    pub fn is_zero_function(&self, tol_abs: f64) -> bool {
        for parity in [0, 1] {
            let group: Vec<(i32, &BallPoly)> = self
                .parts()
                .filter(|(q, _)| q.rem_euclid(2) == parity)
                .collect();
            let Some(&(q0, _)) = group.first() else { continue };
            let one_minus_r2 = BallPoly::constant(C64::new(1.0, 0.0))
                .sub(&BallPoly::constant(C64::new(1.0, 0.0)).mul_r2());
            let mut folded = BallPoly::zero();
            for (q, p) in group {
                let mut term = p.clone();
                for _ in 0..((q - q0) / 2) {
                    term = term.mul(&one_minus_r2);
                }
                folded = folded.add(&term);
            }
            if folded.terms().any(|(_, v)| v.norm() > tol_abs) {
                return false;
            }
        }
        true
    }

    /// Function-level comparison: `self - other` vanishes on the ball up to
    /// `rel_tol` times the larger operand's coefficient scale.
    pub fn approx_eq_function(&self, other: &Self, rel_tol: f64) -> bool {
        let scale = self.max_coefficient().max(other.max_coefficient());
        if scale == 0.0 {
            return true;
        }
        self.sub(other).is_zero_function(rel_tol * scale)
    }

    /// Evaluate at a point with `|x| <= 1`. Negative `c` powers blow up on
    /// the rim; callers keep evaluation points in the open ball.
    pub fn eval(&self, x: [f64; 3]) -> C64 {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let c = (1.0 - r2).max(0.0).sqrt();
        let mut acc = C64::new(0.0, 0.0);
        for (q, p) in self.parts() {
            acc += p.eval(x) * c.powi(q);
        }
        acc
    }

    /// Exact integral over the unit ball. Requires every stored power to
    /// satisfy `q > -2`.
    pub fn ball_moment(&self) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for (q, p) in self.parts() {
            if q <= -2 {
                return Err(Error::Domain(format!(
                    "ball moment diverges for c power {q}"
                )));
            }
            for (k, v) in p.terms() {
                acc += v * unit_moment(k.0 as u32, k.1 as u32, k.2 as u32, q);
            }
        }
        Ok(acc)
    }
}

/// `int_{|x|<1} x^i y^j z^k c^q dV`, in closed form.
///
/// Vanishes unless all exponents are even; otherwise the angular factor is a
/// ratio of half-integer Gamma values and the radial factor a Beta function.
fn unit_moment(i: u32, j: u32, k: u32, q: i32) -> f64 {
    if i % 2 == 1 || j % 2 == 1 || k % 2 == 1 {
        return 0.0;
    }
    debug_assert!(q > -2);
    let n = (i + j + k) as f64;
    let half = |e: u32| ln_gamma((e as f64 + 1.0) / 2.0);
    let ln_angular = std::f64::consts::LN_2 + half(i) + half(j) + half(k) - ln_gamma((n + 3.0) / 2.0);
    // radial: (1/2) B((n+3)/2, (q+2)/2)
    let a = (n + 3.0) / 2.0;
    let b = (q as f64 + 2.0) / 2.0;
    let ln_radial = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b) - std::f64::consts::LN_2;
    (ln_angular + ln_radial).exp()
}

/// The solid harmonic `r^l Y_lm(theta, phi)` as a polynomial in `x, y, z`.
///
/// Built from `(x + i y)^m` times a polynomial in `z` and `r^2` generated by
/// the standard two-term recursion; negative `m` via conjugation.
pub fn solid_harmonic(l: u32, m: i32) -> Result<BallPoly> {
    if m.unsigned_abs() > l {
        return Err(Error::Domain(format!("|m| = {} exceeds l = {l}", m.abs())));
    }
    if m < 0 {
        let s = if m % 2 == 0 { 1.0 } else { -1.0 };
        return Ok(solid_harmonic(l, -m)?.conj().scale(C64::new(s, 0.0)));
    }
    let m = m as u32;
    // (x + i y)^m
    let xp_iy = BallPoly::monomial((1, 0, 0), C64::new(1.0, 0.0))
        .add(&BallPoly::monomial((0, 1, 0), C64::new(0.0, 1.0)));
    let mut equatorial = BallPoly::constant(C64::new(1.0, 0.0));
    for _ in 0..m {
        equatorial = equatorial.mul(&xp_iy);
    }
    // H_l(z, r^2): H_m = (2m-1)!!, H_{m+1} = (2m+1) z H_m,
    // (l - m) H_l = (2l - 1) z H_{l-1} - (l + m - 1) r^2 H_{l-2}
    let mut h_prev = BallPoly::constant(C64::new(double_factorial_odd(m), 0.0));
    let mut h = if l == m {
        h_prev.clone()
    } else {
        h_prev.mul_x(2).scale(C64::new(2.0 * m as f64 + 1.0, 0.0))
    };
    let mut deg = m + 1;
    while deg < l {
        deg += 1;
        let lf = deg as f64;
        let next = h
            .mul_x(2)
            .scale(C64::new(2.0 * lf - 1.0, 0.0))
            .sub(&h_prev.mul_r2().scale(C64::new(lf + m as f64 - 1.0, 0.0)))
            .scale(C64::new(1.0 / (lf - m as f64), 0.0));
        h_prev = h;
        h = next;
    }
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let ln_norm = 0.5
        * ((2.0 * l as f64 + 1.0).ln() + ln_gamma((l - m) as f64 + 1.0)
            - (4.0 * std::f64::consts::PI).ln()
            - ln_gamma((l + m) as f64 + 1.0));
    Ok(equatorial.mul(&h).scale(C64::new(sign * ln_norm.exp(), 0.0)))
}

/// Split a Gegenbauer polynomial by parity of its argument.
///
/// Returns `(even, odd)` with `C^lambda_k(s c) = even + s c * odd` for either
/// sign `s`; both pieces are polynomials in `c^2 = 1 - r^2` and come back as
/// plain [`BallPoly`] values, so a two-chart function built from them stays in
/// the `PolyCSum` class.
pub fn gegenbauer_parity_split(k: u32, lambda: f64) -> Result<(BallPoly, BallPoly)> {
    let coeffs = gegenbauer_coeffs(k, lambda)?;
    let one_minus_r2 =
        BallPoly::constant(C64::new(1.0, 0.0)).sub(&BallPoly::constant(C64::new(1.0, 0.0)).mul_r2());
    // powers of (1 - r^2) up to floor(k/2)
    let mut pow_table = vec![BallPoly::constant(C64::new(1.0, 0.0))];
    for p in 1..=(k as usize / 2) {
        let next = pow_table[p - 1].mul(&one_minus_r2);
        pow_table.push(next);
    }
    let mut even = BallPoly::zero();
    let mut odd = BallPoly::zero();
    for (j, &a) in coeffs.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let s = C64::new(a, 0.0);
        if j % 2 == 0 {
            even = even.add(&pow_table[j / 2].scale(s));
        } else {
            odd = odd.add(&pow_table[(j - 1) / 2].scale(s));
        }
    }
    Ok((even, odd))
}
