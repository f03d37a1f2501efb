//! The Gaussian periodization kernel
//!
//! ```text
//! κ(s, t) = Σ_k exp(-π (t + k)^2) e(k s)
//! ```
//!
//! and the classical theta function at modulus `i`, which it equals up to
//! the factor `exp(-π t^2)`.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exactnum::{e, frac_mul_int};

/// Absolute truncation bound for the κ series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaAccuracy {
    tol: f64,
    half_width: usize,
}

impl KappaAccuracy {
    pub fn new(tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol <= 1e-3) {
            return Err(Error::InvalidInput(format!(
                "kappa tolerance must lie in (0, 1e-3], got {tol}"
            )));
        }
        Ok(KappaAccuracy {
            tol,
            half_width: half_width_for(tol),
        })
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Number of terms kept on each side of the centre.
    pub fn half_width(&self) -> usize {
        self.half_width
    }
}

impl Default for KappaAccuracy {
    fn default() -> Self {
        static DEFAULT: OnceLock<KappaAccuracy> = OnceLock::new();
        *DEFAULT.get_or_init(|| KappaAccuracy::new(1e-16).expect("valid default"))
    }
}

/// Smallest `K` such that the two discarded tails (all `|t0 + k| >= K + 1/2`)
/// sum to less than `tol`.
fn half_width_for(tol: f64) -> usize {
    let mut k = 1usize;
    loop {
        let a = k as f64 + 0.5;
        // geometric majorant: consecutive ratio <= exp(-π(2a + 1))
        let bound = 2.0 * (-std::f64::consts::PI * a * a).exp()
            / (1.0 - (-std::f64::consts::PI * (2.0 * a + 1.0)).exp());
        if bound < tol {
            return k;
        }
        k += 1;
    }
}

/// κ(s, t0) for `s` already reduced mod 1 and `t0 ∈ [-1/2, 1/2)`.
pub fn kappa_centered(s: f64, t0: f64, acc: &KappaAccuracy) -> Complex64 {
    let kk = acc.half_width as i64;
    let mut re = 0.0;
    let mut im = 0.0;
    // pair k and -k so that the s = 0 value is exactly real
    let w0 = (-std::f64::consts::PI * t0 * t0).exp();
    re += w0;
    for k in 1..=kk {
        let kf = k as f64;
        let wp = (-std::f64::consts::PI * (t0 + kf) * (t0 + kf)).exp();
        let wm = (-std::f64::consts::PI * (t0 - kf) * (t0 - kf)).exp();
        let z = e(kf * s);
        re += (wp + wm) * z.re;
        im += (wp - wm) * z.im;
    }
    Complex64::new(re, im)
}

/// `κ(s, t0 + j) = e(-j s) κ(s, t0)` with `s` reduced mod 1 and an integer
/// shift `j` of arbitrary size.
pub fn kappa_shifted(s_frac: f64, j: i128, t0: f64, acc: &KappaAccuracy) -> Complex64 {
    let base = kappa_centered(s_frac, t0, acc);
    if j == 0 {
        base
    } else {
        e(-frac_mul_int(j, s_frac)) * base
    }
}

/// κ(s, t) for finite real `s` (used mod 1) and `t`.
pub fn kappa(s: f64, t: f64, acc: &KappaAccuracy) -> Result<Complex64> {
    if !s.is_finite() || !t.is_finite() {
        return Err(Error::NonFinite(format!("kappa({s}, {t})")));
    }
    if t.abs() >= 2f64.powi(100) {
        return Err(Error::Overflow(format!("kappa argument t = {t}")));
    }
    let s_frac = s - s.floor();
    let s_frac = if s_frac >= 1.0 { 0.0 } else { s_frac };
    let j = (t + 0.5).floor();
    let t0 = t - j;
    Ok(kappa_shifted(s_frac, j as i128, t0, acc))
}

/// `θ(u, i) = Σ_n exp(-π n^2 + 2πi n u)`, for `|Im u| <= 4`.
pub fn theta3_at_i(u: Complex64) -> Result<Complex64> {
    if !u.re.is_finite() || !u.im.is_finite() {
        return Err(Error::NonFinite(format!("theta3_at_i({u})")));
    }
    if u.im.abs() > 4.0 {
        return Err(Error::InvalidInput(format!(
            "theta3_at_i needs |Im u| <= 4, got {}",
            u.im
        )));
    }
    // |term_n| = exp(π b^2) exp(-π (n + b)^2); keep 8 terms each side of -b
    let b = u.im;
    let centre = (-b).round() as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in (centre - 8)..=(centre + 8) {
        let nf = n as f64;
        let mag = (-std::f64::consts::PI * (nf * nf + 2.0 * nf * b)).exp();
        acc += mag * e(nf * u.re);
    }
    Ok(acc)
}

/// Outcome of the two-route computation of `∫∫ |κ|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsSqMean {
    pub quadrature: f64,
    pub parseval: f64,
}

/// Periodic trapezoid rule for `|κ|^2` on a `grid x grid` lattice of `[0,1)^2`.
pub fn kappa_abs_sq_quadrature(grid: usize) -> f64 {
    let acc = KappaAccuracy::default();
    let h = 1.0 / grid as f64;
    let mut total = 0.0;
    for i in 0..grid {
        let s = i as f64 * h;
        let mut row = 0.0;
        for j in 0..grid {
            let t0 = j as f64 * h - 0.5;
            row += kappa_centered(s, t0, &acc).norm_sqr();
        }
        total += row;
    }
    total * h * h
}

/// `∫_0^1 Σ_{|k| <= kmax} exp(-2π (t + k)^2) dt`, trapezoid on `points` nodes.
pub fn parseval_partial(kmax: i64, points: usize) -> f64 {
    let h = 1.0 / points as f64;
    let f = |t: f64| {
        (-kmax..=kmax)
            .map(|k| (-2.0 * std::f64::consts::PI * (t + k as f64).powi(2)).exp())
            .sum::<f64>()
    };
    let mut total = 0.5 * (f(0.0) + f(1.0));
    for i in 1..points {
        total += f(i as f64 * h);
    }
    total * h
}

/// `∫_0^1 ∫_0^1 |κ(s,t)|^2 ds dt`, which equals `2^{-1/2}`. Computed both by
/// 2-D quadrature and by Parseval in `s`; disagreement beyond `1e-8` is an error.
pub fn kappa_abs_sq_mean() -> Result<f64> {
    let both = kappa_abs_sq_mean_routes(256)?;
    Ok(both.quadrature)
}

pub fn kappa_abs_sq_mean_routes(grid: usize) -> Result<AbsSqMean> {
    let quadrature = kappa_abs_sq_quadrature(grid);
    let parseval = parseval_partial(3, 2048);
    if (quadrature - parseval).abs() > 1e-8 {
        return Err(Error::Consistency(format!(
            "|kappa|^2 mean: quadrature {quadrature} vs Parseval {parseval}"
        )));
    }
    Ok(AbsSqMean {
        quadrature,
        parseval,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const KAPPA_00: f64 = 1.086_434_811_213_308;
    const KAPPA_HALF_0: f64 = 0.913_579_138_156_116_8;

    /// Independent direct summation over a fixed symmetric window.
    fn oracle(s: f64, t: f64) -> Complex64 {
        let centre = (-t).round() as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (centre - 8)..=(centre + 8) {
            let w = (-std::f64::consts::PI * (t + k as f64).powi(2)).exp();
            let ph = std::f64::consts::TAU * (k as f64 * s);
            acc += w * Complex64::new(ph.cos(), ph.sin());
        }
        acc
    }

    fn acc() -> KappaAccuracy {
        KappaAccuracy::new(1e-15).unwrap()
    }

    #[test]
    fn known_values() {
        let k = kappa(0.0, 0.0, &acc()).unwrap();
        assert!((k.re - KAPPA_00).abs() < 1e-15 && k.im == 0.0);
        let k = kappa(0.5, 0.0, &acc()).unwrap();
        assert!((k.re - KAPPA_HALF_0).abs() < 1e-15 && k.im.abs() < 1e-16);
        let k = kappa(0.3, 0.7, &acc()).unwrap();
        assert!(
            (k - Complex64::new(-0.022432337196085724, -0.713_808_543_628_482_8)).norm() < 1e-15
        );
    }

    #[test]
    fn matches_direct_summation() {
        for i in 0..40 {
            for j in 0..40 {
                let s = -1.3 + 0.071 * i as f64;
                let t = -3.2 + 0.163 * j as f64;
                let got = kappa(s, t, &acc()).unwrap();
                assert!((got - oracle(s, t)).norm() < 1e-13, "s={s} t={t}");
            }
        }
    }

    #[test]
    fn shift_identity() {
        for &(s, t) in &[(0.1, 0.2), (0.77, -1.4), (0.33, 5.25)] {
            let lhs = kappa(s, t + 1.0, &acc()).unwrap();
            let rhs = e(-s) * kappa(s, t, &acc()).unwrap();
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn invariants_on_grid() {
        let a = acc();
        for i in 0..64 {
            for j in 0..64 {
                let s = i as f64 / 64.0;
                let t = -2.0 + 4.0 * j as f64 / 64.0;
                let k = kappa(s, t, &a).unwrap();
                assert!((kappa(s + 1.0, t, &a).unwrap() - k).norm() < 1e-13);
                assert!((kappa(-s, t, &a).unwrap() - k.conj()).norm() < 1e-13);
                let k0 = kappa(0.0, t, &a).unwrap();
                assert!(k0.re > 0.0 && k0.im.abs() < 1e-13);
            }
        }
        assert!(kappa(0.5, 0.5, &a).unwrap().norm() < 1e-12);
    }

    #[test]
    fn theta_values_and_link() {
        let v = theta3_at_i(Complex64::new(0.0, 0.0)).unwrap();
        assert!((v.re - KAPPA_00).abs() < 1e-15);
        let v = theta3_at_i(Complex64::new(0.5, 0.0)).unwrap();
        assert!((v.re - KAPPA_HALF_0).abs() < 1e-15);
        for &(s, t) in &[(0.25, 0.4), (0.9, -3.1), (0.0, 1.7)] {
            let th = theta3_at_i(Complex64::new(s, t)).unwrap();
            let lhs = (-std::f64::consts::PI * t * t).exp() * th;
            assert!((lhs - kappa(s, t, &acc()).unwrap()).norm() < 1e-13);
        }
        assert!(theta3_at_i(Complex64::new(0.0, 4.5)).is_err());
    }

    #[test]
    fn errors_on_bad_input() {
        assert!(kappa(f64::NAN, 0.0, &acc()).is_err());
        assert!(kappa(0.0, f64::INFINITY, &acc()).is_err());
        assert!(KappaAccuracy::new(0.0).is_err());
        assert!(KappaAccuracy::new(0.1).is_err());
    }

    #[test]
    fn abs_sq_mean_two_routes() {
        let target = std::f64::consts::FRAC_1_SQRT_2;
        assert!((parseval_partial(3, 2048) - target).abs() < 1e-12);
        let m = kappa_abs_sq_mean().unwrap();
        assert!((m - target).abs() < 1e-10);
        let coarse = kappa_abs_sq_quadrature(256);
        let fine = kappa_abs_sq_quadrature(512);
        assert!((coarse - fine).abs() < 1e-9);
    }

    #[test]
    fn truncation_width_is_minimal() {
        let a = KappaAccuracy::new(1e-15).unwrap();
        assert_eq!(a.half_width(), 3);
        assert!(KappaAccuracy::new(1e-4).unwrap().half_width() <= 2);
    }
}
