//! Phase arithmetic: fractional parts of `n * x` for huge integers `n`.
//!
//! Every `f64` is a dyadic rational `m * 2^e`, so `frac(n * x)` can be
//! computed exactly with integer arithmetic and rounded once at the end.
//! This keeps phases like `e(n(n-1)/2 * t)` accurate far beyond the point
//! where `n * n * t` in doubles has lost every fractional digit.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// `e(x) = exp(2πix)`, with `x` reduced to `[-1/2, 1/2]` first.
pub fn e(x: f64) -> Complex64 {
    let r = x - x.round();
    let (s, c) = (std::f64::consts::TAU * r).sin_cos();
    Complex64::new(c, s)
}

/// `2^-s` for `s >= 0`, flushing to zero below the subnormal range.
fn pow2_neg(s: u32) -> f64 {
    if s <= 1022 {
        f64::from_bits(((1023 - s) as u64) << 52)
    } else if s <= 1074 {
        f64::from_bits(1u64 << (1074 - s))
    } else {
        0.0
    }
}

/// Scales a non-negative integer by `2^-s` with a single rounding where possible.
fn scale_down(r: u128, s: u32) -> f64 {
    let v = r as f64;
    if s > 900 {
        v * pow2_neg(450) * pow2_neg(s - 450)
    } else {
        v * pow2_neg(s)
    }
}

/// Folds a value from `[0, 1]` (after rounding) back into `[0, 1)`.
#[inline]
fn fold01(v: f64) -> f64 {
    if v >= 1.0 {
        v - 1.0
    } else {
        v
    }
}

/// Reduces any finite value into `[0, 1)`.
#[inline]
pub fn wrap01(v: f64) -> f64 {
    let r = v - v.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A finite double written exactly as `mant * 2^exp` with `mant` odd (or zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dyadic {
    mant: i64,
    exp: i32,
}

impl Dyadic {
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "dyadic decomposition of non-finite value");
        if x == 0.0 {
            return Dyadic { mant: 0, exp: 0 };
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let biased = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mut m, mut e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let tz = m.trailing_zeros();
        m >>= tz;
        e += tz as i32;
        Dyadic {
            mant: sign * m as i64,
            exp: e,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant == 0
    }

    /// `frac(n * self)` in `[0, 1)`.
    pub fn frac_times(&self, n: i128) -> f64 {
        if n == 0 || self.mant == 0 || self.exp >= 0 {
            return 0.0;
        }
        let s = (-self.exp) as u32;
        let r = frac_pos(n.unsigned_abs(), self.mant.unsigned_abs() as u128, s);
        if (n < 0) != (self.mant < 0) && r != 0.0 {
            fold01(1.0 - r)
        } else {
            r
        }
    }

    /// `(floor(n * self), frac(n * self))`, or `None` when the integer part
    /// does not fit in an `i128`.
    pub fn split_times(&self, n: i64) -> Option<(i128, f64)> {
        if n == 0 || self.mant == 0 {
            return Some((0, 0.0));
        }
        let p = n as i128 * self.mant as i128;
        if self.exp >= 0 {
            let sh = self.exp as u32;
            if sh >= 127 || p.unsigned_abs() >= (1u128 << (126 - sh)) {
                return None;
            }
            return Some((p << sh, 0.0));
        }
        let s = (-self.exp) as u32;
        if s >= 120 {
            // |p| < 2^116 < 2^s
            let mag = scale_down(p.unsigned_abs(), s);
            return Some(if p >= 0 {
                if mag >= 1.0 {
                    (1, 0.0)
                } else {
                    (0, mag)
                }
            } else if mag == 0.0 {
                (0, 0.0)
            } else {
                let f = 1.0 - mag;
                if f >= 1.0 {
                    (0, 0.0)
                } else {
                    (-1, f)
                }
            });
        }
        let int = p >> s;
        let rem = (p - (int << s)) as u128;
        let f = scale_down(rem, s);
        Some(if f >= 1.0 { (int + 1, 0.0) } else { (int, f) })
    }
}

/// `frac(n * m * 2^-s)` for non-negative `n`, `m < 2^53`, `s > 0`.
fn frac_pos(n: u128, m: u128, s: u32) -> f64 {
    if s <= 74 {
        let mask = (1u128 << s) - 1;
        let r = ((n & mask) * m) & mask;
        return fold01(scale_down(r, s));
    }
    if n < (1u128 << 75) {
        let p = n * m;
        let r = if s >= 128 { p } else { p & ((1u128 << s) - 1) };
        return fold01(scale_down(r, s));
    }
    // n * x = hi * (x * 2^32) + lo * x
    let hi = n >> 32;
    let lo = n & 0xffff_ffff;
    wrap01(frac_pos(hi, m, s - 32) + frac_pos(lo, m, s))
}

/// `frac(n * x)` in `[0, 1)` for any finite `x`.
pub fn frac_mul_int(n: i128, x: f64) -> f64 {
    Dyadic::from_f64(x).frac_times(n)
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

// Named methods rather than operator traits keep call sites explicit about precision
#[allow(clippy::should_implement_trait)]
impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    /// Nearest double-double to an exact rational.
    pub fn from_rational(r: &BigRational) -> Self {
        let hi = r.to_f64().unwrap_or(0.0);
        if !hi.is_finite() || hi == 0.0 {
            return DoubleDouble { hi, lo: 0.0 };
        }
        let exact_hi = BigRational::from_float(hi).expect("finite");
        let lo = (r - exact_hi).to_f64().unwrap_or(0.0);
        let (h, l) = quick_two_sum(hi, lo);
        DoubleDouble { hi: h, lo: l }
    }

    pub fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DoubleDouble { hi, lo }
    }

    pub fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    pub fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        self.mul(DoubleDouble::from_f64(b))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Reduces into `[0, 1)` keeping the low word.
    pub fn frac(self) -> Self {
        let f = self.hi.floor();
        // hi - f is inexact for negative hi; carry its rounding error into lo
        let (s, err) = two_sum(self.hi, -f);
        let (hi, lo) = quick_two_sum(s, err + self.lo);
        if hi < 0.0 {
            DoubleDouble::from_f64(1.0).add(DoubleDouble { hi, lo })
        } else if hi >= 1.0 {
            DoubleDouble { hi, lo }.sub(DoubleDouble::from_f64(1.0))
        } else {
            DoubleDouble { hi, lo }
        }
    }
}

/// Exact rational part of a phase, kept in machine integers when small.
#[derive(Debug, Clone, PartialEq)]
enum RatPart {
    Small { num: i128, den: i128 },
    Big { num: BigInt, den: BigInt },
}

impl RatPart {
    fn new(r: &BigRational) -> Self {
        let (num, den) = (r.numer(), r.denom());
        match (num.to_i128(), den.to_i128()) {
            (Some(n), Some(d)) if d < (1i128 << 62) && n.unsigned_abs() < (1u128 << 62) => {
                RatPart::Small { num: n, den: d }
            }
            _ => RatPart::Big {
                num: num.clone(),
                den: den.clone(),
            },
        }
    }

    fn frac_times(&self, n: i128) -> f64 {
        match self {
            RatPart::Small { num, den } => {
                if *num == 0 {
                    return 0.0;
                }
                let a = n.rem_euclid(*den);
                let b = num.rem_euclid(*den);
                let r = (a * b).rem_euclid(*den);
                r as f64 / *den as f64
            }
            RatPart::Big { num, den } => {
                let r = (BigInt::from(n) * num).mod_floor(den);
                BigRational::new(r, den.clone()).to_f64().unwrap_or(0.0)
            }
        }
    }

    fn split_times(&self, n: i64) -> Option<(i128, f64)> {
        match self {
            RatPart::Small { num, den } => {
                let p = (n as i128).checked_mul(*num)?;
                let (q, r) = p.div_mod_floor(den);
                Some((q, r as f64 / *den as f64))
            }
            RatPart::Big { num, den } => {
                let p = BigInt::from(n) * num;
                let (q, r) = p.div_mod_floor(den);
                Some((
                    q.to_i128()?,
                    BigRational::new(r, den.clone()).to_f64().unwrap_or(0.0),
                ))
            }
        }
    }
}

/// A real `r + f` with `r` exact rational and `f` a double-double, prepared
/// for repeated evaluation of `frac(n * (r + f))`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPhase {
    rat: RatPart,
    hi: Dyadic,
    lo: Dyadic,
    float: DoubleDouble,
}

impl LinearPhase {
    pub fn new(rational: &BigRational, float: DoubleDouble) -> Self {
        LinearPhase {
            rat: RatPart::new(rational),
            hi: Dyadic::from_f64(float.hi),
            lo: Dyadic::from_f64(float.lo),
            float,
        }
    }

    pub fn zero() -> Self {
        Self::new(&BigRational::zero(), DoubleDouble::ZERO)
    }

    /// True when the irrational part vanishes, i.e. the phase is exactly rational.
    pub fn is_rational(&self) -> bool {
        self.hi.is_zero() && self.lo.is_zero()
    }

    /// The double-double image of the irrational part.
    pub fn float_part(&self) -> DoubleDouble {
        self.float
    }

    /// `frac(n * x)` in `[0, 1)`.
    pub fn frac_times(&self, n: i128) -> f64 {
        wrap01(self.rat.frac_times(n) + self.hi.frac_times(n) + self.lo.frac_times(n))
    }

    /// `(floor(n * x), frac(n * x))`.
    pub fn split_times(&self, n: i64) -> Option<(i128, f64)> {
        let (i0, f0) = self.rat.split_times(n)?;
        let (i1, f1) = self.hi.split_times(n)?;
        let (i2, f2) = self.lo.split_times(n)?;
        let mut int = i0.checked_add(i1)?.checked_add(i2)?;
        let mut f = f0 + f1 + f2;
        // f in [0, 3)
        let carry = f.floor();
        f -= carry;
        int = int.checked_add(carry as i128)?;
        if f >= 1.0 {
            f -= 1.0;
            int += 1;
        }
        Some((int, f))
    }

    /// `n * x` as a double (integer part plus fractional part).
    pub fn times_f64(&self, n: i64) -> Option<f64> {
        self.split_times(n).map(|(i, f)| i as f64 + f)
    }
}

/// Extracts `r` and `|r|` helpers used by callers wanting a sign-aware fraction.
pub fn rational_frac(r: &BigRational) -> BigRational {
    let fl = r.floor();
    let out = r - fl;
    debug_assert!(!out.is_negative());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn exact_frac(n: i128, x: f64) -> f64 {
        let prod = BigRational::from_float(x).unwrap() * BigRational::from_integer(BigInt::from(n));
        rational_frac(&prod).to_f64().unwrap()
    }

    #[test]
    fn dyadic_roundtrip() {
        for x in [1.0, 0.5, -0.375, std::f64::consts::SQRT_2, 3e-300, -7.0e20] {
            let d = Dyadic::from_f64(x);
            let back = d.mant as f64 * 2f64.powi(d.exp);
            assert_eq!(back, x);
        }
    }

    #[test]
    fn frac_mul_small_cases() {
        assert_eq!(frac_mul_int(3, 0.5), 0.5);
        assert_eq!(frac_mul_int(-3, 0.5), 0.5);
        assert_eq!(frac_mul_int(4, 0.25), 0.0);
        assert_eq!(frac_mul_int(-1, 0.25), 0.75);
        assert_eq!(frac_mul_int(7, 3.0), 0.0);
    }

    #[test]
    fn frac_mul_huge_n_matches_bigint() {
        let x = std::f64::consts::SQRT_2;
        for n in [
            1i128 << 40,
            (1i128 << 100) + 12345,
            -(1i128 << 90) - 7,
            1i128 << 120,
        ] {
            let got = frac_mul_int(n, x);
            let want = exact_frac(n, x);
            let d = (got - want).abs();
            assert!(d.min(1.0 - d) < 1e-15, "n={n}: {got} vs {want}");
        }
        let tiny = 1.234e-30;
        for n in [1i128 << 100, -(1i128 << 110) + 3] {
            let got = frac_mul_int(n, tiny);
            let want = exact_frac(n, tiny);
            let d = (got - want).abs();
            assert!(d.min(1.0 - d) < 1e-15, "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn split_matches_floor() {
        let d = Dyadic::from_f64(1.25);
        assert_eq!(d.split_times(3), Some((3, 0.75)));
        assert_eq!(d.split_times(-3), Some((-4, 0.25)));
        let d = Dyadic::from_f64(-0.5);
        assert_eq!(d.split_times(1), Some((-1, 0.5)));
    }

    #[test]
    fn double_double_rational() {
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let dd = DoubleDouble::from_rational(&third);
        let three = dd.mul_f64(3.0);
        assert!((three.hi - 1.0).abs() + three.lo.abs() < 1e-31);
    }

    #[test]
    fn linear_phase_rational_exact() {
        let r = BigRational::new(BigInt::from(1), BigInt::from(8));
        let p = LinearPhase::new(&r, DoubleDouble::ZERO);
        assert_eq!(p.frac_times(6), 0.75);
        assert_eq!(p.frac_times(-1), 0.875);
        assert_eq!(p.split_times(17), Some((2, 0.125)));
        assert!(p.is_rational());
    }

    proptest! {
        #[test]
        fn frac_mul_agrees_with_exact(n in -(1i64 << 52)..(1i64 << 52), x in -1.0e3f64..1.0e3) {
            let got = frac_mul_int(n as i128, x);
            let want = exact_frac(n as i128, x);
            let d = (got - want).abs();
            prop_assert!(d.min(1.0 - d) < 1e-15);
            prop_assert!((0.0..1.0).contains(&got));
        }

        #[test]
        fn double_double_frac_is_exact(hi in -4.0f64..4.0, lo_scale in -1.0f64..1.0) {
            let (hi, lo) = quick_two_sum(hi, lo_scale * hi.abs() * 1e-17);
            let dd = DoubleDouble { hi, lo };
            let exact = BigRational::from_float(hi).unwrap() + BigRational::from_float(lo).unwrap();
            let want = rational_frac(&exact);
            let f = dd.frac();
            let got = BigRational::from_float(f.hi).unwrap() + BigRational::from_float(f.lo).unwrap();
            let err = (got - want).abs().to_f64().unwrap();
            prop_assert!(err.min(1.0 - err) < 1e-30, "err {err:e}");
            prop_assert!((0.0..1.0).contains(&f.hi));
        }

        #[test]
        fn split_agrees_with_exact(n in -(1i64 << 40)..(1i64 << 40), x in -1.0e3f64..1.0e3) {
            let (i, f) = Dyadic::from_f64(x).split_times(n).unwrap();
            let prod = BigRational::from_float(x).unwrap() * BigRational::from_integer(BigInt::from(n));
            prop_assert_eq!(BigInt::from(i), prod.floor().to_integer());
            prop_assert!((f - exact_frac(n as i128, x)).abs() < 1e-15);
        }
    }
}
