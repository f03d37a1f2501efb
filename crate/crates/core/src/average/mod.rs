//! Cesàro averages, inner products and quadratic norms of nilsequences,
//! orthogonality verdicts, and the shift-compactness probe.

mod probe;
pub mod sum;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seq::NilseqExpr;

pub use probe::{shift_compactness_probe, ProbeRow, DEFAULT_T_GRID};
pub use sum::default_workers;

/// `Av_N` with the window-halving error estimate `|Av_N - Av_{N/2}|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvResult {
    pub value: Complex64,
    pub n_used: u64,
    pub error_estimate: f64,
}

/// Quadratic norm `(Av |a|^2)^{1/2}` with its halving estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormResult {
    pub value: f64,
    pub n_used: u64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrthoKind {
    ConsistentOrthogonal,
    Correlated,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthoVerdict {
    pub kind: OrthoKind,
    pub statistic: f64,
    pub threshold: f64,
    pub error_estimate: f64,
}

fn check_n(n: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "averaging needs N >= 2, got {n}"
        )));
    }
    if n > 1 << 52 {
        return Err(Error::Overflow(format!("N = {n} exceeds 2^52")));
    }
    Ok(())
}

/// Averages `f` over `[start, start + n)` and over its first half.
fn average_fn<F>(f: &F, start: i64, n: u64, workers: usize) -> Result<AvResult>
where
    F: Fn(i64) -> Result<Complex64> + Sync,
{
    check_n(n)?;
    let half = n / 2;
    let s1 = sum::deterministic_sum(f, start, half as usize, workers)?;
    let s2 = sum::deterministic_sum(f, start + half as i64, (n - half) as usize, workers)?;
    let value = (s1 + s2) / n as f64;
    let first = s1 / half as f64;
    Ok(AvResult {
        value,
        n_used: n,
        error_estimate: (value - first).norm(),
    })
}

/// `(1/N) Σ_{n<N} a_n`.
pub fn cesaro_av(a: &NilseqExpr, n: u64, workers: usize) -> Result<AvResult> {
    average_fn(&|i| a.eval(i), 0, n, workers)
}

/// `(1/N) Σ_{start <= n < start + N} a_n`.
pub fn cesaro_av_window(a: &NilseqExpr, start: i64, n: u64, workers: usize) -> Result<AvResult> {
    average_fn(&|i| a.eval(i), start, n, workers)
}

/// `<a|b>_N = (1/N) Σ a_n conj(b_n)`.
pub fn inner_product(a: &NilseqExpr, b: &NilseqExpr, n: u64, workers: usize) -> Result<AvResult> {
    average_fn(&|i| Ok(a.eval(i)? * b.eval(i)?.conj()), 0, n, workers)
}

/// `((1/N) Σ |a_n|^2)^{1/2}`.
pub fn quad_norm(a: &NilseqExpr, n: u64, workers: usize) -> Result<NormResult> {
    let sq = average_fn(
        &|i| Ok(Complex64::new(a.eval(i)?.norm_sqr(), 0.0)),
        0,
        n,
        workers,
    )?;
    let value = sq.value.re.max(0.0).sqrt();
    let first = (sq.value.re - sq.error_estimate).max(0.0).sqrt();
    // the halving estimate is on the squared scale; carry it through the root
    let error_estimate = if value > 0.0 {
        sq.error_estimate / (value + first).max(f64::MIN_POSITIVE)
    } else {
        sq.error_estimate.sqrt()
    };
    Ok(NormResult {
        value,
        n_used: n,
        error_estimate,
    })
}

/// `max_{n < N} |a_n|`, a lower estimate of the sup norm.
pub fn sup_norm_estimate(a: &NilseqExpr, n: u64) -> Result<f64> {
    let mut m: f64 = 0.0;
    for i in 0..n as i64 {
        m = m.max(a.eval(i)?.norm());
    }
    Ok(m)
}

/// Decides orthogonal / correlated / inconclusive from `|<a|b>_N|`.
pub fn orthogonality_test(
    a: &NilseqExpr,
    b: &NilseqExpr,
    n: u64,
    threshold: f64,
    workers: usize,
) -> Result<OrthoVerdict> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::InvalidInput("threshold must be positive".into()));
    }
    let ip = inner_product(a, b, n, workers)?;
    let statistic = ip.value.norm();
    let err = ip.error_estimate;
    let kind = if statistic > threshold + err {
        OrthoKind::Correlated
    } else if statistic + err < threshold {
        OrthoKind::ConsistentOrthogonal
    } else {
        OrthoKind::Inconclusive
    };
    Ok(OrthoVerdict {
        kind,
        statistic,
        threshold,
        error_estimate: err,
    })
}
