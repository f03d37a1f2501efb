//! Shift-compactness probe: how well can `a_{n+k}` be matched to `a_n`
//! after twisting by a character `e(nt)` and a unimodular constant?
//!
//! For each shift `k` the probe reports
//!
//! ```text
//! d_inf(k) = min_{t, |c| = 1} max_{n < W} |c e(nt) a_{n+k} - a_n|
//! d_2(k)   = min_{|c| = 1} ((1/W) Σ_{n < W} |c e(nt) a_{n+k} - a_n|^2)^{1/2}   at the same t
//! ```
//!
//! The search over `t` is a coarse FFT pass on a grid of `G` points, ranked by
//! `d_2`, followed by golden-section refinement of `d_inf` around the best
//! cells. The maximum over `n` is taken over the sampled window only, so for a
//! fixed `t` the reported `d_inf` never exceeds the true sup distance.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{e, frac_mul_int, wrap01};
use crate::seq::NilseqExpr;

use super::sum::{pairwise, pool};

pub const DEFAULT_T_GRID: usize = 32768;
const CANDIDATES: usize = 8;
const GOLDEN_STEPS: usize = 80;
const PHASE_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeRow {
    pub k: i64,
    pub best_t: f64,
    pub d_inf: f64,
    pub d_2: f64,
}

/// Data for one shift: `b_n = a_{n+k} conj(a_n)` and the pieces needed for
/// non-unimodular sequences.
struct ShiftData<'a> {
    u: &'a [Complex64],
    v: &'a [Complex64],
    b: Vec<Complex64>,
    b_turns: Vec<f64>,
    mean_u2: f64,
    mean_v2: f64,
    unimodular: bool,
}

impl<'a> ShiftData<'a> {
    fn new(u: &'a [Complex64], v: &'a [Complex64], unimodular: bool) -> Self {
        let b: Vec<Complex64> = u.iter().zip(v).map(|(x, y)| x * y.conj()).collect();
        let b_turns = b
            .iter()
            .map(|z| wrap01(z.im.atan2(z.re) / std::f64::consts::TAU))
            .collect();
        let w = u.len() as f64;
        ShiftData {
            mean_u2: u.iter().map(|z| z.norm_sqr()).sum::<f64>() / w,
            mean_v2: v.iter().map(|z| z.norm_sqr()).sum::<f64>() / w,
            u,
            v,
            b,
            b_turns,
            unimodular,
        }
    }

    fn window(&self) -> usize {
        self.b.len()
    }

    fn d2_from_corr(&self, corr_abs: f64) -> f64 {
        let w = self.window() as f64;
        (self.mean_u2 + self.mean_v2 - 2.0 * corr_abs / w)
            .max(0.0)
            .sqrt()
    }

    fn d_2(&self, t: f64) -> f64 {
        let t = wrap01(t);
        let terms: Vec<Complex64> = self
            .b
            .iter()
            .enumerate()
            .map(|(n, z)| e(frac_mul_int(n as i128, t)) * z)
            .collect();
        self.d2_from_corr(pairwise(&terms).norm())
    }

    fn d_inf(&self, t: f64) -> f64 {
        let t = wrap01(t);
        if self.unimodular {
            let turns: Vec<f64> = self
                .b_turns
                .iter()
                .enumerate()
                .map(|(n, p)| wrap01(frac_mul_int(n as i128, t) + p))
                .collect();
            let arc = 1.0 - max_circular_gap(&turns);
            2.0 * (std::f64::consts::PI * arc / 2.0).sin()
        } else {
            let w: Vec<Complex64> = self
                .u
                .iter()
                .enumerate()
                .map(|(n, z)| e(frac_mul_int(n as i128, t)) * z)
                .collect();
            let cost = |phi: f64| {
                let c = e(phi);
                w.iter()
                    .zip(self.v)
                    .map(|(x, y)| (c * x - y).norm())
                    .fold(0.0, f64::max)
            };
            let h = 1.0 / PHASE_GRID as f64;
            let (best, _) = (0..PHASE_GRID)
                .map(|j| (j as f64 * h, cost(j as f64 * h)))
                .fold(
                    (0.0, f64::INFINITY),
                    |acc, x| if x.1 < acc.1 { x } else { acc },
                );
            golden_min(&cost, best - h, best + h).1
        }
    }
}

/// Largest gap between consecutive points on the circle `[0, 1)`, in O(n)
/// by bucketing (the maximal gap is at least the bucket width).
fn max_circular_gap(pts: &[f64]) -> f64 {
    let n = pts.len();
    if n <= 1 {
        return 1.0;
    }
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for &p in pts {
        let i = ((p * n as f64) as usize).min(n - 1);
        lo[i] = lo[i].min(p);
        hi[i] = hi[i].max(p);
    }
    let mut first = None;
    let mut prev_hi = f64::NAN;
    let mut gap: f64 = 0.0;
    for i in 0..n {
        if lo[i].is_infinite() {
            continue;
        }
        match first {
            None => first = Some(lo[i]),
            Some(_) => gap = gap.max(lo[i] - prev_hi),
        }
        prev_hi = hi[i];
    }
    // wrap-around gap from the last point to the first
    gap.max(first.unwrap_or(0.0) + 1.0 - prev_hi)
}

/// Golden-section search for a minimum of `f` on `[a, b]`. Returns `(x, f(x))`.
fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_STEPS {
        if b - a < 1e-15 {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn probe_one(data: &ShiftData<'_>, k: i64, g: usize, fft: &Arc<dyn rustfft::Fft<f64>>) -> ProbeRow {
    // X_j = Σ_n b_n e(n j / G), folding n mod G
    let mut buf = vec![Complex64::new(0.0, 0.0); g];
    for (n, z) in data.b.iter().enumerate() {
        buf[n % g] += z;
    }
    fft.process(&mut buf);
    let mags: Vec<f64> = buf.iter().map(|z| z.norm()).collect();
    let mut peaks: Vec<usize> = (0..g)
        .filter(|&j| {
            let l = mags[(j + g - 1) % g];
            let r = mags[(j + 1) % g];
            mags[j] >= l && mags[j] >= r
        })
        .collect();
    peaks.sort_by(|&i, &j| mags[j].total_cmp(&mags[i]).then(i.cmp(&j)));
    peaks.truncate(CANDIDATES);
    if peaks.is_empty() {
        peaks.push(0);
    }
    let h = 1.0 / g as f64;
    let mut best = (f64::INFINITY, 0.0);
    for &j in &peaks {
        let t0 = j as f64 * h;
        let f = |t: f64| data.d_inf(t);
        let mut cand = (f(t0), t0);
        let (x, fx) = golden_min(&f, t0 - h, t0 + h);
        if fx < cand.0 {
            cand = (fx, x);
        }
        if cand.0 < best.0 {
            best = cand;
        }
    }
    let best_t = wrap01(best.1);
    ProbeRow {
        k,
        best_t,
        d_inf: best.0,
        d_2: data.d_2(best_t),
    }
}

/// Runs the probe for every shift in `shifts` over the window `0 <= n < window`.
pub fn shift_compactness_probe(
    a: &NilseqExpr,
    shifts: &[i64],
    window: usize,
    t_grid: usize,
    workers: usize,
) -> Result<Vec<ProbeRow>> {
    if window < 1000 {
        return Err(Error::InvalidInput(format!(
            "probe window must be >= 1000, got {window}"
        )));
    }
    if t_grid < 2 {
        return Err(Error::InvalidInput("t_grid must be >= 2".into()));
    }
    if shifts.is_empty() {
        return Ok(Vec::new());
    }
    let kmin = shifts.iter().copied().min().unwrap_or(0).min(0);
    let kmax = shifts.iter().copied().max().unwrap_or(0).max(0);
    let lo = kmin;
    let hi = (window as i64)
        .checked_add(kmax)
        .ok_or_else(|| Error::Overflow("probe range".into()))?;
    let vals = a.eval_range(lo, hi)?;
    let at = |n: i64| (n - lo) as usize;
    let v = &vals[at(0)..at(window as i64)];
    let unimodular = a.is_unimodular();
    let fft = FftPlanner::new().plan_fft_inverse(t_grid);
    let run = |k: &i64| {
        let u = &vals[at(*k)..at(*k + window as i64)];
        probe_one(&ShiftData::new(u, v, unimodular), *k, t_grid, &fft)
    };
    let rows = if workers == 1 {
        shifts.iter().map(run).collect()
    } else {
        pool(workers)?.install(|| shifts.par_iter().map(run).collect())
    };
    Ok(rows)
}
