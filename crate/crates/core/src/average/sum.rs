//! Deterministic parallel summation.
//!
//! The index range is cut into fixed chunks that do not depend on the
//! worker count. Inside a chunk, values are summed in 64-term blocks with
//! Neumaier compensation and the block sums are combined pairwise; chunk
//! sums are combined pairwise in index order. The result is therefore the
//! same bit pattern for any number of workers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};

pub const BLOCK: usize = 64;
pub const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

fn block_sum(vals: &[Complex64]) -> Complex64 {
    let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
    for v in vals {
        re.add(v.re);
        im.add(v.im);
    }
    Complex64::new(re.value(), im.value())
}

/// Pairwise (balanced binary tree) sum in index order.
pub fn pairwise(v: &[Complex64]) -> Complex64 {
    match v.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => v[0],
        n => pairwise(&v[..n / 2]) + pairwise(&v[n / 2..]),
    }
}

fn chunk_sum<F>(f: &F, start: i64, len: usize) -> Result<Complex64>
where
    F: Fn(i64) -> Result<Complex64>,
{
    let mut vals = Vec::with_capacity(len);
    for i in 0..len as i64 {
        vals.push(f(start + i)?);
    }
    let blocks: Vec<Complex64> = vals.chunks(BLOCK).map(block_sum).collect();
    Ok(pairwise(&blocks))
}

/// A shared pool per worker count.
pub fn pool(workers: usize) -> Result<Arc<ThreadPool>> {
    if workers == 0 {
        return Err(Error::InvalidInput("worker count must be >= 1".into()));
    }
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<ThreadPool>>>> = OnceLock::new();
    let mut map = POOLS
        .get_or_init(|| Mutex::new(HashMap::new()))
        .lock()
        .unwrap_or_else(|p| p.into_inner());
    if let Some(p) = map.get(&workers) {
        return Ok(p.clone());
    }
    let p = Arc::new(
        ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?,
    );
    map.insert(workers, p.clone());
    Ok(p)
}

/// Number of workers to use when none is given.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// `Σ_{i < len} f(start + i)` with the fixed partition described above.
pub fn deterministic_sum<F>(f: &F, start: i64, len: usize, workers: usize) -> Result<Complex64>
where
    F: Fn(i64) -> Result<Complex64> + Sync,
{
    let chunks = len.div_ceil(CHUNK);
    let run = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let n = CHUNK.min(len - lo);
                chunk_sum(f, start + lo as i64, n)
            })
            .collect::<Result<Vec<Complex64>>>()
    };
    let sums = if workers == 1 {
        (0..chunks)
            .map(|c| {
                let lo = c * CHUNK;
                chunk_sum(f, start + lo as i64, CHUNK.min(len - lo))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        pool(workers)?.install(run)?
    };
    Ok(pairwise(&sums))
}
