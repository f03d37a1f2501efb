//! Built-in acceptance run. Each criterion reports a statistic and the
//! threshold it must stay below; the report contains no timings, so it is
//! byte-identical for a given seed and any worker count.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::average::{
    cesaro_av, inner_product, quad_norm, shift_compactness_probe, DEFAULT_T_GRID,
};
use crate::classify::{
    apply_witness, bridge_statistic, forced_t_prime, is_symplectic, j_matrix, search_witness,
    skew_normal_form, symplectic_diag, symplectic_shear_lower, symplectic_shear_upper,
    verify_witness, ClassParams, ClassWitness, RatMatrix, SearchBounds, SearchOutcome,
};
use crate::error::Result;
use crate::exactnum::{e, rat, IrrationalBasis, QAffineReal};
use crate::nilsys::{
    c1_gaussian, fiber_fourier, AffineSkewSystem, HeisenbergElement, HeisenbergSystem,
};
use crate::seq::json::SCHEMA;
use crate::seq::{heisenberg_closed_form, NilseqExpr};
use crate::theta::{kappa, kappa_abs_sq_mean, theta3_at_i, KappaAccuracy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelftestConfig {
    pub quick: bool,
    pub seed: u64,
    pub workers: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            quick: false,
            seed: 42,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub quick: bool,
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "quick": self.quick,
            "seed": self.seed,
            "all_passed": self.all_passed(),
            "criteria": self.criteria,
        })
    }
}

/// Criteria whose statistic must be strictly below the threshold.
fn below(id: u32, name: &str, statistic: f64, threshold: f64) -> CriterionResult {
    CriterionResult {
        id,
        name: name.into(),
        statistic,
        threshold,
        passed: statistic < threshold,
    }
}

fn std_q(text: &str) -> QAffineReal {
    QAffineReal::parse(text, &IrrationalBasis::standard()).expect("valid literal")
}

fn theta_grid() -> impl Iterator<Item = (f64, f64)> {
    (0..64).flat_map(|i| (0..64).map(move |j| (i as f64 / 64.0, -1.0 + 2.0 * j as f64 / 64.0)))
}

fn theta_identity() -> Result<f64> {
    let acc = KappaAccuracy::default();
    let mut worst: f64 = 0.0;
    for (s, t) in theta_grid() {
        let th = theta3_at_i(Complex64::new(s, t))? * (-std::f64::consts::PI * t * t).exp();
        worst = worst.max((kappa(s, t, &acc)? - th).norm());
    }
    Ok(worst)
}

fn quasi_periodicity() -> Result<f64> {
    let acc = KappaAccuracy::default();
    let mut worst: f64 = 0.0;
    for (s, t) in theta_grid() {
        worst = worst.max((kappa(s, t + 1.0, &acc)? - e(-s) * kappa(s, t, &acc)?).norm());
    }
    Ok(worst)
}

/// `d` pairs of parameters on distinct basis symbols, hence independent mod 1.
fn random_pairs(rng: &mut ChaCha8Rng, d: usize) -> Vec<(QAffineReal, QAffineReal)> {
    let basis = IrrationalBasis::standard();
    let mut idx: Vec<usize> = (0..basis.len()).collect();
    idx.shuffle(rng);
    let mut draw = |i: usize| {
        let c = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let sym = QAffineReal::symbol(basis.label(i), &basis).expect("basis symbol");
        sym.scale(&rat(c, 1))
            .add_rational(&rat(rng.gen_range(-5..=5), rng.gen_range(1..=7)))
    };
    let vals: Vec<QAffineReal> = idx[..2 * d].iter().map(|&i| draw(i)).collect();
    (0..d)
        .map(|i| (vals[i].clone(), vals[d + i].clone()))
        .collect()
}

fn orbit_bridge(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for d in [1, 2] {
        let pairs = random_pairs(rng, d);
        let gamma = std_q("xi4").add_rational(&rat(rng.gen_range(0..10), 11));
        let sys = HeisenbergSystem::new(
            pairs.iter().map(|p| p.0.clone()).collect(),
            pairs.iter().map(|p| p.1.clone()).collect(),
            gamma,
        )?;
        let closed = heisenberg_closed_form(&sys)?;
        for n in -10_000..=10_000 {
            worst = worst.max((sys.orbit_value(n)? - closed.eval(n)?).norm());
        }
    }
    Ok(worst)
}

fn affine_bridge(rng: &mut ChaCha8Rng) -> Result<f64> {
    let pair = random_pairs(rng, 1).remove(0);
    let sys = AffineSkewSystem::new(pair.0, pair.1)?;
    let n_max = 100_000;
    let iterated = sys.iterate_values(n_max)?;
    let mut worst: f64 = 0.0;
    for (n, it) in iterated.iter().enumerate() {
        worst = worst.max((it - sys.closed_form(n as i64)?).norm());
    }
    Ok(worst)
}

fn omega_std() -> Result<NilseqExpr> {
    NilseqExpr::omega(std_q("xi1"), std_q("xi2"))
}

fn quad_norm_constant(n: u64, workers: usize) -> Result<f64> {
    let target = kappa_abs_sq_mean()?.sqrt();
    Ok((quad_norm(&omega_std()?, n, workers)?.value - target).abs())
}

fn zero_averages(rng: &mut ChaCha8Rng, n: u64, workers: usize) -> Result<f64> {
    let mut worst = cesaro_av(&omega_std()?, n, workers)?.value.norm();
    let qa = NilseqExpr::quad(std_q("xi1"));
    for _ in 0..5 {
        let s = QAffineReal::rational(
            rat(rng.gen_range(0..1_000_000), 1_000_000),
            &IrrationalBasis::standard(),
        );
        worst = worst.max(
            inner_product(&qa, &NilseqExpr::exp(s), n, workers)?
                .value
                .norm(),
        );
    }
    Ok(worst)
}

fn class_bridge() -> Result<f64> {
    let p = ClassParams::new(std_q("1/2*xi2"), vec![(std_q("xi1"), std_q("xi2"))])?;
    let pp = ClassParams::new(std_q("0"), vec![(std_q("xi1 + 1/2"), std_q("xi2"))])?;
    let w = ClassWitness::new(
        RatMatrix::identity(2),
        BigInt::from(2),
        vec![BigInt::from(1)],
        vec![BigInt::zero()],
    )?;
    Ok(bridge_statistic(&p, &pp, &w, 20_000)?.max_deviation)
}

fn small_symmetric(rng: &mut ChaCha8Rng, d: usize) -> RatMatrix {
    let mut s = RatMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = rat(rng.gen_range(-3..=3), rng.gen_range(1..=2));
            s.set(i, j, v.clone());
            s.set(j, i, v);
        }
    }
    s
}

fn random_symplectic(rng: &mut ChaCha8Rng, d: usize) -> Result<RatMatrix> {
    let mut m = RatMatrix::identity(2 * d);
    for _ in 0..rng.gen_range(1..=4) {
        let g = match rng.gen_range(0..4) {
            0 => symplectic_shear_upper(&small_symmetric(rng, d))?,
            1 => symplectic_shear_lower(&small_symmetric(rng, d))?,
            2 => j_matrix(d),
            _ => {
                let mut a = RatMatrix::identity(d);
                if d > 1 {
                    a.set(0, 1, rat(rng.gen_range(-3..=3), 1));
                } else {
                    a.set(0, 0, rat(rng.gen_range(1..=4), rng.gen_range(1..=3)));
                }
                symplectic_diag(&a)?
            }
        };
        m = g.mul(&m)?;
    }
    Ok(m)
}

/// Number of failures among the three exact suites.
fn symplectic_suite(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut failures = 0u32;
    let idx = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut done = 0;
    while done < 100 {
        let mut b = RatMatrix::zeros(4, 4);
        for (i, j) in idx {
            let x: BigRational = rat(rng.gen_range(-5..=5), rng.gen_range(1..=3));
            b.set(i, j, x.clone());
            b.set(j, i, -x);
        }
        if b.det()?.is_zero() {
            continue;
        }
        done += 1;
        let phi = skew_normal_form(&b)?;
        if phi.transpose().mul(&j_matrix(2))?.mul(&phi)? != b {
            failures += 1;
        }
    }
    for _ in 0..100 {
        let d = rng.gen_range(1..=2);
        let (m, n) = (random_symplectic(rng, d)?, random_symplectic(rng, d)?);
        if !(is_symplectic(&m.mul(&n)?)? && is_symplectic(&m.inverse()?)?) {
            failures += 1;
        }
    }
    for _ in 0..100 {
        let d = rng.gen_range(1..=2);
        let p = ClassParams::new(
            std_q("0").add_rational(&rat(rng.gen_range(0..6), 6)),
            random_pairs(rng, d),
        )?;
        let m = rng.gen_range(1..=5);
        let c: Vec<BigInt> = (0..2 * d)
            .map(|_| BigInt::from(rng.gen_range(-3..=3)))
            .collect();
        let w = ClassWitness::new(
            random_symplectic(rng, d)?,
            BigInt::from(m),
            c[..d].to_vec(),
            c[d..].to_vec(),
        )?;
        let pp = apply_witness(&p, &w, &forced_t_prime(&p, &w)?)?;
        let bounds = SearchBounds {
            m_max: m as u64,
            shift_max: w.max_shift().try_into().unwrap_or(u64::MAX),
            height_max: w.q().height().try_into().unwrap_or(u64::MAX),
        };
        let ok = match search_witness(&p, &pp, bounds)? {
            SearchOutcome::Found(found) => verify_witness(&p, &pp, &found)?,
            _ => false,
        };
        if !ok {
            failures += 1;
        }
    }
    Ok(failures as f64)
}

struct ProbeStats {
    floor_d2_last: f64,
    floor_min_dinf: f64,
    quad_max_dinf: f64,
}

const PROBE_SHIFTS: [i64; 6] = [1, 2, 5, 12, 29, 70];

fn probes(workers: usize) -> Result<ProbeStats> {
    let floor = NilseqExpr::floor_linear(std_q("xi1"), std_q("xi2"))?;
    let rows = shift_compactness_probe(&floor, &PROBE_SHIFTS, 10_000, DEFAULT_T_GRID, workers)?;
    let quad = shift_compactness_probe(
        &NilseqExpr::quad(std_q("xi1")),
        &PROBE_SHIFTS,
        10_000,
        DEFAULT_T_GRID,
        workers,
    )?;
    Ok(ProbeStats {
        floor_d2_last: rows.last().map_or(f64::INFINITY, |r| r.d_2),
        floor_min_dinf: rows.iter().map(|r| r.d_inf).fold(f64::INFINITY, f64::min),
        quad_max_dinf: quad.iter().map(|r| r.d_inf).fold(0.0, f64::max),
    })
}

fn fiber(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut coord = || rng.gen_range(0.0..1.0);
    let point = HeisenbergElement::new(vec![coord(), coord()], vec![coord(), coord()], e(coord()))?;
    let direct = c1_gaussian(&point)?;
    let mut worst = (fiber_fourier(c1_gaussian, &point, 1, 8)? - direct).norm();
    for chi in [0, -1, 2] {
        worst = worst.max(fiber_fourier(c1_gaussian, &point, chi, 8)?.norm());
    }
    Ok(worst)
}

/// Bit-level comparison of a few worker-sensitive statistics.
fn determinism(n: u64) -> Result<f64> {
    let om = omega_std()?;
    let reference = (cesaro_av(&om, n, 1)?.value, quad_norm(&om, n, 1)?.value);
    let mut mismatches = 0u32;
    for w in [2, 8] {
        let got = (cesaro_av(&om, n, w)?.value, quad_norm(&om, n, w)?.value);
        let same = got.0.re.to_bits() == reference.0.re.to_bits()
            && got.0.im.to_bits() == reference.0.im.to_bits()
            && got.1.to_bits() == reference.1.to_bits();
        if !same {
            mismatches += 1;
        }
    }
    Ok(mismatches as f64)
}

/// Runs every criterion. Sub-seeds are derived from `cfg.seed` per criterion
/// so that each one sees the same stream regardless of the others.
pub fn run_selftest(cfg: &SelftestConfig) -> Result<SelftestReport> {
    let scale = if cfg.quick { 3.0 } else { 1.0 };
    let n_avg: u64 = if cfg.quick { 100_000 } else { 1_000_000 };
    let workers = cfg.workers.max(1);
    let rng = |k: u64| {
        ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k))
    };

    let mut criteria = vec![
        below(1, "theta identity", theta_identity()?, 1e-12 * scale),
        below(2, "quasi-periodicity", quasi_periodicity()?, 1e-12 * scale),
        below(
            3,
            "Heisenberg orbit vs closed form",
            orbit_bridge(&mut rng(3))?,
            1e-9 * scale,
        ),
        below(
            4,
            "affine iteration vs closed form",
            affine_bridge(&mut rng(4))?,
            1e-9 * scale,
        ),
        below(
            5,
            "quadratic norm of omega",
            quad_norm_constant(n_avg, workers)?,
            0.01 * scale,
        ),
        below(
            6,
            "zero averages",
            zero_averages(&mut rng(6), n_avg, workers)?,
            0.02 * scale,
        ),
        below(
            7,
            "class-equivalence ratio bridge",
            class_bridge()?,
            1e-6 * scale,
        ),
        below(
            8,
            "exact symplectic suite failures",
            symplectic_suite(&mut rng(8))?,
            0.5,
        ),
    ];
    let pr = probes(workers)?;
    criteria.push(below(
        9,
        "floor probe: d_2 at k = 70",
        pr.floor_d2_last,
        0.15,
    ));
    criteria.push(CriterionResult {
        id: 9,
        name: "floor probe: min d_inf".into(),
        statistic: pr.floor_min_dinf,
        threshold: 0.3,
        passed: pr.floor_min_dinf > 0.3,
    });
    criteria.push(below(
        9,
        "quadratic probe: max d_inf",
        pr.quad_max_dinf,
        0.05,
    ));
    criteria.push(below(
        10,
        "fiber Fourier",
        fiber(&mut rng(10))?,
        1e-12 * scale,
    ));
    criteria.push(below(
        11,
        "worker-count determinism mismatches",
        determinism(50_000)?,
        0.5,
    ));
    Ok(SelftestReport {
        quick: cfg.quick,
        seed: cfg.seed,
        criteria,
    })
}
