//! Monte Carlo sampling of `G(M, N)` and an exact dynamic-programming oracle
//! for small grids.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on `M * N * count` cell updates for one batch.
pub const DEFAULT_SAMPLE_BUDGET: u64 = 20_000_000_000;

/// Sampled values of `G(M, N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub seed: u64,
    pub count: usize,
    pub m: usize,
    pub n: usize,
    pub t: f64,
    pub values: Vec<u64>,
}

impl SampleBatch {
    /// `(g, multiplicity)` pairs in increasing `g`.
    pub fn histogram(&self) -> Vec<(u64, usize)> {
        let mut sorted = self.values.clone();
        sorted.sort_unstable();
        let mut out: Vec<(u64, usize)> = Vec::new();
        for v in sorted {
            match out.last_mut() {
                Some((g, c)) if *g == v => *c += 1,
                _ => out.push((v, 1)),
            }
        }
        out
    }
}

/// Inversion sampling of `P(w = k) = (1 - q) q^k` from `u` in `(0, 1]`.
fn geometric(u: f64, log_q: f64) -> u64 {
    (u.ln() / log_q).floor() as u64
}

/// One draw of `G(M, N)` from the stream keyed by `(seed, index)`.
pub fn sample_one(t: f64, m: usize, n: usize, seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let log_q = (t * t).ln();
    let mut row = vec![0u64; n];
    for _ in 0..m {
        let mut left = 0u64;
        for cell in row.iter_mut() {
            let u = 1.0 - rng.gen::<f64>();
            let w = geometric(u, log_q);
            let g = left.max(*cell) + w;
            *cell = g;
            left = g;
        }
    }
    row[n - 1]
}

pub fn sample_g(t: f64, m: usize, n: usize, seed: u64, count: usize) -> Result<SampleBatch> {
    sample_g_with_budget(t, m, n, seed, count, DEFAULT_SAMPLE_BUDGET)
}

pub fn sample_g_with_budget(t: f64, m: usize, n: usize, seed: u64, count: usize, budget: u64) -> Result<SampleBatch> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("t = {t} must lie in (0, 1)")));
    }
    if m == 0 || n == 0 || count == 0 {
        return Err(Error::Domain("M, N and count must be positive".into()));
    }
    let work = (m as u64).saturating_mul(n as u64).saturating_mul(count as u64);
    if work > budget {
        return Err(Error::Guard(format!("M*N*count = {work} exceeds budget {budget}")));
    }
    let values = (0..count as u64).into_par_iter().map(|i| sample_one(t, m, n, seed, i)).collect();
    Ok(SampleBatch { seed, count, m, n, t, values })
}

/// Fraction of sampled values `<= n`.
pub fn empirical_cdf(batch: &SampleBatch, n: i64) -> f64 {
    if n < 0 || batch.values.is_empty() {
        return 0.0;
    }
    let hits = batch.values.iter().filter(|&&v| v <= n as u64).count();
    hits as f64 / batch.values.len() as f64
}

/// Exact `P(G(M, N) <= n)` for `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSmallTable {
    pub m: usize,
    pub n: usize,
    pub t: f64,
    pub n_max: usize,
    pub cdf: Vec<f64>,
}

pub const ORACLE_MAX_M: usize = 4;
pub const ORACLE_MAX_N: usize = 8;
pub const ORACLE_MAX_LEVEL: usize = 12;

/// Brute-force law of `G(M, N)` by sweeping the grid cell by cell.
///
/// The state is the current frontier of last-passage values, capped at
/// `n_max + 1` (which absorbs everything larger). Works on the shorter side
/// of the grid so the frontier stays small.
pub fn exact_cdf_small(t: f64, m: usize, n: usize, n_max: usize) -> Result<ExactSmallTable> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("t = {t} must lie in (0, 1)")));
    }
    if m == 0 || n == 0 {
        return Err(Error::Domain("M and N must be positive".into()));
    }
    let (short, long) = if m <= n { (m, n) } else { (n, m) };
    if short > ORACLE_MAX_M || long > ORACLE_MAX_N || n_max > ORACLE_MAX_LEVEL {
        return Err(Error::Guard(format!(
            "oracle limited to min(M,N) <= {ORACLE_MAX_M}, max(M,N) <= {ORACLE_MAX_N}, n_max <= {ORACLE_MAX_LEVEL}"
        )));
    }
    let q = t * t;
    let cap = (n_max + 1) as u8;
    // weight law truncated at cap; the last entry is P(w >= cap)
    let mut wlaw: Vec<f64> = (0..cap).map(|k| (1.0 - q) * q.powi(k as i32)).collect();
    wlaw.push(q.powi(cap as i32));

    let mut states: HashMap<Vec<u8>, f64> = HashMap::new();
    states.insert(vec![0u8; short], 1.0);
    for _col in 0..long {
        for i in 0..short {
            let mut next: HashMap<Vec<u8>, f64> = HashMap::with_capacity(states.len());
            for (s, p) in &states {
                let below = if i > 0 { s[i - 1] } else { 0 };
                let base = below.max(s[i]);
                for (w, pw) in wlaw.iter().enumerate() {
                    let mut ns = s.clone();
                    ns[i] = (base as usize + w).min(cap as usize) as u8;
                    *next.entry(ns).or_insert(0.0) += p * pw;
                }
            }
            states = next;
        }
    }
    let mut pmf = vec![0.0; n_max + 2];
    for (s, p) in &states {
        pmf[s[short - 1] as usize] += p;
    }
    let mut cdf = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    for p in pmf.iter().take(n_max + 1) {
        acc += p;
        cdf.push(acc.min(1.0));
    }
    Ok(ExactSmallTable { m, n, t, n_max, cdf })
}
