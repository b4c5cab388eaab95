//! Exact law of `G(M, N)` from Toeplitz determinants of the symbol
//! `(1 + t z)^M (1 + t/z)^N`.
//!
//! `P(G <= n) = D_n / Z` with `Z = (1 - t^2)^(-MN)`, and the ratios
//! `N_k = D_{k+1} / D_k` come out of a nonsymmetric Levinson recursion.
//! Toeplitz matrices of this symbol are badly conditioned (roughly
//! `((1+t)/(1-t))^(M+N)`), so the recursion and the LU reference run in
//! multiprecision with a working precision sized to that bound.

use rug::{Assign, Float};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest order accepted by the LU reference.
pub const LU_MAX_ORDER: usize = 2048;
/// Default truncation tolerance for `|log N_k|` at the last retained `k`.
pub const DEFAULT_TRUNCATION_EPS: f64 = 1e-14;
const GUARD_BITS: u32 = 128;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub t: f64,
    pub m: usize,
    pub n: usize,
}

impl SymbolSpec {
    pub fn new(t: f64, m: usize, n: usize) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(format!("t = {t} must lie in (0, 1)")));
        }
        if m == 0 || n == 0 {
            return Err(Error::Domain("M and N must be positive".into()));
        }
        Ok(Self { t, m, n })
    }

    /// `log Z = -MN log(1 - t^2)`.
    pub fn log_partition(&self) -> f64 {
        -((self.m * self.n) as f64) * (-self.t * self.t).ln_1p()
    }

    /// Working precision in bits for exact-arithmetic stand-ins.
    pub fn precision_bits(&self) -> u32 {
        let growth = ((1.0 + self.t) / (1.0 - self.t)).log2();
        ((self.m + self.n) as f64 * growth).ceil() as u32 + GUARD_BITS
    }

    /// A generous bound on how far the ratio sequence must run.
    fn default_cap(&self, eps: f64) -> usize {
        let q = self.t * self.t;
        let (m, n) = (self.m as f64, self.n as f64);
        let bulk = (q * (m + n) + 2.0 * (q * m * n).sqrt()) / (1.0 - q);
        let tail = (eps.ln() / q.ln()).ceil().max(1.0);
        let cap = (2.0 * bulk).ceil() + 4.0 * tail + 64.0;
        (cap as usize).max(4 * (self.m + self.n))
    }
}

/// `log phi_j` by the ratio recursion of the binomial sum, or `None` when
/// `phi_j = 0` (outside `[-N, M]`).
pub fn log_symbol_coefficient(spec: &SymbolSpec, j: i64) -> Option<f64> {
    let (m, n) = (spec.m as i64, spec.n as i64);
    if j > m || j < -n {
        return None;
    }
    let k0 = (-j).max(0);
    let k1 = n.min(m - j);
    let log_t = spec.t.ln();
    let log_binom = |top: i64, k: i64| -> f64 {
        let k = k.min(top - k);
        (0..k).map(|i| ((top - i) as f64 / (i + 1) as f64).ln()).sum()
    };
    let mut log_term = log_binom(m, j + k0) + log_binom(n, k0) + (j + 2 * k0) as f64 * log_t;
    let mut logs = Vec::with_capacity((k1 - k0 + 1) as usize);
    logs.push(log_term);
    for k in k0..k1 {
        let step = ((m - j - k) as f64 / (j + k + 1) as f64) * ((n - k) as f64 / (k + 1) as f64);
        log_term += step.ln() + 2.0 * log_t;
        logs.push(log_term);
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Some(top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln())
}

/// Fourier coefficient `phi_j` of the symbol, zero outside `[-N, M]`.
pub fn symbol_coefficient(spec: &SymbolSpec, j: i64) -> f64 {
    log_symbol_coefficient(spec, j).map_or(0.0, f64::exp)
}

/// All coefficients `phi_{-N..=M}` at `prec` bits; index `j + N`.
fn symbol_coefficients_mp(spec: &SymbolSpec, prec: u32) -> Vec<Float> {
    let (m, n) = (spec.m, spec.n);
    let t = Float::with_val(prec, spec.t);
    let t2 = Float::with_val(prec, &t * &t);
    let binom = |top: usize| -> Vec<Float> {
        let mut row = Vec::with_capacity(top + 1);
        let mut c = Float::with_val(prec, 1);
        row.push(c.clone());
        for i in 0..top {
            c *= (top - i) as u32;
            c /= (i + 1) as u32;
            row.push(c.clone());
        }
        row
    };
    let cm = binom(m);
    let cn = binom(n);
    let mut tpow = Vec::with_capacity(m + 2 * n + 1);
    let mut p = Float::with_val(prec, 1);
    for _ in 0..=(m + 2 * n) {
        tpow.push(p.clone());
        p *= &t;
    }
    drop(t2);
    let mut out = Vec::with_capacity(m + n + 1);
    for j in -(n as i64)..=(m as i64) {
        let mut s = Float::with_val(prec, 0);
        let k0 = (-j).max(0) as usize;
        let k1 = n.min((m as i64 - j) as usize);
        for k in k0..=k1 {
            let i = (j + k as i64) as usize;
            let mut term = Float::with_val(prec, &cm[i] * &cn[k]);
            term *= &tpow[i + k];
            s += &term;
        }
        out.push(s);
    }
    out
}

/// Options for building a [`DistributionTable`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOptions {
    /// Stop once the remaining tail of `sum log N_k` is below this.
    pub eps: f64,
    /// Always compute at least `N_0..=N_{min_k}`.
    pub min_k: usize,
    /// Hard cap on `k`; `None` uses a bound derived from the bulk of `G`.
    pub k_cap: Option<usize>,
    /// Stop at `min_k` without waiting for convergence.
    pub stop_at_min: bool,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self { eps: DEFAULT_TRUNCATION_EPS, min_k: 0, k_cap: None, stop_at_min: false }
    }
}

/// Exact log-CDF of `G(M, N)` together with the ratio sequence `N_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionTable {
    pub spec: SymbolSpec,
    /// `log N_k` for `k = 0..=k_max`.
    pub log_ratios: Vec<f64>,
    /// `log P(G <= n)` for `n = 0..=k_max + 1`; the tail past `k_max` is dropped.
    pub log_cdf: Vec<f64>,
    pub k_max: usize,
    pub truncation_eps: f64,
    pub converged: bool,
    pub warning: Option<String>,
    pub precision_bits: u32,
    /// True when the LU fallback produced the ratios.
    pub used_fallback: bool,
}

impl DistributionTable {
    pub fn build(spec: SymbolSpec, opts: TableOptions) -> Result<Self> {
        let cap = opts.k_cap.unwrap_or_else(|| spec.default_cap(opts.eps)).max(opts.min_k);
        let prec = spec.precision_bits();
        let (log_ratios, converged, used_fallback) = match levinson_log_ratios(&spec, prec, cap, &opts) {
            Ok((r, c)) => (r, c, false),
            Err(Error::Breakdown { .. }) if cap < LU_MAX_ORDER / 4 => {
                let r = lu_log_ratios(&spec, 2 * prec, cap + 1)?;
                let c = r.last().is_some_and(|l| *l < opts.eps);
                (r, c, true)
            }
            Err(e) => return Err(e),
        };
        let k_max = log_ratios.len() - 1;
        let mut log_cdf = vec![0.0; k_max + 2];
        let mut acc = 0.0;
        for k in (0..=k_max).rev() {
            acc -= log_ratios[k];
            log_cdf[k] = acc;
        }
        let warning = (!converged && !opts.stop_at_min).then(|| {
            format!(
                "ratio sequence stopped at k = {k_max} with log N_k = {:.3e} >= eps = {:.1e}",
                log_ratios[k_max], opts.eps
            )
        });
        Ok(Self {
            spec,
            log_ratios,
            log_cdf,
            k_max,
            truncation_eps: opts.eps,
            converged,
            warning,
            precision_bits: prec,
            used_fallback,
        })
    }

    /// `N_k` (may overflow to infinity for deep-tail `k`).
    pub fn ratio(&self, k: usize) -> f64 {
        self.log_ratios[k].exp()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.log_ratios.iter().map(|l| l.exp()).collect()
    }

    /// `log P(G <= n)`; zero beyond the retained range.
    pub fn log_cdf_at(&self, n: usize) -> f64 {
        self.log_cdf.get(n).copied().unwrap_or(0.0)
    }

    /// `log D_n = sum_{k<n} log N_k`.
    pub fn log_det(&self, n: usize) -> f64 {
        self.log_ratios[..n.min(self.log_ratios.len())].iter().sum()
    }

    /// `log P(G <= n)` through `log D_n - log Z` instead of the tail product.
    pub fn log_cdf_via_det(&self, n: usize) -> f64 {
        self.log_det(n) - self.spec.log_partition()
    }

    /// `-Y21(0; k) = 1 / N_{k-1}` for `k >= 1`.
    pub fn y21(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        Ok(self.log_ratios.get(k - 1).map_or(1.0, |l| (-l).exp()))
    }

    /// `log(-Y21(0; k))`.
    pub fn log_y21(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        Ok(self.log_ratios.get(k - 1).map_or(0.0, |l| -l))
    }

    /// `P(G = n)` for `n = 0..=k_max + 1`.
    pub fn pmf(&self) -> Vec<f64> {
        let cdf: Vec<f64> = self.log_cdf.iter().map(|l| l.exp()).collect();
        let mut out = Vec::with_capacity(cdf.len());
        let mut prev = 0.0;
        for c in cdf {
            out.push(c - prev);
            prev = c;
        }
        out
    }
}

/// Ratios `log N_k` for `k = 0..=k_cap` (or until converged).
pub fn ratio_sequence(spec: &SymbolSpec, k_max: usize, eps: f64) -> Result<DistributionTable> {
    if k_max < 1 {
        return Err(Error::Domain("k_max must be at least 1".into()));
    }
    DistributionTable::build(*spec, TableOptions { eps, min_k: 0, k_cap: Some(k_max), stop_at_min: false })
}

fn levinson_log_ratios(spec: &SymbolSpec, prec: u32, cap: usize, opts: &TableOptions) -> Result<(Vec<f64>, bool)> {
    let phi = symbol_coefficients_mp(spec, prec);
    let (m, n) = (spec.m as i64, spec.n as i64);
    let coef = |j: i64| -> Option<&Float> {
        if j < -n || j > m {
            None
        } else {
            Some(&phi[(j + n) as usize])
        }
    };
    let tail_scale = 1.0 / (1.0 - spec.t * spec.t);

    let mut x: Vec<Float> = Vec::with_capacity(cap + 2);
    let mut y: Vec<Float> = Vec::with_capacity(cap + 2);
    x.push(Float::with_val(prec, 1));
    y.push(Float::with_val(prec, 1));
    let mut err = coef(0).expect("phi_0 exists").clone();
    let mut eta = Float::new(prec);
    let mut eta_b = Float::new(prec);
    let mut tmp = Float::new(prec);
    let mut rho = Float::new(prec);
    let mut rho_b = Float::new(prec);
    let mut out = Vec::with_capacity(cap + 1);
    let mut converged = false;

    for step in 0..=cap {
        if !(err.is_finite() && err.cmp0() == Some(std::cmp::Ordering::Greater)) {
            return Err(Error::Breakdown { step, detail: format!("prediction error {err}") });
        }
        let log_ratio = Float::with_val(prec, err.ln_ref()).to_f64();
        if log_ratio < -1e-12 {
            return Err(Error::Breakdown { step, detail: format!("log N_k = {log_ratio} < 0") });
        }
        out.push(log_ratio.max(0.0));
        if step >= opts.min_k {
            if opts.stop_at_min {
                converged = log_ratio * tail_scale < opts.eps;
                break;
            }
            if log_ratio * tail_scale < opts.eps {
                converged = true;
                break;
            }
        }
        if step == cap {
            break;
        }
        let s = step as i64;
        // eta = sum_k phi_{s+1-k} x_k, eta_b = sum_k phi_{-(k+1)} y_k
        eta.assign(0);
        for k in (s + 1 - m).max(0)..=s {
            if let Some(c) = coef(s + 1 - k) {
                eta += c * &x[k as usize];
            }
        }
        eta_b.assign(0);
        for k in 0..=s.min(n - 1) {
            if let Some(c) = coef(-(k + 1)) {
                eta_b += c * &y[k as usize];
            }
        }
        rho.assign(&eta / &err);
        rho_b.assign(&eta_b / &err);
        // x <- [x; 0] - rho [0; y],  y <- [0; y] - rho_b [x; 0]
        x.push(Float::with_val(prec, 0));
        y.push(Float::with_val(prec, 0));
        for i in (0..x.len()).rev() {
            if i > 0 {
                tmp.assign(&y[i - 1]);
            } else {
                tmp.assign(0);
            }
            tmp -= &rho_b * &x[i];
            if i > 0 {
                let yi = &y[i - 1];
                x[i] -= &rho * yi;
            }
            std::mem::swap(&mut y[i], &mut tmp);
        }
        tmp.assign(&rho * &rho_b);
        tmp = Float::with_val(prec, 1) - &tmp;
        err *= &tmp;
    }
    Ok((out, converged))
}

/// Dense `n x n` Toeplitz matrix at `prec` bits.
fn toeplitz_matrix_mp(spec: &SymbolSpec, prec: u32, order: usize) -> Vec<Vec<Float>> {
    let phi = symbol_coefficients_mp(spec, prec);
    let (m, n) = (spec.m as i64, spec.n as i64);
    (0..order as i64)
        .map(|r| {
            (0..order as i64)
                .map(|c| {
                    let j = r - c;
                    if j < -n || j > m {
                        Float::with_val(prec, 0)
                    } else {
                        phi[(j + n) as usize].clone()
                    }
                })
                .collect()
        })
        .collect()
}

/// Leading-minor ratios from unpivoted elimination: `N_k = U_kk`.
fn lu_log_ratios(spec: &SymbolSpec, prec: u32, order: usize) -> Result<Vec<f64>> {
    let mut a = toeplitz_matrix_mp(spec, prec, order);
    let mut out = Vec::with_capacity(order);
    let mut factor = Float::new(prec);
    for k in 0..order {
        if a[k][k].cmp0() != Some(std::cmp::Ordering::Greater) {
            return Err(Error::NonPositiveDeterminant { order: k + 1, sign: -1 });
        }
        out.push(Float::with_val(prec, a[k][k].ln_ref()).to_f64().max(0.0));
        let (head, tail) = a.split_at_mut(k + 1);
        let pivot_row = &head[k];
        for row in tail.iter_mut() {
            factor.assign(&row[k] / &pivot_row[k]);
            for c in k..order {
                row[c] -= &factor * &pivot_row[c];
            }
        }
    }
    Ok(out)
}

/// `log D_n` by partially pivoted LU in multiprecision.
pub fn toeplitz_det_log(spec: &SymbolSpec, order: usize) -> Result<f64> {
    if order == 0 {
        return Ok(0.0);
    }
    if order > LU_MAX_ORDER {
        return Err(Error::Guard(format!("order {order} exceeds {LU_MAX_ORDER}")));
    }
    let prec = spec.precision_bits();
    let mut a = toeplitz_matrix_mp(spec, prec, order);
    let mut sign: i8 = 1;
    let mut log_abs = Float::with_val(prec, 0);
    let mut factor = Float::new(prec);
    for k in 0..order {
        let piv =
            (k..order).max_by(|&i, &j| a[i][k].cmp_abs(&a[j][k]).unwrap_or(std::cmp::Ordering::Equal)).unwrap_or(k);
        if a[piv][k].is_zero() {
            return Err(Error::NonPositiveDeterminant { order, sign: 0 });
        }
        if piv != k {
            a.swap(piv, k);
            sign = -sign;
        }
        if a[k][k].is_sign_negative() {
            sign = -sign;
        }
        log_abs += Float::with_val(prec, a[k][k].abs_ref()).ln();
        let (head, tail) = a.split_at_mut(k + 1);
        let pivot_row = &head[k];
        for row in tail.iter_mut() {
            factor.assign(&row[k] / &pivot_row[k]);
            for c in k..order {
                row[c] -= &factor * &pivot_row[c];
            }
        }
    }
    if sign != 1 {
        return Err(Error::NonPositiveDeterminant { order, sign });
    }
    Ok(log_abs.to_f64())
}

/// `log P(G(M, N) <= n)` through the tail product of ratios.
pub fn log_cdf(spec: &SymbolSpec, n: usize) -> Result<f64> {
    let table = DistributionTable::build(*spec, TableOptions { min_k: n, ..Default::default() })?;
    Ok(table.log_cdf_at(n))
}

/// `-Y21(0; k) = 1 / N_{k-1}`.
pub fn y21(spec: &SymbolSpec, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let table =
        DistributionTable::build(*spec, TableOptions { min_k: k - 1, stop_at_min: true, ..Default::default() })?;
    table.y21(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> SymbolSpec {
        SymbolSpec::new(0.5, 1, 1).unwrap()
    }

    #[test]
    fn coefficients_single_cell() {
        let s = unit();
        assert!((symbol_coefficient(&s, 0) - 1.25).abs() < 1e-15);
        assert!((symbol_coefficient(&s, 1) - 0.5).abs() < 1e-15);
        assert!((symbol_coefficient(&s, -1) - 0.5).abs() < 1e-15);
        assert_eq!(symbol_coefficient(&s, 2), 0.0);
        assert_eq!(symbol_coefficient(&s, -2), 0.0);
    }

    #[test]
    fn coefficients_agree_with_multiprecision() {
        let s = SymbolSpec::new(0.37, 7, 4).unwrap();
        let mp = symbol_coefficients_mp(&s, 200);
        for j in -4i64..=7 {
            let f = symbol_coefficient(&s, j);
            let g = mp[(j + 4) as usize].to_f64();
            assert!((f / g - 1.0).abs() < 1e-13, "j = {j}");
        }
    }

    #[test]
    fn large_coefficients_stay_finite_in_logs() {
        let s = SymbolSpec::new(0.5, 1200, 900).unwrap();
        let l = log_symbol_coefficient(&s, 100).unwrap();
        assert!(l.is_finite() && l > 700.0);
    }

    #[test]
    fn ratios_single_cell() {
        let table = ratio_sequence(&unit(), 40, 1e-14).unwrap();
        assert!((table.ratio(0) - 1.25).abs() < 1e-14);
        assert!((table.ratio(1) - 1.05).abs() < 1e-14);
        assert!(table.converged);
        assert!(table.log_ratios[table.k_max] < 1e-14);
        assert!((table.y21(1).unwrap() - 0.8).abs() < 1e-15);
        assert!((table.y21(2).unwrap() - 1.0 / 1.05).abs() < 1e-15);
    }

    #[test]
    fn geometric_closed_form() {
        let table = DistributionTable::build(unit(), TableOptions::default()).unwrap();
        for n in 0..=10 {
            let want = 1.0 - 0.25f64.powi(n as i32 + 1);
            assert!((table.log_cdf_at(n).exp() - want).abs() < 1e-14, "n = {n}");
        }
        assert!((log_cdf(&unit(), 1).unwrap() - 0.9375f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn small_determinants_by_hand() {
        let s = unit();
        assert_eq!(toeplitz_det_log(&s, 0).unwrap(), 0.0);
        assert!((toeplitz_det_log(&s, 1).unwrap() - 1.25f64.ln()).abs() < 1e-15);
        assert!((toeplitz_det_log(&s, 2).unwrap() - 1.3125f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn levinson_matches_lu() {
        for &(t, m, n) in &[(0.3, 5, 3), (0.5, 16, 16), (0.7, 9, 20)] {
            let s = SymbolSpec::new(t, m, n).unwrap();
            let table = DistributionTable::build(s, TableOptions { min_k: 40, ..Default::default() }).unwrap();
            for order in [1usize, 7, 20, 40] {
                let lu = toeplitz_det_log(&s, order).unwrap();
                let lev = table.log_det(order);
                assert!((lu - lev).abs() <= 1e-10 * lu.abs().max(1.0), "{t} {m} {n} {order}");
            }
        }
    }

    #[test]
    fn unpivoted_fallback_matches_levinson() {
        let s = SymbolSpec::new(0.6, 6, 4).unwrap();
        let table = DistributionTable::build(s, TableOptions { min_k: 30, ..Default::default() }).unwrap();
        let lu = lu_log_ratios(&s, 2 * s.precision_bits(), 31).unwrap();
        for k in 0..=30 {
            assert!((lu[k] - table.log_ratios[k]).abs() < 1e-12 * lu[k].max(1.0));
        }
    }

    #[test]
    fn probability_at_zero() {
        let s = SymbolSpec::new(0.3, 4, 6).unwrap();
        let table = DistributionTable::build(s, TableOptions::default()).unwrap();
        let want = 24.0 * (1.0f64 - 0.09).ln();
        assert!((table.log_cdf_at(0) - want).abs() < 1e-12);
    }

    #[test]
    fn single_cell_needs_more_than_the_naive_cap() {
        let s = SymbolSpec::new(0.7, 1, 1).unwrap();
        let table = DistributionTable::build(s, TableOptions::default()).unwrap();
        assert!(table.converged && table.warning.is_none());
        assert!(table.k_max > 8);
        let short = ratio_sequence(&s, 8, 1e-14).unwrap();
        assert!(!short.converged && short.warning.is_some());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn routes_agree_and_ratios_exceed_one(t in 0.2f64..0.8, m in 1usize..12, n in 1usize..12) {
            let s = SymbolSpec::new(t, m, n).unwrap();
            let table = DistributionTable::build(s, TableOptions::default()).unwrap();
            prop_assert!(table.converged);
            for k in 0..=table.k_max {
                prop_assert!(table.log_ratios[k] >= 0.0);
            }
            let mut prev = f64::NEG_INFINITY;
            for k in 0..=table.k_max.min(64) {
                let a = table.log_cdf_at(k);
                let b = table.log_cdf_via_det(k);
                prop_assert!(a <= 0.0 && a >= prev);
                prop_assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "k={} {} {}", k, a, b);
                prev = a;
            }
        }

        #[test]
        fn transpose_symmetric(t in 0.2f64..0.8, m in 1usize..10, n in 1usize..10) {
            let a = DistributionTable::build(SymbolSpec::new(t, m, n).unwrap(), TableOptions::default()).unwrap();
            let b = DistributionTable::build(SymbolSpec::new(t, n, m).unwrap(), TableOptions::default()).unwrap();
            for k in 0..=a.k_max.min(b.k_max) {
                prop_assert!((a.log_cdf_at(k) - b.log_cdf_at(k)).abs() < 1e-10 * a.log_cdf_at(k).abs().max(1.0));
            }
        }
    }
}
