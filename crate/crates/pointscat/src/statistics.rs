//! Spectral statistics: Weyl counts, pair correlation, gap filters,
//! clumping, and the short-interval bounds driving subsequence selection.
//!
//! The distinct norms have density π/4 per unit (mean spacing 4/π); with
//! multiplicities the density is π. The limiting pair-correlation constants
//! are π²(c−b)/X for multiplicity-weighted eigenvalue pairs, π²/16·(c−b)/X
//! for distinct norm pairs, and π/4·(c−b) per distinct norm. Finite-X runs
//! report decade trends rather than asserting the limits.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::NormTable;
use crate::spectrum::NewEigenvalue;

/// Difference window (b, c), open at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    b: f64,
    c: f64,
}

impl Window {
    pub fn new(b: f64, c: f64) -> Result<Self> {
        if b.is_nan() || c.is_nan() || b >= c {
            return Err(Error::Config(format!("window requires b < c, got ({b}, {c})")));
        }
        Ok(Self { b, c })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn length(&self) -> f64 {
        self.c - self.b
    }

    pub fn contains_zero(&self) -> bool {
        self.b < 0.0 && self.c > 0.0
    }

    /// The mirrored window (−c, −b).
    pub fn mirrored(&self) -> Window {
        Window {
            b: -self.c,
            c: -self.b,
        }
    }
}

/// Outcome of a subsequence filter.
#[derive(Debug, Clone, Serialize)]
pub struct FilterReport {
    pub total: usize,
    pub kept: usize,
    pub density: f64,
    pub criterion: String,
    /// Table (or input-sequence) indices of the kept elements.
    #[serde(skip)]
    pub members: Vec<usize>,
}

impl FilterReport {
    fn new(total: usize, members: Vec<usize>, criterion: String) -> Self {
        let kept = members.len();
        Self {
            total,
            kept,
            density: if total == 0 {
                0.0
            } else {
                kept as f64 / total as f64
            },
            criterion,
            members,
        }
    }

    /// Intersection of two filters over the same index space.
    pub fn intersect(&self, other: &FilterReport) -> FilterReport {
        let set: std::collections::HashSet<usize> = other.members.iter().copied().collect();
        let members: Vec<usize> = self
            .members
            .iter()
            .copied()
            .filter(|i| set.contains(i))
            .collect();
        FilterReport::new(
            self.total,
            members,
            format!("({}) ∩ ({})", self.criterion, other.criterion),
        )
    }
}

/// Bag of named statistics plus windowed counts.
#[derive(Debug, Clone, Serialize)]
pub struct StatReport {
    pub x: f64,
    pub values: BTreeMap<String, f64>,
    pub windows: Vec<(Window, u64, f64)>,
}

impl StatReport {
    pub fn new(x: f64) -> Self {
        Self {
            x,
            values: BTreeMap::new(),
            windows: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.values.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PairCount {
    pub count: u64,
    /// count / X.
    pub normalized: f64,
    /// count / |N(X)| (distinct statistics only; NaN otherwise).
    pub per_norm: f64,
}

fn window_checks(table: &NormTable, x: f64, w: &Window) -> Result<()> {
    if w.contains_zero() {
        return Err(Error::Config(format!(
            "window ({}, {}) contains 0; pair correlation needs 0 ∉ (b,c)",
            w.b, w.c
        )));
    }
    if x + w.c.abs().max(w.b.abs()) > table.x() {
        return Err(Error::Range(format!(
            "pair correlation at X = {x} with window ({}, {}) needs norms up to {}, table holds {}",
            w.b,
            w.c,
            x + w.c.abs().max(w.b.abs()),
            table.x()
        )));
    }
    Ok(())
}

/// Ordered pairs of multiplicity-weighted eigenvalues (λ_j, λ_k), both ≤ x,
/// with λ_j − λ_k ∈ (b, c); normalized by X (limit π²(c−b)).
pub fn pair_correlation_raw(table: &NormTable, x: f64, w: &Window) -> Result<PairCount> {
    window_checks(table, x, w)?;
    let win = if w.b >= 0.0 { *w } else { w.mirrored() };
    let pre = table.prefix(x);
    let norms: Vec<f64> = pre.iter().map(|it| it.n).collect();
    let weights: Vec<f64> = pre.iter().map(|it| f64::from(it.r)).collect();
    let count = sliding_window_count(&norms, &weights, win.b, win.c);
    Ok(PairCount {
        count: count.round() as u64,
        normalized: count / x,
        per_norm: f64::NAN,
    })
}

/// Ordered pairs of distinct norms (m, n ≤ x) with m − n ∈ (b, c);
/// normalized by X (limit π²/16·(c−b)) and per distinct norm (limit
/// π/4·(c−b)).
pub fn pair_correlation_distinct(table: &NormTable, x: f64, w: &Window) -> Result<PairCount> {
    window_checks(table, x, w)?;
    let win = if w.b >= 0.0 { *w } else { w.mirrored() };
    let pre = table.prefix(x);
    let norms: Vec<f64> = pre.iter().map(|it| it.n).collect();
    let ones = vec![1.0; norms.len()];
    let count = sliding_window_count(&norms, &ones, win.b, win.c);
    Ok(PairCount {
        count: count.round() as u64,
        normalized: count / x,
        per_norm: count / pre.len() as f64,
    })
}

/// Σ over i of w_i · Σ_{j : v_i − v_j ∈ (b,c)} w_j for sorted v, 0 ≤ b < c.
fn sliding_window_count(values: &[f64], weights: &[f64], b: f64, c: f64) -> f64 {
    debug_assert!(b >= 0.0 && b < c);
    let mut enter = 0usize; // first j with v_i − v_j < c
    let mut leave = 0usize; // first j with v_i − v_j ≤ b
    let mut total = 0.0f64;
    for i in 0..values.len() {
        while enter < i && values[i] - values[enter] >= c {
            enter += 1;
        }
        while leave < i && values[i] - values[leave] > b {
            leave += 1;
        }
        // j ∈ [enter, leave) satisfy b < v_i − v_j < c
        if leave > enter {
            let inside: f64 = weights[enter..leave].iter().sum();
            total += weights[i] * inside;
        }
    }
    total
}

/// Mean nearest-neighbour spacing of distinct norms ≤ x (limit 4/π).
pub fn mean_spacing(table: &NormTable, x: f64) -> f64 {
    let pre = table.prefix(x);
    if pre.len() < 2 {
        return f64::NAN;
    }
    (pre[pre.len() - 1].n - pre[0].n) / (pre.len() - 1) as f64
}

/// |N(x)| / (πx/4), the Weyl-law ratio.
pub fn weyl_ratio(table: &NormTable, x: f64) -> Result<f64> {
    let count = crate::lattice::weyl_count(table, x)?;
    Ok(count as f64 / (PI * x / 4.0))
}

/// Gap filter N₀: norms m ≥ 3 whose nearest-neighbour gaps on both sides
/// are at least G(m) = (log m)^{−1+ε}.
pub fn gap_filter_n0(table: &NormTable, eps: f64) -> Result<FilterReport> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::Config(format!("eps = {eps} outside (0, 1)")));
    }
    let items = table.items();
    let norms: Vec<f64> = items.iter().map(|it| it.n).collect();
    gap_filter_core(&norms, eps, "gaps >= (log m)^(eps-1) both sides")
}

fn gap_filter_core(norms: &[f64], eps: f64, label: &str) -> Result<FilterReport> {
    let mut members = Vec::new();
    let mut total = 0usize;
    for i in 0..norms.len() {
        let m = norms[i];
        if m < 3.0 {
            continue;
        }
        total += 1;
        // boundary items lack a neighbour on one side; excluded from the kept set
        if i == 0 || i + 1 == norms.len() {
            continue;
        }
        let g = m.ln().powf(eps - 1.0);
        if norms[i] - norms[i - 1] >= g && norms[i + 1] - norms[i] >= g {
            members.push(i);
        }
    }
    Ok(FilterReport::new(total, members, label.to_string()))
}

/// F(m) = Σ_{n ≤ cap, n ≠ m} 1/(n−m)² with the O(1/cap) tail recorded.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InverseSquareSum {
    pub value: f64,
    pub tail_bound: f64,
}

pub fn inverse_square_sum_f(table: &NormTable, m_index: usize, cap: f64) -> Result<InverseSquareSum> {
    let items = table.items();
    let m = items
        .get(m_index)
        .ok_or_else(|| Error::Range(format!("norm index {m_index} out of table")))?
        .n;
    if cap < 2.0 * m {
        return Err(Error::Config(format!(
            "cap {cap} below 2·m = {}; the tail bound needs n > 2m coverage",
            2.0 * m
        )));
    }
    if cap > table.x() {
        return Err(Error::Range(format!(
            "cap {cap} exceeds table ceiling {}",
            table.x()
        )));
    }
    let mut acc = crate::numutil::KahanSum::new();
    for (i, it) in table.prefix(cap).iter().enumerate() {
        if i == m_index {
            continue;
        }
        let d = it.n - m;
        acc.add(1.0 / (d * d));
    }
    // beyond the cap every n has n − m > cap/2; Weyl density π/4 of distinct
    // norms gives tail ≤ (π/4)·∫_cap (t−m)⁻² dt = (π/4)/(cap−m) ≤ π/(2 cap).
    Ok(InverseSquareSum {
        value: acc.value(),
        tail_bound: PI / (2.0 * cap) * (cap / (cap - m)),
    })
}

/// Filter N₁: norms m (3 ≤ m ≤ x_limit) with F(m) ≤ (log m)^{2−ε}.
/// `cap` bounds the explicit F sum and must cover 2·x_limit.
pub fn filter_n1(table: &NormTable, eps: f64, x_limit: f64) -> Result<FilterReport> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::Config(format!("eps = {eps} outside (0, 1)")));
    }
    let cap = table.x();
    if cap < 2.0 * x_limit {
        return Err(Error::Config(format!(
            "table ceiling {cap} below 2·x_limit = {}",
            2.0 * x_limit
        )));
    }
    let items = table.items();
    let mut members = Vec::new();
    let mut total = 0usize;
    let values: Vec<(usize, f64)> = {
        use rayon::prelude::*;
        (0..items.len())
            .into_par_iter()
            .filter(|&i| items[i].n >= 3.0 && items[i].n <= x_limit)
            .map(|i| {
                (
                    i,
                    inverse_square_sum_f(table, i, cap)
                        .map(|f| f.value)
                        .unwrap_or(f64::INFINITY),
                )
            })
            .collect()
    };
    for (i, f) in values {
        total += 1;
        let t = items[i].n.ln().powf(2.0 - eps);
        if f <= t {
            members.push(i);
        }
    }
    members.sort_unstable();
    Ok(FilterReport::new(
        total,
        members,
        "F(m) <= (log m)^(2-eps)".to_string(),
    ))
}

/// Σ_{m,n ≤ x, |m−n| > a} 1/(m−n)², for the difference-kernel bound
/// (expected ≪ x/a for a ≥ 3).
pub fn difference_kernel_sum(table: &NormTable, x: f64, a: f64) -> Result<f64> {
    if a <= 0.0 {
        return Err(Error::Config("separation a must be positive".into()));
    }
    if x > table.x() {
        return Err(Error::Range(format!("x = {x} beyond table ceiling")));
    }
    let pre = table.prefix(x);
    let norms: Vec<f64> = pre.iter().map(|it| it.n).collect();
    use rayon::prelude::*;
    let total: f64 = (0..norms.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            // ordered pairs both ways counted by symmetry factor 2 over j > i
            for j in (i + 1)..norms.len() {
                let d = norms[j] - norms[i];
                if d > a {
                    acc += 2.0 / (d * d);
                }
            }
            acc
        })
        .sum();
    Ok(total)
}

/// Scale function choices for the clumping statistic.
pub enum ClumpingScale<'a> {
    /// f(m) = log log m (the default slow-growing choice).
    LogLog,
    /// User-supplied increasing f.
    Custom(&'a dyn Fn(f64) -> f64),
}

impl ClumpingScale<'_> {
    pub fn eval(&self, m: f64) -> f64 {
        match self {
            ClumpingScale::LogLog => m.ln().ln(),
            ClumpingScale::Custom(f) => f(m),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ClumpingScale::LogLog => "loglog",
            ClumpingScale::Custom(_) => "custom",
        }
    }
}

/// The normalized clumping statistic (m − λ_m)·log m / f(m) for one solved
/// eigenvalue; NaN for the ground solution or m ≤ e.
pub fn clumping_statistic(e: &NewEigenvalue, scale: &ClumpingScale) -> f64 {
    if e.is_ground() || e.m <= std::f64::consts::E {
        return f64::NAN;
    }
    e.gap_to_m * e.m.ln() / scale.eval(e.m)
}

/// Distribution report for the clumping statistic: quantiles and the
/// densities below thresholds {1, 10, 100}.
pub fn clumping_stats(eigs: &[NewEigenvalue], scale: &ClumpingScale) -> StatReport {
    let stats: Vec<f64> = eigs
        .iter()
        .map(|e| clumping_statistic(e, scale))
        .filter(|v| v.is_finite())
        .collect();
    let mut report = StatReport::new(eigs.iter().map(|e| e.m).fold(0.0, f64::max));
    let positive = eigs
        .iter()
        .filter(|e| !e.is_ground())
        .filter(|e| e.gap_to_m > 0.0)
        .count();
    let non_ground = eigs.iter().filter(|e| !e.is_ground()).count();
    report.set("count", stats.len() as f64);
    report.set(
        "positive_gap_fraction",
        if non_ground == 0 {
            f64::NAN
        } else {
            positive as f64 / non_ground as f64
        },
    );
    report.set("median", crate::numutil::median(&stats));
    report.set("q90", crate::numutil::quantile(&stats, 0.9));
    for threshold in [1.0, 10.0, 100.0] {
        let below = stats.iter().filter(|&&v| v < threshold).count();
        report.set(
            &format!("density_below_{threshold:.0}"),
            if stats.is_empty() {
                f64::NAN
            } else {
                below as f64 / stats.len() as f64
            },
        );
    }
    report
}

/// Default threshold for the clumping filter.
///
/// The clumping bound m − λ_m ≪ f(m)/log m carries an unquantified
/// constant; 0.5 is the calibrated desk-scale realization (for f = log log
/// it keeps a large subsequence whose density grows toward one, since the
/// normalized statistic itself decays like 1/log log m).
pub const DEFAULT_CLUMPING_THRESHOLD: f64 = 0.5;

/// Clumping filter: solved eigenvalues (by input index) whose normalized
/// clumping statistic stays below `threshold`.
pub fn clumping_filter(
    eigs: &[NewEigenvalue],
    scale: &ClumpingScale,
    threshold: f64,
) -> FilterReport {
    let mut members = Vec::new();
    let mut total = 0usize;
    for (i, e) in eigs.iter().enumerate() {
        let v = clumping_statistic(e, scale);
        if v.is_nan() {
            continue;
        }
        total += 1;
        if v < threshold {
            members.push(i);
        }
    }
    FilterReport::new(
        total,
        members,
        format!("(m-lambda)·log m / {} < {threshold}", scale.label()),
    )
}

/// Short-interval statistics at ceiling t:
/// * M(k) = |{n ∈ N : k ≤ n ≤ k+1}| for k ≤ ⌊t⌋, with Σ M(k) and Σ M(k)²;
/// * gap exceedance |{i ≤ ⌊t⌋ : s_i > G}| over the first ⌊t⌋ spacings
///   s_i = n_{i+1} − n_i (capped at the spacings available), G ∈ {1,2,4,8};
/// * crowding |{n ∈ N(t) : |N(t) ∩ [n−3, n+3]| > E+1}| for E ∈ {4,8,16}.
pub fn short_interval_counts(table: &NormTable, t: f64) -> Result<StatReport> {
    if t > table.x() {
        return Err(Error::Range(format!("t = {t} beyond table ceiling {}", table.x())));
    }
    if t < 1.0 {
        return Err(Error::Config("t must be at least 1".into()));
    }
    let mut report = StatReport::new(t);
    let items = table.items();

    // occupancy histogram
    let kmax = t.floor() as usize;
    let mut m_counts = vec![0u32; kmax + 1];
    for it in items {
        if it.n > (kmax + 1) as f64 {
            break;
        }
        let bin = it.n.floor() as usize;
        if bin <= kmax {
            m_counts[bin] += 1;
        }
        // closed intervals: an integer norm would also land in the bin below;
        // irrational γ never produces positive integer norms, and n = 0 has
        // no bin below.
    }
    let m_sum: u64 = m_counts.iter().map(|&c| u64::from(c)).sum();
    let m_sq_sum: u64 = m_counts.iter().map(|&c| u64::from(c) * u64::from(c)).sum();
    report.set("m_sum", m_sum as f64);
    report.set("m_sq_sum", m_sq_sum as f64);
    report.set("m_sq_over_t", m_sq_sum as f64 / t);
    report.set(
        "weyl_count",
        crate::lattice::weyl_count(table, t)? as f64,
    );

    // spacing exceedance over the first ⌊t⌋ spacings
    let gaps_wanted = kmax;
    let gaps_available = items.len().saturating_sub(1);
    let gaps = gaps_wanted.min(gaps_available);
    report.set("gaps_considered", gaps as f64);
    for g in [1.0, 2.0, 4.0, 8.0] {
        let count = (0..gaps)
            .filter(|&i| items[i + 1].n - items[i].n > g)
            .count();
        report.set(&format!("gap_exceed_{g:.0}"), count as f64);
        report.set(
            &format!("gap_exceed_{g:.0}_bound"),
            (4.0 / PI) * gaps as f64 / g,
        );
    }

    // crowding with D = 3
    let d = 3.0;
    let pre = table.prefix(t);
    for e in [4usize, 8, 16] {
        let mut crowded = 0u64;
        let mut lo = 0usize;
        let mut hi = 0usize;
        for i in 0..pre.len() {
            while pre[i].n - pre[lo].n > d {
                lo += 1;
            }
            while hi < pre.len() && pre[hi].n - pre[i].n <= d {
                hi += 1;
            }
            if hi - lo > e + 1 {
                crowded += 1;
            }
        }
        report.set(&format!("crowded_d3_e{e}"), crowded as f64);
    }
    Ok(report)
}
