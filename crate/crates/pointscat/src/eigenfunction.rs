//! Green's-function eigenfunctions in momentum space.
//!
//! The new eigenfunction at λ is G_λ = (Δ+λ)⁻¹δ_{x₀}, with Fourier
//! coefficients proportional to c(ξ) = 1/(|ξ|²−λ). The global prefactor
//! −1/(4π²) and the x₀ phase cancel in every normalized quantity, so only
//! the per-norm aggregates r(n)/(n−λ)² are stored; per-point coefficients
//! are reconstructed on demand by the observable routines.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{NormItem, NormTable};
use crate::numutil::KahanSum;

/// Per-norm weights of a Green's function at λ.
#[derive(Debug, Clone)]
pub struct GreenCoefficients {
    pub lambda: f64,
    /// Norm ceiling used for the explicit weights.
    pub cutoff: f64,
    /// r(n)/(n−λ)² per table item with n ≤ cutoff.
    pub weights: Vec<f64>,
    /// Σ weights (truncated).
    pub weight_total: f64,
    /// Closed-form estimate π/(cutoff−λ) of the dropped tail.
    pub tail_estimate: f64,
    /// weight_total + tail_estimate: the squared eigenfunction norm up to
    /// the global 1/(4π²)² factor.
    pub norm_sq: f64,
}

impl GreenCoefficients {
    /// Index (into the table prefix) of the dominant weight.
    pub fn dominant_index(&self) -> usize {
        self.weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

/// Build the per-norm weights r(n)/(n−λ)² for n ≤ cutoff.
pub fn green_coefficients(lambda: f64, table: &NormTable, cutoff: f64) -> Result<GreenCoefficients> {
    if cutoff > table.x() {
        return Err(Error::Range(format!(
            "cutoff {cutoff} exceeds table ceiling {}",
            table.x()
        )));
    }
    if !lambda.is_finite() || lambda >= cutoff / 2.0 {
        return Err(Error::Config(format!(
            "lambda = {lambda} must stay below cutoff/2 = {}",
            cutoff / 2.0
        )));
    }
    let idx = table.nearest_index(lambda);
    let near = table.items()[idx].n;
    if (lambda - near).abs() < 1e-14 * near.abs().max(1.0) {
        return Err(Error::Pole { lambda, norm: near });
    }

    let pre = table.prefix(cutoff);
    let mut weights = Vec::with_capacity(pre.len());
    let mut total = KahanSum::new();
    for it in pre {
        let d = it.n - lambda;
        let w = f64::from(it.r) / (d * d);
        weights.push(w);
        total.add(w);
    }
    let tail = std::f64::consts::PI / (cutoff - lambda);
    Ok(GreenCoefficients {
        lambda,
        cutoff,
        weight_total: total.value(),
        tail_estimate: tail,
        norm_sq: total.value() + tail,
        weights,
    })
}

/// Momentum-space probability measure of a Green's function: mass
/// p_n ∝ r(n)/(n−λ)² per norm, carried by the four directions
/// {±θₙ, π±θₙ} on the unit circle.
#[derive(Debug, Clone, Serialize)]
pub struct MomentumMeasure {
    /// Probability masses aligned with the table prefix (n ≤ cutoff).
    pub masses: Vec<f64>,
    /// Σ masses (1 up to rounding).
    pub total: f64,
}

pub fn momentum_measure(gc: &GreenCoefficients) -> MomentumMeasure {
    let inv = 1.0 / gc.weight_total;
    let masses: Vec<f64> = gc.weights.iter().map(|w| w * inv).collect();
    let total = masses.iter().sum();
    MomentumMeasure { masses, total }
}

/// The four momentum directions supporting the mass of one norm.
pub fn angle_support(item: &NormItem) -> [f64; 4] {
    let t = item.theta;
    [
        t,
        -t,
        std::f64::consts::PI - t,
        std::f64::consts::PI + t,
    ]
}

/// Σ of the measure over norms with |n − m| ≤ d.
pub fn localized_mass(mm: &MomentumMeasure, table: &NormTable, m: f64, d: f64) -> f64 {
    debug_assert!(d > 0.0);
    let items = table.items();
    let len = mm.masses.len();
    let start = items[..len].partition_point(|it| it.n < m - d);
    let mut acc = 0.0;
    for (it, &mass) in items[start..len].iter().zip(&mm.masses[start..len]) {
        if it.n > m + d {
            break;
        }
        acc += mass;
    }
    acc
}

/// Default localization radius used by the strong-coupling experiment.
pub const DEFAULT_LOCALIZATION_RADIUS: f64 = 3.0;
