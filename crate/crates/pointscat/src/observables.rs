//! Matrix elements of quantized phase-space observables on Green's-function
//! eigenfunctions.
//!
//! The observable e_{ζ,k}(x,φ) = e^{i⟨ζ,x⟩+ikφ} is quantized in the "right"
//! ordering (momentum first, then position), giving
//!
//! ```text
//! ⟨Op(e_{ζ,k}) f, f⟩ = Σ_{ξ≠ζ} ((ξ̃−ζ̃)/|ξ−ζ|)^k conj(f̂(ξ)) f̂(ξ−ζ)
//!                      + conj(f̂(ζ)) f̂(0),     ξ̃ := ξ₁ + iξ₂.
//! ```
//!
//! For pure momentum modes (ζ = 0) the sum collapses onto norm circles and
//! becomes the ratio of Σ wₖ(n)/(n−λ)² to Σ r(n)/(n−λ)², with w evaluated in
//! closed form. Mixed modes (ζ ≠ 0) are genuine lattice sums with a
//! Cauchy–Schwarz truncation bound.

use num_complex::Complex64;

use crate::eigenfunction::GreenCoefficients;
use crate::error::{Error, Result};
use crate::lattice::{NormItem, NormTable};
use crate::numutil::KahanSum;

/// Fourier index of one observable: ζ = (p/a, q·a) and the angular
/// harmonic k. ζ = 0 selects pure momentum modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObservableIndex {
    /// Integer coordinates (p, q) of ζ in the dual basis.
    pub zeta: (i64, i64),
    pub k: i64,
}

impl ObservableIndex {
    pub fn pure(k: i64) -> Self {
        Self { zeta: (0, 0), k }
    }

    pub fn is_pure(&self) -> bool {
        self.zeta == (0, 0)
    }
}

/// A computed matrix element with its truncation-error estimate.
#[derive(Debug, Clone, Copy)]
pub struct MatrixElement {
    pub value: Complex64,
    pub truncation_bound: f64,
    pub lambda: f64,
    pub index: ObservableIndex,
}

/// ⟨Op(e_{0,k}) g_λ, g_λ⟩ by norm-grouped sums. Real by symmetry; the
/// numerator tail obeys |wₖ| ≤ r, so the truncation bound is twice the
/// relative density tail.
pub fn pure_momentum_element(gc: &GreenCoefficients, table: &NormTable, k: i64) -> MatrixElement {
    let items = table.items();
    let mut num = KahanSum::new();
    let even = k.rem_euclid(2) == 0;
    for (i, &w) in gc.weights.iter().enumerate() {
        let it = &items[i];
        // wₖ(n)/r(n): cos(kθ) for even k, 0 for odd k, with wₖ(0) := 1.
        let ratio = if it.is_origin() {
            1.0
        } else if even {
            (k as f64 * it.theta).cos()
        } else {
            0.0
        };
        // w already carries r(n), so w·ratio = wₖ(n)/(n−λ)².
        if ratio != 0.0 {
            num.add(w * ratio);
        }
    }
    let value = num.value() / gc.weight_total;
    let truncation_bound = 2.0 * gc.tail_estimate / gc.weight_total;
    // the symbol has modulus ≤ 1, so |wₖ(n)| ≤ r(n) termwise
    debug_assert!(value.abs() <= 1.0 + truncation_bound + 1e-12);
    MatrixElement {
        value: Complex64::new(value, 0.0),
        truncation_bound,
        lambda: gc.lambda,
        index: ObservableIndex::pure(k),
    }
}

/// Signed lattice points of one norm class.
fn signed_points(it: &NormItem) -> impl Iterator<Item = (i64, i64)> {
    let k = i64::from(it.k);
    let l = i64::from(it.l);
    let mut pts = Vec::with_capacity(4);
    pts.push((k, l));
    if k > 0 {
        pts.push((-k, l));
    }
    if l > 0 {
        pts.push((k, -l));
    }
    if k > 0 && l > 0 {
        pts.push((-k, -l));
    }
    pts.into_iter()
}

/// Default mixed-mode cutoff: |ξ|² ≤ 4λ + 10⁴ keeps the Cauchy–Schwarz tail
/// bound safely below 10⁻³ for the eigenvalues this crate targets.
pub fn default_mixed_cutoff(lambda: f64, table: &NormTable) -> f64 {
    (4.0 * lambda.max(0.0) + 1e4).min(table.x())
}

/// ⟨Op(e_{ζ,k}) g_λ, g_λ⟩ for ζ ≠ 0 by direct lattice summation with
/// f̂(ξ) ∝ c(ξ) e^{−i⟨x₀,ξ⟩}, truncated at the default mixed cutoff.
///
/// Errors when the Cauchy–Schwarz tail bound exceeds 0.1 (cutoff too small
/// relative to |ζ|).
pub fn mixed_element(
    gc: &GreenCoefficients,
    table: &NormTable,
    index: ObservableIndex,
    x0: (f64, f64),
) -> Result<MatrixElement> {
    if index.is_pure() {
        return Err(Error::Config(
            "zeta = 0 is a pure momentum mode; use pure_momentum_element".into(),
        ));
    }
    let geometry = table.geometry();
    let lambda = gc.lambda;
    let cutoff = default_mixed_cutoff(lambda, table);
    let (zp, zq) = index.zeta;
    let (zx, zy) = geometry.dual_point(zp, zq);
    let zeta_t = Complex64::new(zx, zy);

    let fhat = |p: i64, q: i64| -> Complex64 {
        let n = geometry.norm_f64(p, q);
        let (x, y) = geometry.dual_point(p, q);
        let phase = -(x0.0 * x + x0.1 * y);
        Complex64::from_polar(1.0 / (n - lambda), phase)
    };

    let mut acc = Complex64::new(0.0, 0.0);
    let mut den = KahanSum::new();
    for it in table.prefix(cutoff) {
        for (p, q) in signed_points(it) {
            let c_xi = 1.0 / (it.n - lambda);
            den.add(c_xi * c_xi);
            if (p, q) == (zp, zq) {
                continue;
            }
            let (x, y) = geometry.dual_point(p, q);
            let xi_t = Complex64::new(x, y);
            let diff = xi_t - zeta_t;
            let unit = diff / diff.norm();
            let f_xi = {
                let phase = -(x0.0 * x + x0.1 * y);
                Complex64::from_polar(c_xi, phase)
            };
            acc += unit.powi(index.k as i32) * f_xi.conj() * fhat(p - zp, q - zq);
        }
    }
    // diagonal term conj(f̂(ζ)) f̂(0)
    acc += fhat(zp, zq).conj() * fhat(0, 0);

    let denominator = den.value();
    let tail_sq = std::f64::consts::PI / (cutoff - lambda);
    let bound = (tail_sq / denominator).sqrt() + tail_sq / denominator;
    if bound > 0.1 {
        return Err(Error::Numerical(format!(
            "mixed-mode truncation bound {bound:.3} exceeds 0.1 at cutoff {cutoff}"
        )));
    }
    let value = acc / denominator;
    // Cauchy–Schwarz keeps the full-sum modulus at 1; truncation adds the bound
    debug_assert!(value.norm() <= 1.0 + bound + 1e-9);
    Ok(MatrixElement {
        value,
        truncation_bound: bound,
        lambda,
        index,
    })
}

/// Cauchy–Schwarz bound Σ|c(ξ)||c(ξ−ζ)| / Σ|c(ξ)|² on the mixed-mode
/// element; also the position-space autocorrelation proxy.
pub fn cauchy_schwarz_bound(gc: &GreenCoefficients, table: &NormTable, zeta: (i64, i64)) -> f64 {
    let geometry = table.geometry();
    let lambda = gc.lambda;
    let cutoff = default_mixed_cutoff(lambda, table);
    let mut num = KahanSum::new();
    let mut den = KahanSum::new();
    for it in table.prefix(cutoff) {
        for (p, q) in signed_points(it) {
            let c_xi = (1.0 / (it.n - lambda)).abs();
            den.add(c_xi * c_xi);
            let shifted = geometry.norm_f64(p - zeta.0, q - zeta.1);
            num.add(c_xi * (1.0 / (shifted - lambda)).abs());
        }
    }
    num.value() / den.value()
}

/// The limiting pure-momentum value along the scarred subsequence:
/// cos(kθₘ) for even k, 0 for odd k.
pub fn predicted_scar_value(item: &NormItem, k: i64) -> f64 {
    debug_assert!(!item.is_origin());
    if k.rem_euclid(2) == 0 {
        (k as f64 * item.theta).cos()
    } else {
        0.0
    }
}

/// Scar deviation at one eigenvalue: the worst even-harmonic error against
/// cos(kθₘ) plus the worst odd-harmonic magnitude, over |k| ≤ k_max.
pub fn scar_deviation(
    gc: &GreenCoefficients,
    table: &NormTable,
    item: &NormItem,
    k_max: i64,
) -> Result<f64> {
    let (lo, hi) = table
        .enclosing_interval(gc.lambda)
        .ok_or_else(|| Error::Config(format!("lambda = {} below the first norm", gc.lambda)))?;
    let _ = lo;
    if table.items()[hi] != *item {
        return Err(Error::Config(format!(
            "lambda = {} does not lie in the interlacing interval of norm {}",
            gc.lambda, item.n
        )));
    }
    let mut even_dev = 0.0f64;
    let mut odd_mag = 0.0f64;
    for k in 1..=k_max {
        let el = pure_momentum_element(gc, table, k).value.re;
        if k % 2 == 0 {
            even_dev = even_dev.max((el - predicted_scar_value(item, k)).abs());
        } else {
            odd_mag = odd_mag.max(el.abs());
        }
    }
    Ok(even_dev + odd_mag)
}

/// ⟨Op(P), g_λ, g_λ⟩ for a trigonometric polynomial P = Σ â(ζ,k) e_{ζ,k},
/// assembled by linearity from the per-index elements. Returns the value
/// and the accumulated truncation bound.
pub fn trig_poly_element(
    gc: &GreenCoefficients,
    table: &NormTable,
    coeffs: &[(ObservableIndex, Complex64)],
    x0: (f64, f64),
) -> Result<(Complex64, f64)> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut bound = 0.0;
    for &(index, a) in coeffs {
        let el = if index.is_pure() {
            pure_momentum_element(gc, table, index.k)
        } else {
            mixed_element(gc, table, index, x0)?
        };
        acc += a * el.value;
        bound += a.norm() * el.truncation_bound;
    }
    Ok((acc, bound))
}

/// Ungrouped reference path for a pure element: direct summation over
/// signed lattice points with complex unit powers (the grouped route must
/// agree to ~10⁻¹⁰).
pub fn pure_momentum_element_ungrouped(
    gc: &GreenCoefficients,
    table: &NormTable,
    k: i64,
) -> Complex64 {
    let geometry = table.geometry();
    let lambda = gc.lambda;
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = KahanSum::new();
    for it in table.prefix(gc.cutoff) {
        if it.is_origin() {
            let c0 = 1.0 / (0.0 - lambda);
            num += Complex64::new(c0 * c0, 0.0);
            den.add(c0 * c0);
            continue;
        }
        let csq = {
            let d = it.n - lambda;
            1.0 / (d * d)
        };
        for (p, q) in signed_points(it) {
            let (x, y) = geometry.dual_point(p, q);
            let modulus = (x * x + y * y).sqrt();
            let unit = Complex64::new(x / modulus, y / modulus);
            num += unit.powi(k as i32) * csq;
            den.add(csq);
        }
    }
    num / den.value()
}
