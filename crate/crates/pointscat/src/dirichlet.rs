//! Point scatterer on a rectangle with Dirichlet boundary conditions.
//!
//! The rectangle D = [0, 2πa] × [0, 2π/a] carries the eigenfunction family
//! ψ_ξ(x) = (1/π²) sin(ξ₁x₁) sin(ξ₂x₂) over dual-lattice vectors ξ with
//! both components positive; norms whose representative touches an axis
//! drop out (ψ vanishes identically). With a scatterer at the interior
//! point z, each active norm carries the weight δₙ = |ψ_{ξ(n)}(z)|² and the
//! perturbed eigenvalues solve
//!
//! ```text
//! Σ_n δₙ (1/(n−λ) − 1/(n+1)) = C_L tan(φ/2),  C_L = Σ_{ξ∈L} 1/(|ξ|⁴+1).
//! ```
//!
//! The eigenvalues interlace with the δ-active norms and the pure-momentum
//! matrix elements become δ-weighted versions of the torus formulas.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{NormTable, TorusGeometry};
use crate::numutil::KahanSum;
use crate::observables::{MatrixElement, ObservableIndex};
use crate::spectrum::NewEigenvalue;
use crate::statistics::FilterReport;

/// Denominator bound for the genericity screen on the scatterer position.
const GENERIC_DEN_BOUND: u64 = 10_000;

/// Scatterer placement inside the rectangle.
///
/// The position is configured through side-length fractions: z = (t₁·2πa,
/// t₂·2π/a). Genericity (all δₙ > 0) requires the phases k·t₁ and l·t₂ to
/// equidistribute mod 1, i.e. both fractions irrational; rational fractions
/// make a positive proportion of the δₙ vanish (those eigenfunctions never
/// feel the scatterer).
#[derive(Debug, Clone)]
pub struct DirichletConfig {
    geometry: TorusGeometry,
    z_frac: (f64, f64),
    phi: f64,
    generic: bool,
}

impl DirichletConfig {
    pub fn new(geometry: TorusGeometry, z_frac: (f64, f64), phi: f64) -> Result<Self> {
        let (t1, t2) = z_frac;
        if !(t1 > 0.0 && t1 < 1.0 && t2 > 0.0 && t2 < 1.0) {
            return Err(Error::Config(format!(
                "scatterer fractions ({t1}, {t2}) must lie strictly inside (0, 1)"
            )));
        }
        if !phi.is_finite() || phi.abs() >= PI - 1e-6 {
            return Err(Error::Config(format!("phi = {phi} outside (-pi, pi)")));
        }
        let generic = is_irrational_frac(t1) && is_irrational_frac(t2);
        Ok(Self {
            geometry,
            z_frac,
            phi,
            generic,
        })
    }

    pub fn geometry(&self) -> &TorusGeometry {
        &self.geometry
    }

    pub fn z_frac(&self) -> (f64, f64) {
        self.z_frac
    }

    /// Absolute coordinates of z inside D = [0, 2πa] × [0, 2π/a].
    pub fn z(&self) -> (f64, f64) {
        let a = self.geometry.side_parameter_f64();
        (
            self.z_frac.0 * 2.0 * PI * a,
            self.z_frac.1 * 2.0 * PI / a,
        )
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// False when some δₙ vanish (or nearly vanish) by rational resonance.
    pub fn is_generic(&self) -> bool {
        self.generic
    }
}

/// Numerical irrationality screen on a side fraction (denominators ≤ 10⁴).
fn is_irrational_frac(t: f64) -> bool {
    let (mut p_prev, mut q_prev) = (0u64, 1u64);
    let (mut p_cur, mut q_cur) = (1u64, 0u64);
    let mut frac = t;
    for _ in 0..64 {
        let a = frac.floor();
        if !(0.0..=1e15).contains(&a) {
            return true;
        }
        let (p_next, q_next) = (
            a as u64 * p_cur + p_prev,
            a as u64 * q_cur + q_prev,
        );
        if q_next > GENERIC_DEN_BOUND {
            return true;
        }
        (p_prev, q_prev) = (p_cur, q_cur);
        (p_cur, q_cur) = (p_next, q_next);
        if (t - p_cur as f64 / q_cur as f64).abs() < 1e-12 {
            return false;
        }
        let rem = frac - a;
        if rem.abs() < 1e-15 {
            return false;
        }
        frac = 1.0 / rem;
    }
    true
}

/// ψ_ξ(x) = (1/π²) sin(ξ₁x₁) sin(ξ₂x₂) for ξ = (k/a, l·a), k, l ≥ 1.
pub fn dirichlet_basis(geometry: &TorusGeometry, k: u32, l: u32, x: (f64, f64)) -> Result<f64> {
    if k == 0 || l == 0 {
        return Err(Error::Config(
            "dirichlet basis needs strictly positive components".into(),
        ));
    }
    let (x1, x2) = x;
    let a = geometry.side_parameter_f64();
    Ok((f64::from(k) / a * x1).sin() * (f64::from(l) * a * x2).sin() / (PI * PI))
}

/// sin(2π u) with exact zeros at u ≡ 0, 1/2 (mod 1).
fn sin_two_pi(u: f64) -> f64 {
    let r = u.rem_euclid(1.0);
    if r == 0.0 || r == 0.5 {
        0.0
    } else {
        (2.0 * PI * r).sin()
    }
}

/// ψ evaluated at the scatterer through the side fractions: the phases are
/// ξ₁z₁ = 2πk·t₁ and ξ₂z₂ = 2πl·t₂, reduced mod 1 before the sine so that
/// rational fractions produce exact zeros.
fn basis_at_scatterer(k: u32, l: u32, z_frac: (f64, f64)) -> f64 {
    sin_two_pi(f64::from(k) * z_frac.0) * sin_two_pi(f64::from(l) * z_frac.1) / (PI * PI)
}

/// δₙ = |ψ_{ξ(n)}(z)|² per table item; zero on the axes and the origin.
#[derive(Debug, Clone)]
pub struct DeltaWeights {
    pub delta: Vec<f64>,
}

impl DeltaWeights {
    pub fn active_count(&self) -> usize {
        self.delta.iter().filter(|&&d| d > 0.0).count()
    }

    /// Indices of norms that stay in the Dirichlet spectrum (δₙ > 0).
    pub fn active_indices(&self, table: &NormTable, x_limit: f64) -> Vec<usize> {
        let end = table.prefix(x_limit).len();
        (0..end).filter(|&i| self.delta[i] > 0.0).collect()
    }
}

pub fn delta_weights(cfg: &DirichletConfig, table: &NormTable) -> DeltaWeights {
    let delta: Vec<f64> = table
        .items()
        .iter()
        .map(|it| {
            if it.is_origin() || it.on_axis() {
                0.0
            } else {
                let psi = basis_at_scatterer(it.k, it.l, cfg.z_frac());
                psi * psi
            }
        })
        .collect();
    DeltaWeights { delta }
}

/// C_L = Σ_{ξ∈L} 1/(|ξ|⁴+1) by direct enumeration to the given cutoff plus
/// the density tail π ∫ dt/(t²+1).
pub fn lattice_constant(geometry: &TorusGeometry, cutoff: f64) -> f64 {
    let k_bound = (cutoff * geometry.sqrt_gamma_f64()).sqrt().ceil() as i64 + 1;
    let mut acc = KahanSum::new();
    for k in 0..=k_bound {
        let mut hit = false;
        for l in 0.. {
            let n = geometry.norm_f64(k, l);
            if n > cutoff {
                break;
            }
            hit = true;
            let mult = match (k, l) {
                (0, 0) => 1.0,
                (0, _) | (_, 0) => 2.0,
                _ => 4.0,
            };
            acc.add(mult / (n * n + 1.0));
        }
        if !hit {
            break;
        }
    }
    acc.value() + crate::spectrum::coupling_tail(cutoff)
}

/// Default enumeration ceiling for C_L.
pub const LATTICE_CONSTANT_CUTOFF: f64 = 1e6;

/// Solver state: active norms, weights and the right-hand side, built once
/// per (config, table) pair. C_L is computed here and cached.
pub struct DirichletSystem<'t> {
    pub table: &'t NormTable,
    pub weights: DeltaWeights,
    pub c_lattice: f64,
    pub rhs: f64,
    tail_coeff: f64,
    cutoff: f64,
}

impl<'t> DirichletSystem<'t> {
    pub fn new(cfg: &DirichletConfig, table: &'t NormTable) -> Self {
        let weights = delta_weights(cfg, table);
        let c_lattice = lattice_constant(cfg.geometry(), LATTICE_CONSTANT_CUTOFF);
        let rhs = c_lattice * (cfg.phi() / 2.0).tan();
        // mean δ over equidistributing phases is (1/π⁴)·(1/2)·(1/2); active
        // norms have distinct-norm density π/4 per unit.
        let tail_coeff = (PI / 4.0) * (1.0 / (4.0 * PI.powi(4)));
        Self {
            table,
            weights,
            c_lattice,
            rhs,
            tail_coeff,
            cutoff: table.x(),
        }
    }

    /// LHS of the Dirichlet secular equation at λ: explicit δ-weighted sum
    /// over active norms ≤ cutoff plus the mean-field density tail.
    pub fn secular_lhs(&self, lambda: f64) -> f64 {
        self.secular_offset(lambda, 0.0)
    }

    /// Same sum with λ = anchor − u and every pole difference formed as
    /// (n − anchor) + u; the solver anchors at the interval's right
    /// endpoint, where the δ-weighted roots crowd within ~δₙ/C of the norm.
    pub fn secular_offset(&self, anchor: f64, u: f64) -> f64 {
        let mut acc = KahanSum::new();
        for (i, it) in self.table.prefix(self.cutoff).iter().enumerate() {
            let d = self.weights.delta[i];
            if d == 0.0 {
                continue;
            }
            acc.add(d * (1.0 / ((it.n - anchor) + u) - 1.0 / (it.n + 1.0)));
        }
        acc.value()
            + self.tail_coeff * ((self.cutoff + 1.0) / (self.cutoff - anchor + u)).ln()
    }

    pub fn secular_offset_derivative(&self, anchor: f64, u: f64) -> f64 {
        let mut acc = KahanSum::new();
        for (i, it) in self.table.prefix(self.cutoff).iter().enumerate() {
            let d = self.weights.delta[i];
            if d == 0.0 {
                continue;
            }
            let diff = (it.n - anchor) + u;
            acc.add(d / (diff * diff));
        }
        acc.value() + self.tail_coeff / (self.cutoff - anchor + u)
    }
}

/// Solve the Dirichlet secular equation on every interval between
/// consecutive δ-active norms with right endpoint in `range`.
pub fn dirichlet_secular_solve(
    cfg: &DirichletConfig,
    table: &NormTable,
    range: (f64, f64),
) -> Result<Vec<NewEigenvalue>> {
    let (lo, hi) = range;
    if lo.is_nan() || hi.is_nan() || lo < 0.0 || hi < lo {
        return Err(Error::Config(format!("invalid solve range ({lo}, {hi})")));
    }
    if hi > table.x() / 2.0 {
        return Err(Error::Config(format!(
            "solve range upper end {hi} exceeds table.X/2 = {}",
            table.x() / 2.0
        )));
    }
    let system = DirichletSystem::new(cfg, table);
    let active = system.weights.active_indices(table, table.x());
    if active.len() < 2 {
        return Err(Error::Numerical(
            "fewer than two delta-active norms; the scatterer position is degenerate".into(),
        ));
    }

    let pairs: Vec<(usize, usize)> = active
        .windows(2)
        .filter(|w| {
            let upper = table.items()[w[1]].n;
            upper > lo && upper <= hi
        })
        .map(|w| (w[0], w[1]))
        .collect();

    pairs
        .par_iter()
        .map(|&(il, iu)| {
            let lower = table.items()[il].n;
            let upper = table.items()[iu].n;
            let gap = upper - lower;
            let (u, residual) = bisect_newton_offset(
                |u| system.secular_offset(upper, u) - system.rhs,
                |u| -system.secular_offset_derivative(upper, u),
                gap,
                upper.abs(),
            )?;
            if !(u > 0.0 && u < gap) {
                return Err(Error::Interlacing {
                    index: iu,
                    lambda: upper - u,
                    lower,
                    upper,
                });
            }
            Ok(NewEigenvalue {
                lower,
                m: upper,
                m_index: iu,
                lambda: upper - u,
                residual,
                gap_to_m: u,
            })
        })
        .collect()
}

/// Bracket-shrink bisection + Newton polish in offset coordinates
/// u = upper − λ, for a g strictly decreasing from +∞ to −∞ on (0, gap).
fn bisect_newton_offset(
    g: impl Fn(f64) -> f64,
    dg: impl Fn(f64) -> f64,
    gap: f64,
    scale: f64,
) -> Result<(f64, f64)> {
    let delta_floor = 1e-15 * scale.max(1.0);
    let mut delta = gap * 1e-3;
    let (mut a, mut b);
    loop {
        a = delta;
        b = gap - delta;
        if a < b && g(a) > 0.0 && g(b) < 0.0 {
            break;
        }
        delta /= 8.0;
        if delta < delta_floor {
            return Err(Error::BracketFailure {
                lower: 0.0,
                upper: gap,
            });
        }
    }
    while b - a > 1e-14 * gap {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if g(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut u = 0.5 * (a + b);
    for _ in 0..3 {
        let next = u - g(u) / dg(u);
        if next > a && next < b {
            u = next;
        }
    }
    Ok((u, g(u).abs()))
}

/// δ-weighted pure momentum element:
/// Σ δₙwₖ(n)/(n−λ)² over Σ δₙr(n)/(n−λ)².
pub fn dirichlet_pure_momentum_element(
    lambda: f64,
    weights: &DeltaWeights,
    table: &NormTable,
    k: i64,
) -> MatrixElement {
    let even = k.rem_euclid(2) == 0;
    let mut num = KahanSum::new();
    let mut den = KahanSum::new();
    for (i, it) in table.items().iter().enumerate() {
        let d = weights.delta[i];
        if d == 0.0 {
            continue;
        }
        let diff = it.n - lambda;
        let base = d / (diff * diff);
        den.add(base * f64::from(it.r));
        if even {
            num.add(base * f64::from(it.r) * (k as f64 * it.theta).cos());
        }
    }
    MatrixElement {
        value: Complex64::new(num.value() / den.value(), 0.0),
        truncation_bound: 0.0,
        lambda,
        index: ObservableIndex::pure(k),
    }
}

/// Keep the active norms whose δ exceeds the ε-quantile (a density-(1−ε)
/// subsequence with δ bounded below, the Dirichlet analogue of the torus
/// filters).
pub fn delta_quantile_filter(
    weights: &DeltaWeights,
    table: &NormTable,
    eps: f64,
    x_limit: f64,
) -> Result<FilterReport> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::Config(format!("eps = {eps} outside (0, 1)")));
    }
    let active = weights.active_indices(table, x_limit);
    if active.is_empty() {
        return Err(Error::Numerical("no delta-active norms".into()));
    }
    let values: Vec<f64> = active.iter().map(|&i| weights.delta[i]).collect();
    let threshold = crate::numutil::quantile(&values, eps);
    let members: Vec<usize> = active
        .iter()
        .copied()
        .filter(|&i| weights.delta[i] >= threshold)
        .collect();
    let total = active.len();
    let kept = members.len();
    Ok(FilterReport {
        total,
        kept,
        density: kept as f64 / total as f64,
        criterion: format!("delta >= quantile_{eps}"),
        members,
    })
}

/// Character χ(ξ) = sgn(ξ₁)sgn(ξ₂) appearing in the exponential expansion
/// of the Dirichlet basis.
pub fn character(p: i64, q: i64) -> f64 {
    f64::from(p.signum() as i32) * f64::from(q.signum() as i32)
}

/// Evaluate ψ_ξ(x) through the character expansion
/// −(1/4π²) Σ_{η ∈ {ξ, −ξ, ξ̄, −ξ̄}} χ(η) e^{i⟨η,x⟩}, the slow reference
/// path for the product-of-sines formula.
pub fn dirichlet_basis_by_characters(
    geometry: &TorusGeometry,
    k: u32,
    l: u32,
    x: (f64, f64),
) -> Result<Complex64> {
    if k == 0 || l == 0 {
        return Err(Error::Config(
            "dirichlet basis needs strictly positive components".into(),
        ));
    }
    let p = i64::from(k);
    let q = i64::from(l);
    let mut acc = Complex64::new(0.0, 0.0);
    for (sp, sq) in [(p, q), (-p, -q), (p, -q), (-p, q)] {
        let (xi1, xi2) = geometry.dual_point(sp, sq);
        let phase = xi1 * x.0 + xi2 * x.1;
        acc += character(sp, sq) * Complex64::new(phase.cos(), phase.sin());
    }
    Ok(acc * (-1.0 / (4.0 * PI * PI)))
}
