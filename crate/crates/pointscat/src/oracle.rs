//! Slow reference computations.
//!
//! Every fast routine in this crate has a brute-force counterpart here:
//! direct double-loop enumeration at working precision, O(N²) pair counts,
//! high-precision spectral sums with explicit cutoffs, and a nested
//! sign-scan root finder. These are first-class library functions (the CLI
//! exposes them behind `--oracle`), not test-only code.

use dashu::base::Abs;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{NormTable, TorusGeometry};
use crate::precision::{self, BigReal};
use crate::statistics::Window;

/// One brute-force norm class: value at working precision, multiplicity,
/// and the canonical representative.
#[derive(Debug, Clone)]
pub struct BruteNorm {
    pub n_hp: BigReal,
    pub n: f64,
    pub count: u32,
    pub k: u32,
    pub l: u32,
}

/// Enumerate norms by a literal double loop over |k|, |l| ≤ `kl_bound`,
/// grouping values whose extended-precision difference is below 10⁻³⁰ and
/// keeping those with n ≤ x. Counts every signed lattice point, so the
/// multiplicities come out of the grouping rather than a sign-pattern rule.
pub fn enumerate_norms_brute(geometry: &TorusGeometry, kl_bound: u32, x: f64) -> Vec<BruteNorm> {
    let bits = geometry.precision_bits();
    let collision_tol = precision::parse_decimal("1e-30", bits).expect("tolerance literal");
    let x_hp = precision::from_f64(x, bits).expect("finite x");

    let b = i64::from(kl_bound);
    let mut raw: Vec<(BigReal, u32, u32)> = Vec::new();
    for k in -b..=b {
        for l in -b..=b {
            let n_hp = geometry.norm_hp(k.unsigned_abs() as u32, l.unsigned_abs() as u32);
            if n_hp <= x_hp {
                raw.push((n_hp, k.unsigned_abs() as u32, l.unsigned_abs() as u32));
            }
        }
    }
    raw.sort_by(|a, b| a.0.cmp(&b.0));

    let mut grouped: Vec<BruteNorm> = Vec::new();
    for (n_hp, k, l) in raw {
        match grouped.last_mut() {
            Some(g) if (&n_hp - &g.n_hp).abs() < collision_tol => {
                g.count += 1;
                // prefer the all-nonnegative representative with smallest k
                if (k, l) < (g.k, g.l) {
                    g.k = k;
                    g.l = l;
                }
            }
            _ => {
                grouped.push(BruteNorm {
                    n: precision::to_f64(&n_hp),
                    n_hp,
                    count: 1,
                    k,
                    l,
                });
            }
        }
    }
    grouped
}

/// Count lattice points (k, l) ∈ Z² with norm ≤ x, by direct enumeration
/// with extended-precision comparisons.
pub fn lattice_point_count_brute(geometry: &TorusGeometry, x: f64) -> u64 {
    let bits = geometry.precision_bits();
    let x_hp = precision::from_f64(x, bits).expect("finite x");
    let k_bound = (x * geometry.sqrt_gamma_f64()).sqrt().ceil() as u32 + 1;
    let mut total = 0u64;
    for k in 0..=k_bound {
        let mut any = false;
        for l in 0.. {
            let n_hp = geometry.norm_hp(k, l);
            if n_hp > x_hp {
                break;
            }
            any = true;
            let sign_patterns = match (k, l) {
                (0, 0) => 1,
                (0, _) | (_, 0) => 2,
                _ => 4,
            };
            total += sign_patterns;
        }
        if !any {
            break;
        }
    }
    total
}

/// Distinct-norm count ≤ x by brute enumeration.
pub fn weyl_count_brute(geometry: &TorusGeometry, x: f64) -> u64 {
    let bits = geometry.precision_bits();
    let x_hp = precision::from_f64(x, bits).expect("finite x");
    let k_bound = (x * geometry.sqrt_gamma_f64()).sqrt().ceil() as u32 + 1;
    let mut total = 0u64;
    for k in 0..=k_bound {
        for l in 0.. {
            if geometry.norm_hp(k, l) > x_hp {
                break;
            }
            total += 1;
        }
    }
    total
}

/// Direct summation of the k-th angular harmonic over the signed lattice
/// points of the norm class represented by (k, l); the slow counterpart of
/// the closed-form exponential sum.
pub fn exp_sum_direct(geometry: &TorusGeometry, k: u32, l: u32, harmonic: i64) -> Complex64 {
    if k == 0 && l == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut signs = vec![(i64::from(k), i64::from(l))];
    if k > 0 {
        signs.push((-i64::from(k), i64::from(l)));
    }
    if l > 0 {
        signs.push((i64::from(k), -i64::from(l)));
    }
    if k > 0 && l > 0 {
        signs.push((-i64::from(k), -i64::from(l)));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (sk, sl) in signs {
        let (x, y) = geometry.dual_point(sk, sl);
        let modulus = (x * x + y * y).sqrt();
        let unit = Complex64::new(x / modulus, y / modulus);
        acc += unit.powi(harmonic as i32);
    }
    acc
}

/// Extended-precision secular sum Σ r(n)(1/(n−λ) − n/(n²+1)) over all norms
/// n ≤ cutoff, by direct lattice enumeration; the closed-form density tail
/// beyond the cutoff is added in double precision when `with_tail` is set.
pub fn secular_sum_hp(
    geometry: &TorusGeometry,
    lambda: f64,
    cutoff: f64,
    with_tail: bool,
) -> Result<f64> {
    let bits = geometry.precision_bits();
    let cutoff_hp = precision::from_f64(cutoff, bits)?;
    let lambda_hp = precision::from_f64(lambda, bits)?;
    let k_bound = (cutoff * geometry.sqrt_gamma_f64()).sqrt().ceil() as u32 + 1;

    let mut acc = BigReal::ZERO.with_precision(bits).value();
    for k in 0..=k_bound {
        for l in 0.. {
            let n_hp = geometry.norm_hp(k, l);
            if n_hp > cutoff_hp {
                break;
            }
            let mult = BigReal::from(u32::from(super_multiplicity(k, l)));
            let diff = &n_hp - &lambda_hp;
            if diff == BigReal::ZERO {
                return Err(Error::Pole {
                    lambda,
                    norm: precision::to_f64(&n_hp),
                });
            }
            let one = BigReal::ONE.with_precision(bits).value();
            let term = one.clone() / diff - &n_hp / (n_hp.clone().sqr() + one);
            acc += mult * term;
        }
    }
    let mut total = precision::to_f64(&acc);
    if with_tail {
        total += crate::spectrum::secular_tail(lambda, cutoff);
    }
    Ok(total)
}

/// Extended-precision Σ r(n)/(n²+1) over norms ≤ cutoff plus (optionally)
/// the closed-form tail.
pub fn coupling_sum_hp(geometry: &TorusGeometry, cutoff: f64, with_tail: bool) -> Result<f64> {
    let bits = geometry.precision_bits();
    let cutoff_hp = precision::from_f64(cutoff, bits)?;
    let k_bound = (cutoff * geometry.sqrt_gamma_f64()).sqrt().ceil() as u32 + 1;
    let mut acc = BigReal::ZERO.with_precision(bits).value();
    for k in 0..=k_bound {
        for l in 0.. {
            let n_hp = geometry.norm_hp(k, l);
            if n_hp > cutoff_hp {
                break;
            }
            let one = BigReal::ONE.with_precision(bits).value();
            let mult = BigReal::from(u32::from(super_multiplicity(k, l)));
            acc += mult / (n_hp.clone().sqr() + one);
        }
    }
    let mut total = precision::to_f64(&acc);
    if with_tail {
        total += crate::spectrum::coupling_tail(cutoff);
    }
    Ok(total)
}

/// Extended-precision Σ r(n)/(n−λ)² over norms ≤ cutoff plus (optionally)
/// the closed-form tail; the squared eigenfunction norm up to the global
/// prefactor.
pub fn green_norm_sq_hp(
    geometry: &TorusGeometry,
    lambda: f64,
    cutoff: f64,
    with_tail: bool,
) -> Result<f64> {
    let bits = geometry.precision_bits();
    let cutoff_hp = precision::from_f64(cutoff, bits)?;
    let lambda_hp = precision::from_f64(lambda, bits)?;
    let k_bound = (cutoff * geometry.sqrt_gamma_f64()).sqrt().ceil() as u32 + 1;
    let mut acc = BigReal::ZERO.with_precision(bits).value();
    for k in 0..=k_bound {
        for l in 0.. {
            let n_hp = geometry.norm_hp(k, l);
            if n_hp > cutoff_hp {
                break;
            }
            let mult = BigReal::from(u32::from(super_multiplicity(k, l)));
            let diff = &n_hp - &lambda_hp;
            if diff == BigReal::ZERO {
                return Err(Error::Pole {
                    lambda,
                    norm: precision::to_f64(&n_hp),
                });
            }
            acc += mult / diff.sqr();
        }
    }
    let mut total = precision::to_f64(&acc);
    if with_tail {
        total += std::f64::consts::PI / (cutoff - lambda);
    }
    Ok(total)
}

fn super_multiplicity(k: u32, l: u32) -> u8 {
    match (k, l) {
        (0, 0) => 1,
        (0, _) | (_, 0) => 2,
        _ => 4,
    }
}

/// Nested sign-scan root localization for a function with exactly one sign
/// change on (lo, hi). Each level splits the active cell into
/// `points_per_level` subcells and keeps the one with the sign change, so
/// `levels` rounds emulate a single scan with points_per_level^levels grid
/// points. Returns the midpoint of the final cell.
pub fn grid_scan_root<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    points_per_level: usize,
    levels: usize,
) -> Result<f64> {
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    for _ in 0..levels {
        let step = (b - a) / points_per_level as f64;
        if step == 0.0 {
            break;
        }
        let mut found = false;
        let mut x_prev = a;
        let mut f_prev = fa;
        for i in 1..=points_per_level {
            let x = if i == points_per_level {
                b
            } else {
                a + step * i as f64
            };
            let fx = f(x);
            if f_prev.signum() != fx.signum() {
                a = x_prev;
                b = x;
                fa = f_prev;
                found = true;
                break;
            }
            x_prev = x;
            f_prev = fx;
        }
        if !found {
            return Err(Error::BracketFailure { lower: lo, upper: hi });
        }
    }
    Ok(0.5 * (a + b))
}

/// O(N²) window count over a list of (value, weight) pairs: ordered pairs
/// (i, j) with value_i − value_j ∈ (b, c), each counted with weight
/// w_i · w_j.
pub fn pair_count_brute(values: &[(f64, u64)], window: &Window) -> u64 {
    let mut count = 0u64;
    for (i, &(vi, wi)) in values.iter().enumerate() {
        for (j, &(vj, wj)) in values.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = vi - vj;
            if d > window.b() && d < window.c() {
                count += wi * wj;
            }
        }
    }
    count
}

/// Direct Σ 1/(n−m)² over norms n ≤ cap, n ≠ m (by index), no tail.
pub fn inverse_square_sum_brute(table: &NormTable, m_index: usize, cap: f64) -> f64 {
    let m = table.items()[m_index].n;
    let mut acc = 0.0;
    for (i, it) in table.prefix(cap).iter().enumerate() {
        if i == m_index {
            continue;
        }
        let d = it.n - m;
        acc += 1.0 / (d * d);
    }
    acc
}

/// Direct recount of M(k) = |{n ∈ N : k ≤ n ≤ k+1}| for k = 0..⌊t⌋, by the
/// dumb double loop. Only meant for small t.
pub fn interval_occupancy_brute(table: &NormTable, t: f64) -> Vec<u32> {
    let kmax = t.floor() as usize;
    (0..=kmax)
        .map(|k| {
            table
                .items()
                .iter()
                .filter(|it| it.n >= k as f64 && it.n <= (k + 1) as f64)
                .count() as u32
        })
        .collect()
}
