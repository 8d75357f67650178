//! Dual-lattice norm tables.
//!
//! The torus is R²/2πL₀ with L₀ = Z(a,0) ⊕ Z(0,1/a) and γ = a⁴ irrational.
//! The Laplace eigenvalues are the squared norms of the dual lattice
//! L = Z(1/a,0) ⊕ Z(0,a), i.e. the values n = (k² + γl²)/√γ over integer
//! pairs. For irrational γ the value determines (k², l²) uniquely, so the
//! canonical representative (k ≥ 0, l ≥ 0) carries an exact multiplicity:
//! 4 off the axes, 2 on an axis, 1 at the origin.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::precision::{self, BigReal};

/// Default cap on the number of table items (desk-scale memory bound).
pub const DEFAULT_ITEM_CAP: usize = 50_000_000;

/// Denominator bound for the irrationality screen on γ.
const RATIONAL_DEN_BOUND: u64 = 1_000_000;

/// Torus side-ratio data: γ = a⁴ > 0 irrational, a = γ^{1/4}.
///
/// The lattice is unimodular (a · 1/a = 1), so the torus area is 4π².
#[derive(Debug, Clone)]
pub struct TorusGeometry {
    gamma: BigReal,
    sqrt_gamma: BigReal,
    a: BigReal,
    gamma_f64: f64,
    sqrt_gamma_f64: f64,
    a_f64: f64,
    precision_digits: u32,
    gamma_literal: String,
}

impl TorusGeometry {
    /// Build from an extended-precision γ.
    ///
    /// Rejects γ ≤ 0 and values indistinguishable (at working precision)
    /// from a rational p/q with q ≤ 10⁶. The screen is heuristic: a
    /// Liouville-like γ passes it, but the spectral statistics downstream
    /// may then converge poorly.
    pub fn new(gamma: BigReal, precision_digits: u32) -> Result<Self> {
        let bits = precision::bits_for_digits(precision_digits);
        let gamma = gamma.with_precision(bits).value();
        if gamma <= BigReal::ZERO {
            return Err(Error::Config("gamma must be positive".into()));
        }
        let tol_digits = precision_digits.saturating_sub(5).max(10);
        let tol = precision::parse_decimal(&format!("1e-{tol_digits}"), bits)?;
        if let Some((p, q)) = precision::nearest_rational(&gamma, RATIONAL_DEN_BOUND, &tol) {
            return Err(Error::Config(format!(
                "gamma is rational at working precision ({p}/{q}); an irrational gamma is required"
            )));
        }
        let sqrt_gamma = gamma.clone().sqrt();
        let a = sqrt_gamma.clone().sqrt();
        let gamma_literal = precision::decimal_string(&gamma);
        Ok(Self {
            gamma_f64: precision::to_f64(&gamma),
            sqrt_gamma_f64: precision::to_f64(&sqrt_gamma),
            a_f64: precision::to_f64(&a),
            gamma,
            sqrt_gamma,
            a,
            precision_digits,
            gamma_literal,
        })
    }

    /// Golden-ratio γ (badly approximable, hence diophantine).
    pub fn golden(precision_digits: u32) -> Result<Self> {
        let bits = precision::bits_for_digits(precision_digits);
        Self::new(precision::golden(bits), precision_digits)
    }

    /// γ = √2.
    pub fn sqrt2(precision_digits: u32) -> Result<Self> {
        let bits = precision::bits_for_digits(precision_digits);
        Self::new(precision::sqrt2(bits), precision_digits)
    }

    /// Parse a decimal literal for γ.
    pub fn from_decimal_str(s: &str, precision_digits: u32) -> Result<Self> {
        let bits = precision::bits_for_digits(precision_digits);
        Self::new(precision::parse_decimal(s, bits)?, precision_digits)
    }

    pub fn gamma(&self) -> &BigReal {
        &self.gamma
    }

    pub fn sqrt_gamma(&self) -> &BigReal {
        &self.sqrt_gamma
    }

    /// a = γ^{1/4}.
    pub fn side_parameter(&self) -> &BigReal {
        &self.a
    }

    pub fn gamma_f64(&self) -> f64 {
        self.gamma_f64
    }

    pub fn sqrt_gamma_f64(&self) -> f64 {
        self.sqrt_gamma_f64
    }

    pub fn side_parameter_f64(&self) -> f64 {
        self.a_f64
    }

    pub fn precision_digits(&self) -> u32 {
        self.precision_digits
    }

    pub fn precision_bits(&self) -> usize {
        precision::bits_for_digits(self.precision_digits)
    }

    /// Canonical decimal rendering of γ (cache key, manifests).
    pub fn gamma_literal(&self) -> &str {
        &self.gamma_literal
    }

    /// Extended-precision norm (k² + γl²)/√γ.
    pub fn norm_hp(&self, k: u32, l: u32) -> BigReal {
        let k2 = precision::from_u64(u64::from(k) * u64::from(k), self.precision_bits());
        let l2 = BigReal::from(u64::from(l) * u64::from(l));
        (k2 + &self.gamma * l2) / &self.sqrt_gamma
    }

    /// Double-precision norm, for hot loops that never sort or dedup.
    pub fn norm_f64(&self, k: i64, l: i64) -> f64 {
        let kf = k as f64;
        let lf = l as f64;
        (kf * kf + self.gamma_f64 * lf * lf) / self.sqrt_gamma_f64
    }

    /// Dual-lattice point (k/a, l·a) in double precision.
    pub fn dual_point(&self, k: i64, l: i64) -> (f64, f64) {
        (k as f64 / self.a_f64, l as f64 * self.a_f64)
    }
}

/// One distinct Laplace eigenvalue: canonical representative, norm value,
/// multiplicity and representative angle.
#[derive(Debug, Clone)]
pub struct NormItem {
    /// Canonical representative ξ = (k/a, l·a) with k, l ≥ 0.
    pub k: u32,
    pub l: u32,
    /// Norm value n = (k² + γl²)/√γ in double precision.
    pub n: f64,
    /// Norm value at working precision.
    pub n_hp: BigReal,
    /// Number of lattice points on the circle |ξ|² = n.
    pub r: u8,
    /// Angle of the representative in [0, π/2].
    pub theta: f64,
}

impl NormItem {
    pub fn is_origin(&self) -> bool {
        self.k == 0 && self.l == 0
    }

    pub fn on_axis(&self) -> bool {
        self.k == 0 || self.l == 0
    }
}

/// Items are the same norm iff the integer pairs (k², l²) agree; with k, l ≥ 0
/// that is equality of the representatives.
impl PartialEq for NormItem {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.l == other.l
    }
}

impl Eq for NormItem {}

/// Sorted table of distinct norms n ≤ X.
#[derive(Debug, Clone)]
pub struct NormTable {
    geometry: TorusGeometry,
    x: f64,
    items: Vec<NormItem>,
}

fn multiplicity(k: u32, l: u32) -> u8 {
    match (k, l) {
        (0, 0) => 1,
        (0, _) | (_, 0) => 2,
        _ => 4,
    }
}

fn angle(geometry: &TorusGeometry, k: u32, l: u32) -> f64 {
    if k == 0 && l == 0 {
        return 0.0;
    }
    let (x, y) = geometry.dual_point(i64::from(k), i64::from(l));
    y.atan2(x)
}

/// Enumerate all distinct norms n ≤ x (see [`build_norm_table_with_cap`]).
pub fn build_norm_table(geometry: &TorusGeometry, x: f64) -> Result<NormTable> {
    build_norm_table_with_cap(geometry, x, DEFAULT_ITEM_CAP)
}

/// Enumerate all distinct norms n ≤ x with an explicit item cap.
///
/// Enumeration bounds: k ≤ ⌈√(x·√γ)⌉, l ≤ ⌈√(x/√γ)⌉; the norm comparison
/// against x is done at working precision, one k-stripe per rayon task with a
/// deterministic merge.
pub fn build_norm_table_with_cap(
    geometry: &TorusGeometry,
    x: f64,
    cap: usize,
) -> Result<NormTable> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Config(format!("enumeration ceiling X = {x} invalid")));
    }
    // Quarter-ellipse area plus both half axes overestimates the item count.
    let k_max = (x * geometry.sqrt_gamma_f64()).sqrt().ceil();
    let l_max = (x / geometry.sqrt_gamma_f64()).sqrt().ceil();
    let estimate = (std::f64::consts::FRAC_PI_4 * x + k_max + l_max + 2.0) as usize;
    if estimate > cap {
        return Err(Error::Capacity {
            required: estimate,
            cap,
        });
    }

    let bits = geometry.precision_bits();
    let x_hp = precision::from_f64(x, bits)?;
    let k_bound = k_max as u32;

    let mut stripes: Vec<(u32, Vec<NormItem>)> = (0..=k_bound)
        .into_par_iter()
        .map(|k| {
            let mut stripe = Vec::new();
            for l in 0.. {
                let n_hp = geometry.norm_hp(k, l);
                if n_hp > x_hp {
                    break;
                }
                let n = precision::to_f64(&n_hp);
                stripe.push(NormItem {
                    k,
                    l,
                    n,
                    n_hp,
                    r: multiplicity(k, l),
                    theta: angle(geometry, k, l),
                });
            }
            (k, stripe)
        })
        .collect();
    stripes.sort_by_key(|(k, _)| *k);

    let mut items: Vec<NormItem> = stripes.into_iter().flat_map(|(_, s)| s).collect();
    if items.len() > cap {
        return Err(Error::Capacity {
            required: items.len(),
            cap,
        });
    }
    items.sort_by(|a, b| a.n_hp.cmp(&b.n_hp));

    Ok(NormTable {
        geometry: geometry.clone(),
        x,
        items,
    })
}

impl NormTable {
    pub fn geometry(&self) -> &TorusGeometry {
        &self.geometry
    }

    /// Enumeration ceiling.
    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn items(&self) -> &[NormItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Items with n ≤ cutoff.
    pub fn prefix(&self, cutoff: f64) -> &[NormItem] {
        let end = self.items.partition_point(|it| it.n <= cutoff);
        &self.items[..end]
    }

    /// Index of the first item with n > lambda.
    pub fn first_above(&self, lambda: f64) -> usize {
        self.items.partition_point(|it| it.n <= lambda)
    }

    /// Index of the norm nearest to `value`.
    pub fn nearest_index(&self, value: f64) -> usize {
        let above = self.first_above(value);
        if above == 0 {
            return 0;
        }
        if above >= self.items.len() {
            return self.items.len() - 1;
        }
        let below = above - 1;
        if (value - self.items[below].n).abs() <= (self.items[above].n - value).abs() {
            below
        } else {
            above
        }
    }

    /// Interlacing interval (items index pair) containing lambda, or None if
    /// lambda is below the first norm or above the last.
    pub fn enclosing_interval(&self, lambda: f64) -> Option<(usize, usize)> {
        let above = self.first_above(lambda);
        if above == 0 || above >= self.items.len() {
            None
        } else {
            Some((above - 1, above))
        }
    }

    /// Smallest nearest-neighbour gap among norms ≤ x_limit.
    pub fn min_gap(&self, x_limit: f64) -> f64 {
        let pre = self.prefix(x_limit);
        pre.windows(2)
            .map(|w| w[1].n - w[0].n)
            .fold(f64::INFINITY, f64::min)
    }

    /// Columnar CSV (k, l, n, r, theta); n at 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "k,l,n,r,theta")?;
        for it in &self.items {
            writeln!(w, "{},{},{:.16e},{},{:.16e}", it.k, it.l, it.n, it.r, it.theta)?;
        }
        Ok(())
    }
}

/// Exponential sum wₖ(n) of the k-th angular harmonic over the lattice
/// points of norm n, in closed form: r(n)·cos(kθₙ) for even k, 0 for odd k,
/// and wₖ(0) := 1 by convention.
pub fn exp_sum_w(item: &NormItem, k: i64) -> f64 {
    if item.is_origin() {
        return 1.0;
    }
    if k == 0 {
        return f64::from(item.r);
    }
    if k.rem_euclid(2) == 1 {
        return 0.0;
    }
    f64::from(item.r) * (k as f64 * item.theta).cos()
}

/// |N(x)|: number of distinct norms ≤ x.
pub fn weyl_count(table: &NormTable, x: f64) -> Result<usize> {
    if x > table.x() {
        return Err(Error::Range(format!(
            "weyl_count at X = {x} exceeds table ceiling {}",
            table.x()
        )));
    }
    Ok(table.prefix(x).len())
}

pub mod cache {
    //! Binary cache for norm tables, keyed by (γ literal, precision, X).
    //!
    //! Only the representatives are stored; every derived field is
    //! recomputed on load through the same code path as a fresh build, so a
    //! cache hit is bit-identical to rebuilding.

    use std::fs;
    use std::io::Read;
    use std::path::Path;

    use super::{angle, multiplicity, NormItem, NormTable, TorusGeometry};
    use crate::error::Result;
    use crate::precision;

    const MAGIC: &[u8; 8] = b"PSNTBL1\0";

    fn key(geometry: &TorusGeometry, x: f64) -> Vec<u8> {
        let mut k = Vec::new();
        k.extend_from_slice(geometry.gamma_literal().as_bytes());
        k.push(b'@');
        k.extend_from_slice(&geometry.precision_digits().to_le_bytes());
        k.extend_from_slice(&x.to_bits().to_le_bytes());
        k
    }

    pub fn save(table: &NormTable, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(16 + table.len() * 8);
        buf.extend_from_slice(MAGIC);
        let key = key(table.geometry(), table.x());
        buf.extend_from_slice(&(key.len() as u64).to_le_bytes());
        buf.extend_from_slice(&key);
        buf.extend_from_slice(&(table.len() as u64).to_le_bytes());
        for it in table.items() {
            buf.extend_from_slice(&it.k.to_le_bytes());
            buf.extend_from_slice(&it.l.to_le_bytes());
        }
        fs::write(path, buf)?;
        Ok(())
    }

    /// Load a table if the cache file matches (geometry, x); `Ok(None)` on a
    /// key mismatch or malformed file.
    pub fn load(geometry: &TorusGeometry, x: f64, path: &Path) -> Result<Option<NormTable>> {
        let mut file = match fs::File::open(path) {
            Ok(f) => f,
            Err(_) => return Ok(None),
        };
        let mut buf = Vec::new();
        file.read_to_end(&mut buf)?;
        let parsed = parse(geometry, x, &buf);
        Ok(parsed)
    }

    fn parse(geometry: &TorusGeometry, x: f64, buf: &[u8]) -> Option<NormTable> {
        let mut at = 0usize;
        let take = |at: &mut usize, len: usize| -> Option<&[u8]> {
            let s = buf.get(*at..*at + len)?;
            *at += len;
            Some(s)
        };
        if take(&mut at, 8)? != MAGIC {
            return None;
        }
        let key_len = u64::from_le_bytes(take(&mut at, 8)?.try_into().ok()?) as usize;
        if take(&mut at, key_len)? != key(geometry, x).as_slice() {
            return None;
        }
        let count = u64::from_le_bytes(take(&mut at, 8)?.try_into().ok()?) as usize;
        let mut items = Vec::with_capacity(count);
        for _ in 0..count {
            let k = u32::from_le_bytes(take(&mut at, 4)?.try_into().ok()?);
            let l = u32::from_le_bytes(take(&mut at, 4)?.try_into().ok()?);
            let n_hp = geometry.norm_hp(k, l);
            items.push(NormItem {
                k,
                l,
                n: precision::to_f64(&n_hp),
                n_hp,
                r: multiplicity(k, l),
                theta: angle(geometry, k, l),
            });
        }
        Some(NormTable {
            geometry: geometry.clone(),
            x,
            items,
        })
    }

    /// Load from `path` when valid, otherwise build and write back.
    pub fn load_or_build(
        geometry: &TorusGeometry,
        x: f64,
        cap: usize,
        path: &Path,
    ) -> Result<NormTable> {
        if let Some(t) = load(geometry, x, path)? {
            return Ok(t);
        }
        let t = super::build_norm_table_with_cap(geometry, x, cap)?;
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        save(&t, path)?;
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::to_f64;
    use dashu::base::Abs;

    fn golden() -> TorusGeometry {
        TorusGeometry::golden(50).unwrap()
    }

    fn sqrt2() -> TorusGeometry {
        TorusGeometry::sqrt2(50).unwrap()
    }

    #[test]
    fn rejects_rational_gamma() {
        let bits = precision::bits_for_digits(50);
        let err = TorusGeometry::new(precision::parse_decimal("1.25", bits).unwrap(), 50);
        assert!(matches!(err, Err(Error::Config(_))));
        let err = TorusGeometry::from_decimal_str("2", 50);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn area_is_unimodular() {
        let g = golden();
        let prod = g.side_parameter_f64() * (1.0 / g.side_parameter_f64());
        assert!((prod - 1.0).abs() < 1e-15);
        let a4 = g.side_parameter().clone().sqr().sqr();
        assert!(to_f64(&(a4 - g.gamma()).abs()) < 1e-40);
    }

    #[test]
    fn x_zero_table_is_origin_only() {
        let t = build_norm_table(&golden(), 0.0).unwrap();
        assert_eq!(t.len(), 1);
        let it = &t.items()[0];
        assert_eq!((it.k, it.l, it.r), (0, 0, 1));
        assert_eq!(it.n, 0.0);
    }

    #[test]
    fn multiplicities_follow_axis_pattern() {
        let t = build_norm_table(&golden(), 200.0).unwrap();
        assert_eq!(t.items()[0].r, 1);
        for it in t.items().iter().skip(1) {
            if it.on_axis() {
                assert_eq!(it.r, 2, "axis item ({}, {})", it.k, it.l);
            } else {
                assert_eq!(it.r, 4, "interior item ({}, {})", it.k, it.l);
            }
        }
    }

    #[test]
    fn items_strictly_increase() {
        let t = build_norm_table(&sqrt2(), 500.0).unwrap();
        for w in t.items().windows(2) {
            assert!(w[0].n_hp < w[1].n_hp);
        }
    }

    #[test]
    fn theta_ranges_and_axis_values() {
        let t = build_norm_table(&golden(), 300.0).unwrap();
        for it in t.items().iter().skip(1) {
            assert!((0.0..=std::f64::consts::FRAC_PI_2 + 1e-15).contains(&it.theta));
            if it.l == 0 {
                assert_eq!(it.theta, 0.0);
            }
            if it.k == 0 {
                assert!((it.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn capacity_error_reports_requirement() {
        let err = build_norm_table_with_cap(&golden(), 1e6, 100);
        match err {
            Err(Error::Capacity { required, cap }) => {
                assert!(required > 100_000);
                assert_eq!(cap, 100);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn exp_sum_conventions() {
        let t = build_norm_table(&sqrt2(), 50.0).unwrap();
        let origin = &t.items()[0];
        assert_eq!(exp_sum_w(origin, 0), 1.0);
        assert_eq!(exp_sum_w(origin, 3), 1.0);
        for it in t.items().iter().skip(1) {
            assert_eq!(exp_sum_w(it, 1), 0.0);
            assert_eq!(exp_sum_w(it, -7), 0.0);
            assert_eq!(exp_sum_w(it, 0), f64::from(it.r));
            let w2 = exp_sum_w(it, 2);
            assert!((w2 - f64::from(it.r) * (2.0 * it.theta).cos()).abs() < 1e-14);
            // even harmonics are conjugation-symmetric
            assert_eq!(w2, exp_sum_w(it, -2));
        }
    }

    #[test]
    fn weyl_count_range_check() {
        let t = build_norm_table(&golden(), 100.0).unwrap();
        assert_eq!(weyl_count(&t, 0.0).unwrap(), 1);
        assert!(matches!(weyl_count(&t, 101.0), Err(Error::Range(_))));
        assert_eq!(weyl_count(&t, 100.0).unwrap(), t.len());
    }

    #[test]
    fn cache_roundtrip_is_identical() {
        let g = sqrt2();
        let t = build_norm_table(&g, 120.0).unwrap();
        let dir = std::env::temp_dir().join("pointscat-cache-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t120.ntbl");
        cache::save(&t, &path).unwrap();
        let loaded = cache::load(&g, 120.0, &path).unwrap().expect("cache hit");
        assert_eq!(loaded.len(), t.len());
        for (a, b) in loaded.items().iter().zip(t.items()) {
            assert_eq!(a, b);
            assert_eq!(a.n.to_bits(), b.n.to_bits());
            assert_eq!(a.theta.to_bits(), b.theta.to_bits());
        }
        // key mismatch: different ceiling
        assert!(cache::load(&g, 121.0, &path).unwrap().is_none());
        // key mismatch: different gamma
        assert!(cache::load(&golden(), 120.0, &path).unwrap().is_none());
    }
}
