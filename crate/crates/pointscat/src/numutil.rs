//! Small numeric helpers shared across modules.

/// Compensated (Kahan) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Median of a sample (empty input gives NaN).
pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// q-quantile by linear interpolation of order statistics.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        v[lo]
    } else {
        v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
    }
}

/// FNV-1a 64-bit hash; stable fingerprint for manifests.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Box discrepancy of points in the unit square: max deviation of the
/// empirical count over a grid of anchored boxes [0,i/g]×[0,j/g] from the
/// box area.
pub fn box_discrepancy_2d(points: &[(f64, f64)], grid: usize) -> f64 {
    if points.is_empty() {
        return 1.0;
    }
    let g = grid.max(1);
    let n = points.len() as f64;
    let mut counts = vec![0u32; (g + 1) * (g + 1)];
    for &(x, y) in points {
        let i = ((x * g as f64).ceil() as usize).min(g);
        let j = ((y * g as f64).ceil() as usize).min(g);
        counts[i * (g + 1) + j] += 1;
    }
    // Prefix sums so counts[i][j] = #points with x ≤ i/g, y ≤ j/g.
    for i in 0..=g {
        for j in 1..=g {
            counts[i * (g + 1) + j] += counts[i * (g + 1) + j - 1];
        }
    }
    for j in 0..=g {
        for i in 1..=g {
            counts[i * (g + 1) + j] += counts[(i - 1) * (g + 1) + j];
        }
    }
    let mut worst = 0.0f64;
    for i in 0..=g {
        for j in 0..=g {
            let emp = f64::from(counts[i * (g + 1) + j]) / n;
            let area = (i as f64 / g as f64) * (j as f64 / g as f64);
            worst = worst.max((emp - area).abs());
        }
    }
    worst
}
