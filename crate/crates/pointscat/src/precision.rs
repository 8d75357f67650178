//! Extended-precision reals.
//!
//! Norm values and the brute-force reference sums are carried at a
//! configurable decimal precision (default 50 digits) so that
//! near-degenerate norms sort stably and slow oracle sums do not lose the
//! cancellation battle. Downstream numerics consume plain `f64`.

use dashu::base::{Abs, Approximation};
use dashu::float::{round::mode::HalfEven, FBig};

use crate::error::{Error, Result};

/// Binary arbitrary-precision real with round-half-to-even.
pub type BigReal = FBig<HalfEven, 2>;

/// Default working precision in decimal digits.
pub const DEFAULT_DIGITS: u32 = 50;

/// Binary precision honouring `digits` decimal digits, with guard bits.
pub fn bits_for_digits(digits: u32) -> usize {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as usize + 16
}

pub fn from_u64(v: u64, bits: usize) -> BigReal {
    BigReal::from(v).with_precision(bits).value()
}

pub fn from_f64(v: f64, bits: usize) -> Result<BigReal> {
    let x = BigReal::try_from(v)
        .map_err(|_| Error::Config(format!("non-finite value {v} not representable")))?;
    Ok(x.with_precision(bits).value())
}

/// Nearest `f64`.
pub fn to_f64(x: &BigReal) -> f64 {
    match x.to_f64() {
        Approximation::Exact(v) => v,
        Approximation::Inexact(v, _) => v,
    }
}

/// Parse a decimal literal at the given binary precision.
pub fn parse_decimal(s: &str, bits: usize) -> Result<BigReal> {
    let dec: dashu::float::DBig = s
        .trim()
        .parse()
        .map_err(|e| Error::Config(format!("cannot parse '{s}' as a decimal number: {e}")))?;
    let bin = dec.to_binary().value();
    Ok(bin.with_rounding::<HalfEven>().with_precision(bits).value())
}

/// Golden ratio (1+√5)/2, the default badly-approximable γ.
pub fn golden(bits: usize) -> BigReal {
    let five = from_u64(5, bits);
    (BigReal::ONE + five.sqrt()) / BigReal::from(2)
}

/// √2, the alternate γ.
pub fn sqrt2(bits: usize) -> BigReal {
    from_u64(2, bits).sqrt()
}

/// Canonical decimal rendering, used for cache keys and manifests.
pub fn decimal_string(x: &BigReal) -> String {
    match x.to_decimal() {
        Approximation::Exact(d) => d.to_string(),
        Approximation::Inexact(d, _) => d.to_string(),
    }
}

/// Best rational approximation p/q with q ≤ `max_den` lying within `tol`,
/// found by walking the continued-fraction convergents. `None` means no
/// rational with a small denominator matches, i.e. the number passes the
/// irrationality screen.
pub fn nearest_rational(x: &BigReal, max_den: u64, tol: &BigReal) -> Option<(u64, u64)> {
    if x < &BigReal::ZERO {
        return None;
    }
    // Convergent recurrence p_i = a_i p_{i-1} + p_{i-2}, same for q,
    // seeded with (p_{-2}, q_{-2}) = (0, 1), (p_{-1}, q_{-1}) = (1, 0).
    let (mut p_prev, mut q_prev) = (0u128, 1u128);
    let (mut p_cur, mut q_cur) = (1u128, 0u128);
    let mut frac = x.clone();
    for _ in 0..200 {
        let floor_f = to_f64(&frac).floor();
        if !(0.0..=1e18).contains(&floor_f) {
            return None;
        }
        let a = floor_f as u64;
        let (p_next, q_next) = (
            u128::from(a) * p_cur + p_prev,
            u128::from(a) * q_cur + q_prev,
        );
        if q_next > u128::from(max_den) {
            return None;
        }
        (p_prev, q_prev) = (p_cur, q_cur);
        (p_cur, q_cur) = (p_next, q_next);

        let conv = BigReal::from(p_cur) / BigReal::from(q_cur);
        let diff = (x - conv).abs();
        if &diff < tol {
            return Some((p_cur as u64, q_cur as u64));
        }
        let rem = &frac - BigReal::from(a);
        if rem == BigReal::ZERO {
            // Exactly rational but only reachable with a larger denominator.
            return None;
        }
        frac = BigReal::ONE.with_precision(frac.precision()).value() / rem;
    }
    None
}
