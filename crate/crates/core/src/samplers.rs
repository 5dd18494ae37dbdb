//! Primitive distributions used by the generator.

use statrs::function::erf::erfc;

use crate::error::{GenError, Result};
use crate::rng::DeterministicStream;

/// Standard normal CDF computed through `erfc` so both tails keep precision.
pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Pareto draw with minimum 1 and density exponent `alpha`:
/// `x = (1 - u)^(-1 / (alpha - 1))`.
pub fn sample_pareto(stream: &mut DeterministicStream, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(GenError::InvalidArgument(format!(
            "power-law exponent must be > 1, got {alpha}"
        )));
    }
    Ok(pareto_from_uniform(stream.uniform(), alpha))
}

#[inline]
pub(crate) fn pareto_from_uniform(u: f64, alpha: f64) -> f64 {
    (1.0 - u).powf(-1.0 / (alpha - 1.0))
}

/// Gaussian restricted to `[lo, hi]`.
///
/// Plain rejection while the interval holds at least 1% of the mass.
/// Below that, the interval is mirrored into the upper tail and sampled
/// with a truncated-exponential proposal, which stays exact far into the
/// tail where an inverse CDF would underflow.
pub fn sample_truncated_gaussian(
    stream: &mut DeterministicStream,
    mean: f64,
    sd: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    if !(lo < hi) || !(sd > 0.0) || !mean.is_finite() {
        return Err(GenError::InvalidArgument(format!(
            "truncated gaussian needs lo < hi and sd > 0 (lo={lo}, hi={hi}, sd={sd})"
        )));
    }
    let a = (lo - mean) / sd;
    let b = (hi - mean) / sd;
    let mass = if a > 0.0 {
        normal_cdf(-a) - normal_cdf(-b)
    } else {
        normal_cdf(b) - normal_cdf(a)
    };

    let z = if mass >= 0.01 {
        loop {
            let z = stream.standard_normal();
            if z >= a && z <= b {
                break z;
            }
        }
    } else if a >= 0.0 {
        upper_tail(stream, a, b)
    } else if b <= 0.0 {
        -upper_tail(stream, -b, -a)
    } else {
        // Narrow interval around zero: the density is almost flat on it.
        loop {
            let z = stream.uniform_in(a, b);
            if stream.uniform() < (-0.5 * z * z).exp() {
                break z;
            }
        }
    };
    Ok((mean + sd * z).clamp(lo, hi))
}

/// Standard normal restricted to `[a, b]` with `0 <= a < b`.
fn upper_tail(stream: &mut DeterministicStream, a: f64, b: f64) -> f64 {
    let width = b - a;
    loop {
        let t = if a > 0.0 {
            let span = -(-a * width).exp_m1();
            -(-stream.uniform() * span).ln_1p() / a
        } else {
            stream.uniform() * width
        };
        if stream.uniform() < (-0.5 * t * t).exp() {
            return (a + t).min(b);
        }
    }
}
