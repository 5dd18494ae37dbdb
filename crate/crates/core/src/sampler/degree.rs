use crate::error::{GenError, Result};
use crate::rng::DeterministicStream;
use crate::samplers::{sample_pareto, sample_truncated_gaussian};

/// Preferred 1-based rank for a community with degree center `delta`.
pub fn rank_center(delta: f64, n: usize) -> f64 {
    1.0 + (1.0 + delta) / 2.0 * (n as f64 - 1.0)
}

/// Rank spread: `sigma_min = max(1, min pairwise center gap / 6)`,
/// `sigma_max = n`, interpolated on the variance scale by `1 - rho`.
pub fn rank_sigma(centers: &[f64], n: usize, rho: f64) -> f64 {
    let mut min_gap = f64::INFINITY;
    for (i, a) in centers.iter().enumerate() {
        for b in &centers[i + 1..] {
            min_gap = min_gap.min((a - b).abs());
        }
    }
    let sigma_min = if min_gap.is_finite() {
        (min_gap / 6.0).max(1.0)
    } else {
        1.0
    };
    let sigma_max = n as f64;
    let var = sigma_min * sigma_min + (1.0 - rho) * (sigma_max * sigma_max - sigma_min * sigma_min);
    var.sqrt()
}

/// Community-coupled power-law degree factors with global mean one.
///
/// Each node samples a rank around its community's preferred rank (truncated
/// to `[1, n]`, rounded to the nearest integer, with replacement) and takes the
/// sorted power-law value at that rank.
pub fn assign_degree_factors(
    stream: &mut DeterministicStream,
    node_community: &[usize],
    degree_centers: &[f64],
    rho: f64,
    alpha: f64,
) -> Result<Vec<f64>> {
    let n = node_community.len();
    if n == 0 {
        return Err(GenError::InvalidArgument("no nodes to assign".into()));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(GenError::InvalidArgument(format!(
            "degree separation {rho} outside [0, 1]"
        )));
    }
    if node_community.iter().any(|&c| c >= degree_centers.len()) {
        return Err(GenError::InvalidArgument(
            "node community has no degree center".into(),
        ));
    }

    let mut sorted = (0..n)
        .map(|_| sample_pareto(stream, alpha))
        .collect::<Result<Vec<f64>>>()?;
    sorted.sort_by(f64::total_cmp);

    let centers: Vec<f64> = degree_centers.iter().map(|&d| rank_center(d, n)).collect();
    let sigma = rank_sigma(&centers, n, rho);

    let mut theta = Vec::with_capacity(n);
    for &c in node_community {
        let rank = if n == 1 {
            1
        } else {
            let x = sample_truncated_gaussian(stream, centers[c], sigma, 1.0, n as f64)?;
            (x.round() as usize).clamp(1, n)
        };
        theta.push(sorted[rank - 1]);
    }

    let mean = theta.iter().sum::<f64>() / n as f64;
    for t in &mut theta {
        *t /= mean;
    }
    Ok(theta)
}
