//! Turning a propensity submatrix into Bernoulli block probabilities.
//!
//! Both entry points run the same two stages. The homophily stage scales the
//! diagonal and the off-diagonal separately so that a fraction `h` of the
//! pair-weighted mass sits on the diagonal. The density stage applies one
//! global factor so the expected edge count matches the target degree, then
//! clips to `[0, 1]`.
//!
//! They differ only in the pair weights. [`scale_probability_matrix`] uses
//! community sizes (every node counts as 1). [`scale_for_degree_factors`]
//! weighs each ordered node pair `(i, j), i != j` by `theta_i * theta_j`, which
//! makes the expected homophily and edge count exact for the realized factors.
//!
//! The degree-factor form also reports compensation factors for node pairs
//! whose edge probability `theta_i theta_j P*` would exceed 1. Edges are drawn
//! from [`compensated_matrix`], which raises the intra and inter entries of
//! `P*` by those factors; `P*` itself stays the closed form.

use serde::{Deserialize, Serialize};

use crate::error::{GenError, Result};
use crate::types::SquareMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledMatrixDerivation {
    pub p_sub: SquareMatrix,
    /// Diagonal propensity mass seen by the homophily stage.
    pub s_diag: f64,
    /// Off-diagonal propensity mass seen by the homophily stage.
    pub s_off: f64,
    pub alpha_diag: f64,
    pub alpha_off: f64,
    pub beta: f64,
    pub p_star: SquareMatrix,
    pub clip_count: usize,
    /// Extra factor on the intra-community entries that offsets pairs
    /// saturating at probability 1 (1 when nothing saturates).
    pub intra_compensation: f64,
    /// Same for the inter-community entries.
    pub inter_compensation: f64,
    /// Node pairs whose sampling probability saturates at 1 (0 for
    /// size-based scaling).
    pub saturated_pairs: usize,
}

impl ScaledMatrixDerivation {
    /// The matrix edges are drawn from.
    pub fn sampling_matrix(&self) -> SquareMatrix {
        compensated_matrix(&self.p_star, self.intra_compensation, self.inter_compensation)
    }
}

/// `min(1, f * P*)` with `f` the intra factor on the diagonal and the inter
/// factor elsewhere.
pub fn compensated_matrix(p_star: &SquareMatrix, intra: f64, inter: f64) -> SquareMatrix {
    SquareMatrix::from_fn(p_star.dim(), |r, s| {
        let f = if r == s { intra } else { inter };
        (f * p_star.get(r, s)).min(1.0)
    })
}

fn homophily_factors(h: f64, s_diag: f64, s_off: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&h) {
        return Err(GenError::InvalidArgument(format!("homophily {h} outside [0, 1]")));
    }
    let alpha_diag = if h == 0.0 {
        0.0
    } else if s_diag > 0.0 {
        h / s_diag
    } else {
        return Err(GenError::UnsatisfiableHomophily {
            h,
            reason: "no diagonal propensity mass".into(),
        });
    };
    let alpha_off = if h == 1.0 {
        0.0
    } else if s_off > 0.0 {
        (1.0 - h) / s_off
    } else {
        return Err(GenError::UnsatisfiableHomophily {
            h,
            reason: "no off-diagonal propensity mass".into(),
        });
    };
    Ok((alpha_diag, alpha_off))
}

fn check_p_sub(p_sub: &SquareMatrix) -> Result<()> {
    if p_sub.values().iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(GenError::InvalidArgument(
            "propensity entries must be finite and non-negative".into(),
        ));
    }
    Ok(())
}

/// Applies the homophily factors and `beta`, then clips to `[0, 1]`.
fn finish(
    p_sub: &SquareMatrix,
    s_diag: f64,
    s_off: f64,
    (alpha_diag, alpha_off): (f64, f64),
    beta: f64,
) -> Result<ScaledMatrixDerivation> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(GenError::NonFiniteScale);
    }
    let mut clip_count = 0;
    let p_star = SquareMatrix::from_fn(p_sub.dim(), |r, s| {
        let alpha = if r == s { alpha_diag } else { alpha_off };
        let p = beta * alpha * p_sub.get(r, s);
        if p > 1.0 {
            clip_count += 1;
            1.0
        } else {
            p
        }
    });
    Ok(ScaledMatrixDerivation {
        p_sub: p_sub.clone(),
        s_diag,
        s_off,
        alpha_diag,
        alpha_off,
        beta,
        p_star,
        clip_count,
        intra_compensation: 1.0,
        inter_compensation: 1.0,
        saturated_pairs: 0,
    })
}

fn diag_off_mass(p_sub: &SquareMatrix, weight: impl Fn(usize, usize) -> f64) -> (f64, f64) {
    let k = p_sub.dim();
    let (mut diag, mut off) = (0.0, 0.0);
    for r in 0..k {
        for s in 0..k {
            let m = p_sub.get(r, s) * weight(r, s);
            if r == s {
                diag += m;
            } else {
                off += m;
            }
        }
    }
    (diag, off)
}

/// Size-based scaling: `alpha_diag = h / S_diag`, `alpha_off = (1 - h) / S_off`
/// on raw entry sums, then `beta = n^2 * rho / sum_rs n_r n_s P'_rs` with
/// `rho = d / (n - 1)`.
pub fn scale_probability_matrix(
    p_sub: &SquareMatrix,
    h: f64,
    d: f64,
    n: usize,
    community_sizes: &[usize],
) -> Result<ScaledMatrixDerivation> {
    check_p_sub(p_sub)?;
    if n < 2 || !(d > 0.0) || community_sizes.len() != p_sub.dim() {
        return Err(GenError::InvalidArgument(format!(
            "density scaling needs n >= 2, d > 0 and one size per community (n={n}, d={d})"
        )));
    }
    let (s_diag, s_off) = diag_off_mass(p_sub, |_, _| 1.0);
    let alphas = homophily_factors(h, s_diag, s_off)?;
    let (pd, po) = diag_off_mass(p_sub, |r, s| {
        let a = if r == s { alphas.0 } else { alphas.1 };
        a * (community_sizes[r] * community_sizes[s]) as f64
    });
    let rho_target = d / (n - 1) as f64;
    let beta = (n * n) as f64 * rho_target / (pd + po);
    finish(p_sub, s_diag, s_off, alphas, beta)
}

/// Degree-factor-aware scaling with saturation compensation.
///
/// With `T_r = sum theta_i` and `Q_r = sum theta_i^2` over community `r`, the
/// pair weight is `W_rs = T_r T_s - [r = s] Q_r`, and `beta = n d` makes
/// `sum_{i<j} theta_i theta_j P*[c(i), c(j)] = n d / 2` with an intra share of
/// `h`. That is `p_star` and `clip_count`.
///
/// Pairs with `theta_i theta_j P* > 1` saturate at probability 1, so the
/// realized edge count would fall short. The intra and inter compensation
/// factors are raised independently (bisection) until
/// `sum_{i<j} min(1, theta_i theta_j f P*)` puts exactly `h n d / 2` expected
/// edges inside communities and `(1 - h) n d / 2` across them. Both are 1
/// when nothing saturates.
pub fn scale_for_degree_factors(
    p_sub: &SquareMatrix,
    h: f64,
    d: f64,
    theta: &[f64],
    node_community: &[usize],
) -> Result<ScaledMatrixDerivation> {
    check_p_sub(p_sub)?;
    let n = theta.len();
    if n < 2 || !(d > 0.0) || node_community.len() != n {
        return Err(GenError::InvalidArgument(format!(
            "density scaling needs n >= 2 and d > 0 (n={n}, d={d})"
        )));
    }
    let k = p_sub.dim();
    let factors = CommunityFactors::new(theta, node_community, k);
    let weight = |r: usize, s: usize| {
        let w = factors.total[r] * factors.total[s];
        if r == s {
            w - factors.total_sq[r]
        } else {
            w
        }
    };
    let (s_diag, s_off) = diag_off_mass(p_sub, weight);
    let alphas = homophily_factors(h, s_diag, s_off)?;
    // The weighted mass of P' is h + (1 - h) = 1 over ordered pairs.
    let beta = n as f64 * d;

    let half_edges = n as f64 * d / 2.0;
    let intra = |scale: f64| {
        (0..k)
            .map(|r| factors.block(r, r, (scale * p_sub.get(r, r)).min(1.0)).0)
            .sum::<f64>()
    };
    let inter = |scale: f64| {
        (0..k)
            .flat_map(|r| (r + 1..k).map(move |s| (r, s)))
            .map(|(r, s)| factors.block(r, s, (scale * p_sub.get(r, s)).min(1.0)).0)
            .sum::<f64>()
    };
    // Scale at which every positive entry of a class reaches 1.
    let ceiling = |diagonal: bool| {
        let mut min_p = f64::INFINITY;
        for r in 0..k {
            for s in 0..k {
                let p = p_sub.get(r, s);
                if (r == s) == diagonal && p > 0.0 {
                    min_p = min_p.min(p);
                }
            }
        }
        1.0 / min_p
    };
    let intra_scale = solve_scale(intra, h * half_edges, beta * alphas.0, ceiling(true));
    let inter_scale = solve_scale(inter, (1.0 - h) * half_edges, beta * alphas.1, ceiling(false));

    let mut derivation = finish(p_sub, s_diag, s_off, alphas, beta)?;
    derivation.intra_compensation = compensation(intra_scale, beta * alphas.0);
    derivation.inter_compensation = compensation(inter_scale, beta * alphas.1);
    derivation.saturated_pairs = factors.saturated_pairs(&derivation.sampling_matrix());
    Ok(derivation)
}

fn compensation(solved: f64, closed_form: f64) -> f64 {
    if closed_form > 0.0 {
        solved / closed_form
    } else {
        1.0
    }
}

/// Scale with `expected(scale) = target`, starting at the closed-form guess.
/// `expected` is continuous and non-decreasing and stops growing at
/// `ceiling`, where every entry of the class reaches 1; when the target is
/// out of reach the ceiling is returned.
fn solve_scale(expected: impl Fn(f64) -> f64, target: f64, guess: f64, ceiling: f64) -> f64 {
    if !(target > 0.0) || !(guess > 0.0) {
        return 0.0;
    }
    let close = |v: f64| (v - target).abs() <= 1e-12 * target;
    let at_guess = expected(guess);
    if close(at_guess) {
        return guess;
    }
    let (mut lo, mut hi) = if at_guess < target {
        if guess >= ceiling || expected(ceiling) <= target {
            return ceiling.max(guess);
        }
        (guess, ceiling)
    } else {
        (0.0, guess)
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = expected(mid);
        if close(v) {
            return mid;
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Per-community degree factors sorted ascending, with prefix sums, for
/// closed-form sums of `min(1, c * theta_i * theta_j)` over a block.
pub(crate) struct CommunityFactors {
    sorted: Vec<Vec<f64>>,
    prefix: Vec<Vec<f64>>,
    total: Vec<f64>,
    total_sq: Vec<f64>,
}

impl CommunityFactors {
    pub fn new(theta: &[f64], node_community: &[usize], k: usize) -> Self {
        let mut sorted: Vec<Vec<f64>> = vec![Vec::new(); k];
        for (&t, &c) in theta.iter().zip(node_community) {
            sorted[c].push(t);
        }
        for list in &mut sorted {
            list.sort_by(f64::total_cmp);
        }
        let prefix = sorted
            .iter()
            .map(|list| {
                std::iter::once(0.0)
                    .chain(list.iter().scan(0.0, |acc, &t| {
                        *acc += t;
                        Some(*acc)
                    }))
                    .collect()
            })
            .collect();
        let total = sorted.iter().map(|l| l.iter().sum()).collect();
        let total_sq = sorted.iter().map(|l| l.iter().map(|t| t * t).sum()).collect();
        Self {
            sorted,
            prefix,
            total,
            total_sq,
        }
    }

    /// Expected edges and saturated pairs among unordered pairs of the block.
    pub fn block(&self, r: usize, s: usize, c: f64) -> (f64, usize) {
        if c <= 0.0 {
            return (0.0, 0);
        }
        let (rows, cols, prefix) = (&self.sorted[r], &self.sorted[s], &self.prefix[s]);
        let (mut expected, mut saturated) = (0.0, 0usize);
        for &x in rows {
            let cut = cols.partition_point(|&y| c * x * y <= 1.0);
            expected += c * x * prefix[cut] + (cols.len() - cut) as f64;
            saturated += cols.len() - cut;
        }
        if r == s {
            for &x in rows {
                let p = c * x * x;
                expected -= p.min(1.0);
                saturated -= usize::from(p > 1.0);
            }
            (expected / 2.0, saturated / 2)
        } else {
            (expected, saturated)
        }
    }

    pub fn saturated_pairs(&self, p_star: &SquareMatrix) -> usize {
        let k = p_star.dim();
        (0..k)
            .flat_map(|r| (r..k).map(move |s| (r, s)))
            .map(|(r, s)| self.block(r, s, p_star.get(r, s)).1)
            .sum()
    }
}

/// Expected edge count `sum_{i<j} min(1, theta_i theta_j P*[c(i), c(j)])`
/// and the number of pairs whose product exceeds 1.
pub fn expected_edges(theta: &[f64], node_community: &[usize], p_star: &SquareMatrix) -> (f64, usize) {
    let k = p_star.dim();
    let factors = CommunityFactors::new(theta, node_community, k);
    (0..k)
        .flat_map(|r| (r..k).map(move |s| (r, s)))
        .map(|(r, s)| factors.block(r, s, p_star.get(r, s)))
        .fold((0.0, 0), |(e, c), (be, bc)| (e + be, c + bc))
}
