//! Linear program over the nonnegative elastic-net ball:
//! maximize ⟨u, θ⟩ subject to θ ⪰ 0, η‖θ‖₁ + (1−η)‖θ‖₂² ≤ 1, for u ⪰ 0.
//!
//! For η < 1 the constraint surface on the nonnegative orthant is a sphere
//! centred at −d·1 with d = η/(2−2η). The farthest sphere point along u is
//! the candidate; any coordinate where it goes negative is zero in the
//! optimum, so it is pruned and the candidate recomputed on the remaining
//! coordinates until no component is negative. At most Q passes.

use crate::error::{MklError, Result};
use crate::wsr::ElasticNetMix;

/// η at or above which the lasso closed form is used.
pub const LASSO_ETA_CUTOFF: f64 = 1.0 - 1e-9;

/// Final state of the pruning loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LpActiveSet {
    /// Indices proven zero, in the order they were pruned.
    pub zeroed: Vec<usize>,
    /// d = η/(2−2η); infinite in the lasso case.
    pub d: f64,
    /// Radius of the last sub-sphere.
    pub radius: f64,
    /// The solution θ̌.
    pub iterate: Vec<f64>,
    /// Number of candidate computations performed.
    pub passes: usize,
}

fn check_u(u: &[f64]) -> Result<()> {
    if u.is_empty() {
        return Err(MklError::input("u is empty"));
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(MklError::input("u has non-finite components"));
    }
    if u.iter().any(|&v| v < 0.0) {
        return Err(MklError::input("u must be nonnegative"));
    }
    if u.iter().all(|&v| v == 0.0) {
        return Err(MklError::input("u must not be the zero vector"));
    }
    Ok(())
}

pub fn enlp_solve(u: &[f64], eta: ElasticNetMix) -> Result<Vec<f64>> {
    Ok(enlp_solve_detailed(u, eta)?.iterate)
}

pub fn enlp_solve_detailed(u: &[f64], eta: ElasticNetMix) -> Result<LpActiveSet> {
    check_u(u)?;
    let q_len = u.len();
    let eta = eta.get();

    if eta >= LASSO_ETA_CUTOFF {
        // Vertex e_k with k the first maximizer of u.
        let mut best = 0;
        for k in 1..q_len {
            if u[k] > u[best] {
                best = k;
            }
        }
        let mut iterate = vec![0.0; q_len];
        iterate[best] = 1.0;
        return Ok(LpActiveSet {
            zeroed: (0..q_len).filter(|&k| k != best).collect(),
            d: f64::INFINITY,
            radius: f64::INFINITY,
            iterate,
            passes: 1,
        });
    }

    let d = eta / (2.0 - 2.0 * eta);
    let mut pruned = vec![false; q_len];
    let mut zeroed = Vec::new();
    let mut q = vec![0.0; q_len];
    let mut passes = 0;
    let mut radius;
    loop {
        passes += 1;
        let free = q_len - zeroed.len();
        radius = (free as f64 * d * d + 2.0 * d + 1.0).sqrt();
        let norm = u
            .iter()
            .zip(&pruned)
            .filter(|(_, &p)| !p)
            .map(|(v, _)| v * v)
            .sum::<f64>()
            .sqrt();
        let mut newly = Vec::new();
        for k in 0..q_len {
            if pruned[k] {
                q[k] = 0.0;
                continue;
            }
            q[k] = radius * u[k] / norm - d;
            if q[k] < 0.0 {
                newly.push(k);
            }
        }
        if newly.is_empty() {
            break;
        }
        for k in newly {
            q[k] = 0.0;
            pruned[k] = true;
            zeroed.push(k);
        }
        if passes > q_len {
            return Err(MklError::Internal(
                "elastic-net LP pruning did not terminate within Q passes".into(),
            ));
        }
    }
    Ok(LpActiveSet {
        zeroed,
        d,
        radius,
        iterate: q,
        passes,
    })
}
