//! Brute-force reference solvers for the two kernel-weight subproblems.
//!
//! Nothing here calls into [`crate::wsr`] or [`crate::enlp`]: the reciprocal
//! sum is solved from its KKT conditions by nested bisection, and the linear
//! program by enumerating every support pattern. Slow, and meant to be.

use crate::error::{MklError, Result};
use crate::wsr::ElasticNetMix;

/// Largest Q accepted by [`enlp_oracle`] (2^Q supports are enumerated).
pub const ENLP_ORACLE_MAX_Q: usize = 20;

const BISECT_ITERS: usize = 400;

fn constraint(theta: &[f64], eta: f64) -> f64 {
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    for &t in theta {
        l1 += t;
        l2 += t * t;
    }
    eta * l1 + (1.0 - eta) * l2
}

/// Root of βₖ/θ² = λ(η + 2(1−η)θ) in θ > 0. The left side minus the right
/// side is strictly decreasing, so the root is unique.
fn stationary_weight(beta: f64, lambda: f64, eta: f64) -> Result<f64> {
    let residual = |t: f64| beta / (t * t) - lambda * (eta + 2.0 * (1.0 - eta) * t);

    let mut hi = f64::INFINITY;
    if eta > 0.0 {
        hi = hi.min((beta / (lambda * eta)).sqrt());
    }
    if eta < 1.0 {
        hi = hi.min((beta / (2.0 * lambda * (1.0 - eta))).cbrt());
    }
    let mut lo = (beta / (lambda * (eta + 2.0 * (1.0 - eta) * hi))).sqrt();
    // widen slightly against rounding in the analytic bounds
    lo *= 1.0 - 1e-12;
    hi *= 1.0 + 1e-12;
    if !(residual(lo) >= 0.0 && residual(hi) <= 0.0) {
        return Err(MklError::Internal(format!(
            "stationarity bracket [{lo}, {hi}] does not contain a root (beta={beta}, lambda={lambda})"
        )));
    }
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn weights_for(beta: &[f64], lambda: f64, eta: f64) -> Result<Vec<f64>> {
    beta.iter()
        .map(|&b| stationary_weight(b, lambda, eta))
        .collect()
}

/// Minimizes Σ βₖ/θₖ on the elastic-net surface from its KKT system.
///
/// For a multiplier λ each θₖ solves βₖ/θₖ² = λ(η + 2(1−η)θₖ); the
/// constraint value decreases in λ, and λ is bisected (in log space) until
/// the constraint holds within `tol`.
pub fn wsr_oracle(beta: &[f64], eta: ElasticNetMix, tol: f64) -> Result<Vec<f64>> {
    if beta.is_empty() || beta.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return Err(MklError::input("beta must be nonempty and strictly positive"));
    }
    let eta = eta.get();

    let mut lo = 1.0f64;
    let mut hi = 1.0f64;
    while constraint(&weights_for(beta, lo, eta)?, eta) < 1.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(MklError::Internal("multiplier bracket underflow".into()));
        }
    }
    while constraint(&weights_for(beta, hi, eta)?, eta) > 1.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(MklError::Internal("multiplier bracket overflow".into()));
        }
    }

    let (mut log_lo, mut log_hi) = (lo.ln(), hi.ln());
    let mut theta = weights_for(beta, hi, eta)?;
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (log_lo + log_hi);
        theta = weights_for(beta, mid.exp(), eta)?;
        let c = constraint(&theta, eta);
        if (c - 1.0).abs() <= tol * 1e-3 || log_hi - log_lo < 1e-15 {
            break;
        }
        if c > 1.0 {
            log_lo = mid;
        } else {
            log_hi = mid;
        }
    }
    let residual = (constraint(&theta, eta) - 1.0).abs();
    if residual > tol {
        return Err(MklError::Internal(format!(
            "multiplier bisection stalled with constraint residual {residual:e}"
        )));
    }
    Ok(theta)
}

/// Maximizes ⟨u, θ⟩ over the nonnegative elastic-net ball by trying every
/// support S and keeping the best nonnegative stationary point.
///
/// On a support S with η < 1, stationarity uₖ = μ(η + 2(1−η)θₖ) together with
/// the constraint gives θₖ = (t·uₖ − η)/(2(1−η)) with
/// t = sqrt((4(1−η) + |S|η²)/Σ_S uₖ²). For η = 1 the feasible set is the
/// simplex and its vertices are enumerated instead.
pub fn enlp_oracle(u: &[f64], eta: ElasticNetMix) -> Result<Vec<f64>> {
    let q = u.len();
    if q == 0 || u.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(MklError::input("u must be nonempty, finite and nonnegative"));
    }
    if u.iter().all(|&v| v == 0.0) {
        return Err(MklError::input("u must not be the zero vector"));
    }
    if q > ENLP_ORACLE_MAX_Q {
        return Err(MklError::input(format!(
            "support enumeration is limited to Q <= {ENLP_ORACLE_MAX_Q}, got {q}"
        )));
    }
    let eta = eta.get();

    if eta == 1.0 {
        let mut best = 0;
        for k in 0..q {
            if u[k] > u[best] {
                best = k;
            }
        }
        let mut theta = vec![0.0; q];
        theta[best] = 1.0;
        return Ok(theta);
    }

    let a = 2.0 * (1.0 - eta);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1u32 << q) {
        let support: Vec<usize> = (0..q).filter(|k| mask & (1 << k) != 0).collect();
        let sum_sq: f64 = support.iter().map(|&k| u[k] * u[k]).sum();
        if sum_sq == 0.0 {
            continue;
        }
        let t = ((2.0 * a + support.len() as f64 * eta * eta) / sum_sq).sqrt();
        let mut theta = vec![0.0; q];
        let mut feasible = true;
        for &k in &support {
            let v = (t * u[k] - eta) / a;
            if v < 0.0 {
                feasible = false;
                break;
            }
            theta[k] = v;
        }
        if !feasible {
            continue;
        }
        let value: f64 = theta.iter().zip(u).map(|(x, y)| x * y).sum();
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, theta));
        }
    }
    best.map(|(_, t)| t)
        .ok_or_else(|| MklError::Internal("no nonnegative stationary support found".into()))
}
