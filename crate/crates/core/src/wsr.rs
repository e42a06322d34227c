//! Weighted sum of reciprocals under an elastic-net constraint.
//!
//! Minimizes Σ βₖ/θₖ over θ ⪰ 0 with η‖θ‖₁ + (1−η)‖θ‖₂² ≤ 1, for β ≻ 0.
//!
//! The constraint is absorbed by the homogeneous norm
//!
//! ```text
//! s(x) = (η/2)‖x‖₁ + sqrt((η²/4)‖x‖₁² + (1−η)‖x‖₂²)
//! ```
//!
//! so that θ = x/s(x) always sits on the constraint surface, and the product
//! P(x) = s(x)·r(x) with r(x) = Σ βᵢ/xᵢ is minimized over the open positive
//! orthant. P is pseudoconvex and constant along rays.
//!
//! The main iteration is the fixed-point map xᵢ ← sqrt(βᵢ/qᵢ) with q = ∇s(x).
//! Every step produces a point z with r(z)² ≤ P(x*) ≤ P(z), which yields the
//! stopping rule s(z)/r(z) − 1 < ε: it certifies P(z) ≤ (1+ε)·P(x*).
//!
//! A second map, xᵢ ← (xᵢβᵢ/qᵢ)^(1/3), shares the fixed point and converges
//! slightly faster for small η. [`WsrStrategy::Alternating`] interleaves the
//! two; the certificate is only evaluated after a main step, because the
//! lower bound r² ≤ P(x*) is a property of the main map.

use std::fmt;
use std::str::FromStr;

use crate::error::{MklError, Result};

/// Elastic-net mixing parameter η ∈ [0, 1]: 1 is the lasso (L1) constraint,
/// 0 the ridge (L2 ball) constraint.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ElasticNetMix(f64);

impl ElasticNetMix {
    pub fn new(eta: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&eta) {
            Ok(ElasticNetMix(eta))
        } else {
            Err(MklError::input(format!(
                "eta must satisfy 0 <= eta <= 1 (η ∈ [0,1]), got {eta}"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// η‖θ‖₁ + (1−η)‖θ‖₂².
    pub fn constraint_value(self, theta: &[f64]) -> f64 {
        let l1: f64 = theta.iter().map(|t| t.abs()).sum();
        let l2sq: f64 = theta.iter().map(|t| t * t).sum();
        self.0 * l1 + (1.0 - self.0) * l2sq
    }
}

impl TryFrom<f64> for ElasticNetMix {
    type Error = MklError;

    fn try_from(eta: f64) -> Result<Self> {
        ElasticNetMix::new(eta)
    }
}

impl fmt::Display for ElasticNetMix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsrStrategy {
    /// Square-root map only.
    Main,
    /// Cube-root map and square-root map in turn, starting with the cube root.
    Alternating,
}

impl FromStr for WsrStrategy {
    type Err = MklError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "main" => Ok(WsrStrategy::Main),
            "alternating" => Ok(WsrStrategy::Alternating),
            other => Err(MklError::input(format!(
                "unknown strategy '{other}' (expected main or alternating)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WsrConfig {
    pub eps_wsr: f64,
    pub max_iters: usize,
    pub strategy: WsrStrategy,
}

/// η below which the alternating strategy is chosen by default.
pub const ALTERNATING_BELOW_ETA: f64 = 0.25;

impl WsrConfig {
    /// Default tolerances with the strategy picked from η.
    pub fn for_eta(eta: ElasticNetMix) -> Self {
        let strategy = if eta.get() < ALTERNATING_BELOW_ETA {
            WsrStrategy::Alternating
        } else {
            WsrStrategy::Main
        };
        WsrConfig {
            eps_wsr: 1e-9,
            max_iters: 10_000,
            strategy,
        }
    }

    pub fn with_strategy(mut self, strategy: WsrStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_eps(mut self, eps_wsr: f64) -> Self {
        self.eps_wsr = eps_wsr;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps_wsr > 0.0) {
            return Err(MklError::input("eps_wsr must be positive"));
        }
        if self.max_iters == 0 {
            return Err(MklError::input("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Partial sums shared by s(x) and ∇s(x): (‖x‖₁, ρ) with
/// ρ = sqrt((η/2)²‖x‖₁² + (1−η)‖x‖₂²).
fn norm_parts(x: &[f64], eta: f64) -> (f64, f64) {
    let n1: f64 = x.iter().map(|v| v.abs()).sum();
    let n2sq: f64 = x.iter().map(|v| v * v).sum();
    let half = 0.5 * eta;
    let rho = (half * half * n1 * n1 + (1.0 - eta) * n2sq).sqrt();
    (n1, rho)
}

/// The rescaling norm s(x); x/s(x) satisfies the constraint with equality.
pub fn scaling_norm(x: &[f64], eta: ElasticNetMix) -> Result<f64> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(MklError::numeric("non-finite component"));
    }
    let (n1, rho) = norm_parts(x, eta.get());
    let s = 0.5 * eta.get() * n1 + rho;
    if s == 0.0 {
        return Err(MklError::input("s(x) vanishes at x = 0; rescaling is undefined"));
    }
    Ok(s)
}

fn grad_from_parts(x: &[f64], eta: f64, n1: f64, rho: f64) -> Vec<f64> {
    let half = 0.5 * eta;
    x.iter()
        .map(|&xi| half + (half * half * n1 + (1.0 - eta) * xi) / rho)
        .collect()
}

/// ∇s(x) on the nonnegative orthant.
pub fn scaling_grad(x: &[f64], eta: ElasticNetMix) -> Result<Vec<f64>> {
    if x.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(MklError::input("gradient requires a finite nonnegative vector"));
    }
    let (n1, rho) = norm_parts(x, eta.get());
    if rho == 0.0 {
        return Err(MklError::input("gradient of s is undefined at x = 0"));
    }
    Ok(grad_from_parts(x, eta.get(), n1, rho))
}

/// An iterate of the reciprocal-sum solver with its cached quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct WsrState {
    pub x: Vec<f64>,
    /// s(x).
    pub s_val: f64,
    /// r(x) = Σ βᵢ/xᵢ.
    pub r_val: f64,
    /// ∇s(x).
    pub q: Vec<f64>,
    pub iter: usize,
    eta: ElasticNetMix,
}

impl WsrState {
    pub fn new(x: Vec<f64>, beta: &[f64], eta: ElasticNetMix) -> Result<Self> {
        check_beta(beta)?;
        if x.len() != beta.len() {
            return Err(MklError::input(format!(
                "iterate has {} entries but beta has {}",
                x.len(),
                beta.len()
            )));
        }
        if x.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(MklError::input("iterate must be strictly positive"));
        }
        Ok(Self::evaluate(x, beta, eta, 0))
    }

    fn evaluate(x: Vec<f64>, beta: &[f64], eta: ElasticNetMix, iter: usize) -> Self {
        let e = eta.get();
        let (n1, rho) = norm_parts(&x, e);
        let s_val = 0.5 * e * n1 + rho;
        let r_val = beta.iter().zip(&x).map(|(b, xi)| b / xi).sum();
        let q = grad_from_parts(&x, e, n1, rho);
        WsrState {
            x,
            s_val,
            r_val,
            q,
            iter,
            eta,
        }
    }

    pub fn eta(&self) -> ElasticNetMix {
        self.eta
    }

    /// P(x) = s(x)·r(x); invariant under positive scaling of x.
    pub fn product(&self) -> f64 {
        self.s_val * self.r_val
    }

    /// ζ(x) = r(x)² + s(x)², strictly decreasing along the main map away
    /// from the fixed point.
    pub fn zeta(&self) -> f64 {
        self.r_val * self.r_val + self.s_val * self.s_val
    }

    /// s/r − 1. After a main step this bounds the relative suboptimality of P.
    pub fn certificate(&self) -> f64 {
        self.s_val / self.r_val - 1.0
    }

    /// The point on the constraint surface, x/s(x).
    pub fn theta(&self) -> Vec<f64> {
        self.x.iter().map(|v| v / self.s_val).collect()
    }
}

fn check_beta(beta: &[f64]) -> Result<()> {
    if beta.is_empty() {
        return Err(MklError::input("beta is empty"));
    }
    if beta.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return Err(MklError::input(
            "beta must be strictly positive and finite in every component",
        ));
    }
    Ok(())
}

fn check_step_args(state: &WsrState, beta: &[f64]) -> Result<()> {
    check_beta(beta)?;
    if beta.len() != state.x.len() {
        return Err(MklError::input("beta and iterate differ in length"));
    }
    Ok(())
}

/// Main map: xᵢ ← sqrt(βᵢ/qᵢ).
pub fn wsr_step(state: &WsrState, beta: &[f64]) -> Result<WsrState> {
    check_step_args(state, beta)?;
    let x = beta
        .iter()
        .zip(&state.q)
        .map(|(b, q)| (b / q).sqrt())
        .collect();
    Ok(WsrState::evaluate(x, beta, state.eta, state.iter + 1))
}

/// Cube-root map: xᵢ ← (xᵢβᵢ/qᵢ)^(1/3).
pub fn wsr_step_alt(state: &WsrState, beta: &[f64]) -> Result<WsrState> {
    check_step_args(state, beta)?;
    let x = beta
        .iter()
        .zip(&state.q)
        .zip(&state.x)
        .map(|((b, q), xi)| (xi * b / q).cbrt())
        .collect();
    Ok(WsrState::evaluate(x, beta, state.eta, state.iter + 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WsrSolution {
    /// Minimizer on the constraint surface, strictly positive.
    pub theta: Vec<f64>,
    /// Σ βₖ/θₖ at `theta`.
    pub objective: f64,
    /// s/r − 1 at the returned iterate.
    pub certificate: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Lifts nonpositive warm-start components to 1e-12·max(x0).
fn sanitize_start(x0: &[f64]) -> Result<Vec<f64>> {
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(MklError::input("starting point has non-finite components"));
    }
    let top = x0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return Err(MklError::input("starting point has no positive component"));
    }
    let floor = 1e-12 * top;
    Ok(x0.iter().map(|&v| if v > 0.0 { v } else { floor }).collect())
}

pub fn wsr_solve(
    beta: &[f64],
    x0: &[f64],
    eta: ElasticNetMix,
    cfg: &WsrConfig,
) -> Result<WsrSolution> {
    wsr_solve_observed(beta, x0, eta, cfg, &mut |_| {})
}

/// As [`wsr_solve`], reporting every iterate (the start included) to
/// `observer`.
pub fn wsr_solve_observed(
    beta: &[f64],
    x0: &[f64],
    eta: ElasticNetMix,
    cfg: &WsrConfig,
    observer: &mut dyn FnMut(&WsrState),
) -> Result<WsrSolution> {
    cfg.validate()?;
    check_beta(beta)?;
    if x0.len() != beta.len() {
        return Err(MklError::input(format!(
            "starting point has {} entries but beta has {}",
            x0.len(),
            beta.len()
        )));
    }
    let mut state = WsrState::new(sanitize_start(x0)?, beta, eta)?;
    observer(&state);

    let mut last_was_main = false;
    let mut converged = false;
    for pass in 0..cfg.max_iters {
        if last_was_main && state.certificate() < cfg.eps_wsr {
            converged = true;
            break;
        }
        let use_main = match cfg.strategy {
            WsrStrategy::Main => true,
            WsrStrategy::Alternating => pass % 2 == 1,
        };
        state = if use_main {
            wsr_step(&state, beta)?
        } else {
            wsr_step_alt(&state, beta)?
        };
        last_was_main = use_main;
        observer(&state);
    }
    if !converged && last_was_main && state.certificate() < cfg.eps_wsr {
        converged = true;
    }

    let theta = state.theta();
    if theta.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(MklError::numeric("reciprocal-sum iterate left the positive orthant"));
    }
    let objective = beta.iter().zip(&theta).map(|(b, t)| b / t).sum();
    Ok(WsrSolution {
        theta,
        objective,
        certificate: state.certificate(),
        iterations: state.iter,
        converged,
    })
}
