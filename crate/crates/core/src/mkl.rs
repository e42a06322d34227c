//! Two-step block coordinate descent for elastic-net constrained MKL.
//!
//! Each outer iteration solves the SVM dual on the composite kernel
//! Σ θₖGₖ, then recomputes the kernel weights from the per-kernel norms
//! βₖ = θₖ²·uₖ with uₖ = (α∘y)ᵀGₖ(α∘y). The loop stops once the current
//! objective and the lower bound obtained from the elastic-net LP agree to
//! a relative gap of `eps_mkl`.

use log::warn;

use crate::enlp::enlp_solve;
use crate::error::{MklError, Result};
use crate::gram::{build_gram_stack, composite_gram, eval_kernel, GramStack, KernelSpec};
use crate::svm::{quadratic_form, solve_svm, SvmParams};
use crate::wsr::{scaling_norm, wsr_solve, ElasticNetMix, WsrConfig};

/// Relative threshold under which a per-kernel norm βₖ counts as zero.
pub const BETA_PRUNE_RTOL: f64 = 1e-14;

/// Nonnegative kernel weights inside the elastic-net ball.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWeights(Vec<f64>);

impl KernelWeights {
    /// Accepts θ ⪰ 0 with η‖θ‖₁ + (1−η)‖θ‖₂² ≤ 1 + 1e-10.
    pub fn new(theta: Vec<f64>, eta: ElasticNetMix) -> Result<Self> {
        if theta.is_empty() {
            return Err(MklError::input("kernel weights are empty"));
        }
        if theta.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(MklError::input("kernel weights must be finite and nonnegative"));
        }
        let c = eta.constraint_value(&theta);
        if c > 1.0 + 1e-10 {
            return Err(MklError::input(format!(
                "kernel weights violate the elastic-net constraint (value {c})"
            )));
        }
        Ok(KernelWeights(theta))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MklConfig {
    /// Hinge-loss penalty.
    pub c: f64,
    pub eta: ElasticNetMix,
    /// Relative duality gap at which training stops.
    pub eps_mkl: f64,
    pub max_outer_iters: usize,
    pub svm_tol: f64,
    pub wsr: WsrConfig,
}

impl MklConfig {
    pub fn new(eta: ElasticNetMix) -> Self {
        MklConfig {
            c: 1.0,
            eta,
            eps_mkl: 1e-4,
            max_outer_iters: 200,
            svm_tol: 1e-6,
            wsr: WsrConfig::for_eta(eta),
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_eps_mkl(mut self, eps: f64) -> Self {
        self.eps_mkl = eps;
        self
    }

    pub fn with_svm_tol(mut self, tol: f64) -> Self {
        self.svm_tol = tol;
        self
    }

    pub fn with_max_outer_iters(mut self, n: usize) -> Self {
        self.max_outer_iters = n;
        self
    }

    pub fn with_wsr(mut self, wsr: WsrConfig) -> Self {
        self.wsr = wsr;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(MklError::input("C must be a finite positive number"));
        }
        if !(self.eps_mkl > 0.0) {
            return Err(MklError::input("eps_mkl must be positive"));
        }
        if !(self.svm_tol > 0.0) {
            return Err(MklError::input("svm_tol must be positive"));
        }
        if self.max_outer_iters == 0 {
            return Err(MklError::input("max_outer_iters must be at least 1"));
        }
        if self.svm_tol > self.eps_mkl / 10.0 {
            warn!(
                "svm_tol = {} exceeds eps_mkl/10 = {}; the duality gap may be unreliable",
                self.svm_tol,
                self.eps_mkl / 10.0
            );
        }
        Ok(())
    }
}

/// One row of the convergence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    /// Current objective (SVM dual value at θ).
    pub upper: f64,
    /// Lower bound on the optimal objective.
    pub lower: f64,
    pub gap: f64,
    /// Weights used for this iteration's SVM solve.
    pub theta: Vec<f64>,
}

/// Outcome of [`train`].
#[derive(Debug, Clone, PartialEq)]
pub struct MklFit {
    pub theta: KernelWeights,
    pub alpha: Vec<f64>,
    pub bias: f64,
    /// Final gap: relative when the lower bound is positive, else absolute.
    pub gap: f64,
    pub converged: bool,
    pub iterations: usize,
    pub trace: Vec<TraceRecord>,
}

impl MklFit {
    /// Objective at the returned point.
    pub fn objective(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.upper)
    }
}

/// θ = 1/s(1): uniform weights on the constraint surface.
pub fn init_theta(q: usize, eta: ElasticNetMix) -> Result<KernelWeights> {
    if q == 0 {
        return Err(MklError::input("at least one kernel is required"));
    }
    let ones = vec![1.0; q];
    let s = scaling_norm(&ones, eta)?;
    KernelWeights::new(vec![1.0 / s; q], eta)
}

/// uₖ = (α∘y)ᵀGₖ(α∘y) for every kernel.
pub fn compute_u(stack: &GramStack, alpha: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = stack.num_instances();
    if alpha.len() != n || y.len() != n {
        return Err(MklError::input(format!(
            "expected {n} multipliers and labels, got {} and {}",
            alpha.len(),
            y.len()
        )));
    }
    let v: Vec<f64> = alpha.iter().zip(y).map(|(a, y)| a * y).collect();
    let v_sq: f64 = v.iter().map(|x| x * x).sum();
    stack
        .mats()
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let u = quadratic_form(g, &v);
            if u >= 0.0 {
                return Ok(u);
            }
            let noise = 1e-10 * v_sq.max(1.0) * g.abs().max().max(1.0);
            if u >= -noise {
                Ok(0.0)
            } else {
                Err(MklError::numeric(format!(
                    "kernel {} yields a negative quadratic form {u:e}; Gram matrix is not PSD",
                    k + 1
                )))
            }
        })
        .collect()
}

/// (current objective, lower bound) = (1ᵀα − ½⟨u,θ⟩, 1ᵀα − ½⟨u,θ̌⟩).
pub fn objective_and_bound(alpha: &[f64], u: &[f64], theta: &[f64], theta_check: &[f64]) -> (f64, f64) {
    let sum_alpha: f64 = alpha.iter().sum();
    let dot = |w: &[f64]| u.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
    (
        sum_alpha - 0.5 * dot(theta),
        sum_alpha - 0.5 * dot(theta_check),
    )
}

/// Relative gap when the bound is positive, otherwise absolute gap against
/// eps·max(1, |upper|). Returns (gap, converged).
fn gap_test(upper: f64, lower: f64, eps: f64) -> (f64, bool) {
    if lower > 0.0 {
        let gap = upper / lower - 1.0;
        (gap, gap < eps)
    } else {
        let gap = upper - lower;
        (gap, gap < eps * upper.abs().max(1.0))
    }
}

/// New weights from βₖ = θₖ²uₖ. Kernels with negligible β are set to zero
/// and the reciprocal sum is solved on the rest.
fn update_weights(theta: &[f64], u: &[f64], cfg: &MklConfig) -> Result<Vec<f64>> {
    let beta: Vec<f64> = theta.iter().zip(u).map(|(t, u)| t * t * u).collect();
    let top = beta.iter().cloned().fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(MklError::numeric(
            "every kernel has zero norm; the SVM solution is trivial",
        ));
    }
    let active: Vec<usize> = (0..beta.len())
        .filter(|&k| beta[k] > BETA_PRUNE_RTOL * top)
        .collect();
    let sub_beta: Vec<f64> = active.iter().map(|&k| beta[k]).collect();
    let sub_start: Vec<f64> = active.iter().map(|&k| theta[k]).collect();
    let sol = wsr_solve(&sub_beta, &sub_start, cfg.eta, &cfg.wsr)?;
    if !sol.converged {
        warn!(
            "kernel-weight solve stopped after {} iterations with certificate {:e}",
            sol.iterations, sol.certificate
        );
    }
    let mut next = vec![0.0; theta.len()];
    for (&k, t) in active.iter().zip(sol.theta) {
        next[k] = t;
    }
    Ok(next)
}

/// Runs the alternating SVM / kernel-weight optimization on a Gram stack.
pub fn train(stack: &GramStack, cfg: &MklConfig) -> Result<MklFit> {
    cfg.validate()?;
    let y = stack.labels();
    let positives = y.iter().filter(|&&v| v > 0.0).count();
    if positives == 0 || positives == y.len() {
        return Err(MklError::input(
            "training labels must contain both classes (+1 and -1)",
        ));
    }

    let params = SvmParams {
        c: cfg.c,
        tol: cfg.svm_tol,
        ..SvmParams::default()
    };
    let mut theta = init_theta(stack.num_kernels(), cfg.eta)?.into_vec();
    let mut alpha: Option<Vec<f64>> = None;
    let mut trace = Vec::new();

    for iter in 1..=cfg.max_outer_iters {
        let g = composite_gram(stack, &theta)?;
        let sol = solve_svm(&g, y, &params, alpha.as_deref())?;
        if !sol.converged {
            warn!(
                "SVM solve in outer iteration {iter} stopped with KKT residual {:e}",
                sol.kkt_residual
            );
        }
        let u = compute_u(stack, &sol.alpha, y)?;
        if u.iter().all(|&v| v == 0.0) {
            return Err(MklError::numeric(
                "all kernel norms vanish; cannot form the elastic-net bound",
            ));
        }
        let theta_check = enlp_solve(&u, cfg.eta)?;
        let (upper, lower) = objective_and_bound(&sol.alpha, &u, &theta, &theta_check);
        let (gap, done) = gap_test(upper, lower, cfg.eps_mkl);
        trace.push(TraceRecord {
            iter,
            upper,
            lower,
            gap,
            theta: theta.clone(),
        });

        if done || iter == cfg.max_outer_iters {
            return Ok(MklFit {
                theta: KernelWeights::new(theta, cfg.eta)?,
                alpha: sol.alpha,
                bias: sol.bias,
                gap,
                converged: done,
                iterations: iter,
                trace,
            });
        }

        theta = update_weights(&theta, &u, cfg)?;
        alpha = Some(sol.alpha);
    }
    unreachable!("max_outer_iters >= 1 is validated")
}

/// A support vector: its training index, αᵢyᵢ and its features.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportVector {
    pub index: usize,
    pub coef: f64,
    pub features: Vec<f64>,
}

/// Trained classifier, self-contained for prediction and persistence.
#[derive(Debug, Clone, PartialEq)]
pub struct MklModel {
    pub kernel_specs: Vec<KernelSpec>,
    /// Normalization factor applied to each raw kernel.
    pub kernel_scales: Vec<f64>,
    pub eta: ElasticNetMix,
    pub c: f64,
    pub theta: KernelWeights,
    pub bias: f64,
    pub gap: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Feature dimension of the training data.
    pub dim: usize,
    pub support: Vec<SupportVector>,
}

impl MklModel {
    /// Packages a fit with the kernels and training features it came from.
    pub fn from_fit(
        fit: &MklFit,
        specs: &[KernelSpec],
        stack: &GramStack,
        features: &[Vec<f64>],
        cfg: &MklConfig,
    ) -> Result<Self> {
        if specs.len() != stack.num_kernels() {
            return Err(MklError::input("kernel specs do not match the Gram stack"));
        }
        if features.len() != stack.num_instances() {
            return Err(MklError::input("features do not match the Gram stack"));
        }
        let y = stack.labels();
        let support = fit
            .alpha
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0.0)
            .map(|(i, &a)| SupportVector {
                index: i,
                coef: a * y[i],
                features: features[i].clone(),
            })
            .collect();
        Ok(MklModel {
            kernel_specs: specs.to_vec(),
            kernel_scales: stack.scales().to_vec(),
            eta: cfg.eta,
            c: cfg.c,
            theta: fit.theta.clone(),
            bias: fit.bias,
            gap: fit.gap,
            converged: fit.converged,
            iterations: fit.iterations,
            dim: features.first().map_or(0, |x| x.len()),
            support,
        })
    }

    pub fn num_kernels(&self) -> usize {
        self.kernel_specs.len()
    }

    pub fn uses_precomputed(&self) -> bool {
        self.kernel_specs.iter().any(KernelSpec::is_precomputed)
    }

    /// Raw kernel evaluations K_k(svₛ, x) for every kernel and support vector.
    pub fn kernel_rows(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if self.uses_precomputed() {
            return Err(MklError::input(
                "model uses precomputed kernels; predictions need kernel rows, not features",
            ));
        }
        if x.len() != self.dim {
            return Err(MklError::input(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.dim
            )));
        }
        self.kernel_specs
            .iter()
            .map(|spec| {
                self.support
                    .iter()
                    .map(|sv| eval_kernel(spec, &sv.features, x))
                    .collect()
            })
            .collect()
    }

    pub fn predict_features(&self, x: &[f64]) -> Result<f64> {
        predict(self, &self.kernel_rows(x)?)
    }
}

/// Σₛ coefₛ Σₖ θₖ·scaleₖ·rows[k][s] − b.
pub fn decision_value(model: &MklModel, kernel_rows: &[Vec<f64>]) -> Result<f64> {
    if kernel_rows.len() != model.num_kernels() {
        return Err(MklError::input(format!(
            "{} kernel rows for {} kernels",
            kernel_rows.len(),
            model.num_kernels()
        )));
    }
    let mut value = 0.0;
    for ((row, &t), &scale) in kernel_rows
        .iter()
        .zip(model.theta.as_slice())
        .zip(&model.kernel_scales)
    {
        if row.len() != model.support.len() {
            return Err(MklError::input(format!(
                "kernel row has {} entries for {} support vectors",
                row.len(),
                model.support.len()
            )));
        }
        let w = t * scale;
        if w == 0.0 {
            continue;
        }
        let s: f64 = row.iter().zip(&model.support).map(|(k, sv)| k * sv.coef).sum();
        value += w * s;
    }
    Ok(value - model.bias)
}

/// Predicted label in {−1, +1}; a zero decision value maps to +1.
pub fn predict(model: &MklModel, kernel_rows: &[Vec<f64>]) -> Result<f64> {
    let v = decision_value(model, kernel_rows)?;
    Ok(if v >= 0.0 { 1.0 } else { -1.0 })
}

/// Builds the Gram stack, trains, and packages the model.
pub fn train_model(
    features: &[Vec<f64>],
    labels: &[f64],
    specs: &[KernelSpec],
    cfg: &MklConfig,
) -> Result<(MklModel, MklFit)> {
    let stack = build_gram_stack(features, labels, specs)?;
    let fit = train(&stack, cfg)?;
    let model = MklModel::from_fit(&fit, specs, &stack, features, cfg)?;
    Ok((model, fit))
}
