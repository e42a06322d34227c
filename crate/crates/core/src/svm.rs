//! Soft-margin SVM dual for a fixed Gram matrix.
//!
//! Solves
//!
//! ```text
//! maximize   1ᵀα − ½ (α∘y)ᵀ G (α∘y)
//! subject to yᵀα = 0,  0 ≤ α ≤ C
//! ```
//!
//! by SMO with the maximal-violating-pair working set. Ties are broken by
//! the lowest index so that runs are reproducible.

use nalgebra::DMatrix;

use crate::error::{MklError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    /// Hinge-loss penalty.
    pub c: f64,
    /// Stop when the maximal violating pair gap falls to this value.
    pub tol: f64,
    /// Upper bound on the number of pair updates.
    pub max_updates: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            tol: 1e-6,
            max_updates: 100_000,
        }
    }
}

impl SvmParams {
    pub fn new(c: f64) -> Self {
        SvmParams {
            c,
            ..Default::default()
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmSolution {
    pub alpha: Vec<f64>,
    /// Offset subtracted in the decision function Σ αᵢyᵢK(xᵢ,x) − b.
    pub bias: f64,
    pub dual_objective: f64,
    /// Maximal violating pair gap at the returned point.
    pub kkt_residual: f64,
    pub updates: usize,
    pub converged: bool,
    /// Set when all labels belong to one class; α is then zero and the bias
    /// makes the decision function return the majority label.
    pub degenerate: bool,
}

/// 1ᵀα − ½(α∘y)ᵀG(α∘y).
pub fn dual_objective(g: &DMatrix<f64>, y: &[f64], alpha: &[f64]) -> f64 {
    let v: Vec<f64> = alpha.iter().zip(y).map(|(a, y)| a * y).collect();
    let quad = quadratic_form(g, &v);
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Primal value ½‖f‖² + C Σ hinge for the classifier defined by α and b.
pub fn primal_objective(g: &DMatrix<f64>, y: &[f64], c: f64, alpha: &[f64], bias: f64) -> f64 {
    let n = y.len();
    let v: Vec<f64> = alpha.iter().zip(y).map(|(a, y)| a * y).collect();
    let mut reg = 0.0;
    let mut hinge = 0.0;
    for i in 0..n {
        let fi: f64 = (0..n).map(|j| g[(i, j)] * v[j]).sum();
        reg += v[i] * fi;
        hinge += (1.0 - y[i] * (fi - bias)).max(0.0);
    }
    0.5 * reg + c * hinge
}

pub(crate) fn quadratic_form(g: &DMatrix<f64>, v: &[f64]) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for i in 0..n {
        if v[i] == 0.0 {
            continue;
        }
        let row: f64 = (0..n).map(|j| g[(i, j)] * v[j]).sum();
        acc += v[i] * row;
    }
    acc
}

pub fn solve_svm(
    g: &DMatrix<f64>,
    y: &[f64],
    params: &SvmParams,
    warm_start: Option<&[f64]>,
) -> Result<SvmSolution> {
    solve_svm_observed(g, y, params, warm_start, &mut |_| {})
}

/// As [`solve_svm`], calling `observer` with the dual objective after every
/// pair update.
pub fn solve_svm_observed(
    g: &DMatrix<f64>,
    y: &[f64],
    params: &SvmParams,
    warm_start: Option<&[f64]>,
    observer: &mut dyn FnMut(f64),
) -> Result<SvmSolution> {
    let n = y.len();
    validate(g, y, params)?;

    let positives = y.iter().filter(|&&v| v > 0.0).count();
    if positives == 0 || positives == n {
        let majority = if positives == n { 1.0 } else { -1.0 };
        return Ok(SvmSolution {
            alpha: vec![0.0; n],
            bias: -majority,
            dual_objective: 0.0,
            kkt_residual: 0.0,
            updates: 0,
            converged: true,
            degenerate: true,
        });
    }

    let c = params.c;
    let mut alpha = initial_point(y, c, warm_start)?;

    let q = |i: usize, j: usize| y[i] * y[j] * g[(i, j)];
    // Gradient of ½αᵀQα − 1ᵀα.
    let mut grad: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| q(i, j) * alpha[j]).sum::<f64>() - 1.0)
        .collect();
    let mut dual = dual_objective(g, y, &alpha);

    let mut updates = 0;
    let mut gap;
    loop {
        let (i, j, m_up, m_low) = select_pair(&alpha, &grad, y, c);
        gap = m_up - m_low;
        if gap <= params.tol || i.is_none() || updates >= params.max_updates {
            break;
        }
        let (i, j) = (i.unwrap(), j.unwrap());

        let (old_i, old_j) = (alpha[i], alpha[j]);
        update_pair(&mut alpha, &grad, y, c, i, j, q(i, i), q(j, j), q(i, j));
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        if di == 0.0 && dj == 0.0 {
            // Numerically stalled; no progress is possible on this pair.
            break;
        }

        let df = grad[i] * di
            + grad[j] * dj
            + 0.5 * (q(i, i) * di * di + q(j, j) * dj * dj + 2.0 * q(i, j) * di * dj);
        dual -= df;
        for (t, gt) in grad.iter_mut().enumerate() {
            *gt += q(t, i) * di + q(t, j) * dj;
        }
        updates += 1;
        observer(dual);
    }

    let bias = compute_bias(&alpha, &grad, y, c);
    let kkt_residual = gap.max(0.0);
    Ok(SvmSolution {
        dual_objective: dual_objective(g, y, &alpha),
        alpha,
        bias,
        kkt_residual,
        updates,
        converged: kkt_residual <= params.tol,
        degenerate: false,
    })
}

fn validate(g: &DMatrix<f64>, y: &[f64], params: &SvmParams) -> Result<()> {
    let n = y.len();
    if n == 0 {
        return Err(MklError::input("empty training set"));
    }
    if g.nrows() != n || g.ncols() != n {
        return Err(MklError::input(format!(
            "Gram matrix is {}x{} but there are {n} labels",
            g.nrows(),
            g.ncols()
        )));
    }
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(MklError::input("C must be a finite positive number"));
    }
    if !(params.tol > 0.0) {
        return Err(MklError::input("SVM tolerance must be positive"));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(MklError::numeric("Gram matrix has non-finite entries"));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(MklError::input("labels must be -1 or +1"));
    }
    Ok(())
}

/// Warm start clipped to the box; falls back to zero when clipping breaks
/// the equality constraint.
fn initial_point(y: &[f64], c: f64, warm_start: Option<&[f64]>) -> Result<Vec<f64>> {
    let n = y.len();
    let Some(w) = warm_start else {
        return Ok(vec![0.0; n]);
    };
    if w.len() != n {
        return Err(MklError::input(format!(
            "warm start has {} entries, expected {n}",
            w.len()
        )));
    }
    let clipped: Vec<f64> = w
        .iter()
        .map(|&a| if a.is_finite() { a.clamp(0.0, c) } else { 0.0 })
        .collect();
    let residual: f64 = clipped.iter().zip(y).map(|(a, y)| a * y).sum();
    if residual.abs() > 1e-10 * c * n as f64 {
        return Ok(vec![0.0; n]);
    }
    Ok(clipped)
}

fn in_up(a: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && a < c) || (y < 0.0 && a > 0.0)
}

fn in_low(a: f64, y: f64, c: f64) -> bool {
    (y < 0.0 && a < c) || (y > 0.0 && a > 0.0)
}

/// Maximal violating pair: i maximizes −yₜ∇fₜ over I_up, j minimizes it
/// over I_low.
fn select_pair(
    alpha: &[f64],
    grad: &[f64],
    y: &[f64],
    c: f64,
) -> (Option<usize>, Option<usize>, f64, f64) {
    let mut best_up = f64::NEG_INFINITY;
    let mut best_low = f64::INFINITY;
    let mut i_sel = None;
    let mut j_sel = None;
    for t in 0..alpha.len() {
        let v = -y[t] * grad[t];
        if in_up(alpha[t], y[t], c) && v > best_up {
            best_up = v;
            i_sel = Some(t);
        }
        if in_low(alpha[t], y[t], c) && v < best_low {
            best_low = v;
            j_sel = Some(t);
        }
    }
    (i_sel, j_sel, best_up, best_low)
}

const TAU: f64 = 1e-12;

/// Analytic two-variable update, clipped to the box along yᵢαᵢ + yⱼαⱼ = const.
#[allow(clippy::too_many_arguments)]
fn update_pair(
    alpha: &mut [f64],
    grad: &[f64],
    y: &[f64],
    c: f64,
    i: usize,
    j: usize,
    qii: f64,
    qjj: f64,
    qij: f64,
) {
    let (mut ai, mut aj) = (alpha[i], alpha[j]);
    if y[i] != y[j] {
        let mut quad = qii + qjj + 2.0 * qij;
        if quad <= 0.0 {
            quad = TAU;
        }
        let delta = (-grad[i] - grad[j]) / quad;
        let diff = ai - aj;
        ai += delta;
        aj += delta;
        if diff > 0.0 {
            if aj < 0.0 {
                aj = 0.0;
                ai = diff;
            }
        } else if ai < 0.0 {
            ai = 0.0;
            aj = -diff;
        }
        if diff > 0.0 {
            if ai > c {
                ai = c;
                aj = c - diff;
            }
        } else if aj > c {
            aj = c;
            ai = c + diff;
        }
    } else {
        let mut quad = qii + qjj - 2.0 * qij;
        if quad <= 0.0 {
            quad = TAU;
        }
        let delta = (grad[i] - grad[j]) / quad;
        let sum = ai + aj;
        ai -= delta;
        aj += delta;
        if sum > c {
            if ai > c {
                ai = c;
                aj = sum - c;
            }
        } else if aj < 0.0 {
            aj = 0.0;
            ai = sum;
        }
        if sum > c {
            if aj > c {
                aj = c;
                ai = sum - c;
            }
        } else if ai < 0.0 {
            ai = 0.0;
            aj = sum;
        }
    }
    alpha[i] = ai;
    alpha[j] = aj;
}

/// Average of yᵢ∇fᵢ over free vectors, or the midpoint of the interval
/// allowed by the bounded ones.
fn compute_bias(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free = 0usize;
    let mut sum_free = 0.0;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else {
        0.5 * (ub + lb)
    }
}
