//! Kernel functions and the stack of Gram matrices shared by every solver.
//!
//! A [`GramStack`] is built once per training run and never mutated
//! afterwards. Matrices are stored dense; both triangles are filled from a
//! single kernel evaluation so every built matrix is exactly symmetric.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{MklError, Result};

const SYMMETRY_RTOL: f64 = 1e-12;
const PSD_RTOL: f64 = 1e-10;
const PSD_PROBES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    Linear,
    Polynomial { degree: u32, offset: f64 },
    Rbf { gamma: f64 },
    /// Gram matrix read from a whitespace-separated text file.
    Precomputed { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Scale the Gram matrix so that its trace equals the number of instances.
    pub normalize: bool,
}

impl KernelSpec {
    pub fn linear() -> Self {
        Self::new(KernelKind::Linear)
    }

    pub fn polynomial(degree: u32, offset: f64) -> Self {
        Self::new(KernelKind::Polynomial { degree, offset })
    }

    pub fn rbf(gamma: f64) -> Self {
        Self::new(KernelKind::Rbf { gamma })
    }

    pub fn precomputed(path: impl Into<PathBuf>) -> Self {
        Self::new(KernelKind::Precomputed { path: path.into() })
    }

    fn new(kind: KernelKind) -> Self {
        KernelSpec {
            kind,
            normalize: true,
        }
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn is_precomputed(&self) -> bool {
        matches!(self.kind, KernelKind::Precomputed { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            KernelKind::Polynomial { degree, offset } => {
                if degree < 1 {
                    return Err(MklError::input("polynomial degree must be >= 1"));
                }
                if !(offset >= 0.0 && offset.is_finite()) {
                    return Err(MklError::input(
                        "polynomial offset must be a finite nonnegative number",
                    ));
                }
            }
            KernelKind::Rbf { gamma } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(MklError::input("rbf gamma must be a finite positive number"));
                }
            }
            KernelKind::Linear | KernelKind::Precomputed { .. } => {}
        }
        Ok(())
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            KernelKind::Linear => write!(f, "linear")?,
            KernelKind::Polynomial { degree, offset } => {
                write!(f, "polynomial degree={degree} offset={offset:?}")?
            }
            KernelKind::Rbf { gamma } => write!(f, "rbf gamma={gamma:?}")?,
            KernelKind::Precomputed { path } => write!(f, "precomputed file={}", path.display())?,
        }
        write!(f, " normalize={}", self.normalize)
    }
}

impl FromStr for KernelSpec {
    type Err = String;

    /// Parses one kernel configuration line: `kind key=value ...`.
    fn from_str(line: &str) -> std::result::Result<Self, String> {
        let mut tokens = line.split_whitespace();
        let kind = tokens.next().ok_or("empty kernel line")?;

        let mut normalize = true;
        let mut gamma = None;
        let mut degree = None;
        let mut offset = None;
        let mut file = None;
        for tok in tokens {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, found '{tok}'"))?;
            let real = || {
                value
                    .parse::<f64>()
                    .map_err(|_| format!("'{key}' expects a number, found '{value}'"))
            };
            match key {
                "normalize" => {
                    normalize = value
                        .parse::<bool>()
                        .map_err(|_| format!("'normalize' expects true or false, found '{value}'"))?
                }
                "gamma" => gamma = Some(real()?),
                "offset" => offset = Some(real()?),
                "degree" => {
                    degree = Some(value.parse::<u32>().map_err(|_| {
                        format!("'degree' expects a positive integer, found '{value}'")
                    })?)
                }
                "file" => file = Some(PathBuf::from(value)),
                _ => return Err(format!("unknown key '{key}' for kernel '{kind}'")),
            }
        }

        let only = |allowed: &[&str]| -> std::result::Result<(), String> {
            let given = [
                ("gamma", gamma.is_some()),
                ("degree", degree.is_some()),
                ("offset", offset.is_some()),
                ("file", file.is_some()),
            ];
            for (name, set) in given {
                if set && !allowed.contains(&name) {
                    return Err(format!("key '{name}' does not apply to kernel '{kind}'"));
                }
            }
            Ok(())
        };

        let kind = match kind {
            "linear" => {
                only(&[])?;
                KernelKind::Linear
            }
            "polynomial" | "poly" => {
                only(&["degree", "offset"])?;
                KernelKind::Polynomial {
                    degree: degree.ok_or("polynomial kernel requires degree=")?,
                    offset: offset.unwrap_or(0.0),
                }
            }
            "rbf" => {
                only(&["gamma"])?;
                KernelKind::Rbf {
                    gamma: gamma.ok_or("rbf kernel requires gamma=")?,
                }
            }
            "precomputed" => {
                only(&["file"])?;
                KernelKind::Precomputed {
                    path: file.ok_or("precomputed kernel requires file=")?,
                }
            }
            other => return Err(format!("unknown kernel kind '{other}'")),
        };
        let spec = KernelSpec { kind, normalize };
        spec.validate().map_err(|e| match e {
            MklError::Input(msg) => msg,
            other => other.to_string(),
        })?;
        Ok(spec)
    }
}

/// Parses a kernel configuration: one kernel per line, `#` starts a comment.
pub fn parse_kernel_config(text: &str) -> Result<Vec<KernelSpec>> {
    let mut specs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        specs.push(line.parse().map_err(|msg| MklError::parse(idx + 1, msg))?);
    }
    if specs.is_empty() {
        return Err(MklError::input("kernel configuration lists no kernels"));
    }
    Ok(specs)
}

/// Reads a kernel configuration file. Relative `file=` paths of precomputed
/// kernels are resolved against the directory holding the configuration.
pub fn load_kernel_config(path: &Path) -> Result<Vec<KernelSpec>> {
    let text = fs::read_to_string(path).map_err(|e| MklError::from(e).with_path(path))?;
    let mut specs = parse_kernel_config(&text).map_err(|e| e.with_path(path))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    for spec in &mut specs {
        if let KernelKind::Precomputed { path: p } = &mut spec.kind {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
    Ok(specs)
}

/// Parses a square matrix: whitespace-separated reals, one row per line.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| MklError::parse(idx + 1, format!("not a number: '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(MklError::parse(
                    idx + 1,
                    format!("expected {} columns, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(MklError::input("matrix file is empty"));
    }
    if rows[0].len() != n {
        return Err(MklError::input(format!(
            "matrix must be square, found {} rows and {} columns",
            n,
            rows[0].len()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| MklError::from(e).with_path(path))?;
    parse_matrix(&text).map_err(|e| e.with_path(path))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Evaluates a kernel on two feature vectors.
pub fn eval_kernel(spec: &KernelSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(MklError::input(format!(
            "feature dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let value = match spec.kind {
        KernelKind::Linear => dot(a, b),
        KernelKind::Polynomial { degree, offset } => {
            (dot(a, b) + offset).powi(degree as i32)
        }
        KernelKind::Rbf { gamma } => {
            let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            (-gamma * sq).exp()
        }
        KernelKind::Precomputed { .. } => {
            return Err(MklError::input(
                "precomputed kernels cannot be evaluated on feature vectors",
            ))
        }
    };
    Ok(value)
}

/// Immutable training input: Q symmetric PSD Gram matrices over N instances
/// plus the ±1 labels.
#[derive(Debug, Clone)]
pub struct GramStack {
    mats: Vec<DMatrix<f64>>,
    labels: Vec<f64>,
    scales: Vec<f64>,
}

impl GramStack {
    /// Wraps already computed Gram matrices. Each must be square N×N,
    /// symmetric to 1e-12 relative and pass the PSD spot check. The stored
    /// copy is exactly symmetric.
    pub fn from_matrices(mats: Vec<DMatrix<f64>>, labels: Vec<f64>) -> Result<Self> {
        let q = mats.len();
        Self::with_scales(mats, labels, vec![1.0; q])
    }

    fn with_scales(mats: Vec<DMatrix<f64>>, labels: Vec<f64>, scales: Vec<f64>) -> Result<Self> {
        if mats.is_empty() {
            return Err(MklError::input("at least one kernel is required"));
        }
        let n = labels.len();
        if n == 0 {
            return Err(MklError::input("empty dataset"));
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(MklError::input(format!("labels must be -1 or +1, found {bad}")));
        }
        let mut checked = Vec::with_capacity(mats.len());
        for (k, g) in mats.into_iter().enumerate() {
            if g.nrows() != n || g.ncols() != n {
                return Err(MklError::input(format!(
                    "Gram matrix {} is {}x{}, expected {n}x{n}",
                    k + 1,
                    g.nrows(),
                    g.ncols()
                )));
            }
            checked.push(check_gram(g).map_err(|e| match e {
                MklError::Numeric(msg) => MklError::numeric(format!("Gram matrix {}: {msg}", k + 1)),
                other => other,
            })?);
        }
        Ok(GramStack {
            mats: checked,
            labels,
            scales,
        })
    }

    pub fn num_kernels(&self) -> usize {
        self.mats.len()
    }

    pub fn num_instances(&self) -> usize {
        self.labels.len()
    }

    pub fn mats(&self) -> &[DMatrix<f64>] {
        &self.mats
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Multiplicative factor applied to each raw kernel (1 when not normalized).
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }
}

fn check_gram(mut g: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    if g.iter().any(|v| !v.is_finite()) {
        return Err(MklError::numeric("non-finite entry"));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (g[(i, j)], g[(j, i)]);
            if (a - b).abs() > SYMMETRY_RTOL * a.abs().max(b.abs()) {
                return Err(MklError::numeric(format!(
                    "not symmetric at ({}, {}): {a} vs {b}",
                    i + 1,
                    j + 1
                )));
            }
            let mid = 0.5 * (a + b);
            g[(i, j)] = mid;
            g[(j, i)] = mid;
        }
    }
    psd_spot_check(&g)?;
    Ok(g)
}

/// Random quadratic-form probes: vᵀGv ≥ −1e-10·‖v‖²·‖G‖_F.
fn psd_spot_check(g: &DMatrix<f64>) -> Result<()> {
    let n = g.nrows();
    let norm = g.norm();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f6a_4d00);
    for _ in 0..PSD_PROBES {
        let v = nalgebra::DVector::<f64>::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let form = v.dot(&(g * &v));
        if form < -PSD_RTOL * v.norm_squared() * norm {
            return Err(MklError::numeric(format!(
                "not positive semidefinite (quadratic form {form:.3e})"
            )));
        }
    }
    Ok(())
}

fn raw_gram(spec: &KernelSpec, data: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = data.len();
    if let KernelKind::Precomputed { path } = &spec.kind {
        let g = read_matrix(path)?;
        if g.nrows() != n {
            return Err(MklError::input(format!(
                "precomputed kernel {} is {}x{} but the dataset has {n} instances",
                path.display(),
                g.nrows(),
                g.ncols()
            )));
        }
        return Ok(g);
    }
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = eval_kernel(spec, &data[i], &data[j])?;
            if !v.is_finite() {
                return Err(MklError::numeric(format!(
                    "kernel '{spec}' is not finite at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// Trace normalization factor N / tr(G).
fn unit_trace_scale(g: &DMatrix<f64>) -> Result<f64> {
    let trace = g.trace();
    if !(trace > 0.0 && trace.is_finite()) {
        return Err(MklError::numeric(format!(
            "cannot normalize a Gram matrix with trace {trace}"
        )));
    }
    Ok(g.nrows() as f64 / trace)
}

/// Evaluates every kernel on every pair of instances.
///
/// Kernels are built in parallel; the result does not depend on scheduling.
pub fn build_gram_stack(
    data: &[Vec<f64>],
    labels: &[f64],
    specs: &[KernelSpec],
) -> Result<GramStack> {
    if data.is_empty() {
        return Err(MklError::input("empty dataset"));
    }
    if labels.len() != data.len() {
        return Err(MklError::input(format!(
            "{} labels for {} instances",
            labels.len(),
            data.len()
        )));
    }
    if specs.is_empty() {
        return Err(MklError::input("at least one kernel is required"));
    }
    let dim = data[0].len();
    if data.iter().any(|x| x.len() != dim) {
        return Err(MklError::input("feature vectors differ in dimension"));
    }
    for spec in specs {
        spec.validate()?;
    }

    let built: Vec<(DMatrix<f64>, f64)> = specs
        .par_iter()
        .map(|spec| {
            let mut g = raw_gram(spec, data)?;
            let scale = if spec.normalize {
                let s = unit_trace_scale(&g)?;
                g *= s;
                s
            } else {
                1.0
            };
            Ok((g, scale))
        })
        .collect::<Result<_>>()?;
    let (mats, scales) = built.into_iter().unzip();
    GramStack::with_scales(mats, labels.to_vec(), scales)
}

/// Σ_k θ_k G_k.
pub fn composite_gram(stack: &GramStack, theta: &[f64]) -> Result<DMatrix<f64>> {
    if theta.len() != stack.num_kernels() {
        return Err(MklError::input(format!(
            "{} kernel weights for {} kernels",
            theta.len(),
            stack.num_kernels()
        )));
    }
    if theta.iter().any(|&t| !(t >= 0.0)) {
        return Err(MklError::input("kernel weights must be nonnegative"));
    }
    let n = stack.num_instances();
    let mut out = DMatrix::<f64>::zeros(n, n);
    for (g, &t) in stack.mats.iter().zip(theta) {
        if t != 0.0 {
            out += g * t;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn random_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect()
    }

    fn all_specs() -> Vec<KernelSpec> {
        vec![
            KernelSpec::linear().with_normalize(false),
            KernelSpec::polynomial(3, 1.0).with_normalize(false),
            KernelSpec::rbf(0.7).with_normalize(false),
            KernelSpec::linear(),
            KernelSpec::polynomial(2, 0.5),
            KernelSpec::rbf(2.0),
        ]
    }

    #[test]
    fn kernel_formulas() {
        let lin = KernelSpec::linear();
        assert_eq!(eval_kernel(&lin, &[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let rbf = KernelSpec::rbf(1.0);
        assert_eq!(eval_kernel(&rbf, &[0.3, -2.0], &[0.3, -2.0]).unwrap(), 1.0);
        let poly = KernelSpec::polynomial(2, 1.0);
        assert_eq!(eval_kernel(&poly, &[1.0, 0.0], &[1.0, 5.0]).unwrap(), 4.0);
    }

    #[test]
    fn kernel_dimension_mismatch() {
        let err = eval_kernel(&KernelSpec::linear(), &[1.0], &[1.0, 2.0]).unwrap_err();
        assert!(matches!(err, MklError::Input(_)));
    }

    #[test]
    fn single_point_linear() {
        let spec = KernelSpec::linear().with_normalize(false);
        let stack = build_gram_stack(&[vec![2.0]], &[1.0], &[spec]).unwrap();
        assert_eq!(stack.mats()[0][(0, 0)], 4.0);
    }

    #[test]
    fn rbf_diagonal_is_one() {
        let data = random_points(7, 3, 1);
        let labels = vec![1.0; 7];
        let stack =
            build_gram_stack(&data, &labels, &[KernelSpec::rbf(0.3).with_normalize(false)]).unwrap();
        for i in 0..7 {
            assert_eq!(stack.mats()[0][(i, i)], 1.0);
        }
    }

    // Closed-form eigenvalues of a symmetric 3x3 matrix (trigonometric method),
    // used as an independent PSD check.
    fn sym3_eigenvalues(a: &DMatrix<f64>) -> [f64; 3] {
        let p1 = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
        let q = a.trace() / 3.0;
        let p2 = (a[(0, 0)] - q).powi(2) + (a[(1, 1)] - q).powi(2) + (a[(2, 2)] - q).powi(2)
            + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        if p == 0.0 {
            return [q, q, q];
        }
        let b = (a - DMatrix::identity(3, 3) * q) / p;
        let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        [e1, 3.0 * q - e1 - e3, e3]
    }

    #[test]
    fn three_points_symmetric_psd() {
        for seed in 0..20 {
            let data = random_points(3, 2, seed);
            let stack = build_gram_stack(&data, &[1.0, -1.0, 1.0], &all_specs()).unwrap();
            for g in stack.mats() {
                assert_eq!(g, &g.transpose());
                let scale = g.abs().max().max(1.0);
                for ev in sym3_eigenvalues(g) {
                    assert!(ev >= -1e-10 * scale, "eigenvalue {ev}");
                }
            }
        }
    }

    #[test]
    fn normalization_sets_trace() {
        let data = random_points(12, 4, 3);
        let labels = vec![1.0; 12];
        let stack = build_gram_stack(&data, &labels, &all_specs()).unwrap();
        for (g, spec) in stack.mats().iter().zip(all_specs()) {
            if spec.normalize {
                assert_abs_diff_eq!(g.trace(), 12.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn composite_examples() {
        let data = random_points(5, 2, 4);
        let labels = vec![1.0; 5];
        let stack = build_gram_stack(
            &data,
            &labels,
            &[KernelSpec::linear(), KernelSpec::rbf(1.0)],
        )
        .unwrap();
        assert_eq!(composite_gram(&stack, &[1.0, 0.0]).unwrap(), stack.mats()[0]);
        assert_eq!(
            composite_gram(&stack, &[0.0, 0.0]).unwrap(),
            DMatrix::zeros(5, 5)
        );
        let avg = composite_gram(&stack, &[0.5, 0.5]).unwrap();
        let expected = (&stack.mats()[0] + &stack.mats()[1]) * 0.5;
        assert!((avg - expected).abs().max() < 1e-15);
        assert!(composite_gram(&stack, &[1.0]).is_err());
        assert!(composite_gram(&stack, &[1.0, -0.1]).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_gram_stack(&[], &[], &[KernelSpec::linear()]).is_err());
        assert!(build_gram_stack(&[vec![1.0]], &[1.0], &[]).is_err());
        let bad = KernelSpec::rbf(0.0);
        assert!(build_gram_stack(&[vec![1.0]], &[1.0], &[bad]).is_err());
        let huge = KernelSpec::polynomial(400, 1.0).with_normalize(false);
        let err = build_gram_stack(&[vec![100.0]], &[1.0], &[huge]).unwrap_err();
        assert!(matches!(err, MklError::Numeric(_)));
    }

    #[test]
    fn from_matrices_checks_psd_and_symmetry() {
        let not_psd = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(GramStack::from_matrices(vec![not_psd], vec![1.0, -1.0]).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(GramStack::from_matrices(vec![asym], vec![1.0, -1.0]).is_err());
        let ok = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!(GramStack::from_matrices(vec![ok], vec![-1.0, 1.0]).is_ok());
    }

    #[test]
    fn kernel_config_lines() {
        let specs = parse_kernel_config(
            "# kernels\nlinear normalize=false\nrbf gamma=0.5 normalize=true\n\npolynomial degree=2 offset=1\n",
        )
        .unwrap();
        assert_eq!(specs.len(), 3);
        assert_eq!(specs[0], KernelSpec::linear().with_normalize(false));
        assert_eq!(specs[1], KernelSpec::rbf(0.5));
        assert_eq!(specs[2], KernelSpec::polynomial(2, 1.0));
        for s in &specs {
            assert_eq!(&s.to_string().parse::<KernelSpec>().unwrap(), s);
        }
        let err = parse_kernel_config("linear\nrbf\n").unwrap_err();
        assert!(matches!(err, MklError::Parse { line: 2, .. }));
        assert!(parse_kernel_config("rbf gamma=-1").is_err());
        assert!(parse_kernel_config("linear gamma=1").is_err());
        assert!(parse_kernel_config("").is_err());
    }

    #[test]
    fn matrix_text() {
        let m = parse_matrix("1 0.5\n0.5 2\n").unwrap();
        assert_eq!(m[(1, 1)], 2.0);
        assert!(parse_matrix("1 2 3\n4 5 6\n").is_err());
        assert!(matches!(
            parse_matrix("1 2\nx 1\n").unwrap_err(),
            MklError::Parse { line: 2, .. }
        ));
    }

    proptest::proptest! {
        #[test]
        fn composite_is_linear(
            a in proptest::collection::vec(0.0f64..3.0, 3),
            b in proptest::collection::vec(0.0f64..3.0, 3),
            seed in 0u64..1000,
        ) {
            let data = random_points(6, 2, seed);
            let stack = build_gram_stack(
                &data,
                &[1.0; 6],
                &[KernelSpec::linear(), KernelSpec::rbf(0.5), KernelSpec::polynomial(2, 1.0)],
            ).unwrap();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let lhs = composite_gram(&stack, &sum).unwrap();
            let rhs = composite_gram(&stack, &a).unwrap() + composite_gram(&stack, &b).unwrap();
            let scale = lhs.abs().max().max(1.0);
            proptest::prop_assert!((lhs - rhs).abs().max() <= 1e-12 * scale);
        }
    }
}
