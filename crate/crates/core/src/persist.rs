//! Model and trace files.
//!
//! The model format is line oriented with named sections. Reals are written
//! in scientific notation with 17 significant digits, which reproduces every
//! f64 exactly on reading.
//!
//! ```text
//! elasticmkl-model 1
//! [params]
//! eta 5.0000000000000000e-1
//! C 1.0000000000000000e1
//! bias ...
//! gap ...
//! converged true
//! iterations 12
//! dim 2
//! [kernels]
//! <scale> <kernel line>
//! [theta]
//! <one weight per line>
//! [support]
//! <training index> <alpha*y> <feature 1> ... <feature dim>
//! [end]
//! ```

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::error::{MklError, Result};
use crate::gram::KernelSpec;
use crate::mkl::{KernelWeights, MklModel, SupportVector, TraceRecord};
use crate::wsr::ElasticNetMix;

pub const MODEL_MAGIC: &str = "elasticmkl-model";
pub const MODEL_VERSION: u32 = 1;

struct Real(f64);

impl std::fmt::Display for Real {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

pub fn write_model(model: &MklModel, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "{MODEL_MAGIC} {MODEL_VERSION}")?;
    writeln!(out, "[params]")?;
    writeln!(out, "eta {}", Real(model.eta.get()))?;
    writeln!(out, "C {}", Real(model.c))?;
    writeln!(out, "bias {}", Real(model.bias))?;
    writeln!(out, "gap {}", Real(model.gap))?;
    writeln!(out, "converged {}", model.converged)?;
    writeln!(out, "iterations {}", model.iterations)?;
    writeln!(out, "dim {}", model.dim)?;
    writeln!(out, "[kernels]")?;
    for (spec, scale) in model.kernel_specs.iter().zip(&model.kernel_scales) {
        writeln!(out, "{} {spec}", Real(*scale))?;
    }
    writeln!(out, "[theta]")?;
    for t in model.theta.as_slice() {
        writeln!(out, "{}", Real(*t))?;
    }
    writeln!(out, "[support]")?;
    for sv in &model.support {
        write!(out, "{} {}", sv.index, Real(sv.coef))?;
        for x in &sv.features {
            write!(out, " {}", Real(*x))?;
        }
        writeln!(out)?;
    }
    writeln!(out, "[end]")
}

pub fn model_to_string(model: &MklModel) -> String {
    let mut buf = Vec::new();
    write_model(model, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("model text is ASCII")
}

pub fn save_model(model: &MklModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_string(model)).map_err(|e| MklError::from(e).with_path(path))
}

pub fn load_model(path: &Path) -> Result<MklModel> {
    let text = fs::read_to_string(path).map_err(|e| MklError::from(e).with_path(path))?;
    parse_model(&text).map_err(|e| e.with_path(path))
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    Header,
    Params,
    Kernels,
    Theta,
    Support,
    End,
}

fn real(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| MklError::parse(line, format!("not a number: '{tok}'")))
}

pub fn parse_model(text: &str) -> Result<MklModel> {
    let mut section = Section::Header;
    let mut eta = None;
    let mut c = None;
    let mut bias = None;
    let mut gap = None;
    let mut converged = None;
    let mut iterations = None;
    let mut dim = None;
    let mut specs = Vec::new();
    let mut scales = Vec::new();
    let mut theta = Vec::new();
    let mut support = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if section == Section::Header {
            let mut it = line.split_whitespace();
            if it.next() != Some(MODEL_MAGIC) {
                return Err(MklError::parse(lineno, "not an elasticmkl model file"));
            }
            let version = it.next().and_then(|v| v.parse::<u32>().ok());
            if version != Some(MODEL_VERSION) {
                return Err(MklError::parse(
                    lineno,
                    format!("unsupported model format version (expected {MODEL_VERSION})"),
                ));
            }
            section = Section::Params;
            continue;
        }
        if line.starts_with('[') {
            section = match line {
                "[params]" => Section::Params,
                "[kernels]" => Section::Kernels,
                "[theta]" => Section::Theta,
                "[support]" => Section::Support,
                "[end]" => Section::End,
                other => return Err(MklError::parse(lineno, format!("unknown section {other}"))),
            };
            continue;
        }
        match section {
            Section::Header => unreachable!(),
            Section::Params => {
                let (key, value) = line
                    .split_once(' ')
                    .ok_or_else(|| MklError::parse(lineno, "expected 'key value'"))?;
                let value = value.trim();
                match key {
                    "eta" => eta = Some(real(value, lineno)?),
                    "C" => c = Some(real(value, lineno)?),
                    "bias" => bias = Some(real(value, lineno)?),
                    "gap" => gap = Some(real(value, lineno)?),
                    "converged" => {
                        converged = Some(value.parse::<bool>().map_err(|_| {
                            MklError::parse(lineno, "converged must be true or false")
                        })?)
                    }
                    "iterations" => {
                        iterations = Some(value.parse::<usize>().map_err(|_| {
                            MklError::parse(lineno, "iterations must be an integer")
                        })?)
                    }
                    "dim" => {
                        dim = Some(
                            value
                                .parse::<usize>()
                                .map_err(|_| MklError::parse(lineno, "dim must be an integer"))?,
                        )
                    }
                    other => {
                        return Err(MklError::parse(lineno, format!("unknown parameter '{other}'")))
                    }
                }
            }
            Section::Kernels => {
                let (scale, spec) = line
                    .split_once(' ')
                    .ok_or_else(|| MklError::parse(lineno, "expected '<scale> <kernel>'"))?;
                scales.push(real(scale, lineno)?);
                specs.push(
                    spec.parse::<KernelSpec>()
                        .map_err(|m| MklError::parse(lineno, m))?,
                );
            }
            Section::Theta => theta.push(real(line, lineno)?),
            Section::Support => {
                let mut it = line.split_whitespace();
                let index = it
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| MklError::parse(lineno, "expected a training index"))?;
                let coef = real(
                    it.next()
                        .ok_or_else(|| MklError::parse(lineno, "missing coefficient"))?,
                    lineno,
                )?;
                let features = it.map(|t| real(t, lineno)).collect::<Result<Vec<_>>>()?;
                support.push((lineno, SupportVector {
                    index,
                    coef,
                    features,
                }));
            }
            Section::End => {
                return Err(MklError::parse(lineno, "content after [end]"));
            }
        }
    }

    if section != Section::End {
        return Err(MklError::input("model file is truncated (missing [end])"));
    }
    let missing = |name: &str| MklError::input(format!("model file lacks '{name}'"));
    let eta = ElasticNetMix::new(eta.ok_or_else(|| missing("eta"))?)?;
    let dim = dim.ok_or_else(|| missing("dim"))?;
    if specs.is_empty() {
        return Err(missing("[kernels]"));
    }
    if theta.len() != specs.len() {
        return Err(MklError::input(format!(
            "model has {} kernels but {} weights",
            specs.len(),
            theta.len()
        )));
    }
    let support = support
        .into_iter()
        .map(|(lineno, sv)| {
            if sv.features.len() != dim {
                Err(MklError::parse(
                    lineno,
                    format!("support vector has {} features, expected {dim}", sv.features.len()),
                ))
            } else {
                Ok(sv)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(MklModel {
        kernel_specs: specs,
        kernel_scales: scales,
        eta,
        c: c.ok_or_else(|| missing("C"))?,
        theta: KernelWeights::new(theta, eta)?,
        bias: bias.ok_or_else(|| missing("bias"))?,
        gap: gap.ok_or_else(|| missing("gap"))?,
        converged: converged.ok_or_else(|| missing("converged"))?,
        iterations: iterations.ok_or_else(|| missing("iterations"))?,
        dim,
        support,
    })
}

/// Writes the per-iteration trace as CSV with a header row.
pub fn write_trace(trace: &[TraceRecord], out: &mut dyn Write) -> io::Result<()> {
    let q = trace.first().map_or(0, |r| r.theta.len());
    write!(out, "iter,upper,lower,gap")?;
    for k in 1..=q {
        write!(out, ",theta_{k}")?;
    }
    writeln!(out)?;
    for r in trace {
        write!(out, "{},{},{},{}", r.iter, r.upper, r.lower, r.gap)?;
        for t in &r.theta {
            write!(out, ",{t}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn save_trace(trace: &[TraceRecord], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_trace(trace, &mut buf)?;
    fs::write(path, buf).map_err(|e| MklError::from(e).with_path(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_model(theta: Vec<f64>, coefs: Vec<f64>, bias: f64) -> MklModel {
        let eta = ElasticNetMix::new(0.3).unwrap();
        MklModel {
            kernel_specs: vec![KernelSpec::linear(), KernelSpec::rbf(0.1 + 0.2)],
            kernel_scales: vec![0.1 + 0.023456789, 1.0],
            eta,
            c: 10.0,
            theta: KernelWeights::new(theta, eta).unwrap(),
            bias,
            gap: 3.3e-5,
            converged: true,
            iterations: 7,
            dim: 2,
            support: coefs
                .into_iter()
                .enumerate()
                .map(|(i, coef)| SupportVector {
                    index: i * 3,
                    coef,
                    features: vec![coef.sin(), 1.0 / 3.0],
                })
                .collect(),
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(
            t0 in 0.0f64..0.6,
            t1 in 0.0f64..0.6,
            coefs in proptest::collection::vec(-10.0f64..10.0, 0..6),
            bias in -5.0f64..5.0,
        ) {
            let m = sample_model(vec![t0, t1], coefs, bias);
            let text = model_to_string(&m);
            let back = parse_model(&text).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(model_to_string(&back), text);
        }
    }

    #[test]
    fn rejects_malformed() {
        let m = sample_model(vec![0.5, 0.5], vec![1.0, -1.0], 0.0);
        let text = model_to_string(&m);
        assert!(parse_model(&text.replace("elasticmkl-model 1", "something 1")).is_err());
        assert!(parse_model(&text.replace("[end]\n", "")).is_err());
        assert!(parse_model(&text.replace("eta ", "etta ")).is_err());
        let truncated: String = text.lines().filter(|l| !l.starts_with("dim")).map(|l| format!("{l}\n")).collect();
        assert!(parse_model(&truncated).is_err());
    }

    #[test]
    fn trace_csv() {
        let trace = vec![
            TraceRecord { iter: 1, upper: 2.0, lower: 1.0, gap: 1.0, theta: vec![0.5, 0.5] },
            TraceRecord { iter: 2, upper: 1.5, lower: 1.4, gap: 0.5 / 14.0, theta: vec![0.25, 0.75] },
        ];
        let mut buf = Vec::new();
        write_trace(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iter,upper,lower,gap,theta_1,theta_2");
        assert_eq!(lines[1], "1,2,1,1,0.5,0.5");
        assert_eq!(lines.len(), 3);
    }
}
