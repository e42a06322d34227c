//! Labelled datasets in LIBSVM sparse text or CSV.
//!
//! ```text
//! +1 1:0.5 3:2      # libsvm: 1-based sparse indices, densified
//! 1,0.5,2.0         # csv: label first, then features
//! ```
//!
//! Labels must be ±1; a 0/1 labelling is remapped to −1/+1 with a warning.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use log::warn;

use crate::error::{MklError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Libsvm,
    Csv,
}

impl FromStr for DataFormat {
    type Err = MklError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "libsvm" | "svmlight" => Ok(DataFormat::Libsvm),
            "csv" => Ok(DataFormat::Csv),
            other => Err(MklError::input(format!(
                "unknown data format '{other}' (expected libsvm or csv)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// Zero-pads every feature vector to `dim` columns.
    pub fn pad_to(&mut self, dim: usize) -> Result<()> {
        if dim < self.dim() {
            return Err(MklError::input(format!(
                "data has {} features, expected at most {dim}",
                self.dim()
            )));
        }
        for x in &mut self.features {
            x.resize(dim, 0.0);
        }
        Ok(())
    }
}

pub fn load_dataset(path: &Path, format: DataFormat) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| MklError::from(e).with_path(path))?;
    parse_dataset(&text, format).map_err(|e| e.with_path(path))
}

pub fn parse_dataset(text: &str, format: DataFormat) -> Result<Dataset> {
    let (features, raw_labels) = match format {
        DataFormat::Libsvm => parse_libsvm(text)?,
        DataFormat::Csv => parse_csv(text)?,
    };
    if raw_labels.is_empty() {
        return Err(MklError::input("dataset contains no instances"));
    }
    let labels = map_labels(&raw_labels)?;
    Ok(Dataset { features, labels })
}

/// Feature rows and (raw label, line number) pairs.
type Parsed = (Vec<Vec<f64>>, Vec<(f64, usize)>);

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn parse_label(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| MklError::parse(line, format!("invalid label '{tok}'")))
}

fn parse_libsvm(text: &str) -> Result<Parsed> {
    let mut sparse: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut dim = 0;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label = parse_label(tokens.next().unwrap_or(""), lineno)?;
        let mut row = Vec::new();
        let mut last = 0;
        for tok in tokens {
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| MklError::parse(lineno, format!("expected index:value, found '{tok}'")))?;
            let i: usize = i
                .parse()
                .map_err(|_| MklError::parse(lineno, format!("invalid feature index '{i}'")))?;
            if i == 0 {
                return Err(MklError::parse(lineno, "feature indices are 1-based"));
            }
            if i <= last {
                return Err(MklError::parse(lineno, "feature indices must be increasing"));
            }
            last = i;
            let v: f64 = v
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| MklError::parse(lineno, format!("invalid feature value '{v}'")))?;
            row.push((i, v));
        }
        dim = dim.max(last);
        sparse.push(row);
        labels.push((label, lineno));
    }
    let features = sparse
        .into_iter()
        .map(|row| {
            let mut x = vec![0.0; dim];
            for (i, v) in row {
                x[i - 1] = v;
            }
            x
        })
        .collect();
    Ok((features, labels))
}

fn parse_csv(text: &str) -> Result<Parsed> {
    let mut features: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut cells = line.split(',').map(str::trim);
        let label = parse_label(cells.next().unwrap_or(""), lineno)?;
        let row = cells
            .map(|c| {
                c.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| MklError::parse(lineno, format!("invalid feature value '{c}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = features.first() {
            if row.len() != first.len() {
                return Err(MklError::parse(
                    lineno,
                    format!("expected {} features, found {}", first.len(), row.len()),
                ));
            }
        }
        features.push(row);
        labels.push((label, lineno));
    }
    Ok((features, labels))
}

fn map_labels(raw: &[(f64, usize)]) -> Result<Vec<f64>> {
    let pm_one = raw.iter().all(|(v, _)| *v == 1.0 || *v == -1.0);
    if pm_one {
        return Ok(raw.iter().map(|(v, _)| *v).collect());
    }
    let zero_one = raw.iter().all(|(v, _)| *v == 0.0 || *v == 1.0);
    if zero_one {
        warn!("labels are 0/1; mapping 0 to -1");
        return Ok(raw
            .iter()
            .map(|(v, _)| if *v == 0.0 { -1.0 } else { 1.0 })
            .collect());
    }
    let (bad, line) = raw
        .iter()
        .find(|(v, _)| *v != 1.0 && *v != -1.0 && *v != 0.0)
        .or_else(|| raw.iter().find(|(v, _)| *v == 0.0))
        .copied()
        .unwrap_or((f64::NAN, 0));
    Err(MklError::input(format!(
        "labels must be binary (-1/+1 or 0/1); line {line} has label {bad}"
    )))
}

/// Reads a vector of reals separated by whitespace, commas or newlines.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        for tok in strip_comment(raw)
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
        {
            out.push(
                tok.parse::<f64>()
                    .map_err(|_| MklError::parse(idx + 1, format!("not a number: '{tok}'")))?,
            );
        }
    }
    if out.is_empty() {
        return Err(MklError::input("vector file is empty"));
    }
    Ok(out)
}

pub fn load_vector(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| MklError::from(e).with_path(path))?;
    parse_vector(&text).map_err(|e| e.with_path(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn libsvm_line() {
        let d = parse_dataset("+1 1:0.5 3:2\n", DataFormat::Libsvm).unwrap();
        assert_eq!(d.labels, vec![1.0]);
        assert_eq!(d.features, vec![vec![0.5, 0.0, 2.0]]);
    }

    #[test]
    fn libsvm_densifies_to_widest_row() {
        let d = parse_dataset("-1 2:1\n\n# comment\n1 4:3 # tail\n", DataFormat::Libsvm).unwrap();
        assert_eq!(d.features, vec![vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 3.0]]);
        assert_eq!(d.labels, vec![-1.0, 1.0]);
    }

    #[test]
    fn csv_line() {
        let d = parse_dataset("1,0.5,2.0\n", DataFormat::Csv).unwrap();
        assert_eq!(d.labels, vec![1.0]);
        assert_eq!(d.features, vec![vec![0.5, 2.0]]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_dataset("banana 1:1\n", DataFormat::Libsvm).unwrap_err();
        assert!(matches!(err, MklError::Parse { line: 1, .. }), "{err}");
        let err = parse_dataset("1 1:1\n-1 0:2\n", DataFormat::Libsvm).unwrap_err();
        assert!(matches!(err, MklError::Parse { line: 2, .. }));
        let err = parse_dataset("1 1:x\n", DataFormat::Libsvm).unwrap_err();
        assert!(matches!(err, MklError::Parse { line: 1, .. }));
        let err = parse_dataset("1,2\n-1,2,3\n", DataFormat::Csv).unwrap_err();
        assert!(matches!(err, MklError::Parse { line: 2, .. }));
    }

    #[test]
    fn empty_file() {
        assert!(matches!(
            parse_dataset("\n# nothing\n", DataFormat::Libsvm),
            Err(MklError::Input(_))
        ));
        assert!(parse_dataset("", DataFormat::Csv).is_err());
    }

    #[test]
    fn label_mapping() {
        let d = parse_dataset("0,1\n1,2\n", DataFormat::Csv).unwrap();
        assert_eq!(d.labels, vec![-1.0, 1.0]);
        assert!(parse_dataset("2,1\n1,2\n", DataFormat::Csv).is_err());
        assert!(parse_dataset("0,1\n-1,2\n", DataFormat::Csv).is_err());
    }

    #[test]
    fn padding() {
        let mut d = parse_dataset("1 1:1\n", DataFormat::Libsvm).unwrap();
        d.pad_to(3).unwrap();
        assert_eq!(d.features[0], vec![1.0, 0.0, 0.0]);
        assert!(d.pad_to(2).is_err());
    }

    #[test]
    fn vectors() {
        assert_eq!(parse_vector("1 4\n2.5,3\n").unwrap(), vec![1.0, 4.0, 2.5, 3.0]);
        assert!(parse_vector("").is_err());
        assert!(parse_vector("1 x").is_err());
    }
}
