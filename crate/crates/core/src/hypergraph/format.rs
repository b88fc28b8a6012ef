//! Sectioned line-based text format:
//!
//! ```text
//! n=3 alpha=1.0000000000000000e0
//! [A2]
//! 0 1 1
//! ...
//! [B1]
//! ...
//! [B3]
//! ...
//! ```
//!
//! Numbers are written with 17 significant digits so that a write/read cycle
//! is exact. Blank lines and lines starting with `#` are ignored on input.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::{Hypergraph2, PairwiseMatrix, TwoInteractionTensor, ALPHA_REL_TOL};
use crate::error::{Error, Result};

pub fn to_text(h: &Hypergraph2) -> String {
    let mut out = String::new();
    let alpha = match h.alpha() {
        Some(a) => format!("{a:.16e}"),
        None => "none".into(),
    };
    writeln!(out, "n={} alpha={}", h.n(), alpha).unwrap();
    write_section(&mut out, "A2", h.a2().matrix());
    for (i, b) in h.a3().slices().iter().enumerate() {
        write_section(&mut out, &format!("B{}", i + 1), b);
    }
    out
}

fn write_section(out: &mut String, name: &str, m: &DMatrix<f64>) {
    writeln!(out, "[{name}]").unwrap();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", cells.join(" ")).unwrap();
    }
}

/// Parses and validates a hypergraph. A declared `alpha` must agree with the
/// ratio observed in the data.
pub fn from_text(text: &str) -> Result<Hypergraph2> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, header) = lines.next().ok_or(Error::Format {
        line: 0,
        message: "empty input".into(),
    })?;
    let (n, declared) = parse_header(line, header)?;
    if n < 2 {
        return Err(Error::TooFewNodes { n });
    }

    let mut read_section = |name: &str| -> Result<DMatrix<f64>> {
        let (line, tag) = lines.next().ok_or(Error::Format {
            line: 0,
            message: format!("missing section [{name}]"),
        })?;
        if tag != format!("[{name}]") {
            return Err(Error::Format {
                line,
                message: format!("expected [{name}], found '{tag}'"),
            });
        }
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let (line, row) = lines.next().ok_or(Error::Format {
                line: 0,
                message: format!("section [{name}] ends after {i} rows, expected {n}"),
            })?;
            let values = row
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| Error::Format {
                        line,
                        message: format!("invalid number '{tok}'"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != n {
                return Err(Error::Format {
                    line,
                    message: format!("expected {n} values, found {}", values.len()),
                });
            }
            for (j, v) in values.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    };

    let a2 = read_section("A2")?;
    let slices = (1..=n)
        .map(|i| read_section(&format!("B{i}")))
        .collect::<Result<Vec<_>>>()?;
    if let Some((line, extra)) = lines.next() {
        return Err(Error::Format {
            line,
            message: format!("unexpected trailing content '{extra}'"),
        });
    }

    let mut h = Hypergraph2::build(PairwiseMatrix::new(a2)?, TwoInteractionTensor::new(slices)?)?;
    if let Some(declared) = declared {
        match h.alpha() {
            Some(found) if (found - declared).abs() <= ALPHA_REL_TOL * declared.abs().max(1.0) => {
                h.set_alpha(Some(declared))
            }
            Some(found) => {
                return Err(Error::AlphaMismatch {
                    declared,
                    found: format!("has ratio {found}"),
                })
            }
            None => {
                return Err(Error::AlphaMismatch {
                    declared,
                    found: "is not proportional".into(),
                })
            }
        }
    }
    Ok(h)
}

/// Reads only the structural data and reports every assumption separately.
pub fn validate_text(text: &str) -> Result<super::ValidationReport> {
    // Parse the numbers without validating them, then run the report.
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut sections: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut header_seen = false;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if !header_seen {
            parse_header(line, l)?;
            header_seen = true;
            continue;
        }
        if l.starts_with('[') {
            if !sections.is_empty() || !rows.is_empty() {
                sections.push(std::mem::take(&mut rows));
            }
            continue;
        }
        rows.push(
            l.split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| Error::Format {
                        line,
                        message: format!("invalid number '{tok}'"),
                    })
                })
                .collect::<Result<_>>()?,
        );
    }
    sections.push(rows);
    let mut mats = sections
        .iter()
        .map(|s| super::matrix_from_rows(s, "section"))
        .collect::<Result<Vec<_>>>()?;
    if mats.is_empty() {
        return Err(Error::Format {
            line: 0,
            message: "no [A2] section".into(),
        });
    }
    let a2 = mats.remove(0);
    Ok(super::validate(&a2, &mats))
}

fn parse_header(line: usize, header: &str) -> Result<(usize, Option<f64>)> {
    let mut n = None;
    let mut alpha = None;
    let mut alpha_seen = false;
    for field in header.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or(Error::Format {
            line,
            message: format!("malformed header field '{field}'"),
        })?;
        match key {
            "n" => {
                n = Some(value.parse::<usize>().map_err(|_| Error::Format {
                    line,
                    message: format!("invalid node count '{value}'"),
                })?)
            }
            "alpha" => {
                alpha_seen = true;
                if value != "none" {
                    let a = value.parse::<f64>().map_err(|_| Error::Format {
                        line,
                        message: format!("invalid alpha '{value}'"),
                    })?;
                    if !(a >= 0.0 && a.is_finite()) {
                        return Err(Error::Format {
                            line,
                            message: "alpha must be finite and nonnegative".into(),
                        });
                    }
                    alpha = Some(a);
                }
            }
            _ => {
                return Err(Error::Format {
                    line,
                    message: format!("unknown header key '{key}'"),
                })
            }
        }
    }
    match (n, alpha_seen) {
        (Some(n), true) => Ok((n, alpha)),
        _ => Err(Error::Format {
            line,
            message: "header must be 'n=<int> alpha=<float|none>'".into(),
        }),
    }
}
