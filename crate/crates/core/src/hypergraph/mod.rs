//! Order-2 hypernetworks: a pairwise adjacency matrix `A2` plus one
//! 2-interaction slice `B_i = A3(i, :, :)` per node.
//!
//! All indices reported in errors are 1-based.

mod format;
mod generate;

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use format::{from_text, to_text, validate_text};
pub use generate::{random_instance, GenerationConfig, MAX_ATTEMPTS};

/// Relative tolerance used to detect proportional influence.
pub const ALPHA_REL_TOL: f64 = 1e-10;

/// Relative tolerance on `|m_ij - m_ji|` for symmetry checks.
const SYMMETRY_REL_TOL: f64 = 1e-12;

/// Symmetric, irreducible, zero-diagonal, nonnegative pairwise weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix(DMatrix<f64>);

impl PairwiseMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        check_pairwise(&entries)?;
        Ok(Self(entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows, "A2")?)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn row_sums(&self) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.0.row_iter().map(|r| r.sum()))
    }
}

/// The `n` slices `B_i` of the 2-interaction tensor; `[B_i]_jk = a3_ijk`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoInteractionTensor(Vec<DMatrix<f64>>);

impl TwoInteractionTensor {
    pub fn new(slices: Vec<DMatrix<f64>>) -> Result<Self> {
        check_tensor(&slices)?;
        Ok(Self(slices))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![DMatrix::zeros(n, n); n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn slices(&self) -> &[DMatrix<f64>] {
        &self.0
    }

    pub fn slice(&self, i: usize) -> &DMatrix<f64> {
        &self.0[i]
    }

    /// Total weight `1^T B_i 1` of every slice.
    pub fn slice_sums(&self) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.0.iter().map(|b| b.sum()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|b| b.iter().all(|&v| v == 0.0))
    }

    /// Multiplies every 2-interaction weight by `factor` (must be nonnegative).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "factor",
                value: factor,
                reason: "must be finite and nonnegative",
            });
        }
        Ok(Self(self.0.iter().map(|b| b * factor).collect()))
    }
}

/// A validated order-2 hypernetwork with its generalized degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph2 {
    a2: PairwiseMatrix,
    a3: TwoInteractionTensor,
    degrees: DVector<f64>,
    alpha: Option<f64>,
}

impl Hypergraph2 {
    /// Assembles a hypergraph, computing degrees and detecting proportional
    /// influence.
    pub fn build(a2: PairwiseMatrix, a3: TwoInteractionTensor) -> Result<Self> {
        let n = a2.n();
        if n < 2 {
            return Err(Error::TooFewNodes { n });
        }
        if a3.n() != n {
            return Err(Error::Dimension {
                what: "2-interaction tensor".into(),
                expected: n,
                found: a3.n(),
            });
        }
        let degrees = compute_degrees(&a2, &a3)?;
        let alpha = detect_alpha(&a2, &a3);
        Ok(Self {
            a2,
            a3,
            degrees,
            alpha,
        })
    }

    /// Pairwise-only hypergraph (`A3 = 0`).
    pub fn pairwise(a2: PairwiseMatrix) -> Result<Self> {
        let n = a2.n();
        Self::build(a2, TwoInteractionTensor::zeros(n))
    }

    pub fn n(&self) -> usize {
        self.a2.n()
    }

    pub fn a2(&self) -> &PairwiseMatrix {
        &self.a2
    }

    pub fn a3(&self) -> &TwoInteractionTensor {
        &self.a3
    }

    pub fn degrees(&self) -> &DVector<f64> {
        &self.degrees
    }

    /// Proportional-influence ratio, when every node shares it.
    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    /// Same pairwise structure with the 2-interactions multiplied by `factor`.
    pub fn with_scaled_interactions(&self, factor: f64) -> Result<Self> {
        Self::build(self.a2.clone(), self.a3.scaled(factor)?)
    }

    /// Same pairwise structure with all 2-interactions removed.
    pub fn without_interactions(&self) -> Self {
        Self::pairwise(self.a2.clone()).expect("pairwise part was already validated")
    }

    pub(crate) fn set_alpha(&mut self, alpha: Option<f64>) {
        self.alpha = alpha;
    }
}

/// Generalized degrees `delta_i = sum_j a2_ij + sum_jk [B_i]_jk`.
pub fn compute_degrees(a2: &PairwiseMatrix, a3: &TwoInteractionTensor) -> Result<DVector<f64>> {
    let degrees = a2.row_sums() + a3.slice_sums();
    if let Some(node) = degrees.iter().position(|&d| d <= 0.0) {
        return Err(Error::ZeroDegree { node: node + 1 });
    }
    Ok(degrees)
}

fn detect_alpha(a2: &PairwiseMatrix, a3: &TwoInteractionTensor) -> Option<f64> {
    let ratios: Vec<f64> = a3
        .slice_sums()
        .iter()
        .zip(a2.row_sums().iter())
        .map(|(b, a)| b / a)
        .collect();
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        return Some(0.0);
    }
    if max - min <= ALPHA_REL_TOL * max {
        Some(ratios.iter().sum::<f64>() / ratios.len() as f64)
    } else {
        None
    }
}

/// One line of a structural validation report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub assumption: &'static str,
    pub passed: bool,
    pub detail: Option<String>,
}

/// Outcome of checking every structural assumption independently.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub alpha: Option<f64>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Checks each assumption separately so that a report lists every violation
/// rather than the first one.
pub fn validate(a2: &DMatrix<f64>, slices: &[DMatrix<f64>]) -> ValidationReport {
    let mut checks = Vec::new();
    fn push(checks: &mut Vec<Check>, assumption: &'static str, result: Result<()>) {
        checks.push(Check {
            assumption,
            passed: result.is_ok(),
            detail: result.err().map(|e| e.to_string()),
        })
    }
    let n = a2.nrows();
    let dims_ok = a2.is_square()
        && n >= 2
        && slices.len() == n
        && slices.iter().all(|b| b.nrows() == n && b.ncols() == n);
    push(
        &mut checks,
        "dimensions",
        if dims_ok {
            Ok(())
        } else if n < 2 {
            Err(Error::TooFewNodes { n })
        } else {
            Err(Error::Dimension {
                what: "adjacency data".into(),
                expected: n,
                found: slices.len(),
            })
        },
    );
    if !dims_ok {
        return ValidationReport {
            checks,
            alpha: None,
        };
    }
    push(&mut checks, "A2 nonnegative", check_entries(a2, "A2"));
    push(&mut checks, "A2 symmetric", check_symmetric(a2, "A2"));
    push(
        &mut checks,
        "A2 null diagonal",
        check_zero_diagonal(a2, "A2"),
    );
    push(&mut checks, "A2 irreducible", check_connected(a2));
    let per_slice = |f: &dyn Fn(usize, &DMatrix<f64>) -> Result<()>| {
        slices.iter().enumerate().try_for_each(|(i, b)| f(i, b))
    };
    push(
        &mut checks,
        "B_i nonnegative",
        per_slice(&|i, b| check_entries(b, &slice_name(i))),
    );
    push(
        &mut checks,
        "B_i symmetric (undirected edges)",
        per_slice(&|i, b| check_symmetric(b, &slice_name(i))),
    );
    push(
        &mut checks,
        "B_i no self-loops",
        per_slice(&|i, b| check_slice_loops(i, b)),
    );
    let mut alpha = None;
    if checks.iter().all(|c| c.passed) {
        let built = PairwiseMatrix::new(a2.clone()).and_then(|p| {
            let t = TwoInteractionTensor::new(slices.to_vec())?;
            Hypergraph2::build(p, t)
        });
        match built {
            Ok(h) => {
                alpha = h.alpha();
                push(&mut checks, "positive degrees", Ok(()));
            }
            Err(e) => push(&mut checks, "positive degrees", Err(e)),
        }
    }
    ValidationReport { checks, alpha }
}

fn slice_name(i: usize) -> String {
    format!("B{}", i + 1)
}

fn check_pairwise(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension {
            what: "A2 columns".into(),
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.nrows() < 2 {
        return Err(Error::TooFewNodes { n: m.nrows() });
    }
    check_entries(m, "A2")?;
    check_symmetric(m, "A2")?;
    check_zero_diagonal(m, "A2")?;
    check_connected(m)
}

fn check_tensor(slices: &[DMatrix<f64>]) -> Result<()> {
    let n = slices.len();
    for (i, b) in slices.iter().enumerate() {
        if b.nrows() != n || b.ncols() != n {
            return Err(Error::Dimension {
                what: slice_name(i),
                expected: n,
                found: if b.nrows() != n { b.nrows() } else { b.ncols() },
            });
        }
        let name = slice_name(i);
        check_entries(b, &name)?;
        check_symmetric(b, &name)?;
        check_slice_loops(i, b)?;
    }
    Ok(())
}

fn check_entries(m: &DMatrix<f64>, name: &str) -> Result<()> {
    for ((i, j), &v) in indexed(m) {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                matrix: name.into(),
                i: i + 1,
                j: j + 1,
            });
        }
        if v < 0.0 {
            return Err(Error::NegativeWeight {
                matrix: name.into(),
                i: i + 1,
                j: j + 1,
                value: v,
            });
        }
    }
    Ok(())
}

fn check_symmetric(m: &DMatrix<f64>, name: &str) -> Result<()> {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if (a - b).abs() > SYMMETRY_REL_TOL * a.abs().max(b.abs()) {
                return Err(Error::Asymmetry {
                    matrix: name.into(),
                    i: i + 1,
                    j: j + 1,
                });
            }
        }
    }
    Ok(())
}

fn check_zero_diagonal(m: &DMatrix<f64>, name: &str) -> Result<()> {
    match (0..m.nrows()).find(|&i| m[(i, i)] != 0.0) {
        Some(i) => Err(Error::SelfLoop {
            matrix: name.into(),
            i: i + 1,
            j: i + 1,
        }),
        None => Ok(()),
    }
}

/// Row/column `i` of `B_i` vanish and no hyperedge repeats an agent.
fn check_slice_loops(i: usize, b: &DMatrix<f64>) -> Result<()> {
    let n = b.nrows();
    for k in 0..n {
        for (r, c) in [(i, k), (k, i), (k, k)] {
            if b[(r, c)] != 0.0 {
                return Err(Error::SelfLoop {
                    matrix: slice_name(i),
                    i: r + 1,
                    j: c + 1,
                });
            }
        }
    }
    Ok(())
}

fn check_connected(m: &DMatrix<f64>) -> Result<()> {
    let reached = reachable_from(m, 0);
    match reached.iter().position(|&r| !r) {
        Some(node) => Err(Error::Disconnected { node: node + 1 }),
        None => Ok(()),
    }
}

/// Breadth-first search over the support `m_ij > 0`.
pub(crate) fn reachable_from(m: &DMatrix<f64>, start: usize) -> Vec<bool> {
    let n = m.nrows();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if !seen[v] && m[(u, v)] > 0.0 {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

pub(crate) fn is_connected(m: &DMatrix<f64>) -> bool {
    reachable_from(m, 0).into_iter().all(|r| r)
}

fn indexed(m: &DMatrix<f64>) -> impl Iterator<Item = ((usize, usize), &f64)> {
    let n = m.nrows();
    m.iter().enumerate().map(move |(k, v)| ((k % n, k / n), v))
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::Dimension {
            what: format!("{what} row length"),
            expected: n,
            found: r.len(),
        });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}
