//! Equilibrium search and classification.

mod normal_form;
mod scalar;

use std::cmp::Ordering;
use std::fmt::{self, Write as _};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{SystemInstance, BLOW_UP_GUARD};
use crate::error::{Error, Result};
use crate::spectra::general_eigenvalues;

pub use normal_form::{normal_form_coeffs, NormalForm};
pub use scalar::{consensus_roots, g_eval, pi1_star, FoldPoint, ScalarReduced, EPS_MAX};

/// Residual below which a Newton iterate is accepted as an equilibrium.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Eigenvalue margin separating stable/unstable from marginal.
pub const STABILITY_MARGIN: f64 = 1e-8;
/// L-infinity distance under which two equilibria are the same point.
pub const DEDUP_TOL: f64 = 1e-6;
/// Newton stops once its step falls below this (relative to `max(1, |x|)`).
pub const STEP_TOL: f64 = 1e-12;
/// Spread under which a state counts as lying on the consensus line.
pub const CONSENSUS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Stable,
    Unstable,
    Marginal,
}

impl Classification {
    pub fn from_max_real(max_real: f64) -> Self {
        if max_real < -STABILITY_MARGIN {
            Self::Stable
        } else if max_real > STABILITY_MARGIN {
            Self::Unstable
        } else {
            Self::Marginal
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Stable => "stable",
            Self::Unstable => "unstable",
            Self::Marginal => "marginal",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub state: DVector<f64>,
    pub pi: f64,
    pub residual: f64,
    pub classification: Classification,
    pub max_real_eig: f64,
    pub is_consensus: bool,
}

impl Equilibrium {
    pub fn norm_inf(&self) -> f64 {
        self.state.amax()
    }

    pub fn is_stable(&self) -> bool {
        self.classification == Classification::Stable
    }

    /// Common value of a consensus state (mean of the entries).
    pub fn mean(&self) -> f64 {
        self.state.mean()
    }
}

/// Stability of `x` from the spectrum of the Jacobian there.
pub fn classify(s: &SystemInstance, x: DVector<f64>) -> Result<Equilibrium> {
    let residual = s.field_unchecked(&x).amax();
    let max_real_eig = general_eigenvalues(&s.jacobian_unchecked(&x))?.max_real();
    let spread = x.max() - x.min();
    Ok(Equilibrium {
        classification: Classification::from_max_real(max_real_eig),
        is_consensus: spread < CONSENSUS_TOL,
        pi: s.pi(),
        residual,
        max_real_eig,
        state: x,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: RESIDUAL_TOL,
            max_halvings: 30,
        }
    }
}

/// Damped Newton on the vector field; returns the converged state and its
/// residual without classifying it.
pub fn newton_solve(
    s: &SystemInstance,
    x0: &DVector<f64>,
    opts: &NewtonOptions,
) -> Result<(DVector<f64>, f64)> {
    if x0.len() != s.n() {
        return Err(Error::Dimension {
            what: "seed".into(),
            expected: s.n(),
            found: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NewtonDivergence {
            iterations: 0,
            residual: f64::NAN,
        });
    }
    let mut x = x0.clone();
    let mut f = s.field_unchecked(&x);
    let mut last_step = f64::INFINITY;
    for iteration in 0..=opts.max_iter {
        let residual = f.amax();
        // A small residual alone is not enough near a degenerate equilibrium,
        // where the field is flat and iterates crawl; the step must vanish too.
        let settled = last_step <= STEP_TOL * x.amax().max(1.0);
        if residual == 0.0 || (residual < opts.tol && settled) {
            return Ok((x, residual));
        }
        if iteration == opts.max_iter {
            break;
        }
        let lu = s.jacobian_unchecked(&x).lu();
        let diag = lu.u().diagonal().map(f64::abs);
        let ratio = diag.min() / diag.max();
        let step = if ratio > 1e-14 {
            lu.solve(&(-&f))
        } else {
            None
        };
        let Some(step) = step else {
            if residual < opts.tol {
                return Ok((x, residual));
            }
            return Err(Error::SingularJacobian { ratio });
        };
        let merit = f.norm();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = &x + &step * lambda;
            let f_trial = s.field_unchecked(&trial);
            if f_trial.norm() < merit || (residual < opts.tol && f_trial.amax() < opts.tol) {
                accepted = Some((trial, f_trial));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((next, f_next)) => {
                if next
                    .iter()
                    .any(|v| !v.is_finite() || v.abs() > BLOW_UP_GUARD)
                {
                    return Err(Error::NewtonDivergence {
                        iterations: iteration + 1,
                        residual: f_next.amax(),
                    });
                }
                last_step = (&next - &x).amax();
                x = next;
                f = f_next;
            }
            None if residual < opts.tol => return Ok((x, residual)),
            None => {
                return Err(Error::NewtonDivergence {
                    iterations: iteration + 1,
                    residual,
                })
            }
        }
    }
    let residual = f.amax();
    if residual < opts.tol {
        return Ok((x, residual));
    }
    Err(Error::NewtonDivergence {
        iterations: opts.max_iter,
        residual,
    })
}

/// Damped Newton from `x0` followed by spectral classification.
pub fn newton_find(s: &SystemInstance, x0: &DVector<f64>) -> Result<Equilibrium> {
    let (x, _) = newton_solve(s, x0, &NewtonOptions::default())?;
    classify(s, x)
}

/// Seeds for [`find_all`]: the consensus grid `{c 1 : c in +-linspace(0, R, m)}`
/// plus `random` uniform draws from `[-R, R]^n`, with `R = pi + 1` unless
/// `radius` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSpec {
    pub grid_points: usize,
    pub random: usize,
    pub seed: u64,
    pub radius: Option<f64>,
}

impl Default for SeedSpec {
    fn default() -> Self {
        Self {
            grid_points: 21,
            random: 20,
            seed: 0,
            radius: None,
        }
    }
}

impl SeedSpec {
    pub fn seeds(&self, n: usize, pi: f64) -> Vec<DVector<f64>> {
        let radius = self.radius.unwrap_or(pi + 1.0);
        let m = self.grid_points.max(1);
        let mut seeds = vec![DVector::zeros(n)];
        for k in 1..m {
            let c = if m == 1 {
                0.0
            } else {
                radius * k as f64 / (m - 1) as f64
            };
            seeds.push(DVector::from_element(n, c));
            seeds.push(DVector::from_element(n, -c));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.random {
            seeds.push(DVector::from_fn(n, |_, _| {
                rng.random_range(-radius..=radius)
            }));
        }
        seeds
    }
}

/// Runs Newton from every seed and returns the distinct equilibria found,
/// sorted by `||x||_inf`.
pub fn find_all(s: &SystemInstance, spec: &SeedSpec) -> Result<Vec<Equilibrium>> {
    find_from_seeds(s, &spec.seeds(s.n(), s.pi()))
}

/// Newton from the given seeds, deduplicated and classified.
///
/// Representatives are chosen by smallest residual (ties broken
/// lexicographically), so the output does not depend on seed order.
pub fn find_from_seeds(s: &SystemInstance, seeds: &[DVector<f64>]) -> Result<Vec<Equilibrium>> {
    let opts = NewtonOptions::default();
    let mut found: Vec<(DVector<f64>, f64)> = seeds
        .iter()
        .filter_map(|x0| newton_solve(s, x0, &opts).ok())
        .collect();
    found.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| lexicographic(&a.0, &b.0)));
    let mut distinct: Vec<DVector<f64>> = Vec::new();
    for (x, _) in found {
        if distinct.iter().all(|d| (d - &x).amax() >= DEDUP_TOL) {
            distinct.push(x);
        }
    }
    let mut equilibria = distinct
        .into_iter()
        .map(|x| classify(s, x))
        .collect::<Result<Vec<_>>>()?;
    equilibria.sort_by(|a, b| {
        a.norm_inf()
            .total_cmp(&b.norm_inf())
            .then_with(|| lexicographic(&a.state, &b.state))
    });
    Ok(equilibria)
}

fn lexicographic(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// CSV `pi,eq_index,classification,max_real_eig,is_consensus,x1,...,xn`.
/// `eq_index` counts equilibria within each `pi`.
pub fn equilibria_to_csv(equilibria: &[Equilibrium]) -> String {
    let n = equilibria.first().map_or(0, |e| e.state.len());
    let mut out = String::from("pi,eq_index,classification,max_real_eig,is_consensus");
    for i in 1..=n {
        write!(out, ",x{i}").unwrap();
    }
    out.push('\n');
    let mut index = 0;
    for (k, e) in equilibria.iter().enumerate() {
        if k > 0 && equilibria[k - 1].pi != e.pi {
            index = 0;
        }
        write!(
            out,
            "{},{},{},{},{}",
            e.pi, index, e.classification, e.max_real_eig, e.is_consensus
        )
        .unwrap();
        for v in e.state.iter() {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
        index += 1;
    }
    out
}
