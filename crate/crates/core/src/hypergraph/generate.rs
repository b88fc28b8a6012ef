use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{is_connected, Hypergraph2, PairwiseMatrix, TwoInteractionTensor};
use crate::error::{Error, Result};

/// Resampling budget for both the pairwise graph and each slice.
pub const MAX_ATTEMPTS: usize = 100;

/// Parameters of the random hypernetwork model.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationConfig {
    pub n: usize,
    /// Probability that a pairwise weight is nonzero.
    pub p2: f64,
    /// Probability that an admissible 2-interaction weight is nonzero.
    pub p3: f64,
    /// Requested proportional-influence ratio.
    pub alpha: f64,
    pub seed: u64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            n: 5,
            p2: 0.8,
            p3: 0.2,
            alpha: 1.0,
            seed: 1,
        }
    }
}

/// Draws a random order-2 hypernetwork with weights uniform on `(0, 1]`.
///
/// `A2` is redrawn until connected. Each `B_i` is drawn over the entries that
/// avoid node `i` and the diagonal, redrawn while empty (when `alpha > 0`),
/// then rescaled so that `1^T B_i 1 = alpha * sum_j a2_ij`.
pub fn random_instance(cfg: &GenerationConfig) -> Result<Hypergraph2> {
    let GenerationConfig {
        n,
        p2,
        p3,
        alpha,
        seed,
    } = *cfg;
    if n < 2 {
        return Err(Error::TooFewNodes { n });
    }
    for (name, p) in [("p2", p2), ("p3", p3)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter {
                name,
                value: p,
                reason: "probability must lie in [0, 1]",
            });
        }
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "must be finite and nonnegative",
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a2 = (0..MAX_ATTEMPTS)
        .map(|_| sample_symmetric(&mut rng, n, p2, |i, j| i != j))
        .find(is_connected)
        .ok_or_else(|| Error::Generation {
            attempts: MAX_ATTEMPTS,
            reason: "pairwise graph never connected".into(),
        })?;
    let a2 = PairwiseMatrix::new(a2)?;
    let row_sums = a2.row_sums();

    let mut slices = Vec::with_capacity(n);
    for i in 0..n {
        if alpha == 0.0 {
            slices.push(DMatrix::zeros(n, n));
            continue;
        }
        let b = (0..MAX_ATTEMPTS)
            .map(|_| sample_symmetric(&mut rng, n, p3, |j, k| j != k && j != i && k != i))
            .find(|b| b.sum() > 0.0)
            .ok_or_else(|| Error::Generation {
                attempts: MAX_ATTEMPTS,
                reason: format!("slice B{} has no admissible nonzero entry", i + 1),
            })?;
        let scale = alpha * row_sums[i] / b.sum();
        slices.push(b * scale);
    }

    let mut h = Hypergraph2::build(a2, TwoInteractionTensor::new(slices)?)?;
    if h.alpha().is_none() {
        return Err(Error::Generation {
            attempts: 1,
            reason: "rescaled slices failed the proportional-influence check".into(),
        });
    }
    h.set_alpha(Some(alpha));
    Ok(h)
}

fn sample_symmetric(
    rng: &mut ChaCha8Rng,
    n: usize,
    p: f64,
    admissible: impl Fn(usize, usize) -> bool,
) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if admissible(i, j) && rng.random_bool(p) {
                let w = 1.0 - rng.random::<f64>();
                m[(i, j)] = w;
                m[(j, i)] = w;
            }
        }
    }
    m
}
