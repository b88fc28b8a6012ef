//! Consensus equilibria under proportional influence reduce to the scalar
//! equation `g(e, pi) = -(1 + alpha) e + pi (psi(e) + alpha psi(e)^2) = 0`.

use crate::error::{Error, Result};
use crate::nonlinearity::SigmoidFamily;

/// Upper end of the positive root search window.
pub const EPS_MAX: f64 = 50.0;

const GRID_POINTS: usize = 4000;
const GRID_MIN: f64 = 1e-9;

/// The scalar reduction for a given `alpha` and social effort `pi`.
#[derive(Debug, Clone)]
pub struct ScalarReduced {
    pub alpha: f64,
    pub pi: f64,
    pub psi: SigmoidFamily,
}

impl ScalarReduced {
    pub fn new(alpha: f64, pi: f64, psi: SigmoidFamily) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "must be finite and nonnegative",
            });
        }
        if !(pi > 0.0 && pi.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "pi",
                value: pi,
                reason: "social effort must be finite and positive",
            });
        }
        Ok(Self { alpha, pi, psi })
    }

    pub fn tanh(alpha: f64, pi: f64) -> Result<Self> {
        Self::new(alpha, pi, SigmoidFamily::tanh())
    }

    /// `h(e) = psi(e) + alpha psi(e)^2`.
    fn h(&self, eps: f64) -> f64 {
        let p = self.psi.eval(eps);
        p + self.alpha * p * p
    }

    pub fn g(&self, eps: f64) -> f64 {
        -(1.0 + self.alpha) * eps + self.pi * self.h(eps)
    }

    /// `dg/de = -(1 + alpha) + pi psi'(e) (1 + 2 alpha psi(e))`.
    pub fn dg(&self, eps: f64) -> f64 {
        let p = self.psi.eval(eps);
        -(1.0 + self.alpha) + self.pi * self.psi.deriv(eps) * (1.0 + 2.0 * self.alpha * p)
    }
}

/// `g(e, pi)` for `e >= 0`.
pub fn g_eval(r: &ScalarReduced, eps: f64) -> f64 {
    r.g(eps)
}

fn log_grid() -> Vec<f64> {
    let (lo, hi) = (GRID_MIN.ln(), EPS_MAX.ln());
    (0..GRID_POINTS)
        .map(|k| (lo + (hi - lo) * k as f64 / (GRID_POINTS - 1) as f64).exp())
        .collect()
}

/// Bisects a sign change of `f` on `[lo, hi]` down to machine resolution.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let positive_at_lo = f(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-12 * hi.max(1e-300) {
            break;
        }
        if (f(mid) > 0.0) == positive_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Positive roots of `g(., pi)` on `(0, EPS_MAX]`, ascending.
///
/// Sign changes on a log-spaced grid are refined by bisection. A grid local
/// maximum that touches zero (within 1e-12) is reported as a tangency root.
pub fn consensus_roots(r: &ScalarReduced) -> Vec<f64> {
    let grid = log_grid();
    let values: Vec<f64> = grid.iter().map(|&e| r.g(e)).collect();
    let mut roots = Vec::new();
    for k in 0..grid.len() - 1 {
        let (a, b) = (values[k], values[k + 1]);
        if a == 0.0 {
            roots.push(grid[k]);
        } else if a * b < 0.0 {
            roots.push(bisect(|e| r.g(e), grid[k], grid[k + 1]));
        }
        if k > 0 && a < 0.0 && values[k - 1] <= a && b <= a {
            // Touching maximum: the peak of g lies where dg changes sign.
            let peak = if r.dg(grid[k - 1]) > 0.0 && r.dg(grid[k + 1]) < 0.0 {
                bisect(|e| r.dg(e), grid[k - 1], grid[k + 1])
            } else {
                grid[k]
            };
            if r.g(peak).abs() <= 1e-12 {
                roots.push(peak);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.max(1.0));
    roots
}

/// Fold of the consensus branch: `g = 0` and `dg/de = 0` with `e > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldPoint {
    pub pi: f64,
    pub eps: f64,
}

/// Solves the tangency system by eliminating `pi`: the fold sits where
/// `h(e) = e h'(e)`, and then `pi = (1 + alpha) e / h(e)`.
///
/// For `alpha = 0` the fold degenerates into the pitchfork at the origin and
/// `(pi, e) = (1, 0)` is returned.
pub fn pi1_star(psi: &SigmoidFamily, alpha: f64) -> Result<FoldPoint> {
    let r = ScalarReduced::new(alpha, 1.0, psi.clone())?;
    if alpha == 0.0 {
        return Ok(FoldPoint { pi: 1.0, eps: 0.0 });
    }
    let h = |e: f64| r.h(e);
    let dh = |e: f64| psi.deriv(e) * (1.0 + 2.0 * alpha * psi.eval(e));
    let tangency = |e: f64| h(e) - e * dh(e);

    let grid = log_grid();
    let eps = match grid
        .windows(2)
        .find(|w| tangency(w[0]) < 0.0 && tangency(w[1]) >= 0.0)
    {
        Some(w) => bisect(tangency, w[0], w[1]),
        // alpha so small that the fold sits below the grid: e* ~ 1.5 alpha.
        None if tangency(grid[0]) >= 0.0 => bisect(tangency, grid[0] * 1e-6, grid[0]),
        None => {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "no tangency found on the search window",
            })
        }
    };
    Ok(FoldPoint {
        pi: (1.0 + alpha) * eps / h(eps),
        eps,
    })
}
