//! Opinion-transmission functions: odd, monotone, saturated, sigmoidal maps
//! with unit slope at the origin.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Grid used when a family is admitted into a solver.
pub const GATE_GRID_MAX: f64 = 10.0;
pub const GATE_GRID_POINTS: usize = 2001;

/// A scalar sigmoid `psi` shared by every agent, with its first two
/// derivatives.
#[derive(Clone)]
pub struct SigmoidFamily {
    name: String,
    eval: ScalarFn,
    deriv: ScalarFn,
    deriv2: ScalarFn,
    antiderivative: Option<ScalarFn>,
    gate: Arc<OnceLock<std::result::Result<(), String>>>,
}

impl fmt::Debug for SigmoidFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SigmoidFamily")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl Default for SigmoidFamily {
    fn default() -> Self {
        Self::tanh()
    }
}

impl SigmoidFamily {
    /// `psi = tanh`, with `psi' = sech^2` and `psi'' = -2 tanh sech^2`.
    ///
    /// `sech^2` is evaluated as `1/cosh^2` rather than `1 - tanh^2`: the two
    /// agree but the former keeps strict positivity out to |x| ~ 350.
    pub fn tanh() -> Self {
        let sech2 = |x: f64| {
            let c = x.cosh();
            1.0 / (c * c)
        };
        let mut family = Self::new_unchecked("tanh", f64::tanh, sech2, move |x: f64| {
            -2.0 * x.tanh() * sech2(x)
        });
        family.antiderivative = Some(Arc::new(ln_cosh));
        family
    }

    /// Builds a family after checking `psi(0) = 0` and `psi'(0) = 1` to 1e-12.
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let family = Self::new_unchecked(name, eval, deriv, deriv2);
        let origin = check_origin(&family);
        if !origin.passed {
            return Err(Error::AssumptionViolated {
                name: family.name,
                clause: origin.clause.to_string(),
            });
        }
        Ok(family)
    }

    /// Builds a family without the origin check, so that
    /// [`verify_assumptions`] can report on arbitrary maps.
    pub fn new_unchecked(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            deriv: Arc::new(deriv),
            deriv2: Arc::new(deriv2),
            antiderivative: None,
            gate: Arc::new(OnceLock::new()),
        }
    }

    /// Supplies a closed form for `int_0^x psi`, used by the Lyapunov function.
    pub fn with_antiderivative(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.antiderivative = Some(Arc::new(f));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        (self.deriv)(x)
    }

    #[inline]
    pub fn deriv2(&self, x: f64) -> f64 {
        (self.deriv2)(x)
    }

    /// `int_0^x psi(s) ds`; composite Simpson when no closed form was given.
    pub fn integral(&self, x: f64) -> f64 {
        match &self.antiderivative {
            Some(f) => f(x),
            None => simpson(|s| self.eval(s), 0.0, x, 256),
        }
    }

    /// Runs [`verify_assumptions`] once per family on the standard grid and
    /// caches the outcome; solvers refuse families that fail.
    pub fn admit(&self) -> Result<()> {
        let outcome = self.gate.get_or_init(|| {
            let report = verify_assumptions(self, GATE_GRID_MAX, GATE_GRID_POINTS);
            match report.clauses.iter().find(|c| !c.passed) {
                Some(c) => Err(c.clause.to_string()),
                None => Ok(()),
            }
        });
        outcome.clone().map_err(|clause| Error::AssumptionViolated {
            name: self.name.clone(),
            clause,
        })
    }
}

/// Numerically stable `ln(cosh(x))`.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals + intervals % 2;
    let h = (b - a) / m as f64;
    let inner: f64 = (1..m)
        .map(|k| {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            w * f(a + k as f64 * h)
        })
        .sum();
    h / 3.0 * (f(a) + inner + f(b))
}

/// Outcome of one assumption clause, with the worst grid point when it fails.
#[derive(Debug, Clone, PartialEq)]
pub struct ClauseResult {
    pub clause: &'static str,
    pub passed: bool,
    pub worst_point: Option<f64>,
    pub worst_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub clauses: Vec<ClauseResult>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn clause(&self, name: &str) -> Option<&ClauseResult> {
        self.clauses.iter().find(|c| c.clause == name)
    }
}

const ODD_TOL: f64 = 1e-12;
const ORIGIN_TOL: f64 = 1e-12;

/// Checks oddness, monotonicity, saturation and the sigmoidal curvature sign
/// on a symmetric grid over `[-grid_max, grid_max]`.
pub fn verify_assumptions(
    f: &SigmoidFamily,
    grid_max: f64,
    grid_points: usize,
) -> AssumptionReport {
    assert!(grid_max > 0.0, "grid_max must be positive");
    assert!(grid_points >= 100, "grid_points must be at least 100");
    let grid: Vec<f64> = (0..grid_points)
        .map(|k| -grid_max + 2.0 * grid_max * k as f64 / (grid_points - 1) as f64)
        .collect();

    let odd = worst(&grid, |x| (f.eval(x) + f.eval(-x)).abs(), |v| v < ODD_TOL);
    let monotone = worst(&grid, |x| f.deriv(x), |v| v > 0.0);
    let bounded = worst(&grid, |x| f.eval(x).abs(), |v| v <= 1.0);
    let saturated = if bounded.passed && grid_max >= 10.0 {
        worst(
            &[-grid_max, grid_max],
            |x| f.eval(x).abs(),
            |v| v > 0.99 && v <= 1.0,
        )
    } else {
        bounded
    };
    // Curvature sign flips across the origin: psi'' < 0 for x > 0, > 0 for x < 0.
    let off_origin: Vec<f64> = grid.iter().copied().filter(|&x| x != 0.0).collect();
    let sigmoidal = worst(&off_origin, |x| x.signum() * f.deriv2(x), |v| v < 0.0);

    AssumptionReport {
        clauses: vec![
            check_origin(f),
            ClauseResult {
                clause: "odd",
                ..odd
            },
            ClauseResult {
                clause: "monotone",
                ..monotone
            },
            ClauseResult {
                clause: "saturated",
                ..saturated
            },
            ClauseResult {
                clause: "sigmoidal",
                ..sigmoidal
            },
        ],
    }
}

fn check_origin(f: &SigmoidFamily) -> ClauseResult {
    let value = f.eval(0.0).abs();
    let slope = (f.deriv(0.0) - 1.0).abs();
    let passed = value < ORIGIN_TOL && slope < ORIGIN_TOL;
    ClauseResult {
        clause: "psi(0)=0 and psi'(0)=1",
        passed,
        worst_point: (!passed).then_some(0.0),
        worst_value: (!passed).then_some(value.max(slope)),
    }
}

/// Finds the first failing grid point, or the extreme value when all pass.
fn worst(grid: &[f64], measure: impl Fn(f64) -> f64, ok: impl Fn(f64) -> bool) -> ClauseResult {
    match grid.iter().map(|&x| (x, measure(x))).find(|&(_, v)| !ok(v)) {
        Some((x, v)) => ClauseResult {
            clause: "",
            passed: false,
            worst_point: Some(x),
            worst_value: Some(v),
        },
        None => ClauseResult {
            clause: "",
            passed: true,
            worst_point: None,
            worst_value: None,
        },
    }
}
