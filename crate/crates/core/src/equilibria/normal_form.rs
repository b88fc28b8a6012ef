//! Coefficients of the unfolded pitchfork `dy/dt = (pi - pi1) y + kappa1 y^3 + kappa2 y^2`.

use nalgebra::DVector;

use crate::dynamics::SystemInstance;
use crate::error::Result;
use crate::hypergraph::Hypergraph2;
use crate::nonlinearity::SigmoidFamily;
use crate::spectra::perron_pair;

const H3: f64 = 1e-2;
const H2: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub pi1: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Same coefficients read off the full projected vector field.
    pub kappa1_check: f64,
    pub kappa2_check: f64,
    /// Critical direction, unit 2-norm.
    pub v: DVector<f64>,
    /// Left vector scaled so that `w^T v = 1`.
    pub w: DVector<f64>,
}

impl NormalForm {
    pub fn to_kv(&self) -> String {
        format!(
            "pi1={}\nkappa1={}\nkappa2={}\nkappa1_check={}\nkappa2_check={}\n",
            self.pi1, self.kappa1, self.kappa2, self.kappa1_check, self.kappa2_check
        )
    }
}

/// Fourth-order central stencil for `f'''(0)`.
fn third_derivative(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (-f(3.0 * h) + 8.0 * f(2.0 * h) - 13.0 * f(h) + 13.0 * f(-h) - 8.0 * f(-2.0 * h) + f(-3.0 * h))
        / (8.0 * h.powi(3))
}

/// Fourth-order central stencil for `f''(0)`.
fn second_derivative(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h)
}

/// `kappa2` in closed form, `kappa1` from the reduced map
/// `y -> w^T Delta^{-1} pi1 (A psi(y v) + psi^T B_i psi)`.
///
/// `v` is normalized to unit length, which makes `kappa2` linear in the scale
/// of `B` for proportional instances (the degrees grow with `B` too).
pub fn normal_form_coeffs(g: &Hypergraph2, psi: &SigmoidFamily) -> Result<NormalForm> {
    let pair = perron_pair(g)?;
    let pi1 = 1.0 / pair.lambda;
    let (v, w) = (pair.v, pair.w);
    let weights = w.component_div(g.degrees());

    let kappa2 = pi1
        * g.a3()
            .slices()
            .iter()
            .zip(weights.iter())
            .map(|(b, wd)| wd * v.dot(&(b * &v)))
            .sum::<f64>();

    let s = SystemInstance::new(g.clone(), psi.clone(), pi1)?;
    let reduced = |y: f64| pi1 * weights.dot(&s.interaction(&(&v * y)));
    let full = |y: f64| weights.dot(&s.field_unchecked(&(&v * y)));

    Ok(NormalForm {
        pi1,
        kappa1: third_derivative(reduced, H3) / 6.0,
        kappa2: if g.a3().is_zero() { 0.0 } else { kappa2 },
        kappa1_check: third_derivative(full, H3) / 6.0,
        kappa2_check: second_derivative(full, H2) / 2.0,
        v,
        w,
    })
}
