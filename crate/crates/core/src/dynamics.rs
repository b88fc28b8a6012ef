//! The order-2 vector field, its Jacobian, fixed-step integration and the two
//! Lyapunov certificates used for global stability of the origin.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph2;
use crate::nonlinearity::SigmoidFamily;

/// States beyond this magnitude are treated as a blow-up.
pub const BLOW_UP_GUARD: f64 = 1e6;

/// A hypergraph, a transmission law and a social-effort level `pi > 0`.
#[derive(Debug, Clone)]
pub struct SystemInstance {
    graph: Hypergraph2,
    psi: SigmoidFamily,
    pi: f64,
}

impl SystemInstance {
    pub fn new(graph: Hypergraph2, psi: SigmoidFamily, pi: f64) -> Result<Self> {
        check_pi(pi)?;
        psi.admit()?;
        Ok(Self { graph, psi, pi })
    }

    pub fn tanh(graph: Hypergraph2, pi: f64) -> Result<Self> {
        Self::new(graph, SigmoidFamily::tanh(), pi)
    }

    pub fn with_pi(&self, pi: f64) -> Result<Self> {
        check_pi(pi)?;
        Ok(Self { pi, ..self.clone() })
    }

    pub fn graph(&self) -> &Hypergraph2 {
        &self.graph
    }

    pub fn psi(&self) -> &SigmoidFamily {
        &self.psi
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::Dimension {
                what: "state vector".into(),
                expected: self.n(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn psi_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        x.map(|v| self.psi.eval(v))
    }

    /// `A2 psi(x) + [psi(x)^T B_i psi(x)]_i`, the interaction term before
    /// scaling by `pi`.
    pub(crate) fn interaction(&self, x: &DVector<f64>) -> DVector<f64> {
        let p = self.psi_vec(x);
        let mut out = self.graph.a2().matrix() * &p;
        for (i, b) in self.graph.a3().slices().iter().enumerate() {
            out[i] += p.dot(&(b * &p));
        }
        out
    }

    pub(crate) fn field_unchecked(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut f = self.interaction(x) * self.pi;
        for i in 0..x.len() {
            f[i] -= self.graph.degrees()[i] * x[i];
        }
        f
    }

    pub(crate) fn jacobian_unchecked(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n();
        let p = self.psi_vec(x);
        let slopes = x.map(|v| self.psi.deriv(v));
        let mut m = self.graph.a2().matrix().clone();
        for (i, b) in self.graph.a3().slices().iter().enumerate() {
            let bp = b * &p;
            for j in 0..n {
                m[(i, j)] += 2.0 * bp[j];
            }
        }
        let mut jac = DMatrix::from_fn(n, n, |i, j| self.pi * m[(i, j)] * slopes[j]);
        for i in 0..n {
            jac[(i, i)] -= self.graph.degrees()[i];
        }
        jac
    }
}

fn check_pi(pi: f64) -> Result<()> {
    if pi > 0.0 && pi.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "pi",
            value: pi,
            reason: "social effort must be finite and positive",
        })
    }
}

fn check_finite(x: &DVector<f64>) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidParameter {
            name: "x",
            value: x[i],
            reason: "state must be finite",
        }),
        None => Ok(()),
    }
}

/// `dx_i/dt = -delta_i x_i + pi * sum_j a_ij psi(x_j) + pi * psi(x)^T B_i psi(x)`.
pub fn vector_field(s: &SystemInstance, x: &DVector<f64>) -> Result<DVector<f64>> {
    s.check_dim(x)?;
    check_finite(x)?;
    Ok(s.field_unchecked(x))
}

/// Analytic Jacobian `-Delta + pi (A2 + 2 R(x)) diag(psi'(x))`, where row `i`
/// of `R(x)` is `(B_i psi(x))^T`. Relies on each `B_i` being symmetric.
pub fn jacobian(s: &SystemInstance, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    s.check_dim(x)?;
    check_finite(x)?;
    Ok(s.jacobian_unchecked(x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub dt: f64,
    pub t_max: f64,
    /// Integration stops once `||f(x)||_inf` falls below this value.
    pub residual_tol: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_max: 200.0,
            residual_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub converged: bool,
    pub final_residual: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &DVector<f64> {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }

    /// CSV with header `t,x1,...,xn`, one row per accepted step.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |s| s.len());
        let mut out = String::from("t");
        for i in 1..=n {
            write!(out, ",x{i}").unwrap();
        }
        out.push('\n');
        for (t, x) in self.times.iter().zip(&self.states) {
            write!(out, "{t}").unwrap();
            for v in x.iter() {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Classical fixed-step RK4 from `x0`, stopping early on a small residual.
pub fn integrate(
    s: &SystemInstance,
    x0: &DVector<f64>,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    s.check_dim(x0)?;
    check_finite(x0)?;
    if !(opts.dt > 0.0 && opts.t_max > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: opts.dt,
            reason: "dt and t_max must be positive",
        });
    }
    let steps = (opts.t_max / opts.dt - 1e-9).ceil().max(1.0) as usize;
    let mut x = x0.clone();
    let mut times = vec![0.0];
    let mut states = vec![x.clone()];
    let mut residual = s.field_unchecked(&x).amax();
    for k in 0..steps {
        if residual < opts.residual_tol {
            break;
        }
        let t = k as f64 * opts.dt;
        let h = opts.dt.min(opts.t_max - t);
        let k1 = s.field_unchecked(&x);
        let k2 = s.field_unchecked(&(&x + &k1 * (h / 2.0)));
        let k3 = s.field_unchecked(&(&x + &k2 * (h / 2.0)));
        let k4 = s.field_unchecked(&(&x + &k3 * h));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let t_next = if k + 1 == steps {
            opts.t_max
        } else {
            (k + 1) as f64 * opts.dt
        };
        if let Some(i) = x
            .iter()
            .position(|v| !v.is_finite() || v.abs() > BLOW_UP_GUARD)
        {
            return Err(Error::Divergence {
                time: t_next,
                component: i + 1,
            });
        }
        times.push(t_next);
        states.push(x.clone());
        residual = s.field_unchecked(&x).amax();
    }
    Ok(Trajectory {
        times,
        states,
        converged: residual < opts.residual_tol,
        final_residual: residual,
    })
}

/// `V(x) = sum_i delta_i^{-1} int_0^{x_i} psi`.
pub fn lyapunov_v(s: &SystemInstance, x: &DVector<f64>) -> f64 {
    x.iter()
        .zip(s.graph.degrees().iter())
        .map(|(&xi, &d)| s.psi.integral(xi) / d)
        .sum()
}

/// Result of checking that a scalar certificate decreases along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DecreaseReport {
    pub decreasing: bool,
    /// Largest one-step increase observed (negative when every step decreased).
    pub max_increase: f64,
    /// Time at which the worst step ends.
    pub worst_time: f64,
    pub samples: usize,
    pub converged: bool,
}

/// Samples `||x(t)||_inf` along a trajectory and checks that it never grows by
/// more than `tol` over one step.
pub fn sup_norm_decrease_test(
    s: &SystemInstance,
    x0: &DVector<f64>,
    opts: &IntegrateOptions,
    tol: f64,
) -> Result<DecreaseReport> {
    let traj = integrate(s, x0, opts)?;
    let values: Vec<f64> = traj.states.iter().map(|x| x.amax()).collect();
    Ok(decrease_report(&traj, &values, |prev, next| {
        next - prev <= tol
    }))
}

/// Checks that `V` strictly decreases while it is above `tol`, and never grows
/// by more than `tol` once the trajectory has settled.
pub fn lyapunov_decrease_test(
    s: &SystemInstance,
    x0: &DVector<f64>,
    opts: &IntegrateOptions,
    tol: f64,
) -> Result<DecreaseReport> {
    let traj = integrate(s, x0, opts)?;
    let values: Vec<f64> = traj.states.iter().map(|x| lyapunov_v(s, x)).collect();
    Ok(decrease_report(&traj, &values, |prev, next| {
        if prev > tol {
            next < prev
        } else {
            next - prev <= tol
        }
    }))
}

fn decrease_report(
    traj: &Trajectory,
    values: &[f64],
    ok: impl Fn(f64, f64) -> bool,
) -> DecreaseReport {
    let mut report = DecreaseReport {
        decreasing: true,
        max_increase: f64::NEG_INFINITY,
        worst_time: 0.0,
        samples: values.len(),
        converged: traj.converged,
    };
    for (k, w) in values.windows(2).enumerate() {
        let increase = w[1] - w[0];
        if increase > report.max_increase {
            report.max_increase = increase;
            report.worst_time = traj.times[k + 1];
        }
        if !ok(w[0], w[1]) {
            report.decreasing = false;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::fixtures::{complete, k3_hyper};
    use crate::hypergraph::{random_instance, GenerationConfig};
    use crate::spectra::general_eigenvalues;
    use proptest::prelude::*;

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Larger positive root of `-(1+a) e + pi (tanh e + a tanh^2 e)`.
    fn upper_root(alpha: f64, pi: f64) -> f64 {
        bisect(
            |e| -(1.0 + alpha) * e + pi * (e.tanh() + alpha * e.tanh().powi(2)),
            1.0,
            pi + 1.0,
        )
    }

    fn section_v(seed: u64) -> Hypergraph2 {
        random_instance(&GenerationConfig {
            seed,
            ..Default::default()
        })
        .unwrap()
    }

    fn fd_jacobian(s: &SystemInstance, x: &DVector<f64>, h: f64) -> DMatrix<f64> {
        let n = x.len();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let col = (s.field_unchecked(&xp) - s.field_unchecked(&xm)) / (2.0 * h);
            m.set_column(j, &col);
        }
        m
    }

    #[test]
    fn origin_is_an_equilibrium() {
        let s = SystemInstance::tanh(k3_hyper(), 2.0).unwrap();
        assert_eq!(vector_field(&s, &DVector::zeros(3)).unwrap().amax(), 0.0);
    }

    #[test]
    fn k3_consensus_point_is_an_equilibrium() {
        let s = SystemInstance::tanh(k3_hyper(), 2.0).unwrap();
        let eps = upper_root(1.0, 2.0);
        assert!((eps - 1.86).abs() < 0.01);
        let f = vector_field(&s, &DVector::from_element(3, eps)).unwrap();
        assert!(f.amax() < 1e-8);
    }

    #[test]
    fn zero_tensor_reduces_to_pairwise_field() {
        let g = section_v(3).without_interactions();
        let s = SystemInstance::tanh(g.clone(), 1.3).unwrap();
        let x = DVector::from_vec(vec![0.3, -1.2, 2.0, 0.0, -0.4]);
        let f = vector_field(&s, &x).unwrap();
        let a = g.a2().matrix();
        for i in 0..5 {
            let expected =
                -g.degrees()[i] * x[i] + 1.3 * (0..5).map(|j| a[(i, j)] * x[j].tanh()).sum::<f64>();
            assert!((f[i] - expected).abs() < 1e-14);
        }
        let fm = vector_field(&s, &(-&x)).unwrap();
        assert!((f + fm).amax() < 1e-14);
    }

    #[test]
    fn jacobian_at_origin() {
        let g = k3_hyper();
        let s = SystemInstance::tanh(g, 1.0).unwrap();
        let j = jacobian(&s, &DVector::zeros(3)).unwrap();
        let expected = complete(3) - DMatrix::identity(3, 3) * 4.0;
        assert_eq!(j, expected);
        let mut eig: Vec<f64> = general_eigenvalues(&j)
            .unwrap()
            .eigenvalues
            .iter()
            .map(|c| c.re)
            .collect();
        eig.sort_by(f64::total_cmp);
        for (a, b) in eig.iter().zip([-5.0, -5.0, -2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_errors() {
        let s = SystemInstance::tanh(k3_hyper(), 1.0).unwrap();
        assert!(matches!(
            vector_field(&s, &DVector::zeros(2)),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            jacobian(&s, &DVector::zeros(4)),
            Err(Error::Dimension { .. })
        ));
        assert!(SystemInstance::tanh(k3_hyper(), 0.0).is_err());
    }

    #[test]
    fn origin_start_converges_immediately() {
        let s = SystemInstance::tanh(section_v(1), 1.7).unwrap();
        let traj = integrate(&s, &DVector::zeros(5), &IntegrateOptions::default()).unwrap();
        assert!(traj.converged);
        assert_eq!(traj.times, vec![0.0]);
    }

    #[test]
    fn bistable_trajectories() {
        let s = SystemInstance::tanh(section_v(1), 1.7).unwrap();
        let opts = IntegrateOptions::default();
        let low = integrate(&s, &DVector::from_element(5, 0.05), &opts).unwrap();
        assert!(low.converged);
        assert!(low.final_state().amax() < 1e-9);
        let high = integrate(&s, &DVector::from_element(5, 2.0), &opts).unwrap();
        assert!(high.converged);
        let eps = upper_root(1.0, 1.7);
        assert!((eps - 1.437).abs() < 1e-3);
        assert!((high.final_state() - DVector::from_element(5, eps)).amax() < 1e-8);
    }

    #[test]
    fn trajectory_csv_layout() {
        let s = SystemInstance::tanh(k3_hyper(), 0.5).unwrap();
        let opts = IntegrateOptions {
            t_max: 0.02,
            ..Default::default()
        };
        let traj = integrate(&s, &DVector::from_element(3, 1.0), &opts).unwrap();
        let csv = traj.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,x3");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,1,1,1"));
        assert!(lines[3].starts_with("0.02,"));
    }

    #[test]
    fn lyapunov_values() {
        let s = SystemInstance::tanh(k3_hyper(), 0.5).unwrap();
        assert_eq!(lyapunov_v(&s, &DVector::zeros(3)), 0.0);
        // delta = 4 per node, so one unit coordinate contributes ln(cosh 1)/4.
        let x = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert!((lyapunov_v(&s, &x) - 0.433_780_830_483_027 / 4.0).abs() < 1e-14);
    }

    #[test]
    fn sup_norm_monotone_below_fold_and_not_above_pi1() {
        let g = section_v(1);
        let opts = IntegrateOptions::default();
        let x0 = DVector::from_vec(vec![3.0, -1.0, 2.5, 0.4, -3.0]);
        let below = SystemInstance::tanh(g.clone(), 1.0).unwrap();
        assert!(
            sup_norm_decrease_test(&below, &x0, &opts, 1e-9)
                .unwrap()
                .decreasing
        );
        let zero = sup_norm_decrease_test(&below, &DVector::zeros(5), &opts, 1e-9).unwrap();
        assert!(zero.decreasing && zero.samples == 1);

        let above = SystemInstance::tanh(g, 3.0).unwrap();
        let report =
            sup_norm_decrease_test(&above, &DVector::from_element(5, 2.0), &opts, 1e-9).unwrap();
        assert!(!report.decreasing);
        assert!(report.converged);
    }

    #[test]
    fn divergence_guard_trips_on_blow_up() {
        // Anti-saturating map violates the bounded-field premise.
        let cubic = SystemInstance {
            graph: k3_hyper(),
            psi: SigmoidFamily::new_unchecked(
                "cubic",
                |x: f64| x + x.powi(3),
                |x| 1.0 + 3.0 * x * x,
                |x| 6.0 * x,
            ),
            pi: 3.0,
        };
        let err = integrate(
            &cubic,
            &DVector::from_element(3, 2.0),
            &IntegrateOptions::default(),
        );
        assert!(matches!(err, Err(Error::Divergence { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn analytic_jacobian_matches_finite_differences(
            seed in any::<u64>(),
            alpha in 0.0f64..2.0,
            pi in 0.2f64..4.0,
            x in proptest::collection::vec(-3.0f64..3.0, 6),
        ) {
            let g = random_instance(&GenerationConfig { n: 6, p2: 0.6, p3: 0.4, alpha, seed }).unwrap();
            let s = SystemInstance::tanh(g, pi).unwrap();
            let x = DVector::from_vec(x);
            let j = jacobian(&s, &x).unwrap();
            let fd = fd_jacobian(&s, &x, 1e-6);
            prop_assert!((&j - &fd).amax() <= 1e-6 * j.amax().max(1.0));
        }

        #[test]
        fn pairwise_field_is_odd(
            seed in any::<u64>(),
            x in proptest::collection::vec(-4.0f64..4.0, 5),
        ) {
            let g = random_instance(&GenerationConfig { alpha: 0.0, seed, ..Default::default() }).unwrap();
            let s = SystemInstance::tanh(g, 2.2).unwrap();
            let x = DVector::from_vec(x);
            let sum = vector_field(&s, &x).unwrap() + vector_field(&s, &(-&x)).unwrap();
            prop_assert!(sum.amax() < 1e-13);
        }
    }
}
