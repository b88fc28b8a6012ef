//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hypernet::bifurcation::{default_grid, pi_grid, Attractor};
use hypernet::dynamics::{jacobian, lyapunov_decrease_test, sup_norm_decrease_test};
use hypernet::hypergraph::{
    random_instance, GenerationConfig, PairwiseMatrix, TwoInteractionTensor,
};
use hypernet::spectra::{general_eigenvalues, h_matrix};
use hypernet::{
    basin_probe, find_all, integrate, normal_form_coeffs, pi1_star, sweep, thresholds,
    vector_field, Classification, Hypergraph2, IntegrateOptions, SeedSpec, SigmoidFamily,
    SweepOptions, SweepResult, SystemInstance,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn instance(alpha: f64, seed: u64) -> Hypergraph2 {
    random_instance(&GenerationConfig {
        alpha,
        seed,
        ..Default::default()
    })
    .expect("generator succeeds")
}

fn random_alpha_instance(rng: &mut ChaCha8Rng, seed: u64) -> (Hypergraph2, f64) {
    let alpha = 2.0 * (1.0 - rng.random::<f64>());
    let n = rng.random_range(4..=8);
    let g = random_instance(&GenerationConfig {
        n,
        alpha,
        seed,
        ..Default::default()
    })
    .expect("generator succeeds");
    (g, alpha)
}

fn tanh() -> SigmoidFamily {
    SigmoidFamily::tanh()
}

/// Scalar consensus map for tanh, written out independently of the library.
fn g_scalar(alpha: f64, pi: f64, e: f64) -> f64 {
    let t = e.tanh();
    -(1.0 + alpha) * e + pi * (t + alpha * t * t)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == flo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Maximum of `g(., pi)` on `[0.05, 5]` by grid search and golden section.
fn max_g(alpha: f64, pi: f64) -> f64 {
    let f = |e: f64| g_scalar(alpha, pi, e);
    let grid: Vec<f64> = (0..=2000)
        .map(|k| 0.05 + 4.95 * k as f64 / 2000.0)
        .collect();
    let k = (0..grid.len())
        .max_by(|&a, &b| f(grid[a]).total_cmp(&f(grid[b])))
        .unwrap();
    let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

fn c1_pi1_star() -> Outcome {
    let fold = pi1_star(&tanh(), 1.0).map_err(|e| e.to_string())?;
    ensure((fold.pi - 1.44).abs() <= 0.01, || {
        format!("pi1*={} not within 1.44 +- 0.01", fold.pi)
    })?;
    // Oracle: the smallest pi at which g(., pi) reaches zero away from the origin.
    let oracle = bisect(|pi| max_g(1.0, pi), 1.0, 2.0);
    ensure((fold.pi - oracle).abs() < 1e-6, || {
        format!("pi1*={} vs bisection oracle {oracle}", fold.pi)
    })?;
    Ok(format!(
        "pi1*={:.10} oracle={oracle:.10} eps*={:.6}",
        fold.pi, fold.eps
    ))
}

fn c2_pi1_proportional() -> Outcome {
    let mut worst: f64 = 0.0;
    for alpha in [0.25, 0.5, 1.0, 2.0] {
        for seed in 0..20 {
            let t = thresholds(&instance(alpha, seed)).map_err(|e| e.to_string())?;
            let err = (t.pi1 - (1.0 + alpha)).abs();
            worst = worst.max(err);
            ensure(err < 1e-8, || {
                format!("alpha={alpha} seed={seed}: pi1={}", t.pi1)
            })?;
        }
    }
    Ok(format!("80 instances, max |pi1 - (1+alpha)| = {worst:.2e}"))
}

fn c3_ordering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_h: f64 = 0.0;
    for seed in 0..100 {
        let (g, alpha) = random_alpha_instance(&mut rng, 1000 + seed);
        let mut t = thresholds(&g).map_err(|e| e.to_string())?;
        t.pi1_star = Some(pi1_star(&tanh(), alpha).map_err(|e| e.to_string())?.pi);
        ensure(t.ordering_holds(1e-9), || {
            format!("seed {seed}: ordering fails {t:?}")
        })?;
        let lambda = general_eigenvalues(&h_matrix(&g))
            .map_err(|e| e.to_string())?
            .max_real();
        worst_h = worst_h.max((lambda - 1.0).abs());
        ensure((lambda - 1.0).abs() < 1e-10, || {
            format!("seed {seed}: lambda_n(H)={lambda}")
        })?;
    }
    Ok(format!(
        "100 instances, max |lambda_n(H) - 1| = {worst_h:.2e}"
    ))
}

fn c4_bistability() -> Outcome {
    let g = instance(1.0, 1);
    let s = SystemInstance::tanh(g, 1.7).map_err(|e| e.to_string())?;
    let eqs = find_all(&s, &SeedSpec::default()).map_err(|e| e.to_string())?;
    let classes: Vec<Classification> = eqs.iter().map(|e| e.classification).collect();
    ensure(
        classes
            == [
                Classification::Stable,
                Classification::Unstable,
                Classification::Stable,
            ],
        || format!("classifications {classes:?}"),
    )?;
    ensure(eqs[0].norm_inf() < 1e-12, || {
        "first equilibrium is not the origin".into()
    })?;
    let f = |e: f64| g_scalar(1.0, 1.7, e);
    let eps2 = bisect(f, 0.05, 0.7);
    let eps1 = bisect(f, 0.7, 3.0);
    ensure(
        (eps2 - 0.19).abs() <= 0.01 && (eps1 - 1.43).abs() <= 0.01,
        || format!("oracle roots {eps2}, {eps1}"),
    )?;
    for (e, root) in eqs[1..].iter().zip([eps2, eps1]) {
        ensure(e.is_consensus && (e.mean() - root).abs() < 1e-8, || {
            format!("equilibrium {:?} vs root {root}", e.state.as_slice())
        })?;
    }
    let report = basin_probe(&s, &[0.05, 2.0]).map_err(|e| e.to_string())?;
    ensure(report.entries[0].1 == Attractor::Origin, || {
        "0.05*1 does not reach the origin".into()
    })?;
    ensure(report.entries[1].1 == Attractor::Upper, || {
        "2*1 does not reach the upper branch".into()
    })?;
    Ok(format!(
        "eps2={eps2:.6} eps1={eps1:.6}, basins origin/upper"
    ))
}

fn c5_pitchfork() -> Outcome {
    let g = instance(0.0, 3);
    let t = thresholds(&g).map_err(|e| e.to_string())?;
    let upper = (0.99 * t.pi2).min(5.0);
    let mut grid = pi_grid(0.05, upper, 0.01).map_err(|e| e.to_string())?;
    grid.retain(|&p| p <= 0.99 * t.pi1 || p >= 1.01 * t.pi1);
    let res = sweep(&g, &tanh(), &grid, &SweepOptions::default()).map_err(|e| e.to_string())?;
    let mut below = 0;
    let mut above = 0;
    for &pi in &grid {
        let s = SystemInstance::tanh(g.clone(), pi).map_err(|e| e.to_string())?;
        let eqs = find_all(&s, &SeedSpec::default()).map_err(|e| e.to_string())?;
        let recorded = res.equilibria_at(pi).len();
        if pi <= 0.99 * t.pi1 {
            ensure(
                eqs.len() == 1 && eqs[0].is_stable() && eqs[0].norm_inf() < 1e-12,
                || format!("pi={pi}: {} equilibria below pi1", eqs.len()),
            )?;
            ensure(recorded == 1, || {
                format!("pi={pi}: sweep recorded {recorded}")
            })?;
            below += 1;
        } else {
            ensure(eqs.len() == 3 && recorded == 3, || {
                format!("pi={pi}: {} equilibria ({recorded} in sweep)", eqs.len())
            })?;
            ensure(eqs[0].classification == Classification::Unstable, || {
                format!("pi={pi}: origin is {}", eqs[0].classification)
            })?;
            ensure(eqs[1].is_stable() && eqs[2].is_stable(), || {
                format!("pi={pi}: branches not stable")
            })?;
            let asym = (&eqs[1].state + &eqs[2].state).amax();
            ensure(asym < 1e-8, || {
                format!("pi={pi}: +-x* asymmetry {asym:.2e}")
            })?;
            above += 1;
        }
    }
    Ok(format!(
        "pi1={:.6} pi2={:.4}; {below} points below, {above} points in [1.01 pi1, {upper:.3}]",
        t.pi1, t.pi2
    ))
}

fn fig2b_sweep() -> Result<(Hypergraph2, SweepResult), String> {
    let g = instance(1.0, 1);
    let res =
        sweep(&g, &tanh(), &default_grid(), &SweepOptions::default()).map_err(|e| e.to_string())?;
    Ok((g, res))
}

fn c6_fold_collision(g: &Hypergraph2, res: &SweepResult) -> Outcome {
    let step = 0.005;
    let star = pi1_star(&tanh(), 1.0).map_err(|e| e.to_string())?.pi;
    let pi1 = thresholds(g).map_err(|e| e.to_string())?.pi1;
    let mut folded: Vec<_> = res
        .branches
        .iter()
        .filter(|b| b.fold_at.is_some())
        .collect();
    ensure(folded.len() == 2, || {
        format!("{} branches born at a fold", folded.len())
    })?;
    folded.sort_by(|a, b| a.points[0].mean().total_cmp(&b.points[0].mean()));
    let (lower, upper) = (folded[0], folded[1]);
    ensure((upper.born_at() - star).abs() <= step, || {
        format!("upper branch born at {} vs pi1*={star}", upper.born_at())
    })?;
    let fold = upper.fold_at.unwrap();
    ensure((fold - star).abs() < 1e-6, || {
        format!("refined fold {fold} vs pi1*={star}")
    })?;
    let at_pi1 = lower.at(2.0).ok_or("lower branch has no point at pi=2")?;
    let dist = at_pi1.norm_inf();
    ensure(dist < 1e-3, || {
        format!("lower branch at pi1 is {dist:.2e} from the origin")
    })?;
    let origin = res
        .branches
        .iter()
        .find(|b| b.points[0].norm_inf() == 0.0)
        .ok_or("no origin branch")?;
    let flip = origin
        .stability_change_at
        .ok_or("origin never changes stability")?;
    ensure((flip - pi1).abs() <= step, || {
        format!("origin flips at {flip}, pi1={pi1}")
    })?;
    Ok(format!(
        "upper born at {:.3} (fold {fold:.8}), lower-branch distance {dist:.1e}, origin flips at {flip}",
        upper.born_at()
    ))
}

fn c7_normal_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let (g, _) = random_alpha_instance(&mut rng, 2000 + seed);
        let nf = normal_form_coeffs(&g, &tanh()).map_err(|e| e.to_string())?;
        ensure(nf.kappa1 < 0.0 && nf.kappa2 > 0.0, || {
            format!("seed {seed}: kappa1={} kappa2={}", nf.kappa1, nf.kappa2)
        })?;
        for scale in [0.5, 0.25] {
            let scaled = g
                .with_scaled_interactions(scale)
                .map_err(|e| e.to_string())?;
            let k = normal_form_coeffs(&scaled, &tanh())
                .map_err(|e| e.to_string())?
                .kappa2;
            let dev = (k / nf.kappa2 / scale - 1.0).abs();
            worst = worst.max(dev);
            ensure(dev < 0.05, || {
                format!("seed {seed}: kappa2 ratio at scale {scale} off by {dev}")
            })?;
        }
    }
    Ok(format!(
        "20 instances, worst linearity deviation {worst:.2e}"
    ))
}

fn c8_jacobian() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let (g, _) = random_alpha_instance(&mut rng, 3000 + seed);
        let n = g.n();
        let pi = rng.random_range(0.5..5.0);
        let s = SystemInstance::tanh(g, pi).map_err(|e| e.to_string())?;
        let x = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
        let j = jacobian(&s, &x).map_err(|e| e.to_string())?;
        let h = 1e-6;
        let mut fd = DMatrix::zeros(n, n);
        for c in 0..n {
            let mut up = x.clone();
            up[c] += h;
            let mut down = x.clone();
            down[c] -= h;
            let col =
                (vector_field(&s, &up).unwrap() - vector_field(&s, &down).unwrap()) / (2.0 * h);
            fd.set_column(c, &col);
        }
        let rel = (&j - &fd).norm() / j.norm();
        worst = worst.max(rel);
        ensure(rel < 1e-6, || {
            format!("pair {seed}: relative error {rel:.2e}")
        })?;
    }
    Ok(format!("100 pairs, worst relative error {worst:.2e}"))
}

fn c9_lyapunov() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let opts = IntegrateOptions::default();
    for k in 0..10 {
        let (g, alpha) = random_alpha_instance(&mut rng, 4000 + k);
        let n = g.n();
        let t = thresholds(&g).map_err(|e| e.to_string())?;
        let star = pi1_star(&tanh(), alpha).map_err(|e| e.to_string())?.pi;
        let x0 = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));

        let s = SystemInstance::tanh(g.clone(), 0.8 * t.pi_tilde1).map_err(|e| e.to_string())?;
        let v = lyapunov_decrease_test(&s, &x0, &opts, 1e-9).map_err(|e| e.to_string())?;
        ensure(v.decreasing, || {
            format!(
                "trajectory {k}: V grew by {:.2e} at t={}",
                v.max_increase, v.worst_time
            )
        })?;

        let s = SystemInstance::tanh(g, 0.9 * star).map_err(|e| e.to_string())?;
        let sup = sup_norm_decrease_test(&s, &x0, &opts, 1e-12).map_err(|e| e.to_string())?;
        ensure(sup.decreasing, || {
            format!(
                "trajectory {k}: sup norm grew by {:.2e} at t={}",
                sup.max_increase, sup.worst_time
            )
        })?;
    }
    Ok("10 trajectories: V strictly decreasing, sup norm non-increasing".into())
}

fn c10_attracting_set() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let opts = IntegrateOptions {
        t_max: 400.0,
        ..IntegrateOptions::default()
    };
    let mut latest_entry: f64 = 0.0;
    for k in 0..50 {
        let (g, _) = random_alpha_instance(&mut rng, 5000 + k);
        let n = g.n();
        let pi = rng.random_range(0.5..5.0);
        let mut x0 = DVector::from_fn(n, |_, _| rng.random_range(-10.0..10.0));
        let i = rng.random_range(0..n);
        x0[i] = if rng.random_bool(0.5) { 10.0 } else { -10.0 };
        let s = SystemInstance::tanh(g, pi).map_err(|e| e.to_string())?;
        let traj = integrate(&s, &x0, &opts).map_err(|e| e.to_string())?;
        let bound = pi + 1e-6;
        let entry = traj
            .states
            .iter()
            .position(|x| x.amax() <= bound)
            .ok_or_else(|| format!("trajectory {k} never enters the set (pi={pi})"))?;
        let leaves = traj.states[entry..].iter().position(|x| x.amax() > bound);
        ensure(leaves.is_none(), || {
            format!("trajectory {k} leaves the set after entering")
        })?;
        latest_entry = latest_entry.max(traj.times[entry]);
    }
    Ok(format!(
        "50 trajectories, latest entry at t={latest_entry:.2}"
    ))
}

fn c11_necessary_condition(res: &SweepResult) -> Outcome {
    let mut checked = 0;
    for b in &res.branches {
        for e in &b.points {
            checked += 1;
            ensure(!(e.norm_inf() > 1e-6 && e.pi < 1.0 - 1e-9), || {
                format!("nontrivial equilibrium at pi={}", e.pi)
            })?;
        }
    }
    Ok(format!("{checked} recorded points"))
}

fn c12_k3() -> Outcome {
    let a = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 });
    let slices = (0..3)
        .map(|i| {
            DMatrix::from_fn(
                3,
                3,
                |j, k| if j != i && k != i && j != k { 1.0 } else { 0.0 },
            )
        })
        .collect();
    let g = Hypergraph2::build(
        PairwiseMatrix::new(a).map_err(|e| e.to_string())?,
        TwoInteractionTensor::new(slices).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let t = thresholds(&g).map_err(|e| e.to_string())?;
    ensure((t.pi1 - 2.0).abs() < 1e-9, || format!("pi1={}", t.pi1))?;
    ensure((t.pi_tilde1 - 1.0).abs() < 1e-9, || {
        format!("pi_tilde1={}", t.pi_tilde1)
    })?;
    ensure(t.pi2 == f64::INFINITY, || format!("pi2={}", t.pi2))?;
    let s = SystemInstance::tanh(g, 1.0).map_err(|e| e.to_string())?;
    let j = jacobian(&s, &DVector::zeros(3)).map_err(|e| e.to_string())?;
    let mut eig = general_eigenvalues(&j)
        .map_err(|e| e.to_string())?
        .real_parts();
    eig.sort_by(f64::total_cmp);
    let expected = [-5.0, -5.0, -2.0];
    ensure(
        eig.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-9),
        || format!("origin spectrum {eig:?}"),
    )?;
    Ok(format!(
        "pi1={} pi_tilde1={} pi2=inf spectrum {eig:?}",
        t.pi1, t.pi_tilde1
    ))
}

struct Suite {
    failures: usize,
    total: Duration,
}

impl Suite {
    fn run(&mut self, id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        self.total += elapsed;
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            self.failures += 1;
        }
        let slow = if elapsed > budget {
            " (over runtime target)"
        } else {
            ""
        };
        println!(
            "{status} criterion {id:>2} {name}: {detail} [{:.2}s{slow}]",
            elapsed.as_secs_f64()
        );
    }
}

fn main() -> ExitCode {
    let mut suite = Suite {
        failures: 0,
        total: Duration::ZERO,
    };
    let secs = Duration::from_secs;
    suite.run(1, "fold location pi1*(alpha=1)", secs(1), c1_pi1_star);
    suite.run(2, "pi1 = 1 + alpha", secs(5), c2_pi1_proportional);
    suite.run(3, "threshold ordering", secs(10), c3_ordering);
    suite.run(4, "bistability at pi=1.7", secs(10), c4_bistability);
    suite.run(5, "pitchfork without interactions", secs(30), c5_pitchfork);

    let start = Instant::now();
    let shared = catch_unwind(fig2b_sweep).unwrap_or_else(|_| Err("sweep panicked".into()));
    let sweep_time = start.elapsed();
    suite.total += sweep_time;
    println!(
        "     shared alpha=1 sweep on 0.005:0.005:5 took {:.2}s",
        sweep_time.as_secs_f64()
    );
    match &shared {
        Ok((g, res)) => suite.run(6, "fold and collision structure", secs(180), || {
            c6_fold_collision(g, res)
        }),
        Err(e) => suite.run(6, "fold and collision structure", secs(180), || {
            Err(e.clone())
        }),
    }
    suite.run(
        7,
        "normal-form signs and linearity",
        secs(10),
        c7_normal_form,
    );
    suite.run(
        8,
        "Jacobian against finite differences",
        secs(10),
        c8_jacobian,
    );
    suite.run(9, "Lyapunov decrease", secs(30), c9_lyapunov);
    suite.run(10, "attracting set", secs(30), c10_attracting_set);
    match &shared {
        Ok((_, res)) => suite.run(11, "no decisions below pi=1", secs(5), || {
            c11_necessary_condition(res)
        }),
        Err(e) => suite.run(11, "no decisions below pi=1", secs(5), || Err(e.clone())),
    }
    suite.run(12, "K3 closed forms", secs(1), c12_k3);

    println!(
        "{} of 12 criteria passed in {:.2}s",
        12 - suite.failures,
        suite.total.as_secs_f64()
    );
    if suite.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
