//! Parameter sweeps in the social effort `pi`, branch threading, folds and
//! the bistability window.

mod svg;

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::dynamics::{integrate, IntegrateOptions, SystemInstance};
use crate::equilibria::{
    classify, consensus_roots, find_all, find_from_seeds, newton_find, pi1_star, Classification,
    Equilibrium, ScalarReduced, SeedSpec,
};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph2;
use crate::nonlinearity::SigmoidFamily;
use crate::spectra::thresholds;

pub use svg::diagram_svg;

/// States closer than this to zero count as the origin.
pub const ORIGIN_TOL: f64 = 1e-6;
/// Attractor identification radius after convergence.
pub const ATTRACTOR_TOL: f64 = 1e-4;

/// `pi_min, pi_min + step, ...` up to `pi_max` (inclusive within half a step).
pub fn pi_grid(pi_min: f64, pi_max: f64, step: f64) -> Result<Vec<f64>> {
    for (name, value) in [("pi_min", pi_min), ("pi_max", pi_max), ("pi_step", step)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                value,
                reason: "must be finite and positive",
            });
        }
    }
    if pi_max < pi_min {
        return Err(Error::InvalidParameter {
            name: "pi_max",
            value: pi_max,
            reason: "must not be below pi_min",
        });
    }
    let count = ((pi_max - pi_min) / step + 0.5).floor() as usize + 1;
    // Rounded so that decimal grids print as typed (1.445, not 1.4449999...).
    Ok((0..count)
        .map(|k| ((pi_min + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// The grid used for the published diagrams: 0.005, 0.010, ..., 5.
pub fn default_grid() -> Vec<f64> {
    (1..=1000).map(|k| k as f64 / 200.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub seeds: SeedSpec,
    /// Refine fold locations with an extended Newton system.
    pub refine_folds: bool,
    /// Matching radius for branches with a single point.
    pub max_jump: f64,
    /// Floor of the slope-based matching radius.
    pub min_jump: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            seeds: SeedSpec::default(),
            refine_folds: true,
            max_jump: 0.5,
            min_jump: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchEnd {
    /// Still present at the last grid value.
    Open,
    /// Ran into the equilibrium carried by branch `into` at `pi`.
    Merged { pi: f64, into: usize },
    /// No equilibrium within the matching radius after `pi`.
    Lost { pi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationBranch {
    pub id: usize,
    /// Points in increasing `pi`; each equilibrium carries its own `pi`.
    pub points: Vec<Equilibrium>,
    pub fold_at: Option<f64>,
    pub stability_change_at: Option<f64>,
    pub end: BranchEnd,
}

impl BifurcationBranch {
    pub fn born_at(&self) -> f64 {
        self.points[0].pi
    }

    pub fn last(&self) -> &Equilibrium {
        self.points.last().expect("branches are never empty")
    }

    pub fn at(&self, pi: f64) -> Option<&Equilibrium> {
        self.points.iter().find(|e| e.pi == pi)
    }

    fn matching_radius(&self, step: f64, opts: &SweepOptions) -> f64 {
        match self.points.as_slice() {
            [.., a, b] => {
                let slope = (&b.state - &a.state).amax() / (b.pi - a.pi);
                (10.0 * step * slope).clamp(opts.min_jump, opts.max_jump)
            }
            _ => opts.max_jump,
        }
    }

    /// First change of non-marginal classification. A marginal point in
    /// between is taken as the crossing.
    fn locate_stability_change(&self) -> Option<f64> {
        let mut reference = None;
        let mut first_marginal = None;
        for e in &self.points {
            match (e.classification, reference) {
                (Classification::Marginal, _) => {
                    first_marginal.get_or_insert(e.pi);
                }
                (c, None) => {
                    reference = Some(c);
                    first_marginal = None;
                }
                (c, Some(r)) if c != r => return Some(first_marginal.unwrap_or(e.pi)),
                _ => first_marginal = None,
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub branches: Vec<BifurcationBranch>,
    /// First run of grid values where the origin and some nontrivial
    /// equilibrium are both stable.
    pub bistability: Option<(f64, f64)>,
}

impl SweepResult {
    /// All equilibria recorded at grid value `pi`, one per branch.
    pub fn equilibria_at(&self, pi: f64) -> Vec<&Equilibrium> {
        self.branches.iter().filter_map(|b| b.at(pi)).collect()
    }

    /// CSV `pi,branch_id,stable,x_norm_inf,x1,...,xn`, ordered by `pi` then branch.
    pub fn to_csv(&self) -> String {
        let n = self.branches.first().map_or(0, |b| b.points[0].state.len());
        let mut out = String::from("pi,branch_id,stable,x_norm_inf");
        for i in 1..=n {
            write!(out, ",x{i}").unwrap();
        }
        out.push('\n');
        let mut rows: Vec<(f64, usize, &Equilibrium)> = self
            .branches
            .iter()
            .flat_map(|b| b.points.iter().map(move |e| (e.pi, b.id, e)))
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (pi, id, e) in rows {
            write!(out, "{pi},{id},{},{}", e.is_stable(), e.norm_inf()).unwrap();
            for v in e.state.iter() {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "pi_grid",
            value: 0.0,
            reason: "grid is empty",
        });
    }
    if let Some(&bad) = grid.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(Error::InvalidParameter {
            name: "pi_grid",
            value: bad,
            reason: "grid values must be finite and positive",
        });
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "pi_grid",
            value: w[1],
            reason: "grid must be strictly increasing",
        });
    }
    Ok(())
}

/// Equilibria on every grid value, threaded into branches.
///
/// The per-`pi` searches run in parallel. Threading is a sequential pass that
/// also reseeds Newton from the previous grid value's equilibria, so a branch
/// the seed set misses is still followed.
pub fn sweep(
    g: &Hypergraph2,
    psi: &SigmoidFamily,
    grid: &[f64],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    check_grid(grid)?;
    let systems = grid
        .iter()
        .map(|&pi| SystemInstance::new(g.clone(), psi.clone(), pi))
        .collect::<Result<Vec<_>>>()?;
    let searched = systems
        .par_iter()
        .map(|s| find_all(s, &opts.seeds))
        .collect::<Result<Vec<_>>>()?;

    let mut branches: Vec<BifurcationBranch> = Vec::new();
    let mut previous: Vec<Equilibrium> = Vec::new();
    for (k, (s, found)) in systems.iter().zip(searched).enumerate() {
        let current = if k == 0 {
            found
        } else {
            let seeds: Vec<DVector<f64>> = found
                .iter()
                .chain(previous.iter())
                .map(|e| e.state.clone())
                .collect();
            find_from_seeds(s, &seeds)?
        };
        if k == 0 {
            for e in &current {
                start_branch(&mut branches, e.clone());
            }
        } else {
            thread_step(&mut branches, &current, s, grid[k] - grid[k - 1], opts);
        }
        previous = current;
    }
    for b in &mut branches {
        b.stability_change_at = b.locate_stability_change();
    }
    let bistability = bistable_run(grid, &branches);
    Ok(SweepResult {
        grid: grid.to_vec(),
        branches,
        bistability,
    })
}

fn start_branch(branches: &mut Vec<BifurcationBranch>, e: Equilibrium) -> usize {
    let id = branches.len();
    branches.push(BifurcationBranch {
        id,
        points: vec![e],
        fold_at: None,
        stability_change_at: None,
        end: BranchEnd::Open,
    });
    id
}

fn thread_step(
    branches: &mut Vec<BifurcationBranch>,
    current: &[Equilibrium],
    s: &SystemInstance,
    step: f64,
    opts: &SweepOptions,
) {
    let active: Vec<usize> = branches
        .iter()
        .filter(|b| b.end == BranchEnd::Open)
        .map(|b| b.id)
        .collect();
    let radius: Vec<f64> = active
        .iter()
        .map(|&b| branches[b].matching_radius(step, opts))
        .collect();
    let distance = |b: usize, e: usize| (&branches[b].last().state - &current[e].state).amax();

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (slot, &b) in active.iter().enumerate() {
        for e in 0..current.len() {
            let d = distance(b, e);
            if d <= radius[slot] {
                pairs.push((d, slot, e));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut owner: Vec<Option<usize>> = vec![None; current.len()];
    let mut matched = vec![false; active.len()];
    for &(_, slot, e) in &pairs {
        if !matched[slot] && owner[e].is_none() {
            matched[slot] = true;
            owner[e] = Some(active[slot]);
        }
    }

    // Branches left without a partner either ran into an equilibrium that
    // another branch continues, or disappeared.
    let mut ends = Vec::new();
    for (slot, &b) in active.iter().enumerate() {
        if matched[slot] {
            continue;
        }
        let nearest = (0..current.len())
            .map(|e| (distance(b, e), e))
            .min_by(|x, y| x.0.total_cmp(&y.0));
        ends.push(match nearest {
            Some((d, e)) if d <= radius[slot] => (b, Some(e)),
            _ => (b, None),
        });
    }
    for (e, o) in owner.iter().enumerate() {
        if let Some(b) = o {
            branches[*b].points.push(current[e].clone());
        }
    }
    for (b, target) in ends {
        let last_pi = branches[b].last().pi;
        branches[b].end = match target {
            Some(e) => {
                branches[b].points.push(current[e].clone());
                BranchEnd::Merged {
                    pi: current[e].pi,
                    into: owner[e].expect("merge targets are owned"),
                }
            }
            None => BranchEnd::Lost { pi: last_pi },
        };
    }

    let newborn: Vec<usize> = (0..current.len()).filter(|&e| owner[e].is_none()).collect();
    let continuing: Vec<usize> = (0..current.len()).filter(|&e| owner[e].is_some()).collect();
    let gap = |a: usize, b: usize| (&current[a].state - &current[b].state).amax();
    let mut ids = vec![usize::MAX; current.len()];
    for &e in &newborn {
        ids[e] = start_branch(branches, current[e].clone());
    }

    // A saddle-node pair is born together: two new equilibria that are
    // mutual nearest neighbours and closer to each other than to anything
    // already being followed.
    let nearest_newborn = |e: usize| {
        newborn
            .iter()
            .filter(|&&o| o != e)
            .min_by(|&&a, &&b| gap(e, a).total_cmp(&gap(e, b)))
            .copied()
    };
    let nearest_continuing = |e: usize| {
        continuing
            .iter()
            .map(|&c| gap(e, c))
            .fold(f64::INFINITY, f64::min)
    };
    for &e in &newborn {
        let Some(partner) = nearest_newborn(e) else {
            continue;
        };
        if e > partner || nearest_newborn(partner) != Some(e) {
            continue;
        }
        let d = gap(e, partner);
        if d >= nearest_continuing(e) || d >= nearest_continuing(partner) {
            continue;
        }
        let bracket = (s.pi() - step, s.pi());
        let fold = if opts.refine_folds {
            refine_fold(s, &current[e].state, &current[partner].state, bracket)
        } else {
            None
        };
        let fold = fold.unwrap_or(s.pi());
        branches[ids[e]].fold_at = Some(fold);
        branches[ids[partner]].fold_at = Some(fold);
    }
}

/// Newton on the extended system `f(x, pi) = 0, J(x, pi) phi = 0,
/// l^T phi = 1` started from the midpoint of a freshly born pair. Returns the
/// fold parameter if it converges near the bracket.
fn refine_fold(
    s: &SystemInstance,
    a: &DVector<f64>,
    b: &DVector<f64>,
    bracket: (f64, f64),
) -> Option<f64> {
    let n = a.len();
    let diff = a - b;
    let norm = diff.norm();
    if norm == 0.0 {
        return None;
    }
    let l = diff / norm;
    let mut z = DVector::zeros(2 * n + 1);
    z.rows_mut(0, n).copy_from(&((a + b) * 0.5));
    z.rows_mut(n, n).copy_from(&l);
    z[2 * n] = bracket.1;

    let residual = |z: &DVector<f64>| -> Option<DVector<f64>> {
        let s = s.with_pi(z[2 * n]).ok()?;
        let x = z.rows(0, n).into_owned();
        let phi = z.rows(n, n).into_owned();
        let mut r = DVector::zeros(2 * n + 1);
        r.rows_mut(0, n).copy_from(&s.field_unchecked(&x));
        r.rows_mut(n, n)
            .copy_from(&(s.jacobian_unchecked(&x) * &phi));
        r[2 * n] = l.dot(&phi) - 1.0;
        Some(r)
    };

    for _ in 0..50 {
        let r = residual(&z)?;
        if r.amax() < 1e-11 {
            let width = bracket.1 - bracket.0;
            let pi = z[2 * n];
            return (pi > bracket.0 - width && pi < bracket.1 + width).then_some(pi);
        }
        let mut jac = DMatrix::zeros(2 * n + 1, 2 * n + 1);
        for j in 0..2 * n + 1 {
            let h = 1e-7 * z[j].abs().max(1.0);
            let mut up = z.clone();
            up[j] += h;
            let mut down = z.clone();
            down[j] -= h;
            jac.set_column(j, &((residual(&up)? - residual(&down)?) / (2.0 * h)));
        }
        z -= jac.lu().solve(&r)?;
    }
    None
}

fn bistable_run(grid: &[f64], branches: &[BifurcationBranch]) -> Option<(f64, f64)> {
    let bistable_at = |pi: f64| {
        let here: Vec<&Equilibrium> = branches.iter().filter_map(|b| b.at(pi)).collect();
        let origin = here
            .iter()
            .any(|e| e.norm_inf() < ORIGIN_TOL && e.is_stable());
        let other = here
            .iter()
            .any(|e| e.norm_inf() >= ORIGIN_TOL && e.is_stable());
        origin && other
    };
    let start = grid.iter().position(|&pi| bistable_at(pi))?;
    let len = grid[start..]
        .iter()
        .take_while(|&&pi| bistable_at(pi))
        .count();
    let (lo, hi) = (grid[start], grid[start + len - 1]);
    (lo < hi).then_some((lo, hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BistabilityInterval {
    pub lo: f64,
    pub hi: f64,
    /// Interior values at which both attractors were confirmed stable.
    pub checked: Vec<f64>,
}

/// `(pi1*(alpha), pi1)`, confirmed at five interior points by classifying
/// the origin and the upper consensus equilibrium.
pub fn bistability_interval(g: &Hypergraph2, psi: &SigmoidFamily) -> Result<BistabilityInterval> {
    let alpha = g.alpha().ok_or(Error::NotProportional)?;
    if alpha == 0.0 {
        return Err(Error::NoBistability { alpha });
    }
    let lo = pi1_star(psi, alpha)?.pi;
    let hi = thresholds(g)?.pi1;
    if lo >= hi || lo.is_nan() {
        return Err(Error::NoBistability { alpha });
    }
    let mut checked = Vec::new();
    for k in 1..=5 {
        let pi = lo + (hi - lo) * k as f64 / 6.0;
        let s = SystemInstance::new(g.clone(), psi.clone(), pi)?;
        let origin = newton_find(&s, &DVector::zeros(g.n()))?;
        if !origin.is_stable() {
            return Err(Error::BistabilityCheck {
                pi,
                reason: format!("origin is {}", origin.classification),
            });
        }
        let roots = consensus_roots(&ScalarReduced::new(alpha, pi, psi.clone())?);
        let &upper = roots.last().ok_or_else(|| Error::BistabilityCheck {
            pi,
            reason: "no consensus root".into(),
        })?;
        let eq = classify(&s, DVector::from_element(g.n(), upper))?;
        if !eq.is_stable() {
            return Err(Error::BistabilityCheck {
                pi,
                reason: format!("upper consensus equilibrium is {}", eq.classification),
            });
        }
        checked.push(pi);
    }
    Ok(BistabilityInterval { lo, hi, checked })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Attractor {
    Origin,
    Upper,
    Other(DVector<f64>),
    Unconverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinReport {
    /// `(c, attractor)` for the start `c 1`, in increasing `c`.
    pub entries: Vec<(f64, Attractor)>,
    /// The upper stable equilibrium used for identification, if any.
    pub upper: Option<DVector<f64>>,
    /// Attractor changes at most once along the radii.
    pub monotone: bool,
    /// Midpoint between the last radius sent to the origin and the first
    /// sent to the upper branch.
    pub switching_radius: Option<f64>,
}

/// Integrates from `c 1` for each radius and names the equilibrium reached.
pub fn basin_probe(s: &SystemInstance, radii: &[f64]) -> Result<BasinReport> {
    let upper = find_all(s, &SeedSpec::default())?
        .into_iter()
        .filter(|e| e.is_stable() && e.mean() > 0.0 && e.norm_inf() >= ORIGIN_TOL)
        .max_by(|a, b| a.mean().total_cmp(&b.mean()))
        .map(|e| e.state);
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);

    let opts = IntegrateOptions::default();
    let mut entries = Vec::with_capacity(radii.len());
    for c in radii {
        let traj = integrate(s, &DVector::from_element(s.n(), c), &opts)?;
        let end = traj.final_state();
        let attractor = if !traj.converged {
            Attractor::Unconverged
        } else if end.amax() < ATTRACTOR_TOL {
            Attractor::Origin
        } else if upper
            .as_ref()
            .is_some_and(|u| (u - end).amax() < ATTRACTOR_TOL)
        {
            Attractor::Upper
        } else {
            Attractor::Other(end.clone())
        };
        entries.push((c, attractor));
    }

    let changes = entries
        .windows(2)
        .filter(|w| std::mem::discriminant(&w[0].1) != std::mem::discriminant(&w[1].1))
        .count();
    let switching_radius = entries
        .windows(2)
        .find(|w| w[0].1 == Attractor::Origin && w[1].1 == Attractor::Upper)
        .map(|w| 0.5 * (w[0].0 + w[1].0));
    Ok(BasinReport {
        entries,
        upper,
        monotone: changes <= 1,
        switching_radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{random_instance, GenerationConfig};

    fn instance(alpha: f64, seed: u64) -> Hypergraph2 {
        random_instance(&GenerationConfig {
            alpha,
            seed,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn grid_construction() {
        let grid = pi_grid(0.5, 1.0, 0.1).unwrap();
        assert_eq!(grid.len(), 6);
        assert!((grid[5] - 1.0).abs() < 1e-12);
        assert!(pi_grid(1.0, 0.5, 0.1).is_err());
        assert!(pi_grid(0.5, 1.0, 0.0).is_err());
        assert_eq!(default_grid().len(), 1000);
        assert_eq!(default_grid()[999], 5.0);
    }

    #[test]
    fn grid_validation() {
        let g = instance(1.0, 1);
        let psi = SigmoidFamily::tanh();
        let opts = SweepOptions::default();
        assert!(sweep(&g, &psi, &[], &opts).is_err());
        assert!(sweep(&g, &psi, &[1.0, 1.0], &opts).is_err());
        assert!(sweep(&g, &psi, &[-1.0, 1.0], &opts).is_err());
    }

    #[test]
    fn low_effort_has_a_single_stable_origin() {
        let g = instance(1.0, 2);
        let grid = pi_grid(0.05, 0.9, 0.05).unwrap();
        let res = sweep(&g, &SigmoidFamily::tanh(), &grid, &SweepOptions::default()).unwrap();
        assert_eq!(res.branches.len(), 1);
        let b = &res.branches[0];
        assert_eq!(b.points.len(), grid.len());
        assert!(b
            .points
            .iter()
            .all(|e| e.is_stable() && e.norm_inf() == 0.0));
        assert_eq!(b.stability_change_at, None);
        assert_eq!(res.bistability, None);
    }

    #[test]
    fn pitchfork_without_interactions() {
        let g = instance(0.0, 3);
        let grid = pi_grid(0.8, 1.3, 0.01).unwrap();
        let res = sweep(&g, &SigmoidFamily::tanh(), &grid, &SweepOptions::default()).unwrap();
        assert_eq!(res.branches.len(), 3);
        let origin = &res.branches[0];
        assert!((origin.stability_change_at.unwrap() - 1.0).abs() <= 0.01 + 1e-12);
        for pi in &grid {
            let here = res.equilibria_at(*pi);
            for e in &here {
                let mirrored = here.iter().any(|o| (&o.state + &e.state).amax() < 1e-8);
                assert!(mirrored, "no mirror image at pi={pi}");
            }
        }
        assert!(res.branches.iter().all(|b| b.fold_at.is_none()));
    }

    #[test]
    fn unfolded_diagram_near_the_fold() {
        let g = instance(1.0, 1);
        let grid = pi_grid(1.3, 2.1, 0.01).unwrap();
        let res = sweep(&g, &SigmoidFamily::tanh(), &grid, &SweepOptions::default()).unwrap();
        let star = pi1_star(&SigmoidFamily::tanh(), 1.0).unwrap().pi;
        let folded: Vec<_> = res
            .branches
            .iter()
            .filter(|b| b.fold_at.is_some())
            .collect();
        assert_eq!(folded.len(), 2);
        for b in &folded {
            assert!((b.fold_at.unwrap() - star).abs() < 1e-6);
            assert!(b.born_at() >= star && b.born_at() - star <= 0.01);
        }
        let lower = folded
            .iter()
            .min_by(|a, b| a.points[0].mean().total_cmp(&b.points[0].mean()))
            .unwrap();
        assert!(matches!(lower.end, BranchEnd::Merged { into: 0, .. }));
        assert!(lower.last().norm_inf() < 1e-3);
        let (lo, hi) = res.bistability.unwrap();
        assert!(lo - star <= 0.01 && lo >= star);
        assert!(hi < 2.0 && 2.0 - hi <= 0.01 + 1e-12);
    }

    #[test]
    fn result_does_not_depend_on_worker_count() {
        let g = instance(1.0, 4);
        let grid = pi_grid(1.4, 1.6, 0.02).unwrap();
        let psi = SigmoidFamily::tanh();
        let run = || sweep(&g, &psi, &grid, &SweepOptions::default()).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        assert_eq!(run(), single.install(run));
    }

    #[test]
    fn diagram_csv_layout() {
        let g = instance(1.0, 1);
        let res = sweep(
            &g,
            &SigmoidFamily::tanh(),
            &[1.7, 1.8],
            &SweepOptions::default(),
        )
        .unwrap();
        let csv = res.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "pi,branch_id,stable,x_norm_inf,x1,x2,x3,x4,x5"
        );
        assert!(lines.next().unwrap().starts_with("1.7,0,true,0,"));
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn interval_for_unit_and_half_alpha() {
        let psi = SigmoidFamily::tanh();
        let unit = bistability_interval(&instance(1.0, 1), &psi).unwrap();
        assert!((unit.lo - 1.44).abs() < 0.01 && (unit.hi - 2.0).abs() < 1e-9);
        assert_eq!(unit.checked.len(), 5);
        let half = bistability_interval(&instance(0.5, 1), &psi).unwrap();
        assert!((half.lo - pi1_star(&psi, 0.5).unwrap().pi).abs() < 1e-12);
        assert!(1.0 <= half.lo && half.lo < half.hi && (half.hi - 1.5).abs() < 1e-9);
        assert_eq!(
            bistability_interval(&instance(0.0, 1), &psi),
            Err(Error::NoBistability { alpha: 0.0 })
        );
    }

    #[test]
    fn basin_switches_once_along_the_consensus_line() {
        let s = SystemInstance::tanh(instance(1.0, 1), 1.7).unwrap();
        let report = basin_probe(&s, &[0.05, 0.25, 2.0, 0.1, 1.0]).unwrap();
        assert_eq!(report.entries[0], (0.05, Attractor::Origin));
        assert_eq!(report.entries[2], (0.25, Attractor::Upper));
        assert_eq!(report.entries[4], (2.0, Attractor::Upper));
        assert!(report.monotone);
        let r = report.switching_radius.unwrap();
        assert!(r > 0.1 && r < 0.25);

        let low = SystemInstance::tanh(instance(1.0, 1), 1.0).unwrap();
        let report = basin_probe(&low, &[0.5, 3.0, 10.0]).unwrap();
        assert!(report.entries.iter().all(|(_, a)| *a == Attractor::Origin));
        assert_eq!(report.upper, None);
    }
}
