mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hypernet::bifurcation::{diagram_svg, pi_grid, SweepOptions};
use hypernet::dynamics::IntegrateOptions;
use hypernet::equilibria::equilibria_to_csv;
use hypernet::hypergraph::{from_text, random_instance, to_text, validate_text, GenerationConfig};
use hypernet::{
    find_all, integrate, normal_form_coeffs, pi1_star, sweep, thresholds, Hypergraph2, SeedSpec,
    SigmoidFamily, SystemInstance,
};
use nalgebra::DVector;

#[derive(Parser, Debug)]
#[command(
    name = "hypernet",
    version,
    about = "Decision dynamics on order-2 hypernetworks"
)]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Flat key=value file supplying defaults for the other flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for outputs and the run manifest.
    #[arg(long, env = "HYPERNET_OUTPUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a random hypernetwork and write it in the sectioned text format.
    Generate(GenerateArgs),
    /// Check a hypernetwork file against every structural assumption.
    Validate(InputArgs),
    /// Print the stability thresholds of a hypernetwork.
    Thresholds(InputArgs),
    /// Integrate the dynamics and write the trajectory.
    Simulate(SimulateArgs),
    /// Search for equilibria at a fixed social effort.
    Equilibria(EquilibriaArgs),
    /// Sweep the social effort and write the bifurcation diagram.
    Sweep(SweepArgs),
    /// Print the pitchfork normal-form coefficients.
    NormalForm(InputArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(2..))]
    n: u64,
    #[arg(long, default_value_t = 0.8)]
    p2: f64,
    #[arg(long, default_value_t = 0.2)]
    p3: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "hypergraph.txt")]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Hypernetwork file.
    #[arg(long, short)]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    pi: f64,
    /// Initial state: one number c for c*1, or a comma-separated vector.
    #[arg(long, default_value = "0")]
    x0: String,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, default_value_t = 200.0)]
    t_max: f64,
    #[arg(long, default_value_t = 1e-10)]
    residual_tol: f64,
    #[arg(long, default_value = "trajectory.csv")]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SeedArgs {
    /// Consensus-line seeds per sign.
    #[arg(long, default_value_t = 21)]
    grid_points: usize,
    /// Random seeds per search.
    #[arg(long, default_value_t = 20)]
    random_seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SeedArgs {
    fn spec(&self) -> SeedSpec {
        SeedSpec {
            grid_points: self.grid_points,
            random: self.random_seeds,
            seed: self.seed,
            radius: None,
        }
    }
}

#[derive(Args, Debug)]
struct EquilibriaArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    pi: f64,
    #[command(flatten)]
    seeds: SeedArgs,
    #[arg(long, default_value = "equilibria.csv")]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.005)]
    pi_min: f64,
    #[arg(long, default_value_t = 5.0)]
    pi_max: f64,
    #[arg(long, default_value_t = 0.005)]
    pi_step: f64,
    #[command(flatten)]
    seeds: SeedArgs,
    /// Worker threads for the per-pi searches (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Also write an SVG scatter of one coordinate.
    #[arg(long)]
    svg: bool,
    /// Coordinate plotted in the SVG (1-based).
    #[arg(long, default_value_t = 1)]
    coord: usize,
    #[arg(long, default_value = "diagram.csv")]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

/// Errors that should exit with the usage status.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// Records the resolved configuration in the output directory.
struct Manifest {
    dir: PathBuf,
    text: String,
}

impl Manifest {
    fn new(command: &str, common: &Common) -> Result<Self> {
        fs::create_dir_all(&common.out_dir)
            .with_context(|| format!("creating {}", common.out_dir.display()))?;
        let mut text = format!("# hypernet {} {command}\n", env!("CARGO_PKG_VERSION"));
        writeln!(text, "out-dir={}", common.out_dir.display())?;
        Ok(Self {
            dir: common.out_dir.clone(),
            text,
        })
    }

    fn set(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        writeln!(self.text, "{key}={value}").unwrap();
        self
    }

    fn write(&self) -> Result<()> {
        let path = self.dir.join("manifest.txt");
        fs::write(&path, &self.text).with_context(|| format!("writing {}", path.display()))
    }

    fn output(&self, name: &Path) -> PathBuf {
        self.dir.join(name)
    }
}

fn load(path: &Path) -> Result<Hypergraph2> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    from_text(&text).with_context(|| format!("loading {}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run_generate(a: &GenerateArgs) -> Result<()> {
    let mut m = Manifest::new("generate", &a.common)?;
    m.set("n", a.n)
        .set("p2", a.p2)
        .set("p3", a.p3)
        .set("alpha", a.alpha)
        .set("seed", a.seed)
        .set("out", a.out.display());
    m.write()?;
    let cfg = GenerationConfig {
        n: a.n as usize,
        p2: a.p2,
        p3: a.p3,
        alpha: a.alpha,
        seed: a.seed,
    };
    let g = random_instance(&cfg).map_err(|e| match e {
        hypernet::Error::InvalidParameter { .. } | hypernet::Error::TooFewNodes { .. } => {
            usage(e.to_string())
        }
        e => e.into(),
    })?;
    let path = m.output(&a.out);
    write_file(&path, &to_text(&g))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run_validate(a: &InputArgs) -> Result<()> {
    let mut m = Manifest::new("validate", &a.common)?;
    m.set("input", a.input.display());
    m.write()?;
    let text =
        fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let report = validate_text(&text)?;
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        match &c.detail {
            Some(d) => println!("{status} {}: {d}", c.assumption),
            None => println!("{status} {}", c.assumption),
        }
    }
    match report.alpha {
        Some(alpha) => println!("alpha={alpha}"),
        None => println!("alpha=none"),
    }
    if !report.passed() {
        bail!(
            "{} assumption(s) violated",
            report.checks.iter().filter(|c| !c.passed).count()
        );
    }
    Ok(())
}

fn run_thresholds(a: &InputArgs) -> Result<()> {
    let mut m = Manifest::new("thresholds", &a.common)?;
    m.set("input", a.input.display());
    m.write()?;
    let g = load(&a.input)?;
    let mut t = thresholds(&g)?;
    if let Some(alpha) = g.alpha() {
        t.pi1_star = Some(pi1_star(&SigmoidFamily::tanh(), alpha)?.pi);
    }
    print!("{}", t.to_kv());
    if !t.ordering_holds(1e-9) {
        bail!("threshold ordering pi_tilde1 <= 1 <= pi1_star <= pi1 violated");
    }
    Ok(())
}

fn parse_state(spec: &str, n: usize) -> Result<DVector<f64>> {
    let values = spec
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| usage(format!("invalid --x0 {spec:?}: {e}")))?;
    match values.len() {
        1 => Ok(DVector::from_element(n, values[0])),
        k if k == n => Ok(DVector::from_vec(values)),
        k => Err(usage(format!(
            "--x0 has {k} entries, the network has {n} nodes"
        ))),
    }
}

fn check_pi(pi: f64) -> Result<()> {
    if !(pi > 0.0 && pi.is_finite()) {
        return Err(usage(format!("--pi must be positive, got {pi}")));
    }
    Ok(())
}

fn run_simulate(a: &SimulateArgs) -> Result<()> {
    let mut m = Manifest::new("simulate", &a.common)?;
    m.set("input", a.input.display())
        .set("pi", a.pi)
        .set("x0", &a.x0)
        .set("dt", a.dt)
        .set("t-max", a.t_max)
        .set("residual-tol", a.residual_tol)
        .set("out", a.out.display());
    m.write()?;
    check_pi(a.pi)?;
    if !(a.dt > 0.0 && a.t_max > 0.0) {
        return Err(usage("--dt and --t-max must be positive"));
    }
    let g = load(&a.input)?;
    let x0 = parse_state(&a.x0, g.n())?;
    let s = SystemInstance::tanh(g, a.pi)?;
    let opts = IntegrateOptions {
        dt: a.dt,
        t_max: a.t_max,
        residual_tol: a.residual_tol,
    };
    let traj = integrate(&s, &x0, &opts)?;
    let path = m.output(&a.out);
    write_file(&path, &traj.to_csv())?;
    let end: Vec<String> = traj
        .final_state()
        .iter()
        .map(|v| format!("{v:.6}"))
        .collect();
    println!(
        "converged={} residual={:e}",
        traj.converged, traj.final_residual
    );
    println!("final=[{}]", end.join(", "));
    println!("wrote {}", path.display());
    Ok(())
}

fn run_equilibria(a: &EquilibriaArgs) -> Result<()> {
    let mut m = Manifest::new("equilibria", &a.common)?;
    m.set("input", a.input.display())
        .set("pi", a.pi)
        .set("grid-points", a.seeds.grid_points)
        .set("random-seeds", a.seeds.random_seeds)
        .set("seed", a.seeds.seed)
        .set("out", a.out.display());
    m.write()?;
    check_pi(a.pi)?;
    let s = SystemInstance::tanh(load(&a.input)?, a.pi)?;
    let eqs = find_all(&s, &a.seeds.spec())?;
    let path = m.output(&a.out);
    write_file(&path, &equilibria_to_csv(&eqs))?;
    for (k, e) in eqs.iter().enumerate() {
        println!(
            "{k}: {} |x|={:.6} consensus={} max_re={:.3e}",
            e.classification,
            e.norm_inf(),
            e.is_consensus,
            e.max_real_eig
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn run_sweep(a: &SweepArgs) -> Result<()> {
    let mut m = Manifest::new("sweep", &a.common)?;
    m.set("input", a.input.display())
        .set("pi-min", a.pi_min)
        .set("pi-max", a.pi_max)
        .set("pi-step", a.pi_step)
        .set("grid-points", a.seeds.grid_points)
        .set("random-seeds", a.seeds.random_seeds)
        .set("seed", a.seeds.seed)
        .set("svg", a.svg)
        .set("coord", a.coord)
        .set("out", a.out.display());
    m.write()?;
    let grid = pi_grid(a.pi_min, a.pi_max, a.pi_step).map_err(|e| usage(e.to_string()))?;
    let g = load(&a.input)?;
    if a.coord == 0 || a.coord > g.n() {
        return Err(usage(format!("--coord must be in 1..={}", g.n())));
    }
    let opts = SweepOptions {
        seeds: a.seeds.spec(),
        ..SweepOptions::default()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.workers)
        .build()?;
    let res = pool.install(|| sweep(&g, &SigmoidFamily::tanh(), &grid, &opts))?;
    let path = m.output(&a.out);
    write_file(&path, &res.to_csv())?;
    println!("grid points={} branches={}", grid.len(), res.branches.len());
    for b in res
        .branches
        .iter()
        .filter(|b| b.fold_at.is_some() || b.stability_change_at.is_some())
    {
        print!("branch {} born at pi={}", b.id, b.born_at());
        if let Some(f) = b.fold_at {
            print!(" fold={f:.6}");
        }
        if let Some(c) = b.stability_change_at {
            print!(" stability_change={c}");
        }
        println!();
    }
    if let Some((lo, hi)) = res.bistability {
        println!("bistability=[{lo}, {hi}]");
    }
    println!("wrote {}", path.display());
    if a.svg {
        let svg_path = path.with_extension("svg");
        write_file(&svg_path, &diagram_svg(&res, a.coord - 1))?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

fn run_normal_form(a: &InputArgs) -> Result<()> {
    let mut m = Manifest::new("normal-form", &a.common)?;
    m.set("input", a.input.display());
    m.write()?;
    let nf = normal_form_coeffs(&load(&a.input)?, &SigmoidFamily::tanh())?;
    print!("{}", nf.to_kv());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => run_generate(a),
        Command::Validate(a) => run_validate(a),
        Command::Thresholds(a) => run_thresholds(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Equilibria(a) => run_equilibria(a),
        Command::Sweep(a) => run_sweep(a),
        Command::NormalForm(a) => run_normal_form(a),
    }
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args_os().collect()) {
        Ok(args) => args,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
