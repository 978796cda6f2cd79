//! `ltinact`: analyze and simulate the number of inactivations of LT codes
//! under inactivation decoding.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ltinact::analysis::{failure_lower_bound, DEFAULT_PRUNE};
use ltinact::sim::{self, AnalyticPoint, ConfigPoint, Tolerances};
use ltinact::{
    expected_inactivations, inactivation_distribution, AnalysisOptions, DegreeDistribution, Error,
    ExperimentPlan, Mode, Overhead,
};

mod grid;

const VERSION: &str = env!("CARGO_PKG_VERSION");

const EXIT_USAGE: u8 = 1;
const EXIT_TOLERANCE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "ltinact", version, about = "Inactivation decoding analysis for LT codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expected number of inactivations per overhead point.
    AnalyzeMean(CommonArgs),
    /// Full distribution of the number of inactivations for one overhead point.
    AnalyzeDist {
        #[command(flatten)]
        common: CommonArgs,
        /// Append the failure lower bound for a decoder capped at this many
        /// inactivations.
        #[arg(long)]
        n_star: Option<usize>,
    },
    /// Monte Carlo estimate of the number of inactivations.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Also write `epsilon,n,freq` rows here.
        #[arg(long)]
        pmf_out: Option<PathBuf>,
    },
    /// Run analysis and simulation and check that they agree.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Distribution for the simulation side; defaults to --dist.
        #[arg(long)]
        sim_dist: Option<String>,
        /// Largest accepted |z| of the empirical mean.
        #[arg(long, default_value_t = 3.0)]
        z_max: f64,
        /// Also compare full PMFs and require this total-variation distance.
        #[arg(long)]
        tv_max: Option<f64>,
    },
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("overhead").required(true).args(["eps", "m"])))]
struct CommonArgs {
    /// Number of input symbols.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Output symbol counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// Relative overheads: `start:end:step` or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    /// Preset name (mbms-sec3, mbms-sec4) or path to a `degree probability` file.
    #[arg(long, default_value = "mbms-sec3")]
    dist: String,
    /// Probability below which analysis states are dropped.
    #[arg(long, default_value_t = DEFAULT_PRUNE)]
    prune: f64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SimMode::CountOnly)]
    mode: SimMode,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Symbol size in bytes for full-decode mode.
    #[arg(long, default_value_t = 8)]
    symbol_bytes: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SimMode {
    CountOnly,
    FullDecode,
}

/// Everything a subcommand needs, resolved from the flags.
#[derive(Debug)]
struct RunConfig {
    subcommand: &'static str,
    k: usize,
    overhead: Overhead,
    dist: DegreeDistribution,
    dist_label: String,
    prune: f64,
    out: Option<PathBuf>,
    seed: Option<u64>,
    trials: Option<u64>,
}

impl RunConfig {
    fn resolve(subcommand: &'static str, a: &CommonArgs) -> Result<Self, Error> {
        let overhead = match (&a.eps, &a.m) {
            (Some(e), None) => Overhead::Epsilons(grid::parse_eps(e)?),
            (None, Some(m)) => Overhead::Outputs(m.clone()),
            _ => return Err(Error::InvalidPlan("give exactly one of --eps and --m".into())),
        };
        if a.prune.is_nan() || a.prune < 0.0 {
            return Err(Error::InvalidPlan("--prune must be >= 0".into()));
        }
        Ok(RunConfig {
            subcommand,
            k: a.k as usize,
            overhead,
            dist: DegreeDistribution::from_spec(&a.dist)?,
            dist_label: a.dist.clone(),
            prune: a.prune,
            out: a.out.clone(),
            seed: None,
            trials: None,
        })
    }

    fn points(&self) -> Vec<ConfigPoint> {
        self.overhead.points(self.k)
    }

    fn options(&self) -> AnalysisOptions {
        AnalysisOptions {
            prune_threshold: self.prune,
        }
    }

    fn header(&self, extra: &str) -> String {
        let overhead = match &self.overhead {
            Overhead::Outputs(m) => format!("m={}", join(m)),
            Overhead::Epsilons(e) => format!("eps={}", join(e)),
        };
        let mut h = format!(
            "# ltinact {VERSION} {} k={} {overhead} dist={} prune={:e}",
            self.subcommand, self.k, self.dist_label, self.prune
        );
        if let Some(s) = self.seed {
            h.push_str(&format!(" seed={s}"));
        }
        if let Some(t) = self.trials {
            h.push_str(&format!(" trials={t}"));
        }
        h.push_str(extra);
        h.push('\n');
        h
    }

    fn emit(&self, body: &str) -> Result<(), Error> {
        match &self.out {
            Some(p) => fs::write(p, body)?,
            None => std::io::stdout().write_all(body.as_bytes())?,
        }
        Ok(())
    }

    fn plan(&self, dist: DegreeDistribution, label: &str, s: &SimArgs) -> ExperimentPlan {
        let mut plan = ExperimentPlan::new(self.k, self.overhead.clone(), dist, label);
        plan.trials = s.trials;
        plan.master_seed = s.seed;
        plan.workers = s.workers;
        plan.symbol_bytes = s.symbol_bytes;
        plan.mode = match s.mode {
            SimMode::CountOnly => Mode::CountOnly,
            SimMode::FullDecode => Mode::FullDecode,
        };
        plan
    }
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Plain decimals for ordinary magnitudes, scientific notation otherwise.
fn fmt_prob(p: f64) -> String {
    if p == 0.0 || (1e-4..1e15).contains(&p.abs()) {
        format!("{p}")
    } else {
        format!("{p:e}")
    }
}

fn analyze_mean(cfg: &RunConfig) -> Result<u8, Error> {
    let mut rows = String::from("epsilon,expected_inactivations\n");
    let mut pruned = 0.0f64;
    for p in cfg.points() {
        let a = expected_inactivations(cfg.k, p.m, &cfg.dist, cfg.options())?;
        pruned = pruned.max(a.pruned_mass);
        rows.push_str(&format!("{:.6},{}\n", p.epsilon, fmt_prob(a.expected)));
    }
    let header = cfg.header(&format!(" max_pruned_mass={pruned:e}"));
    cfg.emit(&(header + &rows))?;
    Ok(0)
}

fn analyze_dist(cfg: &RunConfig, n_star: Option<usize>) -> Result<u8, Error> {
    let points = cfg.points();
    let [p] = points.as_slice() else {
        return Err(Error::InvalidPlan("analyze-dist takes a single --eps or --m value".into()));
    };
    if n_star.is_some_and(|n| n > cfg.k) {
        return Err(Error::InvalidPlan("--n-star must not exceed k".into()));
    }
    let a = inactivation_distribution(cfg.k, p.m, &cfg.dist, cfg.options())?;
    let mut body = cfg.header(&format!(
        " resolved_m={} pruned_mass={:e} mean={}",
        p.m,
        a.pruned_mass,
        a.mean()
    ));
    body.push_str("n,probability,cumulative\n");
    let cdf = a.cdf();
    for (n, (&f, &c)) in a.pmf.iter().zip(&cdf).enumerate() {
        body.push_str(&format!("{n},{},{}\n", fmt_prob(f), fmt_prob(c)));
    }
    if let Some(n) = n_star {
        let bound = failure_lower_bound(&cdf, n);
        body.push_str(&format!("# failure_lower_bound n_star={n} value={}\n", fmt_prob(bound)));
    }
    cfg.emit(&body)?;
    Ok(0)
}

fn simulate(cfg: &RunConfig, s: &SimArgs, pmf_out: Option<&PathBuf>) -> Result<u8, Error> {
    let plan = cfg.plan(cfg.dist.clone(), &cfg.dist_label, s);
    let stats = sim::run(&plan)?;
    cfg.emit(&(cfg.header("") + &stats.summary_csv()))?;
    if let Some(path) = pmf_out {
        fs::write(path, cfg.header("") + &stats.pmf_csv())?;
    }
    Ok(0)
}

fn compare(
    cfg: &RunConfig,
    s: &SimArgs,
    sim_dist: Option<&str>,
    z_max: f64,
    tv_max: Option<f64>,
) -> Result<u8, Error> {
    let (dist, label) = match sim_dist {
        Some(spec) => (DegreeDistribution::from_spec(spec)?, spec.to_string()),
        None => (cfg.dist.clone(), cfg.dist_label.clone()),
    };
    let plan = cfg.plan(dist, &label, s);
    plan.validate()?;
    let mut analytic = Vec::new();
    for p in cfg.points() {
        let pmf = match tv_max {
            Some(_) => Some(inactivation_distribution(cfg.k, p.m, &cfg.dist, cfg.options())?.pmf),
            None => None,
        };
        let mean = match &pmf {
            Some(f) => f.iter().enumerate().map(|(n, q)| n as f64 * q).sum(),
            None => expected_inactivations(cfg.k, p.m, &cfg.dist, cfg.options())?.expected,
        };
        analytic.push(AnalyticPoint {
            k: cfg.k,
            m: p.m,
            dist_label: cfg.dist_label.clone(),
            mean,
            pmf,
        });
    }
    // Check the configurations before spending time on trials.
    if label != cfg.dist_label {
        return Err(Error::ConfigMismatch(format!(
            "simulation uses {label}, analysis uses {}",
            cfg.dist_label
        )));
    }
    let stats = sim::run(&plan)?;
    let tol = Tolerances {
        z_max,
        tv_max: tv_max.unwrap_or(f64::INFINITY),
    };
    let report = sim::compare(&stats, &analytic, tol)?;
    let verdict = if report.pass() { "PASS" } else { "FAIL" };
    cfg.emit(&(cfg.header(&format!(" result={verdict}")) + &report.csv()))?;
    eprintln!("compare: {verdict}");
    Ok(if report.pass() { 0 } else { EXIT_TOLERANCE })
}

fn run(cli: Cli) -> Result<u8, Error> {
    match &cli.command {
        Command::AnalyzeMean(a) => analyze_mean(&RunConfig::resolve("analyze-mean", a)?),
        Command::AnalyzeDist { common, n_star } => {
            analyze_dist(&RunConfig::resolve("analyze-dist", common)?, *n_star)
        }
        Command::Simulate { common, sim, pmf_out } => {
            let mut cfg = RunConfig::resolve("simulate", common)?;
            cfg.seed = Some(sim.seed);
            cfg.trials = Some(sim.trials);
            simulate(&cfg, sim, pmf_out.as_ref())
        }
        Command::Compare {
            common,
            sim,
            sim_dist,
            z_max,
            tv_max,
        } => {
            let mut cfg = RunConfig::resolve("compare", common)?;
            cfg.seed = Some(sim.seed);
            cfg.trials = Some(sim.trials);
            compare(&cfg, sim, sim_dist.as_deref(), *z_max, *tv_max)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::FileNotFound(_) | Error::Io(_) => EXIT_IO,
                _ => EXIT_USAGE,
            })
        }
    }
}
