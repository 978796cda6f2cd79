//! Seeded Monte Carlo experiments over encode + triangularize (or full
//! decode).
//!
//! Every trial draws from its own ChaCha stream, selected by the trial
//! index, so results do not depend on how trials are spread over workers.
//! Partial results merge through integer counts only, which keeps the
//! reduction exact and order-independent.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decoder::{decode, triangularize};
use crate::degree::DegreeDistribution;
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    CountOnly,
    FullDecode,
}

/// Overhead points: absolute output counts or relative overheads.
#[derive(Debug, Clone, PartialEq)]
pub enum Overhead {
    Outputs(Vec<usize>),
    Epsilons(Vec<f64>),
}

/// `m = round(k (1 + eps))`, ties to even.
pub fn outputs_for_epsilon(k: usize, eps: f64) -> usize {
    (k as f64 * (1.0 + eps)).round_ties_even().max(0.0) as usize
}

/// One overhead point of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigPoint {
    pub epsilon: f64,
    pub m: usize,
}

impl Overhead {
    pub fn points(&self, k: usize) -> Vec<ConfigPoint> {
        match self {
            Overhead::Outputs(ms) => ms
                .iter()
                .map(|&m| ConfigPoint {
                    epsilon: m as f64 / k as f64 - 1.0,
                    m,
                })
                .collect(),
            Overhead::Epsilons(eps) => eps
                .iter()
                .map(|&e| ConfigPoint {
                    epsilon: e,
                    m: outputs_for_epsilon(k, e),
                })
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        match self {
            Overhead::Outputs(ms) if ms.is_empty() => Err(Error::InvalidPlan("no m values".into())),
            Overhead::Epsilons(e) if e.is_empty() => Err(Error::InvalidPlan("no epsilon values".into())),
            Overhead::Epsilons(e) if !increasing(e) => {
                Err(Error::InvalidPlan("epsilon grid must be strictly increasing".into()))
            }
            Overhead::Epsilons(e) if e.iter().any(|&x| x < -1.0 || !x.is_finite()) => {
                Err(Error::InvalidPlan("epsilon must be a finite value >= -1".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub k: usize,
    pub overhead: Overhead,
    pub dist: DegreeDistribution,
    /// Preset name or file path the distribution came from.
    pub dist_label: String,
    pub trials: u64,
    pub master_seed: u64,
    pub mode: Mode,
    /// Worker threads; `None` uses the global pool, `Some(1)` runs inline.
    pub workers: Option<usize>,
    /// Payload width per symbol in full-decode mode.
    pub symbol_bytes: usize,
}

impl ExperimentPlan {
    pub fn new(k: usize, overhead: Overhead, dist: DegreeDistribution, dist_label: &str) -> Self {
        ExperimentPlan {
            k,
            overhead,
            dist,
            dist_label: dist_label.to_string(),
            trials: 1000,
            master_seed: 0,
            mode: Mode::CountOnly,
            workers: None,
            symbol_bytes: 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidPlan("trials must be at least 1".into()));
        }
        if self.k < 1 {
            return Err(Error::InvalidPlan("k must be at least 1".into()));
        }
        self.overhead.validate()?;
        if self.overhead.points(self.k).iter().any(|p| p.m > 0) {
            self.dist.check_against_k(self.k)?;
        }
        Ok(())
    }
}

/// Counts accumulated over trials for one overhead point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tally {
    pub trials: u64,
    pub sum: u64,
    pub sum_sq: u128,
    /// `histogram[n]` = trials with exactly `n` inactivations.
    pub histogram: Vec<u64>,
    pub successes: u64,
    /// Full-decode trials whose output did not match the source.
    pub mismatches: u64,
}

impl Tally {
    pub fn new(k: usize) -> Self {
        Tally {
            trials: 0,
            sum: 0,
            sum_sq: 0,
            histogram: vec![0; k + 1],
            successes: 0,
            mismatches: 0,
        }
    }

    pub fn record(&mut self, n: usize, success: bool) {
        self.trials += 1;
        self.sum += n as u64;
        self.sum_sq += (n as u128) * (n as u128);
        self.histogram[n] += 1;
        self.successes += success as u64;
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.trials += other.trials;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
        self.successes += other.successes;
        self.mismatches += other.mismatches;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigStats {
    pub k: usize,
    pub point: ConfigPoint,
    pub dist_label: String,
    pub mode: Mode,
    pub tally: Tally,
}

impl ConfigStats {
    pub fn mean(&self) -> f64 {
        self.tally.sum as f64 / self.tally.trials as f64
    }

    /// Unbiased sample variance, from exact integer sums.
    pub fn variance(&self) -> f64 {
        let t = self.tally.trials as u128;
        if t < 2 {
            return 0.0;
        }
        let s = self.tally.sum as u128;
        let num = t * self.tally.sum_sq - s * s;
        num as f64 / (t * (t - 1)) as f64
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.tally.trials as f64).sqrt()
    }

    pub fn empirical_pmf(&self) -> Vec<f64> {
        let t = self.tally.trials as f64;
        self.tally.histogram.iter().map(|&c| c as f64 / t).collect()
    }

    pub fn success_rate(&self) -> f64 {
        self.tally.successes as f64 / self.tally.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStats {
    pub configs: Vec<ConfigStats>,
}

impl AggregateStats {
    /// `epsilon,mean_N,stderr,trials` (plus `success_rate` in full-decode mode).
    pub fn summary_csv(&self) -> String {
        let full = self.configs.iter().any(|c| c.mode == Mode::FullDecode);
        let mut s = String::from("epsilon,mean_N,stderr,trials");
        s.push_str(if full { ",success_rate\n" } else { "\n" });
        for c in &self.configs {
            let _ = write!(
                s,
                "{:.6},{:.6},{:.6},{}",
                c.point.epsilon,
                c.mean(),
                c.stderr(),
                c.tally.trials
            );
            if full {
                let _ = write!(s, ",{:.6}", c.success_rate());
            }
            s.push('\n');
        }
        s
    }

    /// `epsilon,n,freq` over the observed support.
    pub fn pmf_csv(&self) -> String {
        let mut s = String::from("epsilon,n,freq\n");
        for c in &self.configs {
            for (n, f) in c.empirical_pmf().iter().enumerate() {
                if c.tally.histogram[n] > 0 {
                    let _ = writeln!(s, "{:.6},{n},{f:.8}", c.point.epsilon);
                }
            }
        }
        s
    }
}

/// Stream for trial `t` at output count `m`.
pub fn trial_rng(master_seed: u64, m: usize, t: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(master_seed ^ splitmix64(m as u64)));
    rng.set_stream(t);
    rng
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn run_trial(plan: &ExperimentPlan, m: usize, t: u64, tally: &mut Tally) {
    let mut rng = trial_rng(plan.master_seed, m, t);
    let graph = BipartiteGraph::encode(plan.k, m, &plan.dist, &mut rng)
        .expect("plan validated against k");
    match plan.mode {
        Mode::CountOnly => {
            let report = triangularize(&graph, &mut rng);
            tally.record(report.n_inactivations, false);
        }
        Mode::FullDecode => {
            let source: Vec<Symbol> = (0..plan.k)
                .map(|_| (0..plan.symbol_bytes).map(|_| rng.random()).collect())
                .collect();
            let received = graph.payload_encode(&source).expect("source has k symbols");
            let out = decode(&graph, &received, &mut rng).expect("well-formed input");
            if let Ok(decoded) = &out.source {
                if *decoded != source {
                    tally.mismatches += 1;
                }
            }
            tally.record(out.report.n_inactivations, out.is_success());
        }
    }
}

fn run_config(plan: &ExperimentPlan, m: usize) -> Tally {
    let sequential = || {
        (0..plan.trials).fold(Tally::new(plan.k), |mut acc, t| {
            run_trial(plan, m, t, &mut acc);
            acc
        })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let parallel = || {
            (0..plan.trials)
                .into_par_iter()
                .fold(
                    || Tally::new(plan.k),
                    |mut acc, t| {
                        run_trial(plan, m, t, &mut acc);
                        acc
                    },
                )
                .reduce(|| Tally::new(plan.k), Tally::merge)
        };
        match plan.workers {
            Some(1) => sequential(),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool")
                .install(parallel),
            None => parallel(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        sequential()
    }
}

pub fn run(plan: &ExperimentPlan) -> Result<AggregateStats> {
    plan.validate()?;
    let configs = plan
        .overhead
        .points(plan.k)
        .into_iter()
        .map(|point| ConfigStats {
            k: plan.k,
            point,
            dist_label: plan.dist_label.clone(),
            mode: plan.mode,
            tally: run_config(plan, point.m),
        })
        .collect();
    Ok(AggregateStats { configs })
}

/// Analytic results for one configuration, from the mean and/or
/// distribution analysis.
#[derive(Debug, Clone)]
pub struct AnalyticPoint {
    pub k: usize,
    pub m: usize,
    pub dist_label: String,
    pub mean: f64,
    pub pmf: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub z_max: f64,
    pub tv_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            z_max: 3.0,
            tv_max: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointComparison {
    pub epsilon: f64,
    pub m: usize,
    pub analytic_mean: f64,
    pub empirical_mean: f64,
    pub stderr: f64,
    pub z: f64,
    pub tv: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub points: Vec<PointComparison>,
    pub tolerances: Tolerances,
}

impl CompareReport {
    pub fn pass(&self) -> bool {
        self.points.iter().all(|p| p.pass)
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("epsilon,m,analytic_mean,empirical_mean,stderr,z,tv,pass\n");
        for p in &self.points {
            let tv = p.tv.map(|t| format!("{t:.6}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{:.6},{},{:.6},{:.6},{:.6},{:.3},{tv},{}",
                p.epsilon, p.m, p.analytic_mean, p.empirical_mean, p.stderr, p.z, p.pass as u8
            );
        }
        s
    }
}

/// Total-variation distance between two PMFs over `0..`.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..n).map(|i| (get(a, i) - get(b, i)).abs()).sum::<f64>()
}

/// z-score of the empirical mean against the analytic one.
pub fn z_score(analytic: f64, empirical: f64, stderr: f64) -> f64 {
    let diff = empirical - analytic;
    if stderr > 0.0 {
        diff / stderr
    } else if diff.abs() < 1e-12 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

pub fn compare(
    stats: &AggregateStats,
    analytic: &[AnalyticPoint],
    tol: Tolerances,
) -> Result<CompareReport> {
    if stats.configs.len() != analytic.len() {
        return Err(Error::ConfigMismatch(format!(
            "{} simulated configurations vs {} analytic",
            stats.configs.len(),
            analytic.len()
        )));
    }
    let mut points = Vec::with_capacity(analytic.len());
    for (s, a) in stats.configs.iter().zip(analytic) {
        if s.k != a.k || s.point.m != a.m || s.dist_label != a.dist_label {
            return Err(Error::ConfigMismatch(format!(
                "simulated (k={}, m={}, dist={}) vs analytic (k={}, m={}, dist={})",
                s.k, s.point.m, s.dist_label, a.k, a.m, a.dist_label
            )));
        }
        let z = z_score(a.mean, s.mean(), s.stderr());
        let tv = a
            .pmf
            .as_ref()
            .map(|f| total_variation(f, &s.empirical_pmf()));
        let pass = z.abs() <= tol.z_max && tv.is_none_or(|t| t <= tol.tv_max);
        points.push(PointComparison {
            epsilon: s.point.epsilon,
            m: s.point.m,
            analytic_mean: a.mean,
            empirical_mean: s.mean(),
            stderr: s.stderr(),
            z,
            tv,
            pass,
        });
    }
    Ok(CompareReport {
        points,
        tolerances: tol,
    })
}
