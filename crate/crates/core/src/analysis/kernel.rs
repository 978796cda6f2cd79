//! One-step transition probabilities.

use crate::combinatorics::{LogFactorial, TruncatedPmf};
use crate::degree::DegreeDistribution;
use crate::error::Result;
use rustc_hash::FxHashMap;

/// Probability that an output of original degree `d` sits in the cloud with
/// `u` active inputs and enters the ripple when the next input is removed.
pub fn joint_cloud_to_ripple(d: usize, u: usize, k: usize, lf: &LogFactorial) -> f64 {
    // (u - 1) / (k - 1) vanishes at u = 1, which also covers k = 1
    if d < 2 || u < 2 || d - 2 > k - u {
        return 0.0;
    }
    let (df, kf) = (d as f64, k as f64);
    df / kf * (df - 1.0) * ((u - 1) as f64 / (kf - 1.0)) * lf.binom_ratio(k - u, d - 2, k - 2, d - 2)
}

/// Probability that an output is in the cloud (reduced degree >= 2) with
/// `u` of `k` inputs active.
pub fn cloud_membership_prob(
    u: usize,
    k: usize,
    dist: &DegreeDistribution,
    lf: &LogFactorial,
) -> f64 {
    let outside: f64 = dist
        .support()
        .iter()
        .map(|&(d, w)| {
            let ripple = if d - 1 <= k - u {
                u as f64 * lf.binom_ratio(k - u, d - 1, k, d)
            } else {
                0.0
            };
            let gone = lf.binom_ratio(k - u, d, k, d);
            w * (ripple + gone)
        })
        .sum();
    let p = 1.0 - outside;
    if p < 0.0 && p > -1e-14 {
        0.0
    } else {
        p
    }
}

/// Probability that a cloud symbol at step `u` enters the ripple at `u - 1`.
/// Defined as 0 when the cloud is empty with certainty.
pub fn compute_pu(u: usize, k: usize, dist: &DegreeDistribution, lf: &LogFactorial) -> f64 {
    let denom = cloud_membership_prob(u, k, dist, lf);
    if denom <= 0.0 {
        return 0.0;
    }
    let num: f64 = dist
        .support()
        .iter()
        .map(|&(d, w)| w * joint_cloud_to_ripple(d, u, k, lf))
        .sum();
    (num / denom).clamp(0.0, 1.0)
}

/// PMF of the number of symbols leaving a ripple of size `r` at step `u`,
/// indexed by that number. The chosen symbol always leaves; each other
/// ripple symbol shares its neighbor with probability `1/u`.
pub fn ripple_departure_pmf(r: usize, u: usize) -> Vec<f64> {
    if r == 0 {
        return vec![1.0];
    }
    let lf = LogFactorial::new(r);
    let shifted = TruncatedPmf::binomial(r - 1, 1.0 / u as f64, &lf, 0.0);
    let mut out = vec![0.0; r + 1];
    for (j, p) in shifted.iter() {
        out[j + 1] = p;
    }
    out
}

/// Shared, per-analysis data: `k`, the degree distribution and a
/// log-factorial table large enough for every binomial the recursion needs.
#[derive(Debug, Clone)]
pub struct KernelContext {
    pub k: usize,
    pub dist: DegreeDistribution,
    pub lf: LogFactorial,
    pub(crate) cutoff: f64,
}

impl KernelContext {
    pub fn new(k: usize, m: usize, dist: &DegreeDistribution, cutoff: f64) -> Result<Self> {
        dist.check_against_k(k)?;
        Ok(KernelContext {
            k,
            dist: dist.clone(),
            lf: LogFactorial::new(k.max(m) + 1),
            cutoff,
        })
    }

    pub fn row(&self, u: usize) -> TransitionKernelRow<'_> {
        TransitionKernelRow {
            u,
            p_u: compute_pu(u, self.k, &self.dist, &self.lf),
            lf: &self.lf,
            cutoff: self.cutoff,
            cloud: FxHashMap::default(),
            ripple: FxHashMap::default(),
        }
    }
}

/// Transition kernel for the step from `u` to `u - 1` active inputs, with
/// the departure PMFs cached per cloud and ripple size.
#[derive(Debug)]
pub struct TransitionKernelRow<'a> {
    pub u: usize,
    pub p_u: f64,
    lf: &'a LogFactorial,
    cutoff: f64,
    cloud: FxHashMap<usize, TruncatedPmf>,
    ripple: FxHashMap<usize, TruncatedPmf>,
}

impl TransitionKernelRow<'_> {
    /// Distribution of `b`, the number of the `c` cloud symbols that move
    /// into the ripple: Binomial(c, p_u).
    pub fn cloud_departures(&mut self, c: usize) -> &TruncatedPmf {
        let (p, lf, cutoff) = (self.p_u, self.lf, self.cutoff);
        self.cloud
            .entry(c)
            .or_insert_with(|| TruncatedPmf::binomial(c, p, lf, cutoff))
    }

    /// Distribution of `a`, the number of ripple symbols leaving a ripple of
    /// size `r`: 0 for an empty ripple, else 1 + Binomial(r - 1, 1/u).
    pub fn ripple_departures(&mut self, r: usize) -> &TruncatedPmf {
        let (u, lf, cutoff) = (self.u, self.lf, self.cutoff);
        self.ripple.entry(r).or_insert_with(|| {
            if r == 0 {
                return TruncatedPmf::point(0);
            }
            let mut pmf = TruncatedPmf::binomial(r - 1, 1.0 / u as f64, lf, cutoff);
            pmf.offset += 1;
            pmf
        })
    }
}
