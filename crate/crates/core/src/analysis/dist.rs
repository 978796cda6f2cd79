//! Distribution of the number of inactivations from the `(c, r, n)`
//! recursion.

use std::fmt::Write as _;

use super::recursion::{self, CloudRippleCount, Recursion, StatePmf};
use super::{AnalysisOptions, KernelContext};
use crate::degree::DegreeDistribution;
use crate::error::Result;

pub type StatePmf3 = StatePmf<CloudRippleCount>;

pub fn initial_pmf3(k: usize, m: usize, dist: &DegreeDistribution) -> Result<StatePmf3> {
    let ctx = KernelContext::new(k, m, dist, 0.0)?;
    Ok(recursion::initial_pmf(k, m, dist, &ctx))
}

#[derive(Debug, Clone)]
pub struct DistAnalysis {
    pub k: usize,
    pub m: usize,
    /// `pmf[n]` = probability of exactly `n` inactivations, `n = 0..=k`.
    pub pmf: Vec<f64>,
    pub pruned_mass: f64,
    pub max_mass_error: f64,
}

impl DistAnalysis {
    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn cdf(&self) -> Vec<f64> {
        cumulative(&self.pmf)
    }

    /// Smallest `n` with `F(n) >= q`.
    pub fn quantile(&self, q: f64) -> usize {
        let cdf = self.cdf();
        cdf.iter().position(|&f| f >= q).unwrap_or(self.k)
    }

    /// `n,probability,cumulative` rows.
    pub fn write_csv(&self, out: &mut String) {
        for (n, (p, f)) in self.pmf.iter().zip(self.cdf()).enumerate() {
            let _ = writeln!(out, "{n},{p:e},{f:e}");
        }
    }
}

/// PMF of the total number of inactivations.
pub fn inactivation_distribution(
    k: usize,
    m: usize,
    dist: &DegreeDistribution,
    opts: AnalysisOptions,
) -> Result<DistAnalysis> {
    let rec: Recursion<CloudRippleCount> = Recursion::new(k, m, dist, opts)?;
    let (last, max_mass_error) = rec.into_final();
    let mut pmf = vec![0.0; k + 1];
    for (s, p) in last.sorted() {
        pmf[s.n as usize] += p;
    }
    Ok(DistAnalysis {
        k,
        m,
        pmf,
        pruned_mass: last.pruned_mass,
        max_mass_error,
    })
}

/// Prefix sums of a PMF.
pub fn cumulative(pmf: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    pmf.iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

/// Probability that `N` exceeds `n_star`, i.e. a lower bound on the failure
/// probability of a decoder that gives up after `n_star` inactivations
/// (rank deficiency of the inactive block only adds to it).
///
/// Computed as `1 - F(n_star)`; pruned mass, whose `N` is unknown, counts
/// toward failure, so the value can exceed the true bound by at most the
/// reported pruned mass.
pub fn failure_lower_bound(cdf: &[f64], n_star: usize) -> f64 {
    let at = match cdf {
        [] => 0.0,
        _ => cdf[n_star.min(cdf.len() - 1)],
    };
    (1.0 - at).clamp(0.0, 1.0)
}
