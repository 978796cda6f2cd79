//! Expected number of inactivations from the `(c, r)` recursion.

use std::fmt::Write as _;

use super::recursion::{self, CloudRipple, Recursion, StatePmf};
use super::{AnalysisOptions, KernelContext};
use crate::degree::DegreeDistribution;
use crate::error::Result;

pub type StatePmf2 = StatePmf<CloudRipple>;

pub fn initial_pmf(k: usize, m: usize, dist: &DegreeDistribution) -> Result<StatePmf2> {
    let ctx = KernelContext::new(k, m, dist, 0.0)?;
    Ok(recursion::initial_pmf(k, m, dist, &ctx))
}

#[derive(Debug, Clone)]
pub struct MeanAnalysis {
    pub k: usize,
    pub m: usize,
    pub expected: f64,
    /// `profile[u - 1]` is the probability of an empty ripple with `u`
    /// inputs active, i.e. of an inactivation at that step.
    pub profile: Vec<f64>,
    pub pruned_mass: f64,
    pub max_mass_error: f64,
}

impl MeanAnalysis {
    pub fn inactivation_prob(&self, u: usize) -> f64 {
        self.profile[u - 1]
    }
}

/// `E[N]` as the sum over steps of the probability of an empty ripple.
pub fn expected_inactivations(
    k: usize,
    m: usize,
    dist: &DegreeDistribution,
    opts: AnalysisOptions,
) -> Result<MeanAnalysis> {
    let mut rec: Recursion<CloudRipple> = Recursion::new(k, m, dist, opts)?;
    let mut profile = vec![0.0; k];
    loop {
        let u = rec.u();
        if u == 0 {
            break;
        }
        profile[u - 1] = rec.current().empty_ripple_mass();
        rec.advance();
    }
    Ok(MeanAnalysis {
        k,
        m,
        expected: profile.iter().sum(),
        profile,
        pruned_mass: rec.current().pruned_mass,
        max_mass_error: rec.max_mass_error(),
    })
}

/// `u,c,r,prob` rows for every retained state.
pub fn write_states_csv(pmf: &StatePmf2, out: &mut String) {
    for (s, p) in pmf.sorted() {
        let _ = writeln!(out, "{},{},{},{:e}", pmf.u, s.c, s.r, p);
    }
}
