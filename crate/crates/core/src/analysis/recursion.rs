//! Stepping engine shared by the mean and distribution analyses.

use std::hash::Hash;

use rustc_hash::FxHashMap;

use super::kernel::{KernelContext, TransitionKernelRow};
use super::AnalysisOptions;
use crate::combinatorics::TruncatedPmf;
use crate::degree::DegreeDistribution;
use crate::error::{Error, Result};

/// A decoder state carrying at least the cloud and ripple sizes.
pub trait DecoderState: Copy + Eq + Hash + Ord + std::fmt::Debug {
    fn initial(cloud: usize, ripple: usize) -> Self;
    fn cloud(&self) -> usize;
    fn ripple(&self) -> usize;
    /// Same state with new cloud and ripple sizes.
    fn moved(self, cloud: usize, ripple: usize) -> Self;
    /// State after an inactivation is booked.
    fn inactivated(self) -> Self;
    /// The (cloud, ripple) projection; pruning acts on these groups so that
    /// every state type retains the same (c, r) frontier.
    fn group(&self) -> CloudRipple {
        CloudRipple::initial(self.cloud(), self.ripple())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CloudRipple {
    pub c: u32,
    pub r: u32,
}

impl DecoderState for CloudRipple {
    fn initial(cloud: usize, ripple: usize) -> Self {
        CloudRipple {
            c: cloud as u32,
            r: ripple as u32,
        }
    }
    fn cloud(&self) -> usize {
        self.c as usize
    }
    fn ripple(&self) -> usize {
        self.r as usize
    }
    fn moved(self, cloud: usize, ripple: usize) -> Self {
        Self::initial(cloud, ripple)
    }
    fn inactivated(self) -> Self {
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CloudRippleCount {
    pub c: u32,
    pub r: u32,
    /// Inactivations so far.
    pub n: u32,
}

impl CloudRippleCount {
    pub fn marginal(self) -> CloudRipple {
        CloudRipple { c: self.c, r: self.r }
    }
}

impl DecoderState for CloudRippleCount {
    fn initial(cloud: usize, ripple: usize) -> Self {
        CloudRippleCount {
            c: cloud as u32,
            r: ripple as u32,
            n: 0,
        }
    }
    fn cloud(&self) -> usize {
        self.c as usize
    }
    fn ripple(&self) -> usize {
        self.r as usize
    }
    fn moved(self, cloud: usize, ripple: usize) -> Self {
        CloudRippleCount {
            c: cloud as u32,
            r: ripple as u32,
            n: self.n,
        }
    }
    fn inactivated(self) -> Self {
        CloudRippleCount {
            n: self.n + 1,
            ..self
        }
    }
}

/// Sparse joint PMF over decoder states with `u` active inputs.
#[derive(Debug, Clone)]
pub struct StatePmf<S> {
    pub u: usize,
    pub mass: FxHashMap<S, f64>,
    /// Probability discarded so far by thresholding.
    pub pruned_mass: f64,
}

impl<S: DecoderState> StatePmf<S> {
    pub fn point(u: usize, state: S) -> Self {
        let mut mass = FxHashMap::default();
        mass.insert(state, 1.0);
        StatePmf {
            u,
            mass,
            pruned_mass: 0.0,
        }
    }

    pub fn get(&self, s: &S) -> f64 {
        self.mass.get(s).copied().unwrap_or(0.0)
    }

    pub fn retained_mass(&self) -> f64 {
        self.mass.values().sum()
    }

    /// Probability that the ripple is empty.
    pub fn empty_ripple_mass(&self) -> f64 {
        self.mass
            .iter()
            .filter(|(s, _)| s.ripple() == 0)
            .map(|(_, p)| p)
            .sum()
    }

    /// States sorted by key, for stable output.
    pub fn sorted(&self) -> Vec<(S, f64)> {
        let mut v: Vec<_> = self.mass.iter().map(|(s, p)| (*s, *p)).collect();
        v.sort_by_key(|e| e.0);
        v
    }

    /// Drop every state whose (c, r) group has total probability below
    /// `threshold`, and any single state below `threshold * 1e-10` (the same
    /// cutoff applied to kernel tails), which only trims the tails of state
    /// types finer than (c, r).
    fn prune(&mut self, threshold: f64) {
        if threshold <= 0.0 {
            return;
        }
        let floor = threshold * 1e-10;
        let mut groups: FxHashMap<CloudRipple, f64> = FxHashMap::default();
        for (s, &p) in &self.mass {
            *groups.entry(s.group()).or_insert(0.0) += p;
        }
        let mut dropped = 0.0;
        self.mass.retain(|s, p| {
            if *p < floor || groups[&s.group()] < threshold {
                dropped += *p;
                false
            } else {
                true
            }
        });
        self.pruned_mass += dropped;
    }
}

/// Initial state distribution: each of the `m` outputs is independently in
/// the ripple with probability `Omega_1`, otherwise in the cloud.
pub fn initial_pmf<S: DecoderState>(
    k: usize,
    m: usize,
    dist: &DegreeDistribution,
    ctx: &KernelContext,
) -> StatePmf<S> {
    let ripple = TruncatedPmf::binomial(m, dist.prob(1), &ctx.lf, 0.0);
    let mut mass = FxHashMap::default();
    for (r, p) in ripple.iter() {
        if p > 0.0 {
            mass.insert(S::initial(m - r, r), p);
        }
    }
    StatePmf {
        u: k,
        mass,
        pruned_mass: ripple.dropped,
    }
}

/// Advance `pmf` from `u` to `u - 1` active inputs.
///
/// The transition factors into independent ripple departures and cloud
/// arrivals, applied as two passes: first `r -> r - a` (booking an
/// inactivation when `r = 0`), then `(c, r') -> (c - b, r' + b)`.
pub fn step<S: DecoderState>(
    pmf: &StatePmf<S>,
    row: &mut TransitionKernelRow<'_>,
    prune_threshold: f64,
) -> StatePmf<S> {
    assert!(pmf.u >= 1 && pmf.u == row.u, "step called at u = {}", pmf.u);
    let mut dropped = 0.0;

    let mut mid: FxHashMap<S, f64> = FxHashMap::default();
    mid.reserve(pmf.mass.len());
    for (&s, &p) in &pmf.mass {
        let (c, r) = (s.cloud(), s.ripple());
        if r == 0 {
            *mid.entry(s.inactivated()).or_insert(0.0) += p;
            continue;
        }
        let dep = row.ripple_departures(r);
        dropped += p * dep.dropped;
        for (a, q) in dep.iter() {
            *mid.entry(s.moved(c, r - a)).or_insert(0.0) += p * q;
        }
    }

    let mut out: FxHashMap<S, f64> = FxHashMap::default();
    out.reserve(mid.len());
    for (&s, &p) in &mid {
        let (c, r) = (s.cloud(), s.ripple());
        let arr = row.cloud_departures(c);
        dropped += p * arr.dropped;
        for (b, q) in arr.iter() {
            *out.entry(s.moved(c - b, r + b)).or_insert(0.0) += p * q;
        }
    }

    let mut next = StatePmf {
        u: pmf.u - 1,
        mass: out,
        pruned_mass: pmf.pruned_mass + dropped,
    };
    next.prune(prune_threshold);
    next
}

/// Runs the recursion from `u = k` down to `u = 0`, checking mass
/// conservation at every step.
#[derive(Debug, Clone)]
pub struct Recursion<S> {
    ctx: KernelContext,
    pmf: StatePmf<S>,
    opts: AnalysisOptions,
    max_mass_error: f64,
}

impl<S: DecoderState> Recursion<S> {
    pub fn new(
        k: usize,
        m: usize,
        dist: &DegreeDistribution,
        opts: AnalysisOptions,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPlan("k must be at least 1".into()));
        }
        // with no outputs the degree distribution never enters the chain
        let dist = if m == 0 { dist.capped(k) } else { dist.clone() };
        let ctx = KernelContext::new(k, m, &dist, opts.kernel_cutoff())?;
        let mut pmf = initial_pmf(k, m, &dist, &ctx);
        pmf.prune(opts.prune_threshold);
        let mut rec = Recursion {
            ctx,
            pmf,
            opts,
            max_mass_error: 0.0,
        };
        rec.track_mass();
        Ok(rec)
    }

    fn track_mass(&mut self) {
        let err = (self.pmf.retained_mass() + self.pmf.pruned_mass - 1.0).abs();
        self.max_mass_error = self.max_mass_error.max(err);
    }

    pub fn u(&self) -> usize {
        self.pmf.u
    }

    pub fn current(&self) -> &StatePmf<S> {
        &self.pmf
    }

    pub fn context(&self) -> &KernelContext {
        &self.ctx
    }

    /// Largest `|retained + pruned - 1|` seen so far.
    pub fn max_mass_error(&self) -> f64 {
        self.max_mass_error
    }

    /// Step to `u - 1`. Returns false once `u = 0`.
    pub fn advance(&mut self) -> bool {
        if self.pmf.u == 0 {
            return false;
        }
        let mut row = self.ctx.row(self.pmf.u);
        self.pmf = step(&self.pmf, &mut row, self.opts.prune_threshold);
        self.track_mass();
        true
    }

    pub fn into_final(mut self) -> (StatePmf<S>, f64) {
        while self.advance() {}
        (self.pmf, self.max_mass_error)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree::DegreeDistribution;

    fn ctx() -> KernelContext {
        let dist = DegreeDistribution::validate(&[(1, 0.5), (2, 0.5)]).unwrap();
        KernelContext::new(5, 5, &dist, 0.0).unwrap()
    }

    #[test]
    fn empty_graph_is_absorbing() {
        let ctx = ctx();
        for u in 1..=5 {
            let pmf = StatePmf::point(u, CloudRipple { c: 0, r: 0 });
            let next = step(&pmf, &mut ctx.row(u), 0.0);
            assert_eq!(next.sorted(), vec![(CloudRipple { c: 0, r: 0 }, 1.0)]);

            let pmf = StatePmf::point(u, CloudRippleCount { c: 0, r: 0, n: 2 });
            let next = step(&pmf, &mut ctx.row(u), 0.0);
            assert_eq!(next.sorted(), vec![(CloudRippleCount { c: 0, r: 0, n: 3 }, 1.0)]);
        }
    }

    #[test]
    fn forced_cloud_release() {
        // p_u = 2/k at u = k for a pure degree-2 code; with k = 2 that is 1
        let ctx = KernelContext::new(2, 1, &DegreeDistribution::point(2), 0.0).unwrap();
        let mut row = ctx.row(2);
        assert_eq!(row.p_u, 1.0);
        let pmf = StatePmf::point(2, CloudRipple { c: 1, r: 0 });
        let next = step(&pmf, &mut row, 0.0);
        assert_eq!(next.sorted(), vec![(CloudRipple { c: 0, r: 1 }, 1.0)]);
    }

    #[test]
    fn step_conserves_mass_and_never_grows_cloud() {
        let ctx = ctx();
        let mut pmf = StatePmf::point(5, CloudRipple { c: 3, r: 2 });
        pmf.mass.insert(CloudRipple { c: 4, r: 0 }, 0.5);
        pmf.mass.insert(CloudRipple { c: 3, r: 2 }, 0.5);
        for u in (1..=5).rev() {
            let next = step(&pmf, &mut ctx.row(u), 0.0);
            assert!((next.retained_mass() - 1.0).abs() < 1e-12);
            let max_c_before = pmf.mass.keys().map(|s| s.c).max().unwrap();
            assert!(next.mass.keys().all(|s| s.c <= max_c_before));
            pmf = next;
        }
    }

    #[test]
    fn initial_distribution() {
        let dist = DegreeDistribution::validate(&[(1, 0.5), (2, 0.5)]).unwrap();
        let ctx = KernelContext::new(3, 2, &dist, 0.0).unwrap();
        let pmf: StatePmf<CloudRippleCount> = initial_pmf(3, 2, &dist, &ctx);
        let got = pmf.sorted();
        let s = |c, r| CloudRippleCount { c, r, n: 0 };
        assert_eq!(got, vec![(s(0, 2), 0.25), (s(1, 1), 0.5), (s(2, 0), 0.25)]);
    }
}
