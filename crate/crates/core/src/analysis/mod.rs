//! Exact finite-length analysis of the number of inactivations.
//!
//! The decoder is modelled as a Markov chain over the cloud and ripple
//! sizes `(c, r)` as the number of active inputs `u` runs from `k` down to
//! 0. [`mean`] tracks `(c, r)` and yields `E[N]`; [`dist`] extends the state
//! with the running inactivation count `n` and yields the full PMF of `N`.
//! Both share the transition kernel in [`kernel`] and the stepping engine in
//! [`recursion`].

pub mod dist;
pub mod kernel;
pub mod mean;
pub mod recursion;

pub use dist::{failure_lower_bound, inactivation_distribution, DistAnalysis, StatePmf3};
pub use kernel::{
    cloud_membership_prob, compute_pu, joint_cloud_to_ripple, ripple_departure_pmf,
    KernelContext, TransitionKernelRow,
};
pub use mean::{expected_inactivations, MeanAnalysis, StatePmf2};
pub use recursion::{CloudRipple, CloudRippleCount, DecoderState, Recursion, StatePmf};

/// (c, r) state groups whose total probability falls below this are dropped
/// into `pruned_mass`.
pub const DEFAULT_PRUNE: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub prune_threshold: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            prune_threshold: DEFAULT_PRUNE,
        }
    }
}

impl AnalysisOptions {
    /// Binomial kernel terms below this are not expanded; their mass is
    /// booked as pruned together with dropped states.
    pub(crate) fn kernel_cutoff(&self) -> f64 {
        self.prune_threshold * 1e-10
    }
}
