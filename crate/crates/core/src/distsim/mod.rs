//! Deterministic simulator of the k-machine model (Congested Clique is the
//! k = n special case) running the distributed robust and penalty
//! algorithms, with per-round bandwidth ledgers and charged-round counters.

pub mod cluster;
pub mod estimate;
pub mod mis;
pub mod penalty;
pub mod radius;
pub mod robust;

pub use cluster::{
    bellman_ford_mssp, charged_exclusive_mssp, charged_mssp, ChargeConfig, Cluster, MsspBackend,
    PrimitiveCharge, Recorder, RoundLoad, SimTranscript,
};
pub use estimate::{ceil_ring, floor_ring, nbd_size_estimates, NbdEstimates};
pub use mis::{approximate_mis, check_mis_clauses};
pub use penalty::{penalty_classes, penalty_facloc_dist, penalty_facloc_dist_detailed, PenaltyDistOutcome};
pub use radius::{
    alpha_exact, approx_radii_penalty, approx_radii_plain, lambda_exact, ApproxRadius,
    ApproxRadiusTable, ExactRingCounts, RingCounts,
};
pub use robust::{
    mis_greedy_with_radii, robust_facloc_dist, robust_facloc_dist_detailed, ClassLog, RobustDistOutcome, RobustDistRun,
};

/// Simulation parameters: the approximation slack, the seed driving every
/// random choice, estimator and Luby constants, the round-charging formula,
/// and the MSSP backend.
#[derive(Clone, Copy, Debug)]
pub struct SimConfig {
    pub eps: f64,
    pub seed: u64,
    pub cohen_c: f64,
    pub mis_c: f64,
    pub charge: ChargeConfig,
    pub mssp_backend: MsspBackend,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            eps: 0.05,
            seed: 0,
            cohen_c: 8.0,
            mis_c: 8.0,
            charge: ChargeConfig::default(),
            mssp_backend: MsspBackend::Charged,
        }
    }
}
