//! Neighborhood-size estimates via Cohen's min-rank sketch, simulated with
//! the rank-ring / MSSP structure of the distributed algorithm.
//!
//! Each repetition draws a rank per participant, rounds it down to the grid
//! `(1+eps')^i / n^2`, and (conceptually) runs one charged MSSP per rank
//! ring. For a query vertex and radius, the smallest rank inside the ball is
//! the grid value of the first rank ring whose MSSP distance fits; averaging
//! over repetitions and inverting yields the size estimate. The per-radius
//! step functions are accumulated through difference arrays so a repetition
//! costs O(#queries * #participants) instead of a fresh sweep per ring.

use crate::error::Result;
use crate::metric::{hash64, unit_f64, DistanceOracle};
use crate::model::VertexId;

use super::cluster::{ChargeConfig, Cluster, Recorder};

const RANK_TAG: u64 = 0x7261_6e6b;

/// Smallest ring index `rho >= 0` with `(1+eps)^rho >= x` (for x > 0),
/// treating values within 1e-12 relative of a grid point as on it.
pub fn ceil_ring(x: f64, eps: f64) -> usize {
    if x <= 1.0 {
        return 0;
    }
    let raw = x.ln() / (1.0 + eps).ln();
    let mut r = raw.ceil() as i64;
    while (1.0 + eps).powi(r as i32) < x * (1.0 - 1e-12) {
        r += 1;
    }
    while r > 0 && (1.0 + eps).powi(r as i32 - 1) >= x * (1.0 - 1e-12) {
        r -= 1;
    }
    r.max(0) as usize
}

/// Largest ring index with `(1+eps)^rho <= x` (for x >= 1).
pub fn floor_ring(x: f64, eps: f64) -> usize {
    debug_assert!(x >= 1.0);
    let raw = x.ln() / (1.0 + eps).ln();
    let mut r = raw.floor() as i64;
    if (1.0 + eps).powi(r as i32 + 1) <= x * (1.0 + 1e-12) {
        r += 1;
    }
    r.max(0) as usize
}

#[derive(Clone, Debug)]
pub struct NbdEstimates {
    pub eps: f64,
    pub eps_prime: f64,
    /// Repetitions `L = ceil(c log n / eps'^2)`.
    pub reps: usize,
    /// Rank-ring count `t = ceil(2 log_{1+eps'} n)`.
    pub rank_rings: usize,
    /// Highest usable radius-ring index; queries clamp to it.
    pub max_ring: usize,
    pub participants: usize,
    slot_of: Vec<usize>, // vertex -> slot + 1, 0 = not a query vertex
    /// Average min-rank per (query slot, radius ring), after finalize.
    avg_rank: Vec<f64>,
}

impl NbdEstimates {
    /// Estimated `|B(v, (1+eps)^ring)|` over the participant set (scaled
    /// distances). Rings beyond the table clamp to the last ring.
    pub fn query_ring(&self, v: VertexId, ring: usize) -> f64 {
        let slot = self.slot_of[v];
        assert!(slot > 0, "vertex {v} was not a query vertex");
        let ring = ring.min(self.max_ring);
        let r_hat = self.avg_rank[(slot - 1) * (self.max_ring + 1) + ring];
        (1.0 / r_hat - 1.0).max(0.0)
    }
}

/// Runs the estimator: ranks on `participants`, estimates answered for
/// `queries`, distances scaled by `sigma` so the radius grid starts at 1.
/// Charges one MSSP per rank ring per repetition (aggregated into a single
/// ledger entry).
#[allow(clippy::too_many_arguments)]
pub fn nbd_size_estimates(
    cluster: &Cluster,
    oracle: &DistanceOracle,
    eps: f64,
    participants: &[VertexId],
    queries: &[VertexId],
    sigma: f64,
    max_ring: usize,
    cohen_c: f64,
    seed: u64,
    nonce: u64,
    rec: &mut Recorder,
    charge: &ChargeConfig,
) -> Result<NbdEstimates> {
    let n = oracle.n_vertices();
    let eps_prime = eps / (eps + 4.0);
    let ln_g = (1.0 + eps_prime).ln();
    let t = (2.0 * (n as f64).ln() / ln_g).ceil() as usize;
    let reps = (cohen_c * (n as f64).log2().max(1.0) / (eps_prime * eps_prime)).ceil() as usize;
    let n2 = (n * n) as f64;

    let mut slot_of = vec![0usize; n];
    for (s, &v) in queries.iter().enumerate() {
        slot_of[v] = s + 1;
    }
    let rings = max_ring + 1;
    let mut diff = vec![0.0f64; queries.len() * rings];
    // grid rank values (1+eps')^i / n^2
    let grid: Vec<f64> = (0..t).map(|i| (1.0 + eps_prime).powi(i as i32) / n2).collect();

    // reusable buffers
    let mut class_of = vec![usize::MAX; participants.len()];
    let mut class_members: Vec<Vec<u32>> = vec![Vec::new(); t];
    let mut nonempty: Vec<u32> = Vec::new();
    let mut stairs: Vec<(usize, f64)> = Vec::new();

    for rep in 0..reps {
        // rank draws, clamped up to 1/n^2 and rounded down to the grid
        nonempty.clear();
        for (idx, &p) in participants.iter().enumerate() {
            let u = unit_f64(hash64(seed ^ nonce, RANK_TAG, rep as u64, p as u64)).max(1.0 / n2);
            let mut i = ((u * n2).ln() / ln_g).floor() as i64;
            if i < 0 {
                i = 0;
            }
            let i = (i as usize).min(t - 1);
            if class_members[i].is_empty() {
                nonempty.push(i as u32);
            }
            class_members[i].push(p as u32);
            class_of[idx] = i;
        }
        nonempty.sort_unstable();

        for (s, &v) in queries.iter().enumerate() {
            // staircase of (ring where a rank class first qualifies, rank)
            stairs.clear();
            let mut cur_min = f64::INFINITY;
            for &ci in &nonempty {
                let members = &class_members[ci as usize];
                let mut d = f64::INFINITY;
                for &u in members {
                    let du = oracle.distance(v, u as usize);
                    if du < d {
                        d = du;
                    }
                }
                let sd = d * sigma;
                if sd < cur_min {
                    cur_min = sd;
                    if sd.is_finite() {
                        let ring = ceil_ring(sd, eps);
                        if ring <= max_ring {
                            stairs.push((ring, grid[ci as usize]));
                        }
                    }
                }
            }
            // diff encoding: value(rho) = 1 + sum over stairs with
            // ring_k <= rho of (g_k - g_{k+1}), trailing g = 1
            let base = s * rings;
            for k in 0..stairs.len() {
                let g_next = if k + 1 < stairs.len() {
                    stairs[k + 1].1
                } else {
                    1.0
                };
                diff[base + stairs[k].0] += stairs[k].1 - g_next;
            }
        }
        for &ci in &nonempty {
            class_members[ci as usize].clear();
        }
    }

    // finalize: prefix sums then average
    let mut avg_rank = diff;
    for s in 0..queries.len() {
        let base = s * rings;
        let mut acc = 0.0;
        for r in 0..rings {
            acc += avg_rank[base + r];
            avg_rank[base + r] = 1.0 + acc / reps as f64;
        }
    }

    // one charged MSSP per rank ring per repetition
    let per_call = charge.mssp_rounds(n, cluster.k, eps);
    let payload = cluster.result_payload(2);
    if !participants.is_empty() {
        rec.charge(
            &format!("nbd_size_estimates[{nonce}]"),
            per_call * t as u64 * reps as u64,
            &payload,
        )?;
    }

    Ok(NbdEstimates {
        eps,
        eps_prime,
        reps,
        rank_rings: t,
        max_ring,
        participants: participants.len(),
        slot_of,
        avg_rank,
    })
}
