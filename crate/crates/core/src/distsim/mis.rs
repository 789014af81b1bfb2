//! (eps, d)-approximate MIS by Luby-style sampling over ExclusiveMSSP /
//! MSSP calls, with a deterministic sweep for any stragglers so the two
//! definitional clauses hold on every run, not just w.h.p.

use crate::error::{FaclocError, Result};
use crate::metric::{hash64, unit_f64, Backend, DistanceOracle};
use crate::model::VertexId;

use super::cluster::{charged_exclusive_mssp, charged_mssp, ChargeConfig, Cluster, Recorder};

const MARK_TAG: u64 = 0x6d69_736d;

/// Computes an (O(eps), d)-approximate MIS of the vertices in `w`:
/// members end up pairwise farther than `d/(1+eps)` (exact distances, one
/// more `(1+eps)` under a rounded oracle) and every removed vertex is within
/// `(1+eps) d` of a member.
#[allow(clippy::too_many_arguments)]
pub fn approximate_mis(
    cluster: &Cluster,
    oracle: &DistanceOracle,
    w: &[VertexId],
    d: f64,
    eps: f64,
    mis_c: f64,
    charge: &ChargeConfig,
    seed: u64,
    nonce: u64,
    rec: &mut Recorder,
) -> Result<Vec<VertexId>> {
    if w.is_empty() {
        return Err(FaclocError::BadArgument("empty MIS candidate set".into()));
    }
    if d < 0.0 {
        return Err(FaclocError::BadArgument("negative MIS distance".into()));
    }
    let n = oracle.n_vertices();
    let mut remaining: Vec<VertexId> = w.to_vec();
    remaining.sort_unstable();
    let mut independent: Vec<VertexId> = Vec::new();

    if d == 0.0 {
        // degenerate scale: every candidate is trivially separated
        rec.charge("mis-trivial", 1, &[1])?;
        return Ok(remaining);
    }

    let levels = (n as f64).log2().ceil().max(0.0) as u32;
    let inner = (mis_c * (n as f64).log2().max(1.0)).ceil() as usize;
    'outer: for level in 0..=levels {
        let p = ((1u64 << level) as f64 / n as f64).min(1.0);
        for iter in 0..inner {
            if remaining.is_empty() {
                break 'outer;
            }
            let counter = (level as u64) << 32 | iter as u64;
            let marked: Vec<VertexId> = remaining
                .iter()
                .copied()
                .filter(|&v| {
                    unit_f64(hash64(seed ^ nonce, MARK_TAG, counter, v as u64)) < p
                })
                .collect();
            rec.charge("mis-mark-sync", 1, &[1])?;
            if marked.is_empty() {
                continue;
            }
            let winners: Vec<VertexId> = if marked.len() == 1 {
                marked.clone()
            } else {
                let excl = charged_exclusive_mssp(
                    cluster,
                    oracle,
                    &marked,
                    eps,
                    charge,
                    "mis-exclusive-mssp",
                    rec,
                )?;
                excl.into_iter()
                    .filter(|&(_, _, dist)| dist > d)
                    .map(|(v, _, _)| v)
                    .collect()
            };
            if winners.is_empty() {
                continue;
            }
            independent.extend(&winners);
            let near = charged_mssp(cluster, oracle, &winners, eps, charge, "mis-mssp", rec)?;
            remaining.retain(|&v| !winners.contains(&v) && near[v].1 > (1.0 + eps) * d);
        }
    }

    // Deterministic sweep for anything the sampling left behind. Rare: the
    // random levels clear W w.h.p., but the definitional clauses must hold
    // on every run.
    if !remaining.is_empty() {
        let far: Vec<VertexId> = if independent.is_empty() {
            remaining.clone()
        } else {
            let near = charged_mssp(
                cluster,
                oracle,
                &independent,
                eps,
                charge,
                "mis-cleanup-mssp",
                rec,
            )?;
            remaining
                .iter()
                .copied()
                .filter(|&v| near[v].1 > d)
                .collect()
        };
        let mut added: Vec<VertexId> = Vec::new();
        for &v in &far {
            let close = added.iter().any(|&a| oracle.distance(v, a) <= d);
            if !close {
                added.push(v);
            }
        }
        if !far.is_empty() {
            rec.charge("mis-cleanup-sweep", far.len() as u64, &[2])?;
        }
        independent.extend(&added);
    }
    independent.sort_unstable();
    independent.dedup();
    Ok(independent)
}

/// Post-hoc check of the two definitional clauses on exact distances.
/// Returns `(separation_ok, domination_ok)` for the slack appropriate to
/// the oracle backend.
pub fn check_mis_clauses(
    oracle: &DistanceOracle,
    w: &[VertexId],
    independent: &[VertexId],
    d: f64,
    eps: f64,
) -> (bool, bool) {
    let sep_div = match oracle.backend() {
        Backend::Exact => 1.0 + eps,
        Backend::Rounded { .. } => (1.0 + eps) * (1.0 + eps),
    };
    let tol = 1e-9 * d.max(1.0);
    let mut separation = true;
    for (a, &u) in independent.iter().enumerate() {
        for &v in &independent[a + 1..] {
            if oracle.exact_distance(u, v) < d / sep_div - tol {
                separation = false;
            }
        }
    }
    let mut domination = true;
    for &u in w {
        if independent.contains(&u) {
            continue;
        }
        let near = independent
            .iter()
            .map(|&v| oracle.exact_distance(u, v))
            .fold(f64::INFINITY, f64::min);
        if near > (1.0 + eps) * d + tol {
            domination = false;
        }
    }
    (separation, domination)
}
