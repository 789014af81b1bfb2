//! Exact optima for tiny instances by facility-subset enumeration, used as
//! ground truth in approximation-ratio tests.
//!
//! For a fixed open set the best client choice is greedy: robust serves the
//! `p` nearest clients, penalty lets each client independently pick
//! `min(connection, penalty)`. That keeps the inner loop polynomial and the
//! enumeration exact.

use crate::error::{FaclocError, Result};

use crate::model::{ClientId, FacilityId, Instance, Solution, Variant};

/// Enumeration guard: subsets of more than this many facilities are refused.
pub const MAX_ORACLE_FACILITIES: usize = 20;

#[derive(Clone, Debug)]
pub struct OptResult {
    pub opt_cost: f64,
    pub witness: Solution,
    /// Number of facility subsets examined.
    pub enumerated: u64,
}

fn guard(inst: &Instance) -> Result<()> {
    if inst.facilities > MAX_ORACLE_FACILITIES {
        return Err(FaclocError::SizeGuard(format!(
            "{} facilities exceed the enumeration guard of {MAX_ORACLE_FACILITIES}",
            inst.facilities
        )));
    }
    Ok(())
}

fn open_set(mask: u64, nf: usize) -> Vec<FacilityId> {
    (0..nf).filter(|i| mask >> i & 1 == 1).collect()
}

/// Optimal robust solution: for every open set, serve the `p` closest
/// clients. The empty open set participates only when `p = 0`.
pub fn opt_robust(inst: &Instance) -> Result<OptResult> {
    if inst.variant != Variant::Robust {
        return Err(FaclocError::BadArgument(
            "opt_robust needs a robust instance".into(),
        ));
    }
    inst.validate()?;
    guard(inst)?;
    let p = inst.coverage.unwrap();
    let oracle = inst.exact_oracle();
    let nf = inst.facilities;

    let mut best: Option<(f64, Vec<FacilityId>, Vec<ClientId>)> = None;
    let mut enumerated = 0u64;
    let start = if p == 0 { 0u64 } else { 1u64 };
    for mask in start..1u64 << nf {
        let open = open_set(mask, nf);
        if open.iter().any(|&i| inst.opening_costs[i].is_infinite()) {
            continue;
        }
        enumerated += 1;
        let mut opening: f64 = open.iter().map(|&i| inst.opening_costs[i]).sum();
        let mut dists: Vec<(f64, ClientId)> = (0..inst.clients)
            .map(|j| {
                let d = open
                    .iter()
                    .map(|&i| oracle.exact_distance(i, inst.client_vertex(j)))
                    .fold(f64::INFINITY, f64::min);
                (d, j)
            })
            .collect();
        dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let chosen = &dists[..p];
        if chosen.iter().any(|(d, _)| !d.is_finite()) {
            continue; // this open set cannot cover p clients
        }
        opening += chosen.iter().map(|(d, _)| d).sum::<f64>();
        if best.as_ref().is_none_or(|(c, _, _)| opening < *c) {
            best = Some((opening, open, chosen.iter().map(|&(_, j)| j).collect()));
        }
    }
    let (cost, open, served) = best.ok_or_else(|| {
        FaclocError::Infeasible("no facility subset can meet the coverage".into())
    })?;
    let witness = Solution::assemble(inst, &oracle, open, served)?;
    debug_assert!((witness.cost - cost).abs() <= 1e-9 * cost.max(1.0));
    Ok(OptResult {
        opt_cost: cost,
        witness,
        enumerated,
    })
}

/// Optimal penalty solution: for every open set (including the empty one),
/// each client pays `min(d(j, F'), p_j)`.
pub fn opt_penalty(inst: &Instance) -> Result<OptResult> {
    if inst.variant != Variant::Penalty {
        return Err(FaclocError::BadArgument(
            "opt_penalty needs a penalty instance".into(),
        ));
    }
    inst.validate()?;
    guard(inst)?;
    let pens = inst.penalties.as_ref().unwrap();
    let oracle = inst.exact_oracle();
    let nf = inst.facilities;

    let mut best: Option<(f64, Vec<FacilityId>, Vec<ClientId>)> = None;
    let mut enumerated = 0u64;
    for mask in 0..1u64 << nf {
        let open = open_set(mask, nf);
        if open.iter().any(|&i| inst.opening_costs[i].is_infinite()) {
            continue;
        }
        enumerated += 1;
        let mut cost: f64 = open.iter().map(|&i| inst.opening_costs[i]).sum();
        let mut served = Vec::new();
        #[allow(clippy::needless_range_loop)]
        for j in 0..inst.clients {
            let d = open
                .iter()
                .map(|&i| oracle.exact_distance(i, inst.client_vertex(j)))
                .fold(f64::INFINITY, f64::min);
            if d <= pens[j] {
                cost += d;
                served.push(j);
            } else {
                cost += pens[j];
            }
        }
        if best.as_ref().is_none_or(|(c, _, _)| cost < *c) {
            best = Some((cost, open, served));
        }
    }
    let (cost, open, served) = best.unwrap();
    let witness = Solution::assemble(inst, &oracle, open, served)?;
    debug_assert!((witness.cost - cost).abs() <= 1e-9 * cost.max(1.0));
    Ok(OptResult {
        opt_cost: cost,
        witness,
        enumerated,
    })
}
