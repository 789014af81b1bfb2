//! Distributed facility location with penalties: per-penalty-class
//! neighborhood estimates, the capped-radius computation, the MIS greedy
//! phase, and the distance-vs-penalty outlier rule.

use std::collections::BTreeMap;

use crate::error::{FaclocError, Result};
use crate::metric::{Backend, DistanceOracle};
use crate::model::{ClientId, FacilityId, Instance, Solution, Variant, VertexId};

use super::cluster::{Cluster, Recorder, SimTranscript};
use super::estimate::{floor_ring, nbd_size_estimates, NbdEstimates};
use super::radius::{approx_radii_penalty, ApproxRadiusTable, RingCounts};
use super::robust::{make_ctx, mis_greedy, ClassLog};
use super::SimConfig;

#[derive(Debug)]
pub struct PenaltyDistOutcome {
    pub solution: Solution,
    pub transcript: SimTranscript,
    pub radii: ApproxRadiusTable,
    pub class_log: Vec<ClassLog>,
    /// Penalty classes `b -> client vertices` (zero penalties excluded).
    pub penalty_classes: BTreeMap<usize, Vec<VertexId>>,
}

/// Clients with positive penalty grouped into `(1+eps)`-classes of the
/// scaled penalty value.
pub fn penalty_classes(inst: &Instance, sigma: f64, eps: f64) -> BTreeMap<usize, Vec<VertexId>> {
    let pens = inst.penalties.as_ref().expect("penalty instance");
    let mut classes: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
    for (j, &p) in pens.iter().enumerate() {
        if p > 0.0 {
            let b = floor_ring(p * sigma, eps);
            classes.entry(b).or_default().push(inst.client_vertex(j));
        }
    }
    classes
}

pub fn penalty_facloc_dist_detailed(
    inst: &Instance,
    cluster: &Cluster,
    cfg: &SimConfig,
    backend: Backend,
) -> Result<PenaltyDistOutcome> {
    if inst.variant != Variant::Penalty {
        return Err(FaclocError::BadArgument(
            "penalty_facloc_dist needs a penalty instance".into(),
        ));
    }
    inst.validate()?;
    let pens = inst.penalties.as_ref().unwrap();
    let oracle = DistanceOracle::new(&inst.metric, inst.facilities, inst.clients, backend);
    let ctx = make_ctx(inst, &oracle, cluster, cfg);
    let mut rec = Recorder::new(cluster, cfg.seed);

    let classes = penalty_classes(inst, ctx.sigma, cfg.eps);
    let queries: Vec<VertexId> = (0..inst.facilities).collect();
    let mut estimates: Vec<(usize, NbdEstimates)> = Vec::new();
    for (&b, members) in &classes {
        let est = nbd_size_estimates(
            cluster,
            &oracle,
            cfg.eps,
            members,
            &queries,
            ctx.sigma,
            ctx.max_ring,
            cfg.cohen_c,
            cfg.seed,
            b as u64 + 1,
            &mut rec,
            &cfg.charge,
        )?;
        estimates.push((b, est));
    }
    let per_class: Vec<(usize, &dyn RingCounts)> = estimates
        .iter()
        .map(|(b, est)| (*b, est as &dyn RingCounts))
        .collect();
    let scaled_costs: Vec<(FacilityId, f64)> = inst
        .opening_costs
        .iter()
        .enumerate()
        .filter(|(_, f)| f.is_finite())
        .map(|(i, &f)| (i, f * ctx.sigma))
        .collect();
    let radii = approx_radii_penalty(
        &per_class,
        &scaled_costs,
        inst.facilities,
        cfg.eps,
        ctx.sigma,
    );

    let (open, _, class_log) = mis_greedy(&ctx, &radii, None, false, 1 << 60, &mut rec)?;

    // Outlier determination: serve every client whose (charged) distance to
    // the open set is within its penalty.
    let mut served: Vec<ClientId> = Vec::new();
    if !open.is_empty() {
        let near = ctx.mssp(&open, "penalty-outlier-mssp", &mut rec)?;
        for j in 0..inst.clients {
            if near[inst.client_vertex(j)].1 <= pens[j] {
                served.push(j);
            }
        }
    }
    let solution = Solution::assemble(inst, &oracle, open, served)?;
    Ok(PenaltyDistOutcome {
        solution,
        transcript: rec.finish(),
        radii,
        class_log,
        penalty_classes: classes,
    })
}

/// Distributed penalty facility location with an exact distance backend.
pub fn penalty_facloc_dist(
    inst: &Instance,
    cluster: &Cluster,
    cfg: &SimConfig,
) -> Result<(Solution, SimTranscript)> {
    let out = penalty_facloc_dist_detailed(inst, cluster, cfg, Backend::Exact)?;
    Ok((out.solution, out.transcript))
}
