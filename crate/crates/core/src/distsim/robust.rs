//! Distributed robust facility location: the anchor loop over cost buckets,
//! approximate radii from neighborhood estimates, the per-radius-class MIS
//! greedy phase, and outlier determination — all on charged primitives with
//! a full round/bandwidth transcript.

use std::collections::BTreeMap;

use crate::error::{FaclocError, Result};
use crate::metric::{Backend, DistanceOracle};
use crate::model::{
    anchor_candidates, evaluate_cost_with, modify_opening_costs, ClientId, FacilityId, Instance,
    Solution, Variant, VertexId,
};

use super::cluster::{bellman_ford_mssp, charged_mssp, Cluster, MsspBackend, Recorder, SimTranscript};
use super::estimate::{ceil_ring, nbd_size_estimates};
use super::mis::approximate_mis;
use super::radius::{approx_radii_plain, ApproxRadius, ApproxRadiusTable};
use super::SimConfig;

pub(super) struct Ctx<'a> {
    pub inst: &'a Instance,
    pub oracle: &'a DistanceOracle,
    pub cluster: &'a Cluster,
    pub cfg: &'a SimConfig,
    pub sigma: f64,
    pub max_ring: usize,
}

impl Ctx<'_> {
    pub fn mssp(
        &self,
        sources: &[VertexId],
        name: &str,
        rec: &mut Recorder,
    ) -> Result<Vec<(VertexId, f64)>> {
        match self.cfg.mssp_backend {
            MsspBackend::Charged => charged_mssp(
                self.cluster,
                self.oracle,
                sources,
                self.cfg.eps,
                &self.cfg.charge,
                name,
                rec,
            ),
            MsspBackend::BellmanFord => bellman_ford_mssp(
                self.cluster,
                &self.inst.metric,
                self.inst.facilities,
                self.inst.clients,
                sources,
                rec,
            ),
        }
    }
}

pub(super) fn make_ctx<'a>(
    inst: &'a Instance,
    oracle: &'a DistanceOracle,
    cluster: &'a Cluster,
    cfg: &'a SimConfig,
) -> Ctx<'a> {
    let sigma = 1.0 / inst.min_positive_value().unwrap_or(1.0);
    let maxd = oracle.max_finite_distance() * sigma;
    let max_ring = ceil_ring(maxd.max(1.0), cfg.eps) + 1;
    Ctx {
        inst,
        oracle,
        cluster,
        cfg,
        sigma,
        max_ring,
    }
}

/// Facilities grouped by radius class, zero class first then rings ascending.
pub(super) fn radius_classes(radii: &ApproxRadiusTable) -> BTreeMap<i64, Vec<FacilityId>> {
    let mut classes: BTreeMap<i64, Vec<FacilityId>> = BTreeMap::new();
    for (i, r) in radii.radii.iter().enumerate() {
        match r {
            ApproxRadius::Zero => classes.entry(i64::MIN).or_default().push(i),
            ApproxRadius::Ring(t) => classes.entry(*t).or_default().push(i),
            ApproxRadius::Removed => {}
        }
    }
    classes
}

#[derive(Clone, Debug)]
pub struct ClassLog {
    /// Unscaled class radius.
    pub radius: f64,
    pub processed: Vec<FacilityId>,
    pub opened: Vec<FacilityId>,
    pub served_added: Vec<ClientId>,
}

#[derive(Clone, Debug)]
pub struct RobustDistRun {
    pub anchor: FacilityId,
    pub anchor_original_cost: f64,
    pub modified: Instance,
    pub radii: ApproxRadiusTable,
    /// Served set at the end of the greedy phase (`C''`).
    pub served_pre: Vec<ClientId>,
    pub class_log: Vec<ClassLog>,
    pub solution: Solution,
    pub cost_modified: f64,
}

#[derive(Debug)]
pub struct RobustDistOutcome {
    pub solution: Solution,
    pub transcript: SimTranscript,
    pub winner: RobustDistRun,
    pub anchors_tried: usize,
}

/// One MIS-greedy anchor run over precomputed radii. Returns
/// `(opened, served_pre, class_log)`.
pub(super) fn mis_greedy(
    ctx: &Ctx<'_>,
    radii: &ApproxRadiusTable,
    stop_ell: Option<usize>,
    serve_during: bool,
    nonce: u64,
    rec: &mut Recorder,
) -> Result<(Vec<FacilityId>, Vec<ClientId>, Vec<ClassLog>)> {
    let eps = ctx.cfg.eps;
    let nc = ctx.inst.clients;
    let prune_factor = 2.0 * (1.0 + eps).powi(3);
    let mut open: Vec<FacilityId> = Vec::new();
    let mut served = vec![false; nc];
    let mut served_count = 0usize;
    let mut processed: Vec<VertexId> = Vec::new();
    let mut log = Vec::new();

    for (class_idx, (_, members)) in radius_classes(radii).into_iter().enumerate() {
        if let Some(ell) = stop_ell {
            if nc - served_count <= ell {
                break;
            }
        }
        let r_val = radii.value(members[0]);
        let mut w = members.clone();
        if !open.is_empty() {
            let near = ctx.mssp(&open, "greedy-prune-mssp", rec)?;
            w.retain(|&v| near[v].1 > prune_factor * r_val);
        }
        let opened_now = if w.is_empty() {
            Vec::new()
        } else {
            approximate_mis(
                ctx.cluster,
                ctx.oracle,
                &w,
                prune_factor * r_val,
                eps,
                ctx.cfg.mis_c,
                &ctx.cfg.charge,
                ctx.cfg.seed,
                nonce ^ ((class_idx as u64) << 8),
                rec,
            )?
        };
        open.extend(&opened_now);
        processed.extend(&members);
        let mut served_added = Vec::new();
        if serve_during {
            let near = ctx.mssp(&processed, "greedy-serve-mssp", rec)?;
            for j in 0..nc {
                if !served[j] && near[ctx.inst.client_vertex(j)].1 <= (1.0 + eps) * r_val {
                    served[j] = true;
                    served_count += 1;
                    served_added.push(j);
                }
            }
        }
        log.push(ClassLog {
            radius: r_val,
            processed: members,
            opened: opened_now,
            served_added,
        });
    }
    let served_list: Vec<ClientId> = (0..nc).filter(|&j| served[j]).collect();
    Ok((open, served_list, log))
}

pub fn robust_facloc_dist_detailed(
    inst: &Instance,
    cluster: &Cluster,
    cfg: &SimConfig,
    backend: Backend,
) -> Result<RobustDistOutcome> {
    if inst.variant != Variant::Robust {
        return Err(FaclocError::BadArgument(
            "robust_facloc_dist needs a robust instance".into(),
        ));
    }
    inst.validate()?;
    let p = inst.coverage.unwrap();
    let ell = inst.clients - p;
    let oracle = DistanceOracle::new(&inst.metric, inst.facilities, inst.clients, backend);
    let ctx = make_ctx(inst, &oracle, cluster, cfg);
    let mut rec = Recorder::new(cluster, cfg.seed);

    let reachable = (0..inst.clients)
        .filter(|&j| {
            (0..inst.facilities)
                .any(|i| oracle.exact_distance(i, inst.client_vertex(j)).is_finite())
        })
        .count();
    if reachable < p {
        return Err(FaclocError::Infeasible(format!(
            "only {reachable} clients are reachable, coverage needs {p}"
        )));
    }

    // Ball counts do not depend on opening costs, so the estimates are
    // computed once and shared by every anchor's radius computation.
    let participants: Vec<VertexId> = (0..inst.clients).map(|j| inst.client_vertex(j)).collect();
    let queries: Vec<VertexId> = (0..inst.facilities).collect();
    let estimates = nbd_size_estimates(
        cluster,
        &oracle,
        cfg.eps,
        &participants,
        &queries,
        ctx.sigma,
        ctx.max_ring,
        cfg.cohen_c,
        cfg.seed,
        0,
        &mut rec,
        &cfg.charge,
    )?;

    let candidates = anchor_candidates(inst, cfg.eps)?;
    let mut best: Option<RobustDistRun> = None;
    for (ai, &anchor) in candidates.iter().enumerate() {
        rec.charge("anchor-broadcast", 1, &[1])?;
        let modified = modify_opening_costs(inst, anchor)?;
        let scaled_costs: Vec<(FacilityId, f64)> = modified
            .opening_costs
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_finite())
            .map(|(i, &f)| (i, f * ctx.sigma))
            .collect();
        let radii = approx_radii_plain(
            &estimates,
            &scaled_costs,
            inst.facilities,
            cfg.eps,
            ctx.sigma,
        );
        let (open, served_pre, class_log) = mis_greedy(
            &ctx,
            &radii,
            Some(ell),
            true,
            (ai as u64 + 1) << 24,
            &mut rec,
        )?;

        // outlier determination on the charged distances
        let mut served = served_pre.clone();
        let mut outliers: Vec<ClientId> = {
            let mut in_served = vec![false; inst.clients];
            for &j in &served {
                in_served[j] = true;
            }
            (0..inst.clients).filter(|&j| !in_served[j]).collect()
        };
        if outliers.len() != ell {
            if open.is_empty() {
                continue; // cannot adjust without any open facility
            }
            let near = ctx.mssp(&open, "outlier-mssp", &mut rec)?;
            let d_of = |j: ClientId| near[inst.client_vertex(j)].1;
            if outliers.len() > ell {
                let mut by_dist: Vec<(f64, ClientId)> =
                    outliers.iter().map(|&j| (d_of(j), j)).collect();
                by_dist.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let move_in: Vec<ClientId> = by_dist[..outliers.len() - ell]
                    .iter()
                    .map(|&(_, j)| j)
                    .collect();
                served.extend(&move_in);
                outliers.retain(|j| !move_in.contains(j));
            } else {
                let mut by_dist: Vec<(f64, ClientId)> =
                    served.iter().map(|&j| (d_of(j), j)).collect();
                by_dist.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
                let move_out: Vec<ClientId> = by_dist[..ell - outliers.len()]
                    .iter()
                    .map(|&(_, j)| j)
                    .collect();
                served.retain(|j| !move_out.contains(j));
                outliers.extend(&move_out);
            }
        }

        let solution = match Solution::assemble(inst, &oracle, open, served) {
            Ok(s) => s,
            Err(FaclocError::Structural(_)) => continue,
            Err(e) => return Err(e),
        };
        // minimum-cost selection needs one more aggregation pass
        rec.charge("cost-estimate", 1, &[2])?;
        let cost_modified = evaluate_cost_with(&modified, &oracle, &solution)?;
        let run = RobustDistRun {
            anchor,
            anchor_original_cost: inst.opening_costs[anchor],
            modified,
            radii,
            served_pre,
            class_log,
            solution,
            cost_modified,
        };
        if best
            .as_ref()
            .is_none_or(|b| run.solution.cost < b.solution.cost)
        {
            best = Some(run);
        }
    }
    let winner = best.ok_or_else(|| {
        FaclocError::Infeasible("no anchor produced a feasible solution".into())
    })?;
    Ok(RobustDistOutcome {
        solution: winner.solution.clone(),
        transcript: rec.finish(),
        winner,
        anchors_tried: candidates.len(),
    })
}

/// Distributed robust facility location with an exact distance backend.
pub fn robust_facloc_dist(
    inst: &Instance,
    cluster: &Cluster,
    cfg: &SimConfig,
) -> Result<(Solution, SimTranscript)> {
    let out = robust_facloc_dist_detailed(inst, cluster, cfg, Backend::Exact)?;
    Ok((out.solution, out.transcript))
}

/// Opened set, served set at the break point, per-class log, and
/// transcript of one externally driven greedy phase.
pub type GreedyPhaseOutput = (Vec<FacilityId>, Vec<ClientId>, Vec<ClassLog>, SimTranscript);

/// Runs the MIS greedy phase on externally supplied radii (for
/// perturbation experiments): returns the opened set, the served set at
/// the break point, the per-class log, and the transcript.
#[allow(clippy::too_many_arguments)]
pub fn mis_greedy_with_radii(
    inst: &Instance,
    cluster: &Cluster,
    cfg: &SimConfig,
    backend: Backend,
    radii: &ApproxRadiusTable,
    stop_ell: Option<usize>,
    serve_during: bool,
) -> Result<GreedyPhaseOutput> {
    let oracle = DistanceOracle::new(&inst.metric, inst.facilities, inst.clients, backend);
    let ctx = make_ctx(inst, &oracle, cluster, cfg);
    let mut rec = Recorder::new(cluster, cfg.seed);
    let (open, served, log) = mis_greedy(&ctx, radii, stop_ell, serve_during, 0, &mut rec)?;
    Ok((open, served, log, rec.finish()))
}
