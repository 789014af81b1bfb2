//! Sequential solvers: exact radius computation, the greedy opening phase,
//! and the robust / penalty facility-location algorithms.
//!
//! Radii are solved exactly by sweeping the sorted breakpoints of the
//! piecewise-linear charge function, so the radius equation holds to
//! floating-point accuracy without a bisection tolerance.

use crate::error::{FaclocError, Result};
use crate::metric::DistanceOracle;
use crate::model::{
    anchor_candidates, evaluate_cost_with, modify_opening_costs, ClientId, FacilityId, Instance,
    Solution, Variant,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadiusKind {
    Plain,
    Penalty,
}

/// A facility's radius, or `Removed` when no radius exists (penalty cap
/// below the opening cost, or a positive-cost facility with no reachable
/// clients).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Radius {
    Finite(f64),
    Removed,
}

impl Radius {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Radius::Finite(r) => Some(*r),
            Radius::Removed => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RadiusTable {
    pub kind: RadiusKind,
    /// Indexed by facility id; `Removed` also covers facilities flagged
    /// removable by cost modification.
    pub radii: Vec<Radius>,
}

impl RadiusTable {
    pub fn participating(&self) -> impl Iterator<Item = (FacilityId, f64)> + '_ {
        self.radii
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.finite().map(|r| (i, r)))
    }
}

/// Smallest `r >= 0` with `sum_j max(0, r - d_j) = f`, or `None` when no
/// finite root exists (`f > 0` and no finite distances).
pub fn solve_radius_plain(dists: &[f64], f: f64) -> Option<f64> {
    assert!(f >= 0.0 && !f.is_nan());
    if f == 0.0 {
        return Some(0.0);
    }
    if f.is_infinite() {
        return None;
    }
    let mut d: Vec<f64> = dists.iter().copied().filter(|x| x.is_finite()).collect();
    if d.is_empty() {
        return None;
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = d.len();
    let mut s = 0.0;
    for k in 1..=m {
        s += d[k - 1];
        let r = (f + s) / k as f64;
        let hi = if k < m { d[k] } else { f64::INFINITY };
        if r <= hi {
            return Some(r);
        }
    }
    unreachable!("last segment extends to infinity");
}

/// Smallest `r >= 0` with `sum_j max(min(r - d_j, p_j - d_j), 0) = f`, or
/// `None` when the saturation cap `sum_j max(p_j - d_j, 0)` stays below `f`.
pub fn solve_radius_penalty(dists: &[f64], penalties: &[f64], f: f64) -> Option<f64> {
    assert_eq!(dists.len(), penalties.len());
    assert!(f >= 0.0 && !f.is_nan());
    if f == 0.0 {
        return Some(0.0);
    }
    if f.is_infinite() {
        return None;
    }
    // A client contributes slope 1 on [d_j, p_j) and saturates at p_j - d_j;
    // clients with p_j <= d_j never contribute.
    let mut events: Vec<(f64, i64)> = Vec::new();
    for (&d, &p) in dists.iter().zip(penalties) {
        if d.is_finite() && p > d {
            events.push((d, 1));
            events.push((p, -1));
        }
    }
    if events.is_empty() {
        return None;
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (mut x_prev, mut val, mut slope) = (0.0f64, 0.0f64, 0i64);
    let mut i = 0;
    while i < events.len() {
        let x = events[i].0;
        let gain = slope as f64 * (x - x_prev);
        if slope > 0 && val + gain >= f {
            return Some(x_prev + (f - val) / slope as f64);
        }
        val += gain;
        x_prev = x;
        while i < events.len() && events[i].0 == x {
            slope += events[i].1;
            i += 1;
        }
    }
    // Saturated at the cap; accept only an exact (tolerance) hit.
    if val >= f - 1e-9 * f.max(1.0) {
        Some(x_prev)
    } else {
        None
    }
}

/// Radii for the (possibly cost-modified) plain charge function. Facilities
/// flagged removable get `Removed`.
pub fn compute_radii_plain(inst: &Instance, oracle: &DistanceOracle) -> RadiusTable {
    let radii = (0..inst.facilities)
        .map(|i| {
            let f = inst.opening_costs[i];
            if f.is_infinite() {
                return Radius::Removed;
            }
            let dists: Vec<f64> = (0..inst.clients)
                .map(|j| oracle.exact_distance(i, inst.client_vertex(j)))
                .collect();
            match solve_radius_plain(&dists, f) {
                Some(r) => Radius::Finite(r),
                None => Radius::Removed,
            }
        })
        .collect();
    RadiusTable {
        kind: RadiusKind::Plain,
        radii,
    }
}

pub fn compute_radii_penalty(inst: &Instance, oracle: &DistanceOracle) -> RadiusTable {
    let pens = inst
        .penalties
        .as_ref()
        .expect("penalty radii need penalties");
    let radii = (0..inst.facilities)
        .map(|i| {
            let f = inst.opening_costs[i];
            if f.is_infinite() {
                return Radius::Removed;
            }
            let dists: Vec<f64> = (0..inst.clients)
                .map(|j| oracle.exact_distance(i, inst.client_vertex(j)))
                .collect();
            match solve_radius_penalty(&dists, pens, f) {
                Some(r) => Radius::Finite(r),
                None => Radius::Removed,
            }
        })
        .collect();
    RadiusTable {
        kind: RadiusKind::Penalty,
        radii,
    }
}

/// Trace of the greedy phase: processing order, opened set, and the served
/// clients added at each iteration (cumulative union gives each `C_i`).
#[derive(Clone, Debug)]
pub struct GreedyTrace {
    pub order: Vec<FacilityId>,
    pub radii_sorted: Vec<f64>,
    pub opened: Vec<FacilityId>,
    pub served_delta: Vec<Vec<ClientId>>,
    /// Iterations executed before the stop predicate fired (or all of them).
    pub iterations: usize,
    pub stopped_early: bool,
}

impl GreedyTrace {
    pub fn processed(&self) -> &[FacilityId] {
        &self.order[..self.iterations]
    }

    pub fn served(&self) -> Vec<ClientId> {
        let mut out: Vec<ClientId> = self.served_delta.iter().flatten().copied().collect();
        out.sort_unstable();
        out
    }

    pub fn last_radius(&self) -> Option<f64> {
        if self.iterations == 0 {
            None
        } else {
            Some(self.radii_sorted[self.iterations - 1])
        }
    }
}

/// Greedy opening: process facilities in non-decreasing radius order, open
/// one unless an open facility sits within `2 r_i`, and mark clients within
/// `r_i` of any processed facility as served. `stop` is evaluated on the
/// served count before each iteration.
pub fn greedy_open(
    radii: &RadiusTable,
    oracle: &DistanceOracle,
    inst: &Instance,
    stop: Option<&dyn Fn(usize) -> bool>,
) -> GreedyTrace {
    let mut order: Vec<(f64, FacilityId)> = radii.participating().map(|(i, r)| (r, i)).collect();
    order.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let nc = inst.clients;
    let mut min_dist = vec![f64::INFINITY; nc];
    let mut served = vec![false; nc];
    let mut served_count = 0usize;

    let mut trace = GreedyTrace {
        order: order.iter().map(|&(_, i)| i).collect(),
        radii_sorted: order.iter().map(|&(r, _)| r).collect(),
        opened: Vec::new(),
        served_delta: Vec::new(),
        iterations: 0,
        stopped_early: false,
    };

    for &(r, i) in &order {
        if let Some(stop) = stop {
            if stop(served_count) {
                trace.stopped_early = true;
                break;
            }
        }
        let blocked = trace
            .opened
            .iter()
            .any(|&o| oracle.exact_distance(o, i) <= 2.0 * r);
        if !blocked {
            trace.opened.push(i);
        }
        let mut delta = Vec::new();
        for j in 0..nc {
            let d = oracle.exact_distance(i, inst.client_vertex(j));
            if d < min_dist[j] {
                min_dist[j] = d;
            }
            if !served[j] && min_dist[j] <= r {
                served[j] = true;
                served_count += 1;
                delta.push(j);
            }
        }
        trace.served_delta.push(delta);
        trace.iterations += 1;
    }
    trace
}

/// One anchor's run of the robust algorithm, kept for certification.
#[derive(Clone, Debug)]
pub struct RobustAnchorRun {
    pub anchor: FacilityId,
    pub anchor_original_cost: f64,
    pub modified: Instance,
    pub radii: RadiusTable,
    pub trace: GreedyTrace,
    /// Served set when the outlier determination phase was entered (`C''`).
    pub served_pre: Vec<ClientId>,
    pub solution: Solution,
    /// Objective of the solution under the modified opening costs.
    pub cost_modified: f64,
}

#[derive(Clone, Debug)]
pub struct RobustOutcome {
    pub solution: Solution,
    pub winner: RobustAnchorRun,
    pub anchors_tried: usize,
}

/// Outlier determination on exact distances: trims or grows the served set
/// to exactly `p` clients. Ties break on client id.
fn determine_outliers(
    inst: &Instance,
    oracle: &DistanceOracle,
    open: &[FacilityId],
    served_pre: &[ClientId],
    ell: usize,
) -> (Vec<ClientId>, Vec<ClientId>) {
    let nc = inst.clients;
    let dist_to_open = |j: ClientId| -> f64 {
        open.iter()
            .map(|&i| oracle.exact_distance(i, inst.client_vertex(j)))
            .fold(f64::INFINITY, f64::min)
    };
    let in_served = {
        let mut b = vec![false; nc];
        for &j in served_pre {
            b[j] = true;
        }
        b
    };
    let mut served: Vec<ClientId> = served_pre.to_vec();
    let mut outliers: Vec<ClientId> = (0..nc).filter(|&j| !in_served[j]).collect();
    if outliers.len() > ell {
        // move the closest |O'| - ell outliers into the served set
        let mut by_dist: Vec<(f64, ClientId)> = outliers.iter().map(|&j| (dist_to_open(j), j)).collect();
        by_dist.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let move_in: Vec<ClientId> = by_dist[..outliers.len() - ell]
            .iter()
            .map(|&(_, j)| j)
            .collect();
        served.extend(&move_in);
        outliers.retain(|j| !move_in.contains(j));
    } else if outliers.len() < ell {
        // move the farthest ell - |O'| served clients out
        let mut by_dist: Vec<(f64, ClientId)> = served.iter().map(|&j| (dist_to_open(j), j)).collect();
        by_dist.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let move_out: Vec<ClientId> = by_dist[..ell - outliers.len()]
            .iter()
            .map(|&(_, j)| j)
            .collect();
        served.retain(|j| !move_out.contains(j));
        outliers.extend(&move_out);
    }
    served.sort_unstable();
    outliers.sort_unstable();
    (served, outliers)
}

/// Robust facility location: anchor-guessing outer loop over cost buckets,
/// modified Mettu-Plaxton greedy with an early break once at most `l`
/// outliers remain, then outlier determination. Returns the minimum-cost
/// candidate (ties to the earliest anchor).
pub fn robust_facloc(inst: &Instance, eps: f64) -> Result<RobustOutcome> {
    if inst.variant != Variant::Robust {
        return Err(FaclocError::BadArgument(
            "robust_facloc needs a robust instance".into(),
        ));
    }
    inst.validate()?;
    let p = inst.coverage.unwrap();
    let ell = inst.clients - p;
    let oracle = inst.exact_oracle();

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

    let candidates = anchor_candidates(inst, eps)?;
    let mut best: Option<RobustAnchorRun> = None;
    for &anchor in &candidates {
        let modified = modify_opening_costs(inst, anchor)?;
        let radii = compute_radii_plain(&modified, &oracle);
        let trace = greedy_open(&radii, &oracle, &modified, Some(&|served| inst.clients - served <= ell));
        let served_pre = trace.served();
        let (served, _outliers) = determine_outliers(inst, &oracle, &trace.opened, &served_pre, ell);
        let solution = match Solution::assemble(inst, &oracle, trace.opened.clone(), served) {
            Ok(s) => s,
            // an over-aggressive anchor can disconnect the coverage; skip it
            Err(FaclocError::Structural(_)) => continue,
            Err(e) => return Err(e),
        };
        let cost_modified = evaluate_cost_with(&modified, &oracle, &solution)?;
        let run = RobustAnchorRun {
            anchor,
            anchor_original_cost: inst.opening_costs[anchor],
            modified,
            radii,
            trace,
            served_pre,
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
    Ok(RobustOutcome {
        solution: winner.solution.clone(),
        anchors_tried: candidates.len(),
        winner,
    })
}

#[derive(Clone, Debug)]
pub struct PenaltyOutcome {
    pub solution: Solution,
    pub radii: RadiusTable,
    pub trace: GreedyTrace,
}

/// Facility location with penalties: penalty radii, full greedy pass, then
/// each client connects to its nearest open facility iff that distance does
/// not exceed its penalty.
pub fn penalty_facloc(inst: &Instance) -> Result<PenaltyOutcome> {
    if inst.variant != Variant::Penalty {
        return Err(FaclocError::BadArgument(
            "penalty_facloc needs a penalty instance".into(),
        ));
    }
    inst.validate()?;
    let oracle = inst.exact_oracle();
    let pens = inst.penalties.as_ref().unwrap();
    let radii = compute_radii_penalty(inst, &oracle);
    let trace = greedy_open(&radii, &oracle, inst, None);
    let mut served = Vec::new();
    #[allow(clippy::needless_range_loop)]
    for j in 0..inst.clients {
        let d = trace
            .opened
            .iter()
            .map(|&i| oracle.exact_distance(i, inst.client_vertex(j)))
            .fold(f64::INFINITY, f64::min);
        if d <= pens[j] {
            served.push(j);
        }
    }
    let solution = Solution::assemble(inst, &oracle, trace.opened.clone(), served)?;
    Ok(PenaltyOutcome {
        solution,
        radii,
        trace,
    })
}

/// Residual of the radius equation, used by tests and debug checks.
pub fn radius_residual(
    kind: RadiusKind,
    dists: &[f64],
    penalties: Option<&[f64]>,
    f: f64,
    r: f64,
) -> f64 {
    let total: f64 = dists
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            if !d.is_finite() {
                return 0.0;
            }
            match kind {
                RadiusKind::Plain => (r - d).max(0.0),
                RadiusKind::Penalty => {
                    let p = penalties.unwrap()[j];
                    (r - d).min(p - d).max(0.0)
                }
            }
        })
        .sum();
    (total - f).abs()
}
