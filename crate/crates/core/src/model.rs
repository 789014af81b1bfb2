//! Problem instances, solutions, and cost evaluation for the outlier variants.
//!
//! Vertex ids follow the file schema: facilities are `0..nf`, clients are
//! `nf..nf+nc`. Opening costs may hold the `+inf` sentinel after cost
//! modification; such facilities are treated as removed and never take part
//! in arithmetic.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{FaclocError, Result};
use crate::metric::{Backend, DistanceOracle};

pub type FacilityId = usize;
/// Client index in `0..nc` (not a vertex id).
pub type ClientId = usize;
/// Vertex id in `0..nf+nc`.
pub type VertexId = usize;

/// Absolute tolerance used for equality-style comparisons on costs and
/// distances, relative to a unit scale (min positive value normalized to 1).
pub const TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Plain,
    Robust,
    Penalty,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Plain => write!(f, "plain"),
            Variant::Robust => write!(f, "robust"),
            Variant::Penalty => write!(f, "penalty"),
        }
    }
}

/// The metric, either an explicit `|F| x |C|` cost matrix or an implicit
/// edge-weighted graph on the vertex set `F  u  C`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum MetricView {
    Explicit { matrix: Vec<Vec<f64>> },
    Implicit { edges: Vec<(usize, usize, f64)> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Instance {
    pub variant: Variant,
    /// Number of facilities, `|F|`.
    pub facilities: usize,
    /// Number of clients, `|C|`.
    pub clients: usize,
    pub opening_costs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalties: Option<Vec<f64>>,
    pub metric: MetricView,
}

impl Instance {
    pub fn n_vertices(&self) -> usize {
        self.facilities + self.clients
    }

    pub fn client_vertex(&self, j: ClientId) -> VertexId {
        self.facilities + j
    }

    /// Outlier budget `l = |C| - p` for the robust variant.
    pub fn ell(&self) -> Option<usize> {
        self.coverage.map(|p| self.clients - p)
    }

    /// A facility flagged removable by cost modification.
    pub fn is_removable(&self, i: FacilityId) -> bool {
        self.opening_costs[i].is_infinite()
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(FaclocError::InvalidInstance(m));
        if self.facilities == 0 {
            return err("no facilities".into());
        }
        if self.clients == 0 {
            return err("no clients".into());
        }
        if self.opening_costs.len() != self.facilities {
            return err(format!(
                "opening_costs has {} entries for {} facilities",
                self.opening_costs.len(),
                self.facilities
            ));
        }
        for (i, &f) in self.opening_costs.iter().enumerate() {
            if f.is_nan() || f < 0.0 {
                return err(format!("opening cost of facility {i} is {f}"));
            }
        }
        match self.variant {
            Variant::Robust => {
                let Some(p) = self.coverage else {
                    return err("robust variant requires coverage".into());
                };
                if p > self.clients {
                    return Err(FaclocError::Infeasible(format!(
                        "coverage {p} exceeds {} clients",
                        self.clients
                    )));
                }
                if self.penalties.is_some() {
                    return err("robust variant must not carry penalties".into());
                }
            }
            Variant::Penalty => {
                let Some(pens) = &self.penalties else {
                    return err("penalty variant requires penalties".into());
                };
                if pens.len() != self.clients {
                    return err(format!(
                        "penalties has {} entries for {} clients",
                        pens.len(),
                        self.clients
                    ));
                }
                if pens.iter().any(|p| !p.is_finite() || *p < 0.0) {
                    return err("penalties must be finite and nonnegative".into());
                }
                if self.coverage.is_some() {
                    return err("penalty variant must not carry coverage".into());
                }
            }
            Variant::Plain => {
                if self.coverage.is_some() || self.penalties.is_some() {
                    return err("plain variant carries neither coverage nor penalties".into());
                }
            }
        }
        match &self.metric {
            MetricView::Explicit { matrix } => {
                if matrix.len() != self.facilities {
                    return err(format!(
                        "matrix has {} rows for {} facilities",
                        matrix.len(),
                        self.facilities
                    ));
                }
                for row in matrix {
                    if row.len() != self.clients {
                        return err("matrix row length differs from client count".into());
                    }
                    if row.iter().any(|c| c.is_nan() || *c < 0.0) {
                        return err("connection costs must be nonnegative".into());
                    }
                }
            }
            MetricView::Implicit { edges } => {
                let n = self.n_vertices();
                for &(u, v, w) in edges {
                    if u >= n || v >= n {
                        return err(format!("edge ({u},{v}) out of range for {n} vertices"));
                    }
                    if !w.is_finite() || w < 0.0 {
                        return err(format!("edge ({u},{v}) has weight {w}"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Instance> {
        let inst: Instance = serde_json::from_str(s)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// Exact-backend oracle over this instance's metric.
    pub fn exact_oracle(&self) -> DistanceOracle {
        DistanceOracle::new(&self.metric, self.facilities, self.clients, Backend::Exact)
    }

    /// Smallest strictly positive value among connection costs / edge weights,
    /// opening costs, and penalties. Used to anchor the `(1+eps)` grids.
    pub fn min_positive_value(&self) -> Option<f64> {
        let mut best = f64::INFINITY;
        let mut upd = |x: f64| {
            if x.is_finite() && x > 0.0 && x < best {
                best = x;
            }
        };
        match &self.metric {
            MetricView::Explicit { matrix } => {
                matrix.iter().flatten().for_each(|&c| upd(c));
            }
            MetricView::Implicit { edges } => {
                edges.iter().for_each(|&(_, _, w)| upd(w));
            }
        }
        self.opening_costs.iter().for_each(|&f| upd(f));
        if let Some(p) = &self.penalties {
            p.iter().for_each(|&x| upd(x));
        }
        if best.is_finite() {
            Some(best)
        } else {
            None
        }
    }
}

/// A solution: open facilities, served clients, outliers, and the assignment
/// of served clients to open facilities.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Solution {
    pub open: Vec<FacilityId>,
    pub served: Vec<ClientId>,
    pub outliers: Vec<ClientId>,
    pub assignment: BTreeMap<ClientId, FacilityId>,
    pub cost: f64,
}

impl Solution {
    /// Builds a solution from an open set and served set, assigning each
    /// served client to its nearest open facility (exact distances,
    /// ties to the lowest facility id), and evaluating the cost.
    pub fn assemble(
        inst: &Instance,
        oracle: &DistanceOracle,
        mut open: Vec<FacilityId>,
        mut served: Vec<ClientId>,
    ) -> Result<Solution> {
        open.sort_unstable();
        open.dedup();
        served.sort_unstable();
        served.dedup();
        let outliers: Vec<ClientId> = (0..inst.clients).filter(|j| !served.contains(j)).collect();
        let mut assignment = BTreeMap::new();
        for &j in &served {
            let jv = inst.client_vertex(j);
            let mut best: Option<(f64, FacilityId)> = None;
            for &i in &open {
                let d = oracle.exact_distance(i, jv);
                if best.is_none_or(|(bd, bi)| d < bd || (d == bd && i < bi)) {
                    best = Some((d, i));
                }
            }
            match best {
                Some((d, i)) if d.is_finite() => {
                    assignment.insert(j, i);
                }
                _ => {
                    return Err(FaclocError::Structural(format!(
                        "served client {j} is unreachable from the open set"
                    )))
                }
            }
        }
        let mut sol = Solution {
            open,
            served,
            outliers,
            assignment,
            cost: 0.0,
        };
        sol.cost = evaluate_cost_with(inst, oracle, &sol)?;
        Ok(sol)
    }
}

/// Evaluates the objective of `sol` on `inst` using exact metric distances.
///
/// Robust/plain: sum of opening costs plus connection costs of served
/// clients; penalty adds the penalties of outliers.
pub fn evaluate_cost(inst: &Instance, sol: &Solution) -> Result<f64> {
    let oracle = inst.exact_oracle();
    evaluate_cost_with(inst, &oracle, sol)
}

/// `evaluate_cost` against a prebuilt oracle (must wrap the same metric).
pub fn evaluate_cost_with(inst: &Instance, oracle: &DistanceOracle, sol: &Solution) -> Result<f64> {
    // Structural checks: partition of C, assignment targets open.
    let mut seen = vec![false; inst.clients];
    for &j in sol.served.iter().chain(sol.outliers.iter()) {
        if j >= inst.clients {
            return Err(FaclocError::Structural(format!("client {j} out of range")));
        }
        if seen[j] {
            return Err(FaclocError::Structural(format!(
                "client {j} appears in both served and outlier sets"
            )));
        }
        seen[j] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(FaclocError::Structural(
            "served and outliers do not cover all clients".into(),
        ));
    }
    for (&j, &i) in &sol.assignment {
        if !sol.open.contains(&i) {
            return Err(FaclocError::Structural(format!(
                "client {j} assigned to facility {i} which is not open"
            )));
        }
    }
    match inst.variant {
        Variant::Plain => {
            if !sol.outliers.is_empty() {
                return Err(FaclocError::Structural(
                    "plain variant serves every client".into(),
                ));
            }
        }
        Variant::Robust => {
            let p = inst.coverage.unwrap_or(0);
            if sol.served.len() < p {
                return Err(FaclocError::Infeasible(format!(
                    "coverage requires {p} served clients, got {}",
                    sol.served.len()
                )));
            }
        }
        Variant::Penalty => {}
    }

    let mut cost = 0.0;
    for &i in &sol.open {
        let f = inst.opening_costs[i];
        if f.is_infinite() {
            return Err(FaclocError::Structural(format!(
                "facility {i} is flagged removable and cannot be opened"
            )));
        }
        cost += f;
    }
    for &j in &sol.served {
        let jv = inst.client_vertex(j);
        let d = sol
            .open
            .iter()
            .map(|&i| oracle.exact_distance(i, jv))
            .fold(f64::INFINITY, f64::min);
        if !d.is_finite() {
            return Err(FaclocError::Structural(format!(
                "served client {j} has no reachable open facility"
            )));
        }
        cost += d;
    }
    if inst.variant == Variant::Penalty {
        let pens = inst.penalties.as_ref().unwrap();
        for &j in &sol.outliers {
            cost += pens[j];
        }
    }
    Ok(cost)
}

/// Cost modification around an anchor facility: costs above the anchor's go
/// to the `+inf` sentinel (removable), the anchor's own cost drops to zero.
pub fn modify_opening_costs(inst: &Instance, anchor: FacilityId) -> Result<Instance> {
    if anchor >= inst.facilities {
        return Err(FaclocError::BadArgument(format!(
            "anchor {anchor} out of range"
        )));
    }
    let fe = inst.opening_costs[anchor];
    let mut out = inst.clone();
    for (i, f) in out.opening_costs.iter_mut().enumerate() {
        if i == anchor {
            *f = 0.0;
        } else if *f > fe {
            *f = f64::INFINITY;
        }
    }
    Ok(out)
}

/// Anchor candidates: the most expensive facility of every nonempty cost
/// bucket `[m*(1+eps)^t, m*(1+eps)^{t+1})` where `m` is the smallest positive
/// opening cost, plus one candidate for the zero-cost bucket when present.
///
/// For the most expensive facility `i*` of any optimum, some candidate
/// `i_e` satisfies `f_{i*} <= f_{i_e} <= (1+eps) f_{i*}`.
pub fn anchor_candidates(inst: &Instance, eps: f64) -> Result<Vec<FacilityId>> {
    if inst.facilities == 0 {
        return Err(FaclocError::BadArgument("empty facility set".into()));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(FaclocError::BadArgument("eps must be positive".into()));
    }
    let costs = &inst.opening_costs;
    let min_pos = costs
        .iter()
        .copied()
        .filter(|f| f.is_finite() && *f > 0.0)
        .fold(f64::INFINITY, f64::min);

    let mut zero_candidate: Option<FacilityId> = None;
    // bucket index -> facility with max cost in bucket (ties to lowest id)
    let mut buckets: BTreeMap<i64, FacilityId> = BTreeMap::new();
    let log1e = (1.0 + eps).ln();
    for (i, &f) in costs.iter().enumerate() {
        if f.is_infinite() {
            continue;
        }
        if f == 0.0 {
            if zero_candidate.is_none() {
                zero_candidate = Some(i);
            }
            continue;
        }
        let t = ((f / min_pos).ln() / log1e).floor() as i64;
        buckets
            .entry(t)
            .and_modify(|best| {
                if costs[i] > costs[*best] {
                    *best = i;
                }
            })
            .or_insert(i);
    }
    let mut out: Vec<FacilityId> = zero_candidate.into_iter().collect();
    out.extend(buckets.values().copied());
    if out.is_empty() {
        return Err(FaclocError::BadArgument(
            "all facilities are flagged removable".into(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_robust() -> Instance {
        // f=[1,4], explicit c=[[0,5],[5,0]], p=1
        Instance {
            variant: Variant::Robust,
            facilities: 2,
            clients: 2,
            opening_costs: vec![1.0, 4.0],
            coverage: Some(1),
            penalties: None,
            metric: MetricView::Explicit {
                matrix: vec![vec![0.0, 5.0], vec![5.0, 0.0]],
            },
        }
    }

    #[test]
    fn evaluate_identity_case() {
        // one facility f=1, one client at distance 0, open it, serve client
        let inst = Instance {
            variant: Variant::Plain,
            facilities: 1,
            clients: 1,
            opening_costs: vec![1.0],
            coverage: None,
            penalties: None,
            metric: MetricView::Explicit {
                matrix: vec![vec![0.0]],
            },
        };
        let oracle = inst.exact_oracle();
        let sol = Solution::assemble(&inst, &oracle, vec![0], vec![0]).unwrap();
        assert_eq!(sol.cost, 1.0);
    }

    #[test]
    fn evaluate_penalty_empty_opening() {
        // F'=empty, all clients outliers, penalties [2,3] -> cost 5
        let inst = Instance {
            variant: Variant::Penalty,
            facilities: 1,
            clients: 2,
            opening_costs: vec![7.0],
            coverage: None,
            penalties: Some(vec![2.0, 3.0]),
            metric: MetricView::Explicit {
                matrix: vec![vec![1.0, 1.0]],
            },
        };
        let oracle = inst.exact_oracle();
        let sol = Solution::assemble(&inst, &oracle, vec![], vec![]).unwrap();
        assert_eq!(sol.cost, 5.0);
    }

    #[test]
    fn evaluate_robust_hand_case() {
        let inst = tiny_robust();
        let oracle = inst.exact_oracle();
        let sol = Solution::assemble(&inst, &oracle, vec![0], vec![0]).unwrap();
        assert_eq!(sol.cost, 1.0);
    }

    #[test]
    fn evaluate_rejects_bad_assignment() {
        let inst = tiny_robust();
        let oracle = inst.exact_oracle();
        let mut sol = Solution::assemble(&inst, &oracle, vec![0], vec![0]).unwrap();
        sol.assignment.insert(0, 1); // facility 1 is not open
        assert!(matches!(
            evaluate_cost(&inst, &sol),
            Err(FaclocError::Structural(_))
        ));
    }

    #[test]
    fn evaluate_rejects_undercoverage() {
        let inst = tiny_robust();
        let oracle = inst.exact_oracle();
        let sol = Solution::assemble(&inst, &oracle, vec![0], vec![]);
        assert!(matches!(sol, Err(FaclocError::Infeasible(_))));
    }

    #[test]
    fn modify_costs_substitution() {
        let inst = Instance {
            variant: Variant::Plain,
            facilities: 3,
            clients: 1,
            opening_costs: vec![3.0, 5.0, 7.0],
            coverage: None,
            penalties: None,
            metric: MetricView::Explicit {
                matrix: vec![vec![1.0], vec![1.0], vec![1.0]],
            },
        };
        let m = modify_opening_costs(&inst, 1).unwrap();
        assert_eq!(m.opening_costs[0], 3.0);
        assert_eq!(m.opening_costs[1], 0.0);
        assert!(m.opening_costs[2].is_infinite());
        assert!(m.is_removable(2));

        // anchor is the unique max-cost facility: nothing removed
        let m = modify_opening_costs(&inst, 2).unwrap();
        assert!(m.opening_costs.iter().all(|f| f.is_finite()));
    }

    #[test]
    fn modify_costs_tie_keeps_cost() {
        // f=[1,1], anchor=0 -> f'=[0,1]: a tie is not "greater than"
        let inst = Instance {
            variant: Variant::Plain,
            facilities: 2,
            clients: 1,
            opening_costs: vec![1.0, 1.0],
            coverage: None,
            penalties: None,
            metric: MetricView::Explicit {
                matrix: vec![vec![1.0], vec![1.0]],
            },
        };
        let m = modify_opening_costs(&inst, 0).unwrap();
        assert_eq!(m.opening_costs, vec![0.0, 1.0]);
    }

    fn with_costs(costs: Vec<f64>) -> Instance {
        let nf = costs.len();
        Instance {
            variant: Variant::Plain,
            facilities: nf,
            clients: 1,
            opening_costs: costs,
            coverage: None,
            penalties: None,
            metric: MetricView::Explicit {
                matrix: vec![vec![1.0]; nf],
            },
        }
    }

    #[test]
    fn anchors_bucket_maxima() {
        // f=[1, 1.05, 2], eps=0.1 -> candidates {1.05, 2}
        let inst = with_costs(vec![1.0, 1.05, 2.0]);
        let cands = anchor_candidates(&inst, 0.1).unwrap();
        let vals: Vec<f64> = cands.iter().map(|&i| inst.opening_costs[i]).collect();
        assert_eq!(vals, vec![1.05, 2.0]);
    }

    #[test]
    fn anchors_single_and_equal() {
        let inst = with_costs(vec![4.0]);
        assert_eq!(anchor_candidates(&inst, 0.5).unwrap(), vec![0]);
        let inst = with_costs(vec![3.0, 3.0, 3.0]);
        assert_eq!(anchor_candidates(&inst, 0.5).unwrap().len(), 1);
    }

    #[test]
    fn anchors_contain_global_max() {
        let inst = with_costs(vec![0.0, 2.5, 9.0, 1.0, 9.0]);
        let cands = anchor_candidates(&inst, 0.01).unwrap();
        assert!(cands
            .iter()
            .any(|&i| inst.opening_costs[i] == 9.0));
        // zero-cost bucket adds one candidate
        assert!(cands.iter().any(|&i| inst.opening_costs[i] == 0.0));
    }

    #[test]
    fn json_round_trip_matches_schema() {
        let inst = tiny_robust();
        let s = inst.to_json();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["variant"], "robust");
        assert_eq!(v["facilities"], 2);
        assert_eq!(v["metric"]["mode"], "explicit");
        let back = Instance::from_json(&s).unwrap();
        assert_eq!(back.opening_costs, inst.opening_costs);

        let implicit = r#"{
            "variant": "plain", "facilities": 1, "clients": 2,
            "opening_costs": [1.0],
            "metric": {"mode": "implicit", "edges": [[0,1,2.0],[1,2,3.0]]}
        }"#;
        let inst = Instance::from_json(implicit).unwrap();
        assert!(matches!(inst.metric, MetricView::Implicit { .. }));
    }
}
