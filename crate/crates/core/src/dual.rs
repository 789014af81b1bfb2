//! Combinatorial dual solutions for both LPs, with feasibility and
//! cost-bound checkers. The construction mirrors the analysis: radii give
//! the `w` variables, bottleneck values give `v`, and the robust `q` caps
//! the outliers' duals. Feasible objectives lower-bound the optimum, so the
//! approximation factors become per-instance certificates.

use serde::{Deserialize, Serialize};

use crate::error::{FaclocError, Result};
use crate::metric::DistanceOracle;
use crate::model::{ClientId, FacilityId, Instance};
use crate::solver::RadiusTable;

/// Sparse `w` entries `(facility, client, value)`; absent pairs are zero.
pub type SparseW = Vec<(FacilityId, ClientId, f64)>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RobustDual {
    pub v: Vec<f64>,
    pub w: SparseW,
    pub q: f64,
    pub ell: usize,
    /// `sum_j v_j - ell * q`.
    pub objective: f64,
    /// Facilities participating in the modified instance (finite cost).
    pub facilities: Vec<FacilityId>,
    pub slack: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PenaltyDual {
    pub v: Vec<f64>,
    pub w: SparseW,
    /// `sum_j v_j`.
    pub objective: f64,
    /// Facilities with a finite penalty radius.
    pub facilities: Vec<FacilityId>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DualCertificate {
    Robust(RobustDual),
    Penalty(PenaltyDual),
}

impl DualCertificate {
    pub fn objective(&self) -> f64 {
        match self {
            DualCertificate::Robust(d) => d.objective,
            DualCertificate::Penalty(d) => d.objective,
        }
    }
}

/// `v'_j = min_i max(r_i, c_ij)` over the given facilities.
fn bottleneck_values(
    inst: &Instance,
    oracle: &DistanceOracle,
    radii: &RadiusTable,
) -> Vec<f64> {
    (0..inst.clients)
        .map(|j| {
            let jv = inst.client_vertex(j);
            radii
                .participating()
                .map(|(i, r)| r.max(oracle.exact_distance(i, jv)))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn plain_w(inst: &Instance, oracle: &DistanceOracle, radii: &RadiusTable) -> SparseW {
    let mut w = Vec::new();
    for (i, r) in radii.participating() {
        for j in 0..inst.clients {
            let c = oracle.exact_distance(i, inst.client_vertex(j));
            if r > c {
                w.push((i, j, r - c));
            }
        }
    }
    w
}

/// Builds the robust dual `(v, w, q)` for one anchor run, given the exact
/// radii of the modified instance, the pre-determination served set `C''`,
/// and the opened facilities.
///
/// The outlier split follows the analysis, not the algorithm: outliers are
/// chosen by `v'`-order from the pre-determination sets, which is what makes
/// the constructed point feasible. `slack` is 1 for exact radii and
/// `(1+eps)^4` when the run used approximate radii and distances.
pub fn build_robust_dual(
    modified: &Instance,
    oracle: &DistanceOracle,
    radii: &RadiusTable,
    served_pre: &[ClientId],
    opened: &[FacilityId],
    slack: f64,
) -> RobustDual {
    let ell = modified.ell().expect("robust instance");
    let vprime = bottleneck_values(modified, oracle, radii);
    let w = plain_w(modified, oracle, radii);

    // Per-client contribution to an *opened* facility, used only to break
    // v'-ties in a way that minimizes the dual's uncovered opening mass.
    let leak: Vec<f64> = (0..modified.clients)
        .map(|j| {
            let jv = modified.client_vertex(j);
            opened
                .iter()
                .filter_map(|&i| radii.radii[i].finite().map(|r| (r - oracle.exact_distance(i, jv)).max(0.0)))
                .fold(0.0, f64::max)
        })
        .collect();
    let mut is_served: Vec<bool> = vec![false; modified.clients];
    for &j in served_pre {
        is_served[j] = true;
    }
    let outliers_pre: Vec<ClientId> = (0..modified.clients).filter(|&j| !is_served[j]).collect();

    // Modified outlier determination by v'-order.
    let mut tilde_served: Vec<ClientId> = served_pre.to_vec();
    if outliers_pre.len() > ell {
        let mut cand: Vec<ClientId> = outliers_pre.clone();
        cand.sort_by(|&a, &b| {
            vprime[a]
                .partial_cmp(&vprime[b])
                .unwrap()
                .then(a.cmp(&b))
        });
        tilde_served.extend(&cand[..outliers_pre.len() - ell]);
    } else if outliers_pre.len() < ell {
        let mut cand: Vec<ClientId> = served_pre.to_vec();
        cand.sort_by(|&a, &b| {
            vprime[b]
                .partial_cmp(&vprime[a])
                .unwrap()
                .then(leak[a].partial_cmp(&leak[b]).unwrap())
                .then(a.cmp(&b))
        });
        let out: Vec<ClientId> = cand[..ell - outliers_pre.len()].to_vec();
        tilde_served.retain(|j| !out.contains(j));
    }

    let mut served_flag = vec![false; modified.clients];
    for &j in &tilde_served {
        served_flag[j] = true;
    }
    let q = tilde_served
        .iter()
        .map(|&j| vprime[j])
        .fold(0.0, f64::max)
        / slack;
    let v: Vec<f64> = (0..modified.clients)
        .map(|j| if served_flag[j] { vprime[j] / slack } else { q })
        .collect();
    let objective = v.iter().sum::<f64>() - ell as f64 * q;
    RobustDual {
        v,
        w,
        q,
        ell,
        objective,
        facilities: radii.participating().map(|(i, _)| i).collect(),
        slack,
    }
}

/// Builds the penalty dual `(v, w)` from penalty radii. Facilities whose
/// radius equation has no root carry `w_ij = max(p_j - c_ij, 0)` (their
/// charge function at infinity), which stays within their budget.
pub fn build_penalty_dual(
    inst: &Instance,
    oracle: &DistanceOracle,
    radii: &RadiusTable,
) -> PenaltyDual {
    let pens = inst.penalties.as_ref().expect("penalty instance");
    let mut w: SparseW = Vec::new();
    let mut y = vec![vec![f64::INFINITY; inst.clients]; inst.facilities]; // c_ij + w_ij
    let mut removed_facilities = Vec::new();
    #[allow(clippy::needless_range_loop)]
    for i in 0..inst.facilities {
        if inst.opening_costs[i].is_infinite() {
            continue;
        }
        let r = radii.radii[i].finite();
        if r.is_none() {
            removed_facilities.push(i);
        }
        for j in 0..inst.clients {
            let c = oracle.exact_distance(i, inst.client_vertex(j));
            let cap = match r {
                Some(r) => (r - c).min(pens[j] - c).max(0.0),
                None => (pens[j] - c).max(0.0),
            };
            if cap > 0.0 {
                w.push((i, j, cap));
            }
            y[i][j] = c + cap;
        }
    }

    // Bottleneck classification over facilities with a finite radius.
    let mut v = vec![0.0; inst.clients];
    for j in 0..inst.clients {
        let mut bottleneck: Option<(FacilityId, f64)> = None;
        for (i, _) in radii.participating() {
            let yij = y[i][j];
            if bottleneck.is_none_or(|(_, by)| yij < by) {
                bottleneck = Some((i, yij));
            }
        }
        v[j] = match bottleneck {
            Some((i, _)) => {
                let r = radii.radii[i].finite().unwrap();
                let c = oracle.exact_distance(i, inst.client_vertex(j));
                if r.max(c) <= pens[j] {
                    r.max(c)
                } else {
                    pens[j]
                }
            }
            None => pens[j], // every facility removed
        };
    }
    let objective = v.iter().sum();
    PenaltyDual {
        v,
        w,
        objective,
        facilities: radii.participating().map(|(i, _)| i).collect(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub ok: bool,
    pub worst_violation: f64,
    pub binding: Vec<String>,
    pub violations: Vec<String>,
}

/// Exhaustive constraint scan. For a robust certificate, `inst` must be the
/// modified instance the dual was built on.
pub fn check_dual_feasible(cert: &DualCertificate, inst: &Instance) -> Result<FeasibilityReport> {
    let (v, w, facilities) = match cert {
        DualCertificate::Robust(d) => (&d.v, &d.w, &d.facilities),
        DualCertificate::Penalty(d) => (&d.v, &d.w, &d.facilities),
    };
    if v.len() != inst.clients {
        return Err(FaclocError::BadArgument(format!(
            "certificate has {} v-entries for {} clients",
            v.len(),
            inst.clients
        )));
    }
    for &(i, j, _) in w.iter() {
        if i >= inst.facilities || j >= inst.clients {
            return Err(FaclocError::BadArgument(format!(
                "w entry ({i},{j}) out of range"
            )));
        }
    }
    let oracle = inst.exact_oracle();
    let mut dense_w = vec![0.0; inst.facilities * inst.clients];
    for &(i, j, val) in w.iter() {
        dense_w[i * inst.clients + j] = val;
    }

    let mut report = FeasibilityReport {
        ok: true,
        worst_violation: 0.0,
        binding: Vec::new(),
        violations: Vec::new(),
    };
    let check = |lhs: f64, rhs: f64, name: String, report: &mut FeasibilityReport| {
        let tol = 1e-9 * rhs.abs().max(1.0);
        let gap = lhs - rhs;
        if gap > tol {
            report.ok = false;
            if gap > report.worst_violation {
                report.worst_violation = gap;
            }
            if report.violations.len() < 32 {
                report.violations.push(format!("{name}: {lhs} > {rhs}"));
            }
        } else if gap.abs() <= tol && report.binding.len() < 32 {
            report.binding.push(name);
        }
    };

    for &(i, j, val) in w.iter() {
        check(0.0, val, format!("w[{i},{j}]>=0"), &mut report);
    }
    for (j, &vj) in v.iter().enumerate() {
        check(0.0, vj, format!("v[{j}]>=0"), &mut report);
        let jv = inst.client_vertex(j);
        for &i in facilities {
            let rhs = oracle.exact_distance(i, jv) + dense_w[i * inst.clients + j];
            check(vj, rhs, format!("v[{j}]<=c+w[{i},{j}]"), &mut report);
        }
    }
    for &i in facilities {
        let sum: f64 = (0..inst.clients).map(|j| dense_w[i * inst.clients + j]).sum();
        check(sum, inst.opening_costs[i], format!("sum_w[{i}]<=f"), &mut report);
    }
    match cert {
        DualCertificate::Robust(d) => {
            for (j, &vj) in v.iter().enumerate() {
                check(vj, d.q, format!("v[{j}]<=q"), &mut report);
            }
        }
        DualCertificate::Penalty(_) => {
            let pens = inst.penalties.as_ref().ok_or_else(|| {
                FaclocError::BadArgument("penalty certificate on a non-penalty instance".into())
            })?;
            for (j, &vj) in v.iter().enumerate() {
                check(vj, pens[j], format!("v[{j}]<=p"), &mut report);
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundRegime {
    /// Exact radii and distances: robust `3 obj + f_ie`, penalty `3 obj`.
    Sequential,
    /// Approximate radii/distances: robust `3 (1+eps)^8 obj + f_ie`,
    /// penalty `3 (1+eps)^4 obj`.
    Distributed { eps: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub ok: bool,
    pub bound: f64,
    pub sol_cost: f64,
    pub margin: f64,
}

/// Checks the theorem-level cost bound against the dual objective.
/// For robust certificates `sol_cost` is the cost under the modified
/// opening costs and `f_anchor` the anchor's original opening cost.
pub fn check_bound(
    sol_cost: f64,
    cert: &DualCertificate,
    regime: BoundRegime,
    f_anchor: Option<f64>,
) -> Result<BoundReport> {
    let bound = match (cert, regime) {
        (DualCertificate::Robust(d), BoundRegime::Sequential) => {
            let fa = f_anchor.ok_or_else(|| {
                FaclocError::BadArgument("robust bound needs the anchor cost".into())
            })?;
            3.0 * d.objective + fa
        }
        (DualCertificate::Robust(d), BoundRegime::Distributed { eps }) => {
            let fa = f_anchor.ok_or_else(|| {
                FaclocError::BadArgument("robust bound needs the anchor cost".into())
            })?;
            3.0 * (1.0 + eps).powi(8) * d.objective + fa
        }
        (DualCertificate::Penalty(d), BoundRegime::Sequential) => 3.0 * d.objective,
        (DualCertificate::Penalty(d), BoundRegime::Distributed { eps }) => {
            3.0 * (1.0 + eps).powi(4) * d.objective
        }
    };
    let ok = sol_cost <= bound + 1e-9 * bound.abs().max(1.0);
    Ok(BoundReport {
        ok,
        bound,
        sol_cost,
        margin: bound - sol_cost,
    })
}

/// Certificate file: everything needed to re-verify a run from disk.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateFile {
    #[serde(flatten)]
    pub dual: DualCertificate,
    /// Robust only: anchor facility; the checker re-derives the modified costs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<FacilityId>,
    /// Solution cost on the certified instance (modified costs for robust).
    pub sol_cost: f64,
    /// Eps of the distributed regime; absent for sequential certificates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime_eps: Option<f64>,
    pub feasible: bool,
    pub violations: Vec<String>,
}

impl CertificateFile {
    pub fn regime(&self) -> BoundRegime {
        match self.regime_eps {
            Some(eps) => BoundRegime::Distributed { eps },
            None => BoundRegime::Sequential,
        }
    }
}
