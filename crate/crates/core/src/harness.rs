//! Experiment harness: runs solvers or the simulator on an instance,
//! certifies the result, compares against the brute-force oracle when the
//! instance is small enough, and emits report rows (JSON is the
//! authoritative schema; CSV is a projection).

use serde::{Deserialize, Serialize};

use crate::dual::{
    build_penalty_dual, build_robust_dual, check_bound, check_dual_feasible, BoundRegime,
    CertificateFile, DualCertificate,
};
use crate::error::{FaclocError, Result};
use crate::metric::Backend;
use crate::model::{Instance, Solution, Variant};
use crate::oracle::{opt_penalty, opt_robust, MAX_ORACLE_FACILITIES};
use crate::solver::{compute_radii_penalty, compute_radii_plain, penalty_facloc, robust_facloc};
use crate::distsim::{
    penalty_facloc_dist_detailed, robust_facloc_dist_detailed, Cluster, SimConfig, SimTranscript,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportRow {
    pub instance: String,
    pub seed: u64,
    pub variant: String,
    pub eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub alg_cost: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opt_cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub dual_obj: f64,
    pub feasible: bool,
    pub bound_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charged_rounds: Option<u64>,
}

pub const CSV_HEADER: &str =
    "instance,seed,variant,eps,k,alg_cost,opt_cost,ratio,dual_obj,feasible,bound_ok,charged_rounds";

impl ReportRow {
    pub fn to_csv_line(&self) -> String {
        let opt = |x: &Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.instance.replace(',', ";"),
            self.seed,
            self.variant,
            self.eps,
            self.k.map(|v| v.to_string()).unwrap_or_default(),
            self.alg_cost,
            opt(&self.opt_cost),
            opt(&self.ratio),
            self.dual_obj,
            self.feasible,
            self.bound_ok,
            self.charged_rounds.map(|v| v.to_string()).unwrap_or_default(),
        )
    }
}

fn ratio_of(alg: f64, opt: f64) -> f64 {
    if opt == 0.0 {
        if alg.abs() <= 1e-9 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        alg / opt
    }
}

fn oracle_cost(inst: &Instance) -> Result<Option<f64>> {
    if inst.facilities > MAX_ORACLE_FACILITIES {
        return Ok(None);
    }
    let opt = match inst.variant {
        Variant::Robust => opt_robust(inst)?.opt_cost,
        Variant::Penalty => opt_penalty(inst)?.opt_cost,
        Variant::Plain => {
            return Err(FaclocError::BadArgument(
                "plain variant has no solver path in the harness".into(),
            ))
        }
    };
    Ok(Some(opt))
}

pub struct RunArtifacts {
    pub row: ReportRow,
    pub solution: Solution,
    pub certificate: CertificateFile,
    pub transcript: Option<SimTranscript>,
}

/// Sequential run: solver, dual certificate, bound check, optional oracle
/// ratio (automatic when the instance fits the enumeration guard).
pub fn run_sequential(
    inst: &Instance,
    label: &str,
    seed: u64,
    eps: f64,
    with_oracle: bool,
) -> Result<RunArtifacts> {
    inst.validate()?;
    let oracle_opt = if with_oracle { oracle_cost(inst)? } else { None };
    match inst.variant {
        Variant::Robust => {
            let out = robust_facloc(inst, eps)?;
            let run = &out.winner;
            let dist_oracle = inst.exact_oracle();
            let dual = build_robust_dual(
                &run.modified,
                &dist_oracle,
                &run.radii,
                &run.served_pre,
                &run.trace.opened,
                1.0,
            );
            let cert = DualCertificate::Robust(dual);
            let feas = check_dual_feasible(&cert, &run.modified)?;
            let bound = check_bound(
                run.cost_modified,
                &cert,
                BoundRegime::Sequential,
                Some(run.anchor_original_cost),
            )?;
            let row = ReportRow {
                instance: label.to_string(),
                seed,
                variant: inst.variant.to_string(),
                eps,
                k: None,
                alg_cost: out.solution.cost,
                opt_cost: oracle_opt,
                ratio: oracle_opt.map(|o| ratio_of(out.solution.cost, o)),
                dual_obj: cert.objective(),
                feasible: feas.ok,
                bound_ok: bound.ok,
                charged_rounds: None,
            };
            Ok(RunArtifacts {
                row,
                solution: out.solution,
                certificate: CertificateFile {
                    dual: cert,
                    anchor: Some(run.anchor),
                    sol_cost: run.cost_modified,
                    regime_eps: None,
                    feasible: feas.ok,
                    violations: feas.violations,
                },
                transcript: None,
            })
        }
        Variant::Penalty => {
            let out = penalty_facloc(inst)?;
            let dist_oracle = inst.exact_oracle();
            let dual = build_penalty_dual(inst, &dist_oracle, &out.radii);
            let cert = DualCertificate::Penalty(dual);
            let feas = check_dual_feasible(&cert, inst)?;
            let bound = check_bound(out.solution.cost, &cert, BoundRegime::Sequential, None)?;
            let row = ReportRow {
                instance: label.to_string(),
                seed,
                variant: inst.variant.to_string(),
                eps,
                k: None,
                alg_cost: out.solution.cost,
                opt_cost: oracle_opt,
                ratio: oracle_opt.map(|o| ratio_of(out.solution.cost, o)),
                dual_obj: cert.objective(),
                feasible: feas.ok,
                bound_ok: bound.ok,
                charged_rounds: None,
            };
            Ok(RunArtifacts {
                row,
                solution: out.solution.clone(),
                certificate: CertificateFile {
                    dual: cert,
                    anchor: None,
                    sol_cost: out.solution.cost,
                    regime_eps: None,
                    feasible: feas.ok,
                    violations: feas.violations,
                },
                transcript: None,
            })
        }
        Variant::Plain => Err(FaclocError::BadArgument(
            "plain variant: use the robust solver with p = |C| or the penalty solver".into(),
        )),
    }
}

/// Simulator run: distributed algorithm, transcript, certificate with the
/// `(1+eps)` slack regime, optional oracle ratio.
pub fn run_simulated(
    inst: &Instance,
    label: &str,
    cluster: &Cluster,
    cfg: &SimConfig,
    backend: Backend,
    with_oracle: bool,
) -> Result<RunArtifacts> {
    inst.validate()?;
    let oracle_opt = if with_oracle { oracle_cost(inst)? } else { None };
    let slack = (1.0 + cfg.eps).powi(4);
    match inst.variant {
        Variant::Robust => {
            let out = robust_facloc_dist_detailed(inst, cluster, cfg, backend)?;
            let run = &out.winner;
            let dist_oracle = inst.exact_oracle();
            // certificates always use the exact radii of the modified instance
            let exact_radii = compute_radii_plain(&run.modified, &dist_oracle);
            let dual = build_robust_dual(
                &run.modified,
                &dist_oracle,
                &exact_radii,
                &run.served_pre,
                &run.solution.open,
                slack,
            );
            let cert = DualCertificate::Robust(dual);
            let feas = check_dual_feasible(&cert, &run.modified)?;
            let bound = check_bound(
                run.cost_modified,
                &cert,
                BoundRegime::Distributed { eps: cfg.eps },
                Some(run.anchor_original_cost),
            )?;
            let row = ReportRow {
                instance: label.to_string(),
                seed: cfg.seed,
                variant: inst.variant.to_string(),
                eps: cfg.eps,
                k: Some(cluster.k),
                alg_cost: out.solution.cost,
                opt_cost: oracle_opt,
                ratio: oracle_opt.map(|o| ratio_of(out.solution.cost, o)),
                dual_obj: cert.objective(),
                feasible: feas.ok,
                bound_ok: bound.ok,
                charged_rounds: Some(out.transcript.charged_rounds),
            };
            Ok(RunArtifacts {
                row,
                solution: out.solution,
                certificate: CertificateFile {
                    dual: cert,
                    anchor: Some(run.anchor),
                    sol_cost: run.cost_modified,
                    regime_eps: Some(cfg.eps),
                    feasible: feas.ok,
                    violations: feas.violations,
                },
                transcript: Some(out.transcript),
            })
        }
        Variant::Penalty => {
            let out = penalty_facloc_dist_detailed(inst, cluster, cfg, backend)?;
            let dist_oracle = inst.exact_oracle();
            let exact_radii = compute_radii_penalty(inst, &dist_oracle);
            let dual = build_penalty_dual(inst, &dist_oracle, &exact_radii);
            let cert = DualCertificate::Penalty(dual);
            let feas = check_dual_feasible(&cert, inst)?;
            let bound = check_bound(
                out.solution.cost,
                &cert,
                BoundRegime::Distributed { eps: cfg.eps },
                None,
            )?;
            let row = ReportRow {
                instance: label.to_string(),
                seed: cfg.seed,
                variant: inst.variant.to_string(),
                eps: cfg.eps,
                k: Some(cluster.k),
                alg_cost: out.solution.cost,
                opt_cost: oracle_opt,
                ratio: oracle_opt.map(|o| ratio_of(out.solution.cost, o)),
                dual_obj: cert.objective(),
                feasible: feas.ok,
                bound_ok: bound.ok,
                charged_rounds: Some(out.transcript.charged_rounds),
            };
            Ok(RunArtifacts {
                row,
                solution: out.solution.clone(),
                certificate: CertificateFile {
                    dual: cert,
                    anchor: None,
                    sol_cost: out.solution.cost,
                    regime_eps: Some(cfg.eps),
                    feasible: feas.ok,
                    violations: feas.violations,
                },
                transcript: Some(out.transcript),
            })
        }
        Variant::Plain => Err(FaclocError::BadArgument(
            "plain variant is not simulated directly".into(),
        )),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertifyReport {
    pub feasible: bool,
    pub worst_violation: f64,
    pub violations: Vec<String>,
    pub objective: f64,
    pub bound_ok: bool,
    pub bound: f64,
    pub sol_cost: f64,
}

/// Re-verifies a certificate file against an instance: rebuilds the
/// modified costs from the stored anchor (robust), re-runs the feasibility
/// scan, and re-checks the cost bound.
pub fn certify(inst: &Instance, cert: &CertificateFile) -> Result<CertifyReport> {
    let checked_inst = match (&cert.dual, cert.anchor) {
        (DualCertificate::Robust(_), Some(anchor)) => {
            crate::model::modify_opening_costs(inst, anchor)?
        }
        (DualCertificate::Robust(_), None) => {
            return Err(FaclocError::BadArgument(
                "robust certificate is missing its anchor".into(),
            ))
        }
        (DualCertificate::Penalty(_), _) => inst.clone(),
    };
    let feas = check_dual_feasible(&cert.dual, &checked_inst)?;
    let f_anchor = cert.anchor.map(|a| inst.opening_costs[a]);
    let bound = check_bound(cert.sol_cost, &cert.dual, cert.regime(), f_anchor)?;
    Ok(CertifyReport {
        feasible: feas.ok,
        worst_violation: feas.worst_violation,
        violations: feas.violations,
        objective: cert.dual.objective(),
        bound_ok: bound.ok,
        bound: bound.bound,
        sol_cost: bound.sol_cost,
    })
}
