//! Command-line front end: instance generation, solver/simulator runs,
//! oracle comparison, certificate checks, and experiment sweeps.
//!
//! Exit codes: 0 success, 1 usage error, 2 infeasible instance, 3 internal
//! error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use facloc::distsim::{Cluster, MsspBackend, SimConfig};
use facloc::dual::CertificateFile;
use facloc::error::FaclocError;
use facloc::gen::{generate, GenSpec, Generator};
use facloc::harness::{certify, run_sequential, run_simulated, ReportRow, CSV_HEADER};
use facloc::metric::Backend;
use facloc::model::{Instance, Variant};
use facloc::oracle::{opt_penalty, opt_robust};

#[derive(Parser)]
#[command(
    name = "facloc",
    about = "Facility location with outliers: solvers, certificates, and a k-machine simulator"
)]
struct Cli {
    /// RNG seed for generation and simulation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Approximation slack epsilon.
    #[arg(long, global = true, default_value_t = 0.05)]
    eps: f64,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    RandomGraph,
    RandomMetric,
    PlantedClusters,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Plain,
    Robust,
    Penalty,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Plain => Variant::Plain,
            VariantArg::Robust => Variant::Robust,
            VariantArg::Penalty => Variant::Penalty,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Charged,
    BellmanFord,
}

#[derive(Args, Clone)]
struct GenArgs {
    #[arg(long, value_enum, default_value_t = GenKind::RandomGraph)]
    generator: GenKind,
    #[arg(long, value_enum, default_value_t = VariantArg::Robust)]
    variant: VariantArg,
    /// random-graph: vertex count.
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// random-graph: edge count.
    #[arg(long, default_value_t = 32)]
    m: usize,
    /// random-graph: maximum integer edge weight.
    #[arg(long, default_value_t = 10)]
    w_max: u64,
    /// random-metric: facility count.
    #[arg(long, default_value_t = 6)]
    nf: usize,
    /// random-metric: client count.
    #[arg(long, default_value_t = 8)]
    nc: usize,
    /// planted-clusters: cluster count.
    #[arg(long, default_value_t = 3)]
    centers: usize,
    /// planted-clusters: clients per cluster.
    #[arg(long, default_value_t = 4)]
    per_center: usize,
    /// planted-clusters: maximum client offset from its center.
    #[arg(long, default_value_t = 2)]
    spread: u64,
    #[arg(long, default_value_t = 20)]
    cost_max: u64,
    /// robust: coverage requirement (random when omitted).
    #[arg(long)]
    coverage: Option<usize>,
    #[arg(long, default_value_t = 12)]
    penalty_max: u64,
}

impl GenArgs {
    fn to_spec(&self, seed: u64) -> GenSpec {
        let generator = match self.generator {
            GenKind::RandomGraph => Generator::RandomGraph {
                n: self.n,
                m: self.m,
                w_max: self.w_max,
            },
            GenKind::RandomMetric => Generator::RandomMetric {
                nf: self.nf,
                nc: self.nc,
            },
            GenKind::PlantedClusters => Generator::PlantedClusters {
                centers: self.centers,
                per_center: self.per_center,
                spread: self.spread,
            },
        };
        GenSpec {
            generator,
            variant: self.variant.into(),
            seed,
            cost_max: self.cost_max,
            coverage: self.coverage,
            penalty_max: self.penalty_max,
        }
    }
}

#[derive(Args, Clone)]
struct SimArgs {
    /// Machine count; use --congested-clique for k = n.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Per-link words per round (B).
    #[arg(long, default_value_t = 16)]
    bandwidth_words: u64,
    /// Estimator repetition constant c in L = ceil(c log n / eps'^2).
    #[arg(long, default_value_t = 8.0)]
    cohen_c: f64,
    /// Luby inner-iteration constant.
    #[arg(long, default_value_t = 8.0)]
    mis_c: f64,
    #[arg(long, value_enum, default_value_t = BackendArg::Charged)]
    mssp_backend: BackendArg,
    /// One vertex per machine (overrides --k).
    #[arg(long, default_value_t = false)]
    congested_clique: bool,
}

impl SimArgs {
    fn cluster(&self, n: usize, seed: u64) -> Result<Cluster, FaclocError> {
        let mut c = if self.congested_clique {
            Cluster::congested_clique(n)
        } else {
            Cluster::random(n, self.k, seed)?
        };
        c.bandwidth_words = self.bandwidth_words;
        Ok(c)
    }

    fn config(&self, eps: f64, seed: u64) -> SimConfig {
        SimConfig {
            eps,
            seed,
            cohen_c: self.cohen_c,
            mis_c: self.mis_c,
            mssp_backend: match self.mssp_backend {
                BackendArg::Charged => MsspBackend::Charged,
                BackendArg::BellmanFord => MsspBackend::BellmanFord,
            },
            ..Default::default()
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Run the sequential solver with a dual certificate.
    Solve {
        instance: PathBuf,
        /// Compare against the brute-force optimum (requires |F| <= 20).
        #[arg(long, default_value_t = false)]
        with_oracle: bool,
        /// Write the dual certificate to this path.
        #[arg(long)]
        emit_cert: Option<PathBuf>,
    },
    /// Run the k-machine simulator.
    Simulate {
        instance: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value_t = false)]
        with_oracle: bool,
        #[arg(long)]
        emit_cert: Option<PathBuf>,
        /// Write the round/bandwidth transcript to this path.
        #[arg(long)]
        transcript_out: Option<PathBuf>,
    },
    /// Compute the exact optimum by enumeration.
    Oracle { instance: PathBuf },
    /// Dump metric distances as CSV (source,target,distance).
    Distances {
        instance: PathBuf,
        /// Restrict to one source vertex.
        #[arg(long)]
        source: Option<usize>,
    },
    /// Re-verify a certificate file against an instance.
    Certify {
        instance: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Generate-and-run sweeps across trials and machine counts.
    Bench {
        #[command(flatten)]
        gen: GenArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Machine counts to simulate in addition to the sequential run.
        #[arg(long, value_delimiter = ',')]
        k_list: Vec<usize>,
        #[arg(long, default_value_t = true)]
        with_oracle: bool,
    },
}

fn read_instance(path: &Path) -> Result<Instance, FaclocError> {
    let text = std::fs::read_to_string(path)?;
    Instance::from_json(&text)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), FaclocError> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => println!("{content}"),
    }
    Ok(())
}

fn rows_output(rows: &[ReportRow], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(rows).expect("rows serialize"),
        Format::Csv => {
            let mut s = String::from(CSV_HEADER);
            for r in rows {
                s.push('\n');
                s.push_str(&r.to_csv_line());
            }
            s
        }
    }
}

fn run(cli: Cli) -> Result<(), FaclocError> {
    match cli.cmd {
        Cmd::Gen(args) => {
            let inst = generate(&args.to_spec(cli.seed))?;
            emit(&cli.out, &inst.to_json())
        }
        Cmd::Solve {
            instance,
            with_oracle,
            emit_cert,
        } => {
            let inst = read_instance(&instance)?;
            let label = instance.display().to_string();
            let arts = run_sequential(&inst, &label, cli.seed, cli.eps, with_oracle)?;
            if let Some(path) = emit_cert {
                std::fs::write(path, serde_json::to_string_pretty(&arts.certificate)?)?;
            }
            emit(&cli.out, &rows_output(&[arts.row], cli.format))
        }
        Cmd::Simulate {
            instance,
            sim,
            with_oracle,
            emit_cert,
            transcript_out,
        } => {
            let inst = read_instance(&instance)?;
            let label = instance.display().to_string();
            let cluster = sim.cluster(inst.n_vertices(), cli.seed)?;
            let cfg = sim.config(cli.eps, cli.seed);
            let arts = run_simulated(&inst, &label, &cluster, &cfg, Backend::Exact, with_oracle)?;
            if let Some(path) = emit_cert {
                std::fs::write(path, serde_json::to_string_pretty(&arts.certificate)?)?;
            }
            if let Some(path) = transcript_out {
                std::fs::write(path, arts.transcript.as_ref().unwrap().to_json())?;
            }
            emit(&cli.out, &rows_output(&[arts.row], cli.format))
        }
        Cmd::Oracle { instance } => {
            let inst = read_instance(&instance)?;
            let res = match inst.variant {
                Variant::Robust => opt_robust(&inst)?,
                Variant::Penalty => opt_penalty(&inst)?,
                Variant::Plain => {
                    return Err(FaclocError::BadArgument(
                        "oracle needs a robust or penalty instance".into(),
                    ))
                }
            };
            let report = serde_json::json!({
                "opt_cost": res.opt_cost,
                "enumerated": res.enumerated,
                "witness": res.witness,
            });
            emit(&cli.out, &serde_json::to_string_pretty(&report)?)
        }
        Cmd::Distances { instance, source } => {
            let inst = read_instance(&instance)?;
            let oracle = inst.exact_oracle();
            let n = inst.n_vertices();
            let mut s = String::from("source,target,distance");
            let sources: Vec<usize> = match source {
                Some(v) if v >= n => return Err(FaclocError::UnknownVertex(v)),
                Some(v) => vec![v],
                None => (0..n).collect(),
            };
            for u in sources {
                for v in 0..n {
                    s.push_str(&format!("\n{u},{v},{}", oracle.exact_distance(u, v)));
                }
            }
            emit(&cli.out, &s)
        }
        Cmd::Certify { instance, cert } => {
            let inst = read_instance(&instance)?;
            let text = std::fs::read_to_string(&cert)?;
            let cert: CertificateFile = serde_json::from_str(&text)?;
            let report = certify(&inst, &cert)?;
            emit(&cli.out, &serde_json::to_string_pretty(&report)?)
        }
        Cmd::Bench {
            gen,
            sim,
            trials,
            k_list,
            with_oracle,
        } => {
            let runs: Vec<(usize, Option<usize>)> = (0..trials)
                .flat_map(|t| {
                    std::iter::once((t, None)).chain(k_list.iter().map(move |&k| (t, Some(k))))
                })
                .collect();
            let results: Vec<Result<ReportRow, FaclocError>> = runs
                .par_iter()
                .map(|&(t, k)| {
                    let seed = cli.seed.wrapping_add(t as u64);
                    let inst = generate(&gen.to_spec(seed))?;
                    let label = format!("bench[trial={t}]");
                    match k {
                        None => run_sequential(&inst, &label, seed, cli.eps, with_oracle)
                            .map(|a| a.row),
                        Some(k) => {
                            let mut sim = sim.clone();
                            sim.k = k;
                            sim.congested_clique = false;
                            let cluster = sim.cluster(inst.n_vertices(), seed)?;
                            let cfg = sim.config(cli.eps, seed);
                            run_simulated(&inst, &label, &cluster, &cfg, Backend::Exact, with_oracle)
                                .map(|a| a.row)
                        }
                    }
                })
                .collect();
            let mut rows = Vec::with_capacity(results.len());
            for r in results {
                rows.push(r?);
            }
            emit(&cli.out, &rows_output(&rows, cli.format))
        }
    }
}

fn exit_code_for(err: &FaclocError) -> u8 {
    match err {
        FaclocError::Infeasible(_) => 2,
        FaclocError::BadArgument(_)
        | FaclocError::InvalidInstance(_)
        | FaclocError::SizeGuard(_)
        | FaclocError::UnknownVertex(_)
        | FaclocError::Json(_)
        | FaclocError::Io(_) => 1,
        FaclocError::Structural(_) | FaclocError::AccountingViolation(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // keep usage errors on exit code 1 (clap's default is 2)
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
