//! Instance generators for the harness: random connected graphs (implicit
//! metric), explicit matrices taken from shortest-path closures (so the
//! metric property holds by construction), and planted clusters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FaclocError, Result};
use crate::metric::{Backend, DistanceOracle};
use crate::model::{Instance, MetricView, Variant};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    /// Explicit matrix: shortest-path closure of a random connected graph
    /// on `nf + nc` vertices.
    RandomMetric { nf: usize, nc: usize },
    /// Implicit metric: random connected graph, integer weights in
    /// `1..=w_max`, facilities are the first `n/2` vertices.
    RandomGraph { n: usize, m: usize, w_max: u64 },
    /// `centers` chained facilities, each with `per_center` clients attached
    /// at integer distance `0..=spread`.
    PlantedClusters {
        centers: usize,
        per_center: usize,
        spread: u64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenSpec {
    pub generator: Generator,
    pub variant: Variant,
    pub seed: u64,
    /// Opening costs are uniform integers in `0..=cost_max`.
    pub cost_max: u64,
    /// Robust: coverage requirement; `None` draws uniformly from `0..=nc`.
    pub coverage: Option<usize>,
    /// Penalty: penalties are uniform integers in `0..=penalty_max`.
    pub penalty_max: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            generator: Generator::RandomGraph {
                n: 16,
                m: 32,
                w_max: 10,
            },
            variant: Variant::Plain,
            seed: 0,
            cost_max: 20,
            coverage: None,
            penalty_max: 12,
        }
    }
}

/// Random connected graph: a random spanning tree plus extra distinct edges.
fn random_connected_edges(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    w_max: u64,
) -> Vec<(usize, usize, f64)> {
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        seen.insert((u, v));
        edges.push((u, v, rng.gen_range(1..=w_max) as f64));
    }
    let mut extra = m.saturating_sub(n - 1);
    let mut attempts = 0;
    while extra > 0 && attempts < 50 * m + 100 {
        attempts += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if seen.insert(key) {
            edges.push((key.0, key.1, rng.gen_range(1..=w_max) as f64));
            extra -= 1;
        }
    }
    edges
}

pub fn generate(spec: &GenSpec) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (nf, nc, metric) = match spec.generator {
        Generator::RandomGraph { n, m, w_max } => {
            if n < 2 {
                return Err(FaclocError::BadArgument("need at least 2 vertices".into()));
            }
            let nf = (n / 2).max(1);
            let nc = n - nf;
            if nc == 0 {
                return Err(FaclocError::BadArgument("no clients".into()));
            }
            let edges = random_connected_edges(&mut rng, n, m, w_max.max(1));
            (nf, nc, MetricView::Implicit { edges })
        }
        Generator::RandomMetric { nf, nc } => {
            if nf == 0 || nc == 0 {
                return Err(FaclocError::BadArgument(
                    "need facilities and clients".into(),
                ));
            }
            let n = nf + nc;
            let edges = random_connected_edges(&mut rng, n, 2 * n, 10);
            let oracle =
                DistanceOracle::new(&MetricView::Implicit { edges }, nf, nc, Backend::Exact);
            let matrix: Vec<Vec<f64>> = (0..nf)
                .map(|i| (0..nc).map(|j| oracle.exact_distance(i, nf + j)).collect())
                .collect();
            (nf, nc, MetricView::Explicit { matrix })
        }
        Generator::PlantedClusters {
            centers,
            per_center,
            spread,
        } => {
            if centers == 0 || per_center == 0 {
                return Err(FaclocError::BadArgument(
                    "need centers and members".into(),
                ));
            }
            let nf = centers;
            let nc = centers * per_center;
            let mut edges = Vec::new();
            let gap = (10 * (spread + 1)) as f64;
            for c in 1..centers {
                edges.push((c - 1, c, gap));
            }
            for c in 0..centers {
                for s in 0..per_center {
                    let client = nf + c * per_center + s;
                    edges.push((c, client, rng.gen_range(0..=spread) as f64));
                }
            }
            (nf, nc, MetricView::Implicit { edges })
        }
    };

    let opening_costs: Vec<f64> = (0..nf)
        .map(|_| rng.gen_range(0..=spec.cost_max) as f64)
        .collect();
    let (coverage, penalties) = match spec.variant {
        Variant::Plain => (None, None),
        Variant::Robust => {
            let p = spec.coverage.unwrap_or_else(|| rng.gen_range(0..=nc));
            (Some(p.min(nc)), None)
        }
        Variant::Penalty => {
            let pens: Vec<f64> = (0..nc)
                .map(|_| rng.gen_range(0..=spec.penalty_max) as f64)
                .collect();
            (None, Some(pens))
        }
    };
    let inst = Instance {
        variant: spec.variant,
        facilities: nf,
        clients: nc,
        opening_costs,
        coverage,
        penalties,
        metric,
    };
    inst.validate()?;
    Ok(inst)
}
