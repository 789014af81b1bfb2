//! Distance queries over explicit or implicit metrics: SSSP, MSSP,
//! ExclusiveMSSP, and ball membership.
//!
//! Both metric modes are reduced to a graph: the implicit mode keeps its
//! edge list, the explicit `|F| x |C|` matrix becomes the complete bipartite
//! graph between facilities and clients. Facility-facility (and
//! client-client) distances under the explicit mode are therefore shortest
//! paths through the other side, which is exactly the triangle-inequality
//! form every downstream argument uses.
//!
//! The `Rounded` backend inflates every reported distance by a deterministic
//! adversarial factor in `[1, 1+eps]` drawn from a seeded hash of the
//! endpoint pair, to stress-test the slack tolerance of the algorithms.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{FaclocError, Result};
use crate::model::{MetricView, VertexId};

/// splitmix64-style avalanche.
#[inline]
fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58476d1ce4e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Deterministic 64-bit hash of a seed and up to three words.
#[inline]
pub fn hash64(seed: u64, a: u64, b: u64, c: u64) -> u64 {
    let mut h = seed ^ 0x9e3779b97f4a7c15;
    h = mix64(h ^ a);
    h = mix64(h.wrapping_add(b).rotate_left(17));
    mix64(h ^ c)
}

/// Uniform value in `[0,1)` from a hash.
#[inline]
pub fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Backend {
    Exact,
    Rounded { eps: f64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BallQuery {
    pub center: VertexId,
    pub radius: f64,
    pub members: Vec<VertexId>,
}

impl BallQuery {
    /// Restrict ball membership to clients (vertex ids `>= n_facilities`).
    pub fn clients_only(&self, n_facilities: usize) -> Vec<VertexId> {
        self.members
            .iter()
            .copied()
            .filter(|&v| v >= n_facilities)
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct DistanceOracle {
    n: usize,
    /// Row-major exact all-pairs distances; `+inf` marks unreachable pairs.
    dist: Vec<f64>,
    backend: Backend,
}

struct HeapItem {
    d: f64,
    v: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, o: &Self) -> bool {
        self.d == o.d && self.v == o.v
    }
}
impl Eq for HeapItem {}
impl Ord for HeapItem {
    fn cmp(&self, o: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        o.d.partial_cmp(&self.d)
            .unwrap_or(Ordering::Equal)
            .then_with(|| o.v.cmp(&self.v))
    }
}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(HeapItem { d: 0.0, v: source });
    while let Some(HeapItem { d, v }) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(u, w) in &adj[v] {
            let nd = d + w;
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(HeapItem { d: nd, v: u });
            }
        }
    }
    dist
}

impl DistanceOracle {
    pub fn new(view: &MetricView, n_facilities: usize, n_clients: usize, backend: Backend) -> Self {
        let n = n_facilities + n_clients;
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        match view {
            MetricView::Implicit { edges } => {
                for &(u, v, w) in edges {
                    adj[u].push((v, w));
                    adj[v].push((u, w));
                }
            }
            MetricView::Explicit { matrix } => {
                for (i, row) in matrix.iter().enumerate() {
                    for (j, &c) in row.iter().enumerate() {
                        if c.is_finite() {
                            let jv = n_facilities + j;
                            adj[i].push((jv, c));
                            adj[jv].push((i, c));
                        }
                    }
                }
            }
        }
        let mut dist = vec![f64::INFINITY; n * n];
        for s in 0..n {
            let row = dijkstra(&adj, s);
            dist[s * n..(s + 1) * n].copy_from_slice(&row);
        }
        DistanceOracle { n, dist, backend }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn eps(&self) -> f64 {
        match self.backend {
            Backend::Exact => 0.0,
            Backend::Rounded { eps, .. } => eps,
        }
    }

    /// True shortest-path distance, independent of the backend.
    #[inline]
    pub fn exact_distance(&self, u: VertexId, v: VertexId) -> f64 {
        self.dist[u * self.n + v]
    }

    /// Reported distance under the backend: exact, or inflated by the
    /// symmetric per-pair adversarial factor in `[1, 1+eps]`.
    #[inline]
    pub fn distance(&self, u: VertexId, v: VertexId) -> f64 {
        let d = self.dist[u * self.n + v];
        match self.backend {
            Backend::Exact => d,
            Backend::Rounded { eps, seed } => {
                if u == v {
                    return 0.0;
                }
                let (a, b) = if u < v { (u, v) } else { (v, u) };
                d * (1.0 + eps * unit_f64(hash64(seed, a as u64, b as u64, 0x9d15)))
            }
        }
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v >= self.n {
            return Err(FaclocError::UnknownVertex(v));
        }
        Ok(())
    }

    /// Single-source distances to every vertex, per the backend.
    pub fn sssp(&self, source: VertexId) -> Result<Vec<f64>> {
        self.check_vertex(source)?;
        Ok((0..self.n).map(|v| self.distance(source, v)).collect())
    }

    /// For each vertex, the nearest source and a reported distance `d~` with
    /// `d(v,u) <= d~ <= (1+eps) d(v,T)`. Ties break to the lowest source id.
    pub fn mssp(&self, sources: &[VertexId]) -> Result<Vec<(VertexId, f64)>> {
        if sources.is_empty() {
            return Err(FaclocError::BadArgument("empty source set".into()));
        }
        for &s in sources {
            self.check_vertex(s)?;
        }
        let mut out = Vec::with_capacity(self.n);
        for v in 0..self.n {
            let mut best_src = sources[0];
            let mut best = self.distance(v, best_src);
            for &s in &sources[1..] {
                let d = self.distance(v, s);
                if d < best || (d == best && s < best_src) {
                    best = d;
                    best_src = s;
                }
            }
            out.push((best_src, best));
        }
        Ok(out)
    }

    /// For each source, its nearest other source under the backend.
    pub fn exclusive_mssp(&self, sources: &[VertexId]) -> Result<Vec<(VertexId, VertexId, f64)>> {
        if sources.len() < 2 {
            return Err(FaclocError::BadArgument(
                "exclusive MSSP needs at least two sources".into(),
            ));
        }
        for &s in sources {
            self.check_vertex(s)?;
        }
        let mut out = Vec::with_capacity(sources.len());
        for &s in sources {
            let mut best: Option<(VertexId, f64)> = None;
            for &t in sources {
                if t == s {
                    continue;
                }
                let d = self.distance(s, t);
                if best.is_none_or(|(bt, bd)| d < bd || (d == bd && t < bt)) {
                    best = Some((t, d));
                }
            }
            let (t, d) = best.unwrap();
            out.push((s, t, d));
        }
        Ok(out)
    }

    pub fn ball(&self, center: VertexId, radius: f64) -> Result<BallQuery> {
        self.check_vertex(center)?;
        if radius < 0.0 {
            return Err(FaclocError::BadArgument("negative radius".into()));
        }
        let members = (0..self.n)
            .filter(|&v| self.distance(center, v) <= radius)
            .collect();
        Ok(BallQuery {
            center,
            radius,
            members,
        })
    }

    /// Largest finite exact distance in the metric.
    pub fn max_finite_distance(&self) -> f64 {
        self.dist
            .iter()
            .copied()
            .filter(|d| d.is_finite())
            .fold(0.0, f64::max)
    }
}
