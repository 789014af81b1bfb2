//! Approximate radii from ring counts: the plain cumulative rule and the
//! penalty-class lower-bound rule.
//!
//! Counts are injectable: the estimator provides them in production, exact
//! ball counts can be substituted to isolate the rounding analysis from the
//! estimator's noise.

use crate::metric::DistanceOracle;
use crate::model::{FacilityId, VertexId};
use crate::solver::RadiusKind;

use super::estimate::NbdEstimates;

/// Ring counts `q_i(v)` for a participant population: estimated or exact.
pub trait RingCounts {
    fn count(&self, v: VertexId, ring: usize) -> f64;
    fn max_ring(&self) -> usize;
}

impl RingCounts for NbdEstimates {
    fn count(&self, v: VertexId, ring: usize) -> f64 {
        self.query_ring(v, ring)
    }
    fn max_ring(&self) -> usize {
        self.max_ring
    }
}

/// Exact `|B(v, (1+eps)^ring)|` over a member set, scaled distances.
pub struct ExactRingCounts<'a> {
    pub oracle: &'a DistanceOracle,
    pub members: Vec<VertexId>,
    pub sigma: f64,
    pub eps: f64,
    pub max_ring: usize,
}

impl RingCounts for ExactRingCounts<'_> {
    fn count(&self, v: VertexId, ring: usize) -> f64 {
        let radius = (1.0 + self.eps).powi(ring.min(self.max_ring) as i32);
        self.members
            .iter()
            .filter(|&&u| self.oracle.exact_distance(v, u) * self.sigma <= radius * (1.0 + 1e-12))
            .count() as f64
    }
    fn max_ring(&self) -> usize {
        self.max_ring
    }
}

/// Approximate radius: grid exponent of `(1+eps)`, the zero clamp for
/// zero-cost facilities, or removed (no grid scale satisfies the rule).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ApproxRadius {
    Zero,
    Ring(i64),
    Removed,
}

impl ApproxRadius {
    /// Unscaled radius value.
    pub fn value(&self, sigma: f64, eps: f64) -> f64 {
        match self {
            ApproxRadius::Zero => 0.0,
            ApproxRadius::Ring(t) => (1.0 + eps).powi(*t as i32) / sigma,
            ApproxRadius::Removed => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, ApproxRadius::Removed)
    }
}

#[derive(Clone, Debug)]
pub struct ApproxRadiusTable {
    pub kind: RadiusKind,
    pub eps: f64,
    pub sigma: f64,
    /// Indexed by facility id; non-participating facilities are `Removed`.
    pub radii: Vec<ApproxRadius>,
}

impl ApproxRadiusTable {
    pub fn value(&self, i: FacilityId) -> f64 {
        self.radii[i].value(self.sigma, self.eps)
    }
}

/// Plain rule: `r~ = (1+eps)^(t-1)` for the smallest `t >= 1` with
/// `sum_{i=0..t} q_i(v) ((1+eps)^{i+1} - (1+eps)^i) > f_v` (scaled costs).
/// Zero-cost facilities clamp to radius 0.
pub fn approx_radii_plain(
    counts: &dyn RingCounts,
    scaled_costs: &[(FacilityId, f64)],
    n_facilities: usize,
    eps: f64,
    sigma: f64,
) -> ApproxRadiusTable {
    let mut radii = vec![ApproxRadius::Removed; n_facilities];
    let max_ring = counts.max_ring();
    // beyond-table rings reuse the saturated count, so the loop needs a cap
    let hard_cap = max_ring + 4096;
    for &(v, f) in scaled_costs {
        if f == 0.0 {
            radii[v] = ApproxRadius::Zero;
            continue;
        }
        if f.is_infinite() {
            continue;
        }
        let mut sum = counts.count(v, 0) * eps; // q_0 * ((1+eps)^1 - (1+eps)^0)
        let mut t = 1usize;
        loop {
            let q = counts.count(v, t);
            sum += q * eps * (1.0 + eps).powi(t as i32);
            if sum > f {
                radii[v] = ApproxRadius::Ring(t as i64 - 1);
                break;
            }
            if t >= hard_cap || (t > max_ring && q == 0.0) || !sum.is_finite() {
                break; // stays Removed
            }
            t += 1;
        }
    }
    ApproxRadiusTable {
        kind: RadiusKind::Plain,
        eps,
        sigma,
        radii,
    }
}

/// Penalty rule: per-class lower bounds
/// `lambda(v,t,b) = sum_{i=0}^{min(t,b)-1} q_{i,b}(v) ((1+eps)^{i+1}-(1+eps)^i)`
/// accumulated over classes; `r~ = (1+eps)^(t-1)` for the smallest `t >= 1`
/// with `sum_b lambda(v,t,b) > f_v`, infinity (removed) when no `t`
/// qualifies. Class `b` caps its contribution at ring `b`, which is the
/// per-client-sound form of the two-case alpha lower bound.
pub fn approx_radii_penalty(
    per_class: &[(usize, &dyn RingCounts)],
    scaled_costs: &[(FacilityId, f64)],
    n_facilities: usize,
    eps: f64,
    sigma: f64,
) -> ApproxRadiusTable {
    let mut radii = vec![ApproxRadius::Removed; n_facilities];
    let max_b = per_class.iter().map(|&(b, _)| b).max().unwrap_or(0);
    for &(v, f) in scaled_costs {
        if f == 0.0 {
            radii[v] = ApproxRadius::Zero;
            continue;
        }
        if f.is_infinite() {
            continue;
        }
        let mut lambda_total = 0.0f64;
        // Lambda(t) - Lambda(t-1) = sum over classes with b >= t of
        // q_{t-1,b}(v) * Delta_{t-1}
        for t in 1..=max_b + 1 {
            let delta = eps * (1.0 + eps).powi(t as i32 - 1);
            for &(b, counts) in per_class {
                if b >= t {
                    lambda_total += counts.count(v, t - 1) * delta;
                }
            }
            if lambda_total > f {
                radii[v] = ApproxRadius::Ring(t as i64 - 1);
                break;
            }
        }
    }
    ApproxRadiusTable {
        kind: RadiusKind::Penalty,
        eps,
        sigma,
        radii,
    }
}

/// Exact `lambda(v,t,b)` from true ring counts, for the lower-bound checks.
pub fn lambda_exact(
    oracle: &DistanceOracle,
    class_members: &[VertexId],
    v: VertexId,
    t: usize,
    b: usize,
    eps: f64,
    sigma: f64,
) -> f64 {
    let cap = t.min(b);
    let mut sum = 0.0;
    for i in 0..cap {
        let radius = (1.0 + eps).powi(i as i32);
        let q = class_members
            .iter()
            .filter(|&&u| oracle.exact_distance(v, u) * sigma <= radius * (1.0 + 1e-12))
            .count() as f64;
        sum += q * eps * (1.0 + eps).powi(i as i32);
    }
    sum
}

/// Exact `alpha(v, r, b) = sum_{u in B(v,r) cap P_b} max(min(r,p_u)-d, 0)`
/// on scaled quantities.
pub fn alpha_exact(
    oracle: &DistanceOracle,
    class_members: &[(VertexId, f64)], // (vertex, scaled penalty)
    v: VertexId,
    r: f64,
    sigma: f64,
) -> f64 {
    class_members
        .iter()
        .map(|&(u, p)| {
            let d = oracle.exact_distance(v, u) * sigma;
            (r - d).min(p - d).max(0.0)
        })
        .filter(|x| *x > 0.0)
        .sum()
}
