//! Facility location with outliers: sequential O(1)-approximation solvers
//! (robust and penalty variants), LP-dual certificates, a brute-force
//! optimum oracle, and a deterministic round/bandwidth-accounting simulator
//! of the k-machine and Congested Clique algorithms.

pub mod distsim;
pub mod dual;
pub mod error;
pub mod gen;
pub mod harness;
pub mod metric;
pub mod model;
pub mod oracle;
pub mod solver;

pub use error::{FaclocError, Result};
pub use model::{Instance, MetricView, Solution, Variant};
