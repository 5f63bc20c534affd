//! Temperature-dependent nonlinear PageRank ("T-PageRank").
//!
//! A random surfer on a weighted digraph `C` moves from page `i` to page `j`
//! with probability proportional to `C_ij * g_T(x_j)`, where `x` is the current
//! ranking and `g_T` an increasing weight function (by default `exp(x / T)`).
//! The T-PageRank is a fixed point of the map sending a ranking to the
//! invariant measure of the transition matrix it induces.
//!
//! The crate is organised as follows:
//!
//! * [`graph`]: sparse row-major storage, loaders, structural predicates.
//! * [`weights`]: the weight family `g_T`, Lipschitz-ratio bounds and
//!   uniqueness certificates.
//! * [`kernel`]: the matrix-free transition operator, the two fixed-point
//!   iterations and the classical PageRank baseline.
//! * [`oracle`]: exact small-scale ground truth (Matrix Tree Theorem,
//!   multistart fixed-point search, 2x2 fixed-point counting).
//! * [`metrics`]: Hilbert projective metric and Birkhoff contraction.
//! * [`critical`]: complete-graph theory, homotopy estimation of the critical
//!   temperature and annealing-style temperature sweeps.
//! * [`report`]: rank distribution and top-k summaries.
//! * [`check`]: the seeded self-validation suites behind `tpagerank check`.

pub mod check;
pub mod critical;
pub mod error;
pub mod graph;
pub mod kernel;
pub mod metrics;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod weights;

pub use error::{Error, Result};
pub use graph::{Graph, StructureReport};
pub use kernel::{
    IterOptions, IterationReport, Kernel, KernelConfig, Personalization, RankVector, Scheme,
};
pub use weights::{Energy, LipBounds, Temperature, UniquenessCertificate, Verdict, WeightFunction};
