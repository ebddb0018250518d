//! Exact solvers for closed multiclass product-form queueing networks.
//!
//! The crate computes normalizing constants `G(m, N)` of networks made of
//! single-server queues (each possibly replicated `m_k` times) plus a per-class
//! delay, and derives throughputs, queue lengths, utilizations, and response
//! times from them. All arithmetic is exact over big rationals.
//!
//! [`mbmom::mbmom_solve`] is the multi-branched method of moments. It adds
//! generalized convolution relations to the moment recursion and evaluates a
//! tree of models with fewer queues to shrink the per-step linear system.
//! [`mom::mom_solve`] is the original method of moments recursion. The
//! [`oracles`] module holds the independent ground truth used by the tests.
//!
//! ```
//! use mbmom::{validate_model, NetworkModel, Branching, mbmom_solve, int};
//!
//! let model = validate_model(NetworkModel {
//!     demands: vec![vec![int(1), int(2)], vec![int(3), int(1)]],
//!     think_times: vec![int(0), int(0)],
//!     multiplicities: vec![1, 1],
//!     populations: vec![2, 1],
//! })
//! .unwrap();
//! let solution = mbmom_solve(&model, Branching::Max).unwrap();
//! let indices = solution.indices().unwrap();
//! assert_eq!(indices.throughput.len(), 2);
//! ```

#![forbid(unsafe_code)]

pub mod basis;
pub mod costmodel;
pub mod engine;
pub mod equations;
pub mod error;
pub mod linalg;
pub mod mbmom;
pub mod metrics;
pub mod model;
pub mod mom;
pub mod oracles;
pub mod scalar;
pub mod tree;

pub use crate::basis::{enumerate_basis, BasisLayout, LevelSchedule};
pub use crate::engine::{BasisValues, FallbackDiagnostic, Solution, SolveOptions, SolveStats};
pub use crate::error::{Error, Result};
pub use crate::linalg::{ExactMatrix, ExactVector, LinalgError};
pub use crate::mbmom::{mbmom_solve, mbmom_solve_with, Branching};
pub use crate::metrics::{indices_from_constants, state_probability};
pub use crate::model::{scale_model, validate_model, GIndex, MeanIndices, NetworkModel, ValidatedModel};
pub use crate::mom::{mom_solve, mom_solve_with};
pub use crate::oracles::{g_bruteforce, g_convolution, mva, StateVector};
pub use crate::scalar::{int, parse_exact, ratio, ExactScalar};
