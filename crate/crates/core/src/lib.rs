//! Variational elliptic equations on weighted, locally finite graphs.
//!
//! Local Dirichlet problems are solved on balls `B_k = {ρ < k}` around an
//! origin and passed to the limit by exhaustion. Every solver checks the
//! a-priori bounds that make the limit exist, and the embedding inequalities
//! behind them can be evaluated on arbitrary functions.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exhaustion;
pub mod function;
pub mod generate;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod meanfield;
pub mod problem;
pub mod report;
pub mod schrodinger;
pub mod spaces;
pub mod yamabe;

pub use error::{Error, Result};
pub use exhaustion::{run_exhaustion, ExhaustionError, ExhaustionOptions, ExhaustionReport, LocalProblem};
pub use function::VertexFunction;
pub use graph::{Ball, GraphBuilder, WeightedGraph};
pub use problem::{load_problem, Coefficient, Equation, ProblemSpec};
pub use spaces::HypothesisConstants;
