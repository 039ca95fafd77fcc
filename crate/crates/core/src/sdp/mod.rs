//! Dense semidefinite programming over Hermitian blocks.

mod certificate;
mod dense;
mod problem;
mod solver;
mod sparse;

pub use certificate::{check_certificate, CertificateReport};
pub use problem::{Block, Constraint, MapTerm, ProblemBuilder, SdpProblem};
pub use solver::{solve, SdpSolution, SolveStatus, SolverConfig};
pub use sparse::SparseHermitian;

#[cfg(test)]
mod tests;
