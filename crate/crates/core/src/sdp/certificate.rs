use super::problem::SdpProblem;
use super::solver::{SdpSolution, SolveStatus};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Independently recomputed optimality measures of a solution, all absolute.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport<T: Real> {
    pub status: SolveStatus,
    /// `‖A(X) − b‖₂`.
    pub primal_residual: T,
    /// `‖A*y + S − C‖_F` over all blocks.
    pub dual_residual: T,
    /// `Σ_k ⟨X_k, S_k⟩`.
    pub complementarity: T,
    pub min_eig_x: T,
    pub min_eig_s: T,
    /// `⟨C, X⟩ − bᵀy`.
    pub gap: T,
    /// `None` unless the solver reported an optimum.
    pub passed: Option<bool>,
}

impl<T: Real> CertificateReport<T> {
    /// Largest of the measured violations.
    pub fn worst(&self) -> T {
        self.primal_residual
            .max(self.dual_residual)
            .max(self.complementarity.abs())
            .max(-self.min_eig_x)
            .max(-self.min_eig_s)
            .max(self.gap.abs())
    }
}

pub fn check_certificate<T: Real>(p: &SdpProblem<T>, s: &SdpSolution<T>, tol: T) -> CertificateReport<T> {
    let x: Vec<Matrix<T>> = s.x.iter().map(|h| h.matrix().clone()).collect();
    let sl: Vec<Matrix<T>> = s.s.iter().map(|h| h.matrix().clone()).collect();
    let b = p.rhs();
    let ax = p.apply(&x);
    let primal = ax.iter().zip(&b).map(|(a, b)| (*a - *b).powi(2)).sum::<T>().sqrt();
    let aty = p.adjoint(&s.y);
    let c = p.objective_dense();
    let dual = aty
        .iter()
        .zip(&sl)
        .zip(&c)
        .map(|((a, sk), ck)| (&(a + sk) - ck).frobenius_norm().powi(2))
        .sum::<T>()
        .sqrt();
    let comp = x.iter().zip(&sl).map(|(a, b)| a.trace_product_re(b)).sum::<T>();
    let min_of = |v: &[crate::linalg::Hermitian<T>]| {
        v.iter()
            .map(|h| h.min_eigenvalue().unwrap_or(T::neg_infinity()))
            .fold(T::infinity(), T::min)
    };
    let pobj = p.objective_value(&x);
    let dobj = b.iter().zip(&s.y).map(|(a, b)| *a * *b).sum::<T>();
    let mut report = CertificateReport {
        status: s.status,
        primal_residual: primal,
        dual_residual: dual,
        complementarity: comp,
        min_eig_x: min_of(&s.x),
        min_eig_s: min_of(&s.s),
        gap: pobj - dobj,
        passed: None,
    };
    if s.status == SolveStatus::Optimal {
        report.passed = Some(report.worst() <= tol);
    }
    report
}
