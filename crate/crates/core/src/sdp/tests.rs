use super::*;
use crate::channels::{depolarizing_choi, gamma_operator, DepolarizingParam};
use crate::linalg::{Hermitian, SubsystemDims};
use crate::Error;
use proptest::prelude::*;

fn solve_default(p: &SdpProblem<f64>) -> SdpSolution<f64> {
    solve(p, &SolverConfig::default()).unwrap()
}

fn trace_one_problem() -> SdpProblem<f64> {
    let mut b = ProblemBuilder::new();
    let x = b.psd("X", 2);
    b.minimize(x, &Hermitian::from_real_diag(&[1.0, 0.0])).unwrap();
    b.linear_equal(&[(x, Hermitian::identity(2))], 1.0).unwrap();
    b.build().unwrap()
}

#[test]
fn minimal_diagonal_entry() {
    let p = trace_one_problem();
    let s = solve_default(&p);
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!(s.primal_objective.abs() < 1e-7, "{}", s.primal_objective);
    let rep = check_certificate(&p, &s, 1e-6);
    assert_eq!(rep.passed, Some(true), "{rep:?}");
}

#[test]
fn linear_program_as_diagonal_sdp() {
    let mut b = ProblemBuilder::new();
    let x = b.scalar("x");
    let s = b.scalar("s");
    b.minimize_scalar(x, 1.0).unwrap();
    b.scalar_equal(&[(x, 1.0), (s, 1.0)], 3.0).unwrap();
    let p = b.build().unwrap();
    let sol = solve_default(&p);
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!(sol.primal_objective.abs() < 1e-7);
    assert!((sol.scalar(1) - 3.0).abs() < 1e-6);
}

/// min μ s.t. Z ⪰ 0, Z ⪰ J, μI ⪰ Tr_out Z
fn diamond_problem(j: &Hermitian<f64>, d: usize) -> SdpProblem<f64> {
    let l = SubsystemDims::uniform(d, 2).unwrap();
    let mut b = ProblemBuilder::new();
    let mu = b.scalar("mu");
    let z = b.psd("Z", d * d);
    b.minimize_scalar(mu, 1.0).unwrap();
    b.matrix_ge(&[MapTerm::block(z, d * d, 1.0)], j).unwrap();
    b.matrix_ge(
        &[
            MapTerm::scalar(mu, Hermitian::identity(d)),
            MapTerm::partial_trace(z, &l, &[1], -1.0),
        ],
        &Hermitian::zeros(d),
    )
    .unwrap();
    b.build().unwrap()
}

#[test]
fn identity_minus_replacement_diamond() {
    let d = 2;
    let j = gamma_operator::<f64>(d).sub(depolarizing_choi(DepolarizingParam(1.0), d).op());
    let p = diamond_problem(&j, d);
    let s = solve_default(&p);
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.primal_objective - 0.75).abs() < 1e-7, "{}", s.primal_objective);
    assert!((s.dual_objective - 0.75).abs() < 1e-7);
    assert_eq!(check_certificate(&p, &s, 1e-6).passed, Some(true));
}

#[test]
fn corrupted_solution_fails_certificate() {
    let p = trace_one_problem();
    let mut s = solve_default(&p);
    s.x = s.x.iter().map(|x| x.scale(1.01)).collect();
    let rep = check_certificate(&p, &s, 1e-6);
    assert_eq!(rep.passed, Some(false));
    assert!((rep.primal_residual - 0.01).abs() < 1e-6, "{}", rep.primal_residual);
}

#[test]
fn unfinished_solve_reports_gap_without_verdict() {
    let j = gamma_operator::<f64>(2).sub(depolarizing_choi(DepolarizingParam(1.0), 2).op());
    let p = diamond_problem(&j, 2);
    let cfg = SolverConfig {
        max_iter: 2,
        ..SolverConfig::default()
    };
    let s = solve(&p, &cfg).unwrap();
    assert_eq!(s.status, SolveStatus::MaxIterations);
    let rep = check_certificate(&p, &s, 1e-6);
    assert_eq!(rep.passed, None);
    assert!(rep.gap.is_finite() && s.gap > 1e-8);
}

#[test]
fn primal_infeasibility_is_detected() {
    // x + s = −1 with x, s ≥ 0
    let mut b = ProblemBuilder::new();
    let x = b.scalar("x");
    let s = b.scalar("s");
    b.minimize_scalar(x, 1.0).unwrap();
    b.scalar_equal(&[(x, 1.0), (s, 1.0)], -1.0).unwrap();
    let sol = solve_default(&b.build().unwrap());
    assert_eq!(sol.status, SolveStatus::PrimalInfeasible);
    assert!(sol.y[0] < 0.0);
}

#[test]
fn dual_infeasibility_is_detected() {
    // min −x s.t. x − y = 0: unbounded below
    let mut b = ProblemBuilder::new();
    let x = b.scalar("x");
    let y = b.scalar("y");
    b.minimize_scalar(x, -1.0).unwrap();
    b.scalar_equal(&[(x, 1.0), (y, -1.0)], 0.0).unwrap();
    let sol = solve_default(&b.build().unwrap());
    assert_eq!(sol.status, SolveStatus::DualInfeasible);
}

#[test]
fn psd_infeasibility_is_detected() {
    // X ⪰ 0 with X_00 = −1 through an operator identity
    let mut b = ProblemBuilder::new();
    let x = b.psd("X", 2);
    b.matrix_equal(&[MapTerm::block(x, 2, 1.0)], &Hermitian::from_real_diag(&[-1.0, 1.0]))
        .unwrap();
    let sol = solve_default(&b.build().unwrap());
    assert_eq!(sol.status, SolveStatus::PrimalInfeasible);
}

#[test]
fn guardrail() {
    let mut b = ProblemBuilder::<f64>::new();
    let x = b.psd("X", 131);
    b.linear_equal(&[(x, Hermitian::identity(131))], 1.0).unwrap();
    let p = b.build().unwrap();
    assert!(matches!(
        solve(&p, &SolverConfig::default()),
        Err(Error::TooLarge { realified: 262, .. })
    ));
    let bad = SolverConfig {
        step_fraction: 1.0,
        ..SolverConfig::default()
    };
    assert!(solve(&p, &bad).is_err());
}

#[test]
fn repeated_solves_are_identical() {
    let j = gamma_operator::<f64>(3).sub(depolarizing_choi(DepolarizingParam(0.6), 3).op());
    let p = diamond_problem(&j, 3);
    let a = solve_default(&p);
    let b = solve_default(&p);
    assert!((a.primal_objective - b.primal_objective).abs() <= 1e-10);
    assert_eq!(a.iterations, b.iterations);
    assert!((a.primal_objective - 0.6 * 8.0 / 9.0).abs() < 1e-7);
}

/// Random Hermitian-block problem whose optimum is known: minimize
/// ⟨U D Uᴴ, X⟩ over density operators, optimum `min D`.
fn rotated_diagonal_problem(diag: &[f64], seed: u64) -> SdpProblem<f64> {
    use rand::SeedableRng;
    let n = diag.len();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let u = crate::linalg::haar_unitary::<f64>(n, &mut rng);
    let c = Hermitian::from_real_diag(diag).conjugate_by(&u);
    let mut b = ProblemBuilder::new();
    let x = b.psd("X", n);
    b.minimize(x, &c).unwrap();
    b.linear_equal(&[(x, Hermitian::identity(n))], 1.0).unwrap();
    b.build().unwrap()
}

#[test]
fn realified_solve_matches_complex_solve() {
    let diag = [0.7, -0.2, 1.5, 0.1];
    let p = rotated_diagonal_problem(&diag, 17);
    let direct = solve_default(&p);
    let real = solve_default(&p.realify());
    assert_eq!(real.status, SolveStatus::Optimal);
    assert!((direct.primal_objective + 0.2).abs() < 1e-7);
    assert!((direct.primal_objective - real.primal_objective).abs() < 1e-8);
    let back = SdpProblem::unrealify_block(real.x[0].matrix());
    assert!((back.trace().re - 1.0).abs() < 1e-7);
    assert!((p.objective_value(&[back]) - direct.primal_objective).abs() < 1e-7);
}

/// `bᵀy ≤ ⟨C,X⟩` up to the slack accounted for by the residuals.
fn weak_duality_holds(p: &SdpProblem<f64>, s: &SdpSolution<f64>) -> bool {
    let rep = check_certificate(p, s, 1.0);
    let xn: f64 = s.x.iter().map(|x| x.frobenius_norm().powi(2)).sum::<f64>().sqrt();
    let yn: f64 = s.y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let slack = rep.primal_residual * yn + rep.dual_residual * xn;
    s.primal_objective - s.dual_objective >= -1e-10 - slack
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weak_duality_on_random_problems(
        diag in proptest::collection::vec(-2.0f64..2.0, 2..6),
        seed in 0u64..1000,
    ) {
        let p = rotated_diagonal_problem(&diag, seed);
        let s = solve_default(&p);
        prop_assert_eq!(s.status, SolveStatus::Optimal);
        let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!((s.primal_objective - lo).abs() < 1e-6);
        prop_assert!(weak_duality_holds(&p, &s));
        for max_iter in [1usize, 3, 6] {
            let partial = solve(&p, &SolverConfig { max_iter, ..SolverConfig::default() }).unwrap();
            prop_assert!(weak_duality_holds(&p, &partial));
        }
    }
}
