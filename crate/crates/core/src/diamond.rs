//! Half diamond norm of Hermitian-preserving maps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channels::ChoiOperator;
use crate::error::{Error, Result};
use crate::linalg::{haar_unitary, Hermitian, Matrix, SubsystemDims};
use crate::scalar::Real;
use crate::sdp::{
    check_certificate, solve, Block, CertificateReport, MapTerm, ProblemBuilder, SdpProblem, SolveStatus, SolverConfig,
};

/// Default number of sampled inputs for the lower bound.
pub const DEFAULT_SAMPLES: usize = 256;
pub const DEFAULT_SEED: u64 = 0x5EED_D1A3;

#[derive(Clone, Debug, PartialEq)]
pub struct DiamondResult<T: Real> {
    /// Optimal `μ`.
    pub value: T,
    /// Optimal `Z`.
    pub witness_z: Hermitian<T>,
    /// Best state-sampled value of `½‖(Φ⊗id)(ψ)‖₁`.
    pub lower_bound: T,
    pub status: SolveStatus,
    pub dual_value: T,
    pub certificate: CertificateReport<T>,
}

/// `min μ` subject to `Z ⪰ 0`, `Z ⪰ J`, `μI ⪰ Tr_out Z`.
///
/// For maps with `Tr_out J = 0` (differences of trace-preserving maps)
/// this is `½‖Φ‖◊`.
pub fn half_diamond_distance<T: Real>(j: &ChoiOperator<T>) -> Result<DiamondResult<T>> {
    half_diamond_distance_with(j, &SolverConfig::default(), DEFAULT_SAMPLES, DEFAULT_SEED)
}

pub fn half_diamond_distance_with<T: Real>(
    j: &ChoiOperator<T>,
    cfg: &SolverConfig<T>,
    samples: usize,
    seed: u64,
) -> Result<DiamondResult<T>> {
    let (p, _, z) = diamond_problem(j)?;
    let sol = solve(&p, cfg)?;
    let certificate = check_certificate(&p, &sol, T::lit(1e-6));
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver(format!(
            "diamond norm SDP ended with status {}",
            sol.status
        )));
    }
    Ok(DiamondResult {
        value: sol.primal_objective,
        witness_z: sol.x[z.index()].clone(),
        lower_bound: lower_bound_by_states(j, samples, seed)?,
        status: sol.status,
        dual_value: sol.dual_objective,
        certificate,
    })
}

/// The diamond-norm SDP of `j`, with the handles of `μ` and `Z`.
pub fn diamond_problem<T: Real>(j: &ChoiOperator<T>) -> Result<(SdpProblem<T>, Block, Block)> {
    let din = j.in_dim();
    let dout = j.out_dim();
    let n = din * dout;
    let layout = SubsystemDims::new(vec![din, dout])?;
    let mut b = ProblemBuilder::new();
    let mu = b.scalar("mu");
    let z = b.psd("Z", n);
    b.minimize_scalar(mu, T::one())?;
    b.matrix_ge(&[MapTerm::block(z, n, T::one())], j.op())?;
    b.matrix_ge(
        &[
            MapTerm::scalar(mu, Hermitian::identity(din)),
            MapTerm::partial_trace(z, &layout, &[1], -T::one()),
        ],
        &Hermitian::zeros(din),
    )?;
    Ok((b.build()?, mu, z))
}

/// `½‖(Φ⊗id)(ψ)‖₁` for the input whose coefficient matrix is `coef`
/// (`ψ = Σ coef_ia |i⟩|a⟩`, system first).
pub fn state_value<T: Real>(j: &ChoiOperator<T>, coef: &Matrix<T>) -> Result<T> {
    let din = j.in_dim();
    if coef.rows() != din {
        return Err(Error::DimensionMismatch {
            expected: din,
            found: coef.rows(),
        });
    }
    // (Cᵀ ⊗ I) J (Cᵀ ⊗ I)† is the output on ancilla ⊗ out
    let k = coef.transpose().kron(&Matrix::identity(j.out_dim()));
    let out = Hermitian::project(&k.matmul(j.op().matrix()).matmul(&k.adjoint()));
    Ok(out.trace_norm()? * T::lit(0.5))
}

/// Largest value of [`state_value`] over the maximally entangled input and
/// `samples` pure inputs drawn as columns of seeded Haar unitaries.
pub fn lower_bound_by_states<T: Real>(j: &ChoiOperator<T>, samples: usize, seed: u64) -> Result<T> {
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let d = j.in_dim();
    let norm = T::one() / T::of(d).sqrt();
    let mut best = state_value(j, &Matrix::identity(d).scale(norm))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drawn = 0;
    while drawn < samples {
        let u = haar_unitary::<T>(d * d, &mut rng);
        for col in 0..d * d {
            if drawn == samples {
                break;
            }
            let cm = Matrix::from_fn(d, d, |i, a| u[(i * d + a, col)]);
            best = best.max(state_value(j, &cm)?);
            drawn += 1;
        }
    }
    Ok(best)
}

/// Replacement channel `ρ ↦ Tr[ρ] I/d` minus the identity: the map
/// achieving the largest error of a single qudit output.
pub fn identity_minus_replacement<T: Real>(d: usize) -> ChoiOperator<T> {
    let g = crate::channels::gamma_operator::<T>(d);
    let r = Hermitian::identity(d * d).scale(T::one() / T::of(d));
    ChoiOperator::single(g.sub(&r), d).expect("d >= 2")
}
