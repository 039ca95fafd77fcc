use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{gamma_operator, marginal_choi, ChoiOperator, Receiver};
use crate::error::{Error, Result};
use crate::linalg::{haar_unitary, permutation_unitary, Hermitian, Matrix, SubsystemDims};
use crate::scalar::{c, Real};

/// Residual threshold below which a structural condition counts as satisfied.
pub const STRUCTURE_TOL: f64 = 1e-8;

/// Seed of the fixed Haar test set used for the covariance residual.
const COVARIANCE_SEED: u64 = 0x00C0_7A81;
const COVARIANCE_SAMPLES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Condition<T: Real> {
    pub holds: bool,
    pub residual: T,
}

impl<T: Real> Condition<T> {
    fn from_residual(residual: T) -> Self {
        Self {
            holds: residual <= T::lit(STRUCTURE_TOL),
            residual,
        }
    }
}

/// Frobenius distances of the two marginals from `Γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BroadcastCheck<T: Real> {
    pub is_broadcasting: bool,
    pub first_residual: T,
    pub second_residual: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureReport<T: Real> {
    pub broadcasting: Condition<T>,
    pub unitary_covariant: Condition<T>,
    pub permutation_invariant: Condition<T>,
    pub classically_consistent: Condition<T>,
}

fn require_two_outputs<T: Real>(j: &ChoiOperator<T>) -> Result<usize> {
    let d = j.in_dim();
    if j.out_layout().dims() != [d, d] {
        return Err(Error::Layout(format!(
            "expected a {d} -> {d}x{d} broadcasting layout, found outputs {:?}",
            j.out_layout().dims()
        )));
    }
    Ok(d)
}

/// Both marginals equal `Γ` within `tol` in Frobenius norm.
pub fn is_broadcasting_choi<T: Real>(j: &ChoiOperator<T>, tol: T) -> Result<BroadcastCheck<T>> {
    let d = require_two_outputs(j)?;
    let g = gamma_operator::<T>(d);
    let first = marginal_choi(j, Receiver::Second)?.op().sub(&g).frobenius_norm();
    let second = marginal_choi(j, Receiver::First)?.op().sub(&g).frobenius_norm();
    Ok(BroadcastCheck {
        is_broadcasting: first <= tol && second <= tol,
        first_residual: first,
        second_residual: second,
    })
}

/// `Σ_ij |i⟩⟨j| ⊗ |j⟩⟨i|` on `C^d ⊗ C^d`.
pub fn swap<T: Real>(d: usize) -> Matrix<T> {
    let l = SubsystemDims::uniform(d, 2).expect("d >= 2");
    permutation_unitary(&l, &[1, 0])
}

/// Choi operator of `ρ ↦ ½{ρ⊗I, SWAP} + iλ[ρ⊗I, SWAP]`.
pub fn canonical_broadcast_choi<T: Real>(d: usize, lambda: T) -> Result<ChoiOperator<T>> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension {d} < 2")));
    }
    let sw = swap::<T>(d);
    let id = Matrix::<T>::identity(d);
    let half = T::lit(0.5);
    let il = c(T::zero(), lambda);
    ChoiOperator::from_map(d, SubsystemDims::uniform(d, 2)?, |x| {
        let xi = x.kron(&id);
        let ab = xi.matmul(&sw);
        let ba = sw.matmul(&xi);
        let anti = (&ab + &ba).scale(half);
        let comm = (&ab - &ba).scale_c(il);
        &anti + &comm
    })
}

/// Tests the broadcasting property, unitary covariance, output permutation
/// invariance and classical consistency of a two-output map.
///
/// Covariance is checked as invariance of `J` under `Ū ⊗ U ⊗ U` for a fixed
/// set of Haar unitaries plus cyclic-shift and phase unitaries.
pub fn check_structural_conditions<T: Real>(j: &ChoiOperator<T>) -> Result<StructureReport<T>> {
    let d = require_two_outputs(j)?;
    let b = is_broadcasting_choi(j, T::lit(STRUCTURE_TOL))?;
    let broadcasting = Condition::from_residual(b.first_residual.max(b.second_residual));

    let op = j.op();
    let mut cov = T::zero();
    for u in covariance_test_set::<T>(d) {
        let w = u.conj().kron(&u).kron(&u);
        cov = cov.max(op.conjugate_by(&w).sub(op).frobenius_norm());
    }

    let perm = Matrix::<T>::identity(d).kron(&swap(d));
    let perm_res = op.conjugate_by(&perm).sub(op).frobenius_norm();

    // (Δ⊗Δ)∘E∘Δ(|i⟩⟨j|) = δ_ij |ii⟩⟨ii|
    let dout = d * d;
    let jm = op.matrix();
    let mut classical = T::zero();
    for i in 0..d {
        let mut dev = T::zero();
        for p in 0..dout {
            let want = if p == i * d + i { T::one() } else { T::zero() };
            let got = jm[(i * dout + p, i * dout + p)].re;
            dev += (got - want) * (got - want);
        }
        classical = classical.max(dev.sqrt());
    }

    Ok(StructureReport {
        broadcasting,
        unitary_covariant: Condition::from_residual(cov),
        permutation_invariant: Condition::from_residual(perm_res),
        classically_consistent: Condition::from_residual(classical),
    })
}

fn covariance_test_set<T: Real>(d: usize) -> Vec<Matrix<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(COVARIANCE_SEED);
    let mut set: Vec<Matrix<T>> = (0..COVARIANCE_SAMPLES).map(|_| haar_unitary(d, &mut rng)).collect();
    set.push(Matrix::from_fn(d, d, |i, k| {
        if i == (k + 1) % d {
            c(T::one(), T::zero())
        } else {
            c(T::zero(), T::zero())
        }
    }));
    let phases: Vec<T> = (0..d).map(|k| T::lit(0.7 * (k * k) as f64 + 0.3 * k as f64)).collect();
    set.push(Matrix::from_fn(d, d, |i, k| {
        if i == k {
            c(phases[k].cos(), phases[k].sin())
        } else {
            c(T::zero(), T::zero())
        }
    }));
    set
}

/// Quasiprobability decomposition `E = J1 − J2` of an HPTP broadcasting map
/// into completely positive parts with output traces `x·I` and `y·I`,
/// `x − y = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BroadcastDecomposition<T: Real> {
    pub j1: ChoiOperator<T>,
    pub j2: ChoiOperator<T>,
    pub x: T,
    pub y: T,
}

impl<T: Real> BroadcastDecomposition<T> {
    pub fn new(j1: ChoiOperator<T>, j2: ChoiOperator<T>, x: T, y: T) -> Result<Self> {
        if j1.in_dim() != j2.in_dim() || j1.out_layout() != j2.out_layout() {
            return Err(Error::Layout("decomposition parts act on different spaces".into()));
        }
        Ok(Self { j1, j2, x, y })
    }

    /// `x + y`, the sampling scale.
    pub fn nu(&self) -> T {
        self.x + self.y
    }

    /// Probability of sampling the positive part.
    pub fn p_plus(&self) -> T {
        self.x / self.nu()
    }

    pub fn combined(&self) -> ChoiOperator<T> {
        self.j1.sub(&self.j2).expect("same shape")
    }

    /// Largest violation among `x − y = 1`, positivity of both parts and
    /// the output-trace weights.
    pub fn defect(&self) -> Result<T> {
        let mut worst = (self.x - self.y - T::one()).abs();
        worst = worst.max((-self.x).max(T::zero())).max((-self.y).max(T::zero()));
        worst = worst.max((-self.j1.op().min_eigenvalue()?).max(T::zero()));
        worst = worst.max((-self.j2.op().min_eigenvalue()?).max(T::zero()));
        let din = self.j1.in_dim();
        for (part, w) in [(&self.j1, self.x), (&self.j2, self.y)] {
            let dev = part
                .output_trace()
                .sub(&Hermitian::identity(din).scale(w))
                .frobenius_norm();
            worst = worst.max(dev);
        }
        Ok(worst)
    }

    pub fn is_valid(&self, tol: T) -> Result<bool> {
        Ok(self.defect()? <= tol)
    }
}
