//! Choi-operator representation of Hermitian-preserving maps.
//!
//! A map `E: B → B_out` is stored as `J = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)` with the
//! input factor first and the output factors after it in order. For a
//! broadcasting map the layout is `(B, B1, B2)`.

mod broadcast;
mod link;
mod twirl;

pub use broadcast::{
    canonical_broadcast_choi, check_structural_conditions, is_broadcasting_choi, BroadcastCheck,
    BroadcastDecomposition, Condition, StructureReport, STRUCTURE_TOL,
};
pub use link::{link_product, Labeled};
pub use twirl::isotropic_twirl;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{haar_unitary, partial_trace_matrix, Density, Hermitian, Matrix, SubsystemDims};
use crate::scalar::{c, Real, C};

/// One of the two receivers of a broadcasting map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Receiver {
    First,
    Second,
}

impl Receiver {
    /// Position of this receiver's factor inside a `(B, B1, B2)` Choi layout.
    pub fn factor(self) -> usize {
        match self {
            Receiver::First => 1,
            Receiver::Second => 2,
        }
    }

    pub fn other(self) -> Receiver {
        match self {
            Receiver::First => Receiver::Second,
            Receiver::Second => Receiver::First,
        }
    }
}

/// Choi operator of a Hermitian-preserving map from a `in_dim`-dimensional
/// input to the tensor product described by `out_layout`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiOperator<T: Real> {
    op: Hermitian<T>,
    in_dim: usize,
    out_layout: SubsystemDims,
}

impl<T: Real> ChoiOperator<T> {
    pub fn new(op: Hermitian<T>, in_dim: usize, out_layout: SubsystemDims) -> Result<Self> {
        if in_dim < 2 {
            return Err(Error::Layout(format!("input dimension {in_dim} < 2")));
        }
        let expected = in_dim * out_layout.total();
        if op.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: op.dim(),
            });
        }
        Ok(Self { op, in_dim, out_layout })
    }

    /// Choi operator of a `d → d⊗d` map.
    pub fn broadcast(op: Hermitian<T>, d: usize) -> Result<Self> {
        Self::new(op, d, SubsystemDims::uniform(d, 2)?)
    }

    /// Choi operator of a `d → d` map.
    pub fn single(op: Hermitian<T>, d: usize) -> Result<Self> {
        Self::new(op, d, SubsystemDims::uniform(d, 1)?)
    }

    /// Builds the Choi operator from the action of a linear map on the
    /// matrix units `|i⟩⟨j|`.
    pub fn from_map(in_dim: usize, out_layout: SubsystemDims, map: impl Fn(&Matrix<T>) -> Matrix<T>) -> Result<Self> {
        let dout = out_layout.total();
        let mut j = Matrix::zeros(in_dim * dout, in_dim * dout);
        for i in 0..in_dim {
            for k in 0..in_dim {
                let mut unit = Matrix::zeros(in_dim, in_dim);
                unit[(i, k)] = c(T::one(), T::zero());
                let img = map(&unit);
                if img.rows() != dout || img.cols() != dout {
                    return Err(Error::DimensionMismatch {
                        expected: dout,
                        found: img.rows(),
                    });
                }
                for a in 0..dout {
                    for b in 0..dout {
                        j[(i * dout + a, k * dout + b)] = img[(a, b)];
                    }
                }
            }
        }
        Self::new(Hermitian::new(j)?, in_dim, out_layout)
    }

    pub fn op(&self) -> &Hermitian<T> {
        &self.op
    }

    pub fn into_op(self) -> Hermitian<T> {
        self.op
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_layout(&self) -> &SubsystemDims {
        &self.out_layout
    }

    pub fn out_dim(&self) -> usize {
        self.out_layout.total()
    }

    /// Full layout `(B, outputs...)`.
    pub fn layout(&self) -> SubsystemDims {
        let mut dims = vec![self.in_dim];
        dims.extend_from_slice(self.out_layout.dims());
        SubsystemDims::new(dims).expect("validated factors")
    }

    /// `Tr_out[J]`, an operator on the input.
    pub fn output_trace(&self) -> Hermitian<T> {
        let all: Vec<usize> = (1..=self.out_layout.len()).collect();
        self.op.partial_trace(&self.layout(), &all).expect("consistent layout")
    }

    /// Returns `w` when `Tr_out[J] = w·I` within `tol` (Frobenius).
    pub fn trace_weight(&self, tol: T) -> Option<T> {
        let marg = self.output_trace();
        let w = marg.trace() / T::of(self.in_dim);
        let dev = marg.sub(&Hermitian::identity(self.in_dim).scale(w)).frobenius_norm();
        (dev <= tol).then_some(w)
    }

    pub fn is_trace_preserving(&self, tol: T) -> bool {
        self.trace_weight(tol).is_some_and(|w| (w - T::one()).abs() <= tol)
    }

    pub fn is_completely_positive(&self, tol: T) -> Result<bool> {
        Ok(self.op.min_eigenvalue()? >= -tol)
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            op: self.op.scale(s),
            in_dim: self.in_dim,
            out_layout: self.out_layout.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            op: self.op.sub(&other.op),
            in_dim: self.in_dim,
            out_layout: self.out_layout.clone(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            op: self.op.add(&other.op),
            in_dim: self.in_dim,
            out_layout: self.out_layout.clone(),
        })
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.in_dim != other.in_dim || self.out_layout != other.out_layout {
            return Err(Error::Layout("Choi operators act on different spaces".into()));
        }
        Ok(())
    }

    /// Choi operator of `ρ ↦ V E(U ρ U†) V†`.
    pub fn conjugate(&self, input: &Matrix<T>, output: &Matrix<T>) -> Self {
        let w = input.transpose().kron(output);
        Self {
            op: self.op.conjugate_by(&w),
            in_dim: self.in_dim,
            out_layout: self.out_layout.clone(),
        }
    }
}

/// `|Γ⟩⟨Γ|` with `|Γ⟩ = Σ_i |ii⟩`: rank one, single nonzero eigenvalue `d`.
pub fn gamma_operator<T: Real>(d: usize) -> Hermitian<T> {
    let mut v = vec![C::<T>::zero(); d * d];
    for i in 0..d {
        v[i * d + i] = c(T::one(), T::zero());
    }
    Hermitian::outer(&v)
}

/// Choi operator of the identity channel on `C^d`.
pub fn identity_choi<T: Real>(d: usize) -> ChoiOperator<T> {
    ChoiOperator::single(gamma_operator(d), d).expect("d >= 2")
}

/// Depolarizing parameter; `0` is the identity channel, `1` the replacement
/// channel `ρ ↦ Tr[ρ] I/d`. Negative values give HPTP but non-CP maps.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct DepolarizingParam<T: Real>(pub T);

impl<T: Real> DepolarizingParam<T> {
    /// Upper end of the completely positive range, `d²/(d²−1)`.
    pub fn cp_limit(d: usize) -> T {
        let d2 = T::of(d * d);
        d2 / (d2 - T::one())
    }

    pub fn is_cp(self, d: usize) -> bool {
        self.0 >= T::zero() && self.0 <= Self::cp_limit(d)
    }

    /// Parameter reaching half-diamond distance `delta` from the identity.
    pub fn from_error(delta: T, d: usize) -> Self {
        Self(delta * Self::cp_limit(d))
    }

    /// Half-diamond distance from the identity, `|t|(d²−1)/d²`.
    pub fn error(self, d: usize) -> T {
        self.0.abs() / Self::cp_limit(d)
    }
}

/// `Λ^t = (1−t)Γ + t·I/d`, trace preserving for every `t`.
pub fn depolarizing_choi<T: Real>(t: DepolarizingParam<T>, d: usize) -> ChoiOperator<T> {
    let op = gamma_operator::<T>(d)
        .scale(T::one() - t.0)
        .add_scaled(t.0 / T::of(d), &Hermitian::identity(d * d));
    ChoiOperator::single(op, d).expect("d >= 2")
}

/// `E(ρ) = Tr_B[(ρᵀ ⊗ I) J]`.
pub fn apply_choi<T: Real>(j: &ChoiOperator<T>, rho: &Density<T>) -> Result<Hermitian<T>> {
    apply_choi_to(j, rho.op())
}

/// Action of the map on an arbitrary Hermitian input.
pub fn apply_choi_to<T: Real>(j: &ChoiOperator<T>, x: &Hermitian<T>) -> Result<Hermitian<T>> {
    let din = j.in_dim();
    if x.dim() != din {
        return Err(Error::DimensionMismatch {
            expected: din,
            found: x.dim(),
        });
    }
    let dout = j.out_dim();
    let jm = j.op().matrix();
    let xm = x.matrix();
    let mut out = Matrix::zeros(dout, dout);
    for a in 0..din {
        for b in 0..din {
            let w = xm[(a, b)];
            if w.is_zero() {
                continue;
            }
            for p in 0..dout {
                for q in 0..dout {
                    out[(p, q)] += w * jm[(a * dout + p, b * dout + q)];
                }
            }
        }
    }
    Ok(Hermitian::project(&out))
}

/// Random channel `ρ ↦ Tr_env[V ρ V†]` with `V` the first `d_in` columns of a
/// Haar unitary on `C^{d_out} ⊗ C^{env}`.
pub fn random_channel<T: Real>(
    d_in: usize,
    d_out: usize,
    env: usize,
    rng: &mut impl rand::Rng,
) -> Result<ChoiOperator<T>> {
    if d_in > d_out * env {
        return Err(Error::InvalidArgument(format!(
            "no isometry from {d_in} into {d_out}x{env}"
        )));
    }
    let u = haar_unitary::<T>(d_out * env, rng);
    let v = Matrix::from_fn(d_out * env, d_in, |i, j| u[(i, j)]);
    let vh = v.adjoint();
    let big = SubsystemDims::new(if env > 1 { vec![d_out, env] } else { vec![d_out] })?;
    ChoiOperator::from_map(d_in, SubsystemDims::uniform(d_out, 1)?, |x| {
        let y = v.matmul(x).matmul(&vh);
        if env > 1 {
            partial_trace_matrix(&y, &big, &[1]).expect("consistent layout")
        } else {
            y
        }
    })
}

/// Choi operator of `Tr_{drop} ∘ E` for a two-output map, on `B ⊗ B_keep`.
pub fn marginal_choi<T: Real>(j: &ChoiOperator<T>, drop: Receiver) -> Result<ChoiOperator<T>> {
    if j.out_layout().len() != 2 {
        return Err(Error::Layout(format!(
            "marginal needs two output factors, found {}",
            j.out_layout().len()
        )));
    }
    let kept = j.out_layout().dims()[drop.other().factor() - 1];
    let op = j.op().partial_trace(&j.layout(), &[drop.factor()])?;
    ChoiOperator::new(op, j.in_dim(), SubsystemDims::new(vec![kept])?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::psd_check;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn qubit_state(seed: u64) -> Density<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = haar_unitary::<f64>(2, &mut rng);
        let mixed = Hermitian::from_real_diag(&[0.8, 0.2]).conjugate_by(&u);
        Density::new(mixed).unwrap()
    }

    #[test]
    fn gamma_examples() {
        let g = gamma_operator::<f64>(2);
        for i in 0..4 {
            for j in 0..4 {
                let want = if [0, 3].contains(&i) && [0, 3].contains(&j) {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(g.matrix()[(i, j)], c(want, 0.0));
            }
        }
        assert!((gamma_operator::<f64>(3).trace() - 3.0).abs() < 1e-15);
        let l = SubsystemDims::uniform(3, 2).unwrap();
        for k in 0..2 {
            let m = gamma_operator::<f64>(3).partial_trace(&l, &[k]).unwrap();
            assert_eq!(m, Hermitian::identity(3));
        }
        let spec = g.eig().unwrap();
        assert!((spec.max() - 2.0).abs() < 1e-14);
        assert!(spec.eigenvalues[..3].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn depolarizing_examples() {
        let d = 2;
        assert_eq!(depolarizing_choi(DepolarizingParam(0.0), d).op(), &gamma_operator(d));
        let r = depolarizing_choi(DepolarizingParam(1.0), d);
        assert!((r.op().matrix() - Hermitian::<f64>::identity(4).scale(0.5).matrix()).max_abs() < 1e-15);
        let ev = depolarizing_choi(DepolarizingParam(0.5), d)
            .op()
            .eig()
            .unwrap()
            .eigenvalues;
        // (1−t)d + t/d on |Γ⟩ and t/d elsewhere
        for (got, want) in ev.iter().zip([0.25f64, 0.25, 0.25, 1.25]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn depolarizing_cp_range() {
        // t = 1.2 is CP at d = 2 (limit 4/3); eigenvalues (1−t)d + t/d = 0.2 and t/d = 0.6
        let j = depolarizing_choi(DepolarizingParam(1.2), 2);
        let (ok, lo) = psd_check(j.op(), 1e-9).unwrap();
        assert!(ok);
        assert!((lo - 0.2f64).abs() < 1e-14);
        assert!(DepolarizingParam(1.2).is_cp(2));
        assert!(!DepolarizingParam(1.4).is_cp(2));
        assert!(!depolarizing_choi(DepolarizingParam(1.4), 2)
            .is_completely_positive(1e-9)
            .unwrap());
        assert!(!depolarizing_choi(DepolarizingParam(-0.1), 2)
            .is_completely_positive(1e-9)
            .unwrap());
        for t in [-2.0, -0.3, 0.0, 0.7, 3.0] {
            assert!(depolarizing_choi(DepolarizingParam(t), 3).is_trace_preserving(1e-12));
        }
    }

    #[test]
    fn apply_identity_replacement_and_depolarizing() {
        let rho = qubit_state(11);
        let out = apply_choi(&identity_choi(2), &rho).unwrap();
        assert!((out.matrix() - rho.op().matrix()).max_abs() < 1e-15);
        let out = apply_choi(&depolarizing_choi(DepolarizingParam(1.0), 2), &rho).unwrap();
        assert!((out.matrix() - Hermitian::<f64>::identity(2).scale(0.5).matrix()).max_abs() < 1e-15);
        for seed in 0..8 {
            let rho = qubit_state(seed);
            let t = 0.3;
            let got = apply_choi(&depolarizing_choi(DepolarizingParam(t), 2), &rho).unwrap();
            let want = rho.op().scale(1.0 - t).add_scaled(t / 2.0, &Hermitian::identity(2));
            assert!((got.matrix() - want.matrix()).max_abs() < 1e-10);
            assert!((got.trace() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn apply_rejects_mismatch() {
        let rho = Density::<f64>::maximally_mixed(3);
        assert!(matches!(
            apply_choi(&identity_choi(2), &rho),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn from_map_roundtrip() {
        let d = 3;
        let j = ChoiOperator::<f64>::from_map(d, SubsystemDims::uniform(d, 1).unwrap(), |x| x.clone()).unwrap();
        assert_eq!(j.op(), &gamma_operator(d));
    }

    #[test]
    fn product_marginal_is_weight_scaled() {
        // J = J_A ⊗ σ with σ on the second output: Tr_{B2} J = Tr[σ] J_A
        let d = 2;
        let ja = depolarizing_choi(DepolarizingParam(0.4), d);
        let sigma = Hermitian::from_real_diag(&[0.9, 0.6]);
        let j = ChoiOperator::broadcast(ja.op().kron(&sigma), d).unwrap();
        let m = marginal_choi(&j, Receiver::Second).unwrap();
        // oracle: direct partial trace
        let l = SubsystemDims::uniform(2, 3).unwrap();
        let oracle = j.op().partial_trace(&l, &[2]).unwrap();
        assert!((m.op().matrix() - oracle.matrix()).max_abs() < 1e-15);
        assert!((m.op().matrix() - ja.op().scale(1.5).matrix()).max_abs() < 1e-14);
        assert!(marginal_choi(&ja, Receiver::First).is_err());
    }

    #[test]
    fn random_channels_are_cptp() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (din, dout, env) in [(2, 2, 1), (2, 2, 3), (3, 2, 2)] {
            let j = random_channel::<f64>(din, dout, env, &mut rng).unwrap();
            assert!(j.is_trace_preserving(1e-12));
            assert!(j.is_completely_positive(1e-12).unwrap());
        }
        assert!(random_channel::<f64>(3, 2, 1, &mut rng).is_err());
    }

    #[test]
    fn conjugation_matches_direct_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = haar_unitary::<f64>(2, &mut rng);
        let v = haar_unitary::<f64>(2, &mut rng);
        let j = depolarizing_choi(DepolarizingParam(0.35), 2)
            .sub(&identity_choi(2))
            .unwrap();
        let jc = j.conjugate(&u, &v);
        let rho = qubit_state(3);
        let direct = apply_choi(&j, &Density::new(rho.op().conjugate_by(&u)).unwrap())
            .unwrap()
            .conjugate_by(&v);
        let via = apply_choi(&jc, &rho).unwrap();
        assert!((direct.matrix() - via.matrix()).max_abs() < 1e-12);
    }
}
