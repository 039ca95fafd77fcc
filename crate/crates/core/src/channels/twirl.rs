use super::gamma_operator;
use crate::linalg::Hermitian;
use crate::scalar::Real;

/// Closed-form projection of an operator on `B ⊗ B_i` onto the commutant of
/// `U ⊗ Ū`, i.e. onto `span{Γ, I}`.
///
/// The two isotypic components are `Γ/d` (dimension 1) and `I − Γ/d`
/// (dimension `d² − 1`). Returns the projected operator together with
/// `F = Tr[Γ J]/d`. For a trace-preserving input (`Tr J = d`) the result is
/// `((Fd−1)/(d²−1))·Γ + ((d²−Fd)/(d²−1))·I/d`.
pub fn isotropic_twirl<T: Real>(j: &Hermitian<T>, d: usize) -> (Hermitian<T>, T) {
    assert_eq!(j.dim(), d * d, "twirl expects an operator on a d²-dimensional space");
    let dd = T::of(d);
    let gamma = gamma_operator::<T>(d);
    let omega = gamma.scale(T::one() / dd);
    let overlap = gamma.inner(j);
    let f = overlap / dd;
    let rest = Hermitian::identity(d * d).sub(&omega);
    let rest_weight = (j.trace() - f) / (dd * dd - T::one());
    (omega.scale(f).add_scaled(rest_weight, &rest), f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{depolarizing_choi, DepolarizingParam};
    use crate::linalg::{haar_unitary, Matrix};
    use crate::scalar::c;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_herm(n: usize, seed: u64) -> Hermitian<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Hermitian::project(&Matrix::from_fn(n, n, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        }))
    }

    #[test]
    fn fixed_points() {
        for d in [2, 3] {
            let g = gamma_operator::<f64>(d);
            let (p, f) = isotropic_twirl(&g, d);
            assert!((p.matrix() - g.matrix()).max_abs() < 1e-14);
            assert!((f - d as f64).abs() < 1e-14);
            let mixed = Hermitian::<f64>::identity(d * d).scale(1.0 / d as f64);
            let (p, f) = isotropic_twirl(&mixed, d);
            assert!((p.matrix() - mixed.matrix()).max_abs() < 1e-14);
            assert!((f - 1.0 / d as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn trace_preserving_form() {
        let d = 3;
        let j = depolarizing_choi(DepolarizingParam(0.37), d)
            .op()
            .add(&random_herm(9, 4).scale(0.05))
            .sub(&Hermitian::identity(9).scale(random_herm(9, 4).trace() * 0.05 / 9.0));
        assert!((j.trace() - 3.0).abs() < 1e-12);
        let (p, f) = isotropic_twirl(&j, d);
        let dd = d as f64;
        let want = gamma_operator::<f64>(d)
            .scale((f * dd - 1.0) / (dd * dd - 1.0))
            .add_scaled((dd * dd - f * dd) / (dd * dd - 1.0) / dd, &Hermitian::identity(9));
        assert!((p.matrix() - want.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn idempotent_and_trace_preserving() {
        for seed in 0..10 {
            let j = random_herm(4, seed);
            let (p, _) = isotropic_twirl(&j, 2);
            let (pp, _) = isotropic_twirl(&p, 2);
            assert!((p.matrix() - pp.matrix()).max_abs() < 1e-12);
            assert!((p.trace() - j.trace()).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_is_invariant_under_u_ubar() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (p, _) = isotropic_twirl(&random_herm(9, 1), 3);
        for _ in 0..5 {
            let u = haar_unitary::<f64>(3, &mut rng);
            let w = u.kron(&u.conj());
            let q = p.conjugate_by(&w);
            assert!((q.matrix() - p.matrix()).max_abs() < 1e-12);
        }
    }
}
