use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vbcast_core::channels::{depolarizing_choi, identity_choi, random_channel, ChoiOperator, DepolarizingParam};
use vbcast_core::diamond::{half_diamond_distance, identity_minus_replacement, lower_bound_by_states};
use vbcast_core::linalg::haar_unitary;

fn channel_difference(d: usize, seed: u64) -> ChoiOperator<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = random_channel::<f64>(d, d, 2, &mut rng).unwrap();
    let f = random_channel::<f64>(d, d, 2, &mut rng).unwrap();
    e.sub(&f).unwrap()
}

fn norm(j: &ChoiOperator<f64>) -> f64 {
    half_diamond_distance(j).unwrap().value
}

#[test]
fn replacement_distance_is_one_minus_inverse_square() {
    for d in [2, 3] {
        let r = half_diamond_distance(&identity_minus_replacement::<f64>(d)).unwrap();
        assert!((r.value - (1.0 - 1.0 / (d * d) as f64)).abs() < 1e-7);
        assert!((r.dual_value - r.value).abs() < 1e-6);
    }
}

#[test]
fn depolarizing_distance_is_linear_in_the_parameter() {
    for d in [2, 3] {
        for t in [-0.2f64, 0.1, 0.6] {
            let j = depolarizing_choi(DepolarizingParam(t), d)
                .sub(&identity_choi(d))
                .unwrap();
            let want = t.abs() * ((d * d - 1) as f64) / (d * d) as f64;
            assert!((norm(&j) - want).abs() < 1e-7, "d={d} t={t}");
        }
    }
}

#[test]
fn orthogonal_unitaries_are_perfectly_distinguishable() {
    // identity vs bit flip: |0⟩ is sent to orthogonal outputs
    let x = vbcast_core::linalg::Matrix::<f64>::from_fn(2, 2, |i, j| {
        num_complex::Complex::new(if i != j { 1.0 } else { 0.0 }, 0.0)
    });
    let id = identity_choi::<f64>(2);
    let flipped = id.conjugate(&vbcast_core::linalg::Matrix::identity(2), &x);
    assert!((norm(&id.sub(&flipped).unwrap()) - 1.0).abs() < 1e-7);
}

#[test]
fn witness_dominates_the_map() {
    let j = channel_difference(2, 11);
    let r = half_diamond_distance(&j).unwrap();
    let slack = r.witness_z.sub(j.op());
    assert!(slack.min_eigenvalue().unwrap() > -1e-6);
    assert!(r.witness_z.min_eigenvalue().unwrap() > -1e-6);
    let reduced = r.witness_z.partial_trace(&j.layout(), &[1]).unwrap();
    assert!(reduced.operator_norm().unwrap() <= r.value + 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn value_is_bracketed(seed in any::<u64>()) {
        let j = channel_difference(2, seed);
        let v = norm(&j);
        prop_assert!(v >= lower_bound_by_states(&j, 64, seed).unwrap() - 1e-6);
        prop_assert!(v <= 1.0 + 1e-6);
        prop_assert!(v >= -1e-9);
    }

    #[test]
    fn absolutely_homogeneous(seed in any::<u64>(), c in prop::sample::select(vec![-2.0, 0.5, 3.0])) {
        let j = channel_difference(2, seed);
        prop_assert!((norm(&j.scale(c)) - c.abs() * norm(&j)).abs() < 1e-6);
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_channel::<f64>(2, 2, 2, &mut rng).unwrap();
        let f = random_channel::<f64>(2, 2, 2, &mut rng).unwrap();
        let g = random_channel::<f64>(2, 2, 2, &mut rng).unwrap();
        let ef = norm(&e.sub(&f).unwrap());
        let fg = norm(&f.sub(&g).unwrap());
        let eg = norm(&e.sub(&g).unwrap());
        prop_assert!(eg <= ef + fg + 1e-6);
    }

    #[test]
    fn unitarily_invariant(seed in any::<u64>()) {
        let j = channel_difference(2, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xFFFF);
        let u = haar_unitary::<f64>(2, &mut rng);
        let v = haar_unitary::<f64>(2, &mut rng);
        prop_assert!((norm(&j.conjugate(&u, &v)) - norm(&j)).abs() < 1e-6);
    }
}
