use crate::error::{Error, Result};
use crate::linalg::{partial_trace_matrix, partial_transpose_matrix, Hermitian, SubsystemDims};
use crate::scalar::Real;

/// Operator tagged with named tensor factors, used as a link-product operand.
#[derive(Clone, Debug, PartialEq)]
pub struct Labeled<T: Real> {
    pub op: Hermitian<T>,
    pub systems: Vec<(String, usize)>,
}

impl<T: Real> Labeled<T> {
    pub fn new(op: Hermitian<T>, systems: &[(&str, usize)]) -> Result<Self> {
        let total: usize = systems.iter().map(|s| s.1).product();
        if total != op.dim() {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: op.dim(),
            });
        }
        for (i, (name, _)) in systems.iter().enumerate() {
            if systems[..i].iter().any(|(n, _)| n == name) {
                return Err(Error::Layout(format!("system label {name} repeated")));
            }
        }
        Ok(Self {
            op,
            systems: systems.iter().map(|&(n, d)| (n.to_string(), d)).collect(),
        })
    }

    fn layout(&self) -> Result<SubsystemDims> {
        SubsystemDims::new(self.systems.iter().map(|s| s.1).collect())
    }

    fn position(&self, name: &str) -> Option<usize> {
        self.systems.iter().position(|(n, _)| n == name)
    }

    /// Reorders factors to follow `names`.
    fn reorder(&self, names: &[&str]) -> Result<Hermitian<T>> {
        let perm: Vec<usize> = names.iter().map(|n| self.position(n).expect("label present")).collect();
        self.op.permute(&self.layout()?, &perm)
    }
}

/// `a ⋆ b = Tr_X[a^{T_X} b]`, where `X` are the factors whose labels appear in
/// both operands. The result carries the unshared factors of `a` followed by
/// those of `b`.
pub fn link_product<T: Real>(a: &Labeled<T>, b: &Labeled<T>) -> Result<Labeled<T>> {
    let shared: Vec<&str> = a
        .systems
        .iter()
        .filter(|(n, _)| b.position(n).is_some())
        .map(|(n, _)| n.as_str())
        .collect();
    for name in &shared {
        let da = a.systems[a.position(name).unwrap()].1;
        let db = b.systems[b.position(name).unwrap()].1;
        if da != db {
            return Err(Error::Layout(format!(
                "system {name} has dimension {da} in one operand and {db} in the other"
            )));
        }
    }
    let a_rest: Vec<&(String, usize)> = a
        .systems
        .iter()
        .filter(|(n, _)| !shared.contains(&n.as_str()))
        .collect();
    let b_rest: Vec<&(String, usize)> = b
        .systems
        .iter()
        .filter(|(n, _)| !shared.contains(&n.as_str()))
        .collect();

    let a_order: Vec<&str> = a_rest
        .iter()
        .map(|s| s.0.as_str())
        .chain(shared.iter().copied())
        .collect();
    let b_order: Vec<&str> = shared
        .iter()
        .copied()
        .chain(b_rest.iter().map(|s| s.0.as_str()))
        .collect();
    let a_sorted = a.reorder(&a_order)?;
    let b_sorted = b.reorder(&b_order)?;

    let dim_of = |v: &[&(String, usize)]| v.iter().map(|s| s.1).product::<usize>();
    let (ra, rb) = (dim_of(&a_rest), dim_of(&b_rest));
    let x_dims: Vec<usize> = shared.iter().map(|n| a.systems[a.position(n).unwrap()].1).collect();

    // partial transpose of a on every shared factor
    let mut a_pt = a_sorted.into_matrix();
    let a_layout: Vec<usize> = a_rest.iter().map(|s| s.1).chain(x_dims.iter().copied()).collect();
    if !a_layout.is_empty() {
        let l = SubsystemDims::new(a_layout)?;
        for k in a_rest.len()..l.len() {
            a_pt = partial_transpose_matrix(&a_pt, &l, k)?;
        }
    }

    let a_full = a_pt.kron(&Hermitian::<T>::identity(rb).into_matrix());
    let b_full = Hermitian::<T>::identity(ra).into_matrix().kron(b_sorted.matrix());
    let prod = a_full.matmul(&b_full);

    let full_dims: Vec<usize> = a_rest
        .iter()
        .map(|s| s.1)
        .chain(x_dims.iter().copied())
        .chain(b_rest.iter().map(|s| s.1))
        .collect();
    let traced: Vec<usize> = (a_rest.len()..a_rest.len() + shared.len()).collect();
    let reduced = if full_dims.is_empty() {
        prod
    } else {
        partial_trace_matrix(&prod, &SubsystemDims::new(full_dims)?, &traced)?
    };
    let systems: Vec<(String, usize)> = a_rest.iter().chain(b_rest.iter()).map(|s| (*s).clone()).collect();
    Ok(Labeled {
        op: Hermitian::project(&reduced),
        systems,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{apply_choi_to, depolarizing_choi, gamma_operator, ChoiOperator, DepolarizingParam};
    use crate::linalg::{haar_unitary, Matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_channel(seed: u64) -> ChoiOperator<f64> {
        // unitary conjugation after partial depolarizing: a generic qubit channel
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = haar_unitary::<f64>(2, &mut rng);
        let v = haar_unitary::<f64>(2, &mut rng);
        depolarizing_choi(DepolarizingParam(0.1 + 0.1 * seed as f64), 2).conjugate(&u, &v)
    }

    #[test]
    fn identity_after_identity() {
        let g = gamma_operator::<f64>(2);
        let a = Labeled::new(g.clone(), &[("A", 2), ("B", 2)]).unwrap();
        let b = Labeled::new(g.clone(), &[("B", 2), ("C", 2)]).unwrap();
        let r = link_product(&b, &a).unwrap();
        let names: Vec<&str> = r.systems.iter().map(|s| s.0.as_str()).collect();
        assert_eq!(names, ["C", "A"]);
        let r = link_product(&a, &b).unwrap();
        assert!((r.op.matrix() - g.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn identity_operator_link_is_partial_trace() {
        // I_{B1} ⋆ J = Tr_{B1}[J]
        let j = crate::channels::canonical_broadcast_choi::<f64>(2, 0.3).unwrap();
        let lj = Labeled::new(j.op().clone(), &[("B", 2), ("B1", 2), ("B2", 2)]).unwrap();
        let id = Labeled::new(Hermitian::identity(2), &[("B1", 2)]).unwrap();
        let r = link_product(&id, &lj).unwrap();
        let pt = j.op().partial_trace(&j.layout(), &[1]).unwrap();
        assert!((r.op.matrix() - pt.matrix()).max_abs() < 1e-14);
    }

    #[test]
    fn composition_of_random_channels() {
        let e = random_channel(1);
        let f = random_channel(2);
        let le = Labeled::new(e.op().clone(), &[("A", 2), ("B", 2)]).unwrap();
        let lf = Labeled::new(f.op().clone(), &[("B", 2), ("C", 2)]).unwrap();
        let linked = link_product(&lf, &le).unwrap();
        let linked = linked
            .op
            .permute(&SubsystemDims::uniform(2, 2).unwrap(), &[1, 0])
            .unwrap();

        // oracle: rebuild the Choi of F∘E from its action on matrix units
        let mut oracle = Matrix::<f64>::zeros(4, 4);
        for i in 0..2 {
            for k in 0..2 {
                let mut unit = Matrix::zeros(2, 2);
                unit[(i, k)] = crate::scalar::c(1.0, 0.0);
                // apply on the Hermitian pieces of the unit
                let herm = Hermitian::project(&unit);
                let anti = Hermitian::project(&unit.scale_c(crate::scalar::c(0.0, -1.0)));
                let fe = |x: &Hermitian<f64>| apply_choi_to(&f, &apply_choi_to(&e, x).unwrap()).unwrap();
                let img = fe(&herm).into_matrix();
                let img_anti = fe(&anti).into_matrix();
                let img = &img + &img_anti.scale_c(crate::scalar::c(0.0, 1.0));
                for a in 0..2 {
                    for b in 0..2 {
                        oracle[(i * 2 + a, k * 2 + b)] = img[(a, b)];
                    }
                }
            }
        }
        assert!((linked.matrix() - &oracle).max_abs() < 1e-12);
    }

    #[test]
    fn incompatible_dimensions() {
        let a = Labeled::new(Hermitian::<f64>::identity(4), &[("A", 2), ("X", 2)]).unwrap();
        let b = Labeled::new(Hermitian::<f64>::identity(6), &[("X", 3), ("C", 2)]).unwrap();
        assert!(matches!(link_product(&a, &b), Err(Error::Layout(_))));
        assert!(Labeled::new(Hermitian::<f64>::identity(4), &[("A", 2), ("A", 2)]).is_err());
    }
}
