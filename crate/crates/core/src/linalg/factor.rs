use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{c, cr, Real, C};

/// Lower Cholesky factor `L` with `A = L L†`. Fails on a non-positive pivot.
pub fn cholesky<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let djj = d.sqrt();
        l[(j, j)] = cr(djj);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix.
pub fn lower_triangular_inverse<T: Real>(l: &Matrix<T>) -> Result<Matrix<T>> {
    let n = l.rows();
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        let ljj = l[(j, j)];
        if ljj.is_zero() {
            return Err(Error::NotPositiveDefinite);
        }
        inv[(j, j)] = C::new(T::one(), T::zero()) / ljj;
        for i in j + 1..n {
            let mut s = C::<T>::zero();
            for k in j..i {
                s += l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / l[(i, i)];
        }
    }
    Ok(inv)
}

/// Haar-distributed unitary from the QR decomposition of a complex Ginibre
/// matrix, with the phases of `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary<T: Real>(n: usize, rng: &mut impl Rng) -> Matrix<T> {
    let half = T::lit(0.5).sqrt();
    let mut g = Matrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(T::lit(re) * half, T::lit(im) * half)
    });
    // modified Gram-Schmidt on columns; the normalisation is real positive,
    // which fixes the phase convention of R's diagonal
    for j in 0..n {
        for k in 0..j {
            let mut proj = C::<T>::zero();
            for i in 0..n {
                proj += g[(i, k)].conj() * g[(i, j)];
            }
            for i in 0..n {
                let gik = g[(i, k)];
                g[(i, j)] -= gik * proj;
            }
        }
        let norm = (0..n).map(|i| g[(i, j)].norm_sqr()).sum::<T>().sqrt();
        for i in 0..n {
            g[(i, j)] /= norm;
        }
    }
    g
}

/// Uniformly random unit vector in `C^n`.
pub fn random_pure_state<T: Real>(n: usize, rng: &mut impl Rng) -> Vec<C<T>> {
    let mut v: Vec<C<T>> = (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            c(T::lit(re), T::lit(im))
        })
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cholesky_reconstructs() {
        let b = Matrix::from_fn(4, 4, |i, j| c((i + 1) as f64 * 0.3, j as f64 * 0.1 - 0.2));
        let a = &b.matmul(&b.adjoint()) + &Matrix::identity(4);
        let l = cholesky(&a).unwrap();
        assert!((&l.matmul(&l.adjoint()) - &a).max_abs() < 1e-13);
        let li = lower_triangular_inverse(&l).unwrap();
        assert!((&li.matmul(&l) - &Matrix::identity(4)).max_abs() < 1e-13);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::<f64>::from_real_diag(&[1.0, -1.0]);
        assert_eq!(cholesky(&a), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn haar_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary::<f64>(6, &mut rng);
        assert!((&u.adjoint().matmul(&u) - &Matrix::identity(6)).max_abs() < 1e-12);
        let v = random_pure_state::<f64>(5, &mut rng);
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-14);
    }
}
