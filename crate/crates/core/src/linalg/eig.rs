//! Dense Hermitian eigendecomposition.
//!
//! The matrix is reduced to Hermitian tridiagonal form with complex
//! Householder reflections, the off-diagonal phases are rotated away with a
//! diagonal unitary, and the resulting real symmetric tridiagonal matrix is
//! diagonalized with the implicit-shift QL iteration.

use num_traits::Zero;

use super::hermitian::Hermitian;
use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{cr, Real, C};

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Spectrum<T: Real> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Matrix<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn min(&self) -> T {
        self.eigenvalues.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max(&self) -> T {
        self.eigenvalues.last().copied().unwrap_or_else(T::zero)
    }

    /// Schatten-1 norm `Σ|λ|`.
    pub fn trace_norm(&self) -> T {
        self.eigenvalues.iter().map(|v| v.abs()).sum()
    }

    /// Operator norm `max|λ|`.
    pub fn operator_norm(&self) -> T {
        self.min().abs().max(self.max().abs())
    }

    /// `V · diag(f(λ)) · V†`
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        let v = &self.eigenvectors;
        let n = v.rows();
        let weights: Vec<T> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = C::zero();
                for (k, &w) in weights.iter().enumerate() {
                    if w != T::zero() {
                        acc += v[(i, k)] * v[(j, k)].conj() * w;
                    }
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Matrix<T> {
        self.reconstruct_with(|l| l)
    }
}

/// Full eigendecomposition of a Hermitian operator.
pub fn eig_hermitian<T: Real>(h: &Hermitian<T>) -> Result<Spectrum<T>> {
    eig_matrix(h.matrix())
}

/// Eigendecomposition of the Hermitian part of a square matrix.
pub(crate) fn eig_matrix<T: Real>(m: &Matrix<T>) -> Result<Spectrum<T>> {
    let n = m.rows();
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: vec![],
            eigenvectors: Matrix::zeros(0, 0),
        });
    }
    if n == 1 {
        return Ok(Spectrum {
            eigenvalues: vec![m[(0, 0)].re],
            eigenvectors: Matrix::identity(1),
        });
    }

    let mut a = m.hermitian_part();
    let mut q = Matrix::<T>::identity(n);
    tridiagonalize(&mut a, &mut q);

    let mut diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut off = vec![T::zero(); n];
    let mut phase = vec![C::<T>::new(T::one(), T::zero()); n];
    for k in 0..n - 1 {
        let e = a[(k + 1, k)];
        let r = e.norm();
        off[k + 1] = r;
        phase[k + 1] = if r > T::zero() { phase[k] * (e / r) } else { phase[k] };
    }

    let mut z = vec![T::zero(); n * n];
    for i in 0..n {
        z[i * n + i] = T::one();
    }
    tql2(&mut diag, &mut off, &mut z, n)?;

    // eigenvectors = Q · diag(phase) · Z
    let mut qp = q;
    for i in 0..n {
        for k in 0..n {
            qp[(i, k)] *= phase[k];
        }
    }
    let mut vecs = Matrix::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            let a_ik = qp[(i, k)];
            if a_ik.is_zero() {
                continue;
            }
            for j in 0..n {
                vecs[(i, j)] += a_ik * z[k * n + j];
            }
        }
    }
    Ok(Spectrum {
        eigenvalues: diag,
        eigenvectors: vecs,
    })
}

/// In-place unitary reduction `a ← Q† a Q` to Hermitian tridiagonal form.
fn tridiagonalize<T: Real>(a: &mut Matrix<T>, q: &mut Matrix<T>) {
    let n = a.rows();
    let two = T::lit(2.0);
    let mut v = vec![C::<T>::zero(); n];
    let mut p = vec![C::<T>::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let xnorm = (k + 1..n)
            .map(|i| a[(i, k)].norm_sqr())
            .fold(T::zero(), |s, x| s + x)
            .sqrt();
        let tail = (k + 2..n).map(|i| a[(i, k)].norm_sqr()).fold(T::zero(), |s, x| s + x);
        if xnorm == T::zero() || tail <= T::epsilon() * T::epsilon() * xnorm * xnorm {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let x0abs = x0.norm();
        let ph = if x0abs > T::zero() { x0 / x0abs } else { cr(T::one()) };
        let alpha = -ph * xnorm;

        v.iter_mut().for_each(|z| *z = C::zero());
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm = (two * xnorm * (xnorm + x0abs)).sqrt();
        for z in v[k + 1..].iter_mut() {
            *z /= vnorm;
        }

        // p = A v, K = v† p, w = p − K v, A ← A − 2 v w† − 2 w v†
        for i in 0..n {
            let mut acc = C::zero();
            for j in k + 1..n {
                acc += a[(i, j)] * v[j];
            }
            p[i] = acc;
        }
        let kk = (k + 1..n)
            .map(|j| (v[j].conj() * p[j]).re)
            .fold(T::zero(), |s, x| s + x);
        for i in 0..n {
            p[i] -= v[i] * kk;
        }
        for i in 0..n {
            let (vi, wi) = (v[i], p[i]);
            for j in 0..n {
                let d = vi * p[j].conj() + wi * v[j].conj();
                if !d.is_zero() {
                    a[(i, j)] -= d * two;
                }
            }
        }
        // Q ← Q (I − 2 v v†)
        for i in 0..n {
            let mut qv = C::<T>::zero();
            for j in k + 1..n {
                qv += q[(i, j)] * v[j];
            }
            if qv.is_zero() {
                continue;
            }
            for j in k + 1..n {
                q[(i, j)] -= qv * v[j].conj() * two;
            }
        }
        // clean the annihilated column/row
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            a[(i, k)] = C::zero();
            a[(k, i)] = C::zero();
        }
    }
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix with diagonal `d`
/// and subdiagonal `e[1..]`. Accumulates rotations into the row-major `z`
/// and sorts ascending.
fn tql2<T: Real>(d: &mut [T], e: &mut [T], z: &mut [T], n: usize) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let cap = 30 * n;
    let mut total_iter = 0usize;
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    let two = T::lit(2.0);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            loop {
                total_iter += 1;
                if total_iter > cap {
                    return Err(Error::NoConvergence(cap));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut cs = T::one();
                let mut c2 = cs;
                let mut c3 = cs;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                let mut i = m;
                while i > l {
                    i -= 1;
                    c3 = c2;
                    c2 = cs;
                    s2 = s;
                    g = cs * e[i];
                    h = cs * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    cs = p / r;
                    p = cs * d[i] - s * g;
                    d[i + 1] = h + s * (cs * g + s * d[i]);
                    for k in 0..n {
                        let zk1 = z[k * n + i + 1];
                        let zk = z[k * n + i];
                        z[k * n + i + 1] = s * zk + cs * zk1;
                        z[k * n + i] = cs * zk - s * zk1;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = cs * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }

    // selection sort, ascending
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for row in 0..n {
                z.swap(row * n + i, row * n + k);
            }
        }
    }
    Ok(())
}

/// Schatten-1 norm of the Hermitian part of `m`.
#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian::Hermitian;
    use crate::scalar::c;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> Matrix<f64> {
        let g = Matrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        g.hermitian_part()
    }

    #[test]
    fn diagonal_input_sorted() {
        let h = Hermitian::<f64>::new(Matrix::from_real_diag(&[3.0, 1.0, 2.0])).unwrap();
        let s = eig_hermitian(&h).unwrap();
        for (got, want) in s.eigenvalues.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn reconstruction_and_residuals_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[2usize, 3, 5, 8, 17, 33, 64] {
            let m = random_hermitian(n, &mut rng);
            let s = eig_matrix(&m).unwrap();
            let fro = m.frobenius_norm();
            let rec = s.reconstruct();
            assert!((&rec - &m).frobenius_norm() <= 1e-10 * fro, "n={n}");
            let v = &s.eigenvectors;
            let vv = v.adjoint().matmul(v);
            assert!((&vv - &Matrix::identity(n)).max_abs() < 1e-10);
            for k in 0..n {
                let col = v.column(k);
                let hv = m.matvec(&col);
                let res: f64 = hv
                    .iter()
                    .zip(&col)
                    .map(|(a, b)| (a - b * s.eigenvalues[k]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res <= 1e-10 * fro);
            }
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn degenerate_spectrum() {
        // I ⊗ diag(1,-1) has a doubly degenerate spectrum
        let m = Matrix::<f64>::identity(3).kron(&Matrix::from_real_diag(&[1.0, -1.0]));
        let s = eig_matrix(&m).unwrap();
        assert_eq!(s.eigenvalues.len(), 6);
        assert!((s.trace_norm() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn single_precision_instantiation() {
        let m = Matrix::<f32>::from_fn(4, 4, |i, j| {
            if i == j {
                c(i as f32, 0.0)
            } else {
                c(0.1, 0.05 * (i as f32 - j as f32))
            }
        });
        let s = eig_matrix(&m).unwrap();
        let rec = s.reconstruct();
        assert!((&rec - &m).frobenius_norm() < 1e-5);
    }
}
