use num_traits::Zero;

use crate::linalg::{Hermitian, Matrix};
use crate::scalar::{Real, C};

/// Hermitian coefficient stored as its nonzero entries `(row, col, value)`,
/// both triangles included, sorted by position.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitian<T: Real> {
    dim: usize,
    entries: Vec<(usize, usize, C<T>)>,
}

impl<T: Real> SparseHermitian<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn from_dense(h: &Hermitian<T>) -> Self {
        let n = h.dim();
        let m = h.matrix();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                if !v.is_zero() {
                    entries.push((i, j, v));
                }
            }
        }
        Self { dim: n, entries }
    }

    /// Builds from upper-triangle entries, mirroring the off-diagonal ones.
    /// Diagonal imaginary parts are discarded and duplicates summed.
    pub fn from_upper(dim: usize, upper: impl IntoIterator<Item = (usize, usize, C<T>)>) -> Self {
        let mut entries = Vec::new();
        for (i, j, v) in upper {
            assert!(i < dim && j < dim, "entry ({i}, {j}) outside {dim}x{dim}");
            if i == j {
                entries.push((i, i, C::new(v.re, T::zero())));
            } else {
                let (i, j, v) = if i < j { (i, j, v) } else { (j, i, v.conj()) };
                entries.push((i, j, v));
                entries.push((j, i, v.conj()));
            }
        }
        Self::normalize(dim, entries)
    }

    fn normalize(dim: usize, mut entries: Vec<(usize, usize, C<T>)>) -> Self {
        entries.sort_by_key(|e| (e.0, e.1));
        let mut out: Vec<(usize, usize, C<T>)> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => out.push((i, j, v)),
            }
        }
        out.retain(|e| !e.2.is_zero());
        Self { dim, entries: out }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, C<T>)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&self, s: T) -> Self {
        Self::normalize(self.dim, self.entries.iter().map(|&(i, j, v)| (i, j, v * s)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::normalize(self.dim, self.entries.iter().chain(&other.entries).copied().collect())
    }

    /// `Re Tr[self · x]` for a dense `x`.
    pub fn inner_dense(&self, x: &Matrix<T>) -> T {
        let mut acc = T::zero();
        for &(i, j, a) in &self.entries {
            let b = x[(j, i)];
            acc += a.re * b.re - a.im * b.im;
        }
        acc
    }

    /// `Re Tr[self · other]`.
    pub fn inner(&self, other: &Self) -> T {
        // Tr[AB] = Σ A_ij B_ji = Σ A_ij conj(B_ij) for Hermitian B
        let (a, b) = (&self.entries, &other.entries);
        let (mut p, mut q) = (0, 0);
        let mut acc = T::zero();
        while p < a.len() && q < b.len() {
            let ka = (a[p].0, a[p].1);
            let kb = (b[q].0, b[q].1);
            if ka == kb {
                acc += a[p].2.re * b[q].2.re + a[p].2.im * b[q].2.im;
                p += 1;
                q += 1;
            } else if ka < kb {
                p += 1;
            } else {
                q += 1;
            }
        }
        acc
    }

    /// `x += s · self`.
    pub fn add_to(&self, x: &mut Matrix<T>, s: T) {
        for &(i, j, v) in &self.entries {
            x[(i, j)] += v * s;
        }
    }

    pub fn to_dense(&self) -> Hermitian<T> {
        let mut m = Matrix::zeros(self.dim, self.dim);
        self.add_to(&mut m, T::one());
        Hermitian::project(&m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn inner_products_agree_with_dense() {
        let a = SparseHermitian::<f64>::from_upper(3, [(0, 0, c(1.0, 0.0)), (0, 2, c(0.5, -2.0)), (1, 2, c(0.0, 1.0))]);
        let b = SparseHermitian::from_upper(3, [(2, 2, c(3.0, 0.0)), (0, 2, c(1.5, 0.25)), (0, 1, c(4.0, 0.0))]);
        let (da, db) = (a.to_dense(), b.to_dense());
        assert!((a.inner(&b) - da.inner(&db)).abs() < 1e-14);
        assert!((a.inner_dense(db.matrix()) - da.inner(&db)).abs() < 1e-14);
        assert_eq!(SparseHermitian::from_dense(&da), a);
        assert_eq!(a.nnz(), 5);
    }

    #[test]
    fn duplicates_are_summed() {
        let a = SparseHermitian::<f64>::from_upper(2, [(0, 1, c(1.0, 1.0)), (1, 0, c(1.0, 1.0))]);
        // (1,0,1+i) mirrors to (0,1,1−i); the sum is real
        assert_eq!(a.entries(), &[(0, 1, c(2.0, 0.0)), (1, 0, c(2.0, 0.0))]);
    }
}
