use super::eig::{eig_matrix, Spectrum};
use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Square complex matrix equal to its adjoint.
///
/// Construction absorbs floating asymmetry up to [`Real::hermitian_tol`]
/// (relative to `1 + max|H|`) by symmetrizing and rejects anything larger.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian<T: Real> {
    m: Matrix<T>,
}

impl<T: Real> Hermitian<T> {
    pub fn new(m: Matrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let defect = m.hermitian_defect();
        if defect > T::hermitian_tol() * (T::one() + m.max_abs()) {
            return Err(Error::NotHermitian {
                asymmetry: defect.as_f64(),
            });
        }
        Ok(Self { m: m.hermitian_part() })
    }

    /// Takes the Hermitian part of `m` regardless of its asymmetry.
    pub fn project(m: &Matrix<T>) -> Self {
        Self { m: m.hermitian_part() }
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: Matrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: Matrix::identity(n) }
    }

    pub fn from_real_diag(diag: &[T]) -> Self {
        Self {
            m: Matrix::from_real_diag(diag),
        }
    }

    /// Rank-one projector-like operator `|v⟩⟨v|`.
    pub fn outer(v: &[C<T>]) -> Self {
        let n = v.len();
        Self {
            m: Matrix::from_fn(n, n, |i, j| v[i] * v[j].conj()),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.m
    }

    pub fn trace(&self) -> T {
        self.m.trace().re
    }

    pub fn scale(&self, s: T) -> Self {
        Self { m: self.m.scale(s) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { m: &self.m + &other.m }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { m: &self.m - &other.m }
    }

    /// `self + s * other`
    pub fn add_scaled(&self, s: T, other: &Self) -> Self {
        let mut m = self.m.clone();
        m.axpy(s, &other.m);
        Self { m }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            m: self.m.kron(&other.m),
        }
    }

    /// `Re Tr[self · other]`, real for Hermitian pairs.
    pub fn inner(&self, other: &Self) -> T {
        self.m.inner_re(&other.m)
    }

    pub fn frobenius_norm(&self) -> T {
        self.m.frobenius_norm()
    }

    /// `U · self · U†`
    pub fn conjugate_by(&self, u: &Matrix<T>) -> Self {
        Self::project(&u.matmul(&self.m).matmul(&u.adjoint()))
    }

    pub fn eig(&self) -> Result<Spectrum<T>> {
        eig_matrix(&self.m)
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(self.eig()?.min())
    }

    pub fn trace_norm(&self) -> Result<T> {
        Ok(self.eig()?.trace_norm())
    }

    pub fn operator_norm(&self) -> Result<T> {
        Ok(self.eig()?.operator_norm())
    }

    pub fn partial_trace(&self, layout: &SubsystemDims, drop: &[usize]) -> Result<Self> {
        Ok(Self::project(&partial_trace_matrix(&self.m, layout, drop)?))
    }

    pub fn partial_transpose(&self, layout: &SubsystemDims, subsystem: usize) -> Result<Self> {
        Ok(Self {
            m: partial_transpose_matrix(&self.m, layout, subsystem)?,
        })
    }

    /// `self ⊗ I` with `self` acting on the factors `positions` of `layout`
    /// and identity on the rest.
    pub fn embed(&self, positions: &[usize], layout: &SubsystemDims) -> Result<Self> {
        let dims = layout.dims();
        if positions.iter().any(|&p| p >= dims.len()) {
            return Err(Error::Layout(format!("positions {positions:?} out of range")));
        }
        let sub: usize = positions.iter().map(|&p| dims[p]).product();
        if sub != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: sub,
                found: self.dim(),
            });
        }
        let rest: Vec<usize> = (0..dims.len()).filter(|k| !positions.contains(k)).collect();
        let rest_dim: usize = rest.iter().map(|&k| dims[k]).product();
        let big = self.kron(&Self::identity(rest_dim));
        let order: Vec<usize> = positions.iter().chain(rest.iter()).copied().collect();
        let big_layout = SubsystemDims::new(order.iter().map(|&k| dims[k]).collect())?;
        let perm: Vec<usize> = (0..dims.len())
            .map(|k| order.iter().position(|&q| q == k).expect("complete order"))
            .collect();
        big.permute(&big_layout, &perm)
    }

    /// Reorders tensor factors: factor `k` of the result is factor `perm[k]`
    /// of `self`.
    pub fn permute(&self, layout: &SubsystemDims, perm: &[usize]) -> Result<Self> {
        Ok(Self {
            m: permute_matrix(&self.m, layout, perm)?,
        })
    }
}

/// Unit-trace positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Density<T: Real> {
    op: Hermitian<T>,
}

impl<T: Real> Density<T> {
    pub fn new(op: Hermitian<T>) -> Result<Self> {
        let tol = T::lit(1e-10).max(T::epsilon() * T::lit(1e3));
        let tr = op.trace();
        if (tr - T::one()).abs() > tol {
            return Err(Error::NotDensity(format!("trace {tr}")));
        }
        let lo = op.min_eigenvalue()?;
        if lo < -tol {
            return Err(Error::NotDensity(format!("minimum eigenvalue {lo}")));
        }
        Ok(Self { op })
    }

    /// Pure state `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn pure(psi: &[C<T>]) -> Result<Self> {
        let n2: T = psi.iter().map(|z| z.norm_sqr()).sum();
        if n2 <= T::zero() {
            return Err(Error::NotDensity("zero vector".into()));
        }
        Self::new(Hermitian::outer(psi).scale(T::one() / n2))
    }

    /// Computational basis state `|k⟩⟨k|`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut diag = vec![T::zero(); dim];
        diag[k] = T::one();
        Self {
            op: Hermitian::from_real_diag(&diag),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: Hermitian::identity(dim).scale(T::one() / T::of(dim)),
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &Hermitian<T> {
        &self.op
    }
}

/// Ordered tensor-factor dimensions; the leftmost factor is the most
/// significant digit of the row-major composite index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubsystemDims {
    dims: Vec<usize>,
}

impl SubsystemDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::Layout(format!("factor dimensions must be >= 2, got {dims:?}")));
        }
        Ok(Self { dims })
    }

    /// `n` copies of a `d`-dimensional system.
    pub fn uniform(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    fn check<T: Real>(&self, m: &Matrix<T>) -> Result<()> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if m.rows() != self.total() {
            return Err(Error::Layout(format!(
                "layout {:?} has total dimension {} but operator is {}x{}",
                self.dims,
                self.total(),
                m.rows(),
                m.cols()
            )));
        }
        Ok(())
    }
}

/// `Tr_S[m]` for the factor set `drop`.
pub fn partial_trace_matrix<T: Real>(m: &Matrix<T>, layout: &SubsystemDims, drop: &[usize]) -> Result<Matrix<T>> {
    layout.check(m)?;
    let nsys = layout.len();
    if let Some(&bad) = drop.iter().find(|&&k| k >= nsys) {
        return Err(Error::Layout(format!(
            "subsystem index {bad} out of range for {nsys} factors"
        )));
    }
    let dims = layout.dims();
    let strides = layout.strides();
    let kept: Vec<usize> = (0..nsys).filter(|k| !drop.contains(k)).collect();
    let kept_dim: usize = kept.iter().map(|&k| dims[k]).product();
    let n = m.rows();

    // split every composite index into (kept index, traced index)
    let mut kidx = vec![0usize; n];
    let mut tidx = vec![0usize; n];
    for (i, (ki, ti)) in kidx.iter_mut().zip(tidx.iter_mut()).enumerate() {
        let (mut k, mut t) = (0, 0);
        for s in 0..nsys {
            let digit = (i / strides[s]) % dims[s];
            if drop.contains(&s) {
                t = t * dims[s] + digit;
            } else {
                k = k * dims[s] + digit;
            }
        }
        *ki = k;
        *ti = t;
    }
    let mut out = Matrix::zeros(kept_dim, kept_dim);
    for i in 0..n {
        for j in 0..n {
            if tidx[i] == tidx[j] {
                out[(kidx[i], kidx[j])] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Transpose on a single tensor factor.
pub fn partial_transpose_matrix<T: Real>(m: &Matrix<T>, layout: &SubsystemDims, subsystem: usize) -> Result<Matrix<T>> {
    layout.check(m)?;
    if subsystem >= layout.len() {
        return Err(Error::Layout(format!("subsystem index {subsystem} out of range")));
    }
    let d = layout.dims()[subsystem];
    let st = layout.strides()[subsystem];
    let n = m.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        let di = (i / st) % d;
        for j in 0..n {
            let dj = (j / st) % d;
            let i2 = i - di * st + dj * st;
            let j2 = j - dj * st + di * st;
            out[(i2, j2)] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Reorders tensor factors so that factor `k` of the output is factor
/// `perm[k]` of the input.
pub fn permute_matrix<T: Real>(m: &Matrix<T>, layout: &SubsystemDims, perm: &[usize]) -> Result<Matrix<T>> {
    layout.check(m)?;
    let nsys = layout.len();
    let mut seen = vec![false; nsys];
    if perm.len() != nsys || perm.iter().any(|&p| p >= nsys || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::Layout(format!(
            "{perm:?} is not a permutation of {nsys} factors"
        )));
    }
    let map = permutation_map(layout, perm);
    let n = m.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    Ok(out)
}

/// For each input composite index, its position after the factor permutation.
pub(crate) fn permutation_map(layout: &SubsystemDims, perm: &[usize]) -> Vec<usize> {
    let dims = layout.dims();
    let strides = layout.strides();
    let n = layout.total();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    (0..n)
        .map(|i| {
            let mut idx = 0;
            for (k, &p) in perm.iter().enumerate() {
                let digit = (i / strides[p]) % dims[p];
                idx = idx * new_dims[k] + digit;
            }
            idx
        })
        .collect()
}

/// `V` such that `V · (A ⊗ B) · V† = B ⊗ A` for two factors is `SWAP`; this
/// returns the permutation unitary realising `perm`.
pub fn permutation_unitary<T: Real>(layout: &SubsystemDims, perm: &[usize]) -> Matrix<T> {
    let map = permutation_map(layout, perm);
    let n = map.len();
    let mut u = Matrix::zeros(n, n);
    for (i, &pi) in map.iter().enumerate() {
        u[(pi, i)] = C::new(T::one(), T::zero());
    }
    u
}

/// Positivity test: `(min eigenvalue ≥ −tol, min eigenvalue)`.
pub fn psd_check<T: Real>(h: &Hermitian<T>, tol: T) -> Result<(bool, T)> {
    let lo = h.min_eigenvalue()?;
    Ok((lo >= -tol, lo))
}
