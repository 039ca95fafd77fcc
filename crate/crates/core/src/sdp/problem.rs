use std::io::{self, Write};

use num_traits::Zero;

use super::dense::{cholesky_in_place, cholesky_solve, independent_rows};
use super::sparse::SparseHermitian;
use crate::error::{Error, Result};
use crate::linalg::{Hermitian, Matrix, SubsystemDims};
use crate::scalar::{c, Real, C};

/// One equality row `Σ_k ⟨A_k, X_k⟩ = rhs`, with `⟨A, X⟩ = Re Tr[A X]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T: Real> {
    pub terms: Vec<(usize, SparseHermitian<T>)>,
    pub rhs: T,
}

/// `min Σ_k ⟨C_k, X_k⟩` subject to linear equalities, every `X_k ⪰ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem<T: Real> {
    blocks: Vec<usize>,
    names: Vec<String>,
    objective: Vec<SparseHermitian<T>>,
    constraints: Vec<Constraint<T>>,
    removed_rows: usize,
}

impl<T: Real> SdpProblem<T> {
    pub fn new(
        blocks: Vec<usize>,
        objective: Vec<SparseHermitian<T>>,
        constraints: Vec<Constraint<T>>,
    ) -> Result<Self> {
        let names = (0..blocks.len()).map(|k| format!("X{k}")).collect();
        let p = Self {
            blocks,
            names,
            objective,
            constraints,
            removed_rows: 0,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.blocks.contains(&0) {
            return Err(Error::Assembly("empty block".into()));
        }
        if self.objective.len() != self.blocks.len() {
            return Err(Error::Assembly(format!(
                "{} objective terms for {} blocks",
                self.objective.len(),
                self.blocks.len()
            )));
        }
        for (k, c) in self.objective.iter().enumerate() {
            if c.dim() != self.blocks[k] {
                return Err(Error::DimensionMismatch {
                    expected: self.blocks[k],
                    found: c.dim(),
                });
            }
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::NonFinite);
            }
            for (k, a) in &row.terms {
                let Some(&n) = self.blocks.get(*k) else {
                    return Err(Error::Assembly(format!("row {i} references missing block {k}")));
                };
                if a.dim() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: a.dim(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn block_name(&self, k: usize) -> &str {
        &self.names[k]
    }

    pub fn objective(&self) -> &[SparseHermitian<T>] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint<T>] {
        &self.constraints
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Rows dropped as linearly dependent during assembly.
    pub fn removed_rows(&self) -> usize {
        self.removed_rows
    }

    pub fn rhs(&self) -> Vec<T> {
        self.constraints.iter().map(|r| r.rhs).collect()
    }

    /// `A(X)`.
    pub fn apply(&self, x: &[Matrix<T>]) -> Vec<T> {
        self.constraints
            .iter()
            .map(|r| r.terms.iter().map(|(k, a)| a.inner_dense(&x[*k])).sum())
            .collect()
    }

    /// `A*(y) = Σ_i y_i A_i`, block by block.
    pub fn adjoint(&self, y: &[T]) -> Vec<Matrix<T>> {
        let mut out: Vec<Matrix<T>> = self.blocks.iter().map(|&n| Matrix::zeros(n, n)).collect();
        for (row, &yi) in self.constraints.iter().zip(y) {
            for (k, a) in &row.terms {
                a.add_to(&mut out[*k], yi);
            }
        }
        out
    }

    pub fn objective_value(&self, x: &[Matrix<T>]) -> T {
        self.objective.iter().zip(x).map(|(c, xk)| c.inner_dense(xk)).sum()
    }

    pub fn objective_dense(&self) -> Vec<Matrix<T>> {
        self.objective.iter().map(|c| c.to_dense().into_matrix()).collect()
    }

    /// Largest block size after realification (`n → 2n` for `n > 1`).
    pub fn max_realified_block(&self) -> usize {
        self.blocks
            .iter()
            .map(|&n| if n > 1 { 2 * n } else { 1 })
            .max()
            .unwrap_or(0)
    }

    /// Equivalent problem over real symmetric blocks: `H ↦ ½[[Re H, −Im H], [Im H, Re H]]`
    /// for coefficients, which keeps every inner product unchanged. Scalar
    /// blocks are left as they are.
    pub fn realify(&self) -> Self {
        let map = |a: &SparseHermitian<T>| -> SparseHermitian<T> {
            let n = a.dim();
            if n == 1 {
                return a.clone();
            }
            let h = T::lit(0.5);
            let mut up = Vec::new();
            for &(i, j, v) in a.entries() {
                if i > j {
                    continue;
                }
                up.push((i, j, c(v.re * h, T::zero())));
                up.push((i + n, j + n, c(v.re * h, T::zero())));
                if i != j {
                    // lower-left block holds Im, upper-right −Im
                    up.push((j, i + n, c(v.im * h, T::zero())));
                    up.push((i, j + n, c(-v.im * h, T::zero())));
                }
            }
            SparseHermitian::from_upper(2 * n, up)
        };
        Self {
            blocks: self.blocks.iter().map(|&n| if n > 1 { 2 * n } else { 1 }).collect(),
            names: self.names.clone(),
            objective: self.objective.iter().map(map).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|r| Constraint {
                    terms: r.terms.iter().map(|(k, a)| (*k, map(a))).collect(),
                    rhs: r.rhs,
                })
                .collect(),
            removed_rows: self.removed_rows,
        }
    }

    /// Recovers a complex block from its realified counterpart.
    pub fn unrealify_block(x: &Matrix<T>) -> Matrix<T> {
        let n2 = x.rows();
        if n2 == 1 {
            return x.clone();
        }
        let n = n2 / 2;
        let h = T::lit(0.5);
        Matrix::from_fn(n, n, |i, j| {
            let re = (x[(i, j)].re + x[(i + n, j + n)].re) * h;
            let im = (x[(i + n, j)].re - x[(i, j + n)].re) * h;
            c(re, im)
        })
    }

    /// Plain-text dump of the problem.
    ///
    /// ```text
    /// blocks <n_0> <n_1> ...
    /// <row> <block> <i> <j> <re> <im>     one line per stored entry, i ≤ j
    /// rhs <row> <value>
    /// ```
    /// Row `0` is the objective and row `r ≥ 1` is constraint `r − 1`.
    pub fn write_triplets(&self, mut w: impl Write) -> io::Result<()> {
        write!(w, "blocks")?;
        for n in &self.blocks {
            write!(w, " {n}")?;
        }
        writeln!(w)?;
        let rows = std::iter::once(self.objective.iter().enumerate().collect::<Vec<_>>()).chain(
            self.constraints
                .iter()
                .map(|r| r.terms.iter().map(|(k, a)| (*k, a)).collect::<Vec<_>>()),
        );
        for (r, terms) in rows.enumerate() {
            for (k, a) in terms {
                for &(i, j, v) in a.entries() {
                    if i <= j {
                        writeln!(w, "{r} {k} {i} {j} {:e} {:e}", v.re.as_f64(), v.im.as_f64())?;
                    }
                }
            }
        }
        for (r, row) in self.constraints.iter().enumerate() {
            writeln!(w, "rhs {} {:e}", r + 1, row.rhs.as_f64())?;
        }
        Ok(())
    }
}

/// Handle to a variable block of a [`ProblemBuilder`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Block(usize);

impl Block {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Linear map from one block into a common operator space, used in matrix
/// constraints.
#[derive(Clone, Debug)]
pub enum MapTerm<T: Real> {
    /// `coef · Tr_drop[X]`, the block being factored as `layout`. An empty
    /// `drop` is the block itself.
    Trace {
        block: Block,
        layout: SubsystemDims,
        drop: Vec<usize>,
        coef: T,
    },
    /// `x · op` for a scalar block `x`.
    Scalar { block: Block, op: Hermitian<T> },
}

impl<T: Real> MapTerm<T> {
    pub fn block(block: Block, dim: usize, coef: T) -> Self {
        MapTerm::Trace {
            block,
            layout: SubsystemDims::new(if dim > 1 { vec![dim] } else { vec![] }).expect("valid"),
            drop: Vec::new(),
            coef,
        }
    }

    pub fn partial_trace(block: Block, layout: &SubsystemDims, drop: &[usize], coef: T) -> Self {
        MapTerm::Trace {
            block,
            layout: layout.clone(),
            drop: drop.to_vec(),
            coef,
        }
    }

    pub fn scalar(block: Block, op: Hermitian<T>) -> Self {
        MapTerm::Scalar { block, op }
    }

    fn target(&self) -> Block {
        match self {
            MapTerm::Trace { block, .. } | MapTerm::Scalar { block, .. } => *block,
        }
    }
}

/// Assembles an [`SdpProblem`] from block declarations and symbolic
/// constraints.
#[derive(Clone, Debug, Default)]
pub struct ProblemBuilder<T: Real> {
    blocks: Vec<usize>,
    names: Vec<String>,
    objective: Vec<SparseHermitian<T>>,
    rows: Vec<Constraint<T>>,
}

impl<T: Real> ProblemBuilder<T> {
    pub fn new() -> Self {
        Self {
            blocks: Vec::new(),
            names: Vec::new(),
            objective: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Declares an `n×n` positive semidefinite block.
    pub fn psd(&mut self, name: &str, n: usize) -> Block {
        assert!(n > 0, "block dimension must be positive");
        self.blocks.push(n);
        self.names.push(name.to_string());
        self.objective.push(SparseHermitian::zeros(n));
        Block(self.blocks.len() - 1)
    }

    /// Declares a nonnegative scalar.
    pub fn scalar(&mut self, name: &str) -> Block {
        self.psd(name, 1)
    }

    pub fn dim(&self, b: Block) -> usize {
        self.blocks[b.0]
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    fn check(&self, b: Block) -> Result<usize> {
        self.blocks
            .get(b.0)
            .copied()
            .ok_or_else(|| Error::Assembly(format!("block {} is not declared", b.0)))
    }

    /// Adds `⟨c, X_b⟩` to the objective.
    pub fn minimize(&mut self, b: Block, c: &Hermitian<T>) -> Result<()> {
        let n = self.check(b)?;
        if c.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: c.dim(),
            });
        }
        self.objective[b.0] = self.objective[b.0].add(&SparseHermitian::from_dense(c));
        Ok(())
    }

    pub fn minimize_scalar(&mut self, b: Block, coef: T) -> Result<()> {
        self.minimize(b, &Hermitian::from_real_diag(&[coef]))
    }

    /// `Σ coef·x_b = rhs` over scalar blocks.
    pub fn scalar_equal(&mut self, terms: &[(Block, T)], rhs: T) -> Result<()> {
        let mut row = Vec::new();
        for &(b, coef) in terms {
            if self.check(b)? != 1 {
                return Err(Error::Assembly(format!("block {} is not a scalar", self.names[b.0])));
            }
            row.push((b.0, SparseHermitian::from_upper(1, [(0, 0, c(coef, T::zero()))])));
        }
        self.push_row(row, rhs)
    }

    /// `Σ coef·x_b ≤ rhs` via a nonnegative slack, which is returned.
    pub fn scalar_le(&mut self, terms: &[(Block, T)], rhs: T) -> Result<Block> {
        let s = self.scalar("slack");
        let mut t = terms.to_vec();
        t.push((s, T::one()));
        self.scalar_equal(&t, rhs)?;
        Ok(s)
    }

    /// `Σ_k ⟨A_k, X_k⟩ = rhs`.
    pub fn linear_equal(&mut self, terms: &[(Block, Hermitian<T>)], rhs: T) -> Result<()> {
        let mut row = Vec::new();
        for (b, a) in terms {
            let n = self.check(*b)?;
            if a.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: a.dim(),
                });
            }
            row.push((b.0, SparseHermitian::from_dense(a)));
        }
        self.push_row(row, rhs)
    }

    fn push_row(&mut self, terms: Vec<(usize, SparseHermitian<T>)>, rhs: T) -> Result<()> {
        let mut merged: Vec<(usize, SparseHermitian<T>)> = Vec::new();
        for (k, a) in terms {
            match merged.iter_mut().find(|(j, _)| *j == k) {
                Some((_, acc)) => *acc = acc.add(&a),
                None => merged.push((k, a)),
            }
        }
        merged.retain(|(_, a)| !a.is_empty());
        if merged.is_empty() {
            if rhs.abs() > T::lit(1e-12) {
                return Err(Error::Assembly(format!("constraint 0 = {rhs} is inconsistent")));
            }
            return Ok(());
        }
        self.rows.push(Constraint { terms: merged, rhs });
        Ok(())
    }

    /// `Σ terms = rhs` as an operator identity, one row per real degree of
    /// freedom of the Hermitian target space.
    pub fn matrix_equal(&mut self, terms: &[MapTerm<T>], rhs: &Hermitian<T>) -> Result<()> {
        let m = rhs.dim();
        for t in terms {
            self.check(t.target())?;
            let out = self.term_output_dim(t)?;
            if out != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: out,
                });
            }
        }
        let inv_sqrt2 = T::lit(0.5).sqrt();
        let zero = C::<T>::zero();
        let rm = rhs.matrix();
        for p in 0..m {
            for q in p..m {
                let variants: &[(C<T>, C<T>)] = if p == q {
                    &[(C::new(T::one(), T::zero()), zero)]
                } else {
                    &[
                        (C::new(inv_sqrt2, T::zero()), C::new(inv_sqrt2, T::zero())),
                        (C::new(T::zero(), inv_sqrt2), C::new(T::zero(), -inv_sqrt2)),
                    ]
                };
                for &(e_pq, e_qp) in variants {
                    // E = e_pq |p⟩⟨q| + e_qp |q⟩⟨p|
                    let mut unit = vec![(p, q, e_pq)];
                    if p != q {
                        unit.push((q, p, e_qp));
                    }
                    let value = unit
                        .iter()
                        .map(|&(i, j, v)| (v * rm[(j, i)]).re)
                        .fold(T::zero(), |a, b| a + b);
                    let row: Vec<(usize, SparseHermitian<T>)> = terms
                        .iter()
                        .map(|t| (t.target().0, self.adjoint_of(t, &unit)))
                        .collect();
                    self.push_row(row, value)?;
                }
            }
        }
        Ok(())
    }

    /// `Σ terms ⪰ rhs` via a PSD slack `P = Σ terms − rhs`, which is returned.
    pub fn matrix_ge(&mut self, terms: &[MapTerm<T>], rhs: &Hermitian<T>) -> Result<Block> {
        let m = rhs.dim();
        let p = self.psd("slack", m);
        let mut t = terms.to_vec();
        t.push(MapTerm::block(p, m, -T::one()));
        self.matrix_equal(&t, rhs)?;
        Ok(p)
    }

    fn term_output_dim(&self, t: &MapTerm<T>) -> Result<usize> {
        match t {
            MapTerm::Trace {
                block, layout, drop, ..
            } => {
                let n = self.blocks[block.0];
                let total = layout.total();
                if total != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: total,
                    });
                }
                if drop.iter().any(|&k| k >= layout.len()) {
                    return Err(Error::Layout(format!("cannot trace factors {drop:?}")));
                }
                let dropped: usize = drop.iter().map(|&k| layout.dims()[k]).product();
                Ok(total / dropped)
            }
            MapTerm::Scalar { block, op } => {
                if self.blocks[block.0] != 1 {
                    return Err(Error::Assembly(format!(
                        "block {} is not a scalar",
                        self.names[block.0]
                    )));
                }
                Ok(op.dim())
            }
        }
    }

    /// Coefficient of the block in the row `⟨E, term(X)⟩`, i.e. `term*(E)`.
    fn adjoint_of(&self, t: &MapTerm<T>, unit: &[(usize, usize, C<T>)]) -> SparseHermitian<T> {
        match t {
            MapTerm::Trace {
                block,
                layout,
                drop,
                coef,
            } => {
                let n = self.blocks[block.0];
                let dims = layout.dims();
                let mut strides = vec![1usize; dims.len()];
                for k in (0..dims.len().saturating_sub(1)).rev() {
                    strides[k] = strides[k + 1] * dims[k + 1];
                }
                let kept: Vec<usize> = (0..dims.len()).filter(|k| !drop.contains(k)).collect();
                let offsets = |factors: &[usize]| -> Vec<usize> {
                    let mut offs = vec![0usize];
                    for &f in factors {
                        let mut next = Vec::with_capacity(offs.len() * dims[f]);
                        for &o in &offs {
                            for v in 0..dims[f] {
                                next.push(o + v * strides[f]);
                            }
                        }
                        offs = next;
                    }
                    offs
                };
                let ko = offsets(&kept);
                let dro = offsets(drop);
                let mut entries = Vec::new();
                for &(i, j, v) in unit {
                    for &r in &dro {
                        entries.push((ko[i] + r, ko[j] + r, v * *coef));
                    }
                }
                let mut s = SparseHermitian::zeros(n);
                // entries already come in Hermitian pairs
                s = s.add(&SparseHermitian::from_upper(
                    n,
                    entries.into_iter().filter(|e| e.0 <= e.1),
                ));
                s
            }
            MapTerm::Scalar { op, .. } => {
                let om = op.matrix();
                let v = unit
                    .iter()
                    .map(|&(i, j, e)| (e * om[(j, i)]).re)
                    .fold(T::zero(), |a, b| a + b);
                SparseHermitian::from_upper(1, [(0, 0, c(v, T::zero()))])
            }
        }
    }

    /// Finalizes the problem, removing rows that are linear combinations of
    /// others. Fails if a removed row contradicts the rest.
    pub fn build(self) -> Result<SdpProblem<T>> {
        let rows = self.rows;
        let m = rows.len();
        let mut gram = vec![T::zero(); m * m];
        let mut by_block: Vec<Vec<(usize, &SparseHermitian<T>)>> = vec![Vec::new(); self.blocks.len()];
        for (i, r) in rows.iter().enumerate() {
            for (k, a) in &r.terms {
                by_block[*k].push((i, a));
            }
        }
        for list in &by_block {
            for (x, &(i, a)) in list.iter().enumerate() {
                for &(j, b) in &list[x..] {
                    let v = a.inner(b);
                    gram[i * m + j] += v;
                    if i != j {
                        gram[j * m + i] += v;
                    }
                }
            }
        }
        let keep = independent_rows(&gram, m, T::lit(1e-10).max(T::epsilon() * T::lit(1e3)));
        let removed: Vec<usize> = (0..m).filter(|i| keep.binary_search(i).is_err()).collect();
        if !removed.is_empty() {
            let nk = keep.len();
            let mut gk = vec![T::zero(); nk * nk];
            for (a, &i) in keep.iter().enumerate() {
                for (b, &j) in keep.iter().enumerate() {
                    gk[a * nk + b] = gram[i * m + j];
                }
            }
            cholesky_in_place(&mut gk, nk, T::zero(), false)
                .map_err(|_| Error::Assembly("independent rows have a singular Gram matrix".into()))?;
            let bmax = rows.iter().map(|r| r.rhs.abs()).fold(T::zero(), T::max);
            for &r in &removed {
                let mut coef: Vec<T> = keep.iter().map(|&i| gram[i * m + r]).collect();
                cholesky_solve(&gk, nk, &mut coef);
                let implied: T = coef.iter().zip(&keep).map(|(c, &i)| *c * rows[i].rhs).sum();
                if (implied - rows[r].rhs).abs() > T::lit(1e-7).max(T::epsilon() * T::lit(1e3)) * (T::one() + bmax) {
                    return Err(Error::Assembly(format!(
                        "dependent constraint requires {} but the others imply {}",
                        rows[r].rhs, implied
                    )));
                }
            }
        }
        let constraints: Vec<Constraint<T>> = keep.iter().map(|&i| rows[i].clone()).collect();
        let p = SdpProblem {
            blocks: self.blocks,
            names: self.names,
            objective: self.objective,
            constraints,
            removed_rows: removed.len(),
        };
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_difference_is_one_row() {
        let mut b = ProblemBuilder::<f64>::new();
        let x = b.scalar("x");
        let y = b.scalar("y");
        b.scalar_equal(&[(x, 1.0), (y, -1.0)], 1.0).unwrap();
        let p = b.build().unwrap();
        assert_eq!(p.num_constraints(), 1);
        assert_eq!(p.blocks(), &[1, 1]);
    }

    #[test]
    fn marginal_trace_rows() {
        for d in [2usize, 3] {
            let mut b = ProblemBuilder::<f64>::new();
            let j = b.psd("J1", d * d * d);
            let x = b.scalar("x");
            let l = SubsystemDims::uniform(d, 3).unwrap();
            b.matrix_equal(
                &[
                    MapTerm::partial_trace(j, &l, &[1, 2], 1.0),
                    MapTerm::scalar(x, Hermitian::identity(d).scale(-1.0)),
                ],
                &Hermitian::zeros(d),
            )
            .unwrap();
            assert_eq!(b.num_rows(), d * d);
            let p = b.build().unwrap();
            assert_eq!(p.num_constraints(), d * d);
            assert_eq!(p.removed_rows(), 0);
        }
    }

    #[test]
    fn operator_inequality_adds_slack_block() {
        let d = 2;
        let mut b = ProblemBuilder::<f64>::new();
        let z = b.psd("Z", d * d);
        let mu = b.scalar("mu");
        let l = SubsystemDims::uniform(d, 2).unwrap();
        let q = b
            .matrix_ge(
                &[
                    MapTerm::scalar(mu, Hermitian::identity(d)),
                    MapTerm::partial_trace(z, &l, &[1], -1.0),
                ],
                &Hermitian::zeros(d),
            )
            .unwrap();
        assert_eq!(b.dim(q), d);
        assert_eq!(b.num_rows(), d * d);
    }

    #[test]
    fn rows_reproduce_the_linear_map() {
        // ⟨E_k, Tr_B X⟩ for all basis E_k recovers Tr_B X through A(X)
        let d = 2;
        let l = SubsystemDims::uniform(d, 2).unwrap();
        let mut b = ProblemBuilder::<f64>::new();
        let xb = b.psd("X", 4);
        b.matrix_equal(&[MapTerm::partial_trace(xb, &l, &[0], 2.0)], &Hermitian::zeros(2))
            .unwrap();
        let p = b.build().unwrap();
        let xm = Matrix::from_fn(4, 4, |i, j| c((i * 4 + j) as f64 * 0.1, 0.0)).hermitian_part();
        let xm = &xm + &Matrix::from_fn(4, 4, |i, j| c(0.0, i as f64 - j as f64));
        let ax = p.apply(std::slice::from_ref(&xm));
        let want = Hermitian::project(&xm).partial_trace(&l, &[0]).unwrap().scale(2.0);
        let w = want.matrix();
        let s = 0.5f64.sqrt();
        let expect = [
            w[(0, 0)].re,
            2.0 * s * w[(0, 1)].re,
            2.0 * s * w[(0, 1)].im,
            w[(1, 1)].re,
        ];
        for (got, e) in ax.iter().zip(expect) {
            assert!((got - e).abs() < 1e-13, "{ax:?} vs {expect:?}");
        }
    }

    #[test]
    fn redundant_rows_are_removed() {
        let mut b = ProblemBuilder::<f64>::new();
        let x = b.scalar("x");
        let y = b.scalar("y");
        b.scalar_equal(&[(x, 1.0), (y, 1.0)], 2.0).unwrap();
        b.scalar_equal(&[(x, 2.0), (y, 2.0)], 4.0).unwrap();
        let p = b.clone().build().unwrap();
        assert_eq!((p.num_constraints(), p.removed_rows()), (1, 1));
        b.scalar_equal(&[(x, 3.0), (y, 3.0)], 5.0).unwrap();
        assert!(matches!(b.build(), Err(Error::Assembly(_))));
    }

    #[test]
    fn dangling_block_reference() {
        let mut other = ProblemBuilder::<f64>::new();
        other.scalar("a");
        let stray = other.scalar("b");
        let mut b = ProblemBuilder::<f64>::new();
        b.scalar("x");
        assert!(b.scalar_equal(&[(stray, 1.0)], 1.0).is_err());
    }

    #[test]
    fn realify_preserves_inner_products() {
        let a = SparseHermitian::from_upper(2, [(0, 0, c(1.0, 0.0)), (0, 1, c(0.3, -0.7)), (1, 1, c(-2.0, 0.0))]);
        let p = SdpProblem::<f64>::new(
            vec![2],
            vec![a.clone()],
            vec![Constraint {
                terms: vec![(0, a.clone())],
                rhs: 1.0,
            }],
        )
        .unwrap();
        let r = p.realify();
        assert_eq!(r.blocks(), &[4]);
        let x = Hermitian::new(
            Matrix::from_vec(2, 2, vec![c(2.0, 0.0), c(0.5, 0.25), c(0.5, -0.25), c(1.0, 0.0)]).unwrap(),
        )
        .unwrap();
        let xm = x.matrix();
        let xr = Matrix::from_fn(4, 4, |i, j| {
            let (bi, bj) = (i / 2, j / 2);
            let v = xm[(i % 2, j % 2)];
            c(
                match (bi, bj) {
                    (0, 0) | (1, 1) => v.re,
                    (1, 0) => v.im,
                    _ => -v.im,
                },
                0.0,
            )
        });
        assert!((p.apply(std::slice::from_ref(xm))[0] - r.apply(std::slice::from_ref(&xr))[0]).abs() < 1e-14);
        assert!((&SdpProblem::unrealify_block(&xr) - xm).max_abs() < 1e-15);
    }

    #[test]
    fn triplet_dump() {
        let mut b = ProblemBuilder::<f64>::new();
        let x = b.scalar("x");
        b.minimize_scalar(x, 1.0).unwrap();
        b.scalar_equal(&[(x, 1.0)], 3.0).unwrap();
        let mut out = Vec::new();
        b.build().unwrap().write_triplets(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "blocks 1\n0 0 0 0 1e0 0e0\n1 0 0 0 1e0 0e0\nrhs 1 3e0\n");
    }
}
