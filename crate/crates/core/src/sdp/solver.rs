use super::dense::{cholesky_in_place, cholesky_solve};
use super::problem::SdpProblem;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, eig_matrix, lower_triangular_inverse, Hermitian, Matrix};
use crate::scalar::{c, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig<T: Real> {
    /// Relative duality gap `|p − d| / (1 + |p| + |d|)`.
    pub tol_gap: T,
    /// Relative residuals `‖A(X) − b‖ / (1 + ‖b‖)` and `‖A*y + S − C‖ / (1 + ‖C‖)`.
    pub tol_feas: T,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: T,
    /// Largest realified block accepted without `allow_large`.
    pub max_block: usize,
    pub allow_large: bool,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            tol_gap: T::lit(1e-8),
            tol_feas: T::lit(1e-8),
            max_iter: 200,
            step_fraction: T::lit(0.98),
            max_block: 260,
            allow_large: false,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_gap > T::zero()) || !(self.tol_feas > T::zero()) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if !(self.step_fraction > T::zero() && self.step_fraction < T::one()) {
            return Err(Error::InvalidArgument("step fraction must lie in (0, 1)".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    /// `y` holds a ray with `bᵀy = 1` and `A*y ⪯ 0`.
    PrimalInfeasible,
    /// `X` holds a ray with `⟨C, X⟩ = −1` and `A(X) = 0`.
    DualInfeasible,
    NumericalFailure,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIterations => "max_iterations",
            SolveStatus::PrimalInfeasible => "primal_infeasible",
            SolveStatus::DualInfeasible => "dual_infeasible",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpSolution<T: Real> {
    pub status: SolveStatus,
    pub x: Vec<Hermitian<T>>,
    pub y: Vec<T>,
    pub s: Vec<Hermitian<T>>,
    pub primal_objective: T,
    pub dual_objective: T,
    /// Relative duality gap.
    pub gap: T,
    pub primal_residual: T,
    pub dual_residual: T,
    pub iterations: usize,
}

impl<T: Real> SdpSolution<T> {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Value of a scalar block.
    pub fn scalar(&self, block: usize) -> T {
        self.x[block].matrix()[(0, 0)].re
    }
}

struct Iterate<T: Real> {
    x: Vec<Matrix<T>>,
    y: Vec<T>,
    s: Vec<Matrix<T>>,
    tau: T,
    kappa: T,
}

struct Scaling<T: Real> {
    g: Matrix<T>,
    g_inv: Matrix<T>,
    w: Matrix<T>,
    lambda: Vec<T>,
}

struct Direction<T: Real> {
    dx: Vec<Matrix<T>>,
    dy: Vec<T>,
    ds: Vec<Matrix<T>>,
    dtau: T,
    dkappa: T,
}

fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|a| *a * *a).sum::<T>().sqrt()
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn blocks_inner<T: Real>(a: &[Matrix<T>], b: &[Matrix<T>]) -> T {
    a.iter().zip(b).map(|(x, y)| x.trace_product_re(y)).sum()
}

fn blocks_norm<T: Real>(a: &[Matrix<T>]) -> T {
    a.iter().map(|x| x.frobenius_norm().powi(2)).sum::<T>().sqrt()
}

fn nt_scaling<T: Real>(x: &Matrix<T>, s: &Matrix<T>) -> Option<Scaling<T>> {
    let lx = cholesky(x).ok()?;
    let ls = cholesky(s).ok()?;
    let k = ls.adjoint().matmul(&lx);
    let spec = eig_matrix(&k.adjoint().matmul(&k)).ok()?;
    let n = x.rows();
    let mut lambda = Vec::with_capacity(n);
    for &l2 in &spec.eigenvalues {
        if !(l2 > T::zero()) {
            return None;
        }
        lambda.push(l2.sqrt());
    }
    let v = &spec.eigenvectors;
    let g = lx.matmul(&Matrix::from_fn(n, n, |i, j| v[(i, j)] / lambda[j].sqrt()));
    let lx_inv = lower_triangular_inverse(&lx).ok()?;
    let g_inv = Matrix::from_fn(n, n, |i, j| v[(j, i)].conj() * lambda[i].sqrt()).matmul(&lx_inv);
    let w = g.matmul(&g.adjoint()).hermitian_part();
    Some(Scaling { g, g_inv, w, lambda })
}

/// `G Z Gᴴ`.
fn unscale<T: Real>(sc: &Scaling<T>, z: &Matrix<T>) -> Matrix<T> {
    sc.g.matmul(z).matmul(&sc.g.adjoint()).hermitian_part()
}

/// Largest `α ≤ cap` keeping `Λ + α Δ` positive semidefinite, with `Δ` in
/// the scaled frame.
fn max_step<T: Real>(lambda: &[T], delta: &Matrix<T>) -> Option<T> {
    let n = lambda.len();
    let r: Vec<T> = lambda.iter().map(|l| T::one() / l.sqrt()).collect();
    let m = Matrix::from_fn(n, n, |i, j| delta[(i, j)] * (r[i] * r[j]));
    let lo = eig_matrix(&m).ok()?.min();
    Some(if lo < T::zero() { -T::one() / lo } else { T::infinity() })
}

/// Solves the problem with a homogeneous self-dual interior point method
/// (Nesterov–Todd scaling, Mehrotra predictor-corrector). Complex blocks
/// are handled natively; see [`SdpProblem::realify`] for the real form.
///
/// Returns an error only for an invalid configuration or a problem above
/// the size guardrail. Solver outcomes are reported through the status.
pub fn solve<T: Real>(p: &SdpProblem<T>, cfg: &SolverConfig<T>) -> Result<SdpSolution<T>> {
    cfg.validate()?;
    let largest = p.max_realified_block();
    if largest > cfg.max_block && !cfg.allow_large {
        return Err(Error::TooLarge {
            dim: largest / 2,
            realified: largest,
            limit: cfg.max_block,
        });
    }
    Ok(Engine::new(p, cfg).run())
}

struct Engine<'a, T: Real> {
    p: &'a SdpProblem<T>,
    cfg: &'a SolverConfig<T>,
    b: Vec<T>,
    c: Vec<Matrix<T>>,
    nu: T,
    rows_by_block: Vec<Vec<usize>>,
}

struct Residuals<T: Real> {
    rp: Vec<T>,
    rd: Vec<Matrix<T>>,
    rg: T,
    mu: T,
    ax: Vec<T>,
    aty: Vec<Matrix<T>>,
    cx: T,
    by: T,
}

impl<'a, T: Real> Engine<'a, T> {
    fn new(p: &'a SdpProblem<T>, cfg: &'a SolverConfig<T>) -> Self {
        let mut rows_by_block = vec![Vec::new(); p.blocks().len()];
        for (i, row) in p.constraints().iter().enumerate() {
            for (k, _) in &row.terms {
                rows_by_block[*k].push(i);
            }
        }
        Self {
            p,
            cfg,
            b: p.rhs(),
            c: p.objective_dense(),
            nu: T::of(p.blocks().iter().sum::<usize>() + 1),
            rows_by_block,
        }
    }

    fn residuals(&self, it: &Iterate<T>) -> Residuals<T> {
        let ax = self.p.apply(&it.x);
        let aty = self.p.adjoint(&it.y);
        let rp: Vec<T> = ax.iter().zip(&self.b).map(|(a, b)| *a - *b * it.tau).collect();
        let rd: Vec<Matrix<T>> = aty
            .iter()
            .zip(&it.s)
            .zip(&self.c)
            .map(|((a, s), c)| {
                let mut r = a + s;
                r.axpy(-it.tau, c);
                r
            })
            .collect();
        let cx = blocks_inner(&self.c, &it.x);
        let by = dot(&self.b, &it.y);
        let rg = cx - by + it.kappa;
        let mu = (blocks_inner(&it.x, &it.s) + it.tau * it.kappa) / self.nu;
        Residuals {
            rp,
            rd,
            rg,
            mu,
            ax,
            aty,
            cx,
            by,
        }
    }

    /// `M_ij = Re Tr[A_i W A_j W]` summed over blocks.
    fn schur(&self, sc: &[Scaling<T>]) -> Vec<T> {
        let m = self.b.len();
        let mut mat = vec![T::zero(); m * m];
        let rows = self.p.constraints();
        for (k, list) in self.rows_by_block.iter().enumerate() {
            let w = &sc[k].w;
            let coef = |i: usize| &rows[i].terms.iter().find(|(b, _)| *b == k).expect("indexed").1;
            for (xi, &i) in list.iter().enumerate() {
                let ai = coef(i);
                for &j in &list[xi..] {
                    let aj = coef(j);
                    let mut acc = T::zero();
                    for &(p, q, a) in ai.entries() {
                        for &(r, s, b) in aj.entries() {
                            acc += (a * b * w[(q, r)] * w[(s, p)]).re;
                        }
                    }
                    mat[i * m + j] += acc;
                    if i != j {
                        mat[j * m + i] += acc;
                    }
                }
            }
        }
        mat
    }

    fn factor_schur(&self, mut mat: Vec<T>) -> Option<Vec<T>> {
        let m = self.b.len();
        let maxd = (0..m).map(|i| mat[i * m + i]).fold(T::zero(), T::max).max(T::one());
        let backup = mat.clone();
        if cholesky_in_place(&mut mat, m, T::zero(), false).is_ok() {
            return Some(mat);
        }
        let reg = T::lit(1e-12).max(T::epsilon() * T::epsilon()) * maxd;
        mat = backup;
        for i in 0..m {
            mat[i * m + i] += reg;
        }
        cholesky_in_place(&mut mat, m, reg, true).ok().map(|_| mat)
    }

    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        it: &Iterate<T>,
        res: &Residuals<T>,
        sc: &[Scaling<T>],
        l: &[T],
        wcw: &[Matrix<T>],
        a_wcw: &[T],
        cwc: T,
        z_scaled: &[Matrix<T>],
        r_tau: T,
        eta: T,
    ) -> Direction<T> {
        let m = self.b.len();
        let base: Vec<Matrix<T>> = sc
            .iter()
            .zip(z_scaled)
            .zip(&res.rd)
            .map(|((s, z), rd)| {
                let mut v = unscale(s, z);
                let wrdw = s.w.matmul(rd).matmul(&s.w);
                v.axpy(eta, &wrdw);
                v
            })
            .collect();
        let a_base = self.p.apply(&base);
        let mut pv: Vec<T> = (0..m).map(|i| -eta * res.rp[i] - a_base[i]).collect();
        let mut qv: Vec<T> = (0..m).map(|i| a_wcw[i] + self.b[i]).collect();
        cholesky_solve(l, m, &mut pv);
        cholesky_solve(l, m, &mut qv);
        let c0 = blocks_inner(&self.c, &base);
        let num = -eta * res.rg - c0 - dot(a_wcw, &pv) + dot(&self.b, &pv) - r_tau / it.tau;
        let den = dot(a_wcw, &qv) - cwc - dot(&self.b, &qv) - it.kappa / it.tau;
        let dtau = num / den;
        let dy: Vec<T> = pv.iter().zip(&qv).map(|(p, q)| *p + dtau * *q).collect();
        let atdy = self.p.adjoint(&dy);
        let dx: Vec<Matrix<T>> = base
            .iter()
            .zip(sc)
            .zip(&atdy)
            .zip(wcw)
            .map(|(((bk, s), a), wc)| {
                let mut v = bk + &s.w.matmul(a).matmul(&s.w);
                v.axpy(-dtau, wc);
                v.hermitian_part()
            })
            .collect();
        let ds: Vec<Matrix<T>> = res
            .rd
            .iter()
            .zip(&atdy)
            .zip(&self.c)
            .map(|((rd, a), ck)| {
                let mut v = rd.scale(-eta);
                v.axpy(-T::one(), a);
                v.axpy(dtau, ck);
                v
            })
            .collect();
        let dkappa = (r_tau - it.kappa * dtau) / it.tau;
        Direction {
            dx,
            dy,
            ds,
            dtau,
            dkappa,
        }
    }

    fn step_length(&self, it: &Iterate<T>, sc: &[Scaling<T>], d: &Direction<T>) -> Option<T> {
        let mut alpha = T::infinity();
        for (k, s) in sc.iter().enumerate() {
            let dxs = s.g_inv.matmul(&d.dx[k]).matmul(&s.g_inv.adjoint());
            let dss = s.g.adjoint().matmul(&d.ds[k]).matmul(&s.g);
            alpha = alpha.min(max_step(&s.lambda, &dxs)?);
            alpha = alpha.min(max_step(&s.lambda, &dss)?);
        }
        if d.dtau < T::zero() {
            alpha = alpha.min(-it.tau / d.dtau);
        }
        if d.dkappa < T::zero() {
            alpha = alpha.min(-it.kappa / d.dkappa);
        }
        Some(alpha)
    }

    fn run(&self) -> SdpSolution<T> {
        let p = self.p;
        let m = self.b.len();
        let cfg = self.cfg;
        let mut it = Iterate {
            x: p.blocks().iter().map(|&n| Matrix::identity(n)).collect(),
            y: vec![T::zero(); m],
            s: p.blocks().iter().map(|&n| Matrix::identity(n)).collect(),
            tau: T::one(),
            kappa: T::one(),
        };
        let bnorm = T::one() + norm2(&self.b);
        let cnorm = T::one() + blocks_norm(&self.c);
        let mut best: Option<(T, Iterate<T>)> = None;
        let mut stalls = 0;

        for iter in 0..=cfg.max_iter {
            let res = self.residuals(&it);
            let pres = norm2(&res.rp) / it.tau / bnorm;
            let dres = blocks_norm(&res.rd) / it.tau / cnorm;
            let (pobj, dobj) = (res.cx / it.tau, res.by / it.tau);
            let gap = (pobj - dobj).abs() / (T::one() + pobj.abs() + dobj.abs());
            let merit = (pres / cfg.tol_feas).max(dres / cfg.tol_feas).max(gap / cfg.tol_gap);
            if !merit.is_finite() {
                return self.finish(best.map(|b| b.1).unwrap_or(it), SolveStatus::NumericalFailure, iter);
            }
            if best.as_ref().is_none_or(|b| merit < b.0) {
                best = Some((merit, self.clone_iterate(&it)));
            }
            if pres <= cfg.tol_feas && dres <= cfg.tol_feas && gap <= cfg.tol_gap {
                return self.finish(it, SolveStatus::Optimal, iter);
            }
            if it.tau < it.kappa {
                let ray = blocks_norm(&res.aty.iter().zip(&it.s).map(|(a, s)| a + s).collect::<Vec<_>>());
                if res.by > T::zero() && ray <= cfg.tol_feas * res.by * cnorm {
                    return self.finish_certificate(it, SolveStatus::PrimalInfeasible, iter, res.by);
                }
                if res.cx < T::zero() && norm2(&res.ax) <= cfg.tol_feas * (-res.cx) * bnorm {
                    return self.finish_certificate(it, SolveStatus::DualInfeasible, iter, -res.cx);
                }
            }
            if iter == cfg.max_iter {
                break;
            }

            let mut sc = Vec::with_capacity(it.x.len());
            for (x, s) in it.x.iter().zip(&it.s) {
                match nt_scaling(x, s) {
                    Some(v) => sc.push(v),
                    None => return self.finish(best.map(|b| b.1).unwrap_or(it), SolveStatus::NumericalFailure, iter),
                }
            }
            let Some(l) = self.factor_schur(self.schur(&sc)) else {
                return self.finish(best.map(|b| b.1).unwrap_or(it), SolveStatus::NumericalFailure, iter);
            };
            let wcw: Vec<Matrix<T>> = sc
                .iter()
                .zip(&self.c)
                .map(|(s, ck)| s.w.matmul(ck).matmul(&s.w).hermitian_part())
                .collect();
            let a_wcw = p.apply(&wcw);
            let cwc = blocks_inner(&self.c, &wcw);

            // predictor
            let z_aff: Vec<Matrix<T>> = sc
                .iter()
                .map(|s| Matrix::from_real_diag(&s.lambda.iter().map(|l| -*l).collect::<Vec<_>>()))
                .collect();
            let aff = self.direction(
                &it,
                &res,
                &sc,
                &l,
                &wcw,
                &a_wcw,
                cwc,
                &z_aff,
                -it.tau * it.kappa,
                T::one(),
            );
            let Some(a_aff) = self.step_length(&it, &sc, &aff) else {
                return self.finish(best.map(|b| b.1).unwrap_or(it), SolveStatus::NumericalFailure, iter);
            };
            let a_aff = a_aff.min(T::one());
            let sigma = (T::one() - a_aff).powi(3);
            let eta = T::one() - sigma;

            // corrector
            let z_cor: Vec<Matrix<T>> = sc
                .iter()
                .zip(&aff.dx)
                .zip(&aff.ds)
                .map(|((s, dx), ds)| {
                    let dxs = s.g_inv.matmul(dx).matmul(&s.g_inv.adjoint());
                    let dss = s.g.adjoint().matmul(ds).matmul(&s.g);
                    let cross = (&dxs.matmul(&dss) + &dss.matmul(&dxs)).scale(T::lit(0.5));
                    let n = s.lambda.len();
                    Matrix::from_fn(n, n, |i, j| {
                        let mut r = -cross[(i, j)];
                        if i == j {
                            r += c(sigma * res.mu - s.lambda[i] * s.lambda[i], T::zero());
                        }
                        r * (T::lit(2.0) / (s.lambda[i] + s.lambda[j]))
                    })
                })
                .collect();
            let r_tau = sigma * res.mu - it.tau * it.kappa - aff.dtau * aff.dkappa;
            let dir = self.direction(&it, &res, &sc, &l, &wcw, &a_wcw, cwc, &z_cor, r_tau, eta);
            let Some(a_max) = self.step_length(&it, &sc, &dir) else {
                return self.finish(best.map(|b| b.1).unwrap_or(it), SolveStatus::NumericalFailure, iter);
            };
            let alpha = (cfg.step_fraction * a_max).min(T::one());
            if !(alpha > T::lit(1e-12)) {
                stalls += 1;
                if stalls >= 3 {
                    return self.finish(best.map(|b| b.1).unwrap_or(it), SolveStatus::NumericalFailure, iter);
                }
                continue;
            }
            stalls = 0;
            for k in 0..it.x.len() {
                it.x[k].axpy(alpha, &dir.dx[k]);
                it.s[k].axpy(alpha, &dir.ds[k]);
                it.x[k] = it.x[k].hermitian_part();
                it.s[k] = it.s[k].hermitian_part();
            }
            for (yi, d) in it.y.iter_mut().zip(&dir.dy) {
                *yi += alpha * *d;
            }
            it.tau += alpha * dir.dtau;
            it.kappa += alpha * dir.dkappa;
        }
        self.finish(
            best.map(|b| b.1).unwrap_or(it),
            SolveStatus::MaxIterations,
            cfg.max_iter,
        )
    }

    fn clone_iterate(&self, it: &Iterate<T>) -> Iterate<T> {
        Iterate {
            x: it.x.clone(),
            y: it.y.clone(),
            s: it.s.clone(),
            tau: it.tau,
            kappa: it.kappa,
        }
    }

    fn finish(&self, it: Iterate<T>, status: SolveStatus, iterations: usize) -> SdpSolution<T> {
        let inv = T::one() / it.tau;
        let x: Vec<Matrix<T>> = it.x.iter().map(|m| m.scale(inv)).collect();
        let s: Vec<Matrix<T>> = it.s.iter().map(|m| m.scale(inv)).collect();
        let y: Vec<T> = it.y.iter().map(|v| *v * inv).collect();
        self.package(x, y, s, status, iterations)
    }

    fn finish_certificate(&self, it: Iterate<T>, status: SolveStatus, iterations: usize, scale: T) -> SdpSolution<T> {
        let inv = T::one() / scale;
        let x: Vec<Matrix<T>> = it.x.iter().map(|m| m.scale(inv)).collect();
        let s: Vec<Matrix<T>> = it.s.iter().map(|m| m.scale(inv)).collect();
        let y: Vec<T> = it.y.iter().map(|v| *v * inv).collect();
        self.package(x, y, s, status, iterations)
    }

    fn package(
        &self,
        x: Vec<Matrix<T>>,
        y: Vec<T>,
        s: Vec<Matrix<T>>,
        status: SolveStatus,
        iterations: usize,
    ) -> SdpSolution<T> {
        let ax = self.p.apply(&x);
        let aty = self.p.adjoint(&y);
        let rp: Vec<T> = ax.iter().zip(&self.b).map(|(a, b)| *a - *b).collect();
        let rd: Vec<Matrix<T>> = aty
            .iter()
            .zip(&s)
            .zip(&self.c)
            .map(|((a, sk), ck)| &(a + sk) - ck)
            .collect();
        let pobj = blocks_inner(&self.c, &x);
        let dobj = dot(&self.b, &y);
        SdpSolution {
            status,
            primal_objective: pobj,
            dual_objective: dobj,
            gap: (pobj - dobj).abs() / (T::one() + pobj.abs() + dobj.abs()),
            primal_residual: norm2(&rp) / (T::one() + norm2(&self.b)),
            dual_residual: blocks_norm(&rd) / (T::one() + blocks_norm(&self.c)),
            x: x.iter().map(Hermitian::project).collect(),
            y,
            s: s.iter().map(Hermitian::project).collect(),
            iterations,
        }
    }
}
