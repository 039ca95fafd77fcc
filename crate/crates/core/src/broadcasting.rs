//! Optimization problems over virtual broadcasting maps: exact and
//! approximate sampling overheads, the depolarizing reduction, and the
//! minimum error at a fixed sampling budget.

use crate::channels::{
    depolarizing_choi, gamma_operator, BroadcastDecomposition, ChoiOperator, DepolarizingParam, Receiver,
};
use crate::error::{Error, Result};
use crate::linalg::{Hermitian, SubsystemDims};
use crate::scalar::Real;
use crate::sdp::{
    check_certificate, solve, Block, CertificateReport, MapTerm, ProblemBuilder, SdpSolution, SolveStatus, SolverConfig,
};

/// Largest `d` accepted without `allow_large` in the solver configuration.
pub const MAX_DIM: usize = 4;

/// Tolerance of the certificate attached to every result.
pub const CERTIFICATE_TOL: f64 = 1e-6;

/// Diamond-norm error allowances `(a, b)` for the two receivers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorThresholds<T: Real> {
    a: T,
    b: T,
}

impl<T: Real> ErrorThresholds<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        for v in [a, b] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::InvalidArgument(format!("error threshold {v} outside [0, 1]")));
            }
        }
        Ok(Self { a, b })
    }

    pub fn balanced(delta: T) -> Result<Self> {
        Self::new(delta, delta)
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn swapped(&self) -> Self {
        Self { a: self.b, b: self.a }
    }

    fn get(&self, r: Receiver) -> T {
        match r {
            Receiver::First => self.a,
            Receiver::Second => self.b,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverheadResult<T: Real> {
    /// Optimal `x + y`.
    pub nu: T,
    /// `ν²`, the sample complexity overhead.
    pub s: T,
    pub decomposition: BroadcastDecomposition<T>,
    /// Depolarizing parameter of the marginals, when fixed by the problem.
    pub t: Option<T>,
    pub status: SolveStatus,
    pub gap: T,
    pub iterations: usize,
    pub certificate: CertificateReport<T>,
}

impl<T: Real> OverheadResult<T> {
    /// Fewer than twice the samples of direct preparation.
    pub fn sample_efficient(&self) -> bool {
        self.s < T::lit(2.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TradeoffPoint<T: Real> {
    pub gamma: T,
    pub d: usize,
    /// Minimal balanced error; `None` when the budget is infeasible.
    pub mu: Option<T>,
    /// `μ·d²/(d²−1)`.
    pub t: Option<T>,
    pub decomposition: Option<BroadcastDecomposition<T>>,
    pub status: SolveStatus,
    /// Relative duality gap at termination.
    pub gap: T,
    pub certificate: CertificateReport<T>,
}

/// Solver front end holding the configuration shared by all problems.
#[derive(Clone, Copy, Debug, Default)]
pub struct BroadcastSdp<T: Real> {
    pub config: SolverConfig<T>,
}

struct Variables {
    j1: Block,
    j2: Block,
    x: Block,
    y: Block,
}

/// `Tr_{other}` of a three-factor Choi operator keeping receiver `r`.
fn marginal_term<T: Real>(j: Block, r: Receiver, d: usize, coef: T) -> MapTerm<T> {
    let l = SubsystemDims::uniform(d, 3).expect("d >= 2");
    MapTerm::partial_trace(j, &l, &[r.other().factor()], coef)
}

fn marginal_terms<T: Real>(v: &Variables, r: Receiver, d: usize) -> [MapTerm<T>; 2] {
    [
        marginal_term(v.j1, r, d, T::one()),
        marginal_term(v.j2, r, d, -T::one()),
    ]
}

const RECEIVERS: [Receiver; 2] = [Receiver::First, Receiver::Second];

impl<T: Real> BroadcastSdp<T> {
    pub fn new(config: SolverConfig<T>) -> Self {
        Self { config }
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("dimension {d} < 2")));
        }
        if d > MAX_DIM && !self.config.allow_large {
            return Err(Error::DimensionLimit { d, max: MAX_DIM });
        }
        Ok(())
    }

    /// Quasiprobability decomposition variables with `Tr_out J¹ = xI`,
    /// `Tr_out J² = yI`, `x − y = 1`, objective `x + y`.
    fn decomposition_problem(
        &self,
        b: &mut ProblemBuilder<T>,
        din: usize,
        out: &SubsystemDims,
        objective: bool,
    ) -> Result<Variables> {
        let n = din * out.total();
        let j1 = b.psd("J1", n);
        let j2 = b.psd("J2", n);
        let x = b.scalar("x");
        let y = b.scalar("y");
        let mut dims = vec![din];
        dims.extend_from_slice(out.dims());
        let layout = SubsystemDims::new(dims)?;
        let outs: Vec<usize> = (1..layout.len()).collect();
        for (j, w) in [(j1, x), (j2, y)] {
            b.matrix_equal(
                &[
                    MapTerm::partial_trace(j, &layout, &outs, T::one()),
                    MapTerm::scalar(w, Hermitian::identity(din).scale(-T::one())),
                ],
                &Hermitian::zeros(din),
            )?;
        }
        b.scalar_equal(&[(x, T::one()), (y, -T::one())], T::one())?;
        if objective {
            b.minimize_scalar(x, T::one())?;
            b.minimize_scalar(y, T::one())?;
        }
        Ok(Variables { j1, j2, x, y })
    }

    fn broadcast_problem(&self, b: &mut ProblemBuilder<T>, d: usize, objective: bool) -> Result<Variables> {
        self.decomposition_problem(b, d, &SubsystemDims::uniform(d, 2)?, objective)
    }

    fn run(&self, b: ProblemBuilder<T>) -> Result<(SdpSolution<T>, CertificateReport<T>)> {
        let p = b.build()?;
        let sol = solve(&p, &self.config)?;
        let cert = check_certificate(&p, &sol, T::lit(CERTIFICATE_TOL));
        Ok((sol, cert))
    }

    fn extract(
        &self,
        sol: &SdpSolution<T>,
        v: &Variables,
        din: usize,
        out: &SubsystemDims,
    ) -> Result<BroadcastDecomposition<T>> {
        let j1 = ChoiOperator::new(sol.x[v.j1.index()].clone(), din, out.clone())?;
        let j2 = ChoiOperator::new(sol.x[v.j2.index()].clone(), din, out.clone())?;
        BroadcastDecomposition::new(j1, j2, sol.scalar(v.x.index()), sol.scalar(v.y.index()))
    }

    fn overhead(
        &self,
        (sol, certificate): (SdpSolution<T>, CertificateReport<T>),
        v: &Variables,
        din: usize,
        out: &SubsystemDims,
        t: Option<T>,
    ) -> Result<OverheadResult<T>> {
        if sol.status != SolveStatus::Optimal {
            return Err(Error::Solver(format!("overhead SDP ended with status {}", sol.status)));
        }
        let decomposition = self.extract(&sol, v, din, out)?;
        let nu = decomposition.x + decomposition.y;
        Ok(OverheadResult {
            nu,
            s: nu * nu,
            decomposition,
            t,
            status: sol.status,
            gap: sol.gap,
            iterations: sol.iterations,
            certificate,
        })
    }

    /// Optimal decomposition of a given Hermitian-preserving,
    /// trace-preserving map into completely positive parts.
    pub fn overhead_of_map(&self, j: &ChoiOperator<T>) -> Result<OverheadResult<T>> {
        if !j.is_trace_preserving(T::lit(1e-8)) {
            return Err(Error::InvalidArgument("map is not trace preserving".into()));
        }
        let out = j.out_layout().clone();
        let n = j.op().dim();
        if 2 * n > self.config.max_block && !self.config.allow_large {
            return Err(Error::TooLarge {
                dim: n,
                realified: 2 * n,
                limit: self.config.max_block,
            });
        }
        let mut b = ProblemBuilder::new();
        let v = self.decomposition_problem(&mut b, j.in_dim(), &out, true)?;
        b.matrix_equal(
            &[MapTerm::block(v.j1, n, T::one()), MapTerm::block(v.j2, n, -T::one())],
            j.op(),
        )?;
        let sol = self.run(b)?;
        self.overhead(sol, &v, j.in_dim(), &out, None)
    }

    /// Minimal overhead over all broadcasting maps.
    pub fn exact_overhead(&self, d: usize) -> Result<OverheadResult<T>> {
        self.fixed_marginals(d, None)
    }

    /// Minimal overhead with both marginals equal to `Λ^t` (`t = 0`: exact).
    fn fixed_marginals(&self, d: usize, t: Option<T>) -> Result<OverheadResult<T>> {
        let (sol, v) = self.fixed_marginals_raw(d, t)?;
        self.overhead(sol, &v, d, &SubsystemDims::uniform(d, 2)?, t)
    }

    #[allow(clippy::type_complexity)]
    fn fixed_marginals_raw(
        &self,
        d: usize,
        t: Option<T>,
    ) -> Result<((SdpSolution<T>, CertificateReport<T>), Variables)> {
        self.check_dim(d)?;
        let target = depolarizing_choi(DepolarizingParam(t.unwrap_or(T::zero())), d).into_op();
        let mut b = ProblemBuilder::new();
        let v = self.broadcast_problem(&mut b, d, true)?;
        for r in RECEIVERS {
            b.matrix_equal(&marginal_terms(&v, r, d), &target)?;
        }
        Ok((self.run(b)?, v))
    }

    /// Minimal overhead with each marginal within the given half diamond
    /// distance of the identity channel.
    pub fn approx_overhead(&self, thr: ErrorThresholds<T>, d: usize) -> Result<OverheadResult<T>> {
        self.check_dim(d)?;
        let g = gamma_operator::<T>(d);
        let mut b = ProblemBuilder::new();
        let v = self.broadcast_problem(&mut b, d, true)?;
        let pair = SubsystemDims::uniform(d, 2)?;
        for r in RECEIVERS {
            let eps = thr.get(r);
            if eps == T::zero() {
                // no interior point exists for a zero norm ball
                b.matrix_equal(&marginal_terms(&v, r, d), &g)?;
                continue;
            }
            // Z ⪰ Tr_other(J¹ − J²) − Γ and eps·I ⪰ Tr_{B_r} Z
            let z = b.psd("Z", d * d);
            let [m1, m2] = marginal_terms(&v, r, d);
            let neg = |t: MapTerm<T>| match t {
                MapTerm::Trace {
                    block,
                    layout,
                    drop,
                    coef,
                } => MapTerm::Trace {
                    block,
                    layout,
                    drop,
                    coef: -coef,
                },
                other => other,
            };
            b.matrix_ge(
                &[MapTerm::block(z, d * d, T::one()), neg(m1), neg(m2)],
                &g.scale(-T::one()),
            )?;
            b.matrix_ge(
                &[MapTerm::partial_trace(z, &pair, &[1], -T::one())],
                &Hermitian::identity(d).scale(-eps),
            )?;
        }
        let sol = self.run(b)?;
        self.overhead(sol, &v, d, &SubsystemDims::uniform(d, 2)?, None)
    }

    /// Balanced problem restricted to depolarizing marginals with
    /// `t = min(δd²/(d²−1), 1)`.
    pub fn approx_overhead_dep(&self, delta: T, d: usize) -> Result<OverheadResult<T>> {
        if !(delta >= T::zero() && delta <= T::one()) {
            return Err(Error::InvalidArgument(format!("error {delta} outside [0, 1]")));
        }
        let t = DepolarizingParam::<T>::from_error(delta, d).0.min(T::one());
        self.fixed_marginals(d, Some(t))
    }

    /// Optimal overhead for marginals fixed to `Λ^t`; `None` when the
    /// solver certifies infeasibility.
    pub fn z_function(&self, t: T, d: usize) -> Result<Option<OverheadResult<T>>> {
        let (sol, v) = self.fixed_marginals_raw(d, Some(t))?;
        if sol.0.status == SolveStatus::PrimalInfeasible {
            return Ok(None);
        }
        self.overhead(sol, &v, d, &SubsystemDims::uniform(d, 2)?, Some(t))
            .map(Some)
    }

    /// Smallest balanced error reachable with sampling overhead at most
    /// `gamma`. The budget `(x+y)² ≤ γ` enters as `x + y ≤ √γ`.
    pub fn min_error(&self, gamma: T, d: usize) -> Result<TradeoffPoint<T>> {
        self.check_dim(d)?;
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("budget {gamma} must be positive")));
        }
        let dd = T::of(d * d);
        let per_delta = dd / (dd - T::one());
        let g = gamma_operator::<T>(d);
        // Λ^t = Γ − t(Γ − I/d)
        let shift = g
            .sub(&Hermitian::identity(d * d).scale(T::one() / T::of(d)))
            .scale(per_delta);
        let mut b = ProblemBuilder::new();
        let v = self.broadcast_problem(&mut b, d, false)?;
        let delta = b.scalar("delta");
        b.minimize_scalar(delta, T::one())?;
        b.scalar_le(&[(v.x, T::one()), (v.y, T::one())], gamma.sqrt())?;
        for r in RECEIVERS {
            let [m1, m2] = marginal_terms(&v, r, d);
            b.matrix_equal(&[m1, m2, MapTerm::scalar(delta, shift.clone())], &g)?;
        }
        let (sol, certificate) = self.run(b)?;
        match sol.status {
            SolveStatus::Optimal => {
                let mu = sol.scalar(delta.index());
                Ok(TradeoffPoint {
                    gamma,
                    d,
                    mu: Some(mu),
                    t: Some(mu * per_delta),
                    decomposition: Some(self.extract(&sol, &v, d, &SubsystemDims::uniform(d, 2)?)?),
                    status: sol.status,
                    gap: sol.gap,
                    certificate,
                })
            }
            SolveStatus::PrimalInfeasible => Ok(TradeoffPoint {
                gamma,
                d,
                mu: None,
                t: None,
                decomposition: None,
                status: sol.status,
                gap: sol.gap,
                certificate,
            }),
            other => Err(Error::Solver(format!("budget SDP ended with status {other}"))),
        }
    }
}

pub fn overhead_of_map(j: &ChoiOperator<f64>) -> Result<OverheadResult<f64>> {
    BroadcastSdp::default().overhead_of_map(j)
}

pub fn exact_overhead(d: usize) -> Result<OverheadResult<f64>> {
    BroadcastSdp::default().exact_overhead(d)
}

pub fn approx_overhead(thr: ErrorThresholds<f64>, d: usize) -> Result<OverheadResult<f64>> {
    BroadcastSdp::default().approx_overhead(thr, d)
}

pub fn approx_overhead_dep(delta: f64, d: usize) -> Result<OverheadResult<f64>> {
    BroadcastSdp::default().approx_overhead_dep(delta, d)
}

pub fn z_function(t: f64, d: usize) -> Result<Option<OverheadResult<f64>>> {
    BroadcastSdp::default().z_function(t, d)
}

pub fn min_error(gamma: f64, d: usize) -> Result<TradeoffPoint<f64>> {
    BroadcastSdp::default().min_error(gamma, d)
}

/// Closed-form optimum of the exact problem, `(3d−1)/(d+1)`.
pub fn exact_overhead_formula<T: Real>(d: usize) -> T {
    let d = T::of(d);
    (T::lit(3.0) * d - T::one()) / (d + T::one())
}

/// `((d²−1)/d²)·(3−√γ)/4`, clamped below at zero.
pub fn mu_upper_bound<T: Real>(gamma: T, d: usize) -> T {
    let dd = T::of(d * d);
    ((dd - T::one()) / dd * mu_upper_bound_any_dim(gamma)).max(T::zero())
}

/// Dimension-free cap `(3−√γ)/4`, clamped below at zero.
pub fn mu_upper_bound_any_dim<T: Real>(gamma: T) -> T {
    ((T::lit(3.0) - gamma.sqrt()) / T::lit(4.0)).max(T::zero())
}

/// Checks of the explicit feasible point.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityReport<T: Real> {
    /// Smallest eigenvalue over both parts.
    pub min_eigenvalue: T,
    /// Deviation of `Tr_out J¹`, `Tr_out J²` from `xI`, `yI`.
    pub weight_residual: T,
    /// Deviation of both marginals from `Λ^t`.
    pub marginal_residual: T,
    pub t: T,
    pub passed: bool,
}

/// Discard-and-prepare construction reaching error
/// `((d²−1)/d²)(3−√γ)/4` with overhead exactly `γ`, for `1 ≤ γ ≤ 9`.
pub fn discard_prepare_point<T: Real>(
    gamma: T,
    d: usize,
    tol: T,
) -> Result<(BroadcastDecomposition<T>, T, FeasibilityReport<T>)> {
    if !(gamma >= T::one() && gamma <= T::lit(9.0)) {
        return Err(Error::InvalidArgument(format!("budget {gamma} outside [1, 9]")));
    }
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension {d} < 2")));
    }
    let l3 = SubsystemDims::uniform(d, 3)?;
    let sg = gamma.sqrt();
    let inv_d = T::one() / T::of(d);
    let g = gamma_operator::<T>(d).scale(inv_d);
    let g_bb1 = g.embed(&[0, 1], &l3)?;
    let g_bb2 = g.embed(&[0, 2], &l3)?;
    let g_b1b2 = g.embed(&[1, 2], &l3)?;
    let four = T::lit(4.0);
    let two = T::lit(2.0);
    let j1 = g_bb1.add(&g_bb2).scale((sg + T::one()) / four);
    let j2 = g_b1b2.scale((sg - T::one()) / two);
    let x = (sg + T::one()) / two;
    let y = (sg - T::one()) / two;
    let dec = BroadcastDecomposition::new(ChoiOperator::broadcast(j1, d)?, ChoiOperator::broadcast(j2, d)?, x, y)?;

    let t = (T::lit(3.0) - sg) / four;
    let delta = DepolarizingParam(t).error(d);
    let min_eig = dec.j1.op().min_eigenvalue()?.min(dec.j2.op().min_eigenvalue()?);
    let mut weight = T::zero();
    for (part, w) in [(&dec.j1, x), (&dec.j2, y)] {
        weight = weight.max(
            part.output_trace()
                .sub(&Hermitian::identity(d).scale(w))
                .frobenius_norm(),
        );
    }
    let target = depolarizing_choi(DepolarizingParam(t), d);
    let combined = dec.combined();
    let mut marginal = T::zero();
    for r in RECEIVERS {
        let m = crate::channels::marginal_choi(&combined, r)?;
        marginal = marginal.max(m.op().sub(target.op()).frobenius_norm());
    }
    let report = FeasibilityReport {
        min_eigenvalue: min_eig,
        weight_residual: weight,
        marginal_residual: marginal,
        t,
        passed: min_eig >= -tol && weight <= tol && marginal <= tol,
    };
    Ok((dec, delta, report))
}
