//! Acceptance checks, one function per numbered criterion.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::broadcasting::{
    discard_prepare_point, exact_overhead_formula, mu_upper_bound, mu_upper_bound_any_dim, BroadcastSdp,
    ErrorThresholds, CERTIFICATE_TOL,
};
use crate::channels::{depolarizing_choi, identity_choi, DepolarizingParam, Receiver};
use crate::diamond::{diamond_problem, half_diamond_distance, identity_minus_replacement, lower_bound_by_states};
use crate::error::Result;
use crate::linalg::Density;
use crate::sdp::{check_certificate, solve, CertificateReport, SolverConfig};
use crate::simulator::{naive_baseline, Observable, ProtocolModel};

pub const CRITERIA: usize = 11;

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionOutcome {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:>2} {}: {}", self.id, self.title, self.detail)
    }
}

/// Runs the criteria and keeps the certificate of every optimal solve for
/// the final certification check.
pub struct Verifier {
    sdp: BroadcastSdp<f64>,
    certificates: Vec<(String, CertificateReport<f64>)>,
}

impl Default for Verifier {
    fn default() -> Self {
        Self::new(SolverConfig::default())
    }
}

struct Check {
    ok: bool,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self {
            ok: true,
            notes: Vec::new(),
        }
    }

    fn expect(&mut self, ok: bool, note: String) {
        if !ok {
            self.ok = false;
            self.notes.push(format!("VIOLATED {note}"));
        } else {
            self.notes.push(note);
        }
    }
}

impl Verifier {
    pub fn new(config: SolverConfig<f64>) -> Self {
        Self {
            sdp: BroadcastSdp::new(config),
            certificates: Vec::new(),
        }
    }

    pub fn certificates(&self) -> &[(String, CertificateReport<f64>)] {
        &self.certificates
    }

    fn keep(&mut self, label: String, c: &CertificateReport<f64>) {
        self.certificates.push((label, c.clone()));
    }

    pub fn title(id: usize) -> &'static str {
        match id {
            1 => "exact overhead",
            2 => "replacement channel diamond norm",
            3 => "depolarizing difference norm",
            4 => "depolarizing reduction",
            5 => "qubit trade-off anchors",
            6 => "explicit feasible point",
            7 => "Z(t) monotone and convex",
            8 => "S(a,b) symmetric and convex",
            9 => "sample efficiency landscape",
            10 => "simulator statistics",
            11 => "solver certification",
            _ => "unknown",
        }
    }

    pub fn run(&mut self, id: usize) -> CriterionOutcome {
        let result = match id {
            1 => self.exact_overhead(),
            2 => self.replacement_norm(),
            3 => self.depolarizing_norm(),
            4 => self.reduction(),
            5 => self.tradeoff_anchors(),
            6 => self.feasible_point(),
            7 => self.z_properties(),
            8 => self.ab_properties(),
            9 => self.se_landscape(),
            10 => self.simulation(),
            11 => self.certification(),
            _ => Ok(Check {
                ok: false,
                notes: vec![format!("no criterion {id}")],
            }),
        };
        let (passed, detail) = match result {
            Ok(c) => (c.ok, c.notes.join("; ")),
            Err(e) => (false, format!("error: {e}")),
        };
        CriterionOutcome {
            id,
            title: Self::title(id),
            passed,
            detail,
        }
    }

    pub fn run_all(&mut self) -> Vec<CriterionOutcome> {
        (1..=CRITERIA).map(|i| self.run(i)).collect()
    }

    fn exact_overhead(&mut self) -> Result<Check> {
        let mut c = Check::new();
        for d in [2, 3, 4] {
            let r = self.sdp.exact_overhead(d)?;
            self.keep(format!("exact d={d}"), &r.certificate);
            let want = exact_overhead_formula::<f64>(d);
            c.expect(
                (r.nu - want).abs() <= 1e-5,
                format!("d={d} nu={:.9} want {want:.9}", r.nu),
            );
            c.expect(!r.sample_efficient(), format!("d={d} s={:.6} not SE", r.s));
        }
        Ok(c)
    }

    fn replacement_norm(&mut self) -> Result<Check> {
        let mut c = Check::new();
        for d in [2, 3, 4] {
            let j = identity_minus_replacement::<f64>(d);
            let r = half_diamond_distance(&j)?;
            self.keep(format!("diamond id-R d={d}"), &r.certificate);
            let want = 1.0 - 1.0 / (d * d) as f64;
            c.expect(
                (r.value - want).abs() <= 1e-6,
                format!("d={d} value={:.9} want {want:.9}", r.value),
            );
            let lb = lower_bound_by_states(&j, 1, 0)?;
            c.expect((lb - want).abs() <= 1e-6, format!("d={d} state bound={lb:.9}"));
            c.expect(
                r.value >= r.lower_bound - 1e-6,
                format!("d={d} sampled bound={:.9}", r.lower_bound),
            );
        }
        Ok(c)
    }

    fn depolarizing_norm(&mut self) -> Result<Check> {
        let mut c = Check::new();
        let d = 2;
        for t in [-0.5, 0.3, 1.0] {
            let j = depolarizing_choi(DepolarizingParam(t), d).sub(&identity_choi(d))?;
            let r = half_diamond_distance(&j)?;
            self.keep(format!("diamond dep t={t}"), &r.certificate);
            let want = DepolarizingParam(t).error(d);
            c.expect(
                (r.value - want).abs() <= 1e-6,
                format!("t={t} value={:.9} want {want:.9}", r.value),
            );
        }
        Ok(c)
    }

    fn reduction(&mut self) -> Result<Check> {
        let mut c = Check::new();
        for delta in [0.0, 0.05, 0.1, 0.2, 0.5] {
            let full = self.sdp.approx_overhead(ErrorThresholds::balanced(delta)?, 2)?;
            let dep = self.sdp.approx_overhead_dep(delta, 2)?;
            self.keep(format!("approx delta={delta}"), &full.certificate);
            self.keep(format!("dep delta={delta}"), &dep.certificate);
            c.expect(
                (full.nu - dep.nu).abs() <= 1e-5,
                format!("delta={delta} full={:.9} dep={:.9}", full.nu, dep.nu),
            );
        }
        Ok(c)
    }

    fn tradeoff_anchors(&mut self) -> Result<Check> {
        let mut c = Check::new();
        let mu = |v: &mut Self, g: f64, d: usize| -> Result<Option<f64>> {
            let p = v.sdp.min_error(g, d)?;
            v.keep(format!("min_error gamma={g} d={d}"), &p.certificate);
            Ok(p.mu)
        };
        let m1 = mu(self, 1.0, 2)?;
        c.expect(m1.is_some_and(|m| (m - 0.25).abs() <= 5e-3), format!("mu(1,2)={m1:?}"));
        let m18 = mu(self, 1.8, 2)?;
        c.expect(
            m18.is_some_and(|m| (m - 0.12).abs() <= 0.02),
            format!("mu(1.8,2)={m18:?}"),
        );
        for d in [2, 3, 4] {
            let (a, b) = (mu(self, 1.0, d)?, mu(self, 1.8, d)?);
            let ok = matches!((a, b), (Some(a), Some(b)) if a >= b - 1e-9);
            c.expect(ok, format!("d={d} mu(1)={a:?} >= mu(1.8)={b:?}"));
        }
        Ok(c)
    }

    fn feasible_point(&mut self) -> Result<Check> {
        let mut c = Check::new();
        for gamma in [1.0, 1.5, 2.0] {
            for d in [2, 3] {
                let (_, delta, rep) = discard_prepare_point(gamma, d, 1e-10)?;
                c.expect(
                    rep.passed,
                    format!(
                        "gamma={gamma} d={d} min_eig={:.2e} weights={:.1e} marginals={:.1e}",
                        rep.min_eigenvalue, rep.weight_residual, rep.marginal_residual
                    ),
                );
                let p = self.sdp.min_error(gamma, d)?;
                self.keep(format!("min_error gamma={gamma} d={d}"), &p.certificate);
                let bound = mu_upper_bound(gamma, d);
                c.expect((delta - bound).abs() <= 1e-12, format!("construction error {delta:.9}"));
                let ok =
                    p.mu.is_some_and(|m| m <= bound + 1e-6 && m <= mu_upper_bound_any_dim(gamma) + 1e-6);
                c.expect(ok, format!("mu({gamma},{d})={:?} <= {bound:.9}", p.mu));
            }
        }
        Ok(c)
    }

    fn z_at(&mut self, t: f64) -> Result<Option<f64>> {
        let z = self.sdp.z_function(t, 2)?;
        Ok(z.map(|r| {
            self.keep(format!("Z({t})"), &r.certificate);
            r.nu
        }))
    }

    fn z_properties(&mut self) -> Result<Check> {
        let mut c = Check::new();
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let mut z = Vec::new();
        for &t in &grid {
            match self.z_at(t)? {
                Some(v) => z.push(v),
                None => {
                    c.expect(false, format!("Z({t}) reported infeasible"));
                    return Ok(c);
                }
            }
        }
        let worst_mono = z.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        c.expect(worst_mono <= 1e-6, format!("largest increase {worst_mono:.2e}"));
        let worst_conv = z
            .windows(3)
            .map(|w| w[1] - 0.5 * (w[0] + w[2]))
            .fold(f64::NEG_INFINITY, f64::max);
        c.expect(worst_conv <= 1e-6, format!("largest convexity defect {worst_conv:.2e}"));
        let z1 = z[10];
        c.expect((z1 - 1.0).abs() <= 1e-8, format!("Z(1)={z1:.12}"));
        for t in [0.2, 0.5, 0.8] {
            let pos = self.z_at(t)?;
            let neg = self.z_at(-t)?;
            let ok = matches!((pos, neg), (Some(p), Some(n)) if p <= n + 1e-6);
            c.expect(ok, format!("Z({t})={pos:?} <= Z(-{t})={neg:?}"));
        }
        Ok(c)
    }

    fn s_tilde(&mut self, a: f64, b: f64) -> Result<f64> {
        let r = self.sdp.approx_overhead(ErrorThresholds::new(a, b)?, 2)?;
        self.keep(format!("approx a={a} b={b}"), &r.certificate);
        Ok(r.nu)
    }

    fn ab_properties(&mut self) -> Result<Check> {
        let mut c = Check::new();
        let n = 9;
        let axis: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
        let mut grid = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                grid[i * n + j] = self.s_tilde(axis[i], axis[j])?;
            }
        }
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                asym = asym.max((grid[i * n + j] - grid[j * n + i]).abs());
            }
        }
        c.expect(asym <= 1e-5, format!("largest asymmetry {asym:.2e}"));
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let cells: Vec<usize> = (0..n * n).collect();
        let mut worst: f64 = f64::NEG_INFINITY;
        for _ in 0..50 {
            let pick: Vec<usize> = cells.choose_multiple(&mut rng, 2).copied().collect();
            let (p, q) = (pick[0], pick[1]);
            let (a, b) = (axis[p / n], axis[p % n]);
            let (a2, b2) = (axis[q / n], axis[q % n]);
            let mid = self.s_tilde(0.5 * (a + a2), 0.5 * (b + b2))?;
            worst = worst.max(mid - 0.5 * (grid[p] + grid[q]));
        }
        c.expect(
            worst <= 1e-5,
            format!("largest midpoint excess over 50 pairs {worst:.2e}"),
        );
        Ok(c)
    }

    fn se_landscape(&mut self) -> Result<Check> {
        let mut c = Check::new();
        let lo = self.sdp.approx_overhead(ErrorThresholds::balanced(0.15)?, 2)?;
        let hi = self.sdp.approx_overhead(ErrorThresholds::balanced(0.05)?, 2)?;
        self.keep("approx delta=0.15".into(), &lo.certificate);
        self.keep("approx delta=0.05".into(), &hi.certificate);
        c.expect(lo.s < 2.0 - 1e-4, format!("s(0.15)={:.6}", lo.s));
        c.expect(hi.s >= 2.0 + 1e-4, format!("s(0.05)={:.6}", hi.s));
        Ok(c)
    }

    fn simulation(&mut self) -> Result<Check> {
        let mut c = Check::new();
        let (dec, delta, _) = discard_prepare_point(2.0, 2, 1e-10)?;
        let rho = Density::basis(2, 0);
        let z = Observable::pauli_z();
        let model = ProtocolModel::new(&dec, &rho, &z, Receiver::First)?;
        let shots = 1_000_000;
        let est = model.run(shots, 42)?;
        let se = est.standard_error();
        let t = (3.0 - 2f64.sqrt()) / 4.0;
        let closed = 1.0 - t;
        c.expect(
            (est.mean - closed).abs() <= 5.0 * se,
            format!("mean={:.6} closed form={closed:.6} se={se:.2e}", est.mean),
        );
        let bias = (est.mean - z.expectation(rho.op())).abs();
        c.expect(
            bias <= z.norm() * 2.0 * delta + 5.0 * se,
            format!("bias={bias:.4} bound={:.4}", z.norm() * 2.0 * delta),
        );
        let naive = naive_baseline(&rho, &z, shots, 42)?;
        let ratio = est.second_moment / naive.second_moment;
        let nu2 = model.scale().powi(2);
        c.expect(
            (ratio / nu2 - 1.0).abs() <= 0.1,
            format!("second moment ratio={ratio:.4} nu^2={nu2:.4}"),
        );
        Ok(c)
    }

    fn certification(&mut self) -> Result<Check> {
        let mut c = Check::new();
        let total = self.certificates.len();
        let failing: Vec<&str> = self
            .certificates
            .iter()
            .filter(|(_, r)| r.passed == Some(false))
            .map(|(l, _)| l.as_str())
            .collect();
        let worst = self
            .certificates
            .iter()
            .filter(|(_, r)| r.passed.is_some())
            .map(|(_, r)| r.worst())
            .fold(0.0, f64::max);
        c.expect(total > 0, format!("{total} certified solves"));
        c.expect(
            failing.is_empty(),
            format!("failing: {:?}; worst violation {worst:.2e}", failing),
        );
        let (p, _, _) = diamond_problem(&identity_minus_replacement::<f64>(2))?;
        let mut sol = solve(&p, &SolverConfig::default())?;
        let clean = check_certificate(&p, &sol, CERTIFICATE_TOL);
        sol.x = sol.x.iter().map(|x| x.scale(1.01)).collect();
        let corrupted = check_certificate(&p, &sol, CERTIFICATE_TOL);
        c.expect(clean.passed == Some(true), "clean solution certified".into());
        c.expect(
            corrupted.passed == Some(false),
            format!(
                "corrupted solution rejected, primal residual {:.2e}",
                corrupted.primal_residual
            ),
        );
        Ok(c)
    }
}
