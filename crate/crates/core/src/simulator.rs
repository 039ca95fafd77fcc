//! Monte Carlo execution of a virtual broadcasting protocol.
//!
//! Each shot draws the positive part with probability `x/(x+y)`, applies the
//! normalized channel, measures the observable on the requested receiver and
//! records `±(x+y)·λ`. Shots are processed in fixed-size chunks, chunk `k`
//! drawing from stream `k` of a ChaCha8 generator seeded with the run seed,
//! and chunk sums are combined in chunk order. The result is therefore
//! identical for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::{apply_choi, marginal_choi, BroadcastDecomposition, ChoiOperator, Receiver};
use crate::error::{Error, Result};
use crate::linalg::{Density, Hermitian, Spectrum};

const CHUNK: u64 = 1 << 16;
const MERGE_TOL: f64 = 1e-10;
const PROB_TOL: f64 = 1e-9;

/// Observable measured by projecting onto its eigenspaces.
#[derive(Clone, Debug)]
pub struct Observable {
    op: Hermitian<f64>,
    spectrum: Spectrum<f64>,
    outcomes: Vec<(f64, Hermitian<f64>)>,
}

impl Observable {
    pub fn new(op: Hermitian<f64>) -> Result<Self> {
        let spectrum = op.eig()?;
        let n = op.dim();
        let mut outcomes: Vec<(f64, Hermitian<f64>)> = Vec::new();
        let vecs = &spectrum.eigenvectors;
        for (k, &lam) in spectrum.eigenvalues.iter().enumerate() {
            let col = vecs.column(k);
            let proj = Hermitian::outer(&col);
            match outcomes.last_mut() {
                Some((v, p)) if (lam - *v).abs() <= MERGE_TOL => *p = p.add(&proj),
                _ => outcomes.push((lam, proj)),
            }
        }
        debug_assert!(outcomes.iter().map(|o| o.1.trace()).sum::<f64>() - n as f64 <= 1e-9);
        Ok(Self { op, spectrum, outcomes })
    }

    /// `diag(1, −1)`.
    pub fn pauli_z() -> Self {
        Self::new(Hermitian::from_real_diag(&[1.0, -1.0])).expect("diagonal")
    }

    pub fn identity(d: usize) -> Self {
        Self::new(Hermitian::identity(d)).expect("diagonal")
    }

    pub fn op(&self) -> &Hermitian<f64> {
        &self.op
    }

    pub fn spectrum(&self) -> &Spectrum<f64> {
        &self.spectrum
    }

    /// Distinct eigenvalues with their spectral projectors.
    pub fn outcomes(&self) -> &[(f64, Hermitian<f64>)] {
        &self.outcomes
    }

    /// `λ_max − λ_min`.
    pub fn range(&self) -> f64 {
        self.spectrum.max() - self.spectrum.min()
    }

    pub fn norm(&self) -> f64 {
        self.spectrum.operator_norm()
    }

    pub fn expectation(&self, state: &Hermitian<f64>) -> f64 {
        self.op.inner(state)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoeffdingBudget {
    pub m: f64,
    pub nu: f64,
    pub eps: f64,
    pub fail_prob: f64,
    /// `M²ν²/ε² · ln(2/fail_prob)` before rounding.
    pub raw: f64,
    pub n: u64,
}

/// Shots guaranteeing precision `eps` with probability `1 − fail_prob`.
pub fn required_samples(m: f64, nu: f64, eps: f64, fail_prob: f64) -> Result<HoeffdingBudget> {
    for (name, v) in [
        ("range", m),
        ("scale", nu),
        ("precision", eps),
        ("failure probability", fail_prob),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    if fail_prob >= 1.0 {
        return Err(Error::InvalidArgument(format!("failure probability {fail_prob} >= 1")));
    }
    let raw = m * m * nu * nu / (eps * eps) * (2.0 / fail_prob).ln();
    Ok(HoeffdingBudget {
        m,
        nu,
        eps,
        fail_prob,
        raw,
        n: raw.ceil() as u64,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolEstimate {
    pub mean: f64,
    pub sample_std: f64,
    /// Mean of the squared per-shot values.
    pub second_moment: f64,
    pub shots: u64,
    pub scale: f64,
    pub seed: u64,
    pub plus_shots: u64,
    pub minus_shots: u64,
}

impl ProtocolEstimate {
    pub fn standard_error(&self) -> f64 {
        self.sample_std / (self.shots as f64).sqrt()
    }
}

/// Outcome distribution of one sign branch.
#[derive(Clone, Debug)]
struct Branch {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Branch {
    fn new(obs: &Observable, state: &Hermitian<f64>) -> Result<Self> {
        let mut probs = Vec::with_capacity(obs.outcomes.len());
        for (_, p) in &obs.outcomes {
            let pr = p.inner(state);
            if pr < -PROB_TOL {
                return Err(Error::InvalidArgument(format!(
                    "negative outcome probability {pr}: branch is not a physical channel"
                )));
            }
            probs.push(pr.max(0.0));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument(format!("outcome probabilities sum to {total}")));
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p / total;
                acc
            })
            .collect();
        Ok(Self {
            values: obs.outcomes.iter().map(|o| o.0).collect(),
            cumulative,
        })
    }

    fn sample(&self, u: f64) -> f64 {
        let k = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.values.len() - 1);
        self.values[k]
    }

    fn mean(&self) -> f64 {
        self.weighted(|v| v)
    }

    fn second_moment(&self) -> f64 {
        self.weighted(|v| v * v)
    }

    fn weighted(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut prev = 0.0;
        let mut acc = 0.0;
        for (v, c) in self.values.iter().zip(&self.cumulative) {
            acc += (c - prev) * f(*v);
            prev = *c;
        }
        acc
    }
}

/// Precomputed sampling model of the virtual protocol.
#[derive(Clone, Debug)]
pub struct ProtocolModel {
    p_plus: f64,
    scale: f64,
    plus: Branch,
    minus: Option<Branch>,
}

fn receiver_state(part: &ChoiOperator<f64>, weight: f64, rho: &Density<f64>, r: Receiver) -> Result<Hermitian<f64>> {
    let channel = marginal_choi(part, r.other())?.scale(1.0 / weight);
    apply_choi(&channel, rho)
}

impl ProtocolModel {
    pub fn new(
        dec: &BroadcastDecomposition<f64>,
        rho: &Density<f64>,
        obs: &Observable,
        marginal: Receiver,
    ) -> Result<Self> {
        let d = dec.j1.in_dim();
        if rho.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rho.dim(),
            });
        }
        let kept = dec.j1.out_layout().dims()[marginal.factor() - 1];
        if obs.op.dim() != kept {
            return Err(Error::DimensionMismatch {
                expected: kept,
                found: obs.op.dim(),
            });
        }
        if !(dec.x > 0.0) || dec.y < 0.0 {
            return Err(Error::InvalidArgument(format!("weights x = {}, y = {}", dec.x, dec.y)));
        }
        let tiny = 1e-12;
        let plus = Branch::new(obs, &receiver_state(&dec.j1, dec.x, rho, marginal)?)?;
        let minus = if dec.y <= tiny {
            if dec.j2.op().frobenius_norm() > 1e-9 {
                return Err(Error::InvalidArgument(
                    "y = 0 but the negative part has nonzero weight".into(),
                ));
            }
            None
        } else {
            Some(Branch::new(obs, &receiver_state(&dec.j2, dec.y, rho, marginal)?)?)
        };
        let scale = dec.x + dec.y;
        Ok(Self {
            p_plus: if minus.is_some() { dec.x / scale } else { 1.0 },
            scale,
            plus,
            minus,
        })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    /// Exact mean of the per-shot estimator.
    pub fn expectation(&self) -> f64 {
        let minus = self.minus.as_ref().map_or(0.0, Branch::mean);
        self.scale * (self.p_plus * self.plus.mean() - (1.0 - self.p_plus) * minus)
    }

    /// Exact second moment of the per-shot estimator.
    pub fn second_moment(&self) -> f64 {
        let minus = self.minus.as_ref().map_or(0.0, Branch::second_moment);
        self.scale * self.scale * (self.p_plus * self.plus.second_moment() + (1.0 - self.p_plus) * minus)
    }

    pub fn variance(&self) -> f64 {
        self.second_moment() - self.expectation().powi(2)
    }

    fn shot(&self, rng: &mut ChaCha8Rng) -> (f64, bool) {
        let sign_u: f64 = rng.gen();
        let outcome_u: f64 = rng.gen();
        match &self.minus {
            Some(m) if sign_u >= self.p_plus => (-self.scale * m.sample(outcome_u), false),
            _ => (self.scale * self.plus.sample(outcome_u), true),
        }
    }

    pub fn run(&self, shots: u64, seed: u64) -> Result<ProtocolEstimate> {
        if shots == 0 {
            return Err(Error::InvalidArgument("at least one shot is required".into()));
        }
        let sums = chunked(shots, seed, |rng| self.shot(rng));
        Ok(summarize(sums, shots, self.scale, seed))
    }
}

#[derive(Clone, Copy, Default)]
struct Sums {
    total: f64,
    squares: f64,
    plus: u64,
}

fn chunked(shots: u64, seed: u64, shot: impl Fn(&mut ChaCha8Rng) -> (f64, bool) + Sync) -> Sums {
    let chunks = shots.div_ceil(CHUNK);
    let parts: Vec<Sums> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let n = CHUNK.min(shots - k * CHUNK);
            let mut s = Sums::default();
            for _ in 0..n {
                let (v, plus) = shot(&mut rng);
                s.total += v;
                s.squares += v * v;
                s.plus += plus as u64;
            }
            s
        })
        .collect();
    parts.iter().fold(Sums::default(), |a, b| Sums {
        total: a.total + b.total,
        squares: a.squares + b.squares,
        plus: a.plus + b.plus,
    })
}

fn summarize(s: Sums, shots: u64, scale: f64, seed: u64) -> ProtocolEstimate {
    let n = shots as f64;
    let mean = s.total / n;
    let second = s.squares / n;
    let var = if shots > 1 {
        ((second - mean * mean) * n / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    ProtocolEstimate {
        mean,
        sample_std: var.sqrt(),
        second_moment: second,
        shots,
        scale,
        seed,
        plus_shots: s.plus,
        minus_shots: shots - s.plus,
    }
}

pub fn run_protocol(
    dec: &BroadcastDecomposition<f64>,
    rho: &Density<f64>,
    obs: &Observable,
    marginal: Receiver,
    shots: u64,
    seed: u64,
) -> Result<ProtocolEstimate> {
    ProtocolModel::new(dec, rho, obs, marginal)?.run(shots, seed)
}

/// Direct measurement of `obs` on `rho`, the shots split between the two
/// receivers (the first takes the extra shot when `shots` is odd). Every
/// shot is drawn from the same distribution, so the estimate pools them.
pub fn naive_baseline(rho: &Density<f64>, obs: &Observable, shots: u64, seed: u64) -> Result<ProtocolEstimate> {
    if shots < 2 {
        return Err(Error::InvalidArgument(
            "the naive strategy needs at least two shots".into(),
        ));
    }
    if obs.op.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: obs.op.dim(),
        });
    }
    let branch = Branch::new(obs, rho.op())?;
    let sums = chunked(shots, seed, |rng| {
        let _sign: f64 = rng.gen();
        (branch.sample(rng.gen()), true)
    });
    Ok(summarize(sums, shots, 1.0, seed))
}

/// Exact per-shot second moment of direct measurement.
pub fn naive_second_moment(rho: &Density<f64>, obs: &Observable) -> Result<f64> {
    Ok(Branch::new(obs, rho.op())?.second_moment())
}
