use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;
use vbcast_core::broadcasting::{discard_prepare_point, BroadcastSdp, ErrorThresholds};
use vbcast_core::channels::Receiver;
use vbcast_core::linalg::{Density, Hermitian};
use vbcast_core::sdp::{SolveStatus, SolverConfig};
use vbcast_core::simulator::{naive_baseline, required_samples, Observable, ProtocolModel};
use vbcast_core::verify::Verifier;

use crate::args::{Cli, Command};
use crate::record::{write_records, OutputFormat, RecordStatus, SweepRecord};
use crate::CliError;

/// Validated settings of one invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub seed: u64,
    pub solver: SolverConfig<f64>,
    pub jobs: Option<usize>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn check_dim(d: usize) -> Result<(), CliError> {
    if d < 2 {
        return Err(usage(format!("dimension must be at least 2, got {d}")));
    }
    Ok(())
}

impl RunConfig {
    /// `out_dir` is the value of the output-directory environment variable.
    pub fn from_cli(cli: Cli, out_dir: Option<PathBuf>) -> Result<Self, CliError> {
        let c = cli.common;
        for (name, v) in [("--tol-gap", c.tol_gap), ("--tol-feas", c.tol_feas)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(usage(format!("{name} must be positive, got {v}")));
            }
        }
        if c.jobs == Some(0) {
            return Err(usage("--jobs must be at least 1"));
        }
        let solver = SolverConfig {
            tol_gap: c.tol_gap,
            tol_feas: c.tol_feas,
            max_iter: c.max_iter,
            allow_large: c.allow_large_dim,
            ..SolverConfig::default()
        };
        solver.validate()?;
        match &cli.command {
            Command::Exact { dim, dims } => {
                check_dim(*dim)?;
                dims.iter().try_for_each(|&d| check_dim(d))?;
            }
            Command::SweepAb { dim, grid } => {
                check_dim(*dim)?;
                if *grid < 2 {
                    return Err(usage(format!("--grid must be at least 2, got {grid}")));
                }
            }
            Command::MinError { gamma, dim } => {
                check_dim(*dim)?;
                if !(*gamma > 0.0 && gamma.is_finite()) {
                    return Err(usage(format!("--gamma must be positive, got {gamma}")));
                }
            }
            Command::Tradeoff { gammas, dims } => {
                if gammas.is_empty() || dims.is_empty() {
                    return Err(usage("--gammas and --dims must be non-empty"));
                }
                dims.iter().try_for_each(|&d| check_dim(d))?;
                if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
                    return Err(usage(format!("budgets must be positive, got {g}")));
                }
            }
            Command::Verify => {}
            Command::Simulate {
                dim,
                gamma,
                delta,
                shots,
                ..
            } => {
                check_dim(*dim)?;
                if *shots < 2 {
                    return Err(usage("--shots must be at least 2"));
                }
                if let Some(g) = gamma {
                    if !(1.0..=9.0).contains(g) {
                        return Err(usage(format!("--gamma must lie in [1, 9], got {g}")));
                    }
                }
                if let Some(dl) = delta {
                    if !(0.0..=1.0).contains(dl) {
                        return Err(usage(format!("--delta must lie in [0, 1], got {dl}")));
                    }
                }
            }
        }
        let format: OutputFormat = c.format.into();
        let out = c
            .out
            .or_else(|| out_dir.map(|dir| dir.join(format!("{}.{}", command_name(&cli.command), format.extension()))));
        Ok(Self {
            command: cli.command,
            out,
            format,
            seed: c.seed,
            solver,
            jobs: c.jobs,
        })
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Exact { .. } => "exact",
        Command::SweepAb { .. } => "sweep-ab",
        Command::MinError { .. } => "min-error",
        Command::Tradeoff { .. } => "tradeoff",
        Command::Verify => "verify",
        Command::Simulate { .. } => "simulate",
    }
}

fn status_of(s: SolveStatus) -> Result<RecordStatus, CliError> {
    match s {
        SolveStatus::Optimal => Ok(RecordStatus::Optimal),
        SolveStatus::PrimalInfeasible | SolveStatus::DualInfeasible => Ok(RecordStatus::Infeasible),
        SolveStatus::MaxIterations => Ok(RecordStatus::MaxIterations),
        SolveStatus::NumericalFailure => Err(vbcast_core::Error::Solver("numerical failure".into()).into()),
    }
}

/// Runs one command. Summaries go to `console`; tables go to the configured
/// file, or to `console` when there is none.
pub fn dispatch(cfg: &RunConfig, console: &mut impl Write) -> Result<(), CliError> {
    let sdp = BroadcastSdp::new(cfg.solver);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| usage(format!("thread pool: {e}")))?;

    let records = match &cfg.command {
        Command::Exact { dim, dims } => {
            let list = if dims.is_empty() { vec![*dim] } else { dims.clone() };
            let mut rows = Vec::new();
            for d in list {
                let start = Instant::now();
                let r = sdp.exact_overhead(d)?;
                writeln!(console, "d={d} nu={:.6} s={:.6}", r.nu, r.s)?;
                rows.push(SweepRecord {
                    nu: Some(r.nu),
                    s: Some(r.s),
                    gap: Some(r.gap),
                    seconds: Some(start.elapsed().as_secs_f64()),
                    ..SweepRecord::empty(d, RecordStatus::Optimal)
                });
            }
            if cfg.out.is_none() {
                return Ok(());
            }
            rows
        }
        Command::SweepAb { dim, grid } => {
            let axis: Vec<f64> = (0..*grid).map(|k| k as f64 / (*grid - 1) as f64).collect();
            let cells: Vec<(f64, f64)> = axis.iter().flat_map(|&a| axis.iter().map(move |&b| (a, b))).collect();
            pool.install(|| {
                cells
                    .par_iter()
                    .map(|&(a, b)| {
                        let start = Instant::now();
                        let r = sdp.approx_overhead(ErrorThresholds::new(a, b)?, *dim)?;
                        Ok(SweepRecord {
                            a: Some(a),
                            b: Some(b),
                            nu: Some(r.nu),
                            s: Some(r.s),
                            gap: Some(r.gap),
                            seconds: Some(start.elapsed().as_secs_f64()),
                            ..SweepRecord::empty(*dim, RecordStatus::Optimal)
                        })
                    })
                    .collect::<Result<Vec<_>, CliError>>()
            })?
        }
        Command::MinError { gamma, dim } => {
            let start = Instant::now();
            let row = min_error_record(&sdp, *gamma, *dim, start)?;
            match row.mu {
                Some(mu) => writeln!(
                    console,
                    "gamma={gamma} d={dim} mu={mu:.6} t={:.6} status={}",
                    row.t.unwrap_or(f64::NAN),
                    row.status
                )?,
                None => writeln!(console, "gamma={gamma} d={dim} mu=none status={}", row.status)?,
            }
            if cfg.out.is_none() {
                return Ok(());
            }
            vec![row]
        }
        Command::Tradeoff { gammas, dims } => {
            let pairs: Vec<(f64, usize)> = gammas.iter().flat_map(|&g| dims.iter().map(move |&d| (g, d))).collect();
            pool.install(|| {
                pairs
                    .par_iter()
                    .map(|&(g, d)| min_error_record(&sdp, g, d, Instant::now()))
                    .collect::<Result<Vec<_>, CliError>>()
            })?
        }
        Command::Verify => {
            let mut v = Verifier::new(cfg.solver);
            let outcomes = v.run_all();
            for o in &outcomes {
                writeln!(console, "{o}")?;
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            writeln!(
                console,
                "{} of {} criteria passed",
                outcomes.len() - failed,
                outcomes.len()
            )?;
            if failed > 0 {
                return Err(CliError::VerifyFailed {
                    failed,
                    total: outcomes.len(),
                });
            }
            return Ok(());
        }
        Command::Simulate {
            dim,
            gamma,
            delta,
            shots,
            receiver,
        } => return simulate(cfg, &sdp, *dim, *gamma, *delta, *shots, *receiver, console),
    };

    match &cfg.out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            let mut w = BufWriter::new(File::create(path)?);
            write_records(&records, cfg.format, &mut w)?;
            w.flush()?;
            writeln!(console, "wrote {} records to {}", records.len(), path.display())?;
        }
        None => write_records(&records, cfg.format, console)?,
    }
    Ok(())
}

fn min_error_record(sdp: &BroadcastSdp<f64>, gamma: f64, d: usize, start: Instant) -> Result<SweepRecord, CliError> {
    let p = sdp.min_error(gamma, d)?;
    let status = status_of(p.status)?;
    Ok(SweepRecord {
        gamma: Some(gamma),
        mu: p.mu,
        t: p.t,
        gap: p.mu.map(|_| p.gap),
        seconds: Some(start.elapsed().as_secs_f64()),
        ..SweepRecord::empty(d, status)
    })
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    cfg: &RunConfig,
    sdp: &BroadcastSdp<f64>,
    d: usize,
    gamma: Option<f64>,
    delta: Option<f64>,
    shots: u64,
    receiver: u8,
    console: &mut impl Write,
) -> Result<(), CliError> {
    let (dec, source) = match delta {
        Some(dl) => (
            sdp.approx_overhead(ErrorThresholds::balanced(dl)?, d)?.decomposition,
            format!("optimal decomposition at delta={dl}"),
        ),
        None => {
            let g = gamma.unwrap_or(2.0);
            (
                discard_prepare_point(g, d, 1e-10)?.0,
                format!("discard-and-prepare decomposition at gamma={g}"),
            )
        }
    };
    let mut diag = vec![0.0; d];
    diag[0] = 1.0;
    diag[1] = -1.0;
    let obs = Observable::new(Hermitian::from_real_diag(&diag))?;
    let rho = Density::basis(d, 0);
    let recv = if receiver == 1 {
        Receiver::First
    } else {
        Receiver::Second
    };
    let model = ProtocolModel::new(&dec, &rho, &obs, recv)?;
    let est = model.run(shots, cfg.seed)?;
    let naive = naive_baseline(&rho, &obs, shots, cfg.seed)?;
    let budget = required_samples(obs.range(), model.scale(), 0.01, 0.05)?;

    let summary = json!({
        "source": source,
        "d": d,
        "receiver": receiver,
        "shots": est.shots,
        "seed": est.seed,
        "mean": est.mean,
        "standard_error": est.standard_error(),
        "analytic_mean": model.expectation(),
        "ideal_mean": obs.expectation(rho.op()),
        "scale": est.scale,
        "plus_shots": est.plus_shots,
        "minus_shots": est.minus_shots,
        "second_moment": est.second_moment,
        "naive_mean": naive.mean,
        "naive_second_moment": naive.second_moment,
        "hoeffding_shots_eps_0.01": budget.n,
    });
    writeln!(console, "{source}")?;
    writeln!(
        console,
        "mean={:.6} se={:.2e} analytic={:.6} ideal={:.6}",
        est.mean,
        est.standard_error(),
        model.expectation(),
        obs.expectation(rho.op())
    )?;
    writeln!(
        console,
        "scale={:.6} plus={} minus={} second_moment_ratio={:.4}",
        est.scale,
        est.plus_shots,
        est.minus_shots,
        est.second_moment / naive.second_moment
    )?;
    writeln!(console, "hoeffding shots for eps=0.01 at 95%: {}", budget.n)?;
    if let Some(path) = &cfg.out {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &summary).map_err(|e| CliError::Io(e.into()))?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(())
}
