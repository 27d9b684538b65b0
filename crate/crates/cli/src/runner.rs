//! Drives one scenario: evolution, diagnostics, CSV and summary output.

use std::collections::VecDeque;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use egm_core::diagnostics::{
    charge_conservation_residual, energy_momentum, first_law_residual, interaction_energy, poynting_residual,
    power_identities, wave_residual, Residual, ResidualSeries,
};
use egm_core::evolution::{step_rk4, united_field};
use egm_core::{AField, ChargeCurrent, Complex, EgmError, Nabla, SimState};
use serde::Serialize;

use crate::scenario::{exact_plane_wave, DiagnosticKind, DiagnosticSpec, Mode, Scenario};
use crate::{exit, RunError};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    /// Single-threaded, for byte-identical output.
    pub reference: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    ToleranceBreach,
    NumericalAbort { last_stable_tau: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticSummary {
    pub name: &'static str,
    pub samples: usize,
    pub max_linf: f64,
    pub final_linf: Option<f64>,
    pub final_l2: Option<f64>,
    pub tolerance: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InteractionSummary {
    pub delta_w: f64,
    pub exchange: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub mode: Mode,
    pub fields: usize,
    pub steps: usize,
    pub dtau: f64,
    pub tau_end: f64,
    pub threads: usize,
    pub wall_time_s: f64,
    pub status: RunStatus,
    pub diagnostics: Vec<DiagnosticSummary>,
    pub interaction_energy: Option<InteractionSummary>,
    #[serde(skip)]
    pub series: Vec<ResidualSeries<f64>>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            RunStatus::Ok => exit::OK,
            RunStatus::ToleranceBreach => exit::TOLERANCE,
            RunStatus::NumericalAbort { .. } => exit::ABORT,
        }
    }

    pub fn series(&self, kind: DiagnosticKind) -> Option<&ResidualSeries<f64>> {
        self.series.iter().find(|s| s.name == kind.name())
    }

    /// One `<name>.csv` per diagnostic plus `summary.json`.
    pub fn write(&self, dir: &Path) -> Result<(), RunError> {
        fs::create_dir_all(dir)?;
        for s in &self.series {
            s.write_csv(BufWriter::new(File::create(dir.join(format!("{}.csv", s.name)))?))?;
        }
        let f = BufWriter::new(File::create(dir.join("summary.json"))?);
        serde_json::to_writer_pretty(f, self).map_err(std::io::Error::from)?;
        Ok(())
    }
}

/// Worst-case combination over fields: max of L∞, RMS of the L2 values.
fn combine(rs: impl IntoIterator<Item = Residual<f64>>) -> Residual<f64> {
    let mut linf = 0.0f64;
    let mut sq = 0.0;
    let mut n = 0usize;
    for r in rs {
        linf = if r.linf.is_nan() { f64::NAN } else { linf.max(r.linf) };
        sq += r.l2 * r.l2;
        n += 1;
    }
    Residual { linf, l2: if n == 0 { 0.0 } else { (sq / n as f64).sqrt() } }
}

fn scalar_residual(v: f64) -> Residual<f64> {
    Residual { linf: v, l2: v }
}

struct Context<'a> {
    scenario: &'a Scenario,
    nabla: Nabla<f64>,
    dtau: f64,
    energy0: f64,
}

impl Context<'_> {
    fn a_prime(&self, s: &SimState<f64>, k: usize) -> Option<AField<f64>> {
        match self.scenario.mode {
            Mode::Interaction | Mode::United => Some(s.a_prime(k)),
            Mode::StrongField => s.external.clone(),
            _ => None,
        }
    }

    /// Diagnostics that only look at one level.
    fn pointwise(&self, kind: DiagnosticKind, s: &SimState<f64>) -> Result<Residual<f64>, EgmError> {
        let m = s.fields.len();
        Ok(match kind {
            DiagnosticKind::Eigenmode => {
                let exact = exact_plane_wave(&self.scenario.initial_conditions, s.grid(), s.tau);
                Residual::of_vector(&s.fields[0].a.sub(&exact))
            }
            DiagnosticKind::Energy => {
                let d = (total_energy(s) - self.energy0).abs();
                scalar_residual(if self.energy0 > 0.0 { d / self.energy0 } else { d })
            }
            DiagnosticKind::PowerBalance => {
                let mut out = Vec::with_capacity(m);
                for (k, f) in s.fields.iter().enumerate() {
                    if let Some(ap) = self.a_prime(s, k) {
                        out.push(power_identities(&f.theta, &ap, &s.medium)?.0);
                    }
                }
                combine(out)
            }
            _ => unreachable!("windowed diagnostic"),
        })
    }

    fn windowed(&self, kind: DiagnosticKind, w: [&SimState<f64>; 3]) -> Result<Residual<f64>, EgmError> {
        let (nabla, dt) = (&self.nabla, self.dtau);
        let m = w[1].fields.len();
        let thetas = |k: usize| -> [&ChargeCurrent<f64>; 3] { w.map(|s| &s.fields[k].theta) };
        let mut out = Vec::with_capacity(m);
        match kind {
            DiagnosticKind::Charge => {
                for k in 0..m {
                    out.push(charge_conservation_residual(nabla, &thetas(k), dt)?);
                }
            }
            DiagnosticKind::Poynting => {
                for k in 0..m {
                    let a = w.map(|s| &s.fields[k].a);
                    out.push(poynting_residual(nabla, &a, &w[1].fields[k].theta, &w[1].medium, dt)?);
                }
            }
            DiagnosticKind::FirstLaw => {
                for k in 0..m {
                    let ap = self.a_prime(w[1], k);
                    out.push(first_law_residual(nabla, &thetas(k), ap.as_ref(), &w[1].medium, dt)?);
                }
            }
            DiagnosticKind::Wave => {
                for k in 0..m {
                    let rho = thetas(k).map(|t| t.rho_field());
                    let refs: Vec<&[Complex<f64>]> = rho.iter().map(|v| v.as_slice()).collect();
                    out.push(wave_residual(nabla, &refs, dt)?);
                }
            }
            DiagnosticKind::Freeness => out.push(united_field(nabla, w[0], w[1], w[2])?.freeness),
            _ => unreachable!("pointwise diagnostic"),
        }
        Ok(combine(out))
    }
}

fn total_energy(s: &SimState<f64>) -> f64 {
    s.fields.iter().map(|f| energy_momentum(&f.a).total_energy()).sum()
}

fn due(spec: &DiagnosticSpec, step: usize) -> bool {
    step % spec.every == 0
}

/// Runs the scenario in memory.
pub fn simulate(scenario: &Scenario, opts: &RunOptions) -> Result<RunReport, RunError> {
    let threads = if opts.reference { 1 } else { opts.threads.unwrap_or(0) };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let used = pool.current_num_threads();
    pool.install(|| simulate_inner(scenario, used))
}

fn simulate_inner(scenario: &Scenario, threads: usize) -> Result<RunReport, RunError> {
    let started = Instant::now();
    let prepared = scenario.prepare()?;
    let g = prepared.state.grid();
    let ctx = Context {
        scenario,
        nabla: Nabla::new(g, prepared.scheme),
        dtau: g.dtau(),
        energy0: total_energy(&prepared.state),
    };
    let specs = &scenario.diagnostics;
    let mut series: Vec<ResidualSeries<f64>> = specs.iter().map(|d| ResidualSeries::new(d.name.name())).collect();

    let mut hist: VecDeque<SimState<f64>> = VecDeque::with_capacity(3);
    for (d, s) in specs.iter().zip(series.iter_mut()) {
        if matches!(d.name, DiagnosticKind::Eigenmode | DiagnosticKind::Energy | DiagnosticKind::PowerBalance) {
            s.push(0.0, ctx.pointwise(d.name, &prepared.state)?);
        }
    }
    hist.push_back(prepared.state);
    let mut status = RunStatus::Ok;
    let mut steps_done = 0;
    for step in 1..=prepared.steps {
        let cur = hist.back().expect("non-empty");
        let outcome = match step_rk4(&ctx.nabla, cur, &prepared.config) {
            Ok(o) => o,
            Err(EgmError::NumericalAbort { last_stable_tau }) => {
                status = RunStatus::NumericalAbort { last_stable_tau };
                break;
            }
            Err(e) => return Err(e.into()),
        };
        steps_done = step;
        let next = outcome.state;
        for (d, s) in specs.iter().zip(series.iter_mut()) {
            if !due(d, step) {
                continue;
            }
            match d.name {
                DiagnosticKind::Constraint => {
                    s.push(next.tau, scalar_residual(outcome.constraint_drift.unwrap_or(0.0)));
                }
                k if !k.windowed() => s.push(next.tau, ctx.pointwise(k, &next)?),
                _ => {}
            }
        }
        hist.push_back(next);
        if hist.len() > 3 {
            hist.pop_front();
        }
        if hist.len() == 3 {
            let mid = step - 1;
            let w = [&hist[0], &hist[1], &hist[2]];
            for (d, s) in specs.iter().zip(series.iter_mut()) {
                if d.name.windowed() && due(d, mid) {
                    s.push(w[1].tau, ctx.windowed(d.name, w)?);
                }
            }
        }
    }

    let last = hist.back().expect("non-empty");
    let interaction = if last.fields.len() >= 2 {
        let refs: Vec<&AField<f64>> = last.fields.iter().map(|f| &f.a).collect();
        let ie = interaction_energy(&refs)?;
        Some(InteractionSummary { delta_w: ie.delta_w, exchange: ie.exchange.to_string() })
    } else {
        None
    };

    let mut diagnostics = Vec::with_capacity(specs.len());
    for (d, s) in specs.iter().zip(&series) {
        let max_linf = s.max_linf();
        let passed = match d.tolerance {
            Some(tol) => !max_linf.is_nan() && max_linf <= tol,
            None => true,
        };
        if !passed && status == RunStatus::Ok {
            status = RunStatus::ToleranceBreach;
        }
        diagnostics.push(DiagnosticSummary {
            name: d.name.name(),
            samples: s.samples.len(),
            max_linf,
            final_linf: s.last().map(|x| x.linf),
            final_l2: s.last().map(|x| x.l2),
            tolerance: d.tolerance,
            passed,
        });
    }

    Ok(RunReport {
        mode: scenario.mode,
        fields: last.fields.len(),
        steps: steps_done,
        dtau: ctx.dtau,
        tau_end: last.tau,
        threads,
        wall_time_s: started.elapsed().as_secs_f64(),
        status,
        diagnostics,
        interaction_energy: interaction,
        series,
    })
}

/// Runs the scenario and writes its outputs. The directory is taken from
/// the options, then the scenario, then the environment, then `out/`.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<(RunReport, PathBuf), RunError> {
    let report = simulate(scenario, opts)?;
    let dir = opts
        .out_dir
        .clone()
        .or_else(|| scenario.output_dir.clone())
        .or_else(|| std::env::var_os(crate::OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    report.write(&dir)?;
    Ok((report, dir))
}
