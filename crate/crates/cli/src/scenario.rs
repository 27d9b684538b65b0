//! Scenario files: JSON description of a run, its initial data and the
//! diagnostics to drive.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::path::PathBuf;

use egm_core::{
    AField, Biquaternion, CVec3, Complex, Dynamics, FieldPair, Grid, Medium, NablaScheme, SimState,
    StepperConfig, VectorCoupling,
};
use serde::{Deserialize, Serialize};

use crate::ScenarioError;

type C = Complex<f64>;

/// A complex number written as `[re, im]`.
pub type JsonComplex = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Maxwell,
    FreeTheta,
    Interaction,
    StrongField,
    /// Interaction dynamics with the united-field freeness check.
    United,
}

impl Mode {
    pub fn dynamics(self) -> Dynamics {
        match self {
            Mode::Maxwell => Dynamics::Maxwell,
            Mode::FreeTheta => Dynamics::FreeTheta,
            Mode::Interaction | Mode::United => Dynamics::Interaction,
            Mode::StrongField => Dynamics::StrongField,
        }
    }

    fn min_fields(self) -> usize {
        match self {
            Mode::Interaction | Mode::United => 2,
            _ => 1,
        }
    }

    fn evolves_a(self) -> bool {
        matches!(self, Mode::Maxwell | Mode::Interaction | Mode::United)
    }
}

/// Either one value for all axes or one per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerAxis<X> {
    Same(X),
    Each([X; 3]),
}

impl<X: Copy> PerAxis<X> {
    pub fn expand(self) -> [X; 3] {
        match self {
            PerAxis::Same(x) => [x; 3],
            PerAxis::Each(v) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: PerAxis<usize>,
    pub length: PerAxis<f64>,
    /// Defaults to the largest step the CFL bound allows, shortened so the
    /// duration is a whole number of steps.
    #[serde(default)]
    pub dtau: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MediumSpec {
    pub epsilon: f64,
    pub mu: f64,
    pub kappa: f64,
}

impl Default for MediumSpec {
    fn default() -> Self {
        Self { epsilon: 1.0, mu: 1.0, kappa: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSpec {
    #[default]
    Spectral,
    Central4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingSpec {
    #[default]
    Direct,
    FactorI,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperSpec {
    pub cfl: f64,
    pub scheme: SchemeSpec,
    pub dealias: bool,
    pub constraint_projection: bool,
    pub coupling: CouplingSpec,
}

impl Default for StepperSpec {
    fn default() -> Self {
        Self { cfl: 0.25, scheme: SchemeSpec::Spectral, dealias: true, constraint_projection: false, coupling: CouplingSpec::Direct }
    }
}

/// Which part of a field pair a preset initialises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    A,
    Theta,
    /// The prescribed `A′` of a strong-field run.
    External,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum Preset {
    /// `(s + V) e^{ik·x}`.
    PlaneWave {
        k: [f64; 3],
        polarization: [JsonComplex; 3],
        #[serde(default)]
        scalar: JsonComplex,
    },
    /// `(s + V) exp(−r²/w²)`, `r` the periodic distance to `center`.
    GaussianPulse {
        center: [f64; 3],
        width: f64,
        amplitude: [JsonComplex; 3],
        #[serde(default)]
        scalar: JsonComplex,
    },
    Uniform {
        value: [JsonComplex; 3],
        #[serde(default)]
        scalar: JsonComplex,
    },
}

/// Unknown keys are rejected by the flattened preset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    #[serde(default)]
    pub field: usize,
    pub target: Target,
    #[serde(flatten)]
    pub preset: Preset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    /// `∂τρ + div J`, worst over fields.
    Charge,
    /// Poynting balance of every evolving A.
    Poynting,
    /// Current-energy balance `κ(∂τQ + U) = Re(V·J̄)`.
    FirstLaw,
    /// `□ρ` by second differences.
    Wave,
    /// `(E′,j^E) + (H′,j^H)`, the real part of `(A′,J)` scaled by `c`.
    PowerBalance,
    /// `D⁻(ΣΘ)`.
    Freeness,
    /// `max|ρ − div A|` before projection.
    Constraint,
    /// Distance to the exact source-free solution of plane-wave data.
    Eigenmode,
    /// `|W_total(τ) − W_total(0)| / W_total(0)`, energy summed over fields.
    Energy,
}

impl DiagnosticKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Charge => "charge",
            Self::Poynting => "poynting",
            Self::FirstLaw => "first_law",
            Self::Wave => "wave",
            Self::PowerBalance => "power_balance",
            Self::Freeness => "freeness",
            Self::Constraint => "constraint",
            Self::Eigenmode => "eigenmode",
            Self::Energy => "energy",
        }
    }

    /// Needs the previous, current and next level.
    pub fn windowed(self) -> bool {
        matches!(self, Self::Charge | Self::Poynting | Self::FirstLaw | Self::Wave | Self::Freeness)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticSpec {
    pub name: DiagnosticKind,
    /// Sample every this many steps.
    #[serde(default = "one")]
    pub every: usize,
    /// Breaching it makes the run fail; absent means report only.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub mode: Mode,
    pub grid: GridSpec,
    #[serde(default)]
    pub medium: MediumSpec,
    #[serde(default)]
    pub stepper: StepperSpec,
    pub duration: f64,
    /// Number of field pairs; defaults to one more than the largest index used.
    #[serde(default)]
    pub fields: Option<usize>,
    pub initial_conditions: Vec<InitialCondition>,
    #[serde(default)]
    pub diagnostics: Vec<DiagnosticSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// Everything the runner needs, built from a validated scenario.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub state: SimState<f64>,
    pub config: StepperConfig<f64>,
    pub scheme: NablaScheme,
    pub steps: usize,
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let s: Scenario = serde_json::from_str(text)?;
    s.validate()?;
    Ok(s)
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

impl Scenario {
    pub fn field_count(&self) -> usize {
        self.fields.unwrap_or_else(|| {
            self.initial_conditions.iter().filter(|c| c.target != Target::External).map(|c| c.field + 1).max().unwrap_or(1)
        })
    }

    fn base_grid(&self) -> Result<Grid<f64>, ScenarioError> {
        Ok(Grid::new(self.grid.n.expand(), self.grid.length.expand(), 1.0)?)
    }

    fn stepper(&self) -> StepperConfig<f64> {
        StepperConfig {
            dynamics: self.mode.dynamics(),
            cfl: self.stepper.cfl,
            constraint_projection: self.stepper.constraint_projection,
            dealias: self.stepper.dealias,
            coupling: match self.stepper.coupling {
                CouplingSpec::Direct => VectorCoupling::Direct,
                CouplingSpec::FactorI => VectorCoupling::FactorI,
            },
        }
    }

    /// Step size and count covering `duration` exactly.
    pub fn steps(&self) -> Result<(f64, usize), ScenarioError> {
        let g = self.base_grid()?;
        let cfg = self.stepper();
        let dtau_max = self.grid.dtau.unwrap_or_else(|| cfg.max_dtau(&g));
        let steps = ((self.duration / dtau_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let dtau = self.duration / steps as f64;
        cfg.check_cfl(&g.with_dtau(dtau)?)?;
        Ok((dtau, steps))
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(invalid("duration must be positive"));
        }
        if !(self.stepper.cfl.is_finite() && self.stepper.cfl > 0.0) {
            return Err(invalid("cfl must be positive"));
        }
        if let Some(dt) = self.grid.dtau {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(invalid("dtau must be positive"));
            }
        }
        Medium::new(self.medium.epsilon, self.medium.mu, self.medium.kappa)?;
        let g = self.base_grid()?;
        let m = self.field_count();
        if m < self.mode.min_fields() {
            return Err(invalid(format!("{} requires >= {} fields, got {m}", mode_name(self.mode), self.mode.min_fields())));
        }
        let mut has_external = false;
        for ic in &self.initial_conditions {
            match ic.target {
                Target::External => {
                    if self.mode != Mode::StrongField {
                        return Err(invalid("external field is only used by strong_field"));
                    }
                    has_external = true;
                }
                _ if ic.field >= m => {
                    return Err(invalid(format!("initial condition for field {} but only {m} fields", ic.field)));
                }
                _ => {}
            }
            if ic.target != Target::Theta && preset_scalar(&ic.preset) != [0.0, 0.0] {
                return Err(invalid("A-field presets must have a zero scalar part"));
            }
            check_preset(&ic.preset, &g)?;
        }
        if self.mode == Mode::StrongField && !has_external {
            return Err(invalid("strong_field requires an external field"));
        }
        let mut seen = BTreeSet::new();
        for d in &self.diagnostics {
            if !seen.insert(d.name) {
                return Err(invalid(format!("duplicate diagnostic {}", d.name.name())));
            }
            if d.every == 0 {
                return Err(invalid(format!("diagnostic {}: every must be >= 1", d.name.name())));
            }
            self.check_diagnostic(d.name)?;
        }
        self.steps()?;
        Ok(())
    }

    fn check_diagnostic(&self, kind: DiagnosticKind) -> Result<(), ScenarioError> {
        let bad = |why: &str| Err(invalid(format!("diagnostic {}: {why}", kind.name())));
        match kind {
            DiagnosticKind::Poynting | DiagnosticKind::Constraint | DiagnosticKind::Energy if !self.mode.evolves_a() => {
                bad("needs an evolving A-field")
            }
            DiagnosticKind::Freeness | DiagnosticKind::PowerBalance
                if !matches!(self.mode, Mode::Interaction | Mode::United | Mode::StrongField) =>
            {
                bad("needs an interacting run")
            }
            DiagnosticKind::Eigenmode => {
                let plane_a = self.initial_conditions.iter().all(|c| {
                    c.target == Target::A && matches!(c.preset, Preset::PlaneWave { .. } | Preset::Uniform { .. })
                });
                if self.mode != Mode::Maxwell || !plane_a {
                    return bad("needs a source-free maxwell run with plane-wave A data");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn prepare(&self) -> Result<Prepared, ScenarioError> {
        self.validate()?;
        let (dtau, steps) = self.steps()?;
        let g = self.base_grid()?.with_dtau(dtau)?;
        let medium = Medium::new(self.medium.epsilon, self.medium.mu, self.medium.kappa)?;
        let mut fields = vec![FieldPair::zeros(g); self.field_count()];
        let mut external: Option<AField<f64>> = None;
        for ic in &self.initial_conditions {
            match ic.target {
                Target::A => add_vector(&mut fields[ic.field].a, &ic.preset),
                Target::Theta => {
                    let th = &mut fields[ic.field].theta;
                    for i in 0..g.len() {
                        let v = th.at(i) + eval_preset(&ic.preset, g.coords(i), &g);
                        th.set(i, v);
                    }
                }
                Target::External => add_vector(external.get_or_insert_with(|| AField::zeros(g)), &ic.preset),
            }
        }
        let mut state = SimState::new(fields, medium)?;
        if let Some(ext) = external {
            state = state.with_external(ext)?;
        }
        let scheme = match self.stepper.scheme {
            SchemeSpec::Spectral => NablaScheme::Spectral,
            SchemeSpec::Central4 => NablaScheme::Central4,
        };
        Ok(Prepared { state, config: self.stepper(), scheme, steps })
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Maxwell => "maxwell",
        Mode::FreeTheta => "free_theta",
        Mode::Interaction => "interaction",
        Mode::StrongField => "strong_field",
        Mode::United => "united",
    }
}

fn preset_scalar(p: &Preset) -> JsonComplex {
    match p {
        Preset::PlaneWave { scalar, .. } | Preset::GaussianPulse { scalar, .. } | Preset::Uniform { scalar, .. } => *scalar,
    }
}

fn check_preset(p: &Preset, g: &Grid<f64>) -> Result<(), ScenarioError> {
    match p {
        Preset::PlaneWave { k, .. } => {
            let l = g.lengths();
            for a in 0..3 {
                let cycles = k[a] * l[a] / TAU;
                if (cycles - cycles.round()).abs() > 1e-9 {
                    return Err(invalid(format!("plane_wave k[{a}] = {} is not periodic on the box", k[a])));
                }
            }
            Ok(())
        }
        Preset::GaussianPulse { width, .. } if !(width.is_finite() && *width > 0.0) => {
            Err(invalid("gaussian_pulse width must be positive"))
        }
        _ => Ok(()),
    }
}

fn c(v: JsonComplex) -> C {
    C::new(v[0], v[1])
}

fn cvec(v: &[JsonComplex; 3]) -> CVec3<f64> {
    CVec3::new(c(v[0]), c(v[1]), c(v[2]))
}

/// Value of a preset at point `x`.
pub fn eval_preset(p: &Preset, x: [f64; 3], g: &Grid<f64>) -> Biquaternion<f64> {
    match p {
        Preset::PlaneWave { k, polarization, scalar } => {
            let ph = C::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            Biquaternion::new(c(*scalar), cvec(polarization)).scale(ph)
        }
        Preset::GaussianPulse { center, width, amplitude, scalar } => {
            let l = g.lengths();
            let r2: f64 = (0..3)
                .map(|a| {
                    let d = (x[a] - center[a]).rem_euclid(l[a]);
                    d.min(l[a] - d).powi(2)
                })
                .sum();
            let f = (-r2 / (width * width)).exp();
            Biquaternion::new(c(*scalar), cvec(amplitude)).scale(C::new(f, 0.0))
        }
        Preset::Uniform { value, scalar } => Biquaternion::new(c(*scalar), cvec(value)),
    }
}

fn add_vector(a: &mut AField<f64>, p: &Preset) {
    let g = a.grid;
    for i in 0..g.len() {
        let v = a.at(i) + eval_preset(p, g.coords(i), &g).vector;
        a.set(i, v);
    }
}

/// Exact source-free evolution of plane-wave data: each mode obeys
/// `∂τâ = k×â`, which is a rotation about `k`.
pub fn exact_plane_wave(ics: &[InitialCondition], g: Grid<f64>, tau: f64) -> AField<f64> {
    let mut out = AField::zeros(g);
    for ic in ics {
        let (k, amp) = match &ic.preset {
            Preset::PlaneWave { k, polarization, .. } => (*k, cvec(polarization)),
            Preset::Uniform { value, .. } => ([0.0; 3], cvec(value)),
            Preset::GaussianPulse { .. } => continue,
        };
        let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        let kv = CVec3::from_real(k);
        let rotated = if kn == 0.0 {
            amp
        } else {
            let ka = kv.cross(&amp);
            let kka = kv.cross(&ka);
            let s = (kn * tau).sin() / kn;
            let cc = (1.0 - (kn * tau).cos()) / (kn * kn);
            amp + ka.scale(C::new(s, 0.0)) + kka.scale(C::new(cc, 0.0))
        };
        for i in 0..g.len() {
            let x = g.coords(i);
            let ph = C::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            let v = out.at(i) + rotated.scale(ph);
            out.set(i, v);
        }
    }
    out
}
