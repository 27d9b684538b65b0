//! JSON front end for the shock-front algebra.

use egm_core::shock::{afield_jump_energy, afield_jump_residual, theta_jump_residual};
use egm_core::{CVec3, CharacteristicSymbol, Complex, FrontData, Medium};
use serde::{Deserialize, Serialize};

use crate::scenario::{JsonComplex, MediumSpec};
use crate::ScenarioError;

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontInput {
    pub m: [f64; 3],
    #[serde(default)]
    pub jump_a: [JsonComplex; 3],
    #[serde(default)]
    pub jump_rho: JsonComplex,
    #[serde(default)]
    pub jump_j: [JsonComplex; 3],
    /// Physical strength jumps; derived from `jump_a` when absent.
    #[serde(default)]
    pub jump_e: Option<[f64; 3]>,
    #[serde(default)]
    pub jump_h: Option<[f64; 3]>,
    #[serde(default)]
    pub medium: MediumSpec,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrontReport {
    pub afield_r1: f64,
    pub transversality: f64,
    pub electric: f64,
    pub magnetic: f64,
    pub energy_flux: f64,
    pub charge_flux: f64,
    pub zero_ahead: f64,
    pub theta_scalar: f64,
    pub theta_vector: f64,
    pub admissible_a: bool,
    pub admissible_theta: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootsReport {
    pub m: [f64; 3],
    pub polynomial: [f64; 5],
    pub roots: [f64; 4],
}

fn cvec(v: &[JsonComplex; 3]) -> CVec3<f64> {
    CVec3::new(Complex::new(v[0][0], v[0][1]), Complex::new(v[1][0], v[1][1]), Complex::new(v[2][0], v[2][1]))
}

/// Residuals of every jump relation; a front is admissible when all of the
/// relevant residuals are within `tol`.
pub fn check_front(input: &FrontInput, tol: f64) -> Result<FrontReport, ScenarioError> {
    let medium = Medium::new(input.medium.epsilon, input.medium.mu, input.medium.kappa)?;
    let d = FrontData::new(
        input.m,
        cvec(&input.jump_a),
        Complex::new(input.jump_rho[0], input.jump_rho[1]),
        cvec(&input.jump_j),
    )?;
    let (r1, t) = afield_jump_residual(&d)?;
    let (e0, h0) = medium.physical_strength(&d.jump_a);
    let e = afield_jump_energy(&d, input.jump_e.unwrap_or(e0), input.jump_h.unwrap_or(h0), &medium);
    let (rs, rv) = theta_jump_residual(&d)?;
    let (r1, t, rs, rv) = (r1.norm(), t.norm(), rs.norm(), rv.norm());
    Ok(FrontReport {
        afield_r1: r1,
        transversality: t,
        electric: e.electric,
        magnetic: e.magnetic,
        energy_flux: e.energy_flux,
        charge_flux: e.charge_flux,
        zero_ahead: e.zero_ahead,
        theta_scalar: rs,
        theta_vector: rv,
        admissible_a: [r1, t, e.electric, e.magnetic].iter().all(|v| *v <= tol),
        admissible_theta: rs <= tol && rv <= tol,
    })
}

pub fn roots(m: [f64; 3]) -> Result<RootsReport, ScenarioError> {
    let s = CharacteristicSymbol::new(m)?;
    Ok(RootsReport { m, polynomial: s.polynomial(), roots: s.roots() })
}
