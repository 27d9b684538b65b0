//! Physical fields and their complexified biquaternion form.
//!
//! The A-field packs the electric and gravimagnetic strengths into one
//! complex vector, `A = √ε E + i √μ H`. Charges and currents become the
//! biquaternion `Θ = iρ + J` with
//!
//! ```text
//! ρ = ρ^E/√ε − i ρ^H/√μ,      J = √μ j^E − i √ε j^H.
//! ```
//!
//! All physical inputs are real; complexification happens only here.

use std::ops::{Deref, DerefMut};

use num_complex::Complex;

use crate::biquaternion::{Biquaternion, CVec3};
use crate::error::{EgmError, Result};
use crate::grid::{check_grids, BqField, Grid, RealField, RealVectorField, VectorField};
use crate::operators::Nabla;
use crate::scalar::Real;

/// Homogeneous medium. The wave speed `c = 1/√(εμ)` is always derived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Medium<T> {
    epsilon: T,
    mu: T,
    kappa: T,
}

impl<T: Real> Medium<T> {
    pub fn new(epsilon: T, mu: T, kappa: T) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > T::zero()) {
            return Err(EgmError::InvalidMedium("epsilon must be positive".into()));
        }
        if !(mu.is_finite() && mu > T::zero()) {
            return Err(EgmError::InvalidMedium("mu must be positive".into()));
        }
        if !kappa.is_finite() {
            return Err(EgmError::InvalidMedium("kappa must be finite".into()));
        }
        Ok(Self { epsilon, mu, kappa })
    }

    /// Dimensionless vacuum: ε = μ = κ = 1.
    pub fn unit() -> Self {
        Self { epsilon: T::one(), mu: T::one(), kappa: T::one() }
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn c(&self) -> T {
        T::one() / (self.epsilon * self.mu).sqrt()
    }

    /// Complex charge `ρ^E/√ε − i ρ^H/√μ`.
    pub fn complex_charge(&self, rho_e: T, rho_h: T) -> Complex<T> {
        Complex::new(rho_e / self.epsilon.sqrt(), -rho_h / self.mu.sqrt())
    }

    /// Complex current `√μ j^E − i √ε j^H`.
    pub fn complex_current(&self, j_e: [T; 3], j_h: [T; 3]) -> CVec3<T> {
        let (se, sm) = (self.epsilon.sqrt(), self.mu.sqrt());
        CVec3::from_re_im(j_e.map(|x| sm * x), j_h.map(|x| -se * x))
    }

    /// Inverse of [`Medium::complex_current`]: `(j^E, j^H)`.
    pub fn physical_current(&self, j: &CVec3<T>) -> ([T; 3], [T; 3]) {
        let (se, sm) = (self.epsilon.sqrt(), self.mu.sqrt());
        (j.re().map(|x| x / sm), j.im().map(|x| -x / se))
    }

    /// Inverse of [`Medium::complex_charge`]: `(ρ^E, ρ^H)`.
    pub fn physical_charge(&self, rho: Complex<T>) -> (T, T) {
        (rho.re * self.epsilon.sqrt(), -rho.im * self.mu.sqrt())
    }

    /// Pointwise `√ε E + i √μ H`.
    pub fn complex_strength(&self, e: [T; 3], h: [T; 3]) -> CVec3<T> {
        let (se, sm) = (self.epsilon.sqrt(), self.mu.sqrt());
        CVec3::from_re_im(e.map(|x| se * x), h.map(|x| sm * x))
    }

    /// Pointwise `(E, H)` from an A-field value.
    pub fn physical_strength(&self, a: &CVec3<T>) -> ([T; 3], [T; 3]) {
        let (se, sm) = (self.epsilon.sqrt(), self.mu.sqrt());
        (a.re().map(|x| x / se), a.im().map(|x| x / sm))
    }
}

/// Field strength `A = √ε E + i √μ H`, a pure-vector biquaternion field.
#[derive(Clone, Debug, PartialEq)]
pub struct AField<T>(pub VectorField<T>);

impl<T: Real> AField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        Self(VectorField::zeros(grid))
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 3]) -> CVec3<T>) -> Self {
        Self(VectorField::from_fn(grid, f))
    }

    /// `0 + A` as a biquaternion field.
    pub fn to_bq(&self) -> BqField<T> {
        BqField::from_vector(&self.0)
    }

    pub fn into_inner(self) -> VectorField<T> {
        self.0
    }
}

impl<T> Deref for AField<T> {
    type Target = VectorField<T>;
    fn deref(&self) -> &VectorField<T> {
        &self.0
    }
}

impl<T> DerefMut for AField<T> {
    fn deref_mut(&mut self) -> &mut VectorField<T> {
        &mut self.0
    }
}

/// Charge-current density `Θ = iρ + J`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChargeCurrent<T>(pub BqField<T>);

impl<T: Real> ChargeCurrent<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        Self(BqField::zeros(grid))
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 3]) -> Biquaternion<T>) -> Self {
        Self(BqField::from_fn(grid, f))
    }

    /// The complex charge `ρ` at point `i` (the scalar part divided by `i`).
    #[inline]
    pub fn rho(&self, i: usize) -> Complex<T> {
        let s = self.0.scalar[i];
        Complex::new(s.im, -s.re)
    }

    /// Complex charge field `ρ = −i·scalar`.
    pub fn rho_field(&self) -> Vec<Complex<T>> {
        (0..self.grid.len()).map(|i| self.rho(i)).collect()
    }

    /// Replaces the scalar part with `iρ`.
    pub fn set_rho(&mut self, rho: &[Complex<T>]) {
        for (s, r) in self.0.scalar.iter_mut().zip(rho) {
            *s = Complex::new(-r.im, r.re);
        }
    }

    pub fn into_inner(self) -> BqField<T> {
        self.0
    }
}

impl<T> Deref for ChargeCurrent<T> {
    type Target = BqField<T>;
    fn deref(&self) -> &BqField<T> {
        &self.0
    }
}

impl<T> DerefMut for ChargeCurrent<T> {
    fn deref_mut(&mut self) -> &mut BqField<T> {
        &mut self.0
    }
}

/// Power density `M` with mass-force `F^H` and electric-force `F^E`
/// densities. Reassembles to the biquaternion `M − iF`, `F = F^H + iF^E`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct PowerForce<T> {
    pub power: Complex<T>,
    pub mass_force: [T; 3],
    pub electric_force: [T; 3],
}

impl<T: Real> PowerForce<T> {
    /// Complex force `F = F^H + iF^E`.
    pub fn force(&self) -> CVec3<T> {
        CVec3::from_re_im(self.mass_force, self.electric_force)
    }

    pub fn to_biquaternion(&self) -> Biquaternion<T> {
        let minus_i = Complex::new(T::zero(), -T::one());
        Biquaternion::new(self.power, self.force().scale(minus_i))
    }
}

/// Splits `M − iF` into power and the two real force densities.
pub fn decompose_force<T: Real>(f: &Biquaternion<T>) -> PowerForce<T> {
    let force = f.vector.scale(Complex::new(T::zero(), T::one()));
    PowerForce { power: f.scalar, mass_force: force.re(), electric_force: force.im() }
}

pub fn assemble_afield<T: Real>(
    e: &RealVectorField<T>,
    h: &RealVectorField<T>,
    medium: &Medium<T>,
    grid: &Grid<T>,
) -> Result<AField<T>> {
    check_grids(grid, &e.grid)?;
    check_grids(grid, &h.grid)?;
    let mut a = AField::zeros(*grid);
    for i in 0..grid.len() {
        a.set(i, medium.complex_strength(e.at(i), h.at(i)));
    }
    Ok(a)
}

/// Returns `(E, H)`.
pub fn decompose_afield<T: Real>(a: &AField<T>, medium: &Medium<T>) -> (RealVectorField<T>, RealVectorField<T>) {
    let mut e = RealVectorField::zeros(a.grid);
    let mut h = RealVectorField::zeros(a.grid);
    for i in 0..a.grid.len() {
        let (ev, hv) = medium.physical_strength(&a.at(i));
        for c in 0..3 {
            e.data[c][i] = ev[c];
            h.data[c][i] = hv[c];
        }
    }
    (e, h)
}

pub fn assemble_theta<T: Real>(
    rho_e: &RealField<T>,
    rho_h: &RealField<T>,
    j_e: &RealVectorField<T>,
    j_h: &RealVectorField<T>,
    medium: &Medium<T>,
    grid: &Grid<T>,
) -> Result<ChargeCurrent<T>> {
    check_grids(grid, &rho_e.grid)?;
    check_grids(grid, &rho_h.grid)?;
    check_grids(grid, &j_e.grid)?;
    check_grids(grid, &j_h.grid)?;
    let i_unit = Complex::new(T::zero(), T::one());
    let mut theta = ChargeCurrent::zeros(*grid);
    for i in 0..grid.len() {
        let rho = medium.complex_charge(rho_e.data[i], rho_h.data[i]);
        let j = medium.complex_current(j_e.at(i), j_h.at(i));
        theta.set(i, Biquaternion::new(i_unit * rho, j));
    }
    Ok(theta)
}

/// Charge-current of charges moving with velocity `V`: `j^E = ρ^E V`,
/// `j^H = ρ^H V`.
#[derive(Clone, Debug)]
pub struct VelocityCurrent<T> {
    pub theta: ChargeCurrent<T>,
    /// `max |rot J|`. Only potential currents admit this representation, so
    /// a large value flags a rotational current.
    pub curl_linf: T,
    /// Largest `|V|/c` on the grid; values ≥ 1 are superluminal.
    pub max_speed_ratio: T,
}

pub fn velocity_current<T: Real>(
    rho_e: &RealField<T>,
    rho_h: &RealField<T>,
    velocity: &RealVectorField<T>,
    medium: &Medium<T>,
    nabla: &Nabla<T>,
) -> Result<VelocityCurrent<T>> {
    let grid = rho_e.grid;
    check_grids(&grid, &velocity.grid)?;
    check_grids(&grid, nabla.grid())?;
    let mut j_e = RealVectorField::zeros(grid);
    let mut j_h = RealVectorField::zeros(grid);
    let mut max_speed = T::zero();
    for i in 0..grid.len() {
        let v = velocity.at(i);
        let speed = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        max_speed = max_speed.max(speed);
        for c in 0..3 {
            j_e.data[c][i] = rho_e.data[i] * v[c];
            j_h.data[c][i] = rho_h.data[i] * v[c];
        }
    }
    let theta = assemble_theta(rho_e, rho_h, &j_e, &j_h, medium, &grid)?;
    let curl = nabla.curl(&theta.vector_field())?;
    Ok(VelocityCurrent { theta, curl_linf: curl.linf(), max_speed_ratio: max_speed / medium.c() })
}
