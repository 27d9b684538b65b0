//! Method-of-lines time integration.
//!
//! The A-field obeys `∂τA = −i rot A − J`. The charge-current obeys
//!
//! ```text
//! κ D⁻Θ = −Θ ∘ A′,    A′ = Σ_{m≠k} A_m,
//! ```
//!
//! i.e. `∂τΘ = i∇∘Θ − (Θ∘A′)/κ`, which reduces to the free law `D⁻Θ = 0`
//! when `A′ = 0`. The charge density `ρ = div A` is a constraint; the
//! evolved scalar part of Θ is a shadow copy whose drift is reported and
//! optionally projected away after each step.

use num_complex::Complex;
use rayon::prelude::*;

use crate::biquaternion::Biquaternion;
use crate::diagnostics::Residual;
use crate::error::{EgmError, Result};
use crate::field::{AField, ChargeCurrent, Medium};
use crate::grid::{check_grids, BqField, Grid, VectorField};
use crate::operators::{apply_dminus, Nabla};
use crate::scalar::Real;

/// Which system is integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Dynamics {
    /// Every A evolves under its own Θ; every Θ is free.
    #[default]
    Maxwell,
    /// Θ only, free law. A is carried unchanged.
    FreeTheta,
    /// Full coupled system, `A′` summed over the other fields.
    Interaction,
    /// Θ only, driven by the prescribed external field of the state.
    StrongField,
}

/// Reading of the vector part of the interaction forcing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum VectorCoupling {
    /// Vector part of `−Θ∘A′/κ` enters `∂τJ` unchanged, as in the `D⁻Θ` expansion.
    #[default]
    Direct,
    /// Alternative reading with an extra factor `−i` on the vector forcing.
    FactorI,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperConfig<T> {
    pub dynamics: Dynamics,
    /// Upper bound on `dtau / min(h)`.
    pub cfl: T,
    pub constraint_projection: bool,
    /// 2/3-rule filtering of the `Θ∘A′` product.
    pub dealias: bool,
    pub coupling: VectorCoupling,
}

impl<T: Real> Default for StepperConfig<T> {
    fn default() -> Self {
        Self {
            dynamics: Dynamics::Maxwell,
            cfl: T::lit(0.25),
            constraint_projection: false,
            dealias: true,
            coupling: VectorCoupling::Direct,
        }
    }
}

impl<T: Real> StepperConfig<T> {
    /// Largest admissible step on `grid`.
    pub fn max_dtau(&self, grid: &Grid<T>) -> T {
        self.cfl * grid.min_spacing()
    }

    pub fn check_cfl(&self, grid: &Grid<T>) -> Result<()> {
        let limit = self.max_dtau(grid);
        // A few ulps of slack so `duration / steps` round-off is not rejected.
        if grid.dtau() > limit * (T::one() + T::lit(64.0) * T::eps()) {
            return Err(EgmError::CflViolation { dtau: grid.dtau().as_f64(), limit: limit.as_f64() });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldPair<T> {
    pub a: AField<T>,
    pub theta: ChargeCurrent<T>,
}

impl<T: Real> FieldPair<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        Self { a: AField::zeros(grid), theta: ChargeCurrent::zeros(grid) }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.theta.is_finite()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState<T> {
    pub tau: T,
    pub fields: Vec<FieldPair<T>>,
    pub medium: Medium<T>,
    /// Prescribed `A′` for [`Dynamics::StrongField`].
    pub external: Option<AField<T>>,
}

impl<T: Real> SimState<T> {
    pub fn new(fields: Vec<FieldPair<T>>, medium: Medium<T>) -> Result<Self> {
        let state = Self { tau: T::zero(), fields, medium, external: None };
        state.validate()?;
        Ok(state)
    }

    pub fn with_external(mut self, a: AField<T>) -> Result<Self> {
        self.external = Some(a);
        self.validate()?;
        Ok(self)
    }

    pub fn grid(&self) -> Grid<T> {
        self.fields.first().map(|f| f.a.grid).or(self.external.as_ref().map(|a| a.grid)).expect("validated state")
    }

    fn validate(&self) -> Result<()> {
        let first = self.fields.first().ok_or(EgmError::TooFewFields { needed: 1, got: 0 })?;
        let g = first.a.grid;
        for f in &self.fields {
            check_grids(&g, &f.a.grid)?;
            check_grids(&g, &f.theta.grid)?;
        }
        if let Some(ext) = &self.external {
            check_grids(&g, &ext.grid)?;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.fields.iter().all(FieldPair::is_finite)
    }

    /// `Σ_{m≠k} A_m`.
    pub fn a_prime(&self, k: usize) -> AField<T> {
        let mut out = AField::zeros(self.grid());
        for (m, f) in self.fields.iter().enumerate() {
            if m != k {
                out.axpy(T::one(), &f.a);
            }
        }
        out
    }
}

/// `∂τA = −i rot A − J`.
pub fn maxwell_rhs<T: Real>(nabla: &Nabla<T>, a: &AField<T>, theta: &ChargeCurrent<T>) -> Result<VectorField<T>> {
    check_grids(&a.grid, &theta.grid)?;
    let mut out = nabla.curl(a)?;
    out.scale(-Complex::i());
    for c in 0..3 {
        out.data[c].par_iter_mut().zip(&theta.vector[c]).for_each(|(o, j)| *o = *o - *j);
    }
    Ok(out)
}

/// Free law `D⁻Θ = 0`: `∂τρ = −div J`, `∂τJ = −∇ρ + i rot J`.
pub fn free_theta_rhs<T: Real>(nabla: &Nabla<T>, theta: &ChargeCurrent<T>) -> Result<BqField<T>> {
    let mut out = nabla.nabla_product(theta)?;
    let iu = Complex::i();
    out.scalar.par_iter_mut().for_each(|v| *v = *v * iu);
    for c in 0..3 {
        out.vector[c].par_iter_mut().for_each(|v| *v = *v * iu);
    }
    Ok(out)
}

/// Pointwise product `Θ ∘ A′`.
pub fn theta_times_a<T: Real>(theta: &BqField<T>, a: &VectorField<T>) -> Result<BqField<T>> {
    check_grids(&theta.grid, &a.grid)?;
    let prods: Vec<Biquaternion<T>> = (0..theta.grid.len())
        .into_par_iter()
        .map(|i| theta.at(i).mul(&Biquaternion::from_vector(a.at(i))))
        .collect();
    let mut out = BqField::zeros(theta.grid);
    for (i, p) in prods.into_iter().enumerate() {
        out.set(i, p);
    }
    Ok(out)
}

/// `∂τΘ = i∇∘Θ − (Θ∘A′)/κ`.
pub fn interaction_theta_rhs<T: Real>(
    nabla: &Nabla<T>,
    theta: &ChargeCurrent<T>,
    a_prime: &AField<T>,
    medium: &Medium<T>,
    cfg: &StepperConfig<T>,
) -> Result<BqField<T>> {
    let kappa = medium.kappa();
    if kappa == T::zero() {
        return Err(EgmError::ZeroKappa);
    }
    let mut out = free_theta_rhs(nabla, theta)?;
    let mut prod = theta_times_a(theta, a_prime)?;
    if cfg.dealias {
        nabla.dealias_bq(&mut prod);
    }
    let s = -T::one() / kappa;
    let vs = match cfg.coupling {
        VectorCoupling::Direct => Complex::new(s, T::zero()),
        VectorCoupling::FactorI => Complex::new(T::zero(), -s),
    };
    out.scalar.par_iter_mut().zip(&prod.scalar).for_each(|(o, p)| *o = *o + *p * s);
    for c in 0..3 {
        out.vector[c].par_iter_mut().zip(&prod.vector[c]).for_each(|(o, p)| *o = *o + *p * vs);
    }
    Ok(out)
}

/// Time derivatives of one field pair. `da` is `None` when A is frozen.
#[derive(Clone, Debug)]
pub struct FieldRate<T> {
    pub da: Option<VectorField<T>>,
    pub dtheta: BqField<T>,
}

/// Rates of field `k` under `cfg.dynamics`.
pub fn interaction_rhs<T: Real>(
    nabla: &Nabla<T>,
    state: &SimState<T>,
    k: usize,
    cfg: &StepperConfig<T>,
) -> Result<FieldRate<T>> {
    let pair = state.fields.get(k).ok_or(EgmError::TooFewFields { needed: k + 1, got: state.fields.len() })?;
    match cfg.dynamics {
        Dynamics::Maxwell => Ok(FieldRate {
            da: Some(maxwell_rhs(nabla, &pair.a, &pair.theta)?),
            dtheta: free_theta_rhs(nabla, &pair.theta)?,
        }),
        Dynamics::FreeTheta => Ok(FieldRate { da: None, dtheta: free_theta_rhs(nabla, &pair.theta)? }),
        Dynamics::Interaction => {
            let a_prime = state.a_prime(k);
            Ok(FieldRate {
                da: Some(maxwell_rhs(nabla, &pair.a, &pair.theta)?),
                dtheta: interaction_theta_rhs(nabla, &pair.theta, &a_prime, &state.medium, cfg)?,
            })
        }
        Dynamics::StrongField => {
            let ext = state.external.as_ref().ok_or(EgmError::TooFewFields { needed: 2, got: 1 })?;
            Ok(FieldRate { da: None, dtheta: interaction_theta_rhs(nabla, &pair.theta, ext, &state.medium, cfg)? })
        }
    }
}

fn all_rates<T: Real>(nabla: &Nabla<T>, state: &SimState<T>, cfg: &StepperConfig<T>) -> Result<Vec<FieldRate<T>>> {
    (0..state.fields.len()).map(|k| interaction_rhs(nabla, state, k, cfg)).collect()
}

fn advance<T: Real>(base: &SimState<T>, rates: &[FieldRate<T>], h: T) -> SimState<T> {
    let mut out = base.clone();
    for (f, r) in out.fields.iter_mut().zip(rates) {
        if let Some(da) = &r.da {
            f.a.axpy(h, da);
        }
        f.theta.axpy(h, &r.dtheta);
    }
    out.tau = base.tau + h;
    out
}

/// Outcome of one accepted step.
#[derive(Clone, Debug)]
pub struct StepOutcome<T> {
    pub state: SimState<T>,
    /// `max_k ‖ρ_k − div A_k‖∞` before projection; `None` when A is frozen.
    pub constraint_drift: Option<T>,
}

/// One classical RK4 step of length `grid.dtau()` for all fields at once.
///
/// On a non-finite result the input state is untouched and
/// [`EgmError::NumericalAbort`] carries its time.
pub fn step_rk4<T: Real>(nabla: &Nabla<T>, state: &SimState<T>, cfg: &StepperConfig<T>) -> Result<StepOutcome<T>> {
    let grid = state.grid();
    check_grids(&grid, nabla.grid())?;
    cfg.check_cfl(&grid)?;
    let dt = grid.dtau();
    let half = dt * T::lit(0.5);

    let k1 = all_rates(nabla, state, cfg)?;
    let s2 = advance(state, &k1, half);
    let k2 = all_rates(nabla, &s2, cfg)?;
    let s3 = advance(state, &k2, half);
    let k3 = all_rates(nabla, &s3, cfg)?;
    let s4 = advance(state, &k3, dt);
    let k4 = all_rates(nabla, &s4, cfg)?;

    let sixth = dt / T::lit(6.0);
    let third = dt / T::lit(3.0);
    let mut next = state.clone();
    next.tau = state.tau + dt;
    for (k, f) in next.fields.iter_mut().enumerate() {
        for (rates, w) in [(&k1, sixth), (&k2, third), (&k3, third), (&k4, sixth)] {
            if let Some(da) = &rates[k].da {
                f.a.axpy(w, da);
            }
            f.theta.axpy(w, &rates[k].dtheta);
        }
    }

    if !next.is_finite() {
        return Err(EgmError::NumericalAbort { last_stable_tau: state.tau.as_f64() });
    }

    let evolves_a = matches!(cfg.dynamics, Dynamics::Maxwell | Dynamics::Interaction);
    let constraint_drift = if evolves_a {
        let mut drift = T::zero();
        for f in next.fields.iter_mut() {
            let div = nabla.div(&f.a)?;
            let rho = f.theta.rho_field();
            drift = rho.iter().zip(&div.data).fold(drift, |m, (r, d)| m.max((*r - *d).norm()));
            if cfg.constraint_projection {
                f.theta.set_rho(&div.data);
            }
        }
        Some(drift)
    } else {
        None
    };
    Ok(StepOutcome { state: next, constraint_drift })
}

/// Sums of all fields and the freeness residual `‖D⁻ΣΘ‖`.
#[derive(Clone, Debug)]
pub struct UnitedField<T> {
    pub a_total: AField<T>,
    pub theta_total: ChargeCurrent<T>,
    pub freeness: Residual<T>,
}

pub fn total_fields<T: Real>(state: &SimState<T>) -> (AField<T>, ChargeCurrent<T>) {
    let g = state.grid();
    let mut a = AField::zeros(g);
    let mut theta = ChargeCurrent::zeros(g);
    for f in &state.fields {
        a.axpy(T::one(), &f.a);
        theta.axpy(T::one(), &f.theta);
    }
    (a, theta)
}

/// United field at `cur`, with `∂τΣΘ` from the centered difference of
/// `prev` and `next`.
pub fn united_field<T: Real>(
    nabla: &Nabla<T>,
    prev: &SimState<T>,
    cur: &SimState<T>,
    next: &SimState<T>,
) -> Result<UnitedField<T>> {
    let (_, theta_prev) = total_fields(prev);
    let (a_total, theta_total) = total_fields(cur);
    let (_, theta_next) = total_fields(next);
    let span = next.tau - prev.tau;
    if !(span > T::zero()) {
        return Err(EgmError::InsufficientHistory { needed: 3, got: 1 });
    }
    let mut dtheta = theta_next.0.sub(&theta_prev);
    let inv = T::one() / span;
    dtheta.scalar.iter_mut().for_each(|v| *v = *v * inv);
    for c in 0..3 {
        dtheta.vector[c].iter_mut().for_each(|v| *v = *v * inv);
    }
    let r = apply_dminus(nabla, &theta_total, &dtheta)?;
    Ok(UnitedField { a_total, theta_total, freeness: Residual::of_bq(&r) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biquaternion::CVec3;
    use std::f64::consts::TAU;

    type C = Complex<f64>;

    fn plane_wave(g: Grid<f64>, kz: f64, tau: f64) -> AField<f64> {
        AField::from_fn(g, |x| {
            let ph = C::from_polar(1.0, kz * (x[2] - tau));
            CVec3::new(ph, C::i() * ph, C::new(0.0, 0.0))
        })
    }

    #[test]
    fn maxwell_rhs_eigenmode() {
        let g = Grid::cube(16, TAU, 0.1).unwrap();
        let nabla = Nabla::spectral(g);
        let a = plane_wave(g, 2.0, 0.0);
        let rhs = maxwell_rhs(&nabla, &a, &ChargeCurrent::zeros(g)).unwrap();
        let mut want = a.0.clone();
        want.scale(C::new(0.0, -2.0));
        assert!(rhs.sub(&want).linf() < 1e-12);
    }

    #[test]
    fn maxwell_rhs_pure_source() {
        let g = Grid::cube(4, 1.0, 0.1).unwrap();
        let nabla = Nabla::spectral(g);
        let j = CVec3::new(C::new(1.0, 2.0), C::new(0.0, -1.0), C::new(3.0, 0.0));
        let theta = ChargeCurrent::from_fn(g, |_| Biquaternion::from_vector(j));
        let rhs = maxwell_rhs(&nabla, &AField::zeros(g), &theta).unwrap();
        for i in 0..g.len() {
            assert!((rhs.at(i) + j).norm() < 1e-14);
        }
    }

    #[test]
    fn free_theta_equilibrium() {
        let g = Grid::cube(8, 1.0, 0.1).unwrap();
        let nabla = Nabla::spectral(g);
        let theta = ChargeCurrent::from_fn(g, |_| Biquaternion::from_scalar(C::new(0.0, 3.0)));
        assert!(free_theta_rhs(&nabla, &theta).unwrap().linf() < 1e-13);
    }

    #[test]
    fn free_theta_rotates_curl_eigenmode() {
        let g = Grid::cube(16, TAU, 0.1).unwrap();
        let nabla = Nabla::spectral(g);
        // J = (1, −i, 0) e^{ikz}: rot J = −kJ, so ∂τJ = −ikJ (pure rotation), ρ stays 0.
        let k = 3.0;
        let theta = ChargeCurrent::from_fn(g, |x| {
            let ph = C::from_polar(1.0, k * x[2]);
            Biquaternion::from_vector(CVec3::new(ph, -C::i() * ph, C::new(0.0, 0.0)))
        });
        let rhs = free_theta_rhs(&nabla, &theta).unwrap();
        for i in 0..g.len() {
            assert!(rhs.scalar[i].norm() < 1e-12);
            let want = theta.at(i).vector.scale(C::new(0.0, -k));
            assert!((rhs.at(i).vector - want).norm() < 1e-11);
        }
    }

    #[test]
    fn zero_aprime_reduces_to_free() {
        let g = Grid::cube(8, TAU, 0.1).unwrap();
        let nabla = Nabla::spectral(g);
        let theta = ChargeCurrent::from_fn(g, |x| {
            Biquaternion::new(C::new(x[0].sin(), x[1].cos()), CVec3::from_re_im([x[2].sin(), 0.0, 1.0], [0.0, x[0].cos(), 0.0]))
        });
        let free = free_theta_rhs(&nabla, &theta).unwrap();
        let inter =
            interaction_theta_rhs(&nabla, &theta, &AField::zeros(g), &Medium::unit(), &StepperConfig::default())
                .unwrap();
        assert_eq!(free, inter);
    }

    #[test]
    fn zero_kappa_rejected() {
        let g = Grid::cube(4, 1.0, 0.1).unwrap();
        let nabla = Nabla::spectral(g);
        let m = Medium::new(1.0, 1.0, 0.0).unwrap();
        let err = interaction_theta_rhs(&nabla, &ChargeCurrent::zeros(g), &AField::zeros(g), &m, &StepperConfig::default());
        assert_eq!(err.unwrap_err(), EgmError::ZeroKappa);
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = Grid::cube(8, 1.0, 0.01).unwrap();
        let nabla = Nabla::spectral(g);
        let s = SimState::new(vec![FieldPair::zeros(g), FieldPair::zeros(g)], Medium::<f64>::unit()).unwrap();
        let cfg = StepperConfig { dynamics: Dynamics::Interaction, ..Default::default() };
        let out = step_rk4(&nabla, &s, &cfg).unwrap();
        assert_eq!(out.state.fields, s.fields);
        assert!((out.state.tau - 0.01).abs() < 1e-15);
    }

    #[test]
    fn cfl_violation_rejected() {
        let g = Grid::cube(8, 1.0, 0.2).unwrap();
        let nabla = Nabla::spectral(g);
        let s = SimState::new(vec![FieldPair::zeros(g)], Medium::unit()).unwrap();
        assert!(matches!(step_rk4(&nabla, &s, &StepperConfig::default()), Err(EgmError::CflViolation { .. })));
    }

    #[test]
    fn nan_aborts_with_last_tau() {
        let g = Grid::cube(4, 1.0, 0.01).unwrap();
        let nabla = Nabla::spectral(g);
        let mut s = SimState::new(vec![FieldPair::zeros(g)], Medium::unit()).unwrap();
        s.tau = 0.5;
        s.fields[0].a.data[0][3] = C::new(f64::NAN, 0.0);
        let err = step_rk4(&nabla, &s, &StepperConfig::default()).unwrap_err();
        assert_eq!(err, EgmError::NumericalAbort { last_stable_tau: 0.5 });
    }

    #[test]
    fn strong_field_requires_external() {
        let g = Grid::cube(4, 1.0, 0.01).unwrap();
        let nabla = Nabla::spectral(g);
        let s = SimState::new(vec![FieldPair::zeros(g)], Medium::unit()).unwrap();
        let cfg = StepperConfig { dynamics: Dynamics::StrongField, ..Default::default() };
        assert!(step_rk4(&nabla, &s, &cfg).is_err());
    }

    #[test]
    fn antisymmetric_pair_unites_to_zero() {
        let g = Grid::cube(8, TAU, 0.01).unwrap();
        let nabla = Nabla::spectral(g);
        let a = plane_wave(g, 1.0, 0.0);
        let theta = ChargeCurrent::from_fn(g, |x| Biquaternion::from_scalar(C::new(0.0, x[0].sin())));
        let mut neg_a = a.clone();
        neg_a.scale(C::new(-1.0, 0.0));
        let mut neg_t = theta.clone();
        neg_t.0 = neg_t.map(|b| -b);
        let s = SimState::new(
            vec![FieldPair { a, theta }, FieldPair { a: neg_a, theta: neg_t }],
            Medium::unit(),
        )
        .unwrap();
        let mut next = s.clone();
        next.tau = 0.02;
        let u = united_field(&nabla, &s, &s, &next).unwrap();
        assert_eq!(u.a_total.linf(), 0.0);
        assert_eq!(u.theta_total.linf(), 0.0);
        assert_eq!(u.freeness.linf, 0.0);
    }
}
