//! Functionals and conservation-law residuals.
//!
//! Time derivatives are second-order centered differences over three stored
//! levels; every residual is evaluated at the middle level. `l2` is the RMS
//! over grid points.

use std::fmt;
use std::io::{self, Write};

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use crate::biquaternion::{Biquaternion, CVec3};
use crate::error::{EgmError, Result};
use crate::evolution::theta_times_a;
use crate::field::{decompose_force, AField, ChargeCurrent, Medium, PowerForce};
use crate::grid::{bq_norm_sqr, check_grids, rms_of, BqField, Grid, ScalarField, VectorField};
use crate::operators::Nabla;
use crate::scalar::{from_usize, Real};

/// L∞ and RMS norms of a residual field.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Residual<T> {
    pub linf: T,
    pub l2: T,
}

impl<T: Real> Residual<T> {
    pub fn zero() -> Self {
        Self { linf: T::zero(), l2: T::zero() }
    }

    pub fn of_real(v: &[T]) -> Self {
        Self {
            linf: v.iter().fold(T::zero(), |m, x| m.max(x.abs())),
            l2: rms_of(v.iter().map(|x| *x * *x), v.len()),
        }
    }

    pub fn of_complex(v: &[Complex<T>]) -> Self {
        Self {
            linf: v.iter().fold(T::zero(), |m, x| m.max(x.norm())),
            l2: rms_of(v.iter().map(|x| x.norm_sqr()), v.len()),
        }
    }

    pub fn of_vector(v: &VectorField<T>) -> Self {
        Self { linf: v.linf(), l2: v.rms() }
    }

    pub fn of_bq(v: &BqField<T>) -> Self {
        Self { linf: v.linf(), l2: v.rms() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualSample<T> {
    pub tau: T,
    pub linf: T,
    pub l2: T,
}

/// Named time series of residual norms.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualSeries<T> {
    pub name: String,
    pub samples: Vec<ResidualSample<T>>,
}

impl<T: Real> ResidualSeries<T> {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), samples: Vec::new() }
    }

    pub fn push(&mut self, tau: T, r: Residual<T>) {
        self.samples.push(ResidualSample { tau, linf: r.linf, l2: r.l2 });
    }

    pub fn last(&self) -> Option<&ResidualSample<T>> {
        self.samples.last()
    }

    pub fn max_linf(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, s| m.max(s.linf))
    }

    /// CSV with header `tau,linf,l2`. Values use the shortest round-trip
    /// representation, so identical runs give identical bytes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "tau,linf,l2")?;
        for s in &self.samples {
            writeln!(w, "{:e},{:e},{:e}", s.tau, s.linf, s.l2)?;
        }
        Ok(())
    }
}

/// `Ξ = W + iP`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyMomentum<T> {
    pub grid: Grid<T>,
    pub w: Vec<T>,
    pub p: [Vec<T>; 3],
}

impl<T: Real> EnergyMomentum<T> {
    pub fn to_bq(&self) -> BqField<T> {
        let mut out = BqField::zeros(self.grid);
        for i in 0..self.grid.len() {
            let p = CVec3::from_re_im([T::zero(); 3], [self.p[0][i], self.p[1][i], self.p[2][i]]);
            out.set(i, Biquaternion::new(Complex::new(self.w[i], T::zero()), p));
        }
        out
    }

    pub fn total_energy(&self) -> T {
        self.w.iter().fold(T::zero(), |s, v| s + *v) * self.grid.cell_volume()
    }
}

/// `W = 0.5 Σ|A_k|²` and `P = 0.5 i A×Ā` at one point.
pub fn energy_momentum_point<T: Real>(a: &CVec3<T>) -> (T, [T; 3]) {
    let half = T::lit(0.5);
    let p = a.cross(&a.conj()).scale(Complex::new(T::zero(), half));
    (half * a.norm_sqr(), p.re())
}

pub fn energy_momentum<T: Real>(a: &AField<T>) -> EnergyMomentum<T> {
    let n = a.grid.len();
    let mut w = vec![T::zero(); n];
    let mut p: [Vec<T>; 3] = std::array::from_fn(|_| vec![T::zero(); n]);
    for i in 0..n {
        let (wi, pi) = energy_momentum_point(&a.at(i));
        w[i] = wi;
        for c in 0..3 {
            p[c][i] = pi[c];
        }
    }
    EnergyMomentum { grid: a.grid, w, p }
}

/// `0.5 A∘A*` through the biquaternion product.
pub fn energy_momentum_bq<T: Real>(a: &AField<T>) -> BqField<T> {
    let half = Complex::new(T::lit(0.5), T::zero());
    a.to_bq().map(|b| b.mul(&b.conj()).scale(half))
}

/// `c⁻¹ E×H` from the physical strengths.
pub fn poynting_physical<T: Real>(a: &AField<T>, medium: &Medium<T>) -> [Vec<T>; 3] {
    let n = a.grid.len();
    let inv_c = T::one() / medium.c();
    let mut p: [Vec<T>; 3] = std::array::from_fn(|_| vec![T::zero(); n]);
    for i in 0..n {
        let (e, h) = medium.physical_strength(&a.at(i));
        let x = cross_re(e, h);
        for c in 0..3 {
            p[c][i] = x[c] * inv_c;
        }
    }
    p
}

fn cross_re<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot_re<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Pointwise `F = −Θ∘A′` split into power and forces.
pub fn power_force_point<T: Real>(theta: &Biquaternion<T>, a_prime: &CVec3<T>) -> PowerForce<T> {
    decompose_force(&-theta.mul(&Biquaternion::from_vector(*a_prime)))
}

pub fn power_force<T: Real>(theta: &ChargeCurrent<T>, a_prime: &AField<T>) -> Result<Vec<PowerForce<T>>> {
    check_grids(&theta.grid, &a_prime.grid)?;
    Ok((0..theta.grid.len()).into_par_iter().map(|i| power_force_point(&theta.at(i), &a_prime.at(i))).collect())
}

/// Norms of `c·Re M = (E′,j^E) + (H′,j^H)` and `Im M = (B′,j^E) − (D′,j^H)`.
/// Both vanish on interacting trajectories.
pub fn power_identities<T: Real>(
    theta: &ChargeCurrent<T>,
    a_prime: &AField<T>,
    medium: &Medium<T>,
) -> Result<(Residual<T>, Residual<T>)> {
    let pf = power_force(theta, a_prime)?;
    let c = medium.c();
    let re: Vec<T> = pf.iter().map(|p| p.power.re * c).collect();
    let im: Vec<T> = pf.iter().map(|p| p.power.im).collect();
    Ok((Residual::of_real(&re), Residual::of_real(&im)))
}

/// `‖Θ1∘A2 + Θ2∘A1‖`.
pub fn reciprocity_residual<T: Real>(
    theta1: &ChargeCurrent<T>,
    a1: &AField<T>,
    theta2: &ChargeCurrent<T>,
    a2: &AField<T>,
) -> Result<Residual<T>> {
    let mut r = theta_times_a(theta1, a2)?;
    r.axpy(T::one(), &theta_times_a(theta2, a1)?);
    Ok(Residual::of_bq(&r))
}

fn check_window<X>(window: &[X]) -> Result<()> {
    if window.len() < 3 {
        return Err(EgmError::InsufficientHistory { needed: 3, got: window.len() });
    }
    Ok(())
}

fn centered_c<T: Real>(prev: &[Complex<T>], next: &[Complex<T>], dtau: T) -> Vec<Complex<T>> {
    let s = T::one() / (dtau + dtau);
    prev.iter().zip(next).map(|(a, b)| (*b - *a) * s).collect()
}

fn centered_r<T: Real>(prev: &[T], next: &[T], dtau: T) -> Vec<T> {
    let s = T::one() / (dtau + dtau);
    prev.iter().zip(next).map(|(a, b)| (*b - *a) * s).collect()
}

/// `∂τρ + div J` at the middle of the last three levels.
pub fn charge_conservation_residual<T: Real>(
    nabla: &Nabla<T>,
    window: &[&ChargeCurrent<T>],
    dtau: T,
) -> Result<Residual<T>> {
    check_window(window)?;
    let [p, c, n] = [window[window.len() - 3], window[window.len() - 2], window[window.len() - 1]];
    let mut r = centered_c(&p.rho_field(), &n.rho_field(), dtau);
    let div = nabla.div(&c.vector_field())?;
    r.iter_mut().zip(&div.data).for_each(|(x, d)| *x = *x + *d);
    Ok(Residual::of_complex(&r))
}

/// `∂τW + div P − (j^H·H − j^E·E)/c` at the middle level.
pub fn poynting_residual<T: Real>(
    nabla: &Nabla<T>,
    a_window: &[&AField<T>],
    theta: &ChargeCurrent<T>,
    medium: &Medium<T>,
    dtau: T,
) -> Result<Residual<T>> {
    check_window(a_window)?;
    let len = a_window.len();
    let [p, c, n] = [a_window[len - 3], a_window[len - 2], a_window[len - 1]];
    check_grids(&c.grid, &theta.grid)?;
    let mut r = centered_r(&energy_momentum(p).w, &energy_momentum(n).w, dtau);
    let em = energy_momentum(c);
    let pv = VectorField { grid: c.grid, data: em.p.map(|v| v.into_iter().map(|x| Complex::new(x, T::zero())).collect()) };
    let div = nabla.div(&pv)?;
    let inv_c = T::one() / medium.c();
    for (i, x) in r.iter_mut().enumerate() {
        let (e, h) = medium.physical_strength(&c.at(i));
        let (je, jh) = medium.physical_current(&theta.at(i).vector);
        *x = *x + div.data[i].re - (dot_re(jh, h) - dot_re(je, e)) * inv_c;
    }
    Ok(Residual::of_real(&r))
}

/// Current energy `Q = 0.5‖J‖²`, current Poynting analog `P_J = 0.5i J×J̄`
/// and the full biquaternion `0.5 Θ∘Θ*`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentEnergy<T> {
    pub grid: Grid<T>,
    pub q: Vec<T>,
    pub p_j: [Vec<T>; 3],
    pub full: BqField<T>,
    /// `max |P_J − c⁻¹ j^H×j^E|`.
    pub p_j_crosscheck: T,
}

impl<T: Real> CurrentEnergy<T> {
    pub fn total(&self) -> T {
        self.q.iter().fold(T::zero(), |s, v| s + *v) * self.grid.cell_volume()
    }
}

pub fn current_energy<T: Real>(theta: &ChargeCurrent<T>, medium: &Medium<T>) -> CurrentEnergy<T> {
    let n = theta.grid.len();
    let half = T::lit(0.5);
    let inv_c = T::one() / medium.c();
    let mut q = vec![T::zero(); n];
    let mut p_j: [Vec<T>; 3] = std::array::from_fn(|_| vec![T::zero(); n]);
    let mut full = BqField::zeros(theta.grid);
    let mut check = T::zero();
    for i in 0..n {
        let b = theta.at(i);
        let j = b.vector;
        q[i] = half * j.norm_sqr();
        let p = j.cross(&j.conj()).scale(Complex::new(T::zero(), half)).re();
        let (je, jh) = medium.physical_current(&j);
        let phys = cross_re(jh, je);
        for c in 0..3 {
            p_j[c][i] = p[c];
            check = check.max((p[c] - phys[c] * inv_c).abs());
        }
        full.set(i, b.mul(&b.conj()).scale(Complex::new(half, T::zero())));
    }
    CurrentEnergy { grid: theta.grid, q, p_j, full, p_j_crosscheck: check }
}

fn real_to_complex<T: Real>(grid: Grid<T>, v: &[Vec<T>; 3]) -> VectorField<T> {
    VectorField { grid, data: std::array::from_fn(|c| v[c].iter().map(|x| Complex::new(*x, T::zero())).collect()) }
}

/// `U = −div P_J + Re(∇ρ·J̄)`, the dispersal rate of the free law `∂τQ = −U`.
pub fn dispersal_rate<T: Real>(nabla: &Nabla<T>, theta: &ChargeCurrent<T>, medium: &Medium<T>) -> Result<Vec<T>> {
    let ce = current_energy(theta, medium);
    let div_pj = nabla.div(&real_to_complex(theta.grid, &ce.p_j))?;
    let grad_rho = nabla.grad(&ScalarField { grid: theta.grid, data: theta.rho_field() })?;
    let j = theta.vector_field();
    Ok((0..theta.grid.len())
        .map(|i| -div_pj.data[i].re + grad_rho.at(i).hdot(&j.at(i)).re)
        .collect())
}

/// `κ(∂τQ − div P_J + Re(∇ρ·J̄)) − Re(V·J̄)` at the middle level, where `V`
/// is the vector part of `−Θ∘A′`. Equivalently the right-hand side is
/// `Im(F·J̄)` for the force `F = iV`.
pub fn first_law_residual<T: Real>(
    nabla: &Nabla<T>,
    window: &[&ChargeCurrent<T>],
    a_prime: Option<&AField<T>>,
    medium: &Medium<T>,
    dtau: T,
) -> Result<Residual<T>> {
    check_window(window)?;
    let len = window.len();
    let [p, c, n] = [window[len - 3], window[len - 2], window[len - 1]];
    let kappa = medium.kappa();
    let dq = centered_r(&current_energy(p, medium).q, &current_energy(n, medium).q, dtau);
    let u = dispersal_rate(nabla, c, medium)?;
    let forcing: Vec<T> = match a_prime {
        Some(ap) => {
            check_grids(&c.grid, &ap.grid)?;
            (0..c.grid.len())
                .map(|i| {
                    let f = -c.at(i).mul(&Biquaternion::from_vector(ap.at(i)));
                    f.vector.hdot(&c.at(i).vector).re
                })
                .collect()
        }
        None => vec![T::zero(); c.grid.len()],
    };
    let r: Vec<T> = (0..c.grid.len()).map(|i| kappa * (dq[i] + u[i]) - forcing[i]).collect();
    Ok(Residual::of_real(&r))
}

/// `∂τ²ρ − Δρ` by second differences at the middle level.
pub fn wave_residual<T: Real>(nabla: &Nabla<T>, window: &[&[Complex<T>]], dtau: T) -> Result<Residual<T>> {
    check_window(window)?;
    let len = window.len();
    let [p, c, n] = [window[len - 3], window[len - 2], window[len - 1]];
    let lap = nabla.laplacian_raw(c);
    let s = T::one() / (dtau * dtau);
    let two = T::lit(2.0);
    let r: Vec<Complex<T>> = (0..c.len()).map(|i| (n[i] - c[i] * two + p[i]) * s - lap[i]).collect();
    Ok(Residual::of_complex(&r))
}

/// Sign of the volume-integrated interaction energy `δW`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnergyExchange {
    /// `δW > 0`.
    Release,
    /// `δW < 0`.
    Absorb,
    Conserve,
}

impl fmt::Display for EnergyExchange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Release => "release",
            Self::Absorb => "absorb",
            Self::Conserve => "conserve",
        })
    }
}

#[derive(Clone, Debug)]
pub struct InteractionEnergy<T> {
    /// `Ξ(ΣA^k)`.
    pub total: BqField<T>,
    pub individual: Vec<BqField<T>>,
    /// `Ξ^{kl}` for `k < l`.
    pub pairs: Vec<((usize, usize), BqField<T>)>,
    /// `δΞ = Σ_{k<l} Ξ^{kl}`.
    pub delta: BqField<T>,
    /// `max |Ξ_total − ΣΞ^k − δΞ|`.
    pub decomposition_error: T,
    /// `∫ δW dV`.
    pub delta_w: T,
    pub exchange: EnergyExchange,
}

/// `Ξ^{kl} = 0.5(A^k∘A^{l*} + A^l∘A^{k*})`.
pub fn pair_energy<T: Real>(ak: &AField<T>, al: &AField<T>) -> Result<BqField<T>> {
    check_grids(&ak.grid, &al.grid)?;
    let half = Complex::new(T::lit(0.5), T::zero());
    let mut out = BqField::zeros(ak.grid);
    for i in 0..ak.grid.len() {
        let bk = Biquaternion::from_vector(ak.at(i));
        let bl = Biquaternion::from_vector(al.at(i));
        out.set(i, (bk.mul(&bl.conj()) + bl.mul(&bk.conj())).scale(half));
    }
    Ok(out)
}

pub fn interaction_energy<T: Real>(fields: &[&AField<T>]) -> Result<InteractionEnergy<T>> {
    if fields.len() < 2 {
        return Err(EgmError::TooFewFields { needed: 2, got: fields.len() });
    }
    let grid = fields[0].grid;
    let mut sum = AField::zeros(grid);
    for f in fields {
        check_grids(&grid, &f.grid)?;
        sum.axpy(T::one(), f);
    }
    let total = energy_momentum_bq(&sum);
    let individual: Vec<BqField<T>> = fields.iter().map(|f| energy_momentum_bq(f)).collect();
    let mut pairs = Vec::new();
    let mut delta = BqField::zeros(grid);
    for k in 0..fields.len() {
        for l in k + 1..fields.len() {
            let p = pair_energy(fields[k], fields[l])?;
            delta.axpy(T::one(), &p);
            pairs.push(((k, l), p));
        }
    }
    let mut err = T::zero();
    let mut delta_w = T::zero();
    let mut scale = T::zero();
    for i in 0..grid.len() {
        let mut r = total.at(i) - delta.at(i);
        for x in &individual {
            r = r - x.at(i);
            scale = scale + x.scalar[i].re;
        }
        err = err.max(r.max_abs());
        delta_w = delta_w + delta.scalar[i].re;
        scale = scale + total.scalar[i].re;
    }
    let dv = grid.cell_volume();
    delta_w = delta_w * dv;
    let tol = scale * dv * T::lit(1e3) * T::eps();
    let exchange = if delta_w > tol {
        EnergyExchange::Release
    } else if delta_w < -tol {
        EnergyExchange::Absorb
    } else {
        EnergyExchange::Conserve
    };
    Ok(InteractionEnergy { total, individual, pairs, delta, decomposition_error: err, delta_w, exchange })
}

/// Axis-aligned box spanned by grid planes `lo[a] ≤ i ≤ hi[a]`. `hi` may
/// equal the point count, in which case the region closes periodically.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Region {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl Region {
    pub fn whole<T: Real>(grid: &Grid<T>) -> Self {
        Self { lo: [0; 3], hi: grid.n() }
    }

    fn validate<T: Real>(&self, grid: &Grid<T>) -> Result<()> {
        for a in 0..3 {
            if self.hi[a] <= self.lo[a] || self.hi[a] - self.lo[a] > grid.n()[a] {
                return Err(EgmError::DegenerateRegion(format!(
                    "axis {a}: planes {}..{} on {} points",
                    self.lo[a],
                    self.hi[a],
                    grid.n()[a]
                )));
            }
        }
        Ok(())
    }

    fn closes(&self, axis: usize, n: usize) -> bool {
        self.hi[axis] - self.lo[axis] == n
    }
}

/// Spatial quadrature for the integral identities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// Grid-plane trapezoid rule.
    Trapezoid,
    /// Exact integration of the trigonometric interpolant.
    #[default]
    Spectral,
}

/// A single time level of one field pair.
#[derive(Clone, Copy, Debug)]
pub struct Snapshot<'a, T> {
    pub tau: T,
    pub a: &'a AField<T>,
    pub theta: &'a ChargeCurrent<T>,
}

/// Left-hand sides of the four integral conservation laws. Each is zero
/// for exact solutions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegralLaws<T> {
    /// `∫(ρ(τ) − ρ(0))dV + ∫₀^τ∮(n,J)dS`.
    pub charge: T,
    /// `∫(W(τ) − W(0))dV + ∫₀^τ∮(n,P)dS − ∫₀^τ∫(j^H·H − j^E·E)/c dV`.
    pub energy: T,
    /// `∫_S(A(τ) − A(0), n)dS + i∫₀^τ∮_l(A,e_l)dl + ∫₀^τ∫_S(J,n)dS` on the
    /// lower z-face, `n = e₃`, contour counterclockwise seen from `+z`.
    pub circulation: T,
    /// `‖∫(A(τ) − A(0))dV + i∫₀^τ∮ n×A dS + ∫₀^τ∫J dV‖`.
    pub volume: T,
}

struct Weights<T> {
    w: [Vec<T>; 3],
}

impl<T: Real> Weights<T> {
    fn new(nabla: &Nabla<T>, region: &Region, quad: Quadrature) -> Self {
        let grid = nabla.grid();
        let w = std::array::from_fn(|a| {
            let n = grid.n()[a];
            let h = grid.spacing(a);
            match quad {
                Quadrature::Spectral => {
                    nabla.interval_weights(a, from_usize::<T>(region.lo[a]) * h, from_usize::<T>(region.hi[a]) * h)
                }
                Quadrature::Trapezoid => {
                    let mut w = vec![T::zero(); n];
                    for i in region.lo[a]..=region.hi[a] {
                        let end = i == region.lo[a] || i == region.hi[a];
                        w[i % n] = w[i % n] + if end { h * T::lit(0.5) } else { h };
                    }
                    w
                }
            }
        });
        Self { w }
    }

    fn volume(&self, grid: &Grid<T>, f: impl Fn(usize) -> Complex<T>) -> Complex<T> {
        let [n0, n1, n2] = grid.n();
        let mut acc = Complex::zero();
        for i in 0..n0 {
            if self.w[0][i] == T::zero() {
                continue;
            }
            for j in 0..n1 {
                let wij = self.w[0][i] * self.w[1][j];
                if wij == T::zero() {
                    continue;
                }
                for k in 0..n2 {
                    acc = acc + f(grid.index(i, j, k)) * (wij * self.w[2][k]);
                }
            }
        }
        acc
    }

    /// Integral over the grid plane `index_axis = plane`.
    fn face(&self, grid: &Grid<T>, axis: usize, plane: usize, f: impl Fn(usize) -> Complex<T>) -> Complex<T> {
        let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
        let n = grid.n();
        let mut acc = Complex::zero();
        for u in 0..n[b] {
            for v in 0..n[c] {
                let mut ijk = [0; 3];
                ijk[axis] = plane % n[axis];
                ijk[b] = u;
                ijk[c] = v;
                acc = acc + f(grid.index(ijk[0], ijk[1], ijk[2])) * (self.w[b][u] * self.w[c][v]);
            }
        }
        acc
    }

    /// Integral along `axis` on the line through the other two fixed planes.
    fn line(&self, grid: &Grid<T>, axis: usize, fixed: [usize; 3], f: impl Fn(usize) -> Complex<T>) -> Complex<T> {
        let n = grid.n();
        let mut acc = Complex::zero();
        for t in 0..n[axis] {
            let mut ijk = [fixed[0] % n[0], fixed[1] % n[1], fixed[2] % n[2]];
            ijk[axis] = t;
            acc = acc + f(grid.index(ijk[0], ijk[1], ijk[2])) * self.w[axis][t];
        }
        acc
    }

    /// `∮(n, V)dS` over the region boundary, outward normal.
    fn flux(&self, grid: &Grid<T>, region: &Region, v: impl Fn(usize, usize) -> Complex<T>) -> Complex<T> {
        let mut acc = Complex::zero();
        for a in 0..3 {
            if region.closes(a, grid.n()[a]) {
                continue;
            }
            acc = acc + self.face(grid, a, region.hi[a], |i| v(i, a)) - self.face(grid, a, region.lo[a], |i| v(i, a));
        }
        acc
    }
}

/// Per-level integrand values feeding the time quadrature.
struct LevelTerms<T> {
    charge_volume: Complex<T>,
    charge_flux: Complex<T>,
    energy_volume: T,
    energy_flux: T,
    energy_source: T,
    circ_face_a: Complex<T>,
    circ_contour: Complex<T>,
    circ_face_j: Complex<T>,
    vol_a: [Complex<T>; 3],
    vol_rot: [Complex<T>; 3],
    vol_j: [Complex<T>; 3],
}

fn level_terms<T: Real>(w: &Weights<T>, grid: &Grid<T>, region: &Region, s: &Snapshot<'_, T>, medium: &Medium<T>) -> LevelTerms<T> {
    let a = s.a;
    let th = s.theta;
    let inv_c = T::one() / medium.c();
    let re = |x: T| Complex::new(x, T::zero());
    let charge_volume = w.volume(grid, |i| th.rho(i));
    let charge_flux = w.flux(grid, region, |i, ax| th.vector[ax][i]);
    let em = energy_momentum(a);
    let energy_volume = w.volume(grid, |i| re(em.w[i])).re;
    let energy_flux = w.flux(grid, region, |i, ax| re(em.p[ax][i])).re;
    let energy_source = w
        .volume(grid, |i| {
            let (e, h) = medium.physical_strength(&a.at(i));
            let (je, jh) = medium.physical_current(&th.at(i).vector);
            re((dot_re(jh, h) - dot_re(je, e)) * inv_c)
        })
        .re;

    let z0 = region.lo[2];
    let circ_face_a = w.face(grid, 2, z0, |i| a.data[2][i]);
    let circ_face_j = w.face(grid, 2, z0, |i| th.vector[2][i]);
    let (x0, x1, y0, y1) = (region.lo[0], region.hi[0], region.lo[1], region.hi[1]);
    let mut circ_contour = Complex::zero();
    if !region.closes(1, grid.n()[1]) {
        circ_contour = circ_contour + w.line(grid, 0, [0, y0, z0], |i| a.data[0][i])
            - w.line(grid, 0, [0, y1, z0], |i| a.data[0][i]);
    }
    if !region.closes(0, grid.n()[0]) {
        circ_contour = circ_contour + w.line(grid, 1, [x1, 0, z0], |i| a.data[1][i])
            - w.line(grid, 1, [x0, 0, z0], |i| a.data[1][i]);
    }

    let vol_a = std::array::from_fn(|c| w.volume(grid, |i| a.data[c][i]));
    let vol_j = std::array::from_fn(|c| w.volume(grid, |i| th.vector[c][i]));
    // ∮ n×A: component c collects faces of the two other axes.
    let vol_rot = std::array::from_fn(|c| {
        let mut acc = Complex::zero();
        for ax in 0..3 {
            if ax == c || region.closes(ax, grid.n()[ax]) {
                continue;
            }
            // (e_ax × A)_c = ε_{c,ax,m} A_m
            let m = 3 - c - ax;
            let sign = if (c + 1) % 3 == ax { T::one() } else { -T::one() };
            let hi = w.face(grid, ax, region.hi[ax], |i| a.data[m][i]);
            let lo = w.face(grid, ax, region.lo[ax], |i| a.data[m][i]);
            acc = acc + (hi - lo) * sign;
        }
        acc
    });
    LevelTerms {
        charge_volume,
        charge_flux,
        energy_volume,
        energy_flux,
        energy_source,
        circ_face_a,
        circ_contour,
        circ_face_j,
        vol_a,
        vol_rot,
        vol_j,
    }
}

/// Time-quadrature weights on a uniform history: composite Simpson, with a
/// 3/8 panel at the end for an odd number of intervals. Falls back to the
/// trapezoid rule when Simpson does not apply or `quad` asks for it.
fn time_weights<T: Real>(taus: &[T], quad: Quadrature) -> Vec<T> {
    let m = taus.len().saturating_sub(1);
    let mut w = vec![T::zero(); taus.len()];
    if m == 0 {
        return w;
    }
    let h = (taus[m] - taus[0]) / from_usize(m);
    let uniform = taus.windows(2).all(|p| ((p[1] - p[0]) - h).abs() <= h * T::lit(1e-9));
    if quad == Quadrature::Trapezoid || !uniform || m < 2 {
        for k in 0..m {
            let d = (taus[k + 1] - taus[k]) * T::lit(0.5);
            w[k] = w[k] + d;
            w[k + 1] = w[k + 1] + d;
        }
        return w;
    }
    let simpson_end = if m % 2 == 0 { m } else { m - 3 };
    let third = h / T::lit(3.0);
    let mut k = 0;
    while k < simpson_end {
        w[k] = w[k] + third;
        w[k + 1] = w[k + 1] + third * T::lit(4.0);
        w[k + 2] = w[k + 2] + third;
        k += 2;
    }
    if simpson_end < m {
        let e = h * T::lit(3.0 / 8.0);
        for (off, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[simpson_end + off] = w[simpson_end + off] + e * T::lit(*c);
        }
    }
    w
}

/// Evaluates the four integral laws over `history` (first level is `τ = 0`).
pub fn integral_laws<T: Real>(
    nabla: &Nabla<T>,
    history: &[Snapshot<'_, T>],
    region: Region,
    medium: &Medium<T>,
    quad: Quadrature,
) -> Result<IntegralLaws<T>> {
    if history.len() < 2 {
        return Err(EgmError::InsufficientHistory { needed: 2, got: history.len() });
    }
    let grid = *nabla.grid();
    region.validate(&grid)?;
    for s in history {
        check_grids(&grid, &s.a.grid)?;
        check_grids(&grid, &s.theta.grid)?;
    }
    let w = Weights::new(nabla, &region, quad);
    let terms: Vec<LevelTerms<T>> =
        history.par_iter().map(|s| level_terms(&w, &grid, &region, s, medium)).collect();
    let taus: Vec<T> = history.iter().map(|s| s.tau).collect();
    let tw = time_weights(&taus, quad);
    let first = &terms[0];
    let last = terms.last().expect("non-empty");
    let iu = Complex::<T>::i();

    let mut charge = last.charge_volume - first.charge_volume;
    let mut energy = last.energy_volume - first.energy_volume;
    let mut circ = last.circ_face_a - first.circ_face_a;
    let mut vol: [Complex<T>; 3] = std::array::from_fn(|c| last.vol_a[c] - first.vol_a[c]);
    for (t, wt) in terms.iter().zip(&tw) {
        let wt = *wt;
        charge = charge + t.charge_flux * wt;
        energy = energy + (t.energy_flux - t.energy_source) * wt;
        circ = circ + (iu * t.circ_contour + t.circ_face_j) * wt;
        for c in 0..3 {
            vol[c] = vol[c] + (iu * t.vol_rot[c] + t.vol_j[c]) * wt;
        }
    }
    Ok(IntegralLaws {
        charge: charge.norm(),
        energy: energy.abs(),
        circulation: circ.norm(),
        volume: CVec3(vol).norm(),
    })
}

/// Unitarity defect of a biquaternion field: `max(|Im scalar|, |Re vector|)`.
pub fn unitarity_defect<T: Real>(f: &BqField<T>) -> T {
    (0..f.grid.len()).fold(T::zero(), |m, i| {
        let b = f.at(i);
        let v = b.vector.re();
        m.max(b.scalar.im.abs()).max(v[0].abs()).max(v[1].abs()).max(v[2].abs())
    })
}

/// L∞ norm of a biquaternion difference, as used by cross-checks.
pub fn bq_distance<T: Real>(a: &BqField<T>, b: &BqField<T>) -> T {
    (0..a.grid.len()).fold(T::zero(), |m, i| m.max(bq_norm_sqr(&(a.at(i) - b.at(i))).sqrt()))
}
