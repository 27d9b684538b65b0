//! Jump conditions on shock fronts and the characteristic symbol of the
//! free charge-current system.
//!
//! Everything here is algebraic: jump data is supplied, not detected.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex;

use crate::biquaternion::CVec3;
use crate::diagnostics::energy_momentum_point;
use crate::error::{EgmError, Result};
use crate::field::Medium;
use crate::scalar::Real;

/// Jumps across a front moving along the unit vector `m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontData<T> {
    pub m: [T; 3],
    pub jump_a: CVec3<T>,
    pub jump_rho: Complex<T>,
    pub jump_j: CVec3<T>,
}

impl<T: Real> FrontData<T> {
    pub fn new(m: [T; 3], jump_a: CVec3<T>, jump_rho: Complex<T>, jump_j: CVec3<T>) -> Result<Self> {
        check_unit(m)?;
        Ok(Self { m, jump_a, jump_rho, jump_j })
    }
}

pub fn check_unit<T: Real>(m: [T; 3]) -> Result<()> {
    let norm = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
    if !((norm - T::one()).abs() <= T::lit(1e3) * T::eps()) {
        return Err(EgmError::NonUnitVector(norm.as_f64()));
    }
    Ok(())
}

/// `r1 = [A] + i[A]×m` and the bilinear transversality `([A], m)`.
pub fn afield_jump_residual<T: Real>(d: &FrontData<T>) -> Result<(CVec3<T>, Complex<T>)> {
    check_unit(d.m)?;
    let m = CVec3::from_real(d.m);
    let r1 = d.jump_a + d.jump_a.cross(&m).scale(Complex::i());
    Ok((r1, d.jump_a.dot(&m)))
}

/// Residuals of the strength and energy forms of the jump conditions.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct JumpEnergyResiduals<T> {
    /// `‖√ε[E] − √μ[H]×m‖`.
    pub electric: T,
    /// `‖√μ[H] + √ε[E]×m‖`.
    pub magnetic: T,
    /// `|[W] − (m,[P])|`.
    pub energy_flux: T,
    /// `|[ρ] − (m,[J])|`.
    pub charge_flux: T,
    /// `|W − ‖P‖|` behind a front with zero field ahead of it.
    pub zero_ahead: T,
}

/// `[E]`, `[H]` are the physical strength jumps; the energy relations
/// assume zero field ahead of the front, so `[W]` and `[P]` are the values
/// behind it.
pub fn afield_jump_energy<T: Real>(
    d: &FrontData<T>,
    e_jump: [T; 3],
    h_jump: [T; 3],
    medium: &Medium<T>,
) -> JumpEnergyResiduals<T> {
    let se = medium.epsilon().sqrt();
    let sm = medium.mu().sqrt();
    let m = d.m;
    let hxm = cross(h_jump, m);
    let exm = cross(e_jump, m);
    let electric = norm3(std::array::from_fn(|c| se * e_jump[c] - sm * hxm[c]));
    let magnetic = norm3(std::array::from_fn(|c| sm * h_jump[c] + se * exm[c]));

    let (w, p) = energy_momentum_point(&medium.complex_strength(e_jump, h_jump));
    let mp = m[0] * p[0] + m[1] * p[1] + m[2] * p[2];
    let mj = CVec3::from_real(m).dot(&d.jump_j);
    JumpEnergyResiduals {
        electric,
        magnetic,
        energy_flux: (w - mp).abs(),
        charge_flux: (d.jump_rho - mj).norm(),
        zero_ahead: (w - norm3(p)).abs(),
    }
}

fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm3<T: Real>(a: [T; 3]) -> T {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// `r_scalar = [ρ] − ([J],m)`, `r_vector = m[ρ] − [J] − i m×[J]`.
pub fn theta_jump_residual<T: Real>(d: &FrontData<T>) -> Result<(Complex<T>, CVec3<T>)> {
    check_unit(d.m)?;
    let m = CVec3::from_real(d.m);
    let r_scalar = d.jump_rho - d.jump_j.dot(&m);
    let r_vector = m.scale(d.jump_rho) - d.jump_j - m.cross(&d.jump_j).scale(Complex::i());
    Ok((r_scalar, r_vector))
}

/// Symbol of the free charge-current system along `m`: the determinant
/// `det(S − λI)` with
///
/// ```text
///     | 0    m₁    m₂    m₃  |
/// S = | m₁   0    −im₃   im₂ |
///     | m₂   im₃   0    −im₁ |
///     | m₃  −im₂   im₁   0   |
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicSymbol {
    pub m: [f64; 3],
    pub matrix: Matrix4<Complex<f64>>,
}

impl CharacteristicSymbol {
    pub fn new(m: [f64; 3]) -> Result<Self> {
        check_unit(m)?;
        let r = |x: f64| Complex::new(x, 0.0);
        let i = |x: f64| Complex::new(0.0, x);
        let [m1, m2, m3] = m;
        #[rustfmt::skip]
        let matrix = Matrix4::new(
            r(0.0), r(m1),   r(m2),   r(m3),
            r(m1),  r(0.0),  i(-m3),  i(m2),
            r(m2),  i(m3),   r(0.0),  i(-m1),
            r(m3),  i(-m2),  i(m1),   r(0.0),
        );
        Ok(Self { m, matrix })
    }

    /// `S − λI`.
    pub fn at(&self, lambda: f64) -> Matrix4<Complex<f64>> {
        self.matrix - Matrix4::identity() * Complex::new(lambda, 0.0)
    }

    /// Coefficients `[1, c₁, c₂, c₃, c₄]` of `det(λI − S) = λ⁴ + c₁λ³ + …`
    /// by the Faddeev–LeVerrier recursion. Equal to `det(S − λI)` for 4×4.
    pub fn polynomial(&self) -> [f64; 5] {
        let a = self.matrix;
        let id = Matrix4::<Complex<f64>>::identity();
        let mut coeffs = [Complex::new(1.0, 0.0); 5];
        let mut mk = Matrix4::<Complex<f64>>::zeros();
        for k in 1..=4 {
            mk = a * mk + id * coeffs[k - 1];
            coeffs[k] = -(a * mk).trace() / Complex::new(k as f64, 0.0);
        }
        coeffs.map(|c| c.re)
    }

    /// Roots of `det(S − λI)`, ascending. `S` is Hermitian, so they are
    /// real and equal its eigenvalues.
    pub fn roots(&self) -> [f64; 4] {
        let eig = self.matrix.symmetric_eigen();
        let mut out: [f64; 4] = std::array::from_fn(|k| eig.eigenvalues[k]);
        out.sort_by(f64::total_cmp);
        out
    }

    /// `dim ker(S − λI)`, counted as eigenvalues within `tol` of `λ`.
    pub fn null_space_dim(&self, lambda: f64, tol: f64) -> usize {
        self.roots().iter().filter(|r| (*r - lambda).abs() <= tol).count()
    }

    /// A unit null vector of `S − λI`, if one exists within `tol`.
    pub fn null_vector(&self, lambda: f64, tol: f64) -> Option<Vector4<Complex<f64>>> {
        let eig = self.matrix.symmetric_eigen();
        (0..4)
            .find(|&k| (eig.eigenvalues[k] - lambda).abs() <= tol)
            .map(|k| eig.eigenvectors.column(k).into_owned())
    }
}

pub fn characteristic_roots(m: [f64; 3]) -> Result<[f64; 4]> {
    Ok(CharacteristicSymbol::new(m)?.roots())
}

/// Evaluates `λ⁴ + c₁λ³ + c₂λ² + c₃λ + c₄`.
pub fn eval_polynomial(c: &[f64; 5], lambda: f64) -> f64 {
    c.iter().fold(0.0, |acc, v| acc * lambda + v)
}
