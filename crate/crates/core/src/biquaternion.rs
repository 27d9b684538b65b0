//! Biquaternion algebra with involution.
//!
//! A biquaternion is a complex scalar `f` plus a complex 3-vector `F`. The
//! product is
//!
//! ```text
//! (f + F) ∘ (g + G) = (fg − (F,G)) + (fG + gF + F × G)
//! ```
//!
//! where `(F,G) = Σ F_k G_k` is the complex-*bilinear* dot product (no
//! conjugation) and `×` is the complex cross product. Conjugation is
//! `(f + F)* = f̄ − F̄`; it is an anti-automorphism of the product.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

/// Complex 3-vector. Dot products come in two flavours: [`CVec3::dot`] is
/// bilinear (used by the product), [`CVec3::hdot`] is Hermitian (used for
/// norms and energy densities).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CVec3<T>(pub [Complex<T>; 3]);

impl<T: Real> CVec3<T> {
    pub fn new(x: Complex<T>, y: Complex<T>, z: Complex<T>) -> Self {
        Self([x, y, z])
    }

    pub fn zero() -> Self {
        Self([Complex::zero(); 3])
    }

    /// Basis vector `e_axis` with unit real component.
    pub fn basis(axis: usize) -> Self {
        let mut v = Self::zero();
        v.0[axis] = Complex::one();
        v
    }

    pub fn from_real(v: [T; 3]) -> Self {
        Self(v.map(|x| Complex::new(x, T::zero())))
    }

    /// `re + i·im` assembled from two real vectors.
    pub fn from_re_im(re: [T; 3], im: [T; 3]) -> Self {
        Self([
            Complex::new(re[0], im[0]),
            Complex::new(re[1], im[1]),
            Complex::new(re[2], im[2]),
        ])
    }

    pub fn re(&self) -> [T; 3] {
        self.0.map(|c| c.re)
    }

    pub fn im(&self) -> [T; 3] {
        self.0.map(|c| c.im)
    }

    /// Complex-bilinear dot product `Σ a_k b_k`.
    pub fn dot(&self, other: &Self) -> Complex<T> {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    /// Hermitian dot product `Σ a_k · conj(b_k)`.
    pub fn hdot(&self, other: &Self) -> Complex<T> {
        self.0[0] * other.0[0].conj() + self.0[1] * other.0[1].conj() + self.0[2] * other.0[2].conj()
    }

    pub fn cross(&self, other: &Self) -> Self {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = other.0;
        Self([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    }

    /// Componentwise complex conjugate.
    pub fn conj(&self) -> Self {
        Self(self.0.map(|c| c.conj()))
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self(self.0.map(|c| c * s))
    }

    pub fn scale_re(&self, s: T) -> Self {
        Self(self.0.map(|c| c * s))
    }

    /// `Σ |a_k|²`, the squared Hermitian norm.
    pub fn norm_sqr(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, c| acc.max(c.re.abs()).max(c.im.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl<T> Index<usize> for CVec3<T> {
    type Output = Complex<T>;
    fn index(&self, i: usize) -> &Complex<T> {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for CVec3<T> {
    fn index_mut(&mut self, i: usize) -> &mut Complex<T> {
        &mut self.0[i]
    }
}

impl<T: Real> Add for CVec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<T: Real> Sub for CVec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<T: Real> Neg for CVec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|c| -c))
    }
}

impl<T: Real> AddAssign for CVec3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> SubAssign for CVec3<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> Mul<Complex<T>> for CVec3<T> {
    type Output = Self;
    fn mul(self, s: Complex<T>) -> Self {
        self.scale(s)
    }
}

/// Complex quaternion `f + F`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Biquaternion<T> {
    pub scalar: Complex<T>,
    pub vector: CVec3<T>,
}

impl<T: Real> Biquaternion<T> {
    pub fn new(scalar: Complex<T>, vector: CVec3<T>) -> Self {
        Self { scalar, vector }
    }

    pub fn zero() -> Self {
        Self::new(Complex::zero(), CVec3::zero())
    }

    pub fn one() -> Self {
        Self::new(Complex::one(), CVec3::zero())
    }

    pub fn from_scalar(f: Complex<T>) -> Self {
        Self::new(f, CVec3::zero())
    }

    /// Pure-vector biquaternion `0 + F`.
    pub fn from_vector(v: CVec3<T>) -> Self {
        Self::new(Complex::zero(), v)
    }

    /// Unit basis element `0 + e_axis`.
    pub fn basis(axis: usize) -> Self {
        Self::from_vector(CVec3::basis(axis))
    }

    /// Builds from the 8 real components `[f.re, f.im, F1.re, F1.im, …]`.
    pub fn from_components(c: [T; 8]) -> Self {
        Self::new(
            Complex::new(c[0], c[1]),
            CVec3::new(Complex::new(c[2], c[3]), Complex::new(c[4], c[5]), Complex::new(c[6], c[7])),
        )
    }

    pub fn components(&self) -> [T; 8] {
        let v = self.vector.0;
        [
            self.scalar.re,
            self.scalar.im,
            v[0].re,
            v[0].im,
            v[1].re,
            v[1].im,
            v[2].re,
            v[2].im,
        ]
    }

    /// Splits into scalar and vector parts. [`Biquaternion::new`] is the inverse.
    pub fn decompose(&self) -> (Complex<T>, CVec3<T>) {
        (self.scalar, self.vector)
    }

    /// `α·a + β·b`, componentwise.
    pub fn scaled_sum(a: &Self, alpha: Complex<T>, b: &Self, beta: Complex<T>) -> Self {
        Self::new(
            a.scalar * alpha + b.scalar * beta,
            a.vector.scale(alpha) + b.vector.scale(beta),
        )
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.scalar * s, self.vector.scale(s))
    }

    /// Quaternion product with the bilinear dot product.
    pub fn mul(&self, rhs: &Self) -> Self {
        let (f, a) = (self.scalar, &self.vector);
        let (g, b) = (rhs.scalar, &rhs.vector);
        Self::new(f * g - a.dot(b), b.scale(f) + a.scale(g) + a.cross(b))
    }

    /// Involution `f̄ − F̄`.
    pub fn conj(&self) -> Self {
        Self::new(self.scalar.conj(), -self.vector.conj())
    }

    /// Self-conjugate in the involution sense: real scalar, imaginary vector.
    pub fn is_unitary(&self, tol: T) -> bool {
        self.scalar.im.abs() <= tol && self.vector.re().iter().all(|x| x.abs() <= tol)
    }

    /// Largest absolute real component, the norm used for residual checks.
    pub fn max_abs(&self) -> T {
        self.components().iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|x| x.is_finite())
    }
}

impl<T: Real> Add for Biquaternion<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.scalar + o.scalar, self.vector + o.vector)
    }
}

impl<T: Real> Sub for Biquaternion<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.scalar - o.scalar, self.vector - o.vector)
    }
}

impl<T: Real> Neg for Biquaternion<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.scalar, -self.vector)
    }
}

impl<T: Real> AddAssign for Biquaternion<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Mul for Biquaternion<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Biquaternion::mul(&self, &rhs)
    }
}

impl<T: Real> Mul<Complex<T>> for Biquaternion<T> {
    type Output = Self;
    fn mul(self, s: Complex<T>) -> Self {
        self.scale(s)
    }
}
