//! Periodic grid and the grid-sampled field containers.
//!
//! Storage is structure-of-arrays, row-major with the last axis fastest:
//! `index(i, j, k) = (i * n1 + j) * n2 + k`.

use num_complex::Complex;
use num_traits::Zero;

use crate::biquaternion::{Biquaternion, CVec3};
use crate::error::{EgmError, Result};
use crate::scalar::{from_usize, Real};

/// Uniform periodic grid over the box `[0, L0) × [0, L1) × [0, L2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    n: [usize; 3],
    lengths: [T; 3],
    dtau: T,
}

impl<T: Real> Grid<T> {
    pub fn new(n: [usize; 3], lengths: [T; 3], dtau: T) -> Result<Self> {
        if n.iter().any(|&k| k == 0) {
            return Err(EgmError::InvalidGrid(format!("point counts must be positive, got {n:?}")));
        }
        if lengths.iter().any(|l| !(l.is_finite() && *l > T::zero())) {
            return Err(EgmError::InvalidGrid("box lengths must be positive and finite".into()));
        }
        if !(dtau.is_finite() && dtau > T::zero()) {
            return Err(EgmError::InvalidGrid("time step must be positive and finite".into()));
        }
        Ok(Self { n, lengths, dtau })
    }

    /// Cube with `n` points per axis and side `length`.
    pub fn cube(n: usize, length: T, dtau: T) -> Result<Self> {
        Self::new([n; 3], [length; 3], dtau)
    }

    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    pub fn lengths(&self) -> [T; 3] {
        self.lengths
    }

    pub fn dtau(&self) -> T {
        self.dtau
    }

    pub fn with_dtau(&self, dtau: T) -> Result<Self> {
        Self::new(self.n, self.lengths, dtau)
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> T {
        self.lengths[axis] / from_usize(self.n[axis])
    }

    pub fn min_spacing(&self) -> T {
        (0..3).map(|a| self.spacing(a)).fold(T::infinity(), T::min)
    }

    pub fn cell_volume(&self) -> T {
        self.spacing(0) * self.spacing(1) * self.spacing(2)
    }

    pub fn volume(&self) -> T {
        self.lengths[0] * self.lengths[1] * self.lengths[2]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.n[2];
        let j = (idx / self.n[2]) % self.n[1];
        let i = idx / (self.n[1] * self.n[2]);
        [i, j, k]
    }

    /// Physical coordinates of grid point `idx`.
    pub fn coords(&self, idx: usize) -> [T; 3] {
        let ijk = self.unravel(idx);
        [0, 1, 2].map(|a| from_usize::<T>(ijk[a]) * self.spacing(a))
    }

    /// Same point counts and box; time step may differ.
    pub fn same_space(&self, other: &Self) -> bool {
        self.n == other.n && self.lengths == other.lengths
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(EgmError::ShapeMismatch { expected, got })
    }
}

pub(crate) fn check_grids<T: Real>(a: &Grid<T>, b: &Grid<T>) -> Result<()> {
    if a.same_space(b) {
        Ok(())
    } else {
        Err(EgmError::GridMismatch)
    }
}

/// Real scalar field (physical input such as a charge density).
#[derive(Clone, Debug, PartialEq)]
pub struct RealField<T> {
    pub grid: Grid<T>,
    pub data: Vec<T>,
}

impl<T: Real> RealField<T> {
    pub fn new(grid: Grid<T>, data: Vec<T>) -> Result<Self> {
        check_len(grid.len(), data.len())?;
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self { grid, data: vec![T::zero(); grid.len()] }
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 3]) -> T) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        Self { grid, data }
    }
}

/// Real 3-vector field (physical input such as E, H or a current density).
#[derive(Clone, Debug, PartialEq)]
pub struct RealVectorField<T> {
    pub grid: Grid<T>,
    pub data: [Vec<T>; 3],
}

impl<T: Real> RealVectorField<T> {
    pub fn new(grid: Grid<T>, data: [Vec<T>; 3]) -> Result<Self> {
        for c in &data {
            check_len(grid.len(), c.len())?;
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self { grid, data: std::array::from_fn(|_| vec![T::zero(); grid.len()]) }
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 3]) -> [T; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.len() {
            let v = f(grid.coords(i));
            for a in 0..3 {
                out.data[a][i] = v[a];
            }
        }
        out
    }

    #[inline]
    pub fn at(&self, i: usize) -> [T; 3] {
        [self.data[0][i], self.data[1][i], self.data[2][i]]
    }
}

/// Complex scalar field.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    pub grid: Grid<T>,
    pub data: Vec<Complex<T>>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: Grid<T>, data: Vec<Complex<T>>) -> Result<Self> {
        check_len(grid.len(), data.len())?;
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self { grid, data: vec![Complex::zero(); grid.len()] }
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 3]) -> Complex<T>) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        Self { grid, data }
    }

    pub fn axpy(&mut self, a: T, x: &Self) {
        axpy_slice(&mut self.data, a, &x.data);
    }

    pub fn linf(&self) -> T {
        self.data.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    pub fn rms(&self) -> T {
        rms_of(self.data.iter().map(|c| c.norm_sqr()), self.data.len())
    }
}

/// Complex 3-vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<T> {
    pub grid: Grid<T>,
    pub data: [Vec<Complex<T>>; 3],
}

impl<T: Real> VectorField<T> {
    pub fn new(grid: Grid<T>, data: [Vec<Complex<T>>; 3]) -> Result<Self> {
        for c in &data {
            check_len(grid.len(), c.len())?;
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self { grid, data: std::array::from_fn(|_| vec![Complex::zero(); grid.len()]) }
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 3]) -> CVec3<T>) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.len() {
            out.set(i, f(grid.coords(i)));
        }
        out
    }

    #[inline]
    pub fn at(&self, i: usize) -> CVec3<T> {
        CVec3([self.data[0][i], self.data[1][i], self.data[2][i]])
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: CVec3<T>) {
        for a in 0..3 {
            self.data[a][i] = v.0[a];
        }
    }

    pub fn axpy(&mut self, a: T, x: &Self) {
        for c in 0..3 {
            axpy_slice(&mut self.data[c], a, &x.data[c]);
        }
    }

    pub fn scale(&mut self, s: Complex<T>) {
        for c in self.data.iter_mut() {
            c.iter_mut().for_each(|v| *v = *v * s);
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-T::one(), other);
        out
    }

    pub fn linf(&self) -> T {
        (0..self.grid.len()).fold(T::zero(), |m, i| m.max(self.at(i).norm()))
    }

    pub fn rms(&self) -> T {
        rms_of((0..self.grid.len()).map(|i| self.at(i).norm_sqr()), self.grid.len())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }
}

/// Biquaternion-valued field `f + F`.
#[derive(Clone, Debug, PartialEq)]
pub struct BqField<T> {
    pub grid: Grid<T>,
    pub scalar: Vec<Complex<T>>,
    pub vector: [Vec<Complex<T>>; 3],
}

impl<T: Real> BqField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        Self {
            grid,
            scalar: vec![Complex::zero(); grid.len()],
            vector: std::array::from_fn(|_| vec![Complex::zero(); grid.len()]),
        }
    }

    pub fn from_parts(scalar: ScalarField<T>, vector: VectorField<T>) -> Result<Self> {
        check_grids(&scalar.grid, &vector.grid)?;
        Ok(Self { grid: scalar.grid, scalar: scalar.data, vector: vector.data })
    }

    /// Pure-vector biquaternion field `0 + F`.
    pub fn from_vector(v: &VectorField<T>) -> Self {
        Self { grid: v.grid, scalar: vec![Complex::zero(); v.grid.len()], vector: v.data.clone() }
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 3]) -> Biquaternion<T>) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.len() {
            out.set(i, f(grid.coords(i)));
        }
        out
    }

    /// Pointwise map over a single biquaternion field.
    pub fn map(&self, f: impl Fn(Biquaternion<T>) -> Biquaternion<T>) -> Self {
        let mut out = Self::zeros(self.grid);
        for i in 0..self.grid.len() {
            out.set(i, f(self.at(i)));
        }
        out
    }

    #[inline]
    pub fn at(&self, i: usize) -> Biquaternion<T> {
        Biquaternion::new(self.scalar[i], CVec3([self.vector[0][i], self.vector[1][i], self.vector[2][i]]))
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: Biquaternion<T>) {
        self.scalar[i] = b.scalar;
        for a in 0..3 {
            self.vector[a][i] = b.vector.0[a];
        }
    }

    pub fn scalar_field(&self) -> ScalarField<T> {
        ScalarField { grid: self.grid, data: self.scalar.clone() }
    }

    pub fn vector_field(&self) -> VectorField<T> {
        VectorField { grid: self.grid, data: self.vector.clone() }
    }

    pub fn axpy(&mut self, a: T, x: &Self) {
        axpy_slice(&mut self.scalar, a, &x.scalar);
        for c in 0..3 {
            axpy_slice(&mut self.vector[c], a, &x.vector[c]);
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-T::one(), other);
        out
    }

    /// Max over points of the Euclidean norm of the 8 real components.
    pub fn linf(&self) -> T {
        (0..self.grid.len()).fold(T::zero(), |m, i| m.max(bq_norm_sqr(&self.at(i)).sqrt()))
    }

    pub fn rms(&self) -> T {
        rms_of((0..self.grid.len()).map(|i| bq_norm_sqr(&self.at(i))), self.grid.len())
    }

    /// Largest absolute real component anywhere on the grid.
    pub fn max_abs(&self) -> T {
        (0..self.grid.len()).fold(T::zero(), |m, i| m.max(self.at(i).max_abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.scalar.iter().chain(self.vector.iter().flatten()).all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

pub(crate) fn bq_norm_sqr<T: Real>(b: &Biquaternion<T>) -> T {
    b.scalar.norm_sqr() + b.vector.norm_sqr()
}

pub(crate) fn axpy_slice<T: Real>(y: &mut [Complex<T>], a: T, x: &[Complex<T>]) {
    debug_assert_eq!(y.len(), x.len());
    y.iter_mut().zip(x).for_each(|(y, x)| *y = *y + *x * a);
}

pub(crate) fn rms_of<T: Real>(sq: impl Iterator<Item = T>, n: usize) -> T {
    if n == 0 {
        return T::zero();
    }
    (sq.fold(T::zero(), |acc, v| acc + v) / from_usize(n)).sqrt()
}
