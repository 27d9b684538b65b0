//! Discrete vector calculus on the periodic grid and the mutual complex
//! gradients `D± = ∂τ ± i∇`.
//!
//! The spatial part of both gradients is the quaternionic nabla product
//!
//! ```text
//! ∇∘(f + F) = −div F + (grad f + rot F)
//! ```
//!
//! so `D±F = ∂τF ± i ∇∘F`. Time derivatives are always supplied by the
//! caller; this module never differentiates in time.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::Result;
use crate::grid::{check_grids, BqField, Grid, ScalarField, VectorField};
use crate::scalar::{from_usize, Real};
use crate::spectral::{signed_mode, Fft3};

/// Derivative discretization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NablaScheme {
    /// Exact Fourier wavenumbers; the Nyquist mode is dropped from first derivatives.
    #[default]
    Spectral,
    /// Fourth-order centered differences.
    Central4,
}

/// Grid-bound differential operators.
#[derive(Clone, Debug)]
pub struct Nabla<T: Real> {
    grid: Grid<T>,
    scheme: NablaScheme,
    fft: Fft3<T>,
    /// First-derivative wavenumbers per axis (Nyquist zeroed).
    wavenumbers: [Vec<T>; 3],
    /// 2/3-rule mask per axis.
    keep: [Vec<bool>; 3],
}

impl<T: Real> Nabla<T> {
    pub fn new(grid: Grid<T>, scheme: NablaScheme) -> Self {
        let n = grid.n();
        let wavenumbers = std::array::from_fn(|a| {
            let len = grid.lengths()[a];
            (0..n[a])
                .map(|m| {
                    let s = signed_mode(m, n[a]);
                    if n[a] % 2 == 0 && m == n[a] / 2 {
                        T::zero()
                    } else {
                        T::TAU() * T::from_isize(s).unwrap() / len
                    }
                })
                .collect()
        });
        let keep = std::array::from_fn(|a| (0..n[a]).map(|m| 3 * signed_mode(m, n[a]).unsigned_abs() < n[a]).collect());
        Self { grid, scheme, fft: Fft3::new(n), wavenumbers, keep }
    }

    pub fn spectral(grid: Grid<T>) -> Self {
        Self::new(grid, NablaScheme::Spectral)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn scheme(&self) -> NablaScheme {
        self.scheme
    }

    pub fn fft(&self) -> &Fft3<T> {
        &self.fft
    }

    pub fn wavenumbers(&self, axis: usize) -> &[T] {
        &self.wavenumbers[axis]
    }

    fn spectrum(&self, data: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut s = data.to_vec();
        self.fft.forward(&mut s);
        s
    }

    /// Applies `mult(kx, ky, kz) · spectrum` and transforms back.
    fn synth(&self, spec: &[Complex<T>], mult: impl Fn([T; 3], Complex<T>) -> Complex<T> + Sync) -> Vec<Complex<T>> {
        let [_, n1, n2] = self.grid.n();
        let k = &self.wavenumbers;
        let mut out = vec![Complex::zero(); spec.len()];
        out.par_chunks_mut(n1 * n2).zip(spec.par_chunks(n1 * n2)).enumerate().for_each(|(i, (o, s))| {
            for j in 0..n1 {
                for l in 0..n2 {
                    let idx = j * n2 + l;
                    o[idx] = mult([k[0][i], k[1][j], k[2][l]], s[idx]);
                }
            }
        });
        self.fft.inverse(&mut out);
        out
    }

    fn stencil_partial(&self, f: &[Complex<T>], axis: usize) -> Vec<Complex<T>> {
        let n = self.grid.n();
        let h = self.grid.spacing(axis);
        let w1 = T::lit(8.0) / (T::lit(12.0) * h);
        let w2 = T::one() / (T::lit(12.0) * h);
        let na = n[axis];
        let mut out = vec![Complex::zero(); f.len()];
        out.par_iter_mut().enumerate().for_each(|(idx, o)| {
            let ijk = self.grid.unravel(idx);
            let at = |shift: isize| {
                let mut p = ijk;
                p[axis] = ((ijk[axis] as isize + shift).rem_euclid(na as isize)) as usize;
                f[self.grid.index(p[0], p[1], p[2])]
            };
            *o = (at(1) - at(-1)) * w1 - (at(2) - at(-2)) * w2;
        });
        out
    }

    fn stencil_second(&self, f: &[Complex<T>], axis: usize) -> Vec<Complex<T>> {
        let n = self.grid.n();
        let h = self.grid.spacing(axis);
        let inv = T::one() / (T::lit(12.0) * h * h);
        let na = n[axis];
        let mut out = vec![Complex::zero(); f.len()];
        out.par_iter_mut().enumerate().for_each(|(idx, o)| {
            let ijk = self.grid.unravel(idx);
            let at = |shift: isize| {
                let mut p = ijk;
                p[axis] = ((ijk[axis] as isize + shift).rem_euclid(na as isize)) as usize;
                f[self.grid.index(p[0], p[1], p[2])]
            };
            *o = ((at(1) + at(-1)) * T::lit(16.0) - (at(2) + at(-2)) - at(0) * T::lit(30.0)) * inv;
        });
        out
    }

    /// `∂f/∂x_axis` on a raw buffer.
    pub fn partial(&self, f: &[Complex<T>], axis: usize) -> Vec<Complex<T>> {
        match self.scheme {
            NablaScheme::Spectral => {
                let s = self.spectrum(f);
                self.synth(&s, |k, v| v * Complex::new(T::zero(), k[axis]))
            }
            NablaScheme::Central4 => self.stencil_partial(f, axis),
        }
    }

    pub fn grad(&self, f: &ScalarField<T>) -> Result<VectorField<T>> {
        check_grids(&self.grid, &f.grid)?;
        let data = match self.scheme {
            NablaScheme::Spectral => {
                let s = self.spectrum(&f.data);
                std::array::from_fn(|a| self.synth(&s, |k, v| v * Complex::new(T::zero(), k[a])))
            }
            NablaScheme::Central4 => std::array::from_fn(|a| self.stencil_partial(&f.data, a)),
        };
        Ok(VectorField { grid: f.grid, data })
    }

    pub fn div(&self, v: &VectorField<T>) -> Result<ScalarField<T>> {
        check_grids(&self.grid, &v.grid)?;
        let data = match self.scheme {
            NablaScheme::Spectral => {
                let s = self.spectra(v);
                self.synth_indexed(|idx, k| {
                    Complex::new(T::zero(), T::one()) * (s[0][idx] * k[0] + s[1][idx] * k[1] + s[2][idx] * k[2])
                })
            }
            NablaScheme::Central4 => {
                let mut acc = self.stencil_partial(&v.data[0], 0);
                for a in 1..3 {
                    let d = self.stencil_partial(&v.data[a], a);
                    acc.iter_mut().zip(d).for_each(|(x, y)| *x = *x + y);
                }
                acc
            }
        };
        Ok(ScalarField { grid: v.grid, data })
    }

    pub fn curl(&self, v: &VectorField<T>) -> Result<VectorField<T>> {
        check_grids(&self.grid, &v.grid)?;
        let data = match self.scheme {
            NablaScheme::Spectral => {
                let s = self.spectra(v);
                let iu = Complex::new(T::zero(), T::one());
                std::array::from_fn(|a| {
                    let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                    self.synth_indexed(|idx, k| iu * (s[c][idx] * k[b] - s[b][idx] * k[c]))
                })
            }
            NablaScheme::Central4 => std::array::from_fn(|a| {
                let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                let d1 = self.stencil_partial(&v.data[c], b);
                let d2 = self.stencil_partial(&v.data[b], c);
                d1.into_iter().zip(d2).map(|(x, y)| x - y).collect()
            }),
        };
        Ok(VectorField { grid: v.grid, data })
    }

    /// Scalar Laplacian. The spectral symbol is `−Σ k_a²` with the same
    /// wavenumbers as the first derivatives, so `Δ = div∘grad` exactly.
    pub fn laplacian_raw(&self, f: &[Complex<T>]) -> Vec<Complex<T>> {
        match self.scheme {
            NablaScheme::Spectral => {
                let s = self.spectrum(f);
                self.synth(&s, |k, v| v * -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]))
            }
            NablaScheme::Central4 => {
                let mut acc = self.stencil_second(f, 0);
                for a in 1..3 {
                    let d = self.stencil_second(f, a);
                    acc.iter_mut().zip(d).for_each(|(x, y)| *x = *x + y);
                }
                acc
            }
        }
    }

    pub fn laplacian(&self, f: &ScalarField<T>) -> Result<ScalarField<T>> {
        check_grids(&self.grid, &f.grid)?;
        Ok(ScalarField { grid: f.grid, data: self.laplacian_raw(&f.data) })
    }

    /// Componentwise Laplacian of a biquaternion field.
    pub fn laplacian_bq(&self, f: &BqField<T>) -> Result<BqField<T>> {
        check_grids(&self.grid, &f.grid)?;
        Ok(BqField {
            grid: f.grid,
            scalar: self.laplacian_raw(&f.scalar),
            vector: std::array::from_fn(|a| self.laplacian_raw(&f.vector[a])),
        })
    }

    /// `∇∘(f + F) = −div F + (grad f + rot F)`.
    pub fn nabla_product(&self, f: &BqField<T>) -> Result<BqField<T>> {
        check_grids(&self.grid, &f.grid)?;
        match self.scheme {
            NablaScheme::Spectral => {
                let sf = self.spectrum(&f.scalar);
                let sv: [Vec<Complex<T>>; 3] = std::array::from_fn(|a| self.spectrum(&f.vector[a]));
                let iu = Complex::new(T::zero(), T::one());
                let scalar =
                    self.synth_indexed(|idx, k| -iu * (sv[0][idx] * k[0] + sv[1][idx] * k[1] + sv[2][idx] * k[2]));
                let vector = std::array::from_fn(|a| {
                    let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                    self.synth_indexed(|idx, k| iu * (sf[idx] * k[a] + sv[c][idx] * k[b] - sv[b][idx] * k[c]))
                });
                Ok(BqField { grid: f.grid, scalar, vector })
            }
            NablaScheme::Central4 => {
                let vf = f.vector_field();
                let div = self.div(&vf)?;
                let curl = self.curl(&vf)?;
                let grad = self.grad(&f.scalar_field())?;
                let mut out = BqField::from_parts(div, curl)?;
                out.scalar.iter_mut().for_each(|v| *v = -*v);
                for a in 0..3 {
                    out.vector[a].iter_mut().zip(&grad.data[a]).for_each(|(x, g)| *x = *x + *g);
                }
                Ok(out)
            }
        }
    }

    fn spectra(&self, v: &VectorField<T>) -> [Vec<Complex<T>>; 3] {
        std::array::from_fn(|a| self.spectrum(&v.data[a]))
    }

    /// Builds a spectrum pointwise from its flat index and wavevector, then inverts.
    fn synth_indexed(&self, f: impl Fn(usize, [T; 3]) -> Complex<T> + Sync) -> Vec<Complex<T>> {
        let [_, n1, n2] = self.grid.n();
        let k = &self.wavenumbers;
        let plane = n1 * n2;
        let mut out = vec![Complex::zero(); self.grid.len()];
        out.par_chunks_mut(plane).enumerate().for_each(|(i, o)| {
            for j in 0..n1 {
                for l in 0..n2 {
                    let idx = j * n2 + l;
                    o[idx] = f(i * plane + idx, [k[0][i], k[1][j], k[2][l]]);
                }
            }
        });
        self.fft.inverse(&mut out);
        out
    }

    /// 2/3-rule low-pass filter, in place. Applied to quadratic products so
    /// they do not alias back into the resolved band.
    pub fn dealias(&self, data: &mut [Complex<T>]) {
        let [_, n1, n2] = self.grid.n();
        self.fft.forward(data);
        let keep = &self.keep;
        data.par_chunks_mut(n1 * n2).enumerate().for_each(|(i, p)| {
            for j in 0..n1 {
                for l in 0..n2 {
                    if !(keep[0][i] && keep[1][j] && keep[2][l]) {
                        p[j * n2 + l] = Complex::zero();
                    }
                }
            }
        });
        self.fft.inverse(data);
    }

    pub fn dealias_bq(&self, f: &mut BqField<T>) {
        self.dealias(&mut f.scalar);
        for a in 0..3 {
            self.dealias(&mut f.vector[a]);
        }
    }

    /// Exact integral of the trigonometric interpolant over `[lo, hi]` along
    /// `axis`, expressed as per-point weights.
    pub fn interval_weights(&self, axis: usize, lo: T, hi: T) -> Vec<T> {
        let n = self.grid.n()[axis];
        let h = self.grid.spacing(axis);
        let len = self.grid.lengths()[axis];
        let nf: T = from_usize(n);
        (0..n)
            .map(|j| {
                let xj = from_usize::<T>(j) * h;
                let mut w = hi - lo;
                for m in 1..=n / 2 {
                    let kap = T::TAU() * from_usize::<T>(m) / len;
                    let term = ((kap * (hi - xj)).sin() - (kap * (lo - xj)).sin()) / kap;
                    let factor = if n % 2 == 0 && m == n / 2 { T::one() } else { T::lit(2.0) };
                    w = w + factor * term;
                }
                w / nf
            })
            .collect()
    }
}

/// `D⁺F = ∂τF + i ∇∘F`.
pub fn apply_dplus<T: Real>(nabla: &Nabla<T>, f: &BqField<T>, df_dtau: &BqField<T>) -> Result<BqField<T>> {
    apply_dpm(nabla, f, df_dtau, T::one())
}

/// `D⁻F = ∂τF − i ∇∘F`.
pub fn apply_dminus<T: Real>(nabla: &Nabla<T>, f: &BqField<T>, df_dtau: &BqField<T>) -> Result<BqField<T>> {
    apply_dpm(nabla, f, df_dtau, -T::one())
}

fn apply_dpm<T: Real>(nabla: &Nabla<T>, f: &BqField<T>, df_dtau: &BqField<T>, sign: T) -> Result<BqField<T>> {
    check_grids(&f.grid, &df_dtau.grid)?;
    let np = nabla.nabla_product(f)?;
    let iu = Complex::new(T::zero(), sign);
    let mut out = df_dtau.clone();
    out.scalar.iter_mut().zip(&np.scalar).for_each(|(o, v)| *o = *o + iu * *v);
    for a in 0..3 {
        out.vector[a].iter_mut().zip(&np.vector[a]).for_each(|(o, v)| *o = *o + iu * *v);
    }
    Ok(out)
}

/// d'Alembertian `∂τ²F − ΔF` given the analytic second time derivative.
pub fn apply_box<T: Real>(nabla: &Nabla<T>, f: &BqField<T>, d2f_dtau2: &BqField<T>) -> Result<BqField<T>> {
    check_grids(&f.grid, &d2f_dtau2.grid)?;
    let lap = nabla.laplacian_bq(f)?;
    Ok(d2f_dtau2.sub(&lap))
}
