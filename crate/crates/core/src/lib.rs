//! Biquaternion electro-gravimagnetic field toolkit.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below
//! pin the common types to `f64`.

pub mod biquaternion;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod operators;
pub mod scalar;
pub mod shock;
pub mod spectral;

pub use biquaternion::{Biquaternion, CVec3};
pub use diagnostics::{Quadrature, Region, Residual, ResidualSample, ResidualSeries};
pub use error::{EgmError, Result};
pub use evolution::{Dynamics, FieldPair, SimState, StepperConfig, VectorCoupling};
pub use field::{AField, ChargeCurrent, Medium, PowerForce};
pub use grid::{BqField, Grid, RealField, RealVectorField, ScalarField, VectorField};
pub use operators::{Nabla, NablaScheme};
pub use scalar::Real;
pub use shock::{CharacteristicSymbol, FrontData};

pub use num_complex::Complex;

pub type Complex64 = Complex<f64>;
pub type Biquaternion64 = Biquaternion<f64>;
pub type CVec3_64 = CVec3<f64>;
pub type Grid64 = Grid<f64>;
pub type Medium64 = Medium<f64>;
pub type AField64 = AField<f64>;
pub type ChargeCurrent64 = ChargeCurrent<f64>;
pub type BqField64 = BqField<f64>;
pub type Nabla64 = Nabla<f64>;
pub type SimState64 = SimState<f64>;
pub type StepperConfig64 = StepperConfig<f64>;
pub type FrontData64 = FrontData<f64>;
