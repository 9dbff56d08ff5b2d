//! Numerical toolkit for twin-beam fed double interferometers: a truncated
//! Fock-space reference engine, an analytic Gaussian backend, thermal
//! environment parameters, deformed commutation relations, and the
//! phase-correlation uncertainty estimator.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`.

// `!(x > 0)` guards deliberately reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod environment;
pub mod error;
pub mod estimator;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod modccr;
pub mod ops;
pub mod quadrature;
pub mod scalar;
pub mod sector;

pub use error::{Error, Result};
pub use estimator::{Backend, UncertaintyResult};
pub use fock::{
    apply_beam_splitter, build_coherent, build_twb, build_twb_with_tolerance, expectation,
    expectation_poly, interferometer_input, number_difference_moment, ConstructionReceipt,
    FockCutoff,
};
pub use ops::{normal_order, Ladder, Monomial};
pub use scalar::Real;

pub type FockState = fock::MultiModeFockState<f64>;
pub type Squeeze = fock::SqueezeParams<f64>;
pub type Coherent = fock::CoherentInput<f64>;
pub type Phases = fock::PhaseConfig<f64>;
pub type Poly = ops::OperatorPoly<f64>;
pub type GaussianState = gaussian::TwoModeGaussianState<f64>;
pub type Environment = environment::EnvironmentParams<f64>;
pub type Deformation = modccr::DeformationParams<f64>;
pub type NoiseModel = estimator::PhaseNoiseModel<f64>;
pub type Complex64 = num_complex::Complex<f64>;
