//! Weighted composition operators `f -> psi * (f o phi)` on the Fock space,
//! with `phi(z) = A z + B` and `psi(z) = C e^{D z}`.
//!
//! Numeric code is generic over [`Real`] (`f32`, `f64`); symbol predicates
//! are generic over [`Field`], which also admits exact rationals.

pub mod classify;
pub mod conjugation;
pub mod dword;
pub mod error;
pub mod export;
pub mod fock;
pub mod harness;
pub mod linalg;
pub mod operator;
pub mod quadrature;
pub mod scalar;
pub mod symbols;

pub use error::{Error, Result};
pub use fock::{evaluate, exp_norm, inner_product, kernel_vector, FockVector, KernelSpec};
pub use num_complex::Complex;
pub use quadrature::{quadrature_inner, QuadratureGrid};
pub use scalar::{Field, Rational, Real};
pub use symbols::{
    compose_gaussian, gaussian_in_fock, make_conjugation, validate_conjugation, ConjugationTriple,
    GaussianSymbol, WcoSymbols,
};

pub type C64 = Complex<f64>;
pub type Vector = FockVector<f64>;
pub type Symbols = WcoSymbols<f64>;
pub type ExactSymbols = WcoSymbols<Rational>;
pub type Conjugation = ConjugationTriple<f64>;
pub type Gaussian = GaussianSymbol<f64>;
