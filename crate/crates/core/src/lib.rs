//! Exact q-series arithmetic, Weil representations of the lattices `L_{m,N}`,
//! repackaging of vector-valued modular forms, and the infinite-product and
//! singular-moduli machinery built on top of them.
//!
//! Everything that can be exact is exact: coefficients live in the rationals,
//! cyclotomic fields or real quadratic fields. Floating point appears only in
//! [`qseries::BigFloatComplex`] for evaluating series at points of the upper
//! half-plane.

pub mod borcherds;
pub mod error;
pub mod heegner;
pub mod qseries;
pub mod repackage;
pub mod repth;
pub mod vvforms;
pub mod weil;

pub mod arith;

pub use error::{Error, Result};
pub use qseries::{Coefficient, Cyclotomic, QSeries, Quadratic, Rational};
