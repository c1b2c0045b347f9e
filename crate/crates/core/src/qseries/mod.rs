//! Exact number domains and truncated Laurent series in fractional powers of `q`.

mod any;
mod bigfloat;
mod classical;
mod coeff;
mod cyclotomic;
mod eta;
mod quadratic;
pub mod rational;
mod series;

pub use any::AnySeries;
pub use bigfloat::{bits_for_digits, format_float, BigFloatComplex};
pub use classical::{
    capital_j, delta, eisenstein_e4, eisenstein_e6, hauptmodul_t4, klein_j, klein_j_from_e6, level4_u,
};
pub use coeff::{json_rational, Coefficient, Domain};
pub use cyclotomic::{cyclotomic_poly, Cyclotomic};
pub use eta::{eta_quotient, eta_spec, eta_valuation, jacobi_theta, theta_nullwert, EtaFactor};
pub use quadratic::Quadratic;
pub use rug::Rational;
pub use series::QSeries;
