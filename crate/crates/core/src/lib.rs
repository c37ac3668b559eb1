// negated float comparisons are deliberate: they reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical laboratory for Siegel disks of quadratic polynomials, the cubic
//! Blaschke model of a critical circle map, and certified covering lemmas on
//! squares.
//!
//! Floating-point modules are generic over [`scalar::Real`]; the aliases
//! below fix the scalar to `f64`.

pub mod blaschke;
pub mod cellgraph;
pub mod cli;
pub mod contfrac;
pub mod covering;
pub mod dynamics;
pub mod hyperbolic;
pub mod scalar;

pub use scalar::{Certified, Rational, Real};

pub type Blaschke = blaschke::BlaschkeModel<f64>;
pub type Rotation = blaschke::RigidRotation<f64>;
pub type Quadratic = dynamics::ModelP<f64>;
pub type SiegelDisk = dynamics::SiegelApprox<f64>;
pub type HalfPlanePoint = hyperbolic::HPoint<f64>;
pub type ExteriorPoint = hyperbolic::ExteriorPoint<f64>;
pub type Domain = hyperbolic::Domain<f64>;
pub type Complex64 = num_complex::Complex<f64>;
