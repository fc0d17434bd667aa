pub mod error;
pub mod grid;
pub mod hankel;
pub mod heisenberg;
pub mod htype;
pub mod hermite;
pub mod propagator;
pub mod quad;
pub mod real;
pub mod specfun;
pub mod spherical;
pub mod suites;
pub mod twisted;

pub use error::{Error, Result, Warning};
pub use real::Real;

/// Double-precision instantiations of the generic core.
pub type Profile = grid::RadialProfile<f64>;
pub type Grid = grid::PolarGrid<f64>;
pub type Slice = grid::SpectralSlice<f64>;
pub type Plan = hankel::HankelPlan<f64>;
pub type Point = heisenberg::HeisenbergPoint<f64>;
pub type Time = heisenberg::ComplexTime<f64>;
pub type Basis = spherical::BigradedBasis<f64>;
pub type Gate = propagator::GateParams<f64>;
pub type LineGrid = hermite::CartesianGrid<f64>;
pub type LineFunction = hermite::GridFunction<f64>;
pub type HPoint = htype::HTypePoint<f64>;
