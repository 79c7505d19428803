//! Controllability toolkit for the inviscid and viscous Burgers-alpha systems.
//!
//! The state `y` is transported (and, in the viscous case, diffused) by the
//! filtered velocity `z = (I - alpha^2 d_xx)^{-1} y`. The crate synthesizes
//! distributed and boundary controls that drive `y` to zero, to a prescribed
//! target, or onto a constant, and checks that the resulting bounds do not
//! depend on `alpha`.

pub mod control;
pub mod controls;
pub mod error;
pub mod filter;
pub mod grid;
pub mod interp;
pub mod io;
pub mod pipeline;
pub mod scalar;
pub mod transport;
pub mod tridiag;
pub mod viscous;

pub use controls::{ControlNorms, ControlTriple};
pub use error::{Error, Result};
pub use filter::{AlphaParam, CutoffProfile, ExtendedGrid, FilterSolver};
pub use grid::{Field, Grid1D, NormReport, SpaceTimeField, TimeGrid};
pub use scalar::Real;

pub type Grid64 = Grid1D<f64>;
pub type TimeGrid64 = TimeGrid<f64>;
pub type Field64 = Field<f64>;
pub type Trajectory64 = SpaceTimeField<f64>;
pub type Alpha64 = AlphaParam<f64>;
