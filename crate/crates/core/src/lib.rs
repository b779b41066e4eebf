//! Numerical laboratory for min-max widths of the round sphere and of
//! near-round ellipsoids: polynomial sweepouts, Crofton mass estimates,
//! geodesic networks, cone varifolds and Morse indices of closed geodesics.

pub mod curve;
pub mod error;
pub mod surface;
pub mod tolerances;

pub use error::{Error, Result};
pub use surface::{EllipsoidParams, SurfacePoint, TangentVector, Vec3};
pub mod cone;
pub mod contour;
pub mod index;
pub mod io;
pub mod lab;
pub mod mesh;
pub mod network;
pub mod poly;
pub mod rng;
pub mod search;
pub mod sweepout;
pub mod trig;
pub mod widths;
