//! The surface itself: coframes on the grid, the immersion obtained by
//! integrating the moving frame, its fundamental forms, and the isometric
//! deformations that keep the mean curvature.

mod coframes;
mod deform;
mod frame;
mod obj;

pub use coframes::*;
pub use deform::*;
pub use frame::*;
pub use obj::*;
