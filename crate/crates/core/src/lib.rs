//! Exact geometry of convex polytopes and certified approximation of the
//! Loomis–Whitney ratio through the projection zonotope.

pub mod error;
pub mod frame;
pub mod heuristic;
pub mod hull;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod lw2d;
pub mod oracles;
pub mod planar;
pub mod polytope;
pub mod rational;
pub mod structured;
pub mod zonotope;
pub mod zoo;

pub use error::{Error, Result};
pub use frame::{Frame, PseudoFrame};
pub use polytope::{FacetData, HPolytope, ScaledPolytope, VPolytope};
pub use rational::{Enclosure, Rational, VecQ};
pub use zonotope::{DirectionR, Zonotope};
