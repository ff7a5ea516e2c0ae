//! Self-similar arcs generated by planar basic figures: dimension, measure,
//! angle profile, and the Whitney / quasi-arc conditions at each vertex.
//!
//! `geom`, `arc` and `spectrum` are generic over the scalar type; the
//! aliases below fix it to `f64`. `conditions`, `dio` and `family` work in
//! `f64` and exact big-integer arithmetic.

pub mod arc;
pub mod conditions;
pub mod dio;
pub mod family;
pub mod geom;
pub mod spectrum;

pub use num_complex::Complex;

pub type Point = geom::Point<f64>;
pub type Similitude = geom::Similitude<f64>;
pub type BasicFigure = geom::BasicFigure<f64>;
pub type ArcSystem = arc::ArcSystem<f64>;
