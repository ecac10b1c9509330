//! Polygonal billiards on the plane, the hyperbolic plane and the sphere.
pub mod builtins;
pub mod collision;
pub mod expansivity;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod ode;
pub mod polygon;
pub mod svg;
pub mod topology;
pub mod unfolding;
