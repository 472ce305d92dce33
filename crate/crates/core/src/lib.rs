//! Self-similar interval exchange maps, the fractals attached to their
//! complex eigenvalues, minimal sequences, and affine interval exchange maps
//! with wandering intervals built from them.

pub mod ay;
pub mod export;
pub mod fractal;
pub mod geometry;
pub mod iem;
pub mod minimal;
pub mod numberfield;
pub mod substitution;
pub mod wandering;
