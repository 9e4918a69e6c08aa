//! Knotted nodal lines in paraxial light fields.
//!
//! A braid word is turned into a loop of polynomials, then into a complex
//! field on the z = 0 plane, propagated with polynomial or Laguerre-Gaussian
//! beams, traced, and checked against the input knot.

pub mod braid;
pub mod construct;
pub mod field;
pub mod pipeline;
pub mod propagate;
pub mod topo;
pub mod trace;
