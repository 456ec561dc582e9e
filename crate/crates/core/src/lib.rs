//! Integrals `∫ f(x)·conj(g(x)) dx` of a decaying `f` against a periodic `g`,
//! evaluated through the bilateral series `Σ f̂(2πn/T)·conj(C_n(g))`.

// Quadrature constants are kept at published precision, and `!(x > 0.0)`
// is the deliberate way to reject NaN along with non-positive values.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod engine;
pub mod expr;
pub mod fourier;
pub mod functions;
pub mod quadrature;
