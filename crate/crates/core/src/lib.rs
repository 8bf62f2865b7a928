//! Two-dimensional Lorentzian metrics `g = Ω·η` with constant scalar
//! curvature: building conformal factors from the known solution families,
//! checking their curvature with exact second-order jets, and drawing
//! constant-interval (Penrose-Carter) diagrams.

pub mod expr;
pub mod field;
pub mod jet;
pub mod curvature;
pub mod charts;
pub mod families;
pub mod quadrature;
pub mod analysis;
pub mod cli;
