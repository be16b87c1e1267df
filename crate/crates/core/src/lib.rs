//! Numerical laboratory for the coupled Ricci-flow / conjugate-heat system
//! and its information-theoretic functionals: Perelman's 𝔉, the Nash entropy,
//! Fisher information, the Madelung quantum potential and the Weyl–Ricci
//! curvature — all on desk-scale periodic discretizations with analytic
//! oracles.
//!
//! The crate is organized around two model geometries: a 2-D conformal torus
//! g = e^{2u}(dx² + dy²), which provides the inhomogeneous testbed, and the
//! round shrinking sphere, whose homogeneous sector reduces every functional
//! to a closed form and anchors the sign and normalization conventions.

pub mod entropy;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod presets;
pub mod quantum;
pub mod ricciflow;
pub mod spectral;
pub mod weyl;

mod timeseries;

pub use error::{Error, Result};
