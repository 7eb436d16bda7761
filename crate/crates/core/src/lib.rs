//! Pseudospectral simulation and numerical verification for the periodic
//! fractional drift-diffusion equation with logistic damping
//!
//! ```text
//! ∂t u = -Λ^α u - ε Λ^{1.75} u + χ ∂x(u B(u)) + r u (1 - u),   x ∈ 𝕋,
//! B(u) = Λ^{β-1} H v,   v = (1 + Λ^β)^{-1} u   or   v = Λ^{-β}(u - ⟨u⟩).
//! ```

pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod ic;
pub mod model;
pub mod oracle;
pub mod par;
pub mod persist;
pub mod random;
pub mod spectral;
pub mod sweep;
pub mod verification;

pub use error::{Error, Result};
pub use evolution::{run, Outcome, SolverConfig, Trajectory};
pub use grid::{Field, Spectrum, TorusGrid};
pub use model::ModelParams;
pub use spectral::DriftVariant;
