//! Ordinary central configurations of the curved n-body problem.
//!
//! Particles live on the unit sphere `S³ ⊂ R⁴` or on the upper sheet of the
//! hyperboloid `H³ ⊂ R^{3,1}` and interact through the cotangent potential.
//! A configuration is an *ordinary central configuration* (OCC) when it is a
//! critical point of `U − λ I` (with `I = Σ mᵢ(xᵢ² + yᵢ²)`) that is not a
//! critical point of `U` alone. The crate computes such configurations, their
//! Morse inertia, and the relative equilibria they generate.
//!
//! Module map:
//!
//! * [`manifold`] ambient 4-vector geometry, angle charts and the symmetry group.
//! * [`potentials`] cotangent potential, moment of inertia, gradients and
//!   analytic Hessians, multiplier extraction.
//! * [`geodesic`] the `n!/2` geodesic OCCs, one per ordering of the masses.
//! * [`spectral`] Hessian blocks, the mass-distance matrix `A` and inertia.
//! * [`planar`] multistart search for all OCC classes on `H²` and `S²`.
//! * [`dynamics`] equations of motion and relative-equilibrium verification.
//! * [`compactness`] singular-approach families and exclusion probes.
//! * [`runner`] configuration-driven batch front end.

pub mod compactness;
pub mod dynamics;
pub mod error;
pub mod geodesic;
pub mod linalg;
pub mod manifold;
pub mod parallel;
pub mod planar;
pub mod potentials;
pub mod runner;
pub mod spectral;
pub mod tol;

pub use error::{CcError, Result};
pub use manifold::{AmbientPoint, AnglePoint, Curvature, MassList, SymmetryElement};
pub use parallel::Execution;
