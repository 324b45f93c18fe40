//! Width integrals, L_p and Orlicz width additions, and Orlicz mixed width
//! integrals of convex bodies, computed by quadrature on the sphere.
//!
//! Bodies are support-function oracles ([`SupportBody`]); everything
//! downstream consumes only their half-width functions ([`WidthProfile`]).
//! The [`verify`] module checks the Minkowski and Brunn–Minkowski type
//! inequalities between these functionals on seeded random ensembles.

pub mod addition;
pub mod error;
pub mod functionals;
pub mod geometry;
pub mod orlicz;
pub mod profile;
pub mod schema;
pub mod sphere_quad;
pub mod verify;

pub use addition::{
    lp_width_sum, max_residual, orlicz_linear_combination, orlicz_perturbation, orlicz_width_sum,
    solve_lambda, Term,
};
pub use error::{Error, Result};
pub use functionals::{
    ith_mixed_width, lp_mixed_width, mixed_width_integral, orlicz_mixed_width,
    width_integral, width_measure_weights, Functional, FunctionalResult,
};
pub use geometry::{linear_image, validate_body, BodyDiagnostics, Direction, SupportBody};
pub use orlicz::{validate_phi, Family, OrliczFunction, OrliczFunctionM, PhiDiagnostics};
pub use profile::{Provenance, WidthProfile};
pub use sphere_quad::{
    ball_volume, build_rule, default_resolution, sphere_area, QuadratureRule, RuleDescriptor,
    RuleKind,
};

/// Version string embedded in reports.
pub const VERSION: &str = concat!("widthlab ", env!("CARGO_PKG_VERSION"));
