//! Stereographic transport to the sphere and the spectral side of the
//! linearized Liouville operator.
//!
//! Under `Π`, `U₀ dy = 2 dA` and `−Δ − U₀` becomes `(U₀/2)(−Δ_{S²} − 2)`, so
//! degree `l` harmonics diagonalize the quadratic form `∫φg`.

pub mod forms;
pub mod hardy;
pub mod harmonics;
pub mod planar;

pub use forms::{
    constructed_tests, derivative_identity_check, integral_identity_check, quadratic_form, rotating_family,
    sandwich_ratio, spectral_form, sphere_coefficients, to_sphere, BandLimitedTest, PLANAR_FACTOR,
};
pub use hardy::{hardy_quotient, rayleigh_direct, HardyProblem};
pub use harmonics::{SphereCoeffs, SphereGrid, DEFAULT_L_MAX};
pub use planar::{plane_to_sphere, sphere_to_plane, GField, PlanarSolver, PlanarTestFunction};
