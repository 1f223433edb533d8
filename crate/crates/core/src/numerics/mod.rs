//! Shared numerical kernels: adaptive quadrature, Gauss-Hermite rules,
//! central differences, golden-section peak search, and the brute-force
//! oracles that cross-check the closed-form physics.

mod diff;
mod hermite;
pub mod oracle;
mod peak;
mod quadrature;

pub use diff::{central_gradient, central_hessian, wrap_phase};
pub use hermite::{gauss_hermite, GaussHermite};
pub use oracle::{
    oracle_dense_z_average, oracle_moment_quadrature, oracle_position_density, MomentKind, MomentOracle,
};
pub use peak::{find_peak, Peak, DEFAULT_PEAK_TOL};
pub use quadrature::{
    integrate_adaptive, integrate_adaptive_vec, Estimate, QuadratureSpec, Region, VecEstimate,
};
