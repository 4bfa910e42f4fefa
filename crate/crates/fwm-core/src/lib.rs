//! Biphoton states generated by degenerate four-wave mixing with a
//! structured pump.
//!
//! The library builds the two-photon coincidence-amplitude tensor over a
//! truncated Laguerre-Gaussian mode space, in both the position and the
//! momentum (transverse wave-vector) representations, and evaluates the
//! observables derived from it: OAM distributions, spiral bandwidth,
//! entanglement entropy, reduced-state purity and Schmidt number, and
//! spatially resolved coincidence-count maps.
//!
//! Everything is SI (meters, radians); the default pump wavelength is
//! 780 nm. All computations are deterministic: parallel evaluation over
//! independent tensor entries or grid points uses a fixed per-entry
//! summation order, so results are bit-identical regardless of thread
//! count.
//!
//! Module map:
//! - [`modes`]: Laguerre-Gaussian modes, their angular spectra, and the
//!   supporting special functions.
//! - [`quadrature`]: deterministic Gauss-Legendre and polar product rules
//!   with convergence probes.
//! - [`pump`]: structured-pump description, squared-pump expansion, and
//!   interaction-medium geometry.
//! - [`position`]: four-mode overlap integrals and the position-space
//!   coincidence amplitude tensor.
//! - [`momentum`]: phase-matched momentum-space amplitudes (direct
//!   quadrature and nested-sum evaluation) and the representation
//!   distance.
//! - [`entanglement`]: OAM distribution, spiral bandwidth, entropy,
//!   purity and Schmidt number.
//! - [`correlations`]: spatial mode function, coincidence-count maps and
//!   pump-structure transfer diagnostics.

pub mod correlations;
pub mod entanglement;
pub mod modes;
pub mod momentum;
pub mod position;
pub mod pump;
pub mod quadrature;

mod special;

pub use correlations::{
    cross_correlation, g2_full_probe_map, g2_point_detector_map, g2_point_detectors, pearson_sign,
    pump_function_sq_map, spatial_mode_function, DetectionConfig, Grid2D, GridSpec,
};
pub use entanglement::{
    entanglement_entropy, oam_distribution, purity_and_schmidt, schmidt_gaussian,
    schmidt_gaussian_widths, spiral_bandwidth, OamDistribution, GAMMA_SINC_WIDTH,
};
pub use modes::{
    assoc_laguerre, eval_lg_mode, eval_lg_spectrum, propagate_spectrum, BeamGeometry, ModeIndex,
    PolarPoint, DEFAULT_WAVELENGTH,
};
pub use momentum::{
    amplitudes_momentum_analytic, amplitudes_momentum_quadrature, biphoton_kernel, trace_distance,
    EntryMethod, PhaseMatchKernel, QuadratureConfig,
};
pub use position::{
    coincidence_amplitudes_position, lambda_overlap, BiphotonAmplitudes, Representation, Subspace,
};
pub use pump::{
    cloud_modified_expansion, effective_waist, product_expansion_coeff, square_pump_expansion,
    MediumGeometry, ProductExpansion, PumpSpec,
};

use num_complex::Complex64;

/// Errors surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pump specification has no modes")]
    EmptyPump,
    #[error("pump coefficients are not normalized: sum |c|^2 = {0}")]
    UnnormalizedPump(f64),
    #[error("subspaces do not match: {0}")]
    SubspaceMismatch(String),
    #[error("amplitude tensor is not normalized")]
    NotNormalized,
    #[error("integrand returned a non-finite value at {at}")]
    NonFiniteIntegrand { at: f64 },
    #[error("quadrature did not converge: {0}")]
    NotConverged(String),
    #[error("map has no mass; cannot form a density")]
    ZeroMassMap,
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Complex scalar used for all amplitudes.
pub type C64 = Complex64;
