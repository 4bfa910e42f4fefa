//! Laguerre-Gaussian modes, their angular spectra, and paraxial
//! propagation of the spectrum.
//!
//! Conventions, fixed here and used everywhere else in the crate:
//! - azimuthal phase `e^{+i l phi}` in both position and momentum space;
//! - forward transform kernel `e^{+i rho . r}`, so the spectrum carries
//!   the extra phase `e^{i pi N / 2}` with `N = 2p + |l|`;
//! - Gouy phase `+(N + 1) atan(z / z_R)`, curvature phase
//!   `-k r^2 / (2 R(z))` with `R(z) = z [1 + (z_R/z)^2]`;
//! - spectrum propagation multiplies by `e^{+i rho^2 z / (2k)}`
//!   (paraxial limit).

use crate::special::{ln_factorial, ln_gamma};
use crate::C64;

/// Discrete Laguerre-Gaussian mode label: topological charge `ell` and
/// radial index `p`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub struct ModeIndex {
    /// Topological charge (any integer).
    pub ell: i32,
    /// Radial index (non-negative).
    pub p: u32,
}

impl ModeIndex {
    pub fn new(ell: i32, p: u32) -> Self {
        Self { ell, p }
    }

    /// Total mode order `N = 2p + |ell|`.
    pub fn order(&self) -> u32 {
        2 * self.p + self.ell.unsigned_abs()
    }
}

impl std::fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.ell, self.p)
    }
}

/// Beam geometry: waist and wavelength with the derived wavenumber and
/// Rayleigh range.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BeamGeometry {
    /// Waist at z = 0 (m).
    pub w0: f64,
    /// Vacuum wavelength (m).
    pub lambda: f64,
    /// Wavenumber 2 pi / lambda (rad/m).
    pub k: f64,
    /// Rayleigh range k w0^2 / 2 (m).
    pub z_r: f64,
}

/// Default pump wavelength: the Rb D2 line.
pub const DEFAULT_WAVELENGTH: f64 = 780e-9;

impl BeamGeometry {
    pub fn new(w0: f64, lambda: f64) -> crate::Result<Self> {
        if !(w0 > 0.0 && w0.is_finite()) {
            return Err(crate::Error::InvalidParameter(format!(
                "beam waist must be positive, got {w0}"
            )));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(crate::Error::InvalidParameter(format!(
                "wavelength must be positive, got {lambda}"
            )));
        }
        let k = 2.0 * std::f64::consts::PI / lambda;
        Ok(Self {
            w0,
            lambda,
            k,
            z_r: k * w0 * w0 / 2.0,
        })
    }

    /// Beam radius w(z) = w0 sqrt(1 + (z/z_R)^2).
    pub fn waist_at(&self, z: f64) -> f64 {
        self.w0 * (1.0 + (z / self.z_r).powi(2)).sqrt()
    }

    /// Inverse curvature radius 1/R(z) = z / (z^2 + z_R^2); finite at
    /// z = 0 where R diverges.
    pub fn inv_curvature(&self, z: f64) -> f64 {
        z / (z * z + self.z_r * self.z_r)
    }

    /// Gouy phase accumulated by a mode of total order `n` at plane z.
    pub fn gouy_phase(&self, n: u32, z: f64) -> f64 {
        (n as f64 + 1.0) * (z / self.z_r).atan()
    }
}

/// Point in cylindrical coordinates. `r` is the transverse radius in
/// position space or the radial wavenumber in momentum space, depending
/// on context.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub phi: f64,
    pub z: f64,
}

impl PolarPoint {
    pub fn new(r: f64, phi: f64, z: f64) -> Self {
        Self { r, phi, z }
    }

    /// Polar point at z from Cartesian transverse coordinates; negative
    /// x/y are folded into the angle.
    pub fn from_cartesian(x: f64, y: f64, z: f64) -> Self {
        Self {
            r: x.hypot(y),
            phi: y.atan2(x),
            z,
        }
    }
}

/// Degree above which the explicit finite sum is abandoned for the
/// three-term recurrence. The sum is exact term-by-term at low degree;
/// the recurrence avoids the alternating-sum cancellation at high
/// degree.
const LAGUERRE_SUM_MAX_P: u32 = 12;

/// Associated Laguerre polynomial L_p^alpha(x) for integer alpha >= 0.
pub fn assoc_laguerre(p: u32, alpha: u32, x: f64) -> f64 {
    if p == 0 {
        return 1.0;
    }
    if p <= LAGUERRE_SUM_MAX_P {
        laguerre_sum(p, alpha, x)
    } else {
        laguerre_recurrence(p, alpha, x)
    }
}

/// Explicit finite sum sum_k b_k^{p,alpha} x^k with the coefficients
/// evaluated in log space.
fn laguerre_sum(p: u32, alpha: u32, x: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..=p {
        let ln_coef = ln_factorial((p + alpha) as u64)
            - ln_factorial(k as u64)
            - ln_factorial((alpha + k) as u64)
            - ln_factorial((p - k) as u64);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * ln_coef.exp() * x.powi(k as i32);
    }
    acc
}

/// Standard stable three-term recurrence in the degree.
fn laguerre_recurrence(p: u32, alpha: u32, x: f64) -> f64 {
    let a = alpha as f64;
    let mut lkm1 = 1.0;
    let mut lk = 1.0 + a - x;
    for k in 1..p {
        let kf = k as f64;
        let lkp1 = ((2.0 * kf + 1.0 + a - x) * lk - (kf + a) * lkm1) / (kf + 1.0);
        lkm1 = lk;
        lk = lkp1;
    }
    lk
}

/// Normalization constant sqrt(2 p! / (pi (p + |l|)!)), in log space so
/// large orders do not overflow.
fn norm_constant(idx: ModeIndex) -> f64 {
    let p = idx.p as u64;
    let al = idx.ell.unsigned_abs() as u64;
    (0.5 * (std::f64::consts::LN_2 + ln_factorial(p)
        - std::f64::consts::PI.ln()
        - ln_factorial(p + al)))
    .exp()
}

/// LG mode u_{l,p}(r, phi, z), amplitude dimension 1/m.
pub fn eval_lg_mode(idx: ModeIndex, beam: &BeamGeometry, point: &PolarPoint) -> C64 {
    let al = idx.ell.unsigned_abs();
    let wz = beam.waist_at(point.z);
    let rw = std::f64::consts::SQRT_2 * point.r / wz;
    let rw2 = rw * rw;
    let radial = norm_constant(idx) / wz
        * pow_abs(rw, al)
        * assoc_laguerre(idx.p, al, rw2)
        * (-0.5 * rw2).exp();
    let phase = idx.ell as f64 * point.phi
        - 0.5 * beam.k * point.r * point.r * beam.inv_curvature(point.z)
        + beam.gouy_phase(idx.order(), point.z);
    radial * C64::new(0.0, phase).exp()
}

/// Angular spectrum of the LG mode at z = 0, amplitude dimension m:
/// the forward transform (1/2pi) int u e^{+i rho . r} d^2 r.
pub fn eval_lg_spectrum(idx: ModeIndex, beam: &BeamGeometry, rho: f64, varphi: f64) -> C64 {
    let al = idx.ell.unsigned_abs();
    let rw = rho * beam.w0 / std::f64::consts::SQRT_2;
    let rw2 = rw * rw;
    let radial = norm_constant(idx)
        * 0.5
        * beam.w0
        * pow_abs(rw, al)
        * assoc_laguerre(idx.p, al, rw2)
        * (-0.5 * rw2).exp();
    let phase = idx.ell as f64 * varphi + 0.5 * std::f64::consts::PI * idx.order() as f64;
    radial * C64::new(0.0, phase).exp()
}

/// Propagates a spectrum value from z = 0 to z: multiplies by the pure
/// phase e^{+i rho^2 z / (2k)}. Magnitude is preserved exactly.
pub fn propagate_spectrum(value: C64, beam: &BeamGeometry, rho: f64, z: f64) -> C64 {
    value * C64::new(0.0, rho * rho * z / (2.0 * beam.k)).exp()
}

/// x^n for non-negative integer n with 0^0 = 1, avoiding powf at the
/// axis where x = 0 and n = 0 must give the finite l = 0 value.
fn pow_abs(x: f64, n: u32) -> f64 {
    match n {
        0 => 1.0,
        _ => x.powi(n as i32),
    }
}

/// Radial profile of the position-space mode at z = 0 (no azimuthal
/// phase), used by the overlap integrals: u = profile * e^{i l phi}.
pub(crate) fn radial_profile_position(idx: ModeIndex, beam: &BeamGeometry, r: f64) -> f64 {
    let al = idx.ell.unsigned_abs();
    let rw = std::f64::consts::SQRT_2 * r / beam.w0;
    let rw2 = rw * rw;
    norm_constant(idx) / beam.w0
        * pow_abs(rw, al)
        * assoc_laguerre(idx.p, al, rw2)
        * (-0.5 * rw2).exp()
}

/// Radial profile of the angular spectrum at z = 0 in the scaled
/// variable rho_w = rho w0 / sqrt(2), without the azimuthal and mode
/// order phases. Used by the momentum-space quadratures, which work in
/// waist-scaled units throughout.
pub(crate) fn radial_profile_spectrum_scaled(idx: ModeIndex, rho_w: f64) -> f64 {
    let al = idx.ell.unsigned_abs();
    let rw2 = rho_w * rho_w;
    // w0 set to sqrt(2) so that rho_w is the bare coordinate; the global
    // w0 power is uniform across entries and dropped by normalization
    norm_constant(idx)
        * std::f64::consts::FRAC_1_SQRT_2
        * pow_abs(rho_w, al)
        * assoc_laguerre(idx.p, al, rw2)
        * (-0.5 * rw2).exp()
}

/// Log of the normalization constant ratio used by the nested-sum
/// momentum formula; exposed to the momentum module.
pub(crate) fn ln_norm_constant(idx: ModeIndex) -> f64 {
    let p = idx.p as u64;
    let al = idx.ell.unsigned_abs() as u64;
    0.5 * (std::f64::consts::LN_2 + ln_factorial(p)
        - std::f64::consts::PI.ln()
        - ln_factorial(p + al))
}

/// ln Gamma re-export for sibling modules.
pub(crate) fn ln_gamma_pub(x: f64) -> f64 {
    ln_gamma(x)
}
