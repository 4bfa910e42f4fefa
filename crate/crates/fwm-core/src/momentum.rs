//! Momentum-representation coincidence amplitudes with the sinc
//! phase-matching kernel, by two independent routes:
//!
//! - [`amplitudes_momentum_quadrature`]: the phase-matching factor is
//!   kept as its longitudinal integral and the transverse double
//!   integral is evaluated on a Gauss-Legendre (radial) x uniform
//!   (relative-angle) product grid. Handles every charge directly.
//! - [`amplitudes_momentum_analytic`]: the nested finite-sum formula
//!   obtained by expanding the Laguerre polynomials and binomials and
//!   resolving the angular integrals into Bessel functions; the
//!   remaining Bessel series is summed adaptively with a quadrature
//!   fallback per entry when it fails to settle.
//!
//! Both evaluate in waist-scaled units: with rho expressed as
//! rho_w = rho w0 / sqrt(2) and z as z / z_R, every entry acquires the
//! same global power of w0, which the final normalization removes. The
//! normalized tensor therefore depends on (L / z_R) only, which is also
//! why fixed-distance contours in the (L, w0) plane follow w0 ~ sqrt(L).

use rayon::prelude::*;

use crate::modes::{
    ln_gamma_pub, ln_norm_constant, radial_profile_spectrum_scaled, BeamGeometry, ModeIndex,
};
use crate::position::{BiphotonAmplitudes, Representation, Subspace};
use crate::pump::{effective_waist, MediumGeometry, ProductExpansion};
use crate::quadrature::Rule;
use crate::special::binomial;
use crate::{Error, Result, C64};

/// Phase-matching kernel data: beam, medium window, and the derived
/// quadratic coefficients of the Gaussian-times-window integrand.
#[derive(Debug, Clone, Copy)]
pub struct PhaseMatchKernel {
    pub beam: BeamGeometry,
    pub medium: MediumGeometry,
}

impl PhaseMatchKernel {
    pub fn new(beam: BeamGeometry, medium: MediumGeometry) -> Result<Self> {
        medium.validate()?;
        Ok(Self { beam, medium })
    }

    /// alpha_+^2(z) = w0^2/8 + i z / 4k.
    pub fn alpha_sq_plus(&self, z: f64) -> C64 {
        C64::new(self.beam.w0 * self.beam.w0 / 8.0, z / (4.0 * self.beam.k))
    }

    /// alpha_-^2(z) = w0^2/8 - i z / 4k.
    pub fn alpha_sq_minus(&self, z: f64) -> C64 {
        C64::new(self.beam.w0 * self.beam.w0 / 8.0, -z / (4.0 * self.beam.k))
    }

    /// Transverse width of the pump-spectrum Gaussian: the pump waist
    /// for a uniform cell, the effective waist for a cloud.
    pub fn gaussian_width(&self) -> f64 {
        match self.medium {
            MediumGeometry::UniformCell { .. } => self.beam.w0,
            MediumGeometry::ColdCloud { radius, .. } => effective_waist(self.beam.w0, radius),
        }
    }

    /// Longitudinal window rule and weight profile, shared by the kernel
    /// and both tensor routes: a flat window over [-L/2, L/2] for the
    /// cell, a Gaussian profile over [-2L, 2L] for the cloud. Weights
    /// are normalized so a unit integrand averages to one.
    fn longitudinal_window(&self, nodes: usize) -> (Rule, Vec<f64>) {
        match self.medium {
            MediumGeometry::UniformCell { length } => {
                let rule = Rule::gauss_legendre(nodes, -length / 2.0, length / 2.0);
                let profile = vec![1.0 / length; rule.len()];
                (rule, profile)
            }
            MediumGeometry::ColdCloud { length, .. } => {
                let rule = Rule::gauss_legendre(nodes, -2.0 * length, 2.0 * length);
                let weights: Vec<f64> = rule
                    .nodes
                    .iter()
                    .map(|&z| (-4.0 * z * z / (length * length)).exp())
                    .collect();
                let mass: f64 = rule
                    .weights
                    .iter()
                    .zip(weights.iter())
                    .map(|(w, p)| w * p)
                    .sum();
                let profile = weights.iter().map(|p| p / mass).collect();
                (rule, profile)
            }
        }
    }
}

/// Grid and series controls for the momentum-space evaluation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureConfig {
    /// Gauss-Legendre nodes per radial wavenumber axis.
    pub radial_nodes: usize,
    /// Radial truncation in units of 1/w0; spectra decay like
    /// e^{-rho^2 w0^2 / 4}.
    pub radial_truncation: f64,
    /// Uniform nodes over the relative azimuthal angle.
    pub azimuthal_nodes: usize,
    /// Gauss-Legendre nodes over the longitudinal window.
    pub z_nodes: usize,
    /// Bessel-series stop: three consecutive terms below this fraction
    /// of the running sum.
    pub bessel_tol: f64,
    /// Hard cap on Bessel-series terms before declaring divergence.
    pub bessel_max_terms: usize,
    /// When set, the quadrature route recomputes at doubled radial
    /// nodes and errors if any normalized entry moves by more than
    /// this.
    pub convergence_tolerance: Option<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            radial_nodes: 96,
            radial_truncation: 12.0,
            azimuthal_nodes: 64,
            z_nodes: 32,
            bessel_tol: 1e-12,
            bessel_max_terms: 200,
            convergence_tolerance: None,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radial_nodes < 8 || self.azimuthal_nodes < 8 || self.z_nodes < 8 {
            return Err(Error::InvalidParameter(
                "momentum quadrature needs at least 8 nodes per axis".into(),
            ));
        }
        if self.radial_truncation < 8.0 {
            return Err(Error::InvalidParameter(
                "radial truncation below 8/w0 clips the spectra".into(),
            ));
        }
        if self.bessel_max_terms == 0 || !self.bessel_tol.is_finite() || self.bessel_tol <= 0.0 {
            return Err(Error::InvalidParameter("bad Bessel series controls".into()));
        }
        Ok(())
    }
}

/// How a momentum tensor entry was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryMethod {
    Analytic,
    QuadratureFallback,
    Quadrature,
}

impl EntryMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntryMethod::Analytic => "analytic",
            EntryMethod::QuadratureFallback => "quadrature-fallback",
            EntryMethod::Quadrature => "quadrature",
        }
    }
}

/// Biphoton momentum kernel Phi(rho_pr, rho_s): the pump-spectrum
/// Gaussian times the longitudinal phase-matching factor, with the
/// effective width and Gaussian window substituted for a cloud. The
/// wavevectors are transverse Cartesian pairs in rad/m.
pub fn biphoton_kernel(rho_pr: [f64; 2], rho_s: [f64; 2], kernel: &PhaseMatchKernel) -> C64 {
    let sum2 = (rho_pr[0] + rho_s[0]).powi(2) + (rho_pr[1] + rho_s[1]).powi(2);
    let dif2 = (rho_pr[0] - rho_s[0]).powi(2) + (rho_pr[1] - rho_s[1]).powi(2);
    let weff = kernel.gaussian_width();
    let gauss = (-weff * weff * sum2 / 8.0).exp() / (2.0 * std::f64::consts::PI);
    let (rule, profile) = kernel.longitudinal_window(32);
    let mut window = C64::new(0.0, 0.0);
    for ((&z, &w), &p) in rule
        .nodes
        .iter()
        .zip(rule.weights.iter())
        .zip(profile.iter())
    {
        window += w * p * C64::new(0.0, -z * dif2 / (4.0 * kernel.beam.k)).exp();
    }
    gauss * window
}

// ---------------------------------------------------------------------
// scaled-unit helpers
//
// rho_w = rho w0 / sqrt(2), zeta = z / z_R. In these variables the
// phase-matching exponent is -i zeta (rho_w^2 + rho_w'^2 - 2 rho_w
// rho_w' cos D) / 4 and the nested-sum coefficients become
// alpha = 1 + i zeta / 4, beta = -i - zeta / 2 (global w0 powers drop
// after normalization).
// ---------------------------------------------------------------------

/// (zeta nodes, combined weights): quadrature weights times the
/// normalized longitudinal profile, with z expressed in units of z_R.
fn scaled_window(kernel: &PhaseMatchKernel, z_nodes: usize) -> (Vec<f64>, Vec<f64>) {
    let (rule, profile) = kernel.longitudinal_window(z_nodes);
    let zr = kernel.beam.z_r;
    let zetas: Vec<f64> = rule.nodes.iter().map(|&z| z / zr).collect();
    // profile carries 1/length; multiplying by the weight (length
    // units) keeps the product dimensionless, so no z_R factor needed
    let weights: Vec<f64> = rule
        .weights
        .iter()
        .zip(profile.iter())
        .map(|(w, p)| w * p)
        .collect();
    (zetas, weights)
}

struct EntrySpec {
    flat: usize,
    probe: ModeIndex,
    signal: ModeIndex,
}

fn subspace_entries(subspace: &Subspace) -> Vec<EntrySpec> {
    let modes = subspace.modes();
    let n = modes.len();
    let mut out = Vec::with_capacity(n * n);
    for (ip, &probe) in modes.iter().enumerate() {
        for (is, &signal) in modes.iter().enumerate() {
            out.push(EntrySpec {
                flat: ip * n + is,
                probe,
                signal,
            });
        }
    }
    out
}

// ---------------------------------------------------------------------
// quadrature route
// ---------------------------------------------------------------------

/// Shared precomputation for one (m, n) pump term: the pump-side
/// spectrum on the (rho, rho', Delta) grid with the z-window already
/// integrated against the phase-matching exponent.
struct PumpTermKernel {
    /// k_{i j t} laid out as ((i * nr) + j) * na + t.
    data: Vec<C64>,
}

fn build_pump_term_kernel(
    m: i32,
    n: u32,
    radial: &Rule,
    angles: &[f64],
    zetas: &[f64],
    zweights: &[f64],
) -> PumpTermKernel {
    let nr = radial.len();
    let idxmn = ModeIndex::new(m, n);
    let phase_mn = C64::new(0.0, 0.5 * std::f64::consts::PI * idxmn.order() as f64).exp();
    let cos_sin: Vec<(f64, f64)> = angles.iter().map(|&a| (a.cos(), a.sin())).collect();
    let data: Vec<C64> = (0..nr)
        .into_par_iter()
        .flat_map_iter(|i| {
            let ri = radial.nodes[i];
            let cos_sin = &cos_sin;
            (0..nr).flat_map(move |j| {
                let rj = radial.nodes[j];
                cos_sin.iter().map(move |&(c, s)| {
                    // rho at angle Delta, rho' on the x-axis
                    let px = ri * c + rj;
                    let py = ri * s;
                    let rplus = px.hypot(py);
                    let phiplus = py.atan2(px);
                    let spec = radial_profile_spectrum_scaled(idxmn, rplus)
                        * C64::new(0.0, m as f64 * phiplus).exp()
                        * phase_mn;
                    let dif2 = ri * ri + rj * rj - 2.0 * ri * rj * c;
                    let mut window = C64::new(0.0, 0.0);
                    for (&zeta, &w) in zetas.iter().zip(zweights.iter()) {
                        window += w * C64::new(0.0, -zeta * dif2 / 4.0).exp();
                    }
                    spec * window
                })
            })
        })
        .collect();
    PumpTermKernel { data }
}

#[allow(clippy::needless_range_loop)]
fn quadrature_values(
    expansion: &ProductExpansion,
    subspace: &Subspace,
    kernel: &PhaseMatchKernel,
    qcfg: &QuadratureConfig,
    radial_nodes: usize,
) -> Vec<C64> {
    let radial = Rule::gauss_legendre(
        radial_nodes,
        0.0,
        qcfg.radial_truncation / std::f64::consts::SQRT_2,
    );
    let az = Rule::azimuthal_uniform(qcfg.azimuthal_nodes);
    let (zetas, zweights) = scaled_window(kernel, qcfg.z_nodes);
    let entries = subspace_entries(subspace);
    let modes = subspace.modes();
    let nr = radial.len();
    let na = az.len();

    // per-mode scaled spectrum profiles on the radial nodes
    let profiles: Vec<Vec<f64>> = modes
        .iter()
        .map(|&idx| {
            radial
                .nodes
                .iter()
                .map(|&r| radial_profile_spectrum_scaled(idx, r))
                .collect()
        })
        .collect();
    let mode_pos =
        |idx: ModeIndex| -> usize { modes.iter().position(|&m| m == idx).expect("in subspace") };

    let mut values = vec![C64::new(0.0, 0.0); entries.len()];
    for &(mn, a) in &expansion.coefficients {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let term = build_pump_term_kernel(mn.ell, mn.p, &radial, &az.nodes, &zetas, &zweights);
        let contributions: Vec<(usize, C64)> = entries
            .par_iter()
            .filter(|e| e.probe.ell + e.signal.ell == mn.ell)
            .map(|e| {
                let prof_pr = &profiles[mode_pos(e.probe)];
                let prof_s = &profiles[mode_pos(e.signal)];
                // conjugated spectra: (-i)^{N} phases and e^{-i l_pr D}
                let phase_conj = C64::new(
                    0.0,
                    -0.5 * std::f64::consts::PI
                        * (e.probe.order() as f64 + e.signal.order() as f64),
                )
                .exp();
                let lpr = e.probe.ell as f64;
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..nr {
                    let wi = radial.weights[i] * radial.nodes[i] * prof_pr[i];
                    let mut over_j = C64::new(0.0, 0.0);
                    for j in 0..nr {
                        let wj = radial.weights[j] * radial.nodes[j] * prof_s[j];
                        let base = (i * nr + j) * na;
                        let mut over_t = C64::new(0.0, 0.0);
                        for (t, &ang) in az.nodes.iter().enumerate() {
                            over_t += term.data[base + t]
                                * az.weights[t]
                                * C64::new(0.0, -lpr * ang).exp();
                        }
                        over_j += wj * over_t;
                    }
                    acc += wi * over_j;
                }
                (e.flat, a * phase_conj * acc * 2.0 * std::f64::consts::PI)
            })
            .collect();
        for (flat, v) in contributions {
            values[flat] += v;
        }
    }
    values
}

fn normalized(values: &[C64]) -> Vec<C64> {
    let total: f64 = values.iter().map(|v| v.norm_sqr()).sum();
    let scale = if total > 0.0 {
        total.sqrt().recip()
    } else {
        0.0
    };
    values.iter().map(|&v| v * scale).collect()
}

/// Momentum coincidence amplitudes by direct quadrature of the
/// four-dimensional transverse integral (reduced to radial x radial x
/// relative angle by the exact azimuthal selection rule), normalized
/// over the subspace.
///
/// With `convergence_tolerance` set, the tensor is recomputed at twice
/// the radial node count; any normalized entry moving by more than the
/// tolerance is a convergence failure.
pub fn amplitudes_momentum_quadrature(
    expansion: &ProductExpansion,
    subspace: &Subspace,
    kernel: &PhaseMatchKernel,
    qcfg: &QuadratureConfig,
) -> Result<BiphotonAmplitudes> {
    qcfg.validate()?;
    let values = quadrature_values(expansion, subspace, kernel, qcfg, qcfg.radial_nodes);
    let norm_values = normalized(&values);
    if let Some(tol) = qcfg.convergence_tolerance {
        let doubled = quadrature_values(expansion, subspace, kernel, qcfg, 2 * qcfg.radial_nodes);
        let doubled = normalized(&doubled);
        let worst = norm_values
            .iter()
            .zip(doubled.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if worst > tol {
            return Err(Error::NotConverged(format!(
                "doubling radial nodes moved a normalized entry by {worst:.3e} > {tol:.3e}"
            )));
        }
    }
    let mut amps = BiphotonAmplitudes::from_values(
        *subspace,
        kernel.beam,
        Representation::Momentum,
        norm_values,
    );
    amps.normalized = true;
    amps.methods = Some(vec![EntryMethod::Quadrature; amps.values.len()]);
    Ok(amps)
}

// ---------------------------------------------------------------------
// nested-sum (analytic) route
// ---------------------------------------------------------------------

/// Scaled coefficients at one longitudinal node.
struct ZCoeffs {
    alpha: C64,
    beta: C64,
    eta2: C64,
}

fn z_coeffs(zeta: f64) -> ZCoeffs {
    let alpha = C64::new(1.0, zeta / 4.0);
    let beta = C64::new(-zeta / 2.0, -1.0);
    let eta = beta / alpha;
    ZCoeffs {
        alpha,
        beta,
        eta2: eta * eta,
    }
}

/// Laguerre expansion coefficient b_k^{n,alpha} (W^2 = 1 in scaled
/// units, so no extra power).
fn laguerre_term_coef(n: u32, alpha: u32, k: u32) -> f64 {
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * (crate::special::ln_factorial((n + alpha) as u64)
        - crate::special::ln_factorial(k as u64)
        - crate::special::ln_factorial((alpha + k) as u64)
        - crate::special::ln_factorial((n - k) as u64))
    .exp()
}

/// Bessel-series sum for one inner term:
/// sum_g tau_{g,a} Gamma((A+1)/2) Gamma((B+1)/2) eta^{2g},
/// where A and B advance by 2 per g. Terms are generated by the exact
/// ratio recurrence so the huge gamma factors never materialize.
/// Returns None if the tail fails to settle (ten consecutive
/// non-decreasing magnitudes, or the cap is hit).
fn bessel_series(a: i64, a0: i64, b0: i64, z: &ZCoeffs, tol: f64, cap: usize) -> Option<C64> {
    let g0: i64 = (-a).max(0);
    // first term, assembled in log space
    let ln_tau0 = -(2.0 * g0 as f64 + a as f64) * std::f64::consts::LN_2
        - crate::special::ln_factorial(g0 as u64)
        - ln_gamma_pub((g0 + a + 1) as f64);
    let a_start = a0 + 2 * g0;
    let b_start = b0 + 2 * g0;
    let ln_first = ln_tau0
        + ln_gamma_pub((a_start as f64 + 1.0) / 2.0)
        + ln_gamma_pub((b_start as f64 + 1.0) / 2.0);
    let sign = if g0 % 2 == 0 { 1.0 } else { -1.0 };
    let mut term = C64::new(sign * ln_first.exp(), 0.0) * z.eta2.powi(g0 as i32);
    let mut sum = term;
    let mut below = 0usize;
    let mut nondecreasing = 0usize;
    let mut prev_mag = term.norm();
    for g in g0..(g0 + cap as i64) {
        // ratio from term g to g+1
        let x = (a0 + 2 * g) as f64 / 2.0 + 0.5; // (A(g)+1)/2
        let y = (b0 + 2 * g) as f64 / 2.0 + 0.5;
        let ratio = -0.25 * x * y / ((g as f64 + 1.0) * (g as f64 + a as f64 + 1.0));
        term = term * z.eta2 * ratio;
        sum += term;
        let mag = term.norm();
        if mag < tol * sum.norm().max(f64::MIN_POSITIVE) {
            below += 1;
            if below >= 3 {
                return Some(sum);
            }
        } else {
            below = 0;
        }
        if mag >= prev_mag {
            nondecreasing += 1;
            if nondecreasing >= 10 {
                return None;
            }
        } else {
            nondecreasing = 0;
        }
        prev_mag = mag;
    }
    None
}

/// T tensor value at one longitudinal node, in scaled units, for
/// m = l_pr + l_s >= 0. Negative total charge goes through the
/// conjugation relation at the integral level.
fn t_scaled(
    probe: ModeIndex,
    signal: ModeIndex,
    m: i32,
    n: u32,
    zeta: f64,
    tol: f64,
    cap: usize,
) -> Option<C64> {
    debug_assert!(m >= 0);
    debug_assert_eq!(probe.ell + signal.ell, m);
    let z = z_coeffs(zeta);
    let al_pr = probe.ell.unsigned_abs();
    let al_s = signal.ell.unsigned_abs();
    let am = m as u32;
    let idxmn = ModeIndex::new(m, n);
    let delta_n = idxmn.order() as i64 - probe.order() as i64 - signal.order() as i64;
    // prefactor pi^2 w0^3/8 * norm constants * i^{Delta N}; in scaled
    // units w0 = sqrt(2), so (w0/sqrt 2)^{charge sum} = 1 and the
    // Laguerre coefficients carry no waist power either
    let ln_norms = ln_norm_constant(probe) + ln_norm_constant(signal) + ln_norm_constant(idxmn);
    let scale =
        std::f64::consts::PI.powi(2) * (2.0 * std::f64::consts::SQRT_2 / 8.0) * ln_norms.exp();
    let pref = C64::new(0.0, 0.5 * std::f64::consts::PI * delta_n as f64).exp() * scale;

    let mut total = C64::new(0.0, 0.0);
    for j in 0..=probe.p {
        let bj = laguerre_term_coef(probe.p, al_pr, j);
        for kk in 0..=signal.p {
            let bk = laguerre_term_coef(signal.p, al_s, kk);
            for l in 0..=n {
                let bl = laguerre_term_coef(n, am, l);
                let h = l; // (2l + |m| - m)/2 with m >= 0
                for u in 0..=h {
                    let c_hu = binomial(h, u);
                    for v in 0..=am {
                        let c_mv = binomial(am, v);
                        for f in 0..=(h - u) {
                            let c_hf = binomial(h - u, f);
                            for d in 0..=u {
                                let c_ud = binomial(u, d);
                                let a = m as i64 - v as i64 - probe.ell as i64 + u as i64
                                    - 2 * d as i64;
                                // s = 1 + (|l_pr| + |l_s| + m)/2 + j + h + k + a;
                                // the charge sum is even because m = l_pr + l_s
                                let two_s = 2
                                    + (al_pr + al_s + am) as i64
                                    + 2 * (j + h + kk) as i64
                                    + 2 * a;
                                let a0 = 1
                                    + al_pr as i64
                                    + 2 * (j + h - u - f) as i64
                                    + u as i64
                                    + (am - v) as i64
                                    + a;
                                let b0 = 1 + al_s as i64 + 2 * (kk + f) as i64 + (u + v) as i64 + a;
                                let series = bessel_series(a, a0, b0, &z, tol, cap)?;
                                // beta^a / alpha^{1+s}: alpha^{1+s} =
                                // alpha^{(2 + two_s)/2}; two_s is even
                                let powers =
                                    z.beta.powi(a as i32) * z.alpha.powi(-(1 + two_s as i32 / 2));
                                let phase_a =
                                    C64::new(0.0, -0.5 * std::f64::consts::PI * a as f64).exp(); // (-i)^a
                                total += bj
                                    * bk
                                    * bl
                                    * c_hu
                                    * c_mv
                                    * c_hf
                                    * c_ud
                                    * phase_a
                                    * powers
                                    * series;
                            }
                        }
                    }
                }
            }
        }
    }
    Some(pref * total)
}

/// z-window integral of T in scaled units for arbitrary-sign m,
/// using the symmetric-window conjugation relation for m < 0:
/// integral of T^{-l_pr,-l_s,-m}(z) over an even window equals
/// (-1)^{Delta N} times the conjugate of the m >= 0 integral.
fn t_window_integral(
    probe: ModeIndex,
    signal: ModeIndex,
    n: u32,
    zetas: &[f64],
    zweights: &[f64],
    tol: f64,
    cap: usize,
) -> Option<C64> {
    let m = probe.ell + signal.ell;
    if m >= 0 {
        let mut acc = C64::new(0.0, 0.0);
        for (&zeta, &w) in zetas.iter().zip(zweights.iter()) {
            acc += w * t_scaled(probe, signal, m, n, zeta, tol, cap)?;
        }
        Some(acc)
    } else {
        let probe_m = ModeIndex::new(-probe.ell, probe.p);
        let signal_m = ModeIndex::new(-signal.ell, signal.p);
        let flipped = t_window_integral(probe_m, signal_m, n, zetas, zweights, tol, cap)?;
        let delta_n =
            ModeIndex::new(-m, n).order() as i64 - probe.order() as i64 - signal.order() as i64;
        let sign = if delta_n % 2 == 0 { 1.0 } else { -1.0 };
        Some(sign * flipped.conj())
    }
}

/// Quadrature evaluation of a single entry, used as the per-entry
/// fallback when the Bessel series refuses to settle.
fn quadrature_single_entry(
    expansion: &ProductExpansion,
    probe: ModeIndex,
    signal: ModeIndex,
    kernel: &PhaseMatchKernel,
    qcfg: &QuadratureConfig,
) -> C64 {
    let radial = Rule::gauss_legendre(
        qcfg.radial_nodes,
        0.0,
        qcfg.radial_truncation / std::f64::consts::SQRT_2,
    );
    let az = Rule::azimuthal_uniform(qcfg.azimuthal_nodes);
    let (zetas, zweights) = scaled_window(kernel, qcfg.z_nodes);
    let mut entry = C64::new(0.0, 0.0);
    let phase_conj = C64::new(
        0.0,
        -0.5 * std::f64::consts::PI * (probe.order() as f64 + signal.order() as f64),
    )
    .exp();
    for &(mn, a) in &expansion.coefficients {
        if mn.ell != probe.ell + signal.ell || a.norm_sqr() == 0.0 {
            continue;
        }
        let idxmn = mn;
        let phase_mn = C64::new(0.0, 0.5 * std::f64::consts::PI * idxmn.order() as f64).exp();
        let mut acc = C64::new(0.0, 0.0);
        for (&ri, &wi) in radial.nodes.iter().zip(radial.weights.iter()) {
            let prof_pr = radial_profile_spectrum_scaled(probe, ri);
            for (&rj, &wj) in radial.nodes.iter().zip(radial.weights.iter()) {
                let prof_s = radial_profile_spectrum_scaled(signal, rj);
                for (&ang, &wt) in az.nodes.iter().zip(az.weights.iter()) {
                    let (sa, ca) = ang.sin_cos();
                    let px = ri * ca + rj;
                    let py = ri * sa;
                    let rplus = px.hypot(py);
                    let phiplus = py.atan2(px);
                    let spec = radial_profile_spectrum_scaled(idxmn, rplus)
                        * C64::new(0.0, mn.ell as f64 * phiplus).exp();
                    let dif2 = ri * ri + rj * rj - 2.0 * ri * rj * ca;
                    let mut window = C64::new(0.0, 0.0);
                    for (&zeta, &w) in zetas.iter().zip(zweights.iter()) {
                        window += w * C64::new(0.0, -zeta * dif2 / 4.0).exp();
                    }
                    acc += wi
                        * wj
                        * wt
                        * ri
                        * rj
                        * prof_pr
                        * prof_s
                        * spec
                        * window
                        * C64::new(0.0, -(probe.ell as f64) * ang).exp();
                }
            }
        }
        entry += a * phase_mn * phase_conj * acc * 2.0 * std::f64::consts::PI;
    }
    entry
}

/// Momentum coincidence amplitudes through the nested-sum formula, with
/// the longitudinal integral done on the shared window rule. Entries
/// whose Bessel series fails to settle fall back to direct quadrature
/// and are flagged in the per-entry method metadata.
pub fn amplitudes_momentum_analytic(
    expansion: &ProductExpansion,
    subspace: &Subspace,
    kernel: &PhaseMatchKernel,
    qcfg: &QuadratureConfig,
) -> Result<BiphotonAmplitudes> {
    qcfg.validate()?;
    let (zetas, zweights) = scaled_window(kernel, qcfg.z_nodes);
    let entries = subspace_entries(subspace);
    let results: Vec<(C64, EntryMethod)> = entries
        .par_iter()
        .map(|e| {
            let m = e.probe.ell + e.signal.ell;
            let mut acc = C64::new(0.0, 0.0);
            let mut fell_back = false;
            for &(mn, a) in &expansion.coefficients {
                if mn.ell != m || a.norm_sqr() == 0.0 {
                    continue;
                }
                match t_window_integral(
                    e.probe,
                    e.signal,
                    mn.p,
                    &zetas,
                    &zweights,
                    qcfg.bessel_tol,
                    qcfg.bessel_max_terms,
                ) {
                    Some(t) => acc += a * t,
                    None => {
                        fell_back = true;
                        break;
                    }
                }
            }
            if fell_back {
                (
                    quadrature_single_entry(expansion, e.probe, e.signal, kernel, qcfg),
                    EntryMethod::QuadratureFallback,
                )
            } else {
                (acc, EntryMethod::Analytic)
            }
        })
        .collect();

    let raw: Vec<C64> = results.iter().map(|(v, _)| *v).collect();
    let methods: Vec<EntryMethod> = results.iter().map(|(_, m)| *m).collect();
    let mut amps = BiphotonAmplitudes::from_values(
        *subspace,
        kernel.beam,
        Representation::Momentum,
        normalized(&raw),
    );
    amps.normalized = true;
    amps.methods = Some(methods);
    Ok(amps)
}

/// Distance D = sqrt(1 - |<a|b>|^2) between two normalized amplitude
/// tensors on the same subspace.
pub fn trace_distance(a: &BiphotonAmplitudes, b: &BiphotonAmplitudes) -> Result<f64> {
    if a.subspace != b.subspace {
        return Err(Error::SubspaceMismatch(format!(
            "{} vs {}",
            a.subspace, b.subspace
        )));
    }
    if !a.normalized || !b.normalized {
        return Err(Error::NotNormalized);
    }
    let inner: C64 = a
        .values
        .iter()
        .zip(b.values.iter())
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok((1.0 - inner.norm_sqr()).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::DEFAULT_WAVELENGTH;
    use crate::position::coincidence_amplitudes_position;
    use crate::pump::{square_pump_expansion, PumpSpec};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn beam() -> BeamGeometry {
        BeamGeometry::new(1.0e-3, DEFAULT_WAVELENGTH).unwrap()
    }

    fn cell_kernel(length: f64) -> PhaseMatchKernel {
        PhaseMatchKernel::new(beam(), MediumGeometry::UniformCell { length }).unwrap()
    }

    #[test]
    fn kernel_axis_and_gaussian_point() {
        let k = cell_kernel(0.01);
        let phi0 = biphoton_kernel([0.0, 0.0], [0.0, 0.0], &k);
        assert_relative_eq!(phi0.re, 1.0 / (2.0 * std::f64::consts::PI), epsilon = 1e-12);
        assert_abs_diff_eq!(phi0.im, 0.0, epsilon = 1e-15);
        // |rho_pr + rho_s| = sqrt(8)/w0 with rho_pr = rho_s: Gaussian 1/e
        let half = 8.0f64.sqrt() / (2.0 * k.beam.w0);
        let phi = biphoton_kernel([half, 0.0], [half, 0.0], &k);
        assert_relative_eq!(
            phi.re,
            (-1.0f64).exp() / (2.0 * std::f64::consts::PI),
            epsilon = 1e-10
        );
    }

    #[test]
    fn kernel_window_equals_closed_form_sinc() {
        let k = cell_kernel(0.02);
        for dif in [0.3e3, 2.0e3, 8.0e3] {
            let rho_pr = [dif / 2.0, 0.0];
            let rho_s = [-dif / 2.0, 0.0];
            let phi = biphoton_kernel(rho_pr, rho_s, &k);
            let d2 = dif * dif;
            let x = 0.02 * d2 / (8.0 * k.beam.k);
            let sinc = if x.abs() < 1e-12 { 1.0 } else { x.sin() / x };
            let gauss = (-k.beam.w0.powi(2) * 0.0 / 8.0f64).exp() / (2.0 * std::f64::consts::PI);
            assert_abs_diff_eq!(phi.re, gauss * sinc, epsilon = 1e-10);
            assert_abs_diff_eq!(phi.im, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn alpha_coefficients_at_origin() {
        let k = cell_kernel(0.01);
        let w2 = k.beam.w0 * k.beam.w0;
        assert_eq!(k.alpha_sq_plus(0.0), C64::new(w2 / 8.0, 0.0));
        assert_eq!(k.alpha_sq_minus(0.0), C64::new(w2 / 8.0, 0.0));
        // scaled eta(0) = -i, unit magnitude
        let z = z_coeffs(0.0);
        let eta = z.beta / z.alpha;
        assert_abs_diff_eq!((eta - C64::new(0.0, -1.0)).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(eta.norm(), 1.0, epsilon = 1e-15);
    }

    fn small_qcfg() -> QuadratureConfig {
        QuadratureConfig {
            radial_nodes: 64,
            azimuthal_nodes: 48,
            z_nodes: 16,
            ..QuadratureConfig::default()
        }
    }

    #[test]
    fn dual_route_agreement_small_subspace() {
        let b = beam();
        let pump = PumpSpec::gaussian(b);
        let expansion = square_pump_expansion(&pump, 4).unwrap();
        let sub = Subspace::new(1, 1);
        for lf in [0.01, 0.1] {
            let kernel = cell_kernel(lf * b.z_r);
            let ana =
                amplitudes_momentum_analytic(&expansion, &sub, &kernel, &small_qcfg()).unwrap();
            let quad =
                amplitudes_momentum_quadrature(&expansion, &sub, &kernel, &small_qcfg()).unwrap();
            let scale: f64 = ana.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            assert!(scale > 0.0);
            for (x, y) in ana.values.iter().zip(quad.values.iter()) {
                let denom = x.norm().max(1e-3);
                assert!((x - y).norm() / denom < 1e-3, "L={lf} zR: {x} vs {y}");
            }
        }
    }

    #[test]
    fn dual_route_millimeter_cell() {
        // w0 = 1 mm, L = 3 mm on S(1,3): the two evaluation routes
        // agree and the distribution keeps the expected shape
        let b = beam();
        let pump = PumpSpec::gaussian(b);
        let expansion = square_pump_expansion(&pump, 4).unwrap();
        let sub = Subspace::new(1, 3);
        let kernel = cell_kernel(3.0e-3);
        let qcfg = small_qcfg();
        let ana = amplitudes_momentum_analytic(&expansion, &sub, &kernel, &qcfg).unwrap();
        let quad = amplitudes_momentum_quadrature(&expansion, &sub, &kernel, &qcfg).unwrap();
        for ((mp, ms, x), (_, _, y)) in ana.entries().iter().zip(quad.entries().iter()) {
            if x.norm() < 1e-9 && y.norm() < 1e-9 {
                continue;
            }
            let rel = (x - y).norm() / x.norm().max(y.norm());
            assert!(
                rel < 1e-3,
                "entry ({mp},{ms}): relative deviation {rel:.2e}"
            );
        }
        // dominant fundamental pair, entries fading with radial order
        let peak = ana
            .get(ModeIndex::new(0, 0), ModeIndex::new(0, 0))
            .unwrap()
            .norm();
        for (mp, ms, v) in ana.entries() {
            if (mp, ms) != (ModeIndex::new(0, 0), ModeIndex::new(0, 0)) {
                assert!(v.norm() < peak, "({mp},{ms}) should not exceed the peak");
            }
        }
        let deep = ana
            .get(ModeIndex::new(0, 3), ModeIndex::new(0, 3))
            .unwrap()
            .norm();
        assert!(deep < 0.5 * peak);
    }

    #[test]
    fn oam_selection_exact() {
        let b = beam();
        let pump = PumpSpec::gaussian(b);
        let expansion = square_pump_expansion(&pump, 2).unwrap();
        let sub = Subspace::new(2, 1);
        let kernel = cell_kernel(0.05 * b.z_r);
        let amps = amplitudes_momentum_analytic(&expansion, &sub, &kernel, &small_qcfg()).unwrap();
        for (mp, ms, v) in amps.entries() {
            if mp.ell + ms.ell != 0 {
                assert_eq!(v, C64::new(0.0, 0.0), "entry {mp} {ms}");
            }
        }
    }

    #[test]
    fn exchange_symmetry() {
        let b = beam();
        let pump = PumpSpec::gaussian(b);
        let expansion = square_pump_expansion(&pump, 3).unwrap();
        let sub = Subspace::new(1, 1);
        let kernel = cell_kernel(0.2 * b.z_r);
        let amps = amplitudes_momentum_analytic(&expansion, &sub, &kernel, &small_qcfg()).unwrap();
        for (mp, ms, v) in amps.entries() {
            let swapped = amps.get(ms, mp).unwrap();
            assert!(
                (v - swapped).norm() < 1e-12,
                "exchange symmetry at {mp},{ms}: {v} vs {swapped}"
            );
        }
    }

    #[test]
    fn thin_medium_matches_position_representation() {
        let b = beam();
        let pump = PumpSpec::gaussian(b);
        let expansion = square_pump_expansion(&pump, 8).unwrap();
        let sub = Subspace::new(2, 1);
        let kernel = cell_kernel(1e-4 * b.z_r);
        let mom = amplitudes_momentum_analytic(&expansion, &sub, &kernel, &small_qcfg()).unwrap();
        let pos = coincidence_amplitudes_position(&pump, &sub).unwrap();
        for ((mp, ms, vm), (_, _, vp)) in mom.entries().iter().zip(pos.entries().iter()) {
            assert!(
                (vm - vp).norm() < 1e-3,
                "entry {mp},{ms}: momentum {vm} vs position {vp}"
            );
        }
        let d = trace_distance(&pos, &mom).unwrap();
        assert!(d < 1e-3, "thin-medium distance {d}");
    }

    #[test]
    fn distance_monotone_in_length() {
        let b = beam();
        let pump = PumpSpec::gaussian(b);
        let expansion = square_pump_expansion(&pump, 6).unwrap();
        let sub = Subspace::new(1, 1);
        let pos = coincidence_amplitudes_position(&pump, &sub).unwrap();
        let mut last = -1.0;
        for lf in [1e-3, 1e-2, 0.1, 0.5, 1.0] {
            let kernel = cell_kernel(lf * b.z_r);
            let mom =
                amplitudes_momentum_analytic(&expansion, &sub, &kernel, &small_qcfg()).unwrap();
            let d = trace_distance(&pos, &mom).unwrap();
            assert!(d > last, "D should grow with L/zR: {d} after {last}");
            last = d;
        }
    }

    #[test]
    fn distance_properties() {
        let b = beam();
        let pump = PumpSpec::gaussian(b);
        let sub = Subspace::new(1, 1);
        let pos = coincidence_amplitudes_position(&pump, &sub).unwrap();
        // normalization is float-exact only to ~1e-16 in the squared
        // norm, so D(a,a) can reach the square root of that
        assert_abs_diff_eq!(trace_distance(&pos, &pos).unwrap(), 0.0, epsilon = 1e-7);
        // disjoint supports -> 1
        let mut other = pos.clone();
        let n = other.values.len();
        for (i, v) in other.values.iter_mut().enumerate() {
            *v = if pos.values[i].norm() > 1e-12 {
                C64::new(0.0, 0.0)
            } else if i % 7 == 0 {
                C64::new(1.0, 0.3)
            } else {
                C64::new(0.0, 0.0)
            };
        }
        assert!(other.norm_sqr() > 0.0, "constructed tensor empty over {n}");
        other.normalize();
        assert_relative_eq!(trace_distance(&pos, &other).unwrap(), 1.0, epsilon = 1e-12);

        // global phase invariance
        let mut rotated = pos.clone();
        let phase = C64::new(0.0, 1.234).exp();
        for v in &mut rotated.values {
            *v *= phase;
        }
        assert_abs_diff_eq!(trace_distance(&pos, &rotated).unwrap(), 0.0, epsilon = 1e-7);
        // mismatched subspaces rejected
        let small = coincidence_amplitudes_position(&pump, &Subspace::new(1, 0)).unwrap();
        assert!(matches!(
            trace_distance(&pos, &small),
            Err(Error::SubspaceMismatch(_))
        ));
    }

    #[test]
    fn cloud_with_wide_radius_matches_cell() {
        // variance-matched Gaussian window and a wide cloud: entries
        // drift below 5% of the dominant entry
        let b = beam();
        let pump = PumpSpec::gaussian(b);
        let sub = Subspace::new(1, 1);
        let length = 0.3 * b.z_r;
        let cell = cell_kernel(length);
        let cell_exp = square_pump_expansion(&pump, 4).unwrap();
        let cell_amps =
            amplitudes_momentum_analytic(&cell_exp, &sub, &cell, &small_qcfg()).unwrap();

        let xi = 3.0;
        let cloud_medium = MediumGeometry::ColdCloud {
            radius: xi * b.w0,
            length: length * (2.0f64 / 3.0).sqrt(),
        };
        let cloud = PhaseMatchKernel::new(b, cloud_medium).unwrap();
        let cloud_exp = crate::pump::cloud_modified_expansion(&pump, &cloud_medium, 4).unwrap();
        let cloud_amps =
            amplitudes_momentum_analytic(&cloud_exp, &sub, &cloud, &small_qcfg()).unwrap();
        let peak = cell_amps
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        for (c, u) in cloud_amps.values.iter().zip(cell_amps.values.iter()) {
            assert!(
                (c - u).norm() < 0.05 * peak,
                "cloud vs cell entry drift: {c} vs {u}"
            );
        }
    }

    #[test]
    fn convergence_check_passes_at_default_resolution() {
        let b = beam();
        let pump = PumpSpec::gaussian(b);
        let expansion = square_pump_expansion(&pump, 2).unwrap();
        let sub = Subspace::new(1, 0);
        let kernel = cell_kernel(0.1 * b.z_r);
        let qcfg = QuadratureConfig {
            convergence_tolerance: Some(1e-6),
            ..small_qcfg()
        };
        let amps = amplitudes_momentum_quadrature(&expansion, &sub, &kernel, &qcfg).unwrap();
        assert!(amps.normalized);
    }

    #[test]
    fn qcfg_validation() {
        let q = QuadratureConfig {
            radial_nodes: 4,
            ..QuadratureConfig::default()
        };
        assert!(q.validate().is_err());
        let q = QuadratureConfig {
            radial_truncation: 4.0,
            ..QuadratureConfig::default()
        };
        assert!(q.validate().is_err());
    }
}
