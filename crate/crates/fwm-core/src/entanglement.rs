//! Entanglement observables of the biphoton state: OAM distribution,
//! spiral bandwidth, entanglement entropy, reduced-state purity with the
//! Schmidt number, and the Gaussian-approximation Schmidt number.

use crate::position::BiphotonAmplitudes;
use crate::{Error, Result};

/// Joint OAM distribution P_{l, l'} obtained by tracing the radial
/// indices out of the coincidence amplitudes.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct OamDistribution {
    /// ((l_probe, l_signal), probability), normalized, in fixed charge
    /// order.
    pub probabilities: Vec<((i32, i32), f64)>,
}

impl OamDistribution {
    /// Probability at a charge pair.
    pub fn get(&self, l_probe: i32, l_signal: i32) -> f64 {
        self.probabilities
            .iter()
            .find(|((a, b), _)| *a == l_probe && *b == l_signal)
            .map(|&(_, p)| p)
            .unwrap_or(0.0)
    }

    /// Marginal distribution of the probe charge.
    pub fn probe_marginal(&self) -> Vec<(i32, f64)> {
        let mut out: Vec<(i32, f64)> = Vec::new();
        for &((l, _), p) in &self.probabilities {
            match out.iter_mut().find(|(ll, _)| *ll == l) {
                Some((_, acc)) => *acc += p,
                None => out.push((l, p)),
            }
        }
        out
    }

    /// Slice P_{l, lT - l} for a fixed total charge.
    pub fn total_charge_slice(&self, l_total: i32) -> Vec<(i32, f64)> {
        self.probabilities
            .iter()
            .filter(|((a, b), _)| a + b == l_total)
            .map(|&((a, _), p)| (a, p))
            .collect()
    }
}

/// Radial trace of the amplitude tensor, renormalized so the
/// probabilities sum to one.
pub fn oam_distribution(amps: &BiphotonAmplitudes) -> OamDistribution {
    let ell_range: Vec<i32> = amps.subspace.ell_range().collect();
    let mut probabilities: Vec<((i32, i32), f64)> = Vec::new();
    for &lp in &ell_range {
        for &ls in &ell_range {
            probabilities.push(((lp, ls), 0.0));
        }
    }
    let n_ell = ell_range.len();
    for (mp, ms, v) in amps.entries() {
        let ip = (mp.ell - ell_range[0]) as usize;
        let is = (ms.ell - ell_range[0]) as usize;
        probabilities[ip * n_ell + is].1 += v.norm_sqr();
    }
    let total: f64 = probabilities.iter().map(|&(_, p)| p).sum();
    if total > 0.0 {
        for (_, p) in &mut probabilities {
            *p /= total;
        }
    }
    OamDistribution { probabilities }
}

/// Spiral bandwidth: standard deviation of the probe charge under the
/// OAM distribution.
pub fn spiral_bandwidth(dist: &OamDistribution) -> f64 {
    let marginal = dist.probe_marginal();
    let mean: f64 = marginal.iter().map(|&(l, p)| l as f64 * p).sum();
    let second: f64 = marginal.iter().map(|&(l, p)| (l as f64).powi(2) * p).sum();
    (second - mean * mean).max(0.0).sqrt()
}

/// Shannon entropy of the OAM distribution in bits, with 0 log 0 = 0.
pub fn entanglement_entropy(dist: &OamDistribution) -> f64 {
    -dist
        .probabilities
        .iter()
        .filter(|&&(_, p)| p > 0.0)
        .map(|&(_, p)| p * p.log2())
        .sum::<f64>()
}

/// Reduced-state purity P_s and Schmidt number K = 1/P_s.
///
/// The purity is the full eight-index contraction of the amplitude
/// tensor with itself; the equivalent explicit construction of the
/// reduced density matrix lives in the test oracle.
pub fn purity_and_schmidt(amps: &BiphotonAmplitudes) -> (f64, f64) {
    let n = amps.subspace.one_sided_count();
    let a = &amps.values;
    // gram over the probe side: G_{i i'} = sum_j A_{i j} conj(A_{i' j})
    let mut purity = 0.0;
    for i in 0..n {
        for i2 in 0..n {
            let mut g = crate::C64::new(0.0, 0.0);
            for j in 0..n {
                g += a[i * n + j] * a[i2 * n + j].conj();
            }
            purity += g.norm_sqr();
        }
    }
    let norm: f64 = amps.norm_sqr();
    let purity = purity / (norm * norm);
    (purity, 1.0 / purity)
}

/// Half-maximum matching factor between the sinc phase-matching profile
/// and its Gaussian stand-in.
pub const GAMMA_SINC_WIDTH: f64 = 0.257;

/// Gaussian-approximation Schmidt number
/// K_G(zeta) = (gamma^2/8) (sqrt(zeta) + (2/gamma^2)/sqrt(zeta))^2 with
/// zeta = L/z_R. Minimum value 1 at zeta = 2/gamma^2.
pub fn schmidt_gaussian(zeta: f64) -> Result<f64> {
    if !zeta.is_finite() || zeta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "zeta = L/z_R must be positive, got {zeta}"
        )));
    }
    let g2 = GAMMA_SINC_WIDTH * GAMMA_SINC_WIDTH;
    let root = zeta.sqrt();
    Ok(g2 / 8.0 * (root + 2.0 / (g2 * root)).powi(2))
}

/// The pump-spectrum and phase-matching widths (sigma_perp, b) entering
/// the Gaussian Schmidt estimate, for a four-wave-mixing process
/// (two pump photons, j = 2).
pub fn schmidt_gaussian_widths(beam: &crate::modes::BeamGeometry, length: f64) -> (f64, f64) {
    let j = 2.0;
    let sigma = (2.0 * j * beam.k / beam.z_r).sqrt();
    let b = GAMMA_SINC_WIDTH * (length / (4.0 * j * beam.k)).sqrt();
    (sigma, b)
}
