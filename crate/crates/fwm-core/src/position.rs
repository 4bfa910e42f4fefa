//! Position-representation coincidence amplitudes: the four-mode overlap
//! integral and the amplitude tensor over a truncated mode space.

use rayon::prelude::*;

use crate::modes::{radial_profile_position, BeamGeometry, ModeIndex};
use crate::momentum::EntryMethod;
use crate::pump::{position_radial_rule, PumpSpec};
use crate::{Error, Result, C64};

/// Truncated two-photon mode space. Each photon carries a charge in
/// `[center - l_max, center + l_max]` and a radial index in
/// `[0, p_max]`; the pair space holds
/// `[(2 l_max + 1)(p_max + 1)]^2` modes.
///
/// `center` is zero for the plain space; sweeps over the total pumped
/// OAM recenter each photon's charge window at half the pump's total
/// charge so the conserving pairs stay inside the truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Subspace {
    pub l_max: u32,
    pub p_max: u32,
    #[serde(default)]
    pub center: i32,
}

impl Subspace {
    pub fn new(l_max: u32, p_max: u32) -> Self {
        Self {
            l_max,
            p_max,
            center: 0,
        }
    }

    pub fn centered(l_max: u32, p_max: u32, center: i32) -> Self {
        Self {
            l_max,
            p_max,
            center,
        }
    }

    /// Number of one-sided modes (2 l_max + 1)(p_max + 1).
    pub fn one_sided_count(&self) -> usize {
        (2 * self.l_max as usize + 1) * (self.p_max as usize + 1)
    }

    /// Total number of two-photon modes M.
    pub fn mode_count(&self) -> usize {
        self.one_sided_count() * self.one_sided_count()
    }

    /// One-sided mode labels in fixed iteration order (charge-major).
    pub fn modes(&self) -> Vec<ModeIndex> {
        let mut out = Vec::with_capacity(self.one_sided_count());
        for ell in self.ell_range() {
            for p in 0..=self.p_max {
                out.push(ModeIndex::new(ell, p));
            }
        }
        out
    }

    pub fn ell_range(&self) -> std::ops::RangeInclusive<i32> {
        (self.center - self.l_max as i32)..=(self.center + self.l_max as i32)
    }

    fn flat_index(&self, probe: usize, signal: usize) -> usize {
        probe * self.one_sided_count() + signal
    }
}

impl std::fmt::Display for Subspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.center == 0 {
            write!(f, "S({},{})", self.l_max, self.p_max)
        } else {
            write!(f, "S({},{};center {})", self.l_max, self.p_max, self.center)
        }
    }
}

/// Which space the tensor lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Position,
    Momentum,
}

/// Complex coincidence-amplitude tensor C (or C-tilde) over a subspace,
/// indexed by (probe mode, signal mode) in the subspace's fixed order.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BiphotonAmplitudes {
    pub subspace: Subspace,
    pub beam: BeamGeometry,
    pub representation: Representation,
    pub normalized: bool,
    /// Row-major over (probe, signal) one-sided mode indices.
    pub values: Vec<C64>,
    /// Per-entry evaluation record for the momentum nested-sum path;
    /// `None` for tensors with a single uniform method.
    pub methods: Option<Vec<EntryMethod>>,
}

impl BiphotonAmplitudes {
    pub(crate) fn from_values(
        subspace: Subspace,
        beam: BeamGeometry,
        representation: Representation,
        values: Vec<C64>,
    ) -> Self {
        debug_assert_eq!(values.len(), subspace.mode_count());
        Self {
            subspace,
            beam,
            representation,
            normalized: false,
            values,
            methods: None,
        }
    }

    /// Rescales to sum |C|^2 = 1.
    pub fn normalize(&mut self) {
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if total > 0.0 {
            let scale = total.sqrt().recip();
            for v in &mut self.values {
                *v *= scale;
            }
        }
        self.normalized = true;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Amplitude for a (probe, signal) mode pair, if inside the
    /// subspace.
    pub fn get(&self, probe: ModeIndex, signal: ModeIndex) -> Option<C64> {
        let modes = self.subspace.modes();
        let ip = modes.iter().position(|&m| m == probe)?;
        let is = modes.iter().position(|&m| m == signal)?;
        Some(self.values[self.subspace.flat_index(ip, is)])
    }

    /// (probe, signal, amplitude) triples in fixed order.
    pub fn entries(&self) -> Vec<(ModeIndex, ModeIndex, C64)> {
        let modes = self.subspace.modes();
        let mut out = Vec::with_capacity(self.values.len());
        for (ip, &mp) in modes.iter().enumerate() {
            for (is, &ms) in modes.iter().enumerate() {
                out.push((mp, ms, self.values[self.subspace.flat_index(ip, is)]));
            }
        }
        out
    }

    /// CSV table: `ell_pr,p_pr,ell_s,p_s,re,im[,method]`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let has_methods = self.methods.is_some();
        s.push_str("ell_pr,p_pr,ell_s,p_s,re,im");
        if has_methods {
            s.push_str(",method");
        }
        s.push('\n');
        let modes = self.subspace.modes();
        for (ip, mp) in modes.iter().enumerate() {
            for (is, ms) in modes.iter().enumerate() {
                let idx = self.subspace.flat_index(ip, is);
                let v = self.values[idx];
                s.push_str(&format!(
                    "{},{},{},{},{:e},{:e}",
                    mp.ell, mp.p, ms.ell, ms.p, v.re, v.im
                ));
                if let Some(methods) = &self.methods {
                    s.push(',');
                    s.push_str(methods[idx].as_str());
                }
                s.push('\n');
            }
        }
        s
    }
}

/// Transverse overlap of four LG modes at the waist plane:
/// Lambda = int u_a u_b u*_c u*_d d^2r. Zero unless
/// l_a + l_b = l_c + l_d; otherwise real, computed as an analytic
/// azimuthal delta times a Gauss-Legendre radial integral.
pub fn lambda_overlap(
    a: ModeIndex,
    b: ModeIndex,
    c: ModeIndex,
    d: ModeIndex,
    beam: &BeamGeometry,
) -> C64 {
    if a.ell + b.ell != c.ell + d.ell {
        return C64::new(0.0, 0.0);
    }
    // canonical order inside each symmetric pair keeps the swap
    // symmetries exact at the bit level
    let (a, b) = if b < a { (b, a) } else { (a, b) };
    let (c, d) = if d < c { (d, c) } else { (c, d) };
    let rule = position_radial_rule(beam, 96);
    let mut acc = 0.0;
    for (&r, &w) in rule.nodes.iter().zip(rule.weights.iter()) {
        acc += w
            * r
            * radial_profile_position(a, beam, r)
            * radial_profile_position(b, beam, r)
            * radial_profile_position(c, beam, r)
            * radial_profile_position(d, beam, r);
    }
    C64::new(2.0 * std::f64::consts::PI * acc, 0.0)
}

/// Position-representation coincidence amplitudes over the subspace:
/// C^{pr,s} = sum over pump pairs of c c Lambda, normalized. The
/// third-order susceptibility is a constant overall scale absorbed by
/// the normalization (quasi phase-matched, sinc of the mismatch taken
/// as unity).
pub fn coincidence_amplitudes_position(
    pump: &PumpSpec,
    subspace: &Subspace,
) -> Result<BiphotonAmplitudes> {
    if subspace.mode_count() == 0 {
        return Err(Error::InvalidParameter("empty subspace".into()));
    }
    let beam = pump.beam;
    let modes = subspace.modes();
    let rule = position_radial_rule(&beam, 96);

    // radial profiles for every distinct mode on the shared nodes
    let mut profile_ids: Vec<ModeIndex> = modes.clone();
    profile_ids.extend(pump.coefficients().iter().map(|&(i, _)| i));
    profile_ids.sort_unstable();
    profile_ids.dedup();
    let profiles: Vec<Vec<f64>> = profile_ids
        .iter()
        .map(|&idx| {
            rule.nodes
                .iter()
                .map(|&r| radial_profile_position(idx, &beam, r))
                .collect()
        })
        .collect();
    let profile_of = |idx: ModeIndex| -> &Vec<f64> {
        let at = profile_ids.binary_search(&idx).expect("profile cached");
        &profiles[at]
    };

    let n1 = modes.len();
    let values: Vec<C64> = (0..n1 * n1)
        .into_par_iter()
        .map(|flat| {
            let mp = modes[flat / n1];
            let ms = modes[flat % n1];
            // canonical pair order makes the exchange symmetry exact
            let (ca, cb) = if ms < mp { (ms, mp) } else { (mp, ms) };
            let prof_pr = profile_of(ca);
            let prof_s = profile_of(cb);
            let mut entry = C64::new(0.0, 0.0);
            for &(i, ci) in pump.coefficients() {
                for &(j, cj) in pump.coefficients() {
                    if i.ell + j.ell != mp.ell + ms.ell {
                        continue;
                    }
                    let pi = profile_of(i);
                    let pj = profile_of(j);
                    let mut radial = 0.0;
                    for (((&w, &r), (&a, &b)), (&c, &d)) in rule
                        .weights
                        .iter()
                        .zip(rule.nodes.iter())
                        .zip(pi.iter().zip(pj.iter()))
                        .zip(prof_pr.iter().zip(prof_s.iter()))
                    {
                        radial += w * r * a * b * c * d;
                    }
                    entry += ci * cj * 2.0 * std::f64::consts::PI * radial;
                }
            }
            entry
        })
        .collect();

    let mut amps =
        BiphotonAmplitudes::from_values(*subspace, beam, Representation::Position, values);
    amps.normalize();
    Ok(amps)
}
