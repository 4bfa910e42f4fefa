//! Structured pumps as LG superpositions, the squared-pump function
//! V = Vp^2 and its LG expansion, and the interaction-medium transverse
//! geometry.
//!
//! All expansions use the pump waist as the decomposition-basis waist.
//! Expansion coefficients are reported normalized by the full Parseval
//! mass of V (so for a Gaussian pump the radial coefficients are exactly
//! sqrt(8/9) 3^-q); [`ProductExpansion::unit_norm_coefficients`] instead
//! renormalizes the kept vector to unit Euclidean norm, which is the
//! convention of the tabulated cloud-modified coefficients.

use crate::modes::{radial_profile_position, BeamGeometry, ModeIndex};
use crate::quadrature::Rule;
use crate::{Error, Result, C64};

/// Structured pump: normalized LG coefficients c_{l,q} on a common beam
/// geometry.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct PumpSpec {
    coefficients: Vec<(ModeIndex, C64)>,
    pub beam: BeamGeometry,
}

impl PumpSpec {
    /// Builds a pump from coefficients that must already satisfy
    /// sum |c|^2 = 1 within 1e-12.
    pub fn new(coefficients: Vec<(ModeIndex, C64)>, beam: BeamGeometry) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::EmptyPump);
        }
        let norm: f64 = coefficients.iter().map(|(_, c)| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::UnnormalizedPump(norm));
        }
        Ok(Self { coefficients, beam })
    }

    /// Builds a pump after rescaling the coefficients to unit norm.
    pub fn normalized(coefficients: Vec<(ModeIndex, C64)>, beam: BeamGeometry) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::EmptyPump);
        }
        let norm: f64 = coefficients.iter().map(|(_, c)| c.norm_sqr()).sum();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::UnnormalizedPump(norm));
        }
        let scale = norm.sqrt().recip();
        Ok(Self {
            coefficients: coefficients
                .into_iter()
                .map(|(idx, c)| (idx, c * scale))
                .collect(),
            beam,
        })
    }

    /// Fundamental-Gaussian pump.
    pub fn gaussian(beam: BeamGeometry) -> Self {
        Self {
            coefficients: vec![(ModeIndex::new(0, 0), C64::new(1.0, 0.0))],
            beam,
        }
    }

    /// Pump in a single pure LG mode.
    pub fn pure(idx: ModeIndex, beam: BeamGeometry) -> Self {
        Self {
            coefficients: vec![(idx, C64::new(1.0, 0.0))],
            beam,
        }
    }

    pub fn coefficients(&self) -> &[(ModeIndex, C64)] {
        &self.coefficients
    }

    /// Total OAM pumped into the process when the pump is a pure mode:
    /// twice its charge. `None` for genuine superpositions of different
    /// charges.
    pub fn total_oam(&self) -> Option<i32> {
        let first = self.coefficients[0].0.ell;
        self.coefficients
            .iter()
            .all(|(idx, _)| idx.ell == first)
            .then_some(2 * first)
    }

    /// Pump field amplitude Vp(r, phi) at the waist plane.
    pub fn field(&self, r: f64, phi: f64) -> C64 {
        self.coefficients
            .iter()
            .map(|&(idx, c)| {
                c * radial_profile_position(idx, &self.beam, r)
                    * C64::new(0.0, idx.ell as f64 * phi).exp()
            })
            .sum()
    }
}

/// Interaction-medium geometry: a transversely uniform vapor cell of
/// length L, or a cold-atom cloud with Gaussian density of transverse
/// radius R and longitudinal length L.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum MediumGeometry {
    UniformCell { length: f64 },
    ColdCloud { radius: f64, length: f64 },
}

impl MediumGeometry {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            MediumGeometry::UniformCell { length } => length > 0.0 && length.is_finite(),
            MediumGeometry::ColdCloud { radius, length } => {
                radius > 0.0 && radius.is_finite() && length > 0.0 && length.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "medium lengths must be positive: {self:?}"
            )))
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            MediumGeometry::UniformCell { length } => length,
            MediumGeometry::ColdCloud { length, .. } => length,
        }
    }
}

/// Expansion of the squared pump V (optionally weighted by the cloud's
/// transverse density) in LG modes of the pump waist.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ProductExpansion {
    /// (mode, coefficient) in a fixed (m, n) order, normalized by the
    /// full Parseval mass of the expanded function.
    pub coefficients: Vec<(ModeIndex, C64)>,
    /// Maximum radial index kept per charge.
    pub truncation_order: u32,
    /// Fraction of the Parseval mass captured by the kept coefficients.
    pub fidelity: f64,
}

impl ProductExpansion {
    /// Kept coefficient vector renormalized to unit Euclidean norm.
    pub fn unit_norm_coefficients(&self) -> Vec<(ModeIndex, C64)> {
        let norm: f64 = self
            .coefficients
            .iter()
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            .sqrt();
        self.coefficients
            .iter()
            .map(|&(idx, a)| (idx, a / norm))
            .collect()
    }

    /// Coefficient for a given mode, if kept.
    pub fn coefficient(&self, idx: ModeIndex) -> Option<C64> {
        self.coefficients
            .iter()
            .find(|(i, _)| *i == idx)
            .map(|&(_, a)| a)
    }
}

/// Default radial rule for the waist-plane overlap integrals: the
/// integrands decay at least as fast as e^{-2 r^2 / w0^2} times a
/// polynomial, so six waists bound the tail far below working precision.
pub(crate) fn position_radial_rule(beam: &BeamGeometry, nodes: usize) -> Rule {
    Rule::gauss_legendre(nodes, 0.0, 6.0 * beam.w0)
}

const DEFAULT_RADIAL_NODES: usize = 96;

/// Three-mode product coefficient
/// s^{m,l,l'}_{n,q,q'} = int u_{l,q} u_{l',q'} u*_{m,n} d^2r at z = 0.
/// Zero unless m = l + l'; the azimuthal integral is done analytically.
pub fn product_expansion_coeff(
    a: ModeIndex,
    b: ModeIndex,
    target: ModeIndex,
    beam: &BeamGeometry,
) -> C64 {
    if a.ell + b.ell != target.ell {
        return C64::new(0.0, 0.0);
    }
    let rule = position_radial_rule(beam, DEFAULT_RADIAL_NODES);
    let mut acc = 0.0;
    for (&r, &w) in rule.nodes.iter().zip(rule.weights.iter()) {
        acc += w
            * r
            * radial_profile_position(a, beam, r)
            * radial_profile_position(b, beam, r)
            * radial_profile_position(target, beam, r);
    }
    C64::new(2.0 * std::f64::consts::PI * acc, 0.0)
}

/// Parseval mass int |f|^2 d^2r of a squared-pump-like function given on
/// a polar grid by the closure.
fn parseval_mass<F>(f: F, beam: &BeamGeometry) -> f64
where
    F: Fn(f64, f64) -> C64,
{
    let radial = position_radial_rule(beam, 128);
    let azim = Rule::azimuthal_uniform(64);
    let mut acc = 0.0;
    for (&r, &wr) in radial.nodes.iter().zip(radial.weights.iter()) {
        for (&phi, &wp) in azim.nodes.iter().zip(azim.weights.iter()) {
            acc += wr * wp * r * f(r, phi).norm_sqr();
        }
    }
    acc
}

/// Distinct charges m = l + l' reachable from the pump's mode pairs.
fn reachable_charges(pump: &PumpSpec) -> Vec<i32> {
    let mut ms: Vec<i32> = pump
        .coefficients()
        .iter()
        .flat_map(|(i, _)| pump.coefficients().iter().map(move |(j, _)| i.ell + j.ell))
        .collect();
    ms.sort_unstable();
    ms.dedup();
    ms
}

/// Expands the squared pump V = Vp^2 in LG modes of the pump waist:
/// a_{m,n} = sum c_{l,q} c_{l',q'} s^{m,l,l'}_{n,q,q'} for every
/// reachable charge m and n <= g, normalized by the Parseval mass of V.
pub fn square_pump_expansion(pump: &PumpSpec, g: u32) -> Result<ProductExpansion> {
    let beam = &pump.beam;
    let mass = parseval_mass(|r, phi| pump.field(r, phi) * pump.field(r, phi), beam);
    if mass <= 0.0 || !mass.is_finite() {
        return Err(Error::InvalidParameter(
            "squared pump has no finite Parseval mass".into(),
        ));
    }
    let scale = mass.sqrt().recip();
    let mut coefficients = Vec::new();
    let mut kept = 0.0;
    for m in reachable_charges(pump) {
        for n in 0..=g {
            let target = ModeIndex::new(m, n);
            let mut a = C64::new(0.0, 0.0);
            for &(i, ci) in pump.coefficients() {
                for &(j, cj) in pump.coefficients() {
                    if i.ell + j.ell != m {
                        continue;
                    }
                    a += ci * cj * product_expansion_coeff(i, j, target, beam);
                }
            }
            let a = a * scale;
            kept += a.norm_sqr();
            coefficients.push((target, a));
        }
    }
    Ok(ProductExpansion {
        coefficients,
        truncation_order: g,
        fidelity: kept,
    })
}

/// Effective beam waist of the pump inside a cloud of transverse radius
/// R: (1/w0^2 + 1/(2 R^2))^{-1/2}.
pub fn effective_waist(w0: f64, r_t: f64) -> f64 {
    (1.0 / (w0 * w0) + 1.0 / (2.0 * r_t * r_t)).sqrt().recip()
}

/// Expands the cloud-weighted squared pump e^{-r^2/R^2} Vp^2 in LG modes
/// of the pump waist. Normalization follows the same Parseval convention
/// as [`square_pump_expansion`]; use
/// [`ProductExpansion::unit_norm_coefficients`] for the tabulated
/// unit-norm form.
pub fn cloud_modified_expansion(
    pump: &PumpSpec,
    medium: &MediumGeometry,
    g: u32,
) -> Result<ProductExpansion> {
    let radius = match *medium {
        MediumGeometry::ColdCloud { radius, .. } => radius,
        MediumGeometry::UniformCell { .. } => {
            return Err(Error::InvalidParameter(
                "cloud-modified expansion needs a ColdCloud medium".into(),
            ))
        }
    };
    medium.validate()?;
    let beam = &pump.beam;
    let weighted = |r: f64, phi: f64| {
        pump.field(r, phi) * pump.field(r, phi) * (-r * r / (radius * radius)).exp()
    };
    let mass = parseval_mass(weighted, beam);
    let scale = mass.sqrt().recip();

    let radial = position_radial_rule(beam, 128);
    let azim = Rule::azimuthal_uniform(64);
    let mut coefficients = Vec::new();
    let mut kept = 0.0;
    for m in reachable_charges(pump) {
        for n in 0..=g {
            let target = ModeIndex::new(m, n);
            let mut acc = C64::new(0.0, 0.0);
            for (&r, &wr) in radial.nodes.iter().zip(radial.weights.iter()) {
                let tgt_rad = radial_profile_position(target, beam, r);
                for (&phi, &wp) in azim.nodes.iter().zip(azim.weights.iter()) {
                    let conj_target = tgt_rad * C64::new(0.0, -(m as f64) * phi).exp();
                    acc += wr * wp * r * weighted(r, phi) * conj_target;
                }
            }
            let a = acc * scale;
            kept += a.norm_sqr();
            coefficients.push((target, a));
        }
    }
    Ok(ProductExpansion {
        coefficients,
        truncation_order: g,
        fidelity: kept,
    })
}
