//! Spatially resolved observables: the spatial mode function, the
//! coincidence-count maps for the two detection configurations, and the
//! pump-transfer diagnostics.
//!
//! The longitudinal origin z = 0 is the medium center (the common mode
//! waist plane); "medium exit" is z = L/2.

use rayon::prelude::*;

use crate::modes::{eval_lg_mode, PolarPoint};
use crate::position::BiphotonAmplitudes;
use crate::pump::PumpSpec;
use crate::{Error, Result, C64};

/// Detector arrangement for coincidence counting. Both photons are
/// detected on the same plane z, outside the medium (z >= L/2).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectionConfig {
    /// Tight pinholes on both arms, each translatable along x only.
    PointPinholesX { z: f64 },
    /// Probe integrated over its whole plane, point detector scanned
    /// over the signal plane.
    FullProbePointSignal { z: f64 },
}

impl DetectionConfig {
    pub fn plane(&self) -> f64 {
        match *self {
            DetectionConfig::PointPinholesX { z } => z,
            DetectionConfig::FullProbePointSignal { z } => z,
        }
    }

    /// Detectors must sit at or beyond the medium exit.
    pub fn validate(&self, medium_length: f64) -> Result<()> {
        if self.plane() < medium_length / 2.0 {
            return Err(Error::InvalidParameter(format!(
                "detection plane z = {} is inside the medium (exit at {})",
                self.plane(),
                medium_length / 2.0
            )));
        }
        Ok(())
    }
}

/// Uniform square grid specification for map computations.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    /// Half extent of both axes (m); the grid spans [-h, h].
    pub half_extent: f64,
    /// Samples per axis.
    pub samples: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.half_extent.is_finite() || self.half_extent <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "grid extent must be positive, got {}",
                self.half_extent
            )));
        }
        if self.samples < 2 {
            return Err(Error::InvalidParameter(
                "grid needs at least 2 samples per axis".into(),
            ));
        }
        Ok(())
    }

    pub fn axis(&self) -> Vec<f64> {
        let n = self.samples;
        let step = 2.0 * self.half_extent / (n as f64 - 1.0);
        (0..n)
            .map(|i| -self.half_extent + i as f64 * step)
            .collect()
    }
}

/// Real-valued samples on a uniform square grid.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Grid2D {
    pub spec: GridSpec,
    /// Row-major over (first axis, second axis).
    pub values: Vec<f64>,
}

impl Grid2D {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), spec.samples * spec.samples);
        Self { spec, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.samples + j]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::MIN, f64::max)
    }

    /// Rescales so the peak is one.
    pub fn normalize_peak(&mut self) {
        let m = self.max_value();
        if m > 0.0 {
            for v in &mut self.values {
                *v /= m;
            }
        }
    }

    /// CSV matrix with axis coordinates in the first row and column.
    pub fn to_csv(&self) -> String {
        let axis = self.spec.axis();
        let mut s = String::new();
        s.push_str("axis");
        for x in &axis {
            s.push_str(&format!(",{x:e}"));
        }
        s.push('\n');
        for (i, x) in axis.iter().enumerate() {
            s.push_str(&format!("{x:e}"));
            for j in 0..self.spec.samples {
                s.push_str(&format!(",{:e}", self.at(i, j)));
            }
            s.push('\n');
        }
        s
    }
}

/// Spatial mode function Psi(r_pr, r_s): the amplitude-weighted product
/// of probe and signal modes, both evaluated on their common plane.
#[allow(clippy::needless_range_loop)]
pub fn spatial_mode_function(
    amps: &BiphotonAmplitudes,
    r_pr: &PolarPoint,
    r_s: &PolarPoint,
) -> C64 {
    let beam = &amps.beam;
    let modes = amps.subspace.modes();
    let n = modes.len();
    let probe_vals: Vec<C64> = modes.iter().map(|&m| eval_lg_mode(m, beam, r_pr)).collect();
    let signal_vals: Vec<C64> = modes.iter().map(|&m| eval_lg_mode(m, beam, r_s)).collect();
    let mut acc = C64::new(0.0, 0.0);
    for ip in 0..n {
        if probe_vals[ip].norm_sqr() == 0.0 {
            continue;
        }
        let mut row = C64::new(0.0, 0.0);
        for is in 0..n {
            row += amps.values[ip * n + is] * signal_vals[is];
        }
        acc += probe_vals[ip] * row;
    }
    acc
}

/// Coincidence rate for the double-pinhole configuration:
/// |Psi|^2 with both detectors on the x axis of plane z.
pub fn g2_point_detectors(amps: &BiphotonAmplitudes, x_pr: f64, x_s: f64, z: f64) -> f64 {
    let r_pr = PolarPoint::from_cartesian(x_pr, 0.0, z);
    let r_s = PolarPoint::from_cartesian(x_s, 0.0, z);
    spatial_mode_function(amps, &r_pr, &r_s).norm_sqr()
}

/// Map of g2 over (X_pr, X_s) at plane z, normalized to unit peak.
#[allow(clippy::needless_range_loop)]
pub fn g2_point_detector_map(amps: &BiphotonAmplitudes, z: f64, grid: &GridSpec) -> Result<Grid2D> {
    grid.validate()?;
    let axis = grid.axis();
    let modes = amps.subspace.modes();
    let n = modes.len();
    let beam = &amps.beam;
    // mode values along the x axis of the plane
    let mode_vals: Vec<Vec<C64>> = modes
        .iter()
        .map(|&m| {
            axis.iter()
                .map(|&x| eval_lg_mode(m, beam, &PolarPoint::from_cartesian(x, 0.0, z)))
                .collect()
        })
        .collect();
    let values: Vec<f64> = (0..axis.len() * axis.len())
        .into_par_iter()
        .map(|flat| {
            let i = flat / axis.len();
            let j = flat % axis.len();
            let mut acc = C64::new(0.0, 0.0);
            for ip in 0..n {
                let up = mode_vals[ip][i];
                if up.norm_sqr() == 0.0 {
                    continue;
                }
                let mut row = C64::new(0.0, 0.0);
                for is in 0..n {
                    row += amps.values[ip * n + is] * mode_vals[is][j];
                }
                acc += up * row;
            }
            acc.norm_sqr()
        })
        .collect();
    let mut map = Grid2D::new(*grid, values);
    map.normalize_peak();
    Ok(map)
}

/// Coincidence map when the probe is integrated away: for each signal
/// position, the sum over probe modes of the squared amplitude-weighted
/// signal field. Normalized to unit peak.
#[allow(clippy::needless_range_loop)]
pub fn g2_full_probe_map(amps: &BiphotonAmplitudes, z: f64, grid: &GridSpec) -> Result<Grid2D> {
    grid.validate()?;
    let axis = grid.axis();
    let ng = axis.len();
    let modes = amps.subspace.modes();
    let n = modes.len();
    let beam = amps.beam;
    let values: Vec<f64> = (0..ng * ng)
        .into_par_iter()
        .map(|flat| {
            let x = axis[flat / ng];
            let y = axis[flat % ng];
            let point = PolarPoint::from_cartesian(x, y, z);
            let signal_vals: Vec<C64> = modes
                .iter()
                .map(|&m| eval_lg_mode(m, &beam, &point))
                .collect();
            let mut acc = 0.0;
            for ip in 0..n {
                let mut row = C64::new(0.0, 0.0);
                for is in 0..n {
                    row += amps.values[ip * n + is] * signal_vals[is];
                }
                acc += row.norm_sqr();
            }
            acc
        })
        .collect();
    let mut map = Grid2D::new(*grid, values);
    map.normalize_peak();
    Ok(map)
}

/// Squared pump function |Vp|^4 = |V|^2 sampled on the grid at the waist
/// plane, unit peak; the reference profile for the pump-transfer check.
pub fn pump_function_sq_map(pump: &PumpSpec, grid: &GridSpec) -> Result<Grid2D> {
    grid.validate()?;
    let axis = grid.axis();
    let ng = axis.len();
    let values: Vec<f64> = (0..ng * ng)
        .map(|flat| {
            let x = axis[flat / ng];
            let y = axis[flat % ng];
            let r = x.hypot(y);
            let phi = y.atan2(x);
            pump.field(r, phi).norm_sqr().powi(2)
        })
        .collect();
    let mut map = Grid2D::new(*grid, values);
    map.normalize_peak();
    Ok(map)
}

/// Pearson correlation of the two coordinates when the map is read as a
/// joint probability density.
pub fn pearson_sign(map: &Grid2D) -> Result<f64> {
    let axis = map.spec.axis();
    let n = axis.len();
    let total: f64 = map.values.iter().sum();
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::ZeroMassMap);
    }
    let mut mx = 0.0;
    let mut my = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = map.at(i, j) / total;
            mx += axis[i] * p;
            my += axis[j] * p;
        }
    }
    let mut vx = 0.0;
    let mut vy = 0.0;
    let mut cov = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = map.at(i, j) / total;
            vx += (axis[i] - mx).powi(2) * p;
            vy += (axis[j] - my).powi(2) * p;
            cov += (axis[i] - mx) * (axis[j] - my) * p;
        }
    }
    if vx <= 0.0 || vy <= 0.0 {
        return Err(Error::ZeroMassMap);
    }
    Ok(cov / (vx * vy).sqrt())
}

/// Zero-mean normalized cross-correlation of two maps on the same grid.
pub fn cross_correlation(a: &Grid2D, b: &Grid2D) -> Result<f64> {
    if a.spec != b.spec {
        return Err(Error::SubspaceMismatch(
            "maps live on different grids".into(),
        ));
    }
    let n = a.values.len() as f64;
    let ma: f64 = a.values.iter().sum::<f64>() / n;
    let mb: f64 = b.values.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for (&x, &y) in a.values.iter().zip(b.values.iter()) {
        num += (x - ma) * (y - mb);
        da += (x - ma) * (x - ma);
        db += (y - mb) * (y - mb);
    }
    if da <= 0.0 || db <= 0.0 {
        return Err(Error::ZeroMassMap);
    }
    Ok(num / (da * db).sqrt())
}
