//! Implementations of the CLI subcommands. Each computes its results
//! fully before writing any file, so a failing run leaves no partial
//! outputs.

use fwm_core::{
    amplitudes_momentum_analytic, amplitudes_momentum_quadrature, cloud_modified_expansion,
    coincidence_amplitudes_position, cross_correlation, entanglement_entropy, eval_lg_mode,
    g2_full_probe_map, g2_point_detector_map, oam_distribution, pearson_sign, pump_function_sq_map,
    purity_and_schmidt, schmidt_gaussian, spiral_bandwidth, square_pump_expansion, trace_distance,
    BiphotonAmplitudes, DetectionConfig, MediumGeometry, ModeIndex, PolarPoint, ProductExpansion,
    PumpSpec, Representation,
};
use serde_json::json;

use crate::config::{ConfigError, ExperimentConfig};
use crate::output::OutputDir;

pub enum CommandError {
    Config(String),
    Convergence(String),
    Io(String),
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e.0)
    }
}

impl From<std::io::Error> for CommandError {
    fn from(e: std::io::Error) -> Self {
        CommandError::Io(e.to_string())
    }
}

impl From<fwm_core::Error> for CommandError {
    fn from(e: fwm_core::Error) -> Self {
        match e {
            fwm_core::Error::NotConverged(msg) => CommandError::Convergence(msg),
            other => CommandError::Config(other.to_string()),
        }
    }
}

pub type CommandResult = Result<Vec<std::path::PathBuf>, CommandError>;

fn push_opt(files: &mut Vec<std::path::PathBuf>, path: Option<std::path::PathBuf>) {
    if let Some(p) = path {
        files.push(p);
    }
}

/// Squared-pump expansion appropriate to the configured medium.
fn expansion_for(
    cfg: &ExperimentConfig,
    pump: &PumpSpec,
) -> Result<ProductExpansion, CommandError> {
    let medium = cfg.medium_geometry();
    let g = cfg.expansion.truncation;
    match medium {
        MediumGeometry::ColdCloud { .. } => Ok(cloud_modified_expansion(pump, &medium, g)?),
        MediumGeometry::UniformCell { .. } => Ok(square_pump_expansion(pump, g)?),
    }
}

fn amplitudes_for(
    cfg: &ExperimentConfig,
    rep: Representation,
    momentum_by_quadrature: bool,
) -> Result<BiphotonAmplitudes, CommandError> {
    let pump = cfg.pump_spec()?;
    let subspace = cfg.subspace_obj();
    match rep {
        Representation::Position => Ok(coincidence_amplitudes_position(&pump, &subspace)?),
        Representation::Momentum => {
            let expansion = expansion_for(cfg, &pump)?;
            let kernel = cfg.kernel()?;
            let qcfg = cfg.quadrature_config();
            if momentum_by_quadrature {
                Ok(amplitudes_momentum_quadrature(
                    &expansion, &subspace, &kernel, &qcfg,
                )?)
            } else {
                Ok(amplitudes_momentum_analytic(
                    &expansion, &subspace, &kernel, &qcfg,
                )?)
            }
        }
    }
}

fn amplitudes_json(amps: &BiphotonAmplitudes) -> serde_json::Value {
    let entries: Vec<serde_json::Value> = amps
        .entries()
        .iter()
        .map(|(mp, ms, v)| {
            json!({
                "ell_pr": mp.ell, "p_pr": mp.p,
                "ell_s": ms.ell, "p_s": ms.p,
                "re": v.re, "im": v.im,
            })
        })
        .collect();
    let methods: Option<Vec<&str>> = amps
        .methods
        .as_ref()
        .map(|ms| ms.iter().map(|m| m.as_str()).collect());
    json!({
        "subspace": amps.subspace,
        "representation": amps.representation,
        "normalized": amps.normalized,
        "entries": entries,
        "methods": methods,
    })
}

/// `fwm modes`: sample one LG mode on the configured grid.
pub fn run_modes(
    cfg: &ExperimentConfig,
    out: &OutputDir,
    ell: i32,
    p: u32,
    z: f64,
) -> CommandResult {
    let beam = cfg.beam()?;
    let grid = cfg.grid_spec();
    grid.validate()?;
    let axis = grid.axis();
    let idx = ModeIndex::new(ell, p);
    let mut body = String::from("x,y,re,im\n");
    for &x in &axis {
        for &y in &axis {
            let u = eval_lg_mode(idx, &beam, &PolarPoint::from_cartesian(x, y, z));
            body.push_str(&format!("{x:e},{y:e},{:e},{:e}\n", u.re, u.im));
        }
    }
    let mut files = Vec::new();
    push_opt(
        &mut files,
        out.write_csv(&format!("mode_{ell}_{p}.csv"), cfg, &body)?,
    );
    Ok(files)
}

/// `fwm pump-expand`: squared-pump expansion (cloud-modified when the
/// medium is a cloud), CSV and JSON.
pub fn run_pump_expand(cfg: &ExperimentConfig, out: &OutputDir) -> CommandResult {
    let pump = cfg.pump_spec()?;
    let expansion = expansion_for(cfg, &pump)?;
    let mut body = String::from("m,n,re,im,abs2\n");
    for (idx, a) in &expansion.coefficients {
        body.push_str(&format!(
            "{},{},{:e},{:e},{:e}\n",
            idx.ell,
            idx.p,
            a.re,
            a.im,
            a.norm_sqr()
        ));
    }
    let mut files = Vec::new();
    push_opt(&mut files, out.write_csv("expansion.csv", cfg, &body)?);
    let unit: Vec<serde_json::Value> = expansion
        .unit_norm_coefficients()
        .iter()
        .map(|(idx, a)| json!({"m": idx.ell, "n": idx.p, "re": a.re, "im": a.im}))
        .collect();
    push_opt(
        &mut files,
        out.write_json_paired(
            "expansion.json",
            cfg,
            json!({
                "truncation_order": expansion.truncation_order,
                "fidelity": expansion.fidelity,
                "coefficients": expansion.coefficients.iter().map(|(idx, a)| json!({
                    "m": idx.ell, "n": idx.p, "re": a.re, "im": a.im,
                })).collect::<Vec<_>>(),
                "unit_norm_coefficients": unit,
            }),
        )?,
    );
    Ok(files)
}

/// `fwm amplitudes`: coincidence-amplitude tensor in the chosen
/// representation.
pub fn run_amplitudes(
    cfg: &ExperimentConfig,
    out: &OutputDir,
    rep: Representation,
    momentum_by_quadrature: bool,
) -> CommandResult {
    let amps = amplitudes_for(cfg, rep, momentum_by_quadrature)?;
    let name = match rep {
        Representation::Position => "amplitudes_position",
        Representation::Momentum => "amplitudes_momentum",
    };
    let mut files = Vec::new();
    push_opt(
        &mut files,
        out.write_csv(&format!("{name}.csv"), cfg, &amps.to_csv())?,
    );
    push_opt(
        &mut files,
        out.write_json_paired(&format!("{name}.json"), cfg, amplitudes_json(&amps))?,
    );
    Ok(files)
}

/// `fwm entanglement`: OAM distribution metrics plus purity, Schmidt
/// number and the Gaussian estimate.
pub fn run_entanglement(
    cfg: &ExperimentConfig,
    out: &OutputDir,
    rep: Representation,
) -> CommandResult {
    let amps = amplitudes_for(cfg, rep, false)?;
    let report = entanglement_report(cfg, &amps)?;
    let path = out.write_json("entanglement.json", cfg, report)?;
    Ok(vec![path])
}

fn entanglement_report(
    cfg: &ExperimentConfig,
    amps: &BiphotonAmplitudes,
) -> Result<serde_json::Value, CommandError> {
    let pump = cfg.pump_spec()?;
    let beam = cfg.beam()?;
    let dist = oam_distribution(amps);
    let sbw = spiral_bandwidth(&dist);
    let entropy = entanglement_entropy(&dist);
    let (purity, k) = purity_and_schmidt(amps);
    let zeta = cfg.medium.length / beam.z_r;
    let k_gauss = schmidt_gaussian(zeta)?;
    Ok(json!({
        "subspace": amps.subspace,
        "representation": amps.representation,
        "l_total": pump.total_oam(),
        "sbw": sbw,
        "entropy_bits": entropy,
        "purity": purity,
        "schmidt_k": k,
        "zeta": zeta,
        "schmidt_k_gaussian": k_gauss,
    }))
}

/// `fwm g2`: coincidence maps for the configured detection scheme.
pub fn run_g2(cfg: &ExperimentConfig, out: &OutputDir, rep: Representation) -> CommandResult {
    let detection = cfg.detection_config();
    detection.validate(cfg.medium.length)?;
    let amps = amplitudes_for(cfg, rep, false)?;
    let grid = cfg.grid_spec();
    let mut written = Vec::new();
    let mut summary = Vec::new();
    match detection {
        DetectionConfig::PointPinholesX { .. } => {
            for (i, &z) in cfg.g2_planes().iter().enumerate() {
                let map = g2_point_detector_map(&amps, z, &grid)?;
                let pearson = pearson_sign(&map)?;
                summary.push(json!({"plane": z, "pearson": pearson}));
                push_opt(
                    &mut written,
                    out.write_csv(&format!("g2_map_{i}.csv"), cfg, &map.to_csv())?,
                );
            }
        }
        DetectionConfig::FullProbePointSignal { z } => {
            let map = g2_full_probe_map(&amps, z, &grid)?;
            let reference = pump_function_sq_map(&cfg.pump_spec()?, &grid)?;
            let ncc = cross_correlation(&map, &reference)?;
            summary.push(json!({"plane": z, "pump_transfer_ncc": ncc}));
            push_opt(
                &mut written,
                out.write_csv("g2_map_0.csv", cfg, &map.to_csv())?,
            );
            if cfg.output.reference_map {
                push_opt(
                    &mut written,
                    out.write_csv("pump_reference.csv", cfg, &reference.to_csv())?,
                );
            }
        }
    }
    written.push(out.write_json(
        "g2_summary.json",
        cfg,
        json!({
            "grid": { "half_extent": grid.half_extent, "samples": grid.samples },
            "planes": summary,
        }),
    )?);
    Ok(written)
}

/// `fwm distance`: position and momentum tensors plus their distance.
pub fn run_distance(cfg: &ExperimentConfig, out: &OutputDir) -> CommandResult {
    let pos = amplitudes_for(cfg, Representation::Position, false)?;
    let mom = amplitudes_for(cfg, Representation::Momentum, false)?;
    let d = trace_distance(&pos, &mom)?;
    let mut written = Vec::new();
    push_opt(
        &mut written,
        out.write_csv("amplitudes_position.csv", cfg, &pos.to_csv())?,
    );
    push_opt(
        &mut written,
        out.write_csv("amplitudes_momentum.csv", cfg, &mom.to_csv())?,
    );
    written.push(out.write_json(
        "distance.json",
        cfg,
        json!({
            "distance": d,
            "subspace": pos.subspace,
            "zeta": cfg.medium.length / cfg.beam()?.z_r,
        }),
    )?);
    Ok(written)
}

/// `fwm sweep`: one parameter axis, entanglement or distance metrics
/// per point.
pub fn run_sweep(cfg: &ExperimentConfig, out: &OutputDir, rep: Representation) -> CommandResult {
    let sweep = &cfg.sweep;
    let values: Vec<f64> = if sweep.steps == 1 {
        vec![sweep.start]
    } else if sweep.log {
        let (a, b) = (sweep.start.ln(), sweep.stop.ln());
        (0..sweep.steps)
            .map(|i| (a + (b - a) * i as f64 / (sweep.steps - 1) as f64).exp())
            .collect()
    } else {
        (0..sweep.steps)
            .map(|i| sweep.start + (sweep.stop - sweep.start) * i as f64 / (sweep.steps - 1) as f64)
            .collect()
    };

    let mut rows: Vec<(f64, serde_json::Value)> = Vec::new();
    for &v in &values {
        let point = apply_parameter(cfg, &sweep.parameter, v)?;
        match sweep.report.as_str() {
            "distance" => {
                let pos = amplitudes_for(&point, Representation::Position, false)?;
                let mom = amplitudes_for(&point, Representation::Momentum, false)?;
                let d = trace_distance(&pos, &mom)?;
                rows.push((v, json!({ "distance": d })));
            }
            _ => {
                let amps = amplitudes_for(&point, rep, false)?;
                rows.push((v, entanglement_report(&point, &amps)?));
            }
        }
    }

    let mut body = String::new();
    match sweep.report.as_str() {
        "distance" => {
            body.push_str("parameter,distance\n");
            for (v, row) in &rows {
                body.push_str(&format!("{v:e},{:e}\n", row["distance"].as_f64().unwrap()));
            }
        }
        _ => {
            body.push_str("parameter,sbw,entropy_bits,purity,schmidt_k,schmidt_k_gaussian\n");
            for (v, row) in &rows {
                body.push_str(&format!(
                    "{v:e},{:e},{:e},{:e},{:e},{:e}\n",
                    row["sbw"].as_f64().unwrap(),
                    row["entropy_bits"].as_f64().unwrap(),
                    row["purity"].as_f64().unwrap(),
                    row["schmidt_k"].as_f64().unwrap(),
                    row["schmidt_k_gaussian"].as_f64().unwrap(),
                ));
            }
        }
    }
    let mut files = Vec::new();
    push_opt(&mut files, out.write_csv("sweep.csv", cfg, &body)?);
    push_opt(
        &mut files,
        out.write_json_paired(
            "sweep.json",
            cfg,
            json!({
                "parameter": sweep.parameter,
                "rows": rows.iter().map(|(v, r)| json!({"value": v, "metrics": r})).collect::<Vec<_>>(),
            }),
        )?,
    );
    Ok(files)
}

/// A copy of the config with one swept parameter applied.
fn apply_parameter(
    cfg: &ExperimentConfig,
    name: &str,
    value: f64,
) -> Result<ExperimentConfig, CommandError> {
    let mut point = cfg.clone();
    match name {
        "medium_length" => point.medium.length = value,
        "waist" => point.pump.waist = value,
        "cloud_xi" => {
            point.medium.kind = "cloud".into();
            point.medium.radius = Some(value * point.pump.waist);
        }
        "pump_charge" => {
            let l = value.round() as i32;
            point.pump.modes = vec![crate::config::PumpModeEntry {
                ell: l,
                q: 0,
                re: 1.0,
                im: 0.0,
            }];
            // keep the conserving pairs inside the truncation
            point.subspace.center = l;
        }
        other => return Err(CommandError::Config(format!("unknown parameter '{other}'"))),
    }
    point.validate()?;
    Ok(point)
}
