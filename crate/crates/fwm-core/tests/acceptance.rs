//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `--nocapture`, or automatically on
//! failure). Tolerances are pinned in the assertions.

use fwm_core::{
    amplitudes_momentum_analytic, amplitudes_momentum_quadrature, cloud_modified_expansion,
    coincidence_amplitudes_position, cross_correlation, entanglement_entropy, g2_full_probe_map,
    g2_point_detector_map, oam_distribution, pearson_sign, pump_function_sq_map,
    purity_and_schmidt, schmidt_gaussian, spiral_bandwidth, square_pump_expansion, trace_distance,
    BeamGeometry, BiphotonAmplitudes, EntryMethod, GridSpec, MediumGeometry, ModeIndex,
    PhaseMatchKernel, PumpSpec, QuadratureConfig, Representation, Subspace, C64, GAMMA_SINC_WIDTH,
};
use rand::{Rng, SeedableRng};

const WAVELENGTH: f64 = 780e-9;

fn beam(w0: f64) -> BeamGeometry {
    BeamGeometry::new(w0, WAVELENGTH).unwrap()
}

fn report(criterion: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("acceptance {criterion}: PASS");
    } else {
        println!("acceptance {criterion}: FAIL");
        for f in failures {
            println!("  - {f}");
        }
    }
    assert!(failures.is_empty(), "{criterion}: {failures:#?}");
}

fn check(failures: &mut Vec<String>, ok: bool, msg: String) {
    if !ok {
        failures.push(msg);
    }
}

#[test]
fn criterion_1_squared_gaussian_expansion() {
    let mut failures = Vec::new();
    let pump = PumpSpec::gaussian(beam(1e-3));

    let tabulated = [0.9429, 0.3143, 0.1048, 0.0349];
    let exp = square_pump_expansion(&pump, 3).unwrap();
    for (q, &want) in tabulated.iter().enumerate() {
        let got = exp.coefficient(ModeIndex::new(0, q as u32)).unwrap().re;
        check(
            &mut failures,
            (got - want).abs() < 5e-4,
            format!("coefficient q={q}: {got:.6} vs tabulated {want}"),
        );
        let closed = (8.0f64 / 9.0).sqrt() * 3.0f64.powi(-(q as i32));
        check(
            &mut failures,
            (got - closed).abs() < 1e-8,
            format!("coefficient q={q}: {got:.12} vs closed form {closed:.12}"),
        );
    }

    let fidelities = [0.8889, 0.9876, 0.9986, 0.9999];
    for (g, &want) in fidelities.iter().enumerate() {
        let got = square_pump_expansion(&pump, g as u32).unwrap().fidelity;
        check(
            &mut failures,
            (got - want).abs() < 5e-4,
            format!("fidelity g={g}: {got:.6} vs tabulated {want}"),
        );
        let closed = 1.0 - 9.0f64.powi(-(g as i32 + 1));
        check(
            &mut failures,
            (got - closed).abs() < 1e-8,
            format!("fidelity g={g}: {got:.12} vs closed form {closed:.12}"),
        );
    }
    report("criterion 1 (squared-Gaussian expansion)", &failures);
}

#[test]
fn criterion_2_cloud_modified_expansion() {
    let mut failures = Vec::new();
    let b = beam(1e-3);
    let pump = PumpSpec::gaussian(b);
    // tabulated unit-norm coefficients per cloud-to-waist ratio
    let table: [(f64, [f64; 4]); 3] = [
        (0.5, [0.7248, 0.5177, 0.3698, 0.2642]),
        (1.0, [0.8677, 0.4339, 0.2169, 0.1085]),
        (3.0, [0.9397, 0.3215, 0.1100, 0.0376]),
    ];
    for (xi, column) in table {
        let medium = MediumGeometry::ColdCloud {
            radius: xi * b.w0,
            length: 1e-3,
        };
        let exp = cloud_modified_expansion(&pump, &medium, 3).unwrap();
        let unit = exp.unit_norm_coefficients();
        for (q, &want) in column.iter().enumerate() {
            let got = unit
                .iter()
                .find(|(i, _)| *i == ModeIndex::new(0, q as u32))
                .unwrap()
                .1
                .re;
            check(
                &mut failures,
                (got - want).abs() < 1e-3,
                format!("xi={xi} q={q}: computed {got:.4} vs tabulated {want}"),
            );
        }
    }
    report("criterion 2 (cloud-modified expansion)", &failures);
}

#[test]
fn criterion_3_spiral_bandwidth() {
    let mut failures = Vec::new();
    let b = beam(1e-3);

    // Gaussian pump, S(2,4), thin medium
    let pump = PumpSpec::gaussian(b);
    let amps = coincidence_amplitudes_position(&pump, &Subspace::new(2, 4)).unwrap();
    let dist = oam_distribution(&amps);
    let sbw = spiral_bandwidth(&dist);
    check(
        &mut failures,
        (1.5..=2.5).contains(&sbw),
        format!("Gaussian-pump SBW on S(2,4): {sbw:.4} outside [1.5, 2.5]"),
    );

    // monotone SBW and entropy over the total pumped charge, pure
    // pumps u_{l,0}, photon windows centered at the pump charge
    let mut sbws = Vec::new();
    let mut entropies = Vec::new();
    for l in 0..=3 {
        let pump = PumpSpec::pure(ModeIndex::new(l, 0), b);
        let sub = Subspace::centered(2, 4, l);
        let amps = coincidence_amplitudes_position(&pump, &sub).unwrap();
        let dist = oam_distribution(&amps);
        sbws.push(spiral_bandwidth(&dist));
        entropies.push(entanglement_entropy(&dist));
    }
    check(
        &mut failures,
        sbws.windows(2).all(|w| w[1] >= w[0] - 1e-12),
        format!("SBW not monotone over l_T = 0,2,4,6: {sbws:?}"),
    );
    check(
        &mut failures,
        entropies.windows(2).all(|w| w[1] >= w[0] - 1e-12),
        format!("entropy not monotone over l_T = 0,2,4,6: {entropies:?}"),
    );
    report("criterion 3 (spiral bandwidth)", &failures);
}

fn momentum_amps(pump: &PumpSpec, sub: &Subspace, length: f64, g: u32) -> BiphotonAmplitudes {
    let kernel = PhaseMatchKernel::new(pump.beam, MediumGeometry::UniformCell { length }).unwrap();
    let expansion = square_pump_expansion(pump, g).unwrap();
    let qcfg = QuadratureConfig {
        z_nodes: 24,
        ..QuadratureConfig::default()
    };
    amplitudes_momentum_analytic(&expansion, sub, &kernel, &qcfg).unwrap()
}

#[test]
fn criterion_4_representation_equivalence() {
    let mut failures = Vec::new();
    let b = beam(1e-3);
    let pump = PumpSpec::gaussian(b);

    // thin medium: representations coincide
    let sub = Subspace::new(2, 1);
    let pos = coincidence_amplitudes_position(&pump, &sub).unwrap();
    let mom = momentum_amps(&pump, &sub, 1e-4 * b.z_r, 8);
    let d_thin = trace_distance(&pos, &mom).unwrap();
    check(
        &mut failures,
        d_thin < 1e-3,
        format!("thin-medium distance {d_thin:.2e} >= 1e-3"),
    );

    // distance grows monotonically with the medium length
    let mut last = -1.0;
    let mut ds = Vec::new();
    for lf in [1e-3, 1e-2, 0.1, 0.5, 1.0] {
        let mom = momentum_amps(&pump, &sub, lf * b.z_r, 6);
        let d = trace_distance(&pos, &mom).unwrap();
        ds.push(d);
        check(
            &mut failures,
            d > last,
            format!("distance not monotone at L = {lf} z_R: {ds:?}"),
        );
        last = d;
    }

    // D = 0.1 contour on a 6x6 (L, w0) grid follows w0 ~ L^0.5
    let w0s: Vec<f64> = (0..6)
        .map(|i| 2e-4 * (1.13e-3f64 / 2e-4).powf(i as f64 / 5.0))
        .collect();
    let lengths: Vec<f64> = (0..6)
        .map(|i| 0.02 * (2.0f64 / 0.02).powf(i as f64 / 5.0))
        .collect();
    let mut crossings: Vec<(f64, f64)> = Vec::new(); // (ln L at D = 0.1, ln w0)
    for &w0 in &w0s {
        let bw = beam(w0);
        let pw = PumpSpec::gaussian(bw);
        let posw = coincidence_amplitudes_position(&pw, &sub).unwrap();
        let dvals: Vec<f64> = lengths
            .iter()
            .map(|&l| {
                let mom = momentum_amps(&pw, &sub, l, 6);
                trace_distance(&posw, &mom).unwrap()
            })
            .collect();
        for w in 0..dvals.len() - 1 {
            if dvals[w] <= 0.1 && dvals[w + 1] > 0.1 {
                let t = (0.1 - dvals[w]) / (dvals[w + 1] - dvals[w]);
                let ln_l = lengths[w].ln() + t * (lengths[w + 1].ln() - lengths[w].ln());
                crossings.push((ln_l, w0.ln()));
                break;
            }
        }
    }
    check(
        &mut failures,
        crossings.len() >= 4,
        format!("D = 0.1 contour crossed only {} columns", crossings.len()),
    );
    if crossings.len() >= 2 {
        let n = crossings.len() as f64;
        let mx = crossings.iter().map(|c| c.0).sum::<f64>() / n;
        let my = crossings.iter().map(|c| c.1).sum::<f64>() / n;
        let sxy: f64 = crossings.iter().map(|c| (c.0 - mx) * (c.1 - my)).sum();
        let sxx: f64 = crossings.iter().map(|c| (c.0 - mx) * (c.0 - mx)).sum();
        let slope = sxy / sxx;
        check(
            &mut failures,
            (slope - 0.5).abs() <= 0.1,
            format!("contour exponent {slope:.3} outside 0.5 +/- 0.1"),
        );
    }
    report("criterion 4 (representation equivalence)", &failures);
}

#[test]
fn criterion_5_dual_method_oracle() {
    let mut failures = Vec::new();
    let b = beam(1e-3);
    let pump = PumpSpec::gaussian(b);
    let expansion = square_pump_expansion(&pump, 4).unwrap();
    let sub = Subspace::new(1, 1);
    let qcfg = QuadratureConfig::default();
    for lf in [0.01, 0.1] {
        let kernel =
            PhaseMatchKernel::new(b, MediumGeometry::UniformCell { length: lf * b.z_r }).unwrap();
        let ana = amplitudes_momentum_analytic(&expansion, &sub, &kernel, &qcfg).unwrap();
        let quad = amplitudes_momentum_quadrature(&expansion, &sub, &kernel, &qcfg).unwrap();
        let mut worst = 0.0f64;
        for ((mp, ms, x), (_, _, y)) in ana.entries().iter().zip(quad.entries().iter()) {
            if x.norm() < 1e-9 && y.norm() < 1e-9 {
                continue;
            }
            let rel = (x - y).norm() / x.norm().max(y.norm());
            if rel > worst {
                worst = rel;
            }
            check(
                &mut failures,
                rel < 1e-3,
                format!("L = {lf} z_R entry ({mp},{ms}): relative deviation {rel:.2e}"),
            );
        }
        println!("  L = {lf} z_R: worst relative deviation {worst:.2e}");
        // every entry carries its method tag; fallback entries are
        // quadrature values by construction and so agree trivially
        let methods = ana.methods.as_ref().unwrap();
        let fallbacks = methods
            .iter()
            .filter(|&&m| m == EntryMethod::QuadratureFallback)
            .count();
        println!("  L = {lf} z_R: {fallbacks} fallback entries flagged");
        check(
            &mut failures,
            methods.len() == ana.values.len(),
            "method metadata incomplete".into(),
        );
    }
    report("criterion 5 (dual-method oracle)", &failures);
}

#[test]
fn criterion_6_pump_structure_transfer() {
    let mut failures = Vec::new();
    let b = beam(1e-3);
    let grid = GridSpec {
        half_extent: 3.0 * b.w0,
        samples: 128,
    };
    for (l, q) in [(1, 0), (1, 1), (3, 0)] {
        let pump = PumpSpec::pure(ModeIndex::new(l, q), b);
        let sub = Subspace::centered(3, 4, l);
        let amps = coincidence_amplitudes_position(&pump, &sub).unwrap();
        let map = g2_full_probe_map(&amps, 1e-4 * b.z_r, &grid).unwrap();
        let reference = pump_function_sq_map(&pump, &grid).unwrap();
        let ncc = cross_correlation(&map, &reference).unwrap();
        println!("  pump u_({l},{q}): cross-correlation {ncc:.4}");
        check(
            &mut failures,
            ncc >= 0.95,
            format!("pump u_({l},{q}): cross-correlation {ncc:.4} < 0.95"),
        );
    }
    report("criterion 6 (pump-structure transfer)", &failures);
}

#[test]
fn criterion_7_near_far_correlation_flip() {
    let mut failures = Vec::new();
    let b = beam(1e-3);
    let length = 0.05;
    let pump = PumpSpec::gaussian(b);
    let amps = coincidence_amplitudes_position(&pump, &Subspace::new(2, 4)).unwrap();
    let planes = [length / 2.0, 0.25 * b.z_r, 0.5 * b.z_r, b.z_r];
    let mut pearsons = Vec::new();
    for &z in &planes {
        let wz = b.waist_at(z);
        let grid = GridSpec {
            half_extent: 3.5 * wz,
            samples: 81,
        };
        let map = g2_point_detector_map(&amps, z, &grid).unwrap();
        pearsons.push(pearson_sign(&map).unwrap());
    }
    println!("  pearson by plane: {pearsons:?}");
    check(
        &mut failures,
        pearsons[0] > 0.0,
        format!("near-field pearson {:.3} not positive", pearsons[0]),
    );
    check(
        &mut failures,
        *pearsons.last().unwrap() < 0.0,
        format!(
            "far-field pearson {:.3} not negative",
            pearsons.last().unwrap()
        ),
    );
    check(
        &mut failures,
        pearsons.windows(2).all(|w| w[1] < w[0]),
        format!("pearson not monotone decreasing: {pearsons:?}"),
    );
    report("criterion 7 (near/far correlation flip)", &failures);
}

#[test]
fn criterion_8_schmidt_machinery() {
    let mut failures = Vec::new();
    let g2 = GAMMA_SINC_WIDTH * GAMMA_SINC_WIDTH;

    let k_min = schmidt_gaussian(2.0 / g2).unwrap();
    check(
        &mut failures,
        (k_min - 1.0).abs() < 1e-6,
        format!("K_G at the minimum: {k_min:.8}"),
    );
    // growth away from the minimum on both sides
    let probes = [1e-3, 1e-2, 0.1, 2.0 / g2, 300.0, 3000.0];
    for pair in probes.windows(2) {
        let ka = schmidt_gaussian(pair[0]).unwrap();
        let kb = schmidt_gaussian(pair[1]).unwrap();
        let expect_growth = pair[1] > 2.0 / g2;
        check(
            &mut failures,
            if expect_growth { kb >= ka } else { kb <= ka },
            format!(
                "K_G not monotone around the minimum: K({})={ka:.3} K({})={kb:.3}",
                pair[0], pair[1]
            ),
        );
    }

    // purity route vs explicit reduced-density-matrix oracle
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let sub = Subspace::new(1, 2);
    let n = sub.one_sided_count();
    for trial in 0..50 {
        let mut values: Vec<C64> = (0..n * n)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let norm: f64 = values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for v in &mut values {
            *v /= norm;
        }
        let amps = BiphotonAmplitudes {
            subspace: sub,
            beam: beam(1e-3),
            representation: Representation::Position,
            normalized: true,
            values: values.clone(),
            methods: None,
        };
        let (purity, k) = purity_and_schmidt(&amps);
        // oracle: build rho_s = A^T A* explicitly and trace its square
        let mut rho = vec![C64::new(0.0, 0.0); n * n];
        for j in 0..n {
            for j2 in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..n {
                    acc += values[i * n + j] * values[i * n + j2].conj();
                }
                rho[j * n + j2] = acc;
            }
        }
        let mut tr_rho2 = C64::new(0.0, 0.0);
        for j in 0..n {
            for j2 in 0..n {
                tr_rho2 += rho[j * n + j2] * rho[j2 * n + j];
            }
        }
        let k_oracle = 1.0 / tr_rho2.re;
        check(
            &mut failures,
            (k - k_oracle).abs() < 1e-8 * k_oracle.max(1.0),
            format!("trial {trial}: K {k:.10} vs oracle {k_oracle:.10}"),
        );
        let m = n as f64;
        check(
            &mut failures,
            (1.0 - 1e-12..=m + 1e-9).contains(&k) && purity <= 1.0 + 1e-12,
            format!("trial {trial}: K = {k} outside [1, {m}]"),
        );
    }
    report("criterion 8 (Schmidt machinery)", &failures);
}

#[test]
fn criterion_9_property_suites() {
    let mut failures = Vec::new();
    let b = beam(1e-3);

    // OAM selection rule and exchange symmetry, exact
    let pump = PumpSpec::normalized(
        vec![
            (ModeIndex::new(0, 0), C64::new(0.8, 0.0)),
            (ModeIndex::new(2, 1), C64::new(0.0, 0.6)),
        ],
        b,
    )
    .unwrap();
    let amps = coincidence_amplitudes_position(&pump, &Subspace::new(2, 2)).unwrap();
    for (mp, ms, v) in amps.entries() {
        let allowed = [0, 2, 4].contains(&(mp.ell + ms.ell));
        if !allowed {
            check(
                &mut failures,
                v == C64::new(0.0, 0.0),
                format!("selection rule violated at ({mp},{ms}): {v}"),
            );
        }
        let swapped = amps.get(ms, mp).unwrap();
        check(
            &mut failures,
            v == swapped,
            format!("exchange symmetry broken at ({mp},{ms})"),
        );
    }
    check(
        &mut failures,
        (amps.norm_sqr() - 1.0).abs() < 1e-10,
        format!("normalization off: {:.3e}", amps.norm_sqr() - 1.0),
    );

    // determinism across thread counts: bit-identical tensors
    let compute = || {
        let pos = coincidence_amplitudes_position(&pump, &Subspace::new(2, 1)).unwrap();
        let kernel = PhaseMatchKernel::new(
            b,
            MediumGeometry::UniformCell {
                length: 0.1 * b.z_r,
            },
        )
        .unwrap();
        let gaussian = PumpSpec::gaussian(b);
        let expansion = square_pump_expansion(&gaussian, 3).unwrap();
        let mom = amplitudes_momentum_analytic(
            &expansion,
            &Subspace::new(1, 1),
            &kernel,
            &QuadratureConfig::default(),
        )
        .unwrap();
        (pos, mom)
    };
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(compute);
    let multi = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(compute);
    let bits = |amps: &BiphotonAmplitudes| -> Vec<(u64, u64)> {
        amps.values
            .iter()
            .map(|v| (v.re.to_bits(), v.im.to_bits()))
            .collect()
    };
    check(
        &mut failures,
        bits(&single.0) == bits(&multi.0) && bits(&single.1) == bits(&multi.1),
        "tensors differ across thread counts".into(),
    );

    // orthonormality and Fourier consistency are covered by the module
    // unit tests at the same tolerances; re-assert the radial engine on
    // the mode norm here as a spot check
    let pos =
        coincidence_amplitudes_position(&PumpSpec::gaussian(b), &Subspace::new(2, 4)).unwrap();
    check(
        &mut failures,
        (pos.norm_sqr() - 1.0).abs() < 1e-10,
        "Gaussian-pump tensor normalization".into(),
    );
    report("criterion 9 (property suites)", &failures);
}
