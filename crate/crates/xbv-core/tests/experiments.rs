use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use xbv_core::domain_grid::{DomainSpec, Grid, GridField, DEFAULT_BOUNDARY_SAMPLES};
use xbv_core::experiments::*;
use xbv_core::{Error, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn upper_grid(h: f64) -> Arc<Grid<f64>> {
    Arc::new(Grid::build(DomainSpec::upper_half_disk(1.0, DEFAULT_BOUNDARY_SAMPLES), h).unwrap())
}

fn poly(coeffs: &[[f64; 2]]) -> SeedSpec {
    SeedSpec::Polynomial { coeffs: coeffs.to_vec() }
}

fn spec(upper: PhiSpec, lower: PhiSpec, seed: SeedSpec, h: f64) -> InstanceSpec {
    InstanceSpec { radius: 1.0, h, upper_phi: upper, lower_phi: lower, seed, lower_seed: None }
}

/// `−∂_z̄ φ / ∂_z φ` from central differences of `φ` in `x` and `y`.
fn fd_coefficient(phi: &PhiSpec, z: C64) -> C64 {
    let e = 1e-5;
    let f = |w: C64| phi.eval(w).0;
    let fx = (f(z + e) - f(z - e)) / (2.0 * e);
    let fy = (f(z + c(0.0, e)) - f(z - c(0.0, e))) / (2.0 * e);
    let dz = (fx - C64::i() * fy) * 0.5;
    let dzbar = (fx + C64::i() * fy) * 0.5;
    -dzbar / dz
}

#[test]
fn identity_instance_reproduces_the_seed() {
    let s = spec(PhiSpec::Identity, PhiSpec::Identity, poly(&[[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]), 1.0 / 64.0);
    let inst = make_two_sided_instance(&s).unwrap();
    for side in [&inst.upper, &inst.lower] {
        assert_eq!(side.sup_a, 0.0);
        assert!(side.a.values.iter().all(|a| a.norm() == 0.0));
        let grid = &side.f.grid;
        for (k, z) in grid.nodes.iter().enumerate() {
            assert!((side.f.values[k] - z * z).norm() < 1e-14);
        }
        // z² is quadratic in y, so the cubic extrapolation is exact.
        let rows = segment_rows(&side.f, 0.9, 0).unwrap();
        for (x, t) in rows.x.iter().zip(rows.trace()) {
            assert!((t - c(x * x, 0.0)).norm() < 1e-12);
        }
        assert!(side.residual < 1e-10);
    }
    assert!(inst.trace_mismatch < 1e-12);
}

#[test]
fn quadratic_coefficient_matches_finite_differences() {
    let phi = PhiSpec::Quadratic { c: 0.5 };
    let s = spec(phi, phi, SeedSpec::Exp { scale: [1.0, 0.5] }, 1.0 / 64.0);
    let inst = make_two_sided_instance(&s).unwrap();
    let grid = &inst.upper.a.grid;
    for k in (0..grid.len()).step_by(97) {
        let z = grid.nodes[k];
        let fd = fd_coefficient(&phi, z);
        assert!((inst.upper.a.values[k] - fd).norm() < 1e-8, "z={z}");
        // Closed form from the Wirtinger derivatives of −c y².
        let icy = c(0.0, 0.5 * z.im);
        assert!((inst.upper.a.values[k] - icy / (1.0 + icy)).norm() < 1e-14);
    }
    for x in [-0.9, -0.3, 0.0, 0.4, 0.95] {
        assert_eq!(phi.coefficient(c(x, 0.0)), c(0.0, 0.0));
    }
    assert!(inst.upper.sup_a < 1.0 && inst.lower.sup_a < 1.0);
    assert!(inst.upper.min_jacobian > 0.0);
}

#[test]
fn shear_coefficient_matches_finite_differences() {
    let phi = PhiSpec::Shear { c: 0.3 };
    for z in [c(0.2, 0.3), c(-0.5, 0.6), c(0.7, -0.4)] {
        assert!((phi.coefficient(z) - fd_coefficient(&phi, z)).norm() < 1e-8);
    }
}

#[test]
fn glued_instance_solves_both_sides() {
    let s = spec(PhiSpec::Quadratic { c: 0.5 }, PhiSpec::Shear { c: 0.3 }, poly(&[[1.0, 0.0], [0.0, 1.0], [0.3, 0.0]]), 1.0 / 64.0);
    let inst = make_two_sided_instance(&s).unwrap();
    let h = s.h;
    assert!(inst.upper.residual <= h && inst.lower.residual <= h);
    assert!(inst.trace_mismatch <= inst.trace_tol);
}

#[test]
fn mismatched_seeds_are_rejected() {
    let mut s = spec(PhiSpec::Identity, PhiSpec::Identity, poly(&[[0.0, 0.0], [1.0, 0.0]]), 1.0 / 64.0);
    s.lower_seed = Some(poly(&[[0.0, 0.0], [1.0, 0.0], [0.1, 0.0]]));
    let err = make_two_sided_instance(&s).unwrap_err().to_string();
    assert!(err.contains("not continuous"), "{err}");
}

#[test]
fn folding_diffeomorphism_is_rejected() {
    // x ↦ x(1 + 3y) folds the lower half-disk below y = −1/3.
    let s = spec(PhiSpec::Identity, PhiSpec::Shear { c: 3.0 }, poly(&[[0.0, 0.0], [1.0, 0.0]]), 1.0 / 32.0);
    let err = make_two_sided_instance(&s).unwrap_err().to_string();
    assert!(err.contains("not orientation-compatible"), "{err}");
}

#[test]
fn gaussian_trace_decays_super_algebraically() {
    let grid = upper_grid(1.0 / 128.0);
    let f = GridField::from_fn(&grid, |z| (-z * z).exp());
    let mut opts = DecayOptions::new(0.8, 256.0);
    opts.window.kind = WindowKind::Gaussian;
    let report = fourier_trace_decay(&f, &opts).unwrap();
    assert!(report.fit.exponent >= 6.0, "p = {}", report.fit.exponent);
    // χ f = exp(−A x²) with A = 1 + 36/r² up to the cut at e^{−36}.
    let a = 1.0 + 36.0 / (0.8 * 0.8);
    for (xi, d) in report.xi.iter().zip(&report.direct) {
        let exact = (PI / a).sqrt() * (-xi * xi / (4.0 * a)).exp();
        if exact > 1e-8 {
            assert!((d - exact).abs() <= 1e-6 * exact + 1e-12, "xi={xi}: {d} vs {exact}");
        }
    }
}

#[test]
fn windowed_abs_trace_decays_quadratically() {
    let grid = upper_grid(1.0 / 128.0);
    let f = GridField::from_fn(&grid, |z| c(z.re.abs(), 0.0));
    let report = fourier_trace_decay(&f, &DecayOptions::new(0.8, 256.0)).unwrap();
    assert!((report.fit.exponent - 2.0).abs() <= 0.3, "p = {}", report.fit.exponent);
    assert!(report.fit.reliable);
    assert!(report.direct.iter().chain(&report.envelope).all(|v| *v >= 0.0));
}

#[test]
fn lower_data_gives_the_negative_ray() {
    let grid = Arc::new(Grid::build(DomainSpec::lower_half_disk(1.0, DEFAULT_BOUNDARY_SAMPLES), 1.0 / 64.0).unwrap());
    let f = GridField::from_fn(&grid, |z| (z * 2.0).sin());
    let report = fourier_trace_decay(&f, &DecayOptions::new(0.8, 64.0)).unwrap();
    assert_eq!(report.direction, -1.0);
    assert!(report.xi.iter().all(|x| *x < 0.0));
    assert!(report.max_path_deviation_below(64.0) <= PATH_TOL);
}

#[test]
fn path_value_matches_direct_value() {
    let grid = upper_grid(1.0 / 128.0);
    let f = GridField::from_fn(&grid, |z| (z * c(0.5, 0.2)).exp() * (1.0 + z * z));
    let report = fourier_trace_decay(&f, &DecayOptions::new(0.8, 64.0)).unwrap();
    assert!(report.max_path_deviation_below(64.0) <= 1e-2, "{}", report.max_path_deviation_below(64.0));
}

#[test]
fn zero_trace_has_zero_transform() {
    let grid = upper_grid(1.0 / 64.0);
    let f = GridField::zeros(&grid, 1);
    let report = fourier_trace_decay(&f, &DecayOptions::new(0.8, 64.0)).unwrap();
    assert!(report.direct.iter().chain(&report.path).chain(&report.envelope).all(|v| *v == 0.0));
    assert!(report.fit.exponent.is_infinite() && !report.fit.reliable);
}

#[test]
fn window_beyond_segment_is_rejected() {
    let grid = upper_grid(1.0 / 32.0);
    let f = GridField::zeros(&grid, 1);
    assert!(matches!(fourier_trace_decay(&f, &DecayOptions::new(1.0, 64.0)), Err(Error::InvalidInput(_))));
}

#[test]
fn fit_recovers_power_laws() {
    let xi: Vec<f64> = DecayOptions::new(0.8, 256.0).magnitudes();
    for p in [1.0, 2.5, 4.0] {
        let amp: Vec<f64> = xi.iter().map(|x| 3.0 * (1.0 + x).powf(-p)).collect();
        let fit = fit_decay(&xi, &amp, 256.0);
        assert!((fit.exponent - p).abs() < 1e-12 && (fit.r2 - 1.0).abs() < 1e-12);
        assert_eq!((fit.lo, fit.hi), (16.0, 256.0));
    }
}

#[test]
fn oracle_transform_matches_closed_forms() {
    let window = Window::bump(0.8);
    let one = poly(&[[1.0, 0.0]]);
    // ∫ (1 − s²)^5 r ds over [−1, 1] = r · 512/693.
    assert!((oracle_transform(&one, &window, 0.0) - c(0.8 * 512.0 / 693.0, 0.0)).norm() < 1e-13);
    let mut gauss = window;
    gauss.kind = WindowKind::Gaussian;
    let a = 36.0 / 0.64;
    for xi in [1.0, 10.0, 40.0] {
        let exact = (PI / a).sqrt() * (-xi * xi / (4.0 * a)).exp();
        assert!((oracle_transform(&one, &gauss, xi).re - exact).abs() < 1e-12);
    }
}

fn circle(m: usize) -> DomainSpec<f64> {
    DomainSpec::disk(c(0.0, 0.0), 1.0, m)
}

fn eval_grid(h: f64) -> Arc<Grid<f64>> {
    Arc::new(Grid::build(DomainSpec::disk(c(0.0, 0.0), 1.25, 1024), h).unwrap())
}

fn density(dom: &DomainSpec<f64>, f: impl Fn(f64) -> f64) -> Vec<f64> {
    dom.boundary.iter().map(|b| f(b.z.arg())).collect()
}

#[test]
fn constant_density_layer_closed_form() {
    let dom = circle(1024);
    let layer = single_layer(&dom, &density(&dom, |_| 1.0), &eval_grid(1.0 / 32.0)).unwrap();
    let h = layer.field.grid.h;
    let mut checked = 0;
    for (k, z) in layer.field.grid.nodes.iter().enumerate() {
        let r = z.norm();
        if (r - 1.0).abs() < 2.0 * h {
            continue;
        }
        let exact = if r < 1.0 { 0.0 } else { 2.0 * r.ln() };
        assert!((layer.field.values[k].re - exact).abs() <= h, "z={z}");
        checked += 1;
    }
    assert!(checked > 1000);
    for z in [c(0.3, -0.2), c(0.0, 0.0), c(-0.6, 0.5)] {
        assert!(layer.eval(z).abs() < 1e-10);
    }
    for z in [c(1.2, 0.1), c(0.0, -1.2)] {
        assert!((layer.eval(z) - 2.0 * z.norm().ln()).abs() < 1e-10);
    }
}

#[test]
fn cosine_density_layer_closed_form() {
    let dom = circle(1024);
    let layer = single_layer(&dom, &density(&dom, f64::cos), &eval_grid(1.0 / 32.0)).unwrap();
    for z in [c(0.3, -0.2), c(-0.6, 0.5), c(0.0, 0.8)] {
        let (r, t) = (z.norm(), z.arg());
        assert!((layer.eval(z) + r * t.cos()).abs() < 1e-10, "z={z}");
    }
    for z in [c(1.2, 0.1), c(-0.5, -1.1), c(0.9, 0.8)] {
        let (r, t) = (z.norm(), z.arg());
        assert!((layer.eval(z) + t.cos() / r).abs() < 1e-10, "z={z}");
    }
    assert!(layer.laplacian <= 0.05);
}

#[test]
fn zero_density_layer_vanishes() {
    let dom = circle(256);
    let layer = single_layer(&dom, &vec![0.0; 256], &eval_grid(1.0 / 32.0)).unwrap();
    assert!(layer.field.values.iter().all(|v| v.norm() == 0.0));
    let jump = normal_jump_check(&layer);
    assert!(jump.skipped.is_empty());
    assert!(jump.jump.iter().all(|j| *j == 0.0));
    assert_eq!(jump.max_error, 0.0);
}

#[test]
fn density_length_mismatch_is_rejected() {
    let dom = circle(256);
    assert!(single_layer(&dom, &[1.0; 10], &eval_grid(1.0 / 16.0)).is_err());
}

#[test]
fn jumps_match_twice_the_density() {
    let dom = circle(1024);
    let grid = eval_grid(1.0 / 128.0);
    let one = normal_jump_check(&single_layer(&dom, &density(&dom, |_| 1.0), &grid).unwrap());
    assert!(one.skipped.is_empty());
    assert!(one.relative_error <= 0.05, "{}", one.relative_error);
    // The one-sided derivatives are the closed-form values 2 outside and 0 inside.
    assert!(one.exterior.iter().all(|v| (v - 2.0).abs() < 0.1));
    assert!(one.interior.iter().all(|v| v.abs() < 0.1));
    let cos = normal_jump_check(&single_layer(&dom, &density(&dom, f64::cos), &grid).unwrap());
    assert!(cos.relative_error <= 0.05, "{}", cos.relative_error);
}

#[test]
fn jump_error_converges_under_refinement() {
    let dom = circle(1024);
    let f = density(&dom, f64::cos);
    let errors: Vec<f64> = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0]
        .iter()
        .map(|&h| {
            let jump = normal_jump_check(&single_layer(&dom, &f, &eval_grid(h)).unwrap());
            assert!(jump.skipped.is_empty());
            jump.max_error
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 0.9, "errors {errors:?}");
    }
}

#[test]
fn stencils_off_the_grid_are_skipped() {
    let dom = circle(256);
    let small = Arc::new(Grid::build(DomainSpec::disk(c(0.0, 0.0), 1.05, 1024), 1.0 / 16.0).unwrap());
    let jump = normal_jump_check(&single_layer(&dom, &vec![1.0; 256], &small).unwrap());
    assert_eq!(jump.skipped.len(), 256);
    assert!(jump.jump.iter().all(|j| j.is_nan()));
}

#[test]
fn e1_runs_and_passes() {
    let mut config = ExperimentConfig::new(ExperimentKind::E1);
    config.instance.resolve = true;
    let report = run_experiment(&config).unwrap();
    assert!(report.passed(), "{:#?}", report.assertions);
    let p_up = report.summary["exponent_positive"].as_f64().unwrap();
    let p_down = report.summary["exponent_negative"].as_f64().unwrap();
    assert!(p_up >= 4.0 && p_down >= 4.0 && (p_up - p_down).abs() <= 0.5);
}

#[test]
fn e2_runs_and_contrasts_with_e1() {
    let e2 = run_experiment(&ExperimentConfig::new(ExperimentKind::E2)).unwrap();
    assert!(e2.passed(), "{:#?}", e2.assertions);
    let config = ExperimentConfig::new(ExperimentKind::E1);
    let e1 = run_experiment(&config).unwrap();
    let p1 = e1.summary["exponent_positive"].as_f64().unwrap().min(e1.summary["exponent_negative"].as_f64().unwrap());
    let p2 = e2.summary["exponent"].as_f64().unwrap();
    assert!(p1 - p2 >= 2.0, "E1 {p1} vs E2 {p2}");
}

#[test]
fn e3_sweep_finds_certificates_below_the_limit() {
    let report = run_experiment(&ExperimentConfig::new(ExperimentKind::E3)).unwrap();
    assert!(report.passed(), "{:#?}", report.assertions);
    let sweep = report.summary["sweep"].as_array().unwrap();
    assert_eq!(sweep.len(), 5);
    for row in &sweep[..4] {
        assert_eq!(row["status"], "found");
    }
    assert_ne!(sweep[4]["status"], "found");
    assert!((report.summary["limit_norm"].as_f64().unwrap() - 2.0).abs() <= 1e-6);
}

#[test]
fn e3_sweep_without_the_limit_fails() {
    let mut config = ExperimentConfig::new(ExperimentKind::E3);
    config.sweep.ts = vec![0.5, 1.0];
    let report = run_experiment(&config).unwrap();
    let cert = report.assertion("e3.certificates").unwrap();
    assert!(!cert.passed && cert.detail.contains("t = pi"), "{cert:?}");
}

#[test]
fn config_parses_with_defaults_and_writes_reports() {
    let text = r#"{"experiment": "E3", "report": {"formats": ["json", "csv"]}}"#;
    let config = ExperimentConfig::from_json(text).unwrap();
    assert_eq!(config.experiment, ExperimentKind::E3);
    assert_eq!(config.grid.h, 1.0 / 128.0);
    let full = r#"{"experiment": "E1", "grid": {"h": 0.015625},
        "instance": {"phi": {"kind": "quadratic", "c": 0.5}, "seed": {"kind": "polynomial", "coeffs": [[0, 0], [1, 0]]}},
        "decay": {"xi_max": 128, "window_r": 0.7}}"#;
    let c1 = ExperimentConfig::from_json(full).unwrap();
    assert_eq!(c1.instance.phi, PhiSpec::Quadratic { c: 0.5 });
    assert_eq!(c1.instance.lower_phi, None);
    assert_eq!(c1.decay.window, WindowKind::Bump);
    assert!(ExperimentConfig::from_json(r#"{"experiment": "E9"}"#).is_err());

    let report = run_experiment(&config).unwrap();
    let dir = std::env::temp_dir().join(format!("xbv-report-{}", std::process::id()));
    report.write(&dir, &config.report.formats).unwrap();
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["assertions"].as_array().unwrap().len(), report.assertions.len());
    let mut rdr = csv::Reader::from_path(dir.join("sweep.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().len(), 5);
    assert_eq!(rdr.records().count(), 5);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn stage_errors_carry_the_stage_name() {
    let mut config = ExperimentConfig::new(ExperimentKind::E1);
    config.instance.lower_seed = Some(poly(&[[5.0, 0.0]]));
    config.grid.h = 1.0 / 32.0;
    match run_experiment(&config) {
        Err(Error::Stage { stage, .. }) => assert_eq!(stage, "instance"),
        other => panic!("unexpected {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coefficients_vanish_on_the_segment_and_stay_below_one(c0 in -0.9f64..0.9, x in -1.0f64..1.0, y in -0.99f64..0.99) {
        prop_assert_eq!(PhiSpec::Quadratic { c: c0 }.coefficient(c(x, 0.0)).norm(), 0.0);
        for phi in [PhiSpec::Quadratic { c: c0 }, PhiSpec::Shear { c: c0 }] {
            prop_assert_eq!(phi.eval(c(x, 0.0)).0, c(x, 0.0));
            if x * x + y * y < 1.0 {
                prop_assert!(phi.coefficient(c(x, y)).norm() < 1.0);
            }
        }
    }

    #[test]
    fn decay_amplitudes_are_nonnegative(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let grid = upper_grid(1.0 / 32.0);
        let f = GridField::from_fn(&grid, |z| (z * c(a, b)).exp());
        let report = fourier_trace_decay(&f, &DecayOptions::new(0.8, 32.0)).unwrap();
        prop_assert!(report.direct.iter().chain(&report.envelope).chain(&report.path).all(|v| *v >= 0.0 && v.is_finite()));
    }

    #[test]
    fn layer_is_linear_in_the_density(s in -2.0f64..2.0, t in -2.0f64..2.0, x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let dom = circle(128);
        let grid = eval_grid(1.0 / 8.0);
        let f1 = density(&dom, f64::cos);
        let f2 = density(&dom, |th| th.abs());
        let mix: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| s * a + t * b).collect();
        let z = c(x, y);
        let (l1, l2, lm) = (
            single_layer(&dom, &f1, &grid).unwrap(),
            single_layer(&dom, &f2, &grid).unwrap(),
            single_layer(&dom, &mix, &grid).unwrap(),
        );
        let expect = s * l1.eval(z) + t * l2.eval(z);
        prop_assert!((lm.eval(z) - expect).abs() <= 1e-10 * (1.0 + expect.abs()));
    }
}
