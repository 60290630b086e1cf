mod common;

use std::sync::Arc;

use common::{c, loglog_slope, C};
use proptest::prelude::*;
use xbv_core::beltrami::*;
use xbv_core::cauchy_green::{op_t_nodes, CauchyGreen, KernelConfig};
use xbv_core::domain_grid::*;
use xbv_core::Error;

fn disk(h: f64) -> Arc<Grid<f64>> {
    Arc::new(Grid::build(DomainSpec::unit_disk(), h).unwrap())
}

fn scalar(g: &Arc<Grid<f64>>, f: impl Fn(C) -> C) -> BeltramiCoefficient<f64> {
    BeltramiCoefficient::scalar(GridField::from_fn(g, f), 0.5).unwrap()
}

fn opts() -> NeumannOptions<f64> {
    NeumannOptions::default()
}

#[test]
fn zero_coefficient_returns_data_after_one_term() {
    let g = disk(1.0 / 16.0);
    let a = scalar(&g, |_| c(0.0, 0.0));
    let data = GridField::from_fn(&g, |z| z.exp());
    for which in [Derivative::Dz, Derivative::ConjDz] {
        let (f, r) = neumann_invert(&a, &data, which, &opts()).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.ratios.is_empty());
        assert_eq!(f.values, data.values);
    }
}

#[test]
fn constant_coefficient_gives_minus_b_conj_z() {
    let g = disk(1.0 / 32.0);
    let a = scalar(&g, |_| c(0.1, 0.0));
    let bv = c(0.7, -0.3);
    let b = GridField::from_fn(&g, |_| bv);
    let (f, r) = solve_linear_beltrami(&a, &b, &opts()).unwrap();
    let err = (0..g.len()).map(|k| (f.at(k, 0) + bv * g.nodes[k].conj()).norm()).fold(0.0, f64::max);
    assert!(err <= g.h * bv.norm(), "error {err}");
    assert!(r.pde_residual <= g.h && r.cauchy_residual <= g.h, "{r:?}");
    assert!(r.contracting());
}

#[test]
fn neumann_inversion_agrees_with_linear_solve() {
    let g = disk(1.0 / 32.0);
    let a = scalar(&g, |z| z * 0.03 + c(0.05, 0.02));
    let b = GridField::from_fn(&g, |z| (z * 0.5).exp());
    let (f_solve, _) = solve_linear_beltrami(&a, &b, &opts()).unwrap();
    let minus_tb = op_t_nodes(&b).unwrap().map(|v| -v);
    let (f_inv, rep) = neumann_invert(&a, &minus_tb, Derivative::Dz, &opts()).unwrap();
    assert!(rep.iterations > 1);
    let core = core_nodes(&g);
    let diff = core.iter().map(|&k| (f_solve.at(k, 0) - f_inv.at(k, 0)).norm()).fold(0.0, f64::max);
    assert!(diff < 1e-3, "{diff}");
}

#[test]
fn zero_data_gives_zero_solution() {
    let g = disk(1.0 / 16.0);
    let a = scalar(&g, |z| z * 0.05);
    let (f, r) = solve_linear_beltrami(&a, &GridField::zeros(&g, 1), &opts()).unwrap();
    assert_eq!(f.sup_norm(), 0.0);
    assert_eq!(r.iterations, 1);
}

#[test]
fn zero_coefficient_solution_is_minus_tb() {
    let g = disk(1.0 / 16.0);
    let a = scalar(&g, |_| c(0.0, 0.0));
    let b = GridField::from_fn(&g, |z| z * z.conj() + c(0.0, 1.0));
    let (f, r) = solve_linear_beltrami(&a, &b, &opts()).unwrap();
    let tb = op_t_nodes(&b).unwrap();
    assert_eq!(r.iterations, 1);
    for k in 0..g.len() {
        assert!((f.at(k, 0) + tb.at(k, 0)).norm() < 1e-14);
    }
}

#[test]
fn rough_coefficient_diverges() {
    // A strongly oscillating coefficient of sup norm 0.9 has a Hölder norm
    // far above the contraction range, and the series stops contracting.
    let g = disk(1.0 / 32.0);
    let a = scalar(&g, |z| C::from_polar(0.9, 30.0 * z.re));
    assert!(a.holder_norm > 1.0);
    let b = GridField::from_fn(&g, |z| (z * 0.5).exp());
    match solve_linear_beltrami(&a, &b, &opts()) {
        Err(Error::Divergence { ratios, .. }) => {
            assert!(ratios.iter().rev().take(DIVERGENCE_RUN).all(|&r| r >= 1.0));
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn coefficient_validation() {
    let g = disk(0.125);
    assert!(BeltramiCoefficient::scalar(GridField::from_fn(&g, |_| c(1.0, 0.0)), 0.5).is_err());
    assert!(BeltramiCoefficient::matrix(GridField::zeros(&g, 3), 2, 0.5).is_err());
    let m = [c(0.3, 0.0), c(0.4, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    assert!((matrix_norm(&m, 2) - 0.5).abs() < 1e-12);
    let rot = [c(0.0, 0.0), c(-0.8, 0.0), c(0.8, 0.0), c(0.0, 0.0)];
    assert!((matrix_norm(&rot, 2) - 0.8).abs() < 1e-12);
    let a = scalar(&g, |z| z * 0.1);
    assert!(!a.scaled(5.0).unwrap().holder_norm.is_nan());
    assert!(a.scaled(20.0).is_err());
}

#[test]
fn verify_equivalence_distinguishes_the_cauchy_condition() {
    let g = disk(1.0 / 32.0);
    let a = scalar(&g, |_| c(0.0, 0.0));
    let zero = GridField::zeros(&g, 1);
    let id = GridField::from_fn(&g, |z| z);
    let (pde, cauchy) = verify_equivalence(&id, &a, &zero).unwrap();
    assert!(pde < 1e-12);
    assert!((cauchy - PROBE_RADIUS).abs() < 1e-2, "{cauchy}");
    let conj = GridField::from_fn(&g, |z| z.conj());
    let (_, cauchy) = verify_equivalence(&conj, &a, &zero).unwrap();
    assert!(cauchy < 1e-2, "{cauchy}");
}

#[test]
fn residuals_decrease_under_refinement() {
    let mut pde = Vec::new();
    let mut cauchy = Vec::new();
    for &h in &[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
        let g = disk(h);
        let a = scalar(&g, |z| z * 0.03 + c(0.01, 0.0));
        let b = GridField::from_fn(&g, |z| (z * 0.5).exp());
        let (_, r) = solve_linear_beltrami(&a, &b, &opts()).unwrap();
        pde.push(r.pde_residual);
        cauchy.push(r.cauchy_residual);
    }
    for w in pde.windows(2).chain(cauchy.windows(2)) {
        assert!(w[1] <= 0.6 * w[0], "pde {pde:?} cauchy {cauchy:?}");
    }
}

#[test]
fn contraction_ratio_scales_with_coefficient() {
    let g = disk(1.0 / 16.0);
    let base = scalar(&g, |z| C::from_polar(0.6, 3.0 * z.re));
    let b = GridField::from_fn(&g, |z| z.exp());
    let scales = [0.25, 0.5, 1.0];
    let ratios: Vec<f64> = scales
        .iter()
        .map(|&s| {
            let (_, r) = solve_linear_beltrami(&base.scaled(s).unwrap(), &b, &opts()).unwrap();
            r.ratios[0]
        })
        .collect();
    let slope = loglog_slope(&scales, &ratios);
    assert!((slope - 1.0).abs() <= 0.3, "slope {slope} ratios {ratios:?}");
}

#[test]
fn matrix_mode_decouples_diagonal_coefficients() {
    let g = disk(1.0 / 16.0);
    let a1 = |z: C| z * 0.04;
    let a2 = |z: C| c(0.02, 0.01) + z.conj() * 0.02;
    let mat = GridField::from_fn_vec(&g, 4, |z, out| {
        out[0] = a1(z);
        out[1] = c(0.0, 0.0);
        out[2] = c(0.0, 0.0);
        out[3] = a2(z);
    });
    let am = BeltramiCoefficient::matrix(mat, 2, 0.5).unwrap();
    let b1 = |z: C| z.exp();
    let b2 = |z: C| z * z.conj();
    let b = GridField::from_fn_vec(&g, 2, |z, out| {
        out[0] = b1(z);
        out[1] = b2(z);
    });
    let (f, _) = solve_linear_beltrami(&am, &b, &opts()).unwrap();
    let (f1, _) = solve_linear_beltrami(&scalar(&g, a1), &GridField::from_fn(&g, b1), &opts()).unwrap();
    let (f2, _) = solve_linear_beltrami(&scalar(&g, a2), &GridField::from_fn(&g, b2), &opts()).unwrap();
    for k in 0..g.len() {
        assert!((f.at(k, 0) - f1.at(k, 0)).norm() < 1e-8);
        assert!((f.at(k, 1) - f2.at(k, 0)).norm() < 1e-8);
    }
}

#[test]
fn conjugate_derivative_variant_solves_its_equation() {
    let g = disk(1.0 / 32.0);
    let a = scalar(&g, |z| z * 0.05 + c(0.0, 0.03));
    let data = GridField::from_fn(&g, |z| (z * c(0.5, 0.5)).exp());
    let (f, r) = neumann_invert(&a, &data, Derivative::ConjDz, &opts()).unwrap();
    assert!(r.iterations > 1);
    let dz = wirtinger(&f).dz;
    let x = GridField::from_fn(&g, |_| c(0.0, 0.0)).zip(&dz, |_, d| d.conj());
    let ax = a.a.zip(&x, |p, q| p * q);
    let tax = CauchyGreen::new(&g, KernelConfig::default()).unwrap().t_nodes(&ax);
    let core = core_nodes(&g);
    let res = core.iter().map(|&k| (f.at(k, 0) + tax.at(k, 0) - data.at(k, 0)).norm()).fold(0.0, f64::max);
    assert!(res < 1e-3, "{res}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn linear_solve_is_linear(p in -1.0f64..1.0, q in -1.0f64..1.0) {
        let g = disk(0.125);
        let a = scalar(&g, |z| z * 0.04);
        let b1 = GridField::from_fn(&g, |z| z.exp() * p);
        let b2 = GridField::from_fn(&g, |z| z.conj() * c(0.0, q));
        let sum = b1.zip(&b2, |x, y| x + y);
        let (f1, _) = solve_linear_beltrami(&a, &b1, &opts()).unwrap();
        let (f2, _) = solve_linear_beltrami(&a, &b2, &opts()).unwrap();
        let (fs, _) = solve_linear_beltrami(&a, &sum, &opts()).unwrap();
        for k in 0..g.len() {
            prop_assert!((fs.at(k, 0) - f1.at(k, 0) - f2.at(k, 0)).norm() < 1e-8);
        }
    }
}

#[test]
fn transform_check_examples() {
    let g = disk(0.05);
    let zero = GridField::zeros(&g, 1);
    let id = GridField::from_fn(&g, |z| z);
    assert!(transform_check(&id, &zero).unwrap() < 1e-12);
    let cc = c(0.3, -0.2);
    let lin = GridField::from_fn(&g, |z| z - cc * z.conj());
    let a = GridField::from_fn(&g, |_| cc);
    assert!(transform_check(&lin, &a).unwrap() < 1e-12);
    let a3 = GridField::from_fn(&g, |_| c(0.3, 0.0));
    assert!((transform_check(&id, &a3).unwrap() - 0.3).abs() < 1e-12);
    let flip = GridField::from_fn(&g, |z| z.conj());
    assert!(matches!(transform_check(&flip, &zero), Err(Error::NotDiffeomorphism { .. })));
}

#[test]
fn cutoff_is_c3_and_supported_in_the_unit_disk() {
    assert_eq!(cutoff(0.3), 1.0);
    assert_eq!(cutoff(0.5), 1.0);
    assert_eq!(cutoff(1.0), 0.0);
    assert_eq!(cutoff(1.3), 0.0);
    let d = 1e-4;
    for &r in &[0.5, 1.0] {
        // One-sided third differences vanish to leading order at both junctions.
        for side in [-1.0, 1.0] {
            let f = |k: f64| cutoff(r + side * k * d);
            let d1 = (f(1.0) - f(0.0)) / d;
            let d2 = (f(2.0) - 2.0 * f(1.0) + f(0.0)) / (d * d);
            assert!(d1.abs() < 1e-6 && d2.abs() < 1e-2, "r={r} d1={d1} d2={d2}");
        }
    }
    for k in 0..100 {
        let r = 0.5 + 0.005 * k as f64;
        assert!(cutoff(r) >= cutoff(r + 0.005));
    }
}

#[test]
fn isothermal_trivial_and_constant_cases() {
    let g = disk(1.0 / 16.0);
    let o = IsothermalOptions { h: 1.0 / 16.0, ..IsothermalOptions::default() };
    let (phi, r) = isothermal(&scalar(&g, |_| c(0.0, 0.0)), c(0.0, 0.0), &o).unwrap();
    assert!((0..phi.grid.len()).all(|k| (phi.at(k, 0) - phi.grid.nodes[k]).norm() < 1e-15));
    assert!(r.residual < 1e-12);
    let cc = c(0.3, 0.2);
    let (phi, r) = isothermal(&scalar(&g, |_| cc), c(0.1, -0.1), &o).unwrap();
    for k in 0..phi.grid.len() {
        let z = phi.grid.nodes[k];
        assert!((phi.at(k, 0) - (z - cc * z.conj())).norm() < 1e-14);
    }
    assert!(r.residual < 1e-12, "{}", r.residual);
    assert_eq!(r.solve.iterations, 1);
}

#[test]
fn isothermal_variable_coefficient() {
    let d = DomainSpec::disk(c(0.0, 0.0), 0.25, 1024);
    let ga = Arc::new(Grid::build(d, 1.0 / 128.0).unwrap());
    let a = scalar(&ga, |z| z * 0.2);
    let o = IsothermalOptions { h: 1.0 / 32.0, ..IsothermalOptions::default() };
    let (phi, r) = isothermal(&a, c(0.0, 0.0), &o).unwrap();
    assert!(r.residual <= 1e-2, "{}", r.residual);
    assert!(r.min_jacobian > 0.0);
    assert!(r.b_norm < DEFAULT_THRESHOLD);
    assert!(r.solve.contracting());
    assert!(phi.is_finite());
}

#[test]
fn isothermal_rejects_rough_coefficients() {
    let g = disk(1.0 / 16.0);
    let a = scalar(&g, |z| c(0.5 * z.re.signum(), 0.0));
    let o = IsothermalOptions { h: 1.0 / 16.0, ..IsothermalOptions::default() };
    assert!(matches!(isothermal(&a, c(0.0, 0.0), &o), Err(Error::DilationFailed { .. })));
    assert!(isothermal(&a, c(2.0, 0.0), &o).is_err());
}
