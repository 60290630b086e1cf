use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use xbv_core::domain_grid::{wirtinger, GridField};
use xbv_core::jcurve::{
    approx_jet, attach_half_disc, jholo_residual, picard_disc, picard_family, CurveSamples,
    HalfDiscOptions, JetOptions, PicardOptions, StructureField, StructureSpec,
};
use xbv_core::structures::{example_family, j_standard, CMat, CVec, RMat};
use xbv_core::whitney::uniform_axis;
use xbv_core::{Error, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn opts(h: f64) -> PicardOptions {
    PicardOptions { h, ..PicardOptions::default() }
}

/// `A(z) = 0.1 z₁ E₁₂`.
fn linear_example() -> StructureField {
    let mut e12 = CMat::zeros(2, 2);
    e12[(0, 1)] = c(0.1, 0.0);
    StructureField::affine(CMat::zeros(2, 2), vec![e12, CMat::zeros(2, 2)], 2.0).unwrap()
}

/// Closed-form fixed point for [`linear_example`]: `u₁ = t/2 + ζ ē₁`,
/// `u₂ = ζ ē₂ + 0.1 e₁ (t ζ̄/2 + ē₁ |ζ|²)`.
fn linear_oracle(e: &[C64], t: C64, z: C64) -> [C64; 2] {
    let u1 = t * 0.5 + z * e[0].conj();
    let u2 = z * e[1].conj() + e[0] * 0.1 * (t * 0.5 * z.conj() + e[0].conj() * z.norm_sqr());
    [u1, u2]
}

fn max_error(disc: &xbv_core::jcurve::DiscMap, f: impl Fn(C64) -> Vec<C64>) -> f64 {
    let g = &disc.grid;
    let mut worst: f64 = 0.0;
    for k in 0..g.len() {
        let exact = f(g.nodes[k]);
        for (ci, v) in exact.iter().enumerate() {
            worst = worst.max((disc.u.at(k, ci) - v).norm());
        }
    }
    worst
}

#[test]
fn zero_coefficient_is_a_fixed_point_after_one_step() {
    let field = StructureField::normalized(2, 2.0, |_| CMat::zeros(2, 2)).unwrap();
    let e = [c(0.2, 0.0), c(0.0, 0.1)];
    let t = [c(0.3, -0.1)];
    let (disc, report) = picard_disc(&field, &e, &t, &opts(1.0 / 32.0)).unwrap();
    assert_eq!(report.iterations, 1);
    assert_eq!(report.changes[0], 0.0);
    let err = max_error(&disc, |z| vec![t[0] * 0.5 + z * e[0].conj(), z * e[1].conj()]);
    assert!(err < 1e-14, "error {err}");
    assert!(report.residual.sup < 1e-13 && report.residual.sup_all < 1e-13);
    assert!(disc.embedded);
}

#[test]
fn constant_coefficient_matches_closed_form() {
    let a = DMatrix::from_row_slice(2, 2, &[c(0.05, 0.02), c(0.0, 0.1), c(-0.02, 0.0), c(0.08, -0.03)]);
    let field = StructureField::affine(a.clone(), Vec::new(), 2.0).unwrap();
    let e = [c(0.25, 0.0), c(0.1, 0.1)];
    let t = [c(0.2, 0.2)];
    let ate = a.transpose() * CVec::from_column_slice(&e);
    let mut errs = Vec::new();
    for h in [1.0 / 32.0, 1.0 / 64.0] {
        let (disc, report) = picard_disc(&field, &e, &t, &opts(h)).unwrap();
        let err = max_error(&disc, |z| {
            vec![t[0] * 0.5 + z * e[0].conj() + z.conj() * ate[0], z * e[1].conj() + z.conj() * ate[1]]
        });
        println!("h = {h}: closed-form error {err:.3e}, residual {:.3e}", report.residual.sup);
        assert!(err <= h * ate.norm(), "error {err} at h = {h}");
        assert!(report.residual.sup <= h * ate.norm());
        errs.push(err);
    }
    assert!(errs[1] < errs[0]);
}

#[test]
fn linear_coefficient_meets_residual_target() {
    let field = linear_example();
    let e = [c(0.25, 0.0), c(0.0, 0.25)];
    let t = [c(0.2, 0.1)];
    let (disc, report) = picard_disc(&field, &e, &t, &opts(1.0 / 128.0)).unwrap();
    println!(
        "iterations {}, ratios {:?}, residual sup {:.3e} l2 {:.3e}",
        report.iterations, report.ratios, report.residual.sup, report.residual.l2
    );
    assert!(report.iterations <= 30);
    assert!(report.max_ratio < 0.5);
    assert!(report.residual.sup <= 1e-4);
    let err = max_error(&disc, |z| linear_oracle(&e, t[0], z).to_vec());
    println!("closed-form error {err:.3e}");
    assert!(err < 1e-3);
}

#[test]
fn residual_decreases_under_refinement() {
    let field = linear_example();
    let e = [c(0.25, 0.0), c(0.0, 0.25)];
    let t = [c(0.2, 0.1)];
    let res: Vec<f64> = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0]
        .iter()
        .map(|&h| picard_disc(&field, &e, &t, &opts(h)).unwrap().1.residual.sup)
        .collect();
    println!("residuals {res:?}");
    assert!(res[1] < 0.75 * res[0] && res[2] < 0.75 * res[1]);
}

/// A coupled coefficient `A(z) = κ [[z₂, z₁], [z₁, −z₂]]`.
fn coupled(kappa: f64) -> StructureField {
    StructureField::normalized(2, 2.0, move |z| {
        DMatrix::from_row_slice(2, 2, &[z[1], z[0], z[0], -z[1]]).map(|v| v * kappa)
    })
    .unwrap()
}

#[test]
fn coupled_coefficient_contracts() {
    let e = [c(0.3, 0.0), c(0.1, 0.2)];
    let t = [c(0.4, 0.0)];
    let (disc, report) = picard_disc(&coupled(0.3), &e, &t, &opts(1.0 / 64.0)).unwrap();
    println!("coupled: iterations {}, ratios {:?}", report.iterations, report.ratios);
    assert_eq!(report.dilations, 0);
    assert!(report.ratios.iter().all(|&r| r < 1.0));
    assert!(report.residual.sup < 1e-3);
    assert!(disc.embedded);
}

#[test]
fn anchor_is_reproduced() {
    let e = [c(0.3, 0.0), c(0.1, 0.2)];
    let t = [c(0.4, -0.2)];
    let (disc, _) = picard_disc(&coupled(0.3), &e, &t, &opts(1.0 / 64.0)).unwrap();
    let s = 1e-3;
    let pts = [c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, s), c(0.0, -s)];
    let vals = disc.eval(&pts).unwrap();
    let expected = [t[0] * 0.5, c(0.0, 0.0)];
    for k in 0..2 {
        assert!((vals[0][k] - expected[k]).norm() < 1e-12);
        assert!((disc.anchor[k] - expected[k]).norm() < 1e-15);
        let dx = (vals[1][k] - vals[2][k]) / (2.0 * s);
        let dy = (vals[3][k] - vals[4][k]) / (2.0 * s);
        let dz = (dx - dy * c(0.0, 1.0)) * 0.5;
        assert!((dz - e[k].conj()).norm() < 1e-3, "d_zeta u_{k}(0) = {dz}");
    }
}

#[test]
fn composition_identity_holds() {
    let field = coupled(0.3);
    let e = [c(0.3, 0.0), c(0.1, 0.2)];
    let t = [c(0.4, 0.0)];
    let (disc, _) = picard_disc(&field, &e, &t, &opts(1.0 / 64.0)).unwrap();
    // f(z) = z₁ z̄₂ + z₂², with ∂_{z₁} f = z̄₂, ∂_{z₂} f = 2 z₂, ∂_{z̄₁} f = 0, ∂_{z̄₂} f = z₁.
    let g = &disc.grid;
    let fu = GridField::from_values(g, (0..g.len()).map(|k| disc.u.at(k, 0) * disc.u.at(k, 1).conj() + disc.u.at(k, 1).powi(2)).collect());
    let lhs = wirtinger(&fu).dzbar;
    let w = wirtinger(&disc.u);
    let margin = 0.2 * disc.r;
    let mut worst: f64 = 0.0;
    for k in g.interior_nodes(margin) {
        let u = CVec::from_fn(2, |ci, _| disc.u.at(k, ci));
        let a = field.a(&u);
        let fz = [u[1].conj(), u[1] * 2.0];
        let fzbar = [c(0.0, 0.0), u[0]];
        let mut rhs = c(0.0, 0.0);
        for l in 0..2 {
            let xf = fzbar[l] + a[(l, 0)] * fz[0] + a[(l, 1)] * fz[1];
            rhs += xf * w.dz.at(k, l).conj();
        }
        worst = worst.max((lhs.values[k] - rhs).norm());
    }
    println!("composition defect {worst:.3e}");
    assert!(worst < 1e-4);
}

#[test]
fn stalled_iteration_recovers_by_dilation() {
    let e = [c(0.25, 0.0), c(0.1, 0.0)];
    let t = [c(0.0, 0.0)];
    let strong = coupled(8.0);
    let no_fallback = PicardOptions { max_dilations: 0, ..opts(1.0 / 32.0) };
    match picard_disc(&strong, &e, &t, &no_fallback) {
        Err(Error::Divergence { ratios, .. }) => assert!(ratios.iter().all(|&r| r >= 1.0)),
        other => panic!("expected a stall, got {:?}", other.map(|r| r.1)),
    }
    let (disc, report) = picard_disc(&strong, &e, &t, &opts(1.0 / 32.0)).unwrap();
    println!("dilations {}, residual {:.3e}", report.dilations, report.residual.sup);
    assert!(report.dilations >= 1);
    assert_eq!(disc.scale, 0.5f64.powi(report.dilations as i32));
    assert!(report.residual.sup < 1e-2);
}

#[test]
fn leaving_the_domain_is_reported() {
    let field = StructureField::normalized(2, 0.2, |_| CMat::zeros(2, 2)).unwrap();
    let e = [c(1.0, 0.0), c(0.0, 0.0)];
    match picard_disc(&field, &e, &[c(0.0, 0.0)], &opts(1.0 / 16.0)) {
        Err(Error::DomainExit { node }) => assert!(node < 10_000),
        other => panic!("expected a domain exit, got {:?}", other.map(|r| r.1)),
    }
}

#[test]
fn residual_of_simple_maps() {
    let field = StructureField::normalized(2, 2.0, |_| CMat::zeros(2, 2)).unwrap();
    let grid = xbv_core::jcurve::disc_grid(0.5, 1.0 / 32.0).unwrap();
    let anti = GridField::from_fn_vec(&grid, 2, |z, out| {
        out[0] = z.conj();
        out[1] = c(0.0, 0.0);
    });
    let r = jholo_residual(&anti, &field).unwrap();
    assert!((r.sup - 1.0).abs() < 1e-12 && (r.sup_all - 1.0).abs() < 1e-12);
    let holo = GridField::from_fn_vec(&grid, 2, |z, out| {
        out[0] = z * z;
        out[1] = z * 0.5;
    });
    let r = jholo_residual(&holo, &field).unwrap();
    assert!(r.sup < 1e-12, "holomorphic residual {}", r.sup);
    let small = StructureField::normalized(2, 0.1, |_| CMat::zeros(2, 2)).unwrap();
    assert!(matches!(jholo_residual(&holo, &small), Err(Error::DomainExit { .. })));
}

#[test]
fn family_matches_single_runs() {
    let field = linear_example();
    let e = [c(0.25, 0.0), c(0.0, 0.25)];
    let ts = vec![vec![c(0.0, 0.0)], vec![c(0.3, 0.0)], vec![c(0.0, -0.3)]];
    let o = opts(1.0 / 32.0);
    let runs = picard_family(&field, &e, &ts, &o);
    for (t, run) in ts.iter().zip(runs) {
        let (disc, _) = run.unwrap();
        let (single, _) = picard_disc(&field, &e, t, &o).unwrap();
        assert_eq!(disc.u.values, single.u.values);
    }
}

#[test]
fn structure_spec_builds_affine_field() {
    let json = r#"{"n": 2, "a0": [[[0,0],[0,0]],[[0,0],[0,0]]],
        "linear": [[[[0,0],[0.1,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[0,0]]]]}"#;
    let spec: StructureSpec = serde_json::from_str(json).unwrap();
    let field = spec.build().unwrap();
    let z = CVec::from_column_slice(&[c(0.3, 0.1), c(-0.2, 0.0)]);
    assert!((field.a(&z)[(0, 1)] - c(0.03, 0.01)).norm() < 1e-15);
    assert_eq!(field.radius, 2.0);
}

// The structure pushed forward from `J_st` by
// φ(x₁, x₂, y₁, y₂) = (x₁ + 0.1 sin y₁, x₂ + 0.1 x₁ y₁ + 0.1 y₁², y₁ + 0.05 x₁², y₂ + 0.05 sin(x₁) y₁).
// Its pseudoholomorphic lines are u(x, y) = φ(x, 0, y, 0).

fn phi(p: &DVector<f64>) -> DVector<f64> {
    let (x1, x2, y1, y2) = (p[0], p[1], p[2], p[3]);
    DVector::from_column_slice(&[
        x1 + 0.1 * y1.sin(),
        x2 + 0.1 * x1 * y1 + 0.1 * y1 * y1,
        y1 + 0.05 * x1 * x1,
        y2 + 0.05 * x1.sin() * y1,
    ])
}

fn dphi(p: &DVector<f64>) -> RMat {
    let (x1, y1) = (p[0], p[2]);
    DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.0, 0.1 * y1.cos(), 0.0,
            0.1 * y1, 1.0, 0.1 * x1 + 0.2 * y1, 0.0,
            0.1 * x1, 0.0, 1.0, 0.0,
            0.05 * x1.cos() * y1, 0.0, 0.05 * x1.sin(), 1.0,
        ],
    )
}

fn phi_inv(q: &DVector<f64>) -> DVector<f64> {
    let mut p = q.clone();
    for _ in 0..50 {
        let r = phi(&p) - q;
        if r.norm() < 1e-15 {
            break;
        }
        p -= dphi(&p).lu().solve(&r).unwrap();
    }
    p
}

fn pushed_j(q: &DVector<f64>) -> RMat {
    let d = dphi(&phi_inv(q));
    &d * j_standard(2) * d.clone().try_inverse().unwrap()
}

/// `A_{jk} = ∂_{z̄_j} φ_k` and `B_{jk} = ∂_{z̄_j} φ̄_k` at `φ^{-1}(z)`.
fn pushed_field() -> StructureField {
    StructureField::new(2, 2.0, |z: &CVec| {
        let q = DVector::from_column_slice(&[z[0].re, z[1].re, z[0].im, z[1].im]);
        let d = dphi(&phi_inv(&q));
        let a = CMat::from_fn(2, 2, |j, k| c(d[(k, j)], 0.0) * 0.5 + c(0.0, 0.5) * d[(k, j + 2)]);
        let a = CMat::from_fn(2, 2, |j, k| a[(j, k)] + c(0.0, 0.5) * c(d[(k + 2, j)], 0.0) - c(0.5, 0.0) * d[(k + 2, j + 2)]);
        let b = CMat::from_fn(2, 2, |j, k| {
            c(0.5 * d[(k, j)], 0.0) + c(0.0, 0.5 * d[(k, j + 2)]) - c(0.0, 0.5 * d[(k + 2, j)]) + c(0.5 * d[(k + 2, j + 2)], 0.0)
        });
        (a, b)
    })
    .unwrap()
}

/// Exact coefficients of `φ(x, 0, y, 0) = Σ a_i(x) y^i`.
fn exact_jet(x: f64, i: usize) -> DVector<f64> {
    match i {
        1 => DVector::from_column_slice(&[0.1, 0.1 * x, 1.0, 0.05 * x.sin()]),
        2 => DVector::from_column_slice(&[0.0, 0.1, 0.0, 0.0]),
        3 => DVector::from_column_slice(&[-0.1 / 6.0, 0.0, 0.0, 0.0]),
        _ => DVector::zeros(4),
    }
}

fn pushed_line(n: usize) -> CurveSamples {
    CurveSamples::from_fn(uniform_axis(-0.9, 0.9, n), |x| phi(&DVector::from_column_slice(&[x, 0.0, 0.0, 0.0])))
}

#[test]
fn pushed_field_reproduces_pushed_structure() {
    let field = pushed_field();
    let q = DVector::from_column_slice(&[0.3, -0.2, 0.1, 0.4]);
    let j = field.j_at(&q).unwrap();
    assert!((j - pushed_j(&q)).amax() < 1e-12);
}

#[test]
fn standard_line_jets_are_exact() {
    let j = j_standard(2);
    let line = CurveSamples::from_fn(uniform_axis(-1.0, 1.0, 16), |x| DVector::from_column_slice(&[x, 0.0, 0.0, 0.0]));
    let jet = approx_jet(|_| Ok(j.clone()), &line, 3, &JetOptions::default()).unwrap();
    let e3 = DVector::from_column_slice(&[0.0, 0.0, 1.0, 0.0]);
    for k in 0..line.x.len() {
        assert!((&jet.a[0][k] - &e3).amax() < 1e-13);
        for i in 1..4 {
            assert!(jet.a[i][k].amax() < 1e-12);
        }
    }
    let first = approx_jet(|_| Ok(j.clone()), &line, 0, &JetOptions::default()).unwrap();
    assert_eq!(first.a.len(), 1);
}

#[test]
fn order_zero_jet_is_pointwise_first_order() {
    let field = pushed_field();
    let line = pushed_line(64);
    let jet = approx_jet(|p| field.j_at(p), &line, 0, &JetOptions::default()).unwrap();
    let h = line.x[1] - line.x[0];
    for k in 2..line.x.len() - 2 {
        let x = line.x[k];
        let du0 = DVector::from_column_slice(&[1.0, 0.0, 0.1 * x, 0.0]);
        let expected = field.j_at(&line.values[k]).unwrap() * du0;
        assert!((&jet.a[0][k] - expected).amax() < 10.0 * h.powi(4));
    }
}

#[test]
fn example_structure_line_is_holomorphic() {
    let j = example_family(std::f64::consts::FRAC_PI_2).unwrap().j;
    let v = DVector::from_column_slice(&[0.6, 0.0, 0.0, 0.8]);
    let line = CurveSamples::from_fn(uniform_axis(-1.0, 1.0, 16), |x| &v * x);
    let jet = approx_jet(|_| Ok(j.clone()), &line, 2, &JetOptions::default()).unwrap();
    let jv = &j * &v;
    for k in 0..line.x.len() {
        assert!((&jet.a[0][k] - &jv).amax() < 1e-13);
        assert!(jet.a[1][k].amax() < 1e-12 && jet.a[2][k].amax() < 1e-12);
    }
}

#[test]
fn variable_structure_jets_match_pushed_line() {
    let field = pushed_field();
    let line = pushed_line(180);
    let jet = approx_jet(|p| field.j_at(p), &line, 2, &JetOptions::default()).unwrap();
    let mut worst = [0.0f64; 3];
    for k in 0..line.x.len() {
        for i in 0..3 {
            worst[i] = worst[i].max((&jet.a[i][k] - exact_jet(line.x[k], i + 1)).amax());
        }
    }
    println!("jet errors {worst:?}");
    assert!(worst[0] < 1e-8 && worst[1] < 1e-6 && worst[2] < 1e-4);
}

#[test]
fn insufficient_samples_are_rejected() {
    let j = j_standard(1);
    let short = CurveSamples::from_fn(vec![0.0, 0.1, 0.2, 0.3], |x| DVector::from_column_slice(&[x, 0.0]));
    assert!(matches!(approx_jet(|_| Ok(j.clone()), &short, 0, &JetOptions::default()), Err(Error::Resolution(_))));
    let five = CurveSamples::from_fn(uniform_axis(0.0, 1.0, 4), |x| DVector::from_column_slice(&[x, 0.0]));
    assert!(matches!(approx_jet(|_| Ok(j.clone()), &five, 3, &JetOptions::default()), Err(Error::Resolution(_))));
}

fn standard_field(n: usize) -> StructureField {
    StructureField::normalized(n, 2.0, move |_| CMat::zeros(n, n)).unwrap()
}

#[test]
fn standard_half_disc_has_no_defect() {
    let line = CurveSamples::from_fn(uniform_axis(-1.0, 1.0, 64), |x| DVector::from_column_slice(&[x, 0.0, 0.0, 0.0]));
    let disc = attach_half_disc(&standard_field(2), &line, 2, &HalfDiscOptions::default()).unwrap();
    println!("standard sup F {:.3e}", disc.sup_f);
    assert!(disc.sup_f < 1e-10);
    assert!(disc.bands.iter().all(|b| b.sup_f < 1e-10));
}

#[test]
fn half_disc_jet_consistency() {
    let field = pushed_field();
    let line = pushed_line(180);
    let l = 2;
    let disc = attach_half_disc(&field, &line, l, &HalfDiscOptions::default()).unwrap();
    let s = 1e-2;
    let mut worst = [0.0f64; 3];
    for (k, &x) in disc.jet.x.iter().enumerate().filter(|(_, x)| x.abs() <= 0.5) {
        let f = |y: f64| disc.eval(x, y);
        let d1 = (f(s) * 8.0 - f(-s) * 8.0 - f(2.0 * s) + f(-2.0 * s)) / (12.0 * s);
        let d2 = (f(s) * 16.0 + f(-s) * 16.0 - f(2.0 * s) - f(-2.0 * s) - f(0.0) * 30.0) / (12.0 * s * s);
        let d3 = (f(2.0 * s) - f(-2.0 * s) - (f(s) - f(-s)) * 2.0) / (2.0 * s * s * s);
        worst[0] = worst[0].max((d1 - &disc.jet.a[0][k]).amax());
        worst[1] = worst[1].max((d2 - &disc.jet.a[1][k] * 2.0).amax());
        worst[2] = worst[2].max((d3 - &disc.jet.a[2][k] * 6.0).amax());
    }
    println!("jet consistency {worst:?}");
    assert!(worst[0] < 1e-6 && worst[1] < 1e-4 && worst[2] < 1e-2);
}

#[test]
fn half_disc_defect_decays_on_bands() {
    let field = pushed_field();
    let line = pushed_line(360);
    let d1 = attach_half_disc(&field, &line, 1, &HalfDiscOptions::default()).unwrap();
    for b in &d1.bands {
        println!("l = 1 band {}: sup F {:.3e}, F/y {:.3e}, F/y^2 {:.3e}", b.j, b.sup_f, b.ratio, b.ratio_next);
    }
    for w in d1.bands.windows(2) {
        let q = w[1].ratio / w[0].ratio;
        assert!(q < 0.6, "band ratio quotient {q}");
    }
    let d0 = attach_half_disc(&field, &line, 0, &HalfDiscOptions::default()).unwrap();
    for b in &d0.bands {
        println!("l = 0 band {}: sup F {:.3e}, F/y {:.3e}", b.j, b.sup_f, b.ratio_next);
    }
    assert!(d0.sup_f.is_finite() && d0.sup_f < 1.0);
    let (lo, hi) = d0.bands.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), b| (lo.min(b.ratio_next), hi.max(b.ratio_next)));
    assert!(hi / lo < 2.0, "first-order band quotients range {lo} .. {hi}");
}

#[test]
fn half_disc_leaving_domain_is_rejected() {
    let field = StructureField::normalized(1, 1.0, |_| CMat::zeros(1, 1)).unwrap();
    let line = CurveSamples::from_fn(uniform_axis(-1.0, 1.0, 64), |x| DVector::from_column_slice(&[x, 0.0]));
    let o = HalfDiscOptions { r: 0.5, delta: 0.9, ..HalfDiscOptions::default() };
    let err = attach_half_disc(&field, &line, 1, &o).unwrap_err();
    assert!(err.to_string().contains("smaller height"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn affine_disc_passes_through_anchor(tr in -0.5f64..0.5, ti in -0.5f64..0.5, er in 0.05f64..0.3) {
        let field = linear_example();
        let e = [c(er, 0.0), c(0.0, 0.2)];
        let (disc, report) = picard_disc(&field, &e, &[c(tr, ti)], &opts(1.0 / 16.0)).unwrap();
        let u0 = disc.eval(&[c(0.0, 0.0)]).unwrap();
        prop_assert!((u0[0][0] - c(tr, ti) * 0.5).norm() < 1e-12);
        prop_assert!(u0[0][1].norm() < 1e-12);
        prop_assert!(report.max_ratio < 1.0);
    }
}
