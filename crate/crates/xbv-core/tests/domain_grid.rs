mod common;

use std::sync::Arc;

use common::{c, loglog_slope, C};
use proptest::prelude::*;
use xbv_core::domain_grid::*;

fn disk_grid(h: f64) -> Arc<Grid<f64>> {
    Arc::new(Grid::build(DomainSpec::unit_disk(), h).unwrap())
}

#[test]
fn disk_area_error_is_within_four_h() {
    for &h in &[0.2, 0.1, 0.05, 1.0 / 32.0] {
        let g = disk_grid(h);
        let err = (g.total_weight() - std::f64::consts::PI).abs();
        assert!(err <= 4.0 * h, "h={h} area error {err}");
    }
}

#[test]
fn disk_node_count_matches_area_over_h_squared() {
    let g = disk_grid(0.1);
    let expected = std::f64::consts::PI / 0.01;
    let rel = (g.len() as f64 - expected).abs() / expected;
    assert!(rel <= 0.02, "node count {} vs {expected}", g.len());
}

#[test]
fn nodes_lie_in_the_closed_domain_with_positive_weights() {
    for d in [
        DomainSpec::unit_disk(),
        DomainSpec::upper_half_disk(1.0, 512),
        DomainSpec::lower_half_disk(1.0, 512),
    ] {
        let g = Grid::build(d.clone(), 0.05).unwrap();
        for (k, &z) in g.nodes.iter().enumerate() {
            assert!(d.contains(z), "node {z} outside");
            assert!(g.weights[k] > 0.0);
            assert!(g.weights[k] <= 0.05 * 0.05 * (1.0 + 1e-12) || !g.is_regular(k));
        }
    }
}

#[test]
fn half_disk_nodes_are_on_the_correct_side_and_mirror() {
    let up = Grid::build(DomainSpec::upper_half_disk(1.0, 512), 0.1).unwrap();
    let lo = Grid::build(DomainSpec::lower_half_disk(1.0, 512), 0.1).unwrap();
    assert!(up.nodes.iter().all(|z| z.im >= 0.0));
    assert!(lo.nodes.iter().all(|z| z.im <= 0.0));
    assert_eq!(up.len(), lo.len());
    for &z in &up.nodes {
        let m = lo.cell_of(z.conj());
        assert!(lo.node_at(m.0, m.1).is_some(), "no mirror of {z}");
    }
}

#[test]
fn half_disk_segment_lies_on_real_axis() {
    let d = DomainSpec::<f64>::upper_half_disk(1.0, 512);
    let seg = d.segment_indices();
    assert!(!seg.is_empty());
    for k in seg {
        assert_eq!(d.boundary[k].z.im, 0.0);
    }
}

#[test]
fn coarse_spacing_is_rejected() {
    assert!(matches!(
        Grid::build(DomainSpec::<f64>::unit_disk(), 2.5),
        Err(xbv_core::Error::EmptyGrid { .. })
    ));
    assert!(build_grid(DomainSpec::<f64>::unit_disk(), 0.5).is_err());
}

#[test]
fn sampled_boundary_validation() {
    let square: Vec<C> = (0..4)
        .flat_map(|side| {
            let corners = [c(-1.0, -1.0), c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0)];
            let (a, b) = (corners[side], corners[(side + 1) % 4]);
            (0..16).map(move |k| a + (b - a) * (k as f64 / 16.0))
        })
        .collect();
    // A square has corners with turning angle π/2, which the C¹ check rejects.
    assert!(DomainSpec::from_boundary(square).is_err());
    let ellipse: Vec<C> = (0..256)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 256.0;
            c(1.5 * t.cos(), 0.7 * t.sin())
        })
        .collect();
    let mut cw = ellipse.clone();
    cw.reverse();
    let d = DomainSpec::from_boundary(cw).unwrap();
    assert!(d.reoriented);
    let g = Grid::build(d, 0.05).unwrap();
    let area = std::f64::consts::PI * 1.5 * 0.7;
    assert!((g.total_weight() - area).abs() < 4.0 * 0.05);
}

#[test]
fn wirtinger_is_exact_on_affine_and_quadratic_fields() {
    let g = disk_grid(0.05);
    let f = GridField::from_fn(&g, |z| z.conj() * 3.0 + z * c(0.5, -2.0) + c(1.0, 1.0));
    let w = wirtinger(&f);
    for k in 0..g.len() {
        assert!((w.dzbar.at(k, 0) - c(3.0, 0.0)).norm() < 1e-9);
        assert!((w.dz.at(k, 0) - c(0.5, -2.0)).norm() < 1e-9);
    }
    let q = GridField::from_fn(&g, |z| z * z);
    let wq = wirtinger(&q);
    for k in 0..g.len() {
        let (i, j) = g.cells[k];
        let central = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().all(|&(a, b)| g.node_at(i + a, j + b).is_some());
        if central {
            assert!((wq.dz.at(k, 0) - g.nodes[k] * 2.0).norm() < 1e-9);
            assert!(wq.dzbar.at(k, 0).norm() < 1e-9);
        }
    }
}

#[test]
fn wirtinger_of_exponential_converges_at_second_order() {
    let hs = [0.1, 0.05, 0.025];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let g = disk_grid(h);
            let w = wirtinger(&GridField::from_fn(&g, |z| z.exp()));
            (0..g.len()).map(|k| (w.dz.at(k, 0) - g.nodes[k].exp()).norm()).fold(0.0, f64::max)
        })
        .collect();
    let order = loglog_slope(&hs, &errs);
    assert!(order > 1.8, "order {order}, errors {errs:?}");
}

#[test]
fn holder_of_constant_is_zero() {
    let g = disk_grid(0.1);
    let f = GridField::from_fn(&g, |_| c(2.0, -1.0));
    for k in 0..3 {
        let r = holder_estimate(&f, k, 0.5).unwrap();
        assert!(r.seminorm.abs() < 1e-9);
        assert!(r.sup_norms.iter().skip(1).all(|&s| s < 1e-9));
    }
}

#[test]
fn holder_of_square_root_near_real_axis() {
    // A thin ellipse keeps nodes close to the real axis, where |Re z|^{1/2}
    // attains its Hölder ratio 1 against points with Re z′ = 0.
    let pts: Vec<C> = (0..1024)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 1024.0;
            c(t.cos(), 0.05 * t.sin())
        })
        .collect();
    let d = DomainSpec::from_boundary(pts).unwrap();
    let g = Arc::new(Grid::build(d, 0.01).unwrap());
    let f = GridField::from_fn(&g, |z| c(z.re.abs().sqrt(), 0.0));
    let r = holder_estimate(&f, 0, 0.5).unwrap();
    assert!((0.9..=1.0 + 1e-12).contains(&r.seminorm), "seminorm {}", r.seminorm);
}

#[test]
fn holder_of_identity_is_root_diameter() {
    let g = disk_grid(0.05);
    let f = GridField::from_fn(&g, |z| z);
    let r = holder_estimate(&f, 0, 0.5).unwrap();
    let max_sep = g
        .nodes
        .iter()
        .flat_map(|a| g.nodes.iter().map(move |b| (a - b).norm()))
        .fold(0.0, f64::max);
    assert!(r.seminorm <= max_sep.sqrt() + 1e-12);
    assert!(r.seminorm >= 0.97 * max_sep.sqrt(), "{} vs {}", r.seminorm, max_sep.sqrt());
}

#[test]
fn holder_rejects_bad_parameters() {
    let g = disk_grid(0.25);
    let f = GridField::from_fn(&g, |z| z);
    assert!(holder_estimate(&f, 0, 1.0).is_err());
    assert!(holder_estimate(&f, 0, 0.0).is_err());
    assert!(holder_estimate(&f, 5, 0.5).is_err());
}

#[test]
fn traces_of_simple_fields() {
    let d = DomainSpec::unit_disk();
    let g = Arc::new(Grid::build(d.clone(), 0.05).unwrap());
    let id = GridField::from_fn(&g, |z| z);
    let tr = boundary_trace(&id, &d);
    assert_eq!(tr.len(), d.boundary.len());
    for s in &tr {
        assert!((s.value - C::from_polar(1.0, s.s)).norm() < 0.05);
    }
    let zero = GridField::zeros(&g, 1);
    assert!(boundary_trace(&zero, &d).iter().all(|s| s.value.norm() == 0.0));

    let up = DomainSpec::upper_half_disk(1.0, 512);
    let gu = Arc::new(Grid::build(up.clone(), 0.05).unwrap());
    let re = GridField::from_fn(&gu, |z| c(z.re, 0.0));
    let tr = boundary_trace(&re, &up);
    for k in up.segment_indices() {
        assert!((tr[k].value.re - up.boundary[k].z.re).abs() < 0.05);
        assert!(tr[k].value.re.is_finite());
    }
}

#[test]
fn f32_grid_matches_f64_grid() {
    let g32 = Grid::build(DomainSpec::<f32>::unit_disk(), 0.1).unwrap();
    let g64 = Grid::build(DomainSpec::<f64>::unit_disk(), 0.1).unwrap();
    assert_eq!(g32.len(), g64.len());
    assert!((g32.total_weight() as f64 - g64.total_weight()).abs() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn holder_seminorm_is_monotone_in_pair_set(seed in any::<u64>(), extra in 1usize..4000, alpha in 0.05f64..0.95) {
        let g = disk_grid(0.1);
        let f = GridField::from_fn(&g, |z| (z * c(2.0, 1.0)).sin() + z.conj() * z.norm());
        let base = PairSet::random(&g, 500, seed);
        let mut bigger = base.clone();
        bigger.extend(&PairSet::random(&g, extra, seed.wrapping_add(1)));
        let a = holder_estimate_with(&f, 0, alpha, &base).unwrap();
        let b = holder_estimate_with(&f, 0, alpha, &bigger).unwrap();
        prop_assert!(b.seminorm >= a.seminorm);
        prop_assert!(a.seminorm >= 0.0 && a.sup_norms.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn area_error_bounded_for_disks(r in 0.3f64..2.0, cx in -1.0f64..1.0, cy in -1.0f64..1.0, n in 8usize..40) {
        let h = 2.0 * r / n as f64;
        let d = DomainSpec::disk(c(cx, cy), r, 512);
        let g = Grid::build(d, h).unwrap();
        let area = std::f64::consts::PI * r * r;
        prop_assert!((g.total_weight() - area).abs() <= 4.0 * h * r);
    }

    #[test]
    fn wirtinger_exact_on_random_affine(a in -3.0f64..3.0, b in -3.0f64..3.0, p in -3.0f64..3.0, q in -3.0f64..3.0) {
        let g = disk_grid(0.1);
        let f = GridField::from_fn(&g, |z| z * c(a, b) + z.conj() * c(p, q));
        let w = wirtinger(&f);
        for k in 0..g.len() {
            prop_assert!((w.dz.at(k, 0) - c(a, b)).norm() < 1e-9);
            prop_assert!((w.dzbar.at(k, 0) - c(p, q)).norm() < 1e-9);
        }
    }
}
