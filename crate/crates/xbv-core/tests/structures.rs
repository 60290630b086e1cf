use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xbv_core::structures::*;

type C = Complex<f64>;

fn cm(n: usize, vals: &[C]) -> CMat {
    DMatrix::from_row_slice(n, n, vals)
}

fn random_c(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMat {
    CMat::from_fn(n, n, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale)
}

/// `J` from its defining property `J Re X_j = Im X_j`, `J Im X_j = −Re X_j`,
/// solved as a linear system on all `4n²` entries.
fn j_by_least_squares(fields: &CMat) -> RMat {
    let n = fields.nrows();
    let d = 2 * n;
    let mut lhs = DMatrix::<f64>::zeros(2 * n * d, d * d);
    let mut rhs = DVector::<f64>::zeros(2 * n * d);
    let mut row = 0;
    for j in 0..n {
        let u: Vec<f64> = (0..d).map(|c| fields[(j, c)].re).collect();
        let v: Vec<f64> = (0..d).map(|c| fields[(j, c)].im).collect();
        for (from, to, sign) in [(&u, &v, 1.0), (&v, &u, -1.0)] {
            for r in 0..d {
                for c in 0..d {
                    lhs[(row, r * d + c)] = from[c];
                }
                rhs[row] = sign * to[r];
                row += 1;
            }
        }
    }
    let sol = lhs.svd(true, true).solve(&rhs, 1e-14).unwrap();
    DMatrix::from_fn(d, d, |r, c| sol[r * d + c])
}

#[test]
fn standard_pair_gives_standard_structure() {
    for n in 1..4 {
        let s = j_from_ab(&CMat::zeros(n, n), &CMat::identity(n, n)).unwrap();
        assert!((&s.j - j_standard(n)).amax() < 1e-15);
        assert!(s.square_residual() < 1e-15);
    }
}

#[test]
fn structure_formula_matches_defining_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..4 {
        let a = random_c(&mut rng, n, 0.3);
        let b = CMat::identity(n, n) + random_c(&mut rng, n, 0.2);
        let s = j_from_ab(&a, &b).unwrap();
        let fields = ab_to_fields(&a, &b);
        let oracle = j_by_least_squares(&fields);
        assert!((&s.j - &oracle).amax() < 1e-10, "n={n}");
        assert!((j_from_fields(&fields).unwrap() - &oracle).amax() < 1e-10);
        assert!(s.square_residual() <= 1e-12);
        let (a2, b2) = fields_to_ab(&fields);
        assert!((a2 - &a).camax() < 1e-14 && (b2 - &b).camax() < 1e-14);
    }
}

#[test]
fn singular_block_is_rejected() {
    let a = CMat::identity(2, 2);
    let b = CMat::identity(2, 2);
    assert!(j_from_ab(&a, &b).is_err());
    assert!(j_from_ab(&CMat::zeros(2, 2), &CMat::zeros(2, 2)).is_err());
    assert!(j_from_ab(&CMat::zeros(2, 2), &CMat::identity(3, 3)).is_err());
}

#[test]
fn operator_norm_examples() {
    assert_eq!(operator_norm(&RMat::zeros(4, 4)), 0.0);
    let jst = j_standard(2);
    assert!((operator_norm(&(&jst - (-&jst))) - 2.0).abs() < 1e-12);
    assert!((operator_norm(&(&jst * 2.0)) - 2.0).abs() < 1e-12);
    let e0 = example_family(0.0).unwrap();
    let ep = example_family(PI).unwrap();
    assert!((operator_norm(&(&e0.j - &ep.j)) - 2.0).abs() < 1e-6);
    let m = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 0.0, 2.0]);
    let exact = m.clone().svd(false, false).singular_values.max();
    assert!((operator_norm(&m) - exact).abs() < 1e-10);
}

#[test]
fn example_family_endpoints_and_values() {
    let e0 = example_family(0.0).unwrap();
    assert!((&e0.j - j_standard(2)).amax() < 1e-14);
    let ep = example_family(PI).unwrap();
    assert!((&ep.j + j_standard(2)).amax() < 1e-14);
    assert!(complex_norm(&example_family(PI / 2.0).unwrap().a) < 1e-15);
    assert!((complex_norm(&e0.a) - 1.0).abs() < 1e-15);
    let e = example_family(PI / 6.0).unwrap();
    assert!((complex_norm(&e.a) - 1.0 / 3f64.sqrt()).abs() < 1e-14);
    assert!(example_family(-0.1).is_err() && example_family(PI + 0.1).is_err());
    for k in 0..=20 {
        let e = example_family(PI * k as f64 / 20.0).unwrap();
        assert!(square_residual(&e.j) < 1e-12);
        assert!(complex_norm(&e.a) <= 1.0 + 1e-15);
    }
}

#[test]
fn example_normal_form_matches_pushed_forward_fields() {
    let r = example_coordinates();
    for k in 0..=12 {
        let t = PI * k as f64 / 12.0;
        let e = example_family(t).unwrap();
        let (a, b) = fields_to_ab(&push_forward(&e.fields, &r));
        let (an, norm) = normalize(&a, &b).unwrap();
        assert!((&an - &e.a).camax() < 1e-14, "t={t}");
        assert!((norm - complex_norm(&e.a)).abs() < 1e-14);
        // The pushed-forward fields agree with the displayed combinations.
        let (s, c) = t.sin_cos();
        let rr = |v: f64| C::new(v, 0.0);
        let bd = cm(2, &[rr(1.0 + s), rr(-c), rr(c), rr(1.0 + s)]);
        let ad = cm(2, &[rr(-(1.0 - s)), rr(-c), rr(c), rr(-(1.0 - s))]);
        let (and, _) = normalize(&ad, &bd).unwrap();
        assert!((and - &e.a).camax() < 1e-14);
    }
}

#[test]
fn midpoint_structure_is_orthogonally_standard() {
    let e = example_family(PI / 2.0).unwrap();
    let q = example_coordinates() * 2f64.sqrt();
    assert!((q.transpose() * &q - RMat::identity(4, 4)).amax() < 1e-14);
    let conj = q.transpose() * j_standard(2) * &q;
    assert!((conj - &e.j).amax() < 1e-14);
    let s = j_from_ab(&e.a, &CMat::identity(2, 2)).unwrap();
    assert!((s.j - j_standard(2)).amax() < 1e-15);
}

fn oracle_best(j1: &RMat, j2: &RMat, plane: &Hyperplane, samples: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let nu = DVector::from_vec(plane.normal.clone());
    let mut best = f64::NEG_INFINITY;
    for _ in 0..samples {
        let mut v = DVector::from_fn(nu.len(), |_, _| rng.gen_range(-1.0..1.0));
        v -= &nu * v.dot(&nu);
        v /= v.norm();
        let s1 = nu.dot(&(j1 * &v));
        let s2 = nu.dot(&(j2 * &v));
        best = best.max(s1.min(s2).max(-s1.max(s2)));
    }
    best
}

#[test]
fn identical_structures_admit_certificate() {
    let j = j_standard(2);
    let plane = Hyperplane::coordinate(4, 2);
    let cert = find_side_certificate(&j, &j, &plane, 500).unwrap();
    assert_eq!(cert.status, CertificateStatus::Found);
    assert!(cert.is_valid(&plane, 1e-12));
    assert!(cert.s1 * cert.s2 > 0.0);
}

#[test]
fn opposite_structures_have_no_certificate() {
    for n in [1, 2] {
        let j = j_standard(n);
        let plane = Hyperplane::coordinate(2 * n, n);
        let cert = find_side_certificate(&j, &(-&j), &plane, 2000).unwrap();
        assert_eq!(cert.status, CertificateStatus::Degenerate);
        assert!(oracle_best(&j, &(-&j), &plane, 10_000) <= CERTIFICATE_THRESHOLD);
    }
}

#[test]
fn example_endpoints_fail_and_nearby_members_succeed() {
    let plane = Hyperplane::coordinate(4, 3);
    let e0 = example_family(0.0).unwrap();
    let ep = example_family(PI).unwrap();
    let cert = find_side_certificate(&e0.j, &ep.j, &plane, 2000).unwrap();
    assert_eq!(cert.status, CertificateStatus::Degenerate);

    let et = example_family(PI - 0.2).unwrap();
    assert!(operator_norm(&(&et.j - &e0.j)) < 2.0);
    let cert = find_side_certificate(&e0.j, &et.j, &plane, 2000).unwrap();
    assert_eq!(cert.status, CertificateStatus::Found);
    assert!(cert.is_valid(&plane, 1e-12));
    assert!(oracle_best(&e0.j, &et.j, &plane, 10_000) > CERTIFICATE_THRESHOLD);
}

#[test]
fn hyperplane_validation() {
    assert!(Hyperplane::new(vec![0.0; 4]).is_err());
    let p = Hyperplane::new(vec![3.0, 0.0, 4.0, 0.0]).unwrap();
    assert!((p.normal[0] - 0.6).abs() < 1e-15 && (p.normal[2] - 0.8).abs() < 1e-15);
    assert!(find_side_certificate(&j_standard(1), &j_standard(2), &p, 10).is_err());
}

#[test]
fn standard_form_of_constant_and_trivial_structures() {
    let samples: Vec<CVec> = (0..9)
        .map(|k| DVector::from_vec(vec![C::from_polar(0.3, k as f64), C::new(0.1 * k as f64 - 0.4, 0.05)]))
        .collect();
    let at = DVector::from_vec(vec![C::new(0.1, 0.2), C::new(-0.3, 0.0)]);
    let id = standard_form(|_| (CMat::zeros(2, 2), CMat::identity(2, 2)), &at, &samples).unwrap();
    assert!(id.max_norm < 1e-15);
    assert!((&id.p - CMat::identity(2, 2)).camax() < 1e-15 && id.q.camax() < 1e-15);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_c(&mut rng, 2, 0.3);
    let b = CMat::identity(2, 2) + random_c(&mut rng, 2, 0.2);
    let nf = standard_form(|_| (a.clone(), b.clone()), &at, &samples).unwrap();
    assert!(nf.max_norm < 1e-12, "{}", nf.max_norm);
}

#[test]
fn standard_form_vanishes_at_base_point_and_detects_bad_norms() {
    let field = |z: &CVec| {
        let a = DMatrix::from_row_slice(2, 2, &[z[0] * 0.4, C::new(0.1, 0.0), z[1].conj() * 0.3, C::new(0.0, 0.05)]);
        let b = CMat::identity(2, 2) + CMat::from_element(2, 2, z[0] * 0.1);
        (a, b)
    };
    let at = DVector::from_vec(vec![C::new(0.2, -0.1), C::new(0.1, 0.3)]);
    let zero = DVector::from_vec(vec![C::new(0.0, 0.0); 2]);
    let near = DVector::from_vec(vec![C::new(0.05, 0.0), C::new(0.0, -0.05)]);
    let nf = standard_form(field, &at, &[zero, near]).unwrap();
    assert!(complex_norm(&nf.samples[0].1) < 1e-14);
    assert!(complex_norm(&nf.samples[1].1) > 1e-3);

    // A coefficient reaching norm 1 away from the base point is rejected.
    let steep = |z: &CVec| (CMat::from_element(1, 1, z[0] * 2.0), CMat::identity(1, 1));
    let at1 = DVector::from_vec(vec![C::new(0.0, 0.0)]);
    let far = DVector::from_vec(vec![C::new(0.9, 0.0)]);
    assert!(standard_form(steep, &at1, &[far]).is_err());
    let singular = |_: &CVec| (CMat::identity(1, 1), CMat::identity(1, 1));
    assert!(standard_form(singular, &at1, &[]).is_err());
}

fn random_structure(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> RMat {
    let d = 2 * n;
    let p = RMat::identity(d, d) + RMat::from_fn(d, d, |_, _| rng.gen_range(-scale..scale));
    let inv = p.clone().try_inverse().unwrap();
    &p * j_standard(n) * inv
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn close_structures_always_have_certificates(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 1 + (seed % 2) as usize;
        let (j1, j2) = loop {
            let j1 = random_structure(&mut rng, n, 0.4);
            let j2 = random_structure(&mut rng, n, 0.4);
            if operator_norm(&(&j2 - &j1)) <= 1.9 {
                break (j1, j2);
            }
        };
        let normal: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let plane = Hyperplane::new(normal).unwrap();
        let cert = find_side_certificate(&j1, &j2, &plane, 1000).unwrap();
        prop_assert_eq!(cert.status, CertificateStatus::Found);
        prop_assert!(cert.is_valid(&plane, 1e-12));
    }

    #[test]
    fn operator_norm_is_a_norm(seed in any::<u64>(), s in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = RMat::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
        let b = RMat::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
        let (na, nb) = (operator_norm(&a), operator_norm(&b));
        prop_assert!(operator_norm(&(&a + &b)) <= na + nb + 1e-9);
        prop_assert!((operator_norm(&(&a * s)) - s.abs() * na).abs() <= 1e-9 * (1.0 + na));
    }

    #[test]
    fn constructed_structures_square_to_minus_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 1 + (seed % 3) as usize;
        let a = random_c(&mut rng, n, 0.25);
        let b = CMat::identity(n, n) + random_c(&mut rng, n, 0.25);
        if let Ok(s) = j_from_ab(&a, &b) {
            prop_assert!(s.square_residual() <= 1e-10);
        }
    }
}
