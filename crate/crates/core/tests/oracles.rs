use freeconvex::linalg::{c, kron, lambda_max, pauli_x, pauli_z, random_unital_choi, trace_norm, unit, CMat, MatrixTuple};
use freeconvex::oracles::{
    contains, dist_from_scaling, hausdorff, inclusion_scale, membership, metric_radius, parse_svg_polygon, plot_level1, support,
    svg_polygon, verify_membership, Certificate, SupportFunctional, Verdict,
};
use freeconvex::sets::catalog::pauli_pair;
use freeconvex::sets::FreeConvexSet;
use freeconvex::Budget;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scalar(z: f64) -> MatrixTuple {
    MatrixTuple::new(vec![CMat::from_element(1, 1, c(z, 0.0))]).unwrap()
}

fn pauli() -> FreeConvexSet {
    FreeConvexSet::matrix_range(pauli_pair())
}

#[test]
fn support_examples() {
    let b = Budget::quick();
    let h = SupportFunctional::new(vec![CMat::from_element(1, 1, c(1.0, 0.0)), CMat::zeros(1, 1)]).unwrap();
    let v = support(&pauli(), &h, &b).unwrap();
    assert!((v.value - 1.0).abs() < 1e-6 && v.lower <= 1.0 + 1e-9 && v.upper >= 1.0 - 1e-9, "{v:?}");

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for m in 1..4 {
        let h = SupportFunctional::random(&mut rng, 1, m, false).scaled(2.5);
        let v = support(&FreeConvexSet::contraction_set(), &h, &b).unwrap();
        assert!((v.value - trace_norm(&h.entries[0])).abs() < 1e-9);
    }

    let s2 = FreeConvexSet::scale(2.0, &pauli()).unwrap();
    for m in 1..3 {
        let h = SupportFunctional::random(&mut rng, 2, m, true);
        let (a, z) = (support(&pauli(), &h, &b).unwrap(), support(&s2, &h, &b).unwrap());
        assert!((z.value - 2.0 * a.value).abs() < 1e-6, "{} vs {}", z.value, a.value);
    }
}

#[test]
fn membership_examples() {
    let b = Budget::quick();
    let ando = FreeConvexSet::ando();
    let v = membership(&ando, &MatrixTuple::new(vec![unit(2, 0, 1) * c(2.0, 0.0)]).unwrap(), &b).unwrap();
    assert_eq!(v.verdict, Verdict::In);
    let x3 = MatrixTuple::new(vec![unit(2, 0, 1) * c(3.0, 0.0)]).unwrap();
    let v = membership(&ando, &x3, &b).unwrap();
    assert_eq!(v.verdict, Verdict::Out);
    assert!(verify_membership(&ando, &x3, &v, &b).unwrap().ok);

    // the pencil Re(x ⊗ 2E12) has spectrum ±|x|
    let fs = FreeConvexSet::free_spectrahedron(freeconvex::sets::ando_tuple());
    let v1 = membership(&fs, &scalar(1.0), &b).unwrap();
    assert_eq!(v1.verdict, Verdict::In);
    let v2 = membership(&fs, &scalar(1.2), &b).unwrap();
    assert_eq!(v2.verdict, Verdict::Out);
    if let Certificate::PencilVector { eigenvalue, .. } = v2.certificate {
        assert!((eigenvalue - 1.2).abs() < 1e-9);
    }
}

#[test]
fn contains_examples() {
    let b = Budget::quick();
    assert!(contains(&pauli(), &pauli(), &b).unwrap().is_in());
    let half = FreeConvexSet::free_spectrahedron(pauli_pair().scaled(0.5));
    let v = contains(&pauli(), &half, &b).unwrap();
    // lambda_max(Re(σx⊗σx + σz⊗σz) / 2) = 1, which sits on the boundary; the decision must not be UNDECIDED
    assert_ne!(v.verdict, Verdict::Undecided);
    let small = FreeConvexSet::matrix_range(MatrixTuple::new(vec![unit(2, 0, 1)]).unwrap());
    let v = contains(&FreeConvexSet::ando(), &small, &b).unwrap();
    assert!(v.is_out());
    assert!(matches!(v.certificate, Certificate::Separator(_)), "{:?}", v.certificate);
}

#[test]
fn inclusion_scale_examples() {
    let b = Budget::quick();
    let t = pauli_pair();
    let s = inclusion_scale(&FreeConvexSet::matrix_range(t.scaled(2.0)), &pauli(), &b).unwrap();
    assert!((s.lower - 2.0).abs() < 1e-6 && (s.upper - 2.0).abs() < 1e-6, "{s:?}");

    let fs = FreeConvexSet::free_spectrahedron(t.clone());
    let s = inclusion_scale(&pauli(), &fs, &b).unwrap();
    let direct = lambda_max(&freeconvex::linalg::herm(&(kron(&pauli_x(), &pauli_x()) + kron(&pauli_z(), &pauli_z()))));
    assert!((s.lower - direct).abs() < 1e-6 && (s.upper - direct).abs() < 1e-6, "{s:?} vs {direct}");

    let s = inclusion_scale(&pauli(), &pauli(), &b).unwrap();
    assert!((s.lower - 1.0).abs() < 1e-6 && (s.upper - 1.0).abs() < 1e-6);
}

#[test]
fn hausdorff_examples() {
    let b = Budget::quick();
    let h = hausdorff(&pauli(), &pauli(), &b).unwrap();
    assert_eq!((h.lower, h.upper), (0.0, 0.0));

    // disk against a point: 1 at level one, 2 once 2E12 itself is reachable at level two
    let zero = FreeConvexSet::matrix_range(MatrixTuple::zero(1, 1, false));
    let h1 = hausdorff(&FreeConvexSet::ando(), &zero, &Budget { level_cap: 1, ..b.clone() }).unwrap();
    assert!((h1.lower - 1.0).abs() < 1e-3, "{h1:?}");
    let h = hausdorff(&FreeConvexSet::ando(), &zero, &b).unwrap();
    assert!((h.lower - 2.0).abs() < 1e-3 && h.lower <= h.upper + 1e-9 && h.upper.is_finite(), "{h:?}");

    // the gap of the swept functional, recomputed: (1.1 - 1) h_W(T)(H)
    let s = FreeConvexSet::scale(1.1, &pauli()).unwrap();
    let h = hausdorff(&pauli(), &s, &b).unwrap();
    let f = h.lower_functional.clone().unwrap();
    let hs = support(&pauli(), &f, &b).unwrap().value;
    assert!((h.lower - 0.1 * hs).abs() < 1e-6 && h.lower >= 0.1 - 1e-3, "{} vs {}", h.lower, 0.1 * hs);
}

#[test]
fn plot_examples() {
    let poly = plot_level1(&pauli(), (0, 1), 720).unwrap();
    assert_eq!(poly.len(), 720);
    assert!(poly.iter().all(|(x, y)| (x.hypot(*y) - 1.0).abs() < 1e-3));

    let ando = plot_level1(&FreeConvexSet::ando(), (0, 1), 360).unwrap();
    assert!(ando.iter().all(|(x, y)| (x.hypot(*y) - 1.0).abs() < 1e-3));

    let doubled = plot_level1(&FreeConvexSet::scale(2.0, &pauli()).unwrap(), (0, 1), 720).unwrap();
    for (p, q) in poly.iter().zip(&doubled) {
        assert!((2.0 * p.0 - q.0).abs() < 1e-9 && (2.0 * p.1 - q.1).abs() < 1e-9);
    }

    // the polyline closes on its first vertex
    let back = parse_svg_polygon(&svg_polygon(&poly, 400.0));
    assert_eq!(back.len(), poly.len() + 1);
    assert_eq!(back.first(), back.last());
}

fn in_points(seed: u64) -> Vec<MatrixTuple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..6)
        .map(|i| {
            let m = 1 + i % 3;
            let phi = random_unital_choi(&mut rng, 2, m);
            phi.apply_tuple(&pauli_pair()).unwrap().scaled(rng.gen_range(0.3..1.0))
        })
        .collect()
}

#[test]
fn in_verdicts_respect_every_support() {
    let b = Budget::quick();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for x in in_points(5) {
        let v = membership(&pauli(), &x, &b).unwrap();
        assert!(v.is_in(), "{:?}", v.verdict);
        for _ in 0..50 {
            let h = SupportFunctional::random(&mut rng, 2, x.n(), true);
            let s = support(&pauli(), &h, &b).unwrap();
            assert!(h.pair(x.entries()) <= s.upper + 1e-6);
        }
    }
}

#[test]
fn ucp_images_of_members_stay_in() {
    let b = Budget::quick();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sets = [pauli(), FreeConvexSet::free_spectrahedron(pauli_pair().scaled(0.5)), FreeConvexSet::contraction_set()];
    for set in &sets {
        let pts: Vec<MatrixTuple> = if set.d() == 2 {
            in_points(13).into_iter().map(|x| x.scaled(0.5)).collect()
        } else {
            (1..4).map(|m| MatrixTuple::new(vec![freeconvex::linalg::haar_unitary(&mut rng, m) * c(0.9, 0.0)]).unwrap()).collect()
        };
        for x in pts {
            if !membership(set, &x, &b).unwrap().is_in() {
                continue;
            }
            for _ in 0..10 {
                let m2 = rng.gen_range(1..4);
                let y = random_unital_choi(&mut rng, x.n(), m2).apply_tuple(&x).unwrap();
                assert!(!membership(set, &y, &b).unwrap().is_out());
            }
        }
    }
}

#[test]
fn swept_scale_grows_with_the_level_cap() {
    let fs = FreeConvexSet::free_spectrahedron(pauli_pair());
    let mut last = 0.0;
    for cap in 1..=3 {
        let b = Budget { level_cap: cap, ..Budget::quick() };
        let s = inclusion_scale(&fs, &pauli(), &b).unwrap();
        assert!(s.lower >= last - 1e-9, "cap {cap}: {} < {last}", s.lower);
        last = s.lower;
    }
}

#[test]
fn hausdorff_respects_scaling_sandwiches() {
    let b = Budget::quick();
    let base = pauli();
    let m = metric_radius(&base).unwrap();
    for r in [1.05, 1.3, 2.0] {
        // (1/r) D ⊆ C ⊆ D for C = W(T), D = r W(T)
        let d = FreeConvexSet::scale(r, &base).unwrap();
        let h = hausdorff(&base, &d, &b).unwrap();
        let bound = dist_from_scaling(1.0 / r, 1.0, m * r).unwrap();
        assert!(h.upper <= bound + 1e-6 && h.lower <= h.upper + 1e-9, "r = {r}: {h:?} vs {bound}");
    }
}
