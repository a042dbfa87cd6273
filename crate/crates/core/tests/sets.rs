use freeconvex::kcert::{max_membership, min_membership};
use freeconvex::linalg::{c, eye, lambda_max, pauli_x, pauli_z, random_complex, random_hermitian, unit, CMat, MatrixTuple};
use freeconvex::oracles::{level1_support, membership, MembershipVerdict};
use freeconvex::sets::catalog::catalog;
use freeconvex::sets::{ando_tuple, box_sum, geometry, recoordinatize, FreeConvexSet, Node, Primitive};
use freeconvex::{Budget, Tolerances};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn contradicts(a: &MembershipVerdict, b: &MembershipVerdict) -> bool {
    (a.is_in() && b.is_out()) || (a.is_out() && b.is_in())
}

fn traceless(m: CMat) -> CMat {
    let n = m.nrows();
    let t = m.trace() / c(n as f64, 0.0);
    m - eye(n) * t
}

fn random_range<R: Rng>(rng: &mut R, n: usize, d: usize, sa: bool) -> MatrixTuple {
    let ents = (0..d).map(|_| traceless(if sa { random_hermitian(rng, n) } else { random_complex(rng, n, n) })).collect();
    if sa {
        MatrixTuple::selfadjoint(ents).unwrap()
    } else {
        MatrixTuple::new(ents).unwrap()
    }
}

fn random_points(seed: u64, d: usize, count: usize, scale: f64) -> Vec<MatrixTuple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let m = 1 + i % 3;
            let s = scale * rng.gen_range(0.2..1.6);
            let t = MatrixTuple::new((0..d).map(|_| random_complex(&mut rng, m, m)).collect()).unwrap();
            t.scaled(s / t.max_abs().max(1e-12))
        })
        .collect()
}

#[test]
fn polar_of_ando_is_the_contraction_set() {
    let p = FreeConvexSet::ando().polar().unwrap();
    assert!(matches!(p.node(), Node::Primitive(Primitive::ContractionSet)));
    assert_eq!(p.polar().unwrap(), FreeConvexSet::ando());
}

/// Each rewrite against the unrewritten representation, on 20 points at levels <= 3.
#[test]
fn rewrites_preserve_verdicts() {
    let b = Budget::quick();
    let tol = Tolerances::default();
    let ando = FreeConvexSet::ando();
    let fs = FreeConvexSet::free_spectrahedron(ando_tuple());
    let cs = FreeConvexSet::contraction_set();
    let t = MatrixTuple::new(vec![unit(3, 0, 1) + unit(3, 1, 2) * c(0.5, 0.3)]).unwrap();
    let scaled = FreeConvexSet::scale(2.0, &FreeConvexSet::matrix_range(t.clone())).unwrap();
    let direct = FreeConvexSet::matrix_range(t.scaled(2.0));
    let mut decided = 0;
    for x in random_points(17, 1, 20, 1.5) {
        let pairs = [
            // polar(W(2E12)) = D_{2E12} is recognized as the contraction set
            (membership(&fs, &x, &b).unwrap(), membership(&cs, &x, &b).unwrap()),
            // MinOver(1, W(2E12)) collapses to the contraction set
            (min_membership(&ando, 1, &x, &b, &tol).unwrap(), membership(&cs, &x, &b).unwrap()),
            // MaxOver(1, W(2E12)) collapses to W(2E12)
            (max_membership(&ando, 1, &x, &b, &tol).unwrap(), membership(&ando, &x, &b).unwrap()),
            (membership(&scaled, &x, &b).unwrap(), membership(&direct, &x, &b).unwrap()),
        ];
        for (i, (u, v)) in pairs.iter().enumerate() {
            assert!(!contradicts(u, v), "rewrite {i}: {:?} vs {:?} at level {}", u.verdict, v.verdict, x.n());
            decided += usize::from(u.verdict == v.verdict);
        }
    }
    assert!(decided >= 60, "{decided} of 80 pairs agree");
}

/// MinOver(k, S) and MinOver(k, MaxOver(k, S)) see the same level k.
#[test]
fn min_envelope_depends_only_on_level_k() {
    let b = Budget::quick();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let s = FreeConvexSet::matrix_range(random_range(&mut rng, 3, 1, false));
    let smax = FreeConvexSet::max_over(1, &s).unwrap();
    for x in random_points(29, 1, 20, geometry(&s).unwrap().bounding_radius) {
        let (u, v) = (min_membership(&s, 1, &x, &b, &tol).unwrap(), min_membership(&smax, 1, &x, &b, &tol).unwrap());
        assert!(!contradicts(&u, &v), "{:?} vs {:?}", u.verdict, v.verdict);
    }
}

#[test]
fn envelope_flags_on_examples() {
    let diag = MatrixTuple::new(vec![CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-0.5, 0.8), c(-0.5, -0.8)]))]).unwrap();
    let w = FreeConvexSet::matrix_range(diag);
    assert_eq!(FreeConvexSet::min_over(1, &w).unwrap(), w);
    let a = FreeConvexSet::ando();
    assert_eq!(FreeConvexSet::max_over(1, &a).unwrap(), a);
    assert_eq!(FreeConvexSet::scale(2.0, &FreeConvexSet::scale(0.5, &a).unwrap()).unwrap(), a);
}

#[test]
fn box_sum_examples() {
    let t = ando_tuple();
    let bs = box_sum(&t, &t).unwrap();
    assert_eq!((bs.d(), bs.n()), (2, 4));
    assert_eq!(bs.get(0)[(0, 1)], c(2.0, 0.0));
    assert_eq!(bs.get(1)[(2, 3)], c(2.0, 0.0));
    assert_eq!(bs.get(0).iter().filter(|z| z.norm() > 0.0).count() + bs.get(1).iter().filter(|z| z.norm() > 0.0).count(), 2);
    // against a 1x1 zero tuple: T padded by a zero row and column
    let z = MatrixTuple::zero(1, 1, false);
    let p = box_sum(&t, &z).unwrap();
    assert_eq!(p.n(), 3);
    assert_eq!(p.get(0).view((0, 0), (2, 2)).into_owned(), *t.get(0));
    let h = FreeConvexSet::hull_product(&FreeConvexSet::ando(), &FreeConvexSet::ando()).unwrap();
    assert_eq!(h, FreeConvexSet::matrix_range(bs));
    let u = catalog("free_unitaries", Some(2)).unwrap().set;
    assert!(matches!(u.node(), Node::CartesianProduct(_, _)));
}

/// Level one of W(T ⊞ R) is conv(C_1 x {0} ∪ {0} x D_1): support is the max of
/// the component supports, each computed as a top eigenvalue.
#[test]
fn box_sum_level_one_is_the_hull() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let (t, r) = (random_range(&mut rng, 2, 1, false), random_range(&mut rng, 2, 1, false));
        let w = FreeConvexSet::matrix_range(box_sum(&t, &r).unwrap());
        let u: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // real coordinates (Re, Im) per complex slot: h(u) = lambda_max(Re(conj(a) T))
        let top = |m: &CMat, a: f64, b: f64| lambda_max(&freeconvex::linalg::herm(&(m * c(a, -b))));
        let want = top(t.get(0), u[0], u[1]).max(top(r.get(0), u[2], u[3])).max(0.0);
        let got = level1_support(&w, &u).unwrap();
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
}

#[test]
fn cartesian_membership_is_conjunction() {
    let b = Budget::quick();
    let (a, cs) = (FreeConvexSet::ando(), FreeConvexSet::contraction_set());
    let prod = FreeConvexSet::cartesian_product(&a, &cs).unwrap();
    for x in random_points(41, 2, 20, 1.8) {
        let (x1, x2) = prod.split_point(&x).unwrap();
        let (v, v1, v2) = (membership(&prod, &x, &b).unwrap(), membership(&a, &x1, &b).unwrap(), membership(&cs, &x2, &b).unwrap());
        if v1.is_in() && v2.is_in() {
            assert!(!v.is_out());
        }
        if v1.is_out() || v2.is_out() {
            assert!(!v.is_in());
        }
        if v.is_in() {
            assert!(!v1.is_out() && !v2.is_out());
        }
    }
}

#[test]
fn geometry_examples() {
    let g = geometry(&FreeConvexSet::ando()).unwrap();
    assert!((g.inner_radius - 1.0).abs() < 0.01 && (g.bounding_radius - 1.0).abs() < 0.01, "{g:?}");
    let s = FreeConvexSet::scale(3.0, &FreeConvexSet::ando()).unwrap();
    let g3 = geometry(&s).unwrap();
    assert!((g3.inner_radius - 3.0 * g.inner_radius).abs() < 1e-6 && (g3.bounding_radius - 3.0 * g.bounding_radius).abs() < 1e-6);
}

#[test]
fn recoordinatize_examples() {
    let shifted = MatrixTuple::selfadjoint(vec![pauli_x() + eye(2) * c(2.0, 0.0)]).unwrap();
    let r = recoordinatize(&shifted).unwrap();
    assert!((r.center[0] - 2.0).abs() < 1e-12);
    let s = freeconvex::linalg::hermitian_spectrum(r.tuple.get(0)).unwrap();
    let scale = r.map[(0, 0)].abs();
    assert!((s[0] + scale).abs() < 1e-12 && (s[1] - scale).abs() < 1e-12);

    let point = MatrixTuple::selfadjoint(vec![eye(2)]).unwrap();
    match recoordinatize(&point) {
        Ok(r) => assert_eq!(r.reduced_dim, 0),
        Err(e) => assert!(e.to_string().contains("degenerate") || e.to_string().contains("point"), "{e}"),
    }

    let pair = catalog("matrix_units_pair", None).unwrap().tuple.unwrap();
    let r = recoordinatize(&pair).unwrap();
    assert_eq!(r.reduced_dim, r.original_dim);
    assert!(r.center.iter().all(|x| x.abs() < 1e-12));
    let _ = pauli_z();
}

fn random_set(seed: u64, shape: u8) -> FreeConvexSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sa = shape % 2 == 0;
    let n = 2 + (seed % 2) as usize;
    let t = random_range(&mut rng, n, 1 + (shape % 2) as usize, sa);
    match shape % 5 {
        0 => FreeConvexSet::matrix_range(t),
        1 => FreeConvexSet::free_spectrahedron(t),
        2 => FreeConvexSet::scale(1.7, &FreeConvexSet::matrix_range(t)).unwrap(),
        3 => FreeConvexSet::min_over(1, &FreeConvexSet::matrix_range(t)).unwrap(),
        _ => FreeConvexSet::cartesian_product(&FreeConvexSet::matrix_range(t.clone()), &FreeConvexSet::free_spectrahedron(t)).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn polar_is_an_involution(seed in any::<u64>(), shape in 0u8..10) {
        let s = random_set(seed, shape);
        let p = s.polar_unchecked().unwrap();
        prop_assert_eq!(p.polar_unchecked().unwrap(), s);
        prop_assert_eq!(p.d(), p.polar_unchecked().unwrap().d());
    }

    #[test]
    fn products_concatenate_coordinates(seed in any::<u64>()) {
        let (a, b) = (random_set(seed, 0), random_set(seed.wrapping_add(1), 2));
        prop_assert_eq!(FreeConvexSet::cartesian_product(&a, &b).unwrap().d(), a.d() + b.d());
        prop_assert_eq!(FreeConvexSet::hull_product(&a, &b).unwrap().d(), a.d() + b.d());
    }
}
