use freeconvex::constants::{
    alpha, beta, constants, dist_from_scaling, gamma, gamma_pipelines, limit_profile, scaling_from_dist, verify_constant_bounds,
    witness_tuple_upper, ConstantName,
};
use freeconvex::linalg::{c, random_complex, CMat, MatrixTuple};
use freeconvex::sets::catalog::{catalog, matrix_units_pair, pauli_pair};
use freeconvex::sets::FreeConvexSet;
use freeconvex::Budget;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-6;

fn traceless(t: MatrixTuple) -> MatrixTuple {
    t.map(|a| {
        let n = a.nrows();
        a - CMat::identity(n, n) * (a.trace() / c(n as f64, 0.0))
    })
}

#[test]
fn beta_examples() {
    let b = Budget::quick();
    let cs = beta(&FreeConvexSet::contraction_set(), 1, &b).unwrap();
    assert!(cs.lower >= 1.0 - 1e-9 && cs.upper <= 1.0 + TOL, "{cs:?}");

    let ando = beta(&FreeConvexSet::ando(), 1, &b).unwrap();
    assert!(ando.lower >= 1.95 && ando.upper <= 2.05, "[{}, {}]", ando.lower, ando.upper);
    assert!(verify_constant_bounds(&FreeConvexSet::ando(), 1, &ando, &b).unwrap().ok);

    // commuting normal: W(T) is its own minimal envelope
    let diag = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-0.5, 0.8), c(-0.5, -0.8)]));
    let w = FreeConvexSet::matrix_range(MatrixTuple::new(vec![diag]).unwrap());
    for k in 1..=2 {
        let r = beta(&w, k, &b).unwrap();
        assert!(r.upper <= 1.0 + TOL, "k = {k}: {r:?}");
    }
}

#[test]
fn gamma_examples() {
    let b = Budget::quick();
    let g = gamma(&FreeConvexSet::ando(), 1, &b).unwrap();
    assert!(g.lower >= 1.0 - 1e-9 && g.upper <= 1.0 + TOL, "{g:?}");

    let units = FreeConvexSet::matrix_range(matrix_units_pair());
    let p = gamma_pipelines(&units, 1, &b).unwrap();
    assert!(p.agree, "direct {:?} dual {:?}", p.direct, p.dual);
    let dual = p.dual.as_ref().expect("polar pipeline");
    assert!(p.direct.lower <= dual.upper + 0.05 && dual.lower <= p.direct.upper + 0.05);
    println!("gamma_1(E12, E34) in [{:.6}, {:.6}]", p.merged.lower, p.merged.upper);

    // both sides scale, so gamma does not
    let s = FreeConvexSet::scale(3.0, &units).unwrap();
    let gs = gamma(&s, 1, &b).unwrap();
    assert!((gs.lower - p.merged.lower).abs() < 0.05, "{} vs {}", gs.lower, p.merged.lower);
    assert!(gs.upper <= p.merged.upper + 0.05 || !p.merged.upper.is_finite());
}

/// Over the disk the max and min envelopes differ by exactly 2 at level one.
#[test]
fn alpha_of_the_disk_envelopes() {
    let b = Budget::quick();
    let a = alpha(&FreeConvexSet::matrix_range(pauli_pair()), 1, &b).unwrap();
    assert!(a.lower >= std::f64::consts::SQRT_2 - 0.02, "{a:?}");
    assert!(a.lower <= 2.0 + TOL);
    println!("alpha_1 in [{:.6}, {:.6}]", a.lower, a.upper);

    // a commuting normal generator makes both envelopes equal to the set
    let diag = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-0.5, 0.8), c(-0.5, -0.8)]));
    let t = alpha(&FreeConvexSet::matrix_range(MatrixTuple::new(vec![diag]).unwrap()), 1, &b).unwrap();
    assert!(t.upper <= 1.0 + TOL, "{t:?}");
}

#[test]
fn sandwich_and_floor_on_random_tuples() {
    let b = Budget::quick();
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for _ in 0..10 {
        let t = traceless(MatrixTuple::new(vec![random_complex(&mut rng, 2, 2)]).unwrap());
        let cst = constants(&FreeConvexSet::matrix_range(t), 1, &b).unwrap();
        let (a, be, g) = (&cst.alpha, &cst.beta, &cst.gamma.merged);
        for x in [a, be, g] {
            assert!(x.lower >= 1.0 - 1e-9 && x.lower <= x.upper + TOL);
        }
        assert!(a.lower + TOL >= be.lower.max(g.lower));
        assert!(a.upper <= be.upper * g.upper * (1.0 + TOL));
    }
}

#[test]
fn profiles() {
    let b = Budget::quick();
    let p = limit_profile(&FreeConvexSet::contraction_set(), ConstantName::Beta, 3, &b).unwrap();
    assert!(p.consistent() && p.upper.iter().all(|u| *u <= 1.0 + TOL));

    let ando = FreeConvexSet::ando();
    let g = limit_profile(&ando, ConstantName::Gamma, 2, &b).unwrap();
    assert!(g.consistent() && g.upper.iter().all(|u| *u <= 1.0 + TOL));
    let be = limit_profile(&ando, ConstantName::Beta, 2, &b).unwrap();
    assert!(be.consistent() && be.lower[0] >= 1.95);

    let one = limit_profile(&ando, ConstantName::Beta, 1, &b).unwrap();
    assert_eq!(one.rows.len(), 1);
    assert_eq!(one.to_csv().lines().count(), 2);
    assert!(limit_profile(&ando, ConstantName::Beta, 0, &b).is_err());
}

#[test]
fn witness_tuples() {
    let b = Budget::quick();
    // C = W(A0) with A0 at level 2: the witness recovers C
    let w = witness_tuple_upper(&FreeConvexSet::ando(), 2, 8, &b).unwrap();
    assert!(w.scale >= 1.0 - 1e-9 && w.scale <= 1.2, "{}", w.scale);

    let pauli = FreeConvexSet::matrix_range(pauli_pair());
    let w2 = witness_tuple_upper(&pauli, 2, 8, &b).unwrap();
    assert!(w2.scale <= 1.0 + TOL, "{}", w2.scale);
    let w1 = witness_tuple_upper(&pauli, 1, 8, &b).unwrap();
    assert!(w1.scale >= w2.scale - TOL);
}

#[test]
fn conversion_closed_forms() {
    assert_eq!(dist_from_scaling(1.0, 1.0, 5.0).unwrap(), 0.0);
    assert!((scaling_from_dist(1e-12, 0.5, 3).unwrap() - 1.0).abs() < 1e-10);
    // C = [-1, 1], D = [-0.8, 0.8]
    let bound = dist_from_scaling(1.25, 1.25, 1.0).unwrap();
    assert!((bound - 0.25).abs() < 1e-15 && bound >= 0.2);
    assert!(scaling_from_dist(0.0, 1.0, 1).is_err() && dist_from_scaling(1.0, -1.0, 1.0).is_err());
}

/// beta of a hull product is the max of the factors, gamma of a cartesian product likewise.
#[test]
fn product_laws() {
    let b = Budget::quick();
    let (ando, cs) = (FreeConvexSet::ando(), FreeConvexSet::contraction_set());
    let hp = FreeConvexSet::hull_product(&ando, &ando).unwrap();
    let bh = beta(&hp, 1, &b).unwrap();
    let ba = beta(&ando, 1, &b).unwrap();
    assert!(bh.lower <= ba.upper + 0.05 && bh.upper + 0.05 >= ba.lower, "{bh:?} vs {ba:?}");

    let prod = FreeConvexSet::cartesian_product(&ando, &cs).unwrap();
    let gp = gamma(&prod, 1, &b).unwrap();
    let want = gamma(&ando, 1, &b).unwrap().lower.max(gamma(&cs, 1, &b).unwrap().lower);
    assert!(gp.lower <= want + 0.05 && gp.upper + 0.05 >= want, "{gp:?} vs {want}");

    let u = catalog("free_unitaries", Some(2)).unwrap().set;
    let bu = beta(&u, 1, &b).unwrap();
    assert!(bu.lower >= 1.0 - 1e-9 && bu.lower <= 2.0 + TOL);
}
