use freeconvex::kcert::{
    max_membership_certify, max_membership_refute, min_membership, min_membership_inner, min_membership_outer, ucp_image_feasible,
    verify_kwitness, CertifyResult, InnerResult, UcpImage,
};
use freeconvex::linalg::{c, direct_sum, pauli_z, random_complex, random_unital_choi, tuple_metric, CMat, MatrixTuple};
use freeconvex::oracles::{membership, support, SupportFunctional, Verdict};
use freeconvex::sets::catalog::{matrix_units_pair, pauli_pair};
use freeconvex::sets::FreeConvexSet;
use freeconvex::{Budget, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sz() -> MatrixTuple {
    MatrixTuple::selfadjoint(vec![pauli_z()]).unwrap()
}

fn pauli() -> FreeConvexSet {
    FreeConvexSet::matrix_range(pauli_pair())
}

#[test]
fn ucp_image_examples() {
    let b = Budget::quick();
    let t = pauli_pair();
    match ucp_image_feasible(&t, &t, &b).unwrap() {
        UcpImage::Feasible(j) => {
            let img = j.apply_tuple(&t).unwrap();
            assert!(tuple_metric(&img, &t).unwrap() < 1e-6 && j.unitality_defect() < 1e-7);
        }
        other => panic!("{other:?}"),
    }
    // 2E12 at level two: a boundary point of numerical radius 1
    let a = freeconvex::sets::ando_tuple();
    assert!(matches!(ucp_image_feasible(&a, &a, &b).unwrap(), UcpImage::Feasible(_)));

    match ucp_image_feasible(&sz(), &sz().scaled(2.0), &b).unwrap() {
        UcpImage::Infeasible(v) => {
            let freeconvex::oracles::Certificate::Separator(sep) = &v.certificate else { panic!("{:?}", v.certificate) };
            let up = support(&FreeConvexSet::matrix_range(sz()), &sep.functional, &b).unwrap().upper;
            assert!(sep.functional.pair(sz().scaled(2.0).entries()) > up + 1e-6);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn inner_decompositions() {
    let b = Budget::quick();
    let tol = Tolerances::default();
    // a level-one point of the disk repeated twice
    let x1 = MatrixTuple::selfadjoint(vec![CMat::from_element(1, 1, c(0.3, 0.0)), CMat::from_element(1, 1, c(-0.4, 0.0))]).unwrap();
    let x = x1.direct_sum(&x1).unwrap();
    let InnerResult::Found(d) = min_membership_inner(&pauli(), 1, &x, &b, &tol).unwrap() else { panic!("direct sum not found") };
    let (iso, rec) = d.residuals(&x);
    assert!(iso < 1e-8 && rec < 1e-6, "{iso} {rec}");

    // the commuting dilation threshold of (σx, σz) over the disk is 2, not sqrt 2
    let x = pauli_pair().scaled(1.0 / 2.01);
    let InnerResult::Found(d) = min_membership_inner(&pauli(), 1, &x, &b, &tol).unwrap() else { panic!("scale 2.01 not found") };
    let (iso, rec) = d.residuals(&x);
    assert!(iso < 1e-8 && rec < 1e-6);

    for r in [1.2, std::f64::consts::SQRT_2, 1.99] {
        let x = pauli_pair().scaled(1.0 / r);
        assert!(matches!(min_membership_inner(&pauli(), 1, &x, &b, &tol).unwrap(), InnerResult::NotFound { .. }));
        let (w, _) = min_membership_outer(&pauli(), 1, &x, &tol).unwrap();
        let w = w.unwrap_or_else(|| panic!("no outer refutation at {r}"));
        assert!(verify_kwitness(&pauli(), &w, &x, &tol).unwrap());
    }
}

#[test]
fn outer_refutes_the_generators() {
    let tol = Tolerances::default();
    let (w, _) = min_membership_outer(&pauli(), 1, &pauli_pair(), &tol).unwrap();
    assert!(w.is_some_and(|w| w.violation() > 1e-6));
    // k >= n: the relaxation is the range itself
    let (w, _) = min_membership_outer(&pauli(), 2, &pauli_pair(), &tol).unwrap();
    assert!(w.is_none());
}

#[test]
fn max_envelope_refutations() {
    let b = Budget::quick();
    let tol = Tolerances::default();
    let base = FreeConvexSet::matrix_range(sz());
    let x = sz().scaled(1.5);
    let v = max_membership_refute(&base, 1, &x, &b, &tol).unwrap().expect("refuted");
    assert_eq!(v.verdict, Verdict::Out);

    let inside = MatrixTuple::selfadjoint(vec![direct_sum(&pauli_z(), &(pauli_z() * c(0.5, 0.0)))]).unwrap();
    assert!(max_membership_refute(&base, 1, &inside, &b, &tol).unwrap().is_none());

    let units = FreeConvexSet::matrix_range(matrix_units_pair());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for m in 2..4 {
        let img = random_unital_choi(&mut rng, 4, m).apply_tuple(&matrix_units_pair()).unwrap();
        assert!(max_membership_refute(&units, 1, &img, &b, &tol).unwrap().is_none());
    }
}

#[test]
fn max_envelope_certificates() {
    let b = Budget::quick();
    let tol = Tolerances::default();
    let base = FreeConvexSet::matrix_range(sz());
    let gens = MatrixTuple::selfadjoint(vec![direct_sum(&pauli_z(), &pauli_z())]).unwrap();
    for x in [gens, MatrixTuple::zero(1, 3, true), MatrixTuple::selfadjoint(vec![direct_sum(&pauli_z(), &(pauli_z() * c(0.9, 0.0)))]).unwrap()] {
        assert!(matches!(max_membership_certify(&base, 1, &x, &b, &tol).unwrap(), CertifyResult::In(_)));
    }
}

/// Choi space 2⊗2 with k = 1: the partial transpose decides, so inner and
/// outer never leave a gap.
#[test]
fn small_choi_spaces_are_decided() {
    let b = Budget::quick();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    let mut undecided = Vec::new();
    for i in 0..50 {
        let t = MatrixTuple::selfadjoint((0..2).map(|_| freeconvex::linalg::random_hermitian(&mut rng, 2)).collect()).unwrap();
        let t = t.map(|a| a - CMat::identity(2, 2) * (a.trace() / c(2.0, 0.0)));
        let base = FreeConvexSet::matrix_range(t.clone());
        let x = random_unital_choi(&mut rng, 2, 2).apply_tuple(&t).unwrap().scaled(rng.gen_range(0.5..1.0));
        let v = min_membership(&base, 1, &x, &b, &tol).unwrap();
        if v.verdict == Verdict::Undecided {
            undecided.push(i);
        }
    }
    assert!(undecided.is_empty(), "undecided instances {undecided:?}");
}

/// Levels at most k see the base itself.
#[test]
fn low_levels_reduce_to_the_base() {
    let b = Budget::quick();
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let base = FreeConvexSet::matrix_range(matrix_units_pair());
    let (mn, mx) = (FreeConvexSet::min_over(2, &base).unwrap(), FreeConvexSet::max_over(2, &base).unwrap());
    for i in 0..20 {
        let m = 1 + i % 2;
        let x = MatrixTuple::new((0..2).map(|_| random_complex(&mut rng, m, m)).collect()).unwrap();
        let x = x.scaled(rng.gen_range(0.1..1.2) / x.max_abs());
        let v = membership(&base, &x, &b).unwrap().verdict;
        assert_eq!(membership(&mn, &x, &b).unwrap().verdict, v);
        assert_eq!(membership(&mx, &x, &b).unwrap().verdict, v);
    }
}

/// Along X / r, inner success is upward closed and outer refutation downward closed.
#[test]
fn inner_and_outer_sandwich_the_scale() {
    let b = Budget::quick();
    let tol = Tolerances::default();
    let x = pauli_pair();
    let rs = [1.0, 1.2, 1.5, 1.9, 1.99, 2.01, 2.1, 2.5];
    let verdicts: Vec<Verdict> = rs.iter().map(|r| min_membership(&pauli(), 1, &x.scaled(1.0 / r), &b, &tol).unwrap().verdict).collect();
    let first_in = verdicts.iter().position(|v| *v == Verdict::In).expect("some scale is inside");
    let last_out = verdicts.iter().rposition(|v| *v == Verdict::Out).expect("some scale is outside");
    assert!(last_out < first_in, "{verdicts:?}");
    assert!(verdicts[first_in..].iter().all(|v| *v == Verdict::In));
    assert!(verdicts[..=last_out].iter().all(|v| *v == Verdict::Out));
    // the true boundary is 2
    assert!(rs[last_out] < 2.0 && rs[first_in] > 2.0);
    println!("gap [{}, {}]", rs[last_out], rs[first_in]);
}

#[test]
fn separator_functionals_have_unit_dual_norm() {
    let tol = Tolerances::default();
    let (w, _) = min_membership_outer(&pauli(), 1, &pauli_pair(), &tol).unwrap();
    let w = w.unwrap();
    assert!((w.functional.dual_norm() - 1.0).abs() < 1e-9);
    let _ = SupportFunctional::new(w.functional.entries.clone()).unwrap();
}
