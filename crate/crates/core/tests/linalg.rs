use freeconvex::linalg::{
    c, eye, from_selfadjoint_coordinates, hermitian_spectrum, kron, op_norm, partial_trace, random_complex, random_hermitian,
    random_unital_choi, re_tensor_pencil, selfadjoint_coordinates, trace, tuple_metric, Factor, MatrixTuple,
};
use freeconvex::oracles::membership;
use freeconvex::sets::FreeConvexSet;
use freeconvex::Budget;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kron_spectrum_is_products(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
        let mut r = rng(seed);
        let (a, b) = (random_hermitian(&mut r, n), random_hermitian(&mut r, m));
        let mut want: Vec<f64> = hermitian_spectrum(&a).unwrap().iter()
            .flat_map(|x| hermitian_spectrum(&b).unwrap().into_iter().map(move |y| x * y)).collect();
        want.sort_by(f64::total_cmp);
        let got = hermitian_spectrum(&kron(&a, &b)).unwrap();
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-10);
        }
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
        let mut r = rng(seed);
        let (a, b) = (random_complex(&mut r, n, n), random_complex(&mut r, m, m));
        let pt = partial_trace(&kron(&a, &b), Factor::Input, (n, m)).unwrap();
        prop_assert!((pt - &b * trace(&a)).norm() < 1e-12 * (1.0 + a.norm() * b.norm()));
    }

    #[test]
    fn partial_trace_preserves_trace(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, n * m);
        // direct summation over the diagonal
        let direct: f64 = (0..n * m).map(|i| h[(i, i)].re).sum();
        let pt = partial_trace(&h, Factor::Input, (n, m)).unwrap();
        prop_assert!((trace(&pt).re - direct).abs() < 1e-12 * (1.0 + h.norm()));
    }

    /// <phi(A), H> = <J, A^T ⊗ H> (real trace pairing)
    #[test]
    fn choi_trace_duality(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
        let mut r = rng(seed);
        let j = random_unital_choi(&mut r, n, m);
        let a = random_complex(&mut r, n, n);
        let h = random_complex(&mut r, m, m);
        let lhs = trace(&(j.apply(&a).unwrap() * &h));
        let rhs = trace(&(&j.block * kron(&a.transpose(), &h)));
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn unital_choi_fixes_identity(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
        let j = random_unital_choi(&mut rng(seed), n, m);
        prop_assert!((j.apply(&eye(n)).unwrap() - eye(m)).norm() < 1e-10);
    }

    #[test]
    fn selfadjoint_coordinates_roundtrip(seed in any::<u64>(), n in 1usize..4, d in 1usize..3) {
        let mut r = rng(seed);
        let t = MatrixTuple::new((0..d).map(|_| random_complex(&mut r, n, n)).collect()).unwrap();
        let back = from_selfadjoint_coordinates(&selfadjoint_coordinates(&t)).unwrap();
        prop_assert!(tuple_metric(&t, &back).unwrap() < 1e-14 * (1.0 + t.max_abs()) * 4.0);
    }

    #[test]
    fn pencil_is_real_linear(seed in any::<u64>(), s in -3.0f64..3.0) {
        let mut r = rng(seed);
        let x = MatrixTuple::new(vec![random_complex(&mut r, 2, 2)]).unwrap();
        let a = MatrixTuple::new(vec![random_complex(&mut r, 3, 3)]).unwrap();
        let p1 = re_tensor_pencil(&x.scaled(s), &a).unwrap();
        let p0 = re_tensor_pencil(&x, &a).unwrap() * c(s, 0.0);
        prop_assert!((p1 - p0).norm() < 1e-12 * (1.0 + s.abs()) * 10.0);
    }

    #[test]
    fn tuple_metric_is_a_metric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mk = |r: &mut ChaCha8Rng| MatrixTuple::new((0..2).map(|_| random_complex(r, 3, 3)).collect()).unwrap();
        let (a, b, z) = (mk(&mut r), mk(&mut r), mk(&mut r));
        let (ab, bz, az) = (tuple_metric(&a, &b).unwrap(), tuple_metric(&b, &z).unwrap(), tuple_metric(&a, &z).unwrap());
        prop_assert!(az <= ab + bz + 1e-12);
        prop_assert!((ab - tuple_metric(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(tuple_metric(&a, &a).unwrap() == 0.0);
    }
}

#[test]
fn metric_examples() {
    let e12 = freeconvex::linalg::unit(2, 0, 1) * c(2.0, 0.0);
    let t = MatrixTuple::new(vec![e12.clone()]).unwrap();
    assert_eq!(tuple_metric(&t, &MatrixTuple::zero(1, 2, false)).unwrap(), op_norm(&e12));
    assert!((op_norm(&e12) - 2.0).abs() < 1e-14);
}

/// Verdicts computed in complex and in selfadjoint coordinates agree.
#[test]
fn coordinate_systems_give_equal_verdicts() {
    let b = Budget::quick();
    let mut r = rng(3);
    let t = MatrixTuple::new(vec![random_complex(&mut r, 3, 3)]).unwrap();
    let t = t.map(|a| a - eye(3) * (trace(a) / c(3.0, 0.0)));
    let set = FreeConvexSet::matrix_range(t.clone());
    let set_sa = FreeConvexSet::matrix_range(selfadjoint_coordinates(&t));
    let mut decided = 0;
    for i in 0..20 {
        let m = 1 + i % 2;
        let x = MatrixTuple::new(vec![random_complex(&mut r, m, m) * c(0.3 + 0.1 * (i % 8) as f64, 0.0)]).unwrap();
        let (v, w) = (membership(&set, &x, &b).unwrap(), membership(&set_sa, &selfadjoint_coordinates(&x), &b).unwrap());
        assert!(!(v.is_in() && w.is_out()) && !(v.is_out() && w.is_in()), "point {i}: {:?} vs {:?}", v.verdict, w.verdict);
        if v.verdict == w.verdict && (v.is_in() || v.is_out()) {
            decided += 1;
        }
    }
    assert!(decided >= 15, "only {decided} of 20 decided identically");
}

#[test]
fn spectrum_examples() {
    assert_eq!(hermitian_spectrum(&eye(3)).unwrap(), vec![1.0, 1.0, 1.0]);
    let s = hermitian_spectrum(&freeconvex::linalg::pauli_x()).unwrap();
    assert!((s[0] + 1.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14);
}
