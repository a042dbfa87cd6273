use freeconvex::linalg::{eye, hermitian_spectrum, random_hermitian, random_unital_choi, CMat, MatrixTuple};
use freeconvex::sdp::{
    farkas_check, feasibility_margin, solve, ConicProgram, Constraint, Model, Sense, Status, SymEntry,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `tr X = t` on one real block of side `n`.
fn trace_program(n: usize, t: f64, sense: Sense) -> ConicProgram {
    let mut p = ConicProgram::new(vec![n], 0, sense);
    p.constraints.push(Constraint { free: vec![], entries: (0..n).map(|i| (0, SymEntry::new(i, i, 1.0))).collect(), rhs: t });
    p
}

#[test]
fn minimizes_weighted_trace_at_a_vertex() {
    let mut p = trace_program(2, 1.0, Sense::Minimize);
    p.objective = vec![(0, SymEntry::new(0, 0, 1.0)), (0, SymEntry::new(1, 1, 2.0))];
    let r = solve(&p).unwrap();
    assert_eq!(r.status, Status::Optimal);
    assert!((r.value - 1.0).abs() < 1e-7, "{}", r.value);
    assert!((r.primal[0][(0, 0)] - 1.0).abs() < 1e-6);
}

#[test]
fn negative_trace_is_infeasible_with_a_farkas_ray() {
    let p = trace_program(3, -1.0, Sense::Feasibility);
    let r = solve(&p).unwrap();
    assert_eq!(r.status, Status::Infeasible);
    // b'y = 1 with A*y <= 0 is impossible for any X >= 0
    let (bty, lmax, _) = farkas_check(&p, r.farkas.as_ref().unwrap());
    assert!(bty > 1e-8 && lmax <= 1e-9, "b'y = {bty}, lambda_max(A*y) = {lmax}");
}

#[test]
fn margin_of_the_density_matrices_is_one_over_n() {
    let m = feasibility_margin(&trace_program(3, 1.0, Sense::Feasibility), 1.0).unwrap();
    assert_eq!(m.status, Status::Optimal);
    assert!((m.margin - 1.0 / 3.0).abs() < 1e-7, "{}", m.margin);
    assert!((&m.witness[0] - nalgebra::DMatrix::identity(3, 3) / 3.0).norm() < 1e-6);
    assert!(!m.boundary);
}

#[test]
fn zero_trace_sits_on_the_boundary() {
    let m = feasibility_margin(&trace_program(2, 0.0, Sense::Feasibility), 1.0).unwrap();
    assert!(m.margin.abs() < 1e-7 && m.boundary, "{}", m.margin);
}

#[test]
fn ucp_image_of_a_strictly_positive_map_has_positive_margin() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let t: Vec<CMat> = (0..2).map(|_| freeconvex::linalg::random_complex(&mut rng, 3, 3)).collect();
    let phi = random_unital_choi(&mut rng, 3, 2);
    let x = MatrixTuple::new(t.iter().map(|a| phi.apply(a).unwrap()).collect()).unwrap();

    // J >= 0 on C^3 ⊗ C^2, tr_in J = I, phi(T_j) = X_j
    let mut model = Model::new();
    let j = model.herm_psd(6);
    let je = j.expr();
    model.eq_matrix(&je.contract_input(3, &eye(3)), &eye(2), true);
    for (a, xa) in t.iter().zip(x.entries()) {
        model.eq_matrix(&je.contract_input(3, a), xa, false);
    }
    let m = feasibility_margin(&model.program(), 1.0).unwrap();
    assert_eq!(m.status, Status::Optimal);
    assert!(m.margin > 1e-4, "{}", m.margin);
}

#[test]
fn modeling_layer_matches_eigensolver() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = random_hermitian(&mut rng, 3);
    let mut model = Model::new();
    let x = model.herm_psd(3);
    model.eq(&x.expr().trace_re(), 1.0);
    model.maximize(&x.expr().re_trace_with(&a));
    let sol = model.solve().unwrap();
    let top = *hermitian_spectrum(&a).unwrap().last().unwrap();
    assert!((sol.value() - top).abs() < 1e-7, "{} vs {top}", sol.value());
}

#[test]
fn identical_programs_solve_identically() {
    let mut p = trace_program(4, 1.0, Sense::Maximize);
    p.objective = vec![(0, SymEntry::new(0, 1, 0.7)), (0, SymEntry::new(2, 2, 0.3)), (0, SymEntry::new(1, 3, -0.4))];
    let (a, b) = (solve(&p).unwrap(), solve(&p).unwrap());
    assert_eq!(a.status, b.status);
    assert!((a.value - b.value).abs() <= 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// max tr(A X) over density matrices is lambda_max(A); weak duality holds.
    #[test]
    fn density_matrix_maximum_is_top_eigenvalue(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_hermitian(&mut rng, n);
        let mut p = trace_program(2 * n, 1.0, Sense::Maximize);
        // realified: X_R = [[Re X, -Im X], [Im X, Re X]] pairs with A_R / 2 to give Re tr(A X)
        for i in 0..n {
            for j in i..n {
                let z = a[(i, j)];
                let s = 0.5;
                p.objective.push((0, SymEntry::new(i, j, s * z.re)));
                p.objective.push((0, SymEntry::new(n + i, n + j, s * z.re)));
                if i != j {
                    p.objective.push((0, SymEntry::new(n + i, j, s * z.im)));
                    p.objective.push((0, SymEntry::new(i, n + j, -s * z.im)));
                }
            }
        }
        p.trace_bounds = vec![Some(2.0)];
        let r = solve(&p).unwrap();
        prop_assert_eq!(r.status, Status::Optimal);
        let top = *hermitian_spectrum(&a).unwrap().last().unwrap();
        // tr X_R = 2 tr X, so the complex density matrix has trace 1/2
        prop_assert!((r.value - top / 2.0).abs() < 1e-6, "{} vs {}", r.value, top / 2.0);
        let bound = r.certified_bound(&p).unwrap();
        prop_assert!(bound >= r.value - 1e-7);
    }
}
