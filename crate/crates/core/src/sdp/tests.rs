use super::*;
use crate::gram::gram_map;
use crate::random::{random_psd, seeded};
use crate::scalar::{cre, cx, Cx};
use proptest::prelude::*;

type P = Polynomial<f64>;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn free_example() -> P {
    P::from_terms(
        Flavor::Free,
        2,
        [(Term::Word(vec![1, 0, 0, 1]), cre(1.0)), (Term::Word(vec![0, 1, 1, 0]), cre(1.0))],
    )
    .unwrap()
}

#[test]
fn p31_is_three() {
    let b = SquareBasis::new(Flavor::Commutative, 3, 1).unwrap();
    let r = sos_norm(&P::sum_of_monomial_squares(3, 1), &b, &opts()).unwrap();
    assert_eq!(r.solution.status, SdpStatus::Optimal);
    assert!((r.value - 3.0).abs() < 1e-6, "{}", r.value);
}

#[test]
fn free_example_is_two() {
    let b = SquareBasis::new(Flavor::Free, 2, 2).unwrap();
    let p = free_example();
    let r = sos_norm(&p, &b, &opts()).unwrap();
    assert_eq!(r.solution.status, SdpStatus::Optimal);
    assert!((r.value - 2.0).abs() < 1e-6, "{}", r.value);
    assert!((free_sos_norm_closed_form(&p, 2).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn optimal_solution_satisfies_status_invariants() {
    let b = SquareBasis::new(Flavor::Commutative, 3, 2).unwrap();
    let p = P::sum_of_monomial_squares(3, 2);
    let r = sos_norm(&p, &b, &opts()).unwrap();
    let s = &r.solution;
    assert_eq!(s.status, SdpStatus::Optimal);
    let c = build_constraints(&p, &b).unwrap();
    assert!(s.primal_residual <= 1e-7 * (1.0 + c.target_norm()));
    assert!(s.gap <= 1e-6 * (1.0 + s.objective.abs()));
    let lmin = eig_hermitian(&s.matrix).unwrap().min();
    assert!(lmin >= -1e-8 * (1.0 + s.matrix.max_abs_entry()));
    let back = gram_map(&s.matrix, &b).unwrap();
    assert!((&back - &p).coeff_two_norm() <= 1e-7 * (1.0 + p.coeff_two_norm()));
    // identity is feasible, so the optimum lies below its trace
    assert!(r.value <= 6.0 + 1e-6);
}

#[test]
fn rank_one_square_bounded_by_coefficient_norm() {
    let mut rng = seeded(4);
    let b = SquareBasis::new(Flavor::Commutative, 2, 2).unwrap();
    for _ in 0..5 {
        let c: Vec<Cx<f64>> = crate::random::random_vector(&mut rng, b.len());
        let m = HermitianMatrix::rank_one(&c);
        let p = gram_map(&m, &b).unwrap();
        let r = sos_norm(&p, &b, &opts()).unwrap();
        assert!(r.value <= m.trace() + 1e-6, "{} > {}", r.value, m.trace());
    }
}

#[test]
fn zero_has_zero_norm_and_bound() {
    let b = SquareBasis::new(Flavor::Commutative, 3, 1).unwrap();
    let z = P::zero(Flavor::Commutative, 3);
    assert_eq!(sos_norm(&z, &b, &opts()).unwrap().value, 0.0);
    assert_eq!(dual_bound(&z, &b, &opts()).unwrap().value, 0.0);
    match sos_feasible(&z, &b, &opts()).unwrap() {
        Feasibility::Feasible { witness } => assert_eq!(witness.trace(), 0.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn p31_dual_bound_is_three() {
    let b = SquareBasis::new(Flavor::Commutative, 3, 1).unwrap();
    let d = dual_bound(&P::sum_of_monomial_squares(3, 1), &b, &opts()).unwrap();
    assert!((d.value - 3.0).abs() < 1e-5, "{}", d.value);
    assert!(d.functional.feasibility_margin() >= -1e-12);
}

#[test]
fn evaluation_functional_is_dual_feasible() {
    let b = SquareBasis::new(Flavor::Commutative, 3, 2).unwrap();
    let p = P::sum_of_monomial_squares(3, 2);
    let c = build_constraints(&p, &b).unwrap();
    let s = SpherePoint::new(vec![0.6, 0.0, 0.8]).unwrap();
    let phi = DualFunctional::evaluation(&c, &s).unwrap();
    assert!(phi.max_eigenvalue <= 1.0 + 1e-12);
    assert!((phi.objective - p.evaluate(&s).unwrap().re).abs() < 1e-12);
    let norm = sos_norm(&p, &b, &opts()).unwrap().value;
    assert!(phi.objective <= norm + 1e-6);
}

#[test]
fn sum_of_squares_is_feasible() {
    for (n, d) in [(2, 1), (3, 2)] {
        let b = SquareBasis::new(Flavor::Commutative, n, d).unwrap();
        assert!(sos_feasible(&P::sum_of_monomial_squares(n, d), &b, &opts()).unwrap().is_feasible());
    }
    let b = SquareBasis::new(Flavor::Free, 2, 2).unwrap();
    assert!(sos_feasible(&free_example(), &b, &opts()).unwrap().is_feasible());
}

#[test]
fn indefinite_form_is_infeasible_with_separating_functional() {
    let b = SquareBasis::new(Flavor::Commutative, 2, 1).unwrap();
    let a = P::from_terms(
        Flavor::Commutative,
        2,
        [(Term::Monomial(vec![2, 0]), cre(1.0)), (Term::Monomial(vec![0, 2]), cre(-1.0))],
    )
    .unwrap();
    match sos_feasible(&a, &b, &opts()).unwrap() {
        Feasibility::Infeasible { certificate } => {
            assert!(certificate.objective > 0.0);
            assert!(certificate.max_eigenvalue <= 1e-12);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn free_non_square_is_infeasible() {
    let b = SquareBasis::new(Flavor::Free, 2, 1).unwrap();
    // z1 z2 + z2 z1 has Gram matrix [[0,1],[1,0]]
    let a = P::from_terms(
        Flavor::Free,
        2,
        [(Term::Word(vec![0, 1]), cre(1.0)), (Term::Word(vec![1, 0]), cre(1.0))],
    )
    .unwrap();
    match sos_feasible(&a, &b, &opts()).unwrap() {
        Feasibility::Infeasible { certificate } => {
            assert!(certificate.objective > 0.0);
            assert!(certificate.max_eigenvalue <= 1e-12);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn solver_detects_infeasibility_with_a_ray() {
    // x1 x2 alone: every Gram matrix has zero diagonal but nonzero off-diagonal
    let b = SquareBasis::new(Flavor::Commutative, 2, 1).unwrap();
    let a = P::from_terms(Flavor::Commutative, 2, [(Term::Monomial(vec![1, 1]), cre(1.0))]).unwrap();
    let c = build_constraints(&a, &b).unwrap();
    let s = solve_trace_min(&c, &opts()).unwrap();
    assert_eq!(s.status, SdpStatus::Infeasible);
    let ray = s.infeasibility_certificate.unwrap();
    assert!(ray.objective > 0.0);
    assert!(ray.max_eigenvalue <= 1e-10);
}

#[test]
fn rank_reduce_p32_to_four() {
    let b = SquareBasis::new(Flavor::Commutative, 3, 2).unwrap();
    let p = P::sum_of_monomial_squares(3, 2);
    let c = build_constraints(&p, &b).unwrap();
    assert_eq!(c.len(), 15);
    let r = rank_reduce(&c, &HermitianMatrix::identity(6), 4).unwrap();
    assert!(r.rank <= 4);
    assert!(r.residual <= 1e-6 * (1.0 + c.target_norm()));
    assert!(eig_hermitian(&r.matrix).unwrap().min() >= -1e-9);
}

#[test]
fn rank_reduce_fixed_point_and_hypothesis() {
    let b = SquareBasis::new(Flavor::Commutative, 3, 2).unwrap();
    let p = P::sum_of_monomial_squares(3, 2);
    let c = build_constraints(&p, &b).unwrap();
    assert!(matches!(rank_reduce(&c, &HermitianMatrix::identity(6), 2), Err(Error::HypothesisViolated { .. })));
    let r = rank_reduce(&c, &HermitianMatrix::identity(6), 6).unwrap();
    assert_eq!(r.steps, 0);
    assert!((&r.matrix.sub(&HermitianMatrix::identity(6))).max_abs_entry() < 1e-12);
}

#[test]
fn rank_reduce_single_trace_constraint() {
    let mut rng = seeded(9);
    let m: HermitianMatrix<f64> = random_psd(&mut rng, 5, 5);
    let m = m.scale(1.0 / m.trace());
    let sys = AffineSystem::new(vec![HermitianMatrix::identity(5)], vec![1.0]).unwrap();
    let r = rank_reduce(&sys, &m, 1).unwrap();
    assert_eq!(r.rank, 1);
    assert!((r.matrix.trace() - 1.0).abs() < 1e-10);
}

#[test]
fn rank_reduce_rejects_infeasible_input() {
    let sys = AffineSystem::new(vec![HermitianMatrix::identity(3)], vec![1.0]).unwrap();
    assert!(matches!(
        rank_reduce(&sys, &HermitianMatrix::<f64>::identity(3), 1),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn solution_doc_serializes() {
    let b = SquareBasis::new(Flavor::Commutative, 2, 1).unwrap();
    let r = sos_norm(&P::sum_of_monomial_squares(2, 1), &b, &opts()).unwrap();
    let json = serde_json::to_string(&r.solution.to_doc()).unwrap();
    let back: SolutionDoc = serde_json::from_str(&json).unwrap();
    assert_eq!(back.status, SdpStatus::Optimal);
    assert_eq!(back.matrix.dim, 2);
}

fn random_commutative_sos(seed: u64, n: usize, d: usize) -> (P, SquareBasis) {
    let mut rng = seeded(seed);
    let b = SquareBasis::new(Flavor::Commutative, n, d).unwrap();
    let m: HermitianMatrix<f64> = random_psd(&mut rng, b.len(), 2);
    (gram_map(&m, &b).unwrap(), b)
}

fn random_free_sos(seed: u64, n: usize, d: usize) -> (P, SquareBasis) {
    let mut rng = seeded(seed);
    let b = SquareBasis::new(Flavor::Free, n, d).unwrap();
    let m: HermitianMatrix<f64> = random_psd(&mut rng, b.len(), 2);
    (gram_map(&m, &b).unwrap(), b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn weak_duality(seed in 0u64..1000) {
        let (p, b) = random_commutative_sos(seed, 2, 2);
        let primal = sos_norm(&p, &b, &opts()).unwrap();
        let dual = dual_bound(&p, &b, &opts()).unwrap();
        prop_assert!(dual.value <= primal.value + 1e-6 * (1.0 + primal.value));
    }

    #[test]
    fn free_solver_matches_closed_form(seed in 0u64..1000, n in 1usize..3, d in 1usize..3) {
        let (p, b) = random_free_sos(seed, n, d);
        let v = sos_norm(&p, &b, &opts()).unwrap().value;
        let exact = free_sos_norm_closed_form(&p, d).unwrap();
        prop_assert!((v - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{} vs {}", v, exact);
    }

    #[test]
    fn sup_norm_below_sos_norm(seed in 0u64..1000) {
        let (p, b) = random_commutative_sos(seed, 3, 1);
        let v = sos_norm(&p, &b, &opts()).unwrap().value;
        prop_assert!(p.sup_norm_sphere(6).unwrap() <= v + 1e-6);
    }

    #[test]
    fn positive_scaling(seed in 0u64..1000, c in 0.1f64..10.0) {
        let (p, b) = random_commutative_sos(seed, 2, 2);
        let v = sos_norm(&p, &b, &opts()).unwrap().value;
        let vc = sos_norm(&p.scale(cx(c, 0.0)), &b, &opts()).unwrap().value;
        prop_assert!((vc - c * v).abs() <= 1e-6 * (1.0 + c * v));
    }

    #[test]
    fn rank_reduce_keeps_feasibility(seed in 0u64..1000) {
        let mut rng = seeded(seed);
        let b = SquareBasis::new(Flavor::Commutative, 3, 2).unwrap();
        let m: HermitianMatrix<f64> = random_psd(&mut rng, 6, 6);
        let p = gram_map(&m, &b).unwrap();
        let c = build_constraints(&p, &b).unwrap();
        let r = rank_reduce(&c, &m, 4).unwrap();
        prop_assert!(r.rank <= 4);
        prop_assert!(r.residual <= 1e-6 * (1.0 + c.target_norm()));
    }
}
