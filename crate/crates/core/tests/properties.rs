mod common;

use common::*;
use proptest::prelude::*;

use toric_nl::cox::CoxPolynomial;
use toric_nl::fan::ToricVariety;
use toric_nl::fixtures;
use toric_nl::linalg::{solve_integer, IntMatrix};
use toric_nl::quasismooth::{singular_witness_search, SearchOptions, Verdict};

proptest! {
    #![proptest_config(config())]

    #[test]
    fn smith_form_reconstructs(a in matrix(5, 12)) {
        check_smith(&a)?;
    }

    #[test]
    fn cokernel_rank_identity(a in matrix(5, 6)) {
        check_cokernel(&a)?;
    }

    #[test]
    fn modular_rank_matches_bareiss(a in low_rank_matrix()) {
        check_modular_rank(&a)?;
    }

    #[test]
    fn solve_integer_finds_preimages(a in matrix(5, 9), x in prop::collection::vec(-9i64..=9, 5)) {
        check_solve(&a, &x)?;
    }

    #[test]
    fn solve_integer_rejects_non_lattice_targets(k in 2i64..=7, n in 1usize..=4, r in 1i64..=6) {
        // k * I has image k Z^n, which misses any target with a coordinate k does not divide.
        let rows: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| if i == j { k } else { 0 }).collect()).collect();
        let a = IntMatrix::from_rows(n, &rows);
        let mut b = vec![num_bigint::BigInt::from(0); n];
        b[0] = (k * r + 1).into();
        prop_assert!(solve_integer(&a, &b).is_none());
    }

    #[test]
    fn validation_is_invariant_under_ray_permutation(
        idx in fixture_index(),
        drop_cone in prop::option::of(0usize..8),
        perm_seed in any::<u64>(),
    ) {
        check_permutation_invariance(idx, drop_cone, perm_seed)?;
    }

    #[test]
    fn lift_round_trip(idx in fixture_index(), coeffs in prop::collection::vec(-6i64..=6, 6)) {
        check_lift(idx, &coeffs)?;
    }

    #[test]
    fn ampleness_is_a_class_property(
        idx in fixture_index(),
        coeffs in prop::collection::vec(-3i64..=4, 6),
        m in prop::collection::vec(-5i64..=5, 4),
    ) {
        check_ampleness_is_class_property(idx, &coeffs, &m)?;
    }

    #[test]
    fn euler_identity_for_random_sections((idx, coeffs) in fixture_and_divisor(), seed in any::<u64>()) {
        check_euler(idx, &coeffs, seed)?;
    }

    #[test]
    fn graded_basis_is_homogeneous_and_lift_independent(
        (idx, coeffs) in fixture_and_divisor(),
        m in prop::collection::vec(-4i64..=4, 4),
    ) {
        check_graded_basis(idx, &coeffs, &m)?;
    }

    #[test]
    fn jacobian_dims_invariant_under_rescaling(case in jacobian_rescaling_case()) {
        let (k, g, seed, c, diag) = case;
        check_jacobian_rescaling(k, g, seed, &c, &diag)?;
    }

    #[test]
    fn witnesses_reverify(case in witness_case()) {
        check_witness(&case)?;
    }
}

#[test]
fn torsion_fan_is_in_the_pool() {
    let v = varieties().last().unwrap();
    assert_eq!(v.class_group().torsion, vec![3]);
}

#[test]
fn content_divisible_sections_are_handled() {
    let v = ToricVariety::new(fixtures::p3()).unwrap();
    let f = CoxPolynomial::parse(&v, "3*z1^4 + 3*z2^4 + 3*z3^4 + 3*z4^4").unwrap();
    let opts = SearchOptions {
        prime: 3,
        ..SearchOptions::default()
    };
    // Dividing out the content leaves the Fermat quartic, smooth mod 3.
    assert_eq!(
        singular_witness_search(&v, &f, &opts).unwrap().verdict,
        Verdict::NoneFound
    );
}
