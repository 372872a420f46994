//! Strategies and property checks shared by the property suite and the
//! acceptance runner.

#![allow(dead_code)]

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use proptest::sample::subsequence;
use proptest::test_runner::TestCaseError;

use toric_nl::cox::{
    default_coefficient_pool, euler_identity_check, graded_basis, graded_basis_of_divisor,
    random_section, CoxPolynomial, Monomial,
};
use toric_nl::divisor::{class_of, is_ample, lift_class, DivisorClass, TorusDivisor};
use toric_nl::fan::{class_group, validate_fan, Fan, ToricVariety};
use toric_nl::fixtures;
use toric_nl::jacobian::jacobian_dims;
use toric_nl::linalg::{
    cokernel, rank_integer, smith_normal_form, solve_integer, IntMatrix, RankStrategy,
};
use toric_nl::quasismooth::{singular_witness_search, SearchMode, SearchOptions, Verdict};

pub type Check = Result<(), TestCaseError>;

pub const CASES: u32 = 256;

pub fn config() -> ProptestConfig {
    ProptestConfig {
        cases: CASES,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

/// The shipped fixtures plus a complete surface fan with class group `Z + Z/3`.
pub fn fans() -> Vec<Fan> {
    let mut all = fixtures::all();
    all.push(
        Fan::new(
            2,
            vec![vec![1, 0], vec![1, 3], vec![-2, -3]],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap()
        .with_name("torsion"),
    );
    all
}

pub fn varieties() -> &'static [ToricVariety] {
    static CELL: OnceLock<Vec<ToricVariety>> = OnceLock::new();
    CELL.get_or_init(|| {
        fans()
            .into_iter()
            .map(|f| ToricVariety::new(f).unwrap())
            .collect()
    })
}

pub fn fixture_index() -> impl Strategy<Value = usize> {
    0..fans().len()
}

pub fn matrix(max_dim: usize, entry: i64) -> impl Strategy<Value = IntMatrix> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(move |(r, c)| {
        prop::collection::vec(-entry..=entry, r * c)
            .prop_map(move |v| IntMatrix::from_vec(r, c, v.into_iter().map(BigInt::from).collect()))
    })
}

/// Products `B C` with inner dimension `k`, so the rank is at most `k`.
pub fn low_rank_matrix() -> impl Strategy<Value = IntMatrix> {
    (1..=7usize, 1..=7usize, 1..=4usize, prop::bool::ANY).prop_flat_map(|(r, c, k, big)| {
        let e: i64 = if big { 1_000_000_000 } else { 6 };
        (
            prop::collection::vec(-e..=e, r * k),
            prop::collection::vec(-e..=e, k * c),
        )
            .prop_map(move |(b, cc)| {
                let b = IntMatrix::from_vec(r, k, b.into_iter().map(BigInt::from).collect());
                let cc = IntMatrix::from_vec(k, c, cc.into_iter().map(BigInt::from).collect());
                b.mul(&cc)
            })
    })
}

/// Effective divisor coefficients for fan `idx`, kept small so graded
/// pieces stay small.
pub fn effective_divisor(idx: usize) -> impl Strategy<Value = Vec<i64>> {
    let n = fans()[idx].num_rays();
    let top: i64 = if n <= 4 { 3 } else { 2 };
    prop::collection::vec(0..=top, n)
}

pub fn fixture_and_divisor() -> impl Strategy<Value = (usize, Vec<i64>)> {
    fixture_index().prop_flat_map(|i| (Just(i), effective_divisor(i)))
}

pub fn rational() -> impl Strategy<Value = BigRational> {
    (1i64..=9, 1i64..=9, prop::bool::ANY).prop_map(|(a, b, neg)| {
        let q = BigRational::new(a.into(), b.into());
        if neg {
            -q
        } else {
            q
        }
    })
}

fn is_diagonal(s: &IntMatrix) -> bool {
    (0..s.rows()).all(|i| (0..s.cols()).all(|j| i == j || s[(i, j)].is_zero()))
}

pub fn check_smith(a: &IntMatrix) -> Check {
    let snf = smith_normal_form(a);
    prop_assert_eq!(snf.u.mul(a).mul(&snf.v), snf.s.clone());
    prop_assert!(snf.u.is_unimodular());
    prop_assert!(snf.v.is_unimodular());
    prop_assert!(is_diagonal(&snf.s));
    let d = snf.diagonal();
    prop_assert!(d.iter().all(|x| !x.is_negative()));
    for w in d.windows(2) {
        if w[0].is_zero() {
            prop_assert!(w[1].is_zero());
        } else {
            prop_assert!(w[1].is_multiple_of(&w[0]));
        }
    }
    prop_assert_eq!(snf.rank(), rank_integer(a, RankStrategy::Bareiss));
    Ok(())
}

pub fn check_cokernel(a: &IntMatrix) -> Check {
    let ck = cokernel(a);
    let r = rank_integer(a, RankStrategy::Bareiss);
    prop_assert_eq!(ck.free_rank, a.rows() - r);
    let order: BigInt = ck.torsion.iter().product();
    let nonzero: BigInt = smith_normal_form(a)
        .diagonal()
        .into_iter()
        .filter(|d| !d.is_zero())
        .product();
    prop_assert_eq!(order, nonzero);
    // The quotient map kills the image.
    for j in 0..a.cols() {
        let (free, tors) = ck.project(&a.column(j));
        prop_assert!(free.iter().all(Zero::is_zero));
        prop_assert!(tors.iter().all(Zero::is_zero));
    }
    Ok(())
}

pub fn check_modular_rank(a: &IntMatrix) -> Check {
    let exact = rank_integer(a, RankStrategy::Bareiss);
    prop_assert_eq!(rank_integer(a, RankStrategy::MultiModular), exact);
    prop_assert_eq!(
        rank_integer(&a.transpose(), RankStrategy::MultiModular),
        exact
    );
    Ok(())
}

pub fn check_solve(a: &IntMatrix, x: &[i64]) -> Check {
    let x: Vec<BigInt> = (0..a.cols())
        .map(|j| BigInt::from(x.get(j).copied().unwrap_or(0)))
        .collect();
    let b = a.mul_vec(&x);
    let y = solve_integer(a, &b);
    prop_assert!(y.is_some());
    prop_assert_eq!(a.mul_vec(&y.unwrap()), b);
    Ok(())
}

pub fn check_permutation_invariance(idx: usize, drop_cone: Option<usize>, perm_seed: u64) -> Check {
    let fan = fans().swap_remove(idx);
    let fan = match drop_cone {
        Some(k) if k < fan.cones.len() => {
            let mut cones = fan.cones.clone();
            cones.remove(k);
            Fan::new(fan.dim, fan.rays.clone(), cones).unwrap()
        }
        _ => fan,
    };
    let n = fan.num_rays();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut s = perm_seed;
    for i in (1..n).rev() {
        s = s
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        perm.swap(i, (s >> 33) as usize % (i + 1));
    }
    let permuted = fan.permute_rays(&perm);
    let a = validate_fan(&fan);
    let b = validate_fan(&permuted);
    prop_assert_eq!(a.passed(), b.passed());
    prop_assert_eq!(a.facet_pairing, b.facet_pairing);
    prop_assert_eq!(a.unmatched_facets.len(), b.unmatched_facets.len());
    let ca = class_group(&fan).unwrap();
    let cb = class_group(&permuted).unwrap();
    prop_assert_eq!(ca.free_rank, cb.free_rank);
    prop_assert_eq!(ca.torsion, cb.torsion);
    Ok(())
}

pub fn check_lift(idx: usize, coeffs: &[i64]) -> Check {
    let v = &varieties()[idx];
    let d = TorusDivisor(coeffs[..v.num_rays()].to_vec());
    let beta = class_of(v, &d);
    prop_assert!(v.class_group().contains(&beta));
    let lift = lift_class(v, &beta).expect("classes of divisors lift");
    prop_assert_eq!(class_of(v, &lift), beta);
    Ok(())
}

pub fn check_ampleness_is_class_property(idx: usize, coeffs: &[i64], m: &[i64]) -> Check {
    let v = &varieties()[idx];
    let d = TorusDivisor(coeffs[..v.num_rays()].to_vec());
    let e = d.add_principal(v, &m[..v.dim()]);
    prop_assert_eq!(class_of(v, &d), class_of(v, &e));
    let (a, b) = (is_ample(v, &d), is_ample(v, &e));
    prop_assert_eq!(a.ample, b.ample);
    prop_assert_eq!(a.cartier, b.cartier);
    Ok(())
}

pub fn check_euler(idx: usize, coeffs: &[i64], seed: u64) -> Check {
    let v = &varieties()[idx];
    let beta = class_of(v, &TorusDivisor(coeffs.to_vec()));
    let f = random_section(v, &beta, seed, &default_coefficient_pool()).unwrap();
    prop_assert!(euler_identity_check(v, &f));
    Ok(())
}

pub fn check_graded_basis(idx: usize, coeffs: &[i64], m: &[i64]) -> Check {
    let v = &varieties()[idx];
    let d = TorusDivisor(coeffs.to_vec());
    let beta = class_of(v, &d);
    let basis = graded_basis(v, &beta).unwrap();
    prop_assert!(!basis.is_empty());
    for mono in &basis.monomials {
        prop_assert_eq!(mono.degree(v.class_group()), beta.clone());
    }
    let mut sorted = basis.monomials.clone();
    sorted.sort();
    sorted.dedup();
    prop_assert_eq!(&sorted, &basis.monomials);
    prop_assert_eq!(&graded_basis_of_divisor(v, &d), &basis);
    let shifted = d.add_principal(v, &m[..v.dim()]);
    prop_assert_eq!(&graded_basis_of_divisor(v, &shifted), &basis);
    Ok(())
}

/// Ample classes with small Jacobian computations on the three-dimensional
/// fixtures: (variety index, β, test degrees γ).
pub fn jacobian_cases() -> Vec<(usize, Vec<i64>, Vec<Vec<i64>>)> {
    vec![
        (0, vec![4], vec![vec![0], vec![2], vec![4], vec![6]]),
        (1, vec![6], vec![vec![3], vec![6], vec![9]]),
        (
            2,
            vec![2, 2, 2],
            vec![vec![1, 1, 1], vec![2, 2, 2], vec![2, 1, 3]],
        ),
        (3, vec![3, 1, 1], vec![vec![3, 1, 1], vec![2, 1, 2]]),
    ]
}

pub fn jacobian_rescaling_case(
) -> impl Strategy<Value = (usize, usize, u64, BigRational, Vec<BigRational>)> {
    (
        0..jacobian_cases().len(),
        0usize..4,
        0u64..1_000_000,
        rational(),
        prop::collection::vec(rational(), 6),
    )
}

pub fn check_jacobian_rescaling(
    case: usize,
    gamma_pick: usize,
    seed: u64,
    c: &BigRational,
    diag: &[BigRational],
) -> Check {
    let (idx, beta, gammas) = jacobian_cases().swap_remove(case);
    let v = &varieties()[idx];
    let beta = DivisorClass::free(beta);
    let gamma = DivisorClass::free(gammas[gamma_pick % gammas.len()].clone());
    let f = random_section(v, &beta, seed, &default_coefficient_pool()).unwrap();
    let base = jacobian_dims(v, &f, &gamma).unwrap();
    prop_assert_eq!(&jacobian_dims(v, &f.scale(c), &gamma).unwrap(), &base);
    let rescaled = f.rescale_variables(&diag[..v.num_rays()]);
    prop_assert_eq!(&jacobian_dims(v, &rescaled, &gamma).unwrap(), &base);
    Ok(())
}

/// `f` with coefficients reduced mod `p`, evaluated directly from its terms.
pub fn eval_mod(f: &CoxPolynomial, x: &[u64], p: u64) -> u64 {
    let pb = BigInt::from(p);
    let mut acc = BigInt::zero();
    for (m, c) in f.terms() {
        let inv = c.denom().modpow(&(&pb - 2u32), &pb);
        let mut t = (c.numer() * inv).mod_floor(&pb);
        for (&xi, &e) in x.iter().zip(m.exponents()) {
            t = t * BigInt::from(xi).modpow(&BigInt::from(e), &pb) % &pb;
        }
        acc += t;
    }
    acc.mod_floor(&pb).to_u64().unwrap()
}

/// First point in lexicographic order (first coordinate most significant)
/// off the irrelevant locus where `f` and every partial vanish mod `p`.
pub fn first_critical_point(v: &ToricVariety, f: &CoxPolynomial, p: u64) -> Option<Vec<u64>> {
    let n = v.num_rays();
    let partials: Vec<CoxPolynomial> = (0..n)
        .map(|i| f.partial_derivative(v.class_group(), i))
        .collect();
    (0..p.pow(n as u32)).find_map(|mut k| {
        let mut x = vec![0u64; n];
        for slot in x.iter_mut().rev() {
            *slot = k % p;
            k /= p;
        }
        let zeros: Vec<usize> = (0..n).filter(|&i| x[i] == 0).collect();
        if !v.is_relevant(&zeros).unwrap() {
            return None;
        }
        let critical = eval_mod(f, &x, p) == 0 && partials.iter().all(|d| eval_mod(d, &x, p) == 0);
        critical.then_some(x)
    })
}

/// (variety index, class) pairs used for sparse sections.
fn witness_setups() -> Vec<(usize, Vec<i64>)> {
    vec![(0, vec![4]), (0, vec![3]), (2, vec![2, 2, 2]), (1, vec![6])]
}

pub type WitnessCase = (usize, Vec<Monomial>, Vec<i64>, u64);

/// Sparse sections: a few monomials of one graded piece with small
/// coefficients, together with a small prime.
pub fn witness_case() -> impl Strategy<Value = WitnessCase> {
    let bases: Vec<Vec<Monomial>> = witness_setups()
        .into_iter()
        .map(|(idx, beta)| {
            graded_basis(&varieties()[idx], &DivisorClass::free(beta))
                .unwrap()
                .monomials
        })
        .collect();
    (0..bases.len(), prop::sample::select(vec![2u64, 3, 5])).prop_flat_map(move |(i, p)| {
        let basis = bases[i].clone();
        let len = basis.len();
        (
            Just(i),
            subsequence(basis, 1..=len.min(6)),
            prop::collection::vec(prop::sample::select(vec![-3i64, -2, -1, 1, 2, 3]), 6),
            Just(p),
        )
    })
}

pub fn check_witness(case: &WitnessCase) -> Check {
    let (i, pick, coeffs, p) = case;
    let p = *p;
    let (idx, beta) = witness_setups().swap_remove(*i);
    let v = &varieties()[idx];
    let terms = pick
        .iter()
        .cloned()
        .zip(coeffs.iter().map(|&c| BigRational::from_integer(c.into())));
    let f = CoxPolynomial::with_class(v.class_group(), DivisorClass::free(beta), terms).unwrap();
    // The search divides out the content, so skip sections whose content p divides.
    let content = f
        .terms()
        .values()
        .fold(BigInt::zero(), |g, c| g.gcd(c.numer()));
    prop_assume!(!content.is_multiple_of(&BigInt::from(p)));
    let opts = SearchOptions {
        prime: p,
        mode: SearchMode::Exhaustive,
        budget: 1 << 20,
        seed: 0,
    };
    let report = singular_witness_search(v, &f, &opts).unwrap();
    let expected = first_critical_point(v, &f, p);
    match report.verdict {
        Verdict::Found => {
            let w = report.witness.clone().unwrap();
            let zeros: Vec<usize> = (0..w.len()).filter(|&k| w[k] == 0).collect();
            prop_assert!(v.is_relevant(&zeros).unwrap());
            prop_assert_eq!(eval_mod(&f, &w, p), 0);
            for k in 0..v.num_rays() {
                prop_assert_eq!(
                    eval_mod(&f.partial_derivative(v.class_group(), k), &w, p),
                    0
                );
            }
            prop_assert_eq!(Some(w), expected);
        }
        Verdict::NoneFound => prop_assert_eq!(expected, None),
    }
    Ok(())
}
