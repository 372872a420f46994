//! The Cox ring `S(Σ)` as a graded monomial calculus.

mod text;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::divisor::{class_of, lift_class, DivisorClass, TorusDivisor};
use crate::fan::{ClassGroupInfo, ToricVariety};
use crate::linalg::{solve_rational, RatMatrix};

pub use text::{format_monomial, parse_terms, ParseError};

#[derive(Debug, Error)]
pub enum CoxError {
    #[error("class {0} does not belong to this class group")]
    InvalidClass(DivisorClass),
    #[error("graded piece of class {0} is empty")]
    EmptyGradedPiece(DivisorClass),
    #[error("polynomial is not homogeneous: {first} and {other} both occur")]
    NotHomogeneous {
        first: DivisorClass,
        other: DivisorClass,
    },
    #[error("polynomial has class {found}, expected {expected}")]
    ClassMismatch {
        expected: DivisorClass,
        found: DivisorClass,
    },
    #[error("the zero polynomial has no class")]
    ZeroPolynomial,
    #[error("variable z{index} does not exist; the fan has {rays} rays")]
    VariableOutOfRange { index: usize, rays: usize },
    #[error("monomial has {found} exponents, expected {expected}")]
    Arity { expected: usize, found: usize },
    #[error("coefficient pool is empty or contains zero")]
    BadPool,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Exponent vector of `z_1^{e_1} ... z_n^{e_n}`.
///
/// Ordering is lexicographic with `z_1 > z_2 > ...`, largest first: sorting
/// puts `z1^4` ahead of `z1^3*z2`. This is the canonical order for bases
/// and printed polynomials.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Monomial(pub Vec<u32>);

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.cmp(&self.0)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Monomial {
    pub fn one(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn variable(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn degree(&self, cl: &ClassGroupInfo) -> DivisorClass {
        cl.degree_u32(&self.0)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format_monomial(&self.0);
        if s.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&s)
        }
    }
}

/// Monomial basis of `S_β` in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedBasis {
    pub class: DivisorClass,
    pub monomials: Vec<Monomial>,
}

impl GradedBasis {
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }
}

/// All monomials of class `beta`.
///
/// With `a` a lift of `beta`, the exponent vectors of class `beta` are
/// exactly `a_i + <m, v_i>` for lattice points `m` of
/// `P_a = { m : <m, v_i> >= -a_i }`, which is bounded because the fan is
/// complete. The points are found by scanning an integer box around the
/// vertices of `P_a`.
pub fn graded_basis(variety: &ToricVariety, beta: &DivisorClass) -> Result<GradedBasis, CoxError> {
    let cl = variety.class_group();
    if !cl.contains(beta) {
        return Err(CoxError::InvalidClass(beta.clone()));
    }
    let lift = lift_class(variety, beta).ok_or_else(|| CoxError::InvalidClass(beta.clone()))?;
    Ok(basis_from_lift(variety, beta, lift.coefficients()))
}

/// Same as [`graded_basis`] for the class of `d`, enumerated from the
/// polytope of `d` itself rather than from a canonical lift.
pub fn graded_basis_of_divisor(variety: &ToricVariety, d: &TorusDivisor) -> GradedBasis {
    basis_from_lift(variety, &class_of(variety, d), d.coefficients())
}

fn basis_from_lift(variety: &ToricVariety, beta: &DivisorClass, lift: &[i64]) -> GradedBasis {
    let cl = variety.class_group();
    let mut monomials: Vec<Monomial> = polytope_exponents(variety, lift)
        .into_iter()
        .map(Monomial)
        .collect();
    for m in &monomials {
        assert_eq!(
            &m.degree(cl),
            beta,
            "enumerated monomial {m} has the wrong class"
        );
    }
    monomials.sort();
    monomials.dedup();
    GradedBasis {
        class: beta.clone(),
        monomials,
    }
}

fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

fn polytope_exponents(variety: &ToricVariety, a: &[i64]) -> Vec<Vec<u32>> {
    let fan = variety.fan();
    let d = fan.dim;
    let n = fan.num_rays();
    let q = |x: i64| BigRational::from_integer(BigInt::from(x));

    let mut lo: Vec<Option<BigRational>> = vec![None; d];
    let mut hi: Vec<Option<BigRational>> = vec![None; d];
    for_each_subset(n, d, &mut |subset| {
        let mut mat = RatMatrix::zeros(d, d);
        let mut rhs = Vec::with_capacity(d);
        for (r, &i) in subset.iter().enumerate() {
            for k in 0..d {
                mat[(r, k)] = q(fan.rays[i][k]);
            }
            rhs.push(q(-a[i]));
        }
        let Some(m) = solve_rational(&mat, &rhs) else {
            return;
        };
        let feasible = (0..n).all(|j| {
            let dot = m
                .iter()
                .zip(&fan.rays[j])
                .fold(BigRational::zero(), |s, (x, &y)| s + x * q(y));
            dot >= q(-a[j])
        });
        if !feasible {
            return;
        }
        for k in 0..d {
            if lo[k].as_ref().is_none_or(|l| m[k] < *l) {
                lo[k] = Some(m[k].clone());
            }
            if hi[k].as_ref().is_none_or(|h| m[k] > *h) {
                hi[k] = Some(m[k].clone());
            }
        }
    });
    if lo.iter().any(Option::is_none) {
        return Vec::new();
    }
    let lo: Vec<i64> = lo
        .into_iter()
        .map(|x| x.unwrap().ceil().to_integer().to_i64().unwrap())
        .collect();
    let hi: Vec<i64> = hi
        .into_iter()
        .map(|x| x.unwrap().floor().to_integer().to_i64().unwrap())
        .collect();
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return Vec::new();
    }

    let mut out = Vec::new();
    let mut m = lo.clone();
    'scan: loop {
        let exps: Option<Vec<u32>> = (0..n)
            .map(|i| {
                let e = a[i] + fan.rays[i].iter().zip(&m).map(|(x, y)| x * y).sum::<i64>();
                u32::try_from(e).ok()
            })
            .collect();
        if let Some(e) = exps {
            out.push(e);
        }
        for k in 0..d {
            if m[k] < hi[k] {
                m[k] += 1;
                continue 'scan;
            }
            m[k] = lo[k];
        }
        break;
    }
    out
}

/// Homogeneous element of the Cox ring with exact rational coefficients.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoxPolynomial {
    class: DivisorClass,
    nvars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl CoxPolynomial {
    pub fn zero(cl: &ClassGroupInfo, class: DivisorClass) -> Self {
        Self {
            class,
            nvars: cl.num_variables(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(cl: &ClassGroupInfo) -> Self {
        let n = cl.num_variables();
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::one(n), BigRational::one());
        Self {
            class: cl.zero(),
            nvars: n,
            terms,
        }
    }

    /// Builds a polynomial, inferring its class from the terms.
    pub fn from_terms(
        cl: &ClassGroupInfo,
        terms: impl IntoIterator<Item = (Monomial, BigRational)>,
    ) -> Result<Self, CoxError> {
        let n = cl.num_variables();
        let mut map: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (m, c) in terms {
            if m.0.len() != n {
                return Err(CoxError::Arity {
                    expected: n,
                    found: m.0.len(),
                });
            }
            *map.entry(m).or_insert_with(BigRational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        let mut class: Option<DivisorClass> = None;
        for m in map.keys() {
            let deg = m.degree(cl);
            match &class {
                None => class = Some(deg),
                Some(c) if *c != deg => {
                    return Err(CoxError::NotHomogeneous {
                        first: c.clone(),
                        other: deg,
                    })
                }
                _ => {}
            }
        }
        let class = class.ok_or(CoxError::ZeroPolynomial)?;
        Ok(Self {
            class,
            nvars: n,
            terms: map,
        })
    }

    /// Like [`from_terms`](Self::from_terms) but with a declared class, so the
    /// zero polynomial is allowed.
    pub fn with_class(
        cl: &ClassGroupInfo,
        class: DivisorClass,
        terms: impl IntoIterator<Item = (Monomial, BigRational)>,
    ) -> Result<Self, CoxError> {
        match Self::from_terms(cl, terms) {
            Ok(p) if p.class == class => Ok(p),
            Ok(p) => Err(CoxError::ClassMismatch {
                expected: class,
                found: p.class,
            }),
            Err(CoxError::ZeroPolynomial) => Ok(Self::zero(cl, class)),
            Err(e) => Err(e),
        }
    }

    /// Parses the text format; the class is inferred.
    pub fn parse(variety: &ToricVariety, src: &str) -> Result<Self, CoxError> {
        let n = variety.num_rays();
        let mut terms = Vec::new();
        for (sparse, c) in parse_terms(src)? {
            let mut e = vec![0u32; n];
            for (i, x) in sparse {
                if i >= n {
                    return Err(CoxError::VariableOutOfRange {
                        index: i + 1,
                        rays: n,
                    });
                }
                e[i] = x;
            }
            terms.push((Monomial(e), c));
        }
        Self::from_terms(variety.class_group(), terms)
    }

    pub fn class(&self) -> &DivisorClass {
        &self.class
    }

    pub fn num_variables(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigRational> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self {
                class: self.class.clone(),
                nvars: self.nvars,
                terms: BTreeMap::new(),
            };
        }
        Self {
            class: self.class.clone(),
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    /// Sum of two polynomials of the same class.
    pub fn add(&self, other: &Self) -> Result<Self, CoxError> {
        if self.class != other.class {
            return Err(CoxError::ClassMismatch {
                expected: self.class.clone(),
                found: other.class.clone(),
            });
        }
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            *terms.entry(m.clone()).or_insert_with(BigRational::zero) += c;
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(Self {
            class: self.class.clone(),
            nvars: self.nvars,
            terms,
        })
    }

    pub fn multiply(&self, other: &Self, cl: &ClassGroupInfo) -> Self {
        let mut terms: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                *terms.entry(a.mul(b)).or_insert_with(BigRational::zero) += x * y;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Self {
            class: cl.add(&self.class, &other.class),
            nvars: self.nvars,
            terms,
        }
    }

    /// Formal `∂/∂z_i`; the result has class `β - deg z_i`.
    pub fn partial_derivative(&self, cl: &ClassGroupInfo, i: usize) -> Self {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut d = m.clone();
            d.0[i] -= 1;
            terms.insert(d, c * BigRational::from_integer(e.into()));
        }
        Self {
            class: cl.sub(&self.class, &cl.variable_degree(i)),
            nvars: self.nvars,
            terms,
        }
    }

    /// Image under `z_i -> c_i z_i`.
    pub fn rescale_variables(&self, c: &[BigRational]) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, x)| {
                let f = m.0.iter().zip(c).fold(x.clone(), |acc, (&e, ci)| {
                    acc * num_traits::pow(ci.clone(), e as usize)
                });
                (m.clone(), f)
            })
            .collect();
        Self {
            class: self.class.clone(),
            nvars: self.nvars,
            terms,
        }
    }
}

impl fmt::Display for CoxPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::format_terms(
            self.terms.iter().map(|(m, c)| (m.0.as_slice(), c)),
        ))
    }
}

/// For every coordinate `ψ` of the free part of `Cl(Σ)`, checks
/// `Σ_i ψ(deg z_i) z_i ∂_i f = ψ(β) f`.
pub fn euler_identity_check(variety: &ToricVariety, f: &CoxPolynomial) -> bool {
    let cl = variety.class_group();
    let n = variety.num_rays();
    (0..cl.free_rank).all(|k| {
        let target = f.scale(&BigRational::from_integer(f.class.free[k].into()));
        let mut lhs = CoxPolynomial::zero(cl, f.class.clone());
        for i in 0..n {
            let w = cl.free_degrees[k][i];
            if w == 0 {
                continue;
            }
            let zi =
                CoxPolynomial::from_terms(cl, [(Monomial::variable(n, i), BigRational::one())])
                    .expect("a variable is homogeneous");
            let term = zi
                .multiply(&f.partial_derivative(cl, i), cl)
                .scale(&BigRational::from_integer(w.into()));
            lhs = match lhs.add(&term) {
                Ok(p) => p,
                Err(_) => return false,
            };
        }
        lhs == target
    })
}

/// Nonzero integers in `[-10, 10]`.
pub fn default_coefficient_pool() -> Vec<i64> {
    (-10..=10).filter(|&x| x != 0).collect()
}

/// Every monomial of `S_β` with a coefficient drawn from `pool`; a
/// deterministic function of `seed`.
pub fn random_section(
    variety: &ToricVariety,
    beta: &DivisorClass,
    seed: u64,
    pool: &[i64],
) -> Result<CoxPolynomial, CoxError> {
    if pool.is_empty() || pool.contains(&0) {
        return Err(CoxError::BadPool);
    }
    let basis = graded_basis(variety, beta)?;
    if basis.is_empty() {
        return Err(CoxError::EmptyGradedPiece(beta.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = basis.monomials.into_iter().map(|m| {
        let c = *pool.choose(&mut rng).expect("pool is nonempty");
        (m, BigRational::from_integer(c.into()))
    });
    CoxPolynomial::with_class(variety.class_group(), beta.clone(), terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor::TorusDivisor;
    use crate::fixtures;

    fn variety(f: crate::fan::Fan) -> ToricVariety {
        ToricVariety::new(f).unwrap()
    }

    fn q(x: i64) -> BigRational {
        BigRational::from_integer(x.into())
    }

    /// Independent count: all `a >= 0` in a box with the right class.
    fn brute_force(v: &ToricVariety, beta: &DivisorClass, bound: u32) -> Vec<Monomial> {
        let n = v.num_rays();
        let mut out = Vec::new();
        let mut e = vec![0u32; n];
        loop {
            if v.class_group().degree_u32(&e) == *beta {
                out.push(Monomial(e.clone()));
            }
            let mut k = 0;
            while k < n && e[k] == bound {
                e[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
            e[k] += 1;
        }
        out.sort();
        out
    }

    #[test]
    fn constant_piece() {
        for fan in fixtures::all() {
            let v = variety(fan);
            let b = graded_basis(&v, &v.class_group().zero()).unwrap();
            assert_eq!(b.monomials, vec![Monomial::one(v.num_rays())]);
        }
    }

    #[test]
    fn p3_quartics() {
        let v = variety(fixtures::p3());
        let beta = DivisorClass::free(vec![4]);
        let b = graded_basis(&v, &beta).unwrap();
        assert_eq!(b.len(), 35);
        assert_eq!(b.monomials, brute_force(&v, &beta, 4));
        assert_eq!(b.monomials[0], Monomial(vec![4, 0, 0, 0]));
    }

    #[test]
    fn weighted_sextics() {
        let v = variety(fixtures::p111_3());
        let beta = DivisorClass::free(vec![6]);
        let b = graded_basis(&v, &beta).unwrap();
        assert_eq!(b.len(), 39);
        assert_eq!(b.monomials, brute_force(&v, &beta, 6));
    }

    #[test]
    fn negative_class_is_empty() {
        let v = variety(fixtures::p3());
        assert!(graded_basis(&v, &DivisorClass::free(vec![-1]))
            .unwrap()
            .is_empty());
        assert!(graded_basis(&v, &DivisorClass::free(vec![1, 1])).is_err());
    }

    #[test]
    fn f2xp1_pieces_match_brute_force() {
        let v = variety(fixtures::f2xp1());
        let cl = v.class_group();
        for a in [
            vec![1, 1, 1, 1, 1, 1],
            vec![0, 0, 2, 1, 1, 0],
            vec![2, 0, 0, 0, 0, 1],
        ] {
            let beta = crate::divisor::class_of(&v, &TorusDivisor(a));
            let b = graded_basis(&v, &beta).unwrap();
            assert_eq!(b.monomials, brute_force(&v, &beta, 6), "class {beta}");
            assert!(b.monomials.iter().all(|m| m.degree(cl) == beta));
        }
    }

    #[test]
    fn multiplication() {
        let v = variety(fixtures::p3());
        let cl = v.class_group();
        let f = CoxPolynomial::parse(&v, "z1^2 + 3 z2 z4").unwrap();
        assert_eq!(f.multiply(&CoxPolynomial::one(cl), cl), f);
        let a = CoxPolynomial::parse(&v, "z1 + z2").unwrap();
        let b = CoxPolynomial::parse(&v, "z1 - z2").unwrap();
        assert_eq!(
            a.multiply(&b, cl),
            CoxPolynomial::parse(&v, "z1^2 - z2^2").unwrap()
        );
        let c = CoxPolynomial::parse(&v, "z1 z2").unwrap();
        let d = CoxPolynomial::parse(&v, "z3 z4").unwrap();
        let p = c.multiply(&d, cl);
        assert_eq!(p, CoxPolynomial::parse(&v, "z1*z2*z3*z4").unwrap());
        assert_eq!(p.class(), &DivisorClass::free(vec![4]));
    }

    #[test]
    fn derivatives() {
        let v = variety(fixtures::p3());
        let cl = v.class_group();
        let f = CoxPolynomial::parse(&v, "z1^4").unwrap();
        let d = f.partial_derivative(cl, 0);
        assert_eq!(d, CoxPolynomial::parse(&v, "4 z1^3").unwrap());
        let one = CoxPolynomial::one(cl);
        let d = one.partial_derivative(cl, 2);
        assert!(d.is_zero());
        assert_eq!(d.class(), &DivisorClass::free(vec![-1]));
        let fermat = CoxPolynomial::parse(&v, "z1^4 + z2^4 + z3^4 + z4^4").unwrap();
        for i in 0..4 {
            let mut e = vec![0; 4];
            e[i] = 3;
            let expect = CoxPolynomial::from_terms(cl, [(Monomial(e), q(4))]).unwrap();
            assert_eq!(fermat.partial_derivative(cl, i), expect);
        }
    }

    #[test]
    fn euler_identities() {
        let v = variety(fixtures::p3());
        assert!(euler_identity_check(
            &v,
            &CoxPolynomial::one(v.class_group())
        ));
        let fermat = CoxPolynomial::parse(&v, "z1^4 + z2^4 + z3^4 + z4^4").unwrap();
        assert!(euler_identity_check(&v, &fermat));
        let v = variety(fixtures::p1p1p1());
        let beta = DivisorClass::free(vec![2, 2, 2]);
        let f = random_section(&v, &beta, 3, &default_coefficient_pool()).unwrap();
        assert!(euler_identity_check(&v, &f));
    }

    #[test]
    fn random_sections_are_deterministic() {
        let v = variety(fixtures::p3());
        let beta = DivisorClass::free(vec![4]);
        let pool = default_coefficient_pool();
        let a = random_section(&v, &beta, 11, &pool).unwrap();
        let b = random_section(&v, &beta, 11, &pool).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_terms(), 35);
        assert_ne!(a, random_section(&v, &beta, 12, &pool).unwrap());
        assert!(matches!(
            random_section(&v, &DivisorClass::free(vec![-2]), 1, &pool),
            Err(CoxError::EmptyGradedPiece(_))
        ));
    }

    #[test]
    fn parse_rejects_bad_input() {
        let v = variety(fixtures::p3());
        assert!(matches!(
            CoxPolynomial::parse(&v, "z5"),
            Err(CoxError::VariableOutOfRange { .. })
        ));
        assert!(matches!(
            CoxPolynomial::parse(&v, "z1 + z1^2"),
            Err(CoxError::NotHomogeneous { .. })
        ));
        assert!(matches!(
            CoxPolynomial::parse(&v, "z1 - z1"),
            Err(CoxError::ZeroPolynomial)
        ));
    }

    #[test]
    fn display_round_trip() {
        let v = variety(fixtures::p3());
        let f = CoxPolynomial::parse(&v, "-z4^3 z1 + 2/3 z1^2 z2^2 - 7 z3^4").unwrap();
        let s = f.to_string();
        assert_eq!(s, "2/3*z1^2*z2^2 - z1*z4^3 - 7*z3^4");
        assert_eq!(CoxPolynomial::parse(&v, &s).unwrap(), f);
    }
}
