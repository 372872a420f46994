//! Finite-field search for singular points of `V(f)` outside `Z(Σ)`.
//!
//! A witness is a point over `F_p` where every partial derivative vanishes
//! and whose zero coordinates index rays of a common cone. Finding one
//! means `f` is very likely not quasi-smooth; finding none is only evidence
//! that it is.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cox::CoxPolynomial;
use crate::fan::ToricVariety;
use crate::linalg::is_prime_u64;

pub const DEFAULT_PRIME: u64 = 7;
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum QuasiSmoothError {
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u64),
    #[error("prime {0} divides a coefficient denominator")]
    DenominatorDivisible(u64),
    #[error("polynomial has {found} variables but the fan has {expected} rays")]
    VariableCount { expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    Randomized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Found,
    NoneFound,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub prime: u64,
    pub mode: SearchMode,
    pub budget: u64,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            prime: DEFAULT_PRIME,
            mode: SearchMode::Exhaustive,
            budget: DEFAULT_BUDGET,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub verdict: Verdict,
    /// Coordinates in `[0, p)`, one per ray.
    pub witness: Option<Vec<u64>>,
    /// Mode actually used.
    pub mode: SearchMode,
    /// Set when an exhaustive scan would have exceeded the budget.
    pub fell_back_to_randomized: bool,
    pub field_size: u64,
    pub points_examined: u64,
    pub note: String,
}

/// `f` reduced modulo `p`, with its partial derivatives.
pub struct ReducedSection {
    p: u64,
    nvars: usize,
    f: Vec<(Vec<u32>, u64)>,
    partials: Vec<Vec<(Vec<u32>, u64)>>,
    /// Whether `f(x) = 0` must be checked on its own (no Euler relation
    /// with a unit factor).
    check_value: bool,
    max_exp: u32,
}

impl ReducedSection {
    /// Clears denominators by their lcm, divides out the content, and
    /// reduces modulo `p`.
    pub fn new(
        variety: &ToricVariety,
        f: &CoxPolynomial,
        p: u64,
    ) -> Result<Self, QuasiSmoothError> {
        if !is_prime_u64(p) || p >= 1 << 31 {
            return Err(QuasiSmoothError::NotPrime(p));
        }
        let n = variety.num_rays();
        if f.num_variables() != n {
            return Err(QuasiSmoothError::VariableCount {
                expected: n,
                found: f.num_variables(),
            });
        }
        let pb = BigInt::from(p);
        if f.terms().values().any(|c| c.denom().is_multiple_of(&pb)) {
            return Err(QuasiSmoothError::DenominatorDivisible(p));
        }
        let lcm = f
            .terms()
            .values()
            .fold(BigInt::one(), |a, c| a.lcm(c.denom()));
        let ints: Vec<BigInt> = f
            .terms()
            .values()
            .map(|c| c.numer() * (&lcm / c.denom()))
            .collect();
        let content = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        let content = if content.is_zero() {
            BigInt::one()
        } else {
            content.abs()
        };
        let reduce = |x: &BigInt| {
            (x / &content)
                .mod_floor(&pb)
                .to_u64()
                .expect("residue below p")
        };
        let terms: Vec<(Vec<u32>, u64)> = f
            .terms()
            .keys()
            .zip(&ints)
            .map(|(m, c)| (m.exponents().to_vec(), reduce(c)))
            .filter(|(_, c)| *c != 0)
            .collect();
        let partials = (0..n)
            .map(|i| {
                terms
                    .iter()
                    .filter(|(e, _)| e[i] > 0)
                    .map(|(e, c)| {
                        let mut d = e.clone();
                        d[i] -= 1;
                        (d, c * (e[i] as u64 % p) % p)
                    })
                    .filter(|(_, c)| *c != 0)
                    .collect()
            })
            .collect();
        // ψ(β) f = Σ ψ(deg z_i) z_i ∂_i f, so a unit ψ(β) makes f(x) = 0 automatic.
        let check_value = !f.class().free.iter().any(|&b| b.rem_euclid(p as i64) != 0);
        let max_exp = terms
            .iter()
            .flat_map(|(e, _)| e.iter().copied())
            .max()
            .unwrap_or(0);
        Ok(Self {
            p,
            nvars: n,
            f: terms,
            partials,
            check_value,
            max_exp,
        })
    }

    fn eval(&self, terms: &[(Vec<u32>, u64)], pows: &[Vec<u64>]) -> u64 {
        let p = self.p;
        terms.iter().fold(0u64, |acc, (e, c)| {
            let mut v = *c;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    v = v * pows[i][k as usize] % p;
                }
            }
            (acc + v) % p
        })
    }

    fn powers(&self, x: &[u64]) -> Vec<Vec<u64>> {
        x.iter()
            .map(|&xi| {
                let mut row = Vec::with_capacity(self.max_exp as usize + 1);
                let mut acc = 1u64;
                for _ in 0..=self.max_exp {
                    row.push(acc);
                    acc = acc * xi % self.p;
                }
                row
            })
            .collect()
    }

    pub fn value(&self, x: &[u64]) -> u64 {
        self.eval(&self.f, &self.powers(x))
    }

    pub fn partial_values(&self, x: &[u64]) -> Vec<u64> {
        let pows = self.powers(x);
        self.partials.iter().map(|t| self.eval(t, &pows)).collect()
    }

    /// All partials vanish at `x` (and `f` too, when not implied).
    pub fn is_critical(&self, x: &[u64]) -> bool {
        let pows = self.powers(x);
        self.partials.iter().all(|t| self.eval(t, &pows) == 0)
            && (!self.check_value || self.eval(&self.f, &pows) == 0)
    }
}

fn zero_mask(x: &[u64]) -> u64 {
    x.iter()
        .enumerate()
        .filter(|(_, &v)| v == 0)
        .fold(0u64, |m, (i, _)| m | (1 << i))
}

fn point_at(mut index: u64, n: usize, p: u64) -> Vec<u64> {
    let mut x = vec![0u64; n];
    for k in (0..n).rev() {
        x[k] = index % p;
        index /= p;
    }
    x
}

pub fn singular_witness_search(
    variety: &ToricVariety,
    f: &CoxPolynomial,
    options: &SearchOptions,
) -> Result<WitnessReport, QuasiSmoothError> {
    let p = options.prime;
    let section = ReducedSection::new(variety, f, p)?;
    let n = section.nvars;
    let qualifies = |x: &[u64]| section.is_critical(x) && variety.is_relevant_mask(zero_mask(x));

    let total = p.checked_pow(n as u32).filter(|&t| t <= options.budget);
    let exhaustive = options.mode == SearchMode::Exhaustive && total.is_some();
    let fell_back = options.mode == SearchMode::Exhaustive && !exhaustive;

    let (witness, examined) = if exhaustive {
        let total = total.unwrap();
        let hit = (0..total)
            .into_par_iter()
            .find_first(|&i| qualifies(&point_at(i, n, p)));
        match hit {
            Some(i) => (Some(point_at(i, n, p)), i + 1),
            None => (None, total),
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        let mut found = None;
        let mut examined = 0;
        for _ in 0..options.budget {
            let x: Vec<u64> = (0..n).map(|_| rng.gen_range(0..p)).collect();
            examined += 1;
            if qualifies(&x) {
                found = Some(x);
                break;
            }
        }
        (found, examined)
    };

    let note = match &witness {
        Some(_) => format!("singular point of V(f) outside Z(Σ) over F_{p}; the input may not be quasi-smooth"),
        None => format!(
            "no singular point outside Z(Σ) found over F_{p}; this is evidence, not proof, of quasi-smoothness over C"
        ),
    };
    Ok(WitnessReport {
        verdict: if witness.is_some() {
            Verdict::Found
        } else {
            Verdict::NoneFound
        },
        witness,
        mode: if exhaustive {
            SearchMode::Exhaustive
        } else {
            SearchMode::Randomized
        },
        fell_back_to_randomized: fell_back,
        field_size: p,
        points_examined: examined,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn p3() -> ToricVariety {
        ToricVariety::new(fixtures::p3()).unwrap()
    }

    #[test]
    fn fermat_quartic_has_no_witness_mod_7() {
        let v = p3();
        let f = CoxPolynomial::parse(&v, "z1^4 + z2^4 + z3^4 + z4^4").unwrap();
        let r = singular_witness_search(&v, &f, &SearchOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NoneFound);
        assert_eq!(r.mode, SearchMode::Exhaustive);
        assert_eq!(r.points_examined, 2401);
    }

    #[test]
    fn double_line_pair_is_singular() {
        let v = p3();
        let f = CoxPolynomial::parse(&v, "z1^2 z2^2").unwrap();
        let r = singular_witness_search(&v, &f, &SearchOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Found);
        let x = r.witness.unwrap();
        assert_eq!(&x[..2], &[0, 0]);
        // First point in scan order with z1 = z2 = 0 and a relevant pattern.
        assert_eq!(x, vec![0, 0, 0, 1]);
    }

    #[test]
    fn fourth_power_is_singular_mod_5() {
        let v = p3();
        let f = CoxPolynomial::parse(&v, "z1^4").unwrap();
        let opts = SearchOptions {
            prime: 5,
            ..SearchOptions::default()
        };
        let r = singular_witness_search(&v, &f, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Found);
        assert_eq!(r.witness.unwrap()[0], 0);
    }

    #[test]
    fn budget_forces_randomized_fallback() {
        let v = p3();
        let f = CoxPolynomial::parse(&v, "z1^2 z2^2").unwrap();
        let opts = SearchOptions {
            budget: 100,
            seed: 5,
            ..SearchOptions::default()
        };
        let a = singular_witness_search(&v, &f, &opts).unwrap();
        assert!(a.fell_back_to_randomized);
        assert_eq!(a.mode, SearchMode::Randomized);
        assert_eq!(a, singular_witness_search(&v, &f, &opts).unwrap());
    }

    #[test]
    fn bad_primes() {
        let v = p3();
        let f = CoxPolynomial::parse(&v, "1/7 z1^4 + z2^4").unwrap();
        assert!(matches!(
            singular_witness_search(&v, &f, &SearchOptions::default()),
            Err(QuasiSmoothError::DenominatorDivisible(7))
        ));
        let opts = SearchOptions {
            prime: 9,
            ..SearchOptions::default()
        };
        assert!(matches!(
            singular_witness_search(&v, &f, &opts),
            Err(QuasiSmoothError::NotPrime(9))
        ));
    }

    #[test]
    fn content_is_divided_out() {
        let v = p3();
        let f = CoxPolynomial::parse(&v, "7 z1^4 + 7 z2^4 + 7 z3^4 + 7 z4^4").unwrap();
        let r = singular_witness_search(&v, &f, &SearchOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NoneFound);
    }
}
