//! Exact rank over the rationals.
//!
//! Two strategies are available. `Bareiss` runs fraction-free elimination
//! on the integer matrix. `MultiModular`, the default, computes ranks
//! modulo a sequence of 31-bit primes and stops once their product exceeds
//! the Hadamard bound on any square minor: a nonzero minor of the rational rank cannot vanish
//! modulo all of them, and no modular rank exceeds the rational one, so the
//! maximum over the primes is the exact rank.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::matrix::{IntMatrix, RatMatrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RankStrategy {
    /// Fraction-free Gaussian elimination over the integers.
    Bareiss,
    /// Certified multi-modular rank.
    #[default]
    MultiModular,
}

pub fn rank_rational(a: &RatMatrix) -> usize {
    rank_integer(&a.clear_denominators(), RankStrategy::default())
}

pub fn rank_rational_with(a: &RatMatrix, strategy: RankStrategy) -> usize {
    rank_integer(&a.clear_denominators(), strategy)
}

pub fn rank_integer(a: &IntMatrix, strategy: RankStrategy) -> usize {
    let rows = nonzero_rows(a);
    if rows.is_empty() {
        return 0;
    }
    match strategy {
        RankStrategy::Bareiss => bareiss_rank(rows, a.cols()),
        RankStrategy::MultiModular => multimodular_rank(&rows, a.cols()),
    }
}

/// Rank of a list of integer vectors of common length `width`.
pub fn rank_of_vectors(vectors: Vec<Vec<BigInt>>, width: usize, strategy: RankStrategy) -> usize {
    let rows: Vec<Vec<BigInt>> = vectors
        .into_iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    if rows.is_empty() {
        return 0;
    }
    match strategy {
        RankStrategy::Bareiss => bareiss_rank(rows, width),
        RankStrategy::MultiModular => multimodular_rank(&rows, width),
    }
}

fn nonzero_rows(a: &IntMatrix) -> Vec<Vec<BigInt>> {
    (0..a.rows())
        .map(|i| a.row(i))
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .map(|r| r.to_vec())
        .collect()
}

/// Fraction-free elimination. Pivots are chosen column by column, taking the
/// lowest remaining row with a nonzero entry.
fn bareiss_rank(mut m: Vec<Vec<BigInt>>, cols: usize) -> usize {
    let nrows = m.len();
    let mut prev = BigInt::from(1);
    let mut r = 0;
    for c in 0..cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let (head, tail) = m.split_at_mut(r + 1);
        let pivot_row = &head[r];
        let pivot = &pivot_row[c];
        tail.par_iter_mut().for_each(|row| {
            let factor = std::mem::take(&mut row[c]);
            for j in c + 1..cols {
                let mut v = pivot * &row[j];
                if !factor.is_zero() && !pivot_row[j].is_zero() {
                    v -= &factor * &pivot_row[j];
                }
                row[j] = if v.is_zero() { v } else { v / &prev };
            }
        });
        prev = m[r][c].clone();
        r += 1;
    }
    r
}

fn multimodular_rank(rows: &[Vec<BigInt>], cols: usize) -> usize {
    let max_rank = rows.len().min(cols);
    let mut primes = PrimeStream::new();
    let first = modular_rank(rows, cols, primes.next().expect("prime available"));
    if first == max_rank {
        return first;
    }
    let needed = hadamard_bits(rows, cols, max_rank).div_ceil(PRIME_BITS) as usize;
    let rest: Vec<u64> = primes.take(needed.saturating_sub(1)).collect();
    assert_eq!(rest.len() + 1, needed.max(1), "ran out of 31-bit primes");
    rest.par_iter()
        .map(|&p| modular_rank(rows, cols, p))
        .max()
        .map_or(first, |r| r.max(first))
}

/// Every prime from [`PrimeStream`] exceeds `2^PRIME_BITS`.
const PRIME_BITS: u64 = 30;

/// Upper bound, in bits, on the absolute value of any `k x k` minor:
/// the smaller of the row-norm and column-norm Hadamard products.
fn hadamard_bits(rows: &[Vec<BigInt>], cols: usize, k: usize) -> u64 {
    let norm_bits = |sq: BigInt| -> u64 { sq.bits().div_ceil(2) };
    let mut row_bits: Vec<u64> = rows
        .iter()
        .map(|r| norm_bits(r.iter().map(|x| x * x).sum()))
        .collect();
    let mut col_bits: Vec<u64> = (0..cols)
        .map(|j| norm_bits(rows.iter().map(|r| &r[j] * &r[j]).sum()))
        .collect();
    row_bits.sort_unstable_by(|a, b| b.cmp(a));
    col_bits.sort_unstable_by(|a, b| b.cmp(a));
    let r: u64 = row_bits.iter().take(k).sum();
    let c: u64 = col_bits.iter().take(k).sum();
    r.min(c)
}

/// Rank modulo a prime `p < 2^32`.
pub fn modular_rank(rows: &[Vec<BigInt>], cols: usize, p: u64) -> usize {
    let pb = BigInt::from(p);
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| x.mod_floor(&pb).to_u64().expect("residue fits in u64"))
                .collect()
        })
        .collect();
    let nrows = m.len();
    let mut r = 0;
    for c in 0..cols {
        if r == nrows {
            break;
        }
        let Some(piv) = (r..nrows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, piv);
        let inv = mod_pow(m[r][c], p - 2, p);
        for x in m[r][c..].iter_mut() {
            *x = *x * inv % p;
        }
        let (head, tail) = m.split_at_mut(r + 1);
        let pivot_row = &head[r];
        tail.par_iter_mut().for_each(|row| {
            let f = row[c];
            if f == 0 {
                return;
            }
            for j in c..cols {
                if pivot_row[j] != 0 {
                    row[j] = (row[j] + (p - f) * pivot_row[j]) % p;
                }
            }
        });
        r += 1;
    }
    r
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Primes descending from `2^31`.
struct PrimeStream {
    next: u64,
}

impl PrimeStream {
    fn new() -> Self {
        Self { next: 1 << 31 }
    }
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        while self.next > (1 << 30) {
            self.next -= 1;
            if is_prime_u64(self.next) {
                return Some(self.next);
            }
        }
        None
    }
}
