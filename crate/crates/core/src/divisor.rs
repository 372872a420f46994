//! Divisor classes, torus-invariant representatives, and the
//! support-function test for ampleness.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::fan::ToricVariety;
use crate::linalg::{solve_integer, solve_rational, IntMatrix, RatMatrix};

/// An element of `Cl(Σ)`: free coordinates plus torsion residues.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DivisorClass {
    pub free: Vec<i64>,
    pub torsion: Vec<i64>,
}

impl DivisorClass {
    pub fn free(free: Vec<i64>) -> Self {
        Self {
            free,
            torsion: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.free.iter().chain(&self.torsion).all(|&x| x == 0)
    }
}

impl fmt::Display for DivisorClass {
    /// `2,2,2`, or `1;2` when there is torsion.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[i64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{}", join(&self.free))?;
        if !self.torsion.is_empty() {
            write!(f, ";{}", join(&self.torsion))?;
        }
        Ok(())
    }
}

/// `Σ a_i D_i`, one coefficient per ray.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorusDivisor(pub Vec<i64>);

impl TorusDivisor {
    pub fn coefficients(&self) -> &[i64] {
        &self.0
    }

    /// `D + div(χ^m)`: coefficients `a_i + <m, v_i>`.
    pub fn add_principal(&self, variety: &ToricVariety, m: &[i64]) -> TorusDivisor {
        let rays = &variety.fan().rays;
        TorusDivisor(
            self.0
                .iter()
                .zip(rays)
                .map(|(a, v)| a + v.iter().zip(m).map(|(x, y)| x * y).sum::<i64>())
                .collect(),
        )
    }
}

pub fn class_of(variety: &ToricVariety, d: &TorusDivisor) -> DivisorClass {
    variety.class_group().degree(&d.0)
}

/// `β₀ = -deg K`, the class of the sum of all ray divisors.
pub fn anticanonical_class(variety: &ToricVariety) -> DivisorClass {
    class_of(variety, &TorusDivisor(vec![1; variety.num_rays()]))
}

/// A torus-invariant divisor with class `beta`. Degree maps are surjective,
/// so `None` only comes back for malformed classes.
pub fn lift_class(variety: &ToricVariety, beta: &DivisorClass) -> Option<TorusDivisor> {
    let cl = variety.class_group();
    if !cl.contains(beta) {
        return None;
    }
    let n = variety.num_rays();
    let t = cl.torsion.len();
    // Unknowns: a (n of them), then one multiplier per torsion factor.
    let mut a = IntMatrix::zeros(cl.free_rank + t, n + t);
    for (r, row) in cl.free_degrees.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            a[(r, j)] = x.into();
        }
    }
    for (k, row) in cl.torsion_degrees.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            a[(cl.free_rank + k, j)] = x.into();
        }
        a[(cl.free_rank + k, n + k)] = (-cl.torsion[k]).into();
    }
    let rhs: Vec<BigInt> = beta
        .free
        .iter()
        .chain(&beta.torsion)
        .map(|&x| x.into())
        .collect();
    let x = solve_integer(&a, &rhs)?;
    let coeffs = x[..n]
        .iter()
        .map(|v| v.to_i64())
        .collect::<Option<Vec<_>>>()?;
    Some(TorusDivisor(coeffs))
}

/// Local linear data of the support function of a divisor on one maximal cone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConeData {
    pub cone: usize,
    /// `m_σ` with `<m_σ, v_i> = -a_i` for the rays of the cone, as reduced fractions.
    pub m: Vec<String>,
    pub integral: bool,
    /// `(j, <m_σ, v_j> > -a_j)` for each ray outside the cone.
    pub strict: Vec<(usize, bool)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupportFunctionData {
    pub cones: Vec<ConeData>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AmpleVerdict {
    pub ample: bool,
    pub cartier: bool,
    pub data: SupportFunctionData,
}

/// Local solutions `m_σ`, one per maximal cone.
pub(crate) fn local_data(variety: &ToricVariety, d: &TorusDivisor) -> Vec<Vec<BigRational>> {
    let fan = variety.fan();
    let dim = fan.dim;
    fan.cones
        .iter()
        .map(|cone| {
            let mut a = RatMatrix::zeros(dim, dim);
            let mut b = Vec::with_capacity(dim);
            for (r, &i) in cone.iter().enumerate() {
                for k in 0..dim {
                    a[(r, k)] = BigRational::from_integer(fan.rays[i][k].into());
                }
                b.push(BigRational::from_integer((-d.0[i]).into()));
            }
            solve_rational(&a, &b).expect("validated cones are simplicial")
        })
        .collect()
}

fn pairing(m: &[BigRational], v: &[i64]) -> BigRational {
    m.iter().zip(v).fold(BigRational::zero(), |acc, (x, &y)| {
        acc + x * BigRational::from_integer(y.into())
    })
}

/// Strict convexity of the support function (ample as a Q-divisor) and
/// integrality of every `m_σ` (Cartier), reported separately.
pub fn is_ample(variety: &ToricVariety, d: &TorusDivisor) -> AmpleVerdict {
    let fan = variety.fan();
    let locals = local_data(variety, d);
    let mut cones = Vec::with_capacity(locals.len());
    let mut ample = true;
    let mut cartier = true;
    for (c, (cone, m)) in fan.cones.iter().zip(&locals).enumerate() {
        let integral = m.iter().all(|x| x.denom().is_one());
        let strict: Vec<(usize, bool)> = (0..fan.num_rays())
            .filter(|j| !cone.contains(j))
            .map(|j| {
                let lhs = pairing(m, &fan.rays[j]);
                (j, lhs > BigRational::from_integer((-d.0[j]).into()))
            })
            .collect();
        ample &= strict.iter().all(|&(_, s)| s);
        cartier &= integral;
        cones.push(ConeData {
            cone: c,
            m: m.iter().map(|x| x.to_string()).collect(),
            integral,
            strict,
        });
    }
    AmpleVerdict {
        ample,
        cartier,
        data: SupportFunctionData { cones },
    }
}

/// Ampleness of a class, via any torus-invariant representative.
pub fn is_ample_class(variety: &ToricVariety, beta: &DivisorClass) -> Option<AmpleVerdict> {
    lift_class(variety, beta).map(|d| is_ample(variety, &d))
}

pub fn is_fano(variety: &ToricVariety) -> bool {
    is_ample(variety, &TorusDivisor(vec![1; variety.num_rays()])).ample
}
