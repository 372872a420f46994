//! Simplicial fans: validation, class group, Picard number and the
//! irrelevant-locus relevance test.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::divisor::DivisorClass;
use crate::linalg::{cokernel, feasible_nonnegative, IntMatrix, RatMatrix};

#[derive(Debug, Error)]
pub enum FanError {
    #[error("fan dimension must be at least 1")]
    ZeroDimension,
    #[error("ray {ray} has {len} coordinates, expected {dim}")]
    RayLength { ray: usize, len: usize, dim: usize },
    #[error("cone {cone} refers to ray index {index}, but there are {rays} rays")]
    IndexOutOfRange {
        cone: usize,
        index: usize,
        rays: usize,
    },
    #[error("too many rays ({0}); at most 64 are supported")]
    TooManyRays(usize),
    #[error("fan failed validation")]
    Invalid(Box<ValidationReport>),
    #[error("entry does not fit in 64 bits")]
    Overflow,
}

/// Rays and maximal cones of a fan in `Z^dim`. Cone entries are 0-based ray
/// indices, sorted within each cone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fan {
    pub name: Option<String>,
    pub dim: usize,
    pub rays: Vec<Vec<i64>>,
    pub cones: Vec<Vec<usize>>,
}

impl Fan {
    /// Structural checks only; see [`validate_fan`] for the fan axioms.
    pub fn new(dim: usize, rays: Vec<Vec<i64>>, cones: Vec<Vec<usize>>) -> Result<Self, FanError> {
        if dim == 0 {
            return Err(FanError::ZeroDimension);
        }
        if rays.len() > 64 {
            return Err(FanError::TooManyRays(rays.len()));
        }
        for (i, r) in rays.iter().enumerate() {
            if r.len() != dim {
                return Err(FanError::RayLength {
                    ray: i,
                    len: r.len(),
                    dim,
                });
            }
        }
        let mut cones = cones;
        for (c, cone) in cones.iter_mut().enumerate() {
            if let Some(&index) = cone.iter().find(|&&i| i >= rays.len()) {
                return Err(FanError::IndexOutOfRange {
                    cone: c,
                    index,
                    rays: rays.len(),
                });
            }
            cone.sort_unstable();
        }
        Ok(Self {
            name: None,
            dim,
            rays,
            cones,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    /// `n x d` matrix whose rows are the rays; as a map `M -> Z^n` it sends
    /// `m` to `(<m, v_1>, ..., <m, v_n>)`.
    pub fn ray_matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(self.dim, &self.rays)
    }

    fn ray_rat(&self, i: usize, k: usize) -> BigRational {
        BigRational::from_integer(self.rays[i][k].into())
    }

    /// Relabels the rays by `perm` (new index `perm[i]` for old ray `i`).
    pub fn permute_rays(&self, perm: &[usize]) -> Fan {
        let mut rays = vec![Vec::new(); self.rays.len()];
        for (i, r) in self.rays.iter().enumerate() {
            rays[perm[i]] = r.clone();
        }
        let cones = self
            .cones
            .iter()
            .map(|c| c.iter().map(|&i| perm[i]).collect())
            .collect();
        let mut fan = Fan::new(self.dim, rays, cones).expect("permutation keeps structure");
        fan.name = self.name.clone();
        fan
    }
}

/// Outcome of checking the fan axioms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub primitive: bool,
    /// Rays that are zero or not primitive.
    pub non_primitive_rays: Vec<usize>,
    /// Pairs of rays with equal coordinates.
    pub duplicate_rays: Vec<(usize, usize)>,
    /// Rays not used by any maximal cone.
    pub unused_rays: Vec<usize>,
    pub simplicial: bool,
    /// Maximal cones without exactly `dim` independent rays.
    pub non_simplicial_cones: Vec<usize>,
    pub facet_pairing: bool,
    /// Facets (sorted ray index lists) not shared by exactly two maximal cones.
    pub unmatched_facets: Vec<Vec<usize>>,
    pub proper_intersection: bool,
    /// Pairs of maximal cones that overlap beyond their common face.
    pub improper_pairs: Vec<(usize, usize)>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.primitive && self.simplicial && self.facet_pairing && self.proper_intersection
    }
}

fn gcd_all(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

pub fn validate_fan(fan: &Fan) -> ValidationReport {
    let mut report = ValidationReport::default();
    let d = fan.dim;

    for (i, r) in fan.rays.iter().enumerate() {
        if gcd_all(r) != 1 {
            report.non_primitive_rays.push(i);
        }
        for j in i + 1..fan.rays.len() {
            if fan.rays[j] == *r {
                report.duplicate_rays.push((i, j));
            }
        }
    }
    let mut used = vec![false; fan.num_rays()];
    for cone in &fan.cones {
        for &i in cone {
            used[i] = true;
        }
    }
    report.unused_rays = (0..fan.num_rays()).filter(|&i| !used[i]).collect();
    report.primitive = report.non_primitive_rays.is_empty()
        && report.duplicate_rays.is_empty()
        && report.unused_rays.is_empty();

    for (c, cone) in fan.cones.iter().enumerate() {
        let distinct = cone.windows(2).all(|w| w[0] != w[1]);
        let ok = distinct && cone.len() == d && {
            let rows: Vec<Vec<i64>> = cone.iter().map(|&i| fan.rays[i].clone()).collect();
            !IntMatrix::from_rows(d, &rows).determinant().is_zero()
        };
        if !ok {
            report.non_simplicial_cones.push(c);
        }
    }
    report.simplicial = report.non_simplicial_cones.is_empty() && !fan.cones.is_empty();

    let mut facets: HashMap<Vec<usize>, usize> = HashMap::new();
    for (c, cone) in fan.cones.iter().enumerate() {
        if report.non_simplicial_cones.contains(&c) {
            continue;
        }
        for skip in 0..cone.len() {
            let facet: Vec<usize> = cone
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != skip)
                .map(|(_, &i)| i)
                .collect();
            *facets.entry(facet).or_default() += 1;
        }
    }
    let mut unmatched: Vec<Vec<usize>> = facets
        .into_iter()
        .filter(|&(_, count)| count != 2)
        .map(|(f, _)| f)
        .collect();
    unmatched.sort();
    report.facet_pairing = unmatched.is_empty() && report.simplicial;
    report.unmatched_facets = unmatched;

    for a in 0..fan.cones.len() {
        for b in a + 1..fan.cones.len() {
            if report.non_simplicial_cones.contains(&a) || report.non_simplicial_cones.contains(&b)
            {
                continue;
            }
            if !intersect_properly(fan, &fan.cones[a], &fan.cones[b]) {
                report.improper_pairs.push((a, b));
            }
        }
    }
    report.proper_intersection = report.improper_pairs.is_empty() && report.simplicial;
    report
}

/// Two simplicial cones meet in the cone over their common rays iff no
/// point of the intersection has a positive coordinate (in the first cone's
/// unique expansion) on a ray outside the common set. That is an LP
/// feasibility question, decided exactly.
fn intersect_properly(fan: &Fan, first: &[usize], second: &[usize]) -> bool {
    if first == second {
        return false;
    }
    let outside: Vec<usize> = (0..first.len())
        .filter(|&k| !second.contains(&first[k]))
        .collect();
    let d = fan.dim;
    let vars = first.len() + second.len();
    let mut a = RatMatrix::zeros(d + 1, vars);
    for k in 0..d {
        for (j, &ray) in first.iter().enumerate() {
            a[(k, j)] = fan.ray_rat(ray, k);
        }
        for (j, &ray) in second.iter().enumerate() {
            a[(k, first.len() + j)] = -fan.ray_rat(ray, k);
        }
    }
    for &j in &outside {
        a[(d, j)] = BigRational::from_integer(1.into());
    }
    let mut b = vec![BigRational::zero(); d + 1];
    b[d] = BigRational::from_integer(1.into());
    feasible_nonnegative(&a, &b).is_none()
}

/// `Cl(Σ)` as `Z^free_rank ⊕ ⊕ Z/t_k`, with the degree of every ray variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassGroupInfo {
    pub free_rank: usize,
    pub torsion: Vec<i64>,
    /// `free_rank x n`; column `i` is the free part of `deg z_i`.
    pub free_degrees: Vec<Vec<i64>>,
    /// `torsion.len() x n`; residues of `deg z_i`.
    pub torsion_degrees: Vec<Vec<i64>>,
}

impl ClassGroupInfo {
    pub fn num_variables(&self) -> usize {
        self.free_degrees
            .first()
            .or(self.torsion_degrees.first())
            .map_or(0, |r| r.len())
    }

    pub fn zero(&self) -> DivisorClass {
        DivisorClass {
            free: vec![0; self.free_rank],
            torsion: vec![0; self.torsion.len()],
        }
    }

    /// Reduces torsion residues into range.
    pub fn normalize(&self, c: DivisorClass) -> DivisorClass {
        let torsion = c
            .torsion
            .iter()
            .zip(&self.torsion)
            .map(|(&r, &t)| r.mod_floor(&t))
            .collect();
        DivisorClass {
            free: c.free,
            torsion,
        }
    }

    /// Class of `Σ a_i D_i`, equivalently the degree of `z^a`.
    pub fn degree(&self, a: &[i64]) -> DivisorClass {
        let dot = |row: &Vec<i64>| -> i64 { row.iter().zip(a).map(|(x, y)| x * y).sum() };
        self.normalize(DivisorClass {
            free: self.free_degrees.iter().map(dot).collect(),
            torsion: self.torsion_degrees.iter().map(dot).collect(),
        })
    }

    pub fn degree_u32(&self, exps: &[u32]) -> DivisorClass {
        let a: Vec<i64> = exps.iter().map(|&e| e as i64).collect();
        self.degree(&a)
    }

    pub fn variable_degree(&self, i: usize) -> DivisorClass {
        DivisorClass {
            free: self.free_degrees.iter().map(|r| r[i]).collect(),
            torsion: self.torsion_degrees.iter().map(|r| r[i]).collect(),
        }
    }

    pub fn add(&self, a: &DivisorClass, b: &DivisorClass) -> DivisorClass {
        self.normalize(DivisorClass {
            free: a.free.iter().zip(&b.free).map(|(x, y)| x + y).collect(),
            torsion: a
                .torsion
                .iter()
                .zip(&b.torsion)
                .map(|(x, y)| x + y)
                .collect(),
        })
    }

    pub fn sub(&self, a: &DivisorClass, b: &DivisorClass) -> DivisorClass {
        self.add(a, &self.scale(b, -1))
    }

    pub fn scale(&self, a: &DivisorClass, k: i64) -> DivisorClass {
        self.normalize(DivisorClass {
            free: a.free.iter().map(|x| x * k).collect(),
            torsion: a.torsion.iter().map(|x| x * k).collect(),
        })
    }

    /// Whether `c` has the right shape for this group.
    pub fn contains(&self, c: &DivisorClass) -> bool {
        c.free.len() == self.free_rank
            && c.torsion.len() == self.torsion.len()
            && c.torsion
                .iter()
                .zip(&self.torsion)
                .all(|(&r, &t)| (0..t).contains(&r))
    }
}

fn to_i64(x: &BigInt) -> Result<i64, FanError> {
    x.to_i64().ok_or(FanError::Overflow)
}

/// Cokernel of `M -> Z^n, m -> (<m, v_i>)_i`.
pub fn class_group(fan: &Fan) -> Result<ClassGroupInfo, FanError> {
    let ck = cokernel(&fan.ray_matrix());
    let rows = |m: &IntMatrix| -> Result<Vec<Vec<i64>>, FanError> {
        m.to_rows()
            .iter()
            .map(|r| r.iter().map(to_i64).collect())
            .collect()
    };
    Ok(ClassGroupInfo {
        free_rank: ck.free_rank,
        torsion: ck.torsion.iter().map(to_i64).collect::<Result<_, _>>()?,
        free_degrees: rows(&ck.free_projection)?,
        torsion_degrees: rows(&ck.torsion_projection)?,
    })
}

/// A validated complete simplicial fan together with its class group.
#[derive(Clone, Debug)]
pub struct ToricVariety {
    fan: Fan,
    class_group: ClassGroupInfo,
    cone_masks: Vec<u64>,
}

impl ToricVariety {
    pub fn new(fan: Fan) -> Result<Self, FanError> {
        let report = validate_fan(&fan);
        if !report.passed() {
            return Err(FanError::Invalid(Box::new(report)));
        }
        let class_group = class_group(&fan)?;
        let cone_masks = fan
            .cones
            .iter()
            .map(|c| c.iter().fold(0u64, |m, &i| m | (1 << i)))
            .collect();
        Ok(Self {
            fan,
            class_group,
            cone_masks,
        })
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn dim(&self) -> usize {
        self.fan.dim
    }

    pub fn num_rays(&self) -> usize {
        self.fan.num_rays()
    }

    pub fn class_group(&self) -> &ClassGroupInfo {
        &self.class_group
    }

    /// `ρ(Σ)`, the free rank of the class group.
    pub fn picard_number(&self) -> usize {
        self.class_group.free_rank
    }

    /// True iff the rays in `pattern` all lie in one cone of the fan, i.e. a
    /// point whose zero coordinates are exactly `pattern` avoids `Z(Σ)`.
    pub fn is_relevant(&self, pattern: &[usize]) -> Result<bool, FanError> {
        let mut mask = 0u64;
        for &i in pattern {
            if i >= self.num_rays() {
                return Err(FanError::IndexOutOfRange {
                    cone: 0,
                    index: i,
                    rays: self.num_rays(),
                });
            }
            mask |= 1 << i;
        }
        Ok(self.is_relevant_mask(mask))
    }

    pub fn is_relevant_mask(&self, mask: u64) -> bool {
        self.cone_masks.iter().any(|&c| c & mask == mask)
    }
}

pub fn picard_number(variety: &ToricVariety) -> usize {
    variety.picard_number()
}
