//! Graded pieces of the Jacobian ring `R(f) = S / (∂_1 f, ..., ∂_n f)`,
//! primitive Hodge numbers, and the multiplication-map test behind the
//! Noether-Lefschetz criterion.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cox::{graded_basis, CoxError, CoxPolynomial, GradedBasis, Monomial};
use crate::divisor::{anticanonical_class, is_ample_class, is_fano, DivisorClass};
use crate::fan::ToricVariety;
use crate::linalg::{rank_of_vectors, RankStrategy};

#[derive(Debug, Error)]
pub enum JacobianError {
    #[error("polynomial has {found} variables but the fan has {expected} rays")]
    VariableCount { expected: usize, found: usize },
    #[error("polynomial class {0} does not belong to the class group")]
    ClassMismatch(DivisorClass),
    #[error("the Noether-Lefschetz criterion is implemented for dimension 3, got {0}")]
    UnsupportedDimension(usize),
    #[error("class {0} is not ample")]
    NotAmple(DivisorClass),
    #[error("class {class} is not the anticanonical class {anticanonical}")]
    NotAnticanonical {
        class: DivisorClass,
        anticanonical: DivisorClass,
    },
    #[error("the toric variety is not Fano")]
    NotFano,
    #[error(transparent)]
    Cox(#[from] CoxError),
}

/// `dim S_γ`, `dim J(f)_γ` and `dim R(f)_γ = dim S_γ - dim J(f)_γ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedDims {
    pub class: DivisorClass,
    pub dim_s: usize,
    pub dim_j: usize,
    pub dim_r: usize,
}

/// One entry `PH^{p,q}` of the primitive middle cohomology, `q = d - 1 - p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HodgeEntry {
    pub p: usize,
    pub q: usize,
    /// `(d - p) β - β₀`.
    pub class: DivisorClass,
    /// False for `p = d/2 - 1`, where no Jacobian-ring description is used.
    pub valid: bool,
    /// Present exactly when `valid`.
    pub dims: Option<GradedDims>,
}

impl HodgeEntry {
    pub fn dimension(&self) -> Option<usize> {
        self.dims.as_ref().map(|d| d.dim_r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HodgeSummary {
    pub dim: usize,
    pub beta: DivisorClass,
    pub beta0: DivisorClass,
    /// Indexed by `p`, from `0` to `d - 1`.
    pub entries: Vec<HodgeEntry>,
}

impl HodgeSummary {
    pub fn entry(&self, p: usize) -> &HodgeEntry {
        &self.entries[p]
    }
}

/// Outcome of testing `R(f)_{β₁} ⊗ R(f)_γ → R(f)_{β₁+γ}` for surjectivity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SurjectivityCheck {
    pub surjective: bool,
    /// Dimension of the image inside `R(f)_{β₁+γ}`.
    pub image_rank: usize,
    pub target: GradedDims,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NLReport {
    pub surjective: bool,
    /// `dim R(f)_β`, the tangent directions.
    pub dim_source_t: usize,
    /// `dim R(f)_{β-β₀}`, i.e. `PH^{2,0}`.
    pub dim_source_ph20: usize,
    /// `dim R(f)_{2β-β₀}`, i.e. `PH^{1,1}`.
    pub dim_target: usize,
    /// Dimension of the image of the multiplication map in the target.
    pub rank_achieved: usize,
    /// Picard number of the very general member; present iff `surjective`.
    pub predicted_picard: Option<usize>,
    /// Verdict of the explicit rank computation.
    pub explicit_surjective: bool,
    /// True when `β = β₀` on a Fano variety, where surjectivity holds because
    /// `R(f)_0` is one-dimensional.
    pub short_circuit: bool,
    pub cartier: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct K3Summary {
    pub h20: usize,
    pub h11: usize,
    pub primitive_h11: usize,
    pub ambient_h11: usize,
}

/// A section `f` together with its nonzero partial derivatives, scaled to
/// integer coefficients.
pub struct Jacobian<'a> {
    variety: &'a ToricVariety,
    f: &'a CoxPolynomial,
    partials: Vec<(DivisorClass, Vec<(Monomial, BigInt)>)>,
    strategy: RankStrategy,
}

impl<'a> Jacobian<'a> {
    pub fn new(variety: &'a ToricVariety, f: &'a CoxPolynomial) -> Result<Self, JacobianError> {
        Self::with_strategy(variety, f, RankStrategy::default())
    }

    pub fn with_strategy(
        variety: &'a ToricVariety,
        f: &'a CoxPolynomial,
        strategy: RankStrategy,
    ) -> Result<Self, JacobianError> {
        let cl = variety.class_group();
        if f.num_variables() != variety.num_rays() {
            return Err(JacobianError::VariableCount {
                expected: variety.num_rays(),
                found: f.num_variables(),
            });
        }
        if !cl.contains(f.class()) {
            return Err(JacobianError::ClassMismatch(f.class().clone()));
        }
        if let Some(m) = f.terms().keys().find(|m| &m.degree(cl) != f.class()) {
            return Err(CoxError::NotHomogeneous {
                first: f.class().clone(),
                other: m.degree(cl),
            }
            .into());
        }
        let mut partials = Vec::new();
        for i in 0..variety.num_rays() {
            let d = f.partial_derivative(cl, i);
            if d.is_zero() {
                continue;
            }
            let lcm = d
                .terms()
                .values()
                .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            let terms = d
                .terms()
                .iter()
                .map(|(m, c)| (m.clone(), c.numer() * (&lcm / c.denom())))
                .collect();
            partials.push((d.class().clone(), terms));
        }
        Ok(Self {
            variety,
            f,
            partials,
            strategy,
        })
    }

    pub fn variety(&self) -> &ToricVariety {
        self.variety
    }

    pub fn beta(&self) -> &DivisorClass {
        self.f.class()
    }

    /// Column vectors, indexed by `index`, of all `m · ∂_i f` landing in class `gamma`.
    fn jacobian_columns(
        &self,
        gamma: &DivisorClass,
        index: &HashMap<&Monomial, usize>,
    ) -> Result<Vec<Vec<(usize, BigInt)>>, JacobianError> {
        let cl = self.variety.class_group();
        let mut seen: HashSet<Vec<(usize, BigInt)>> = HashSet::new();
        let mut cols = Vec::new();
        for (class, terms) in &self.partials {
            let mult_class = cl.sub(gamma, class);
            let multipliers = graded_basis(self.variety, &mult_class)?;
            for m in &multipliers.monomials {
                let mut col: Vec<(usize, BigInt)> = terms
                    .iter()
                    .map(|(t, c)| (index[&m.mul(t)], c.clone()))
                    .collect();
                col.sort_by_key(|(r, _)| *r);
                if seen.insert(col.clone()) {
                    cols.push(col);
                }
            }
        }
        Ok(cols)
    }

    fn rank(&self, cols: Vec<Vec<(usize, BigInt)>>, keep: &[Option<usize>], width: usize) -> usize {
        let dense: Vec<Vec<BigInt>> = cols
            .into_iter()
            .map(|col| {
                let mut v = vec![BigInt::zero(); width];
                for (r, c) in col {
                    if let Some(k) = keep[r] {
                        v[k] = c;
                    }
                }
                v
            })
            .collect();
        rank_of_vectors(dense, width, self.strategy)
    }

    pub fn dims(&self, gamma: &DivisorClass) -> Result<GradedDims, JacobianError> {
        let basis = graded_basis(self.variety, gamma)?;
        let dims = self.dims_with_basis(&basis)?;
        Ok(dims)
    }

    fn dims_with_basis(&self, basis: &GradedBasis) -> Result<GradedDims, JacobianError> {
        let index: HashMap<&Monomial, usize> = basis
            .monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        let cols = self.jacobian_columns(&basis.class, &index)?;
        let keep: Vec<Option<usize>> = (0..basis.len()).map(Some).collect();
        let dim_j = self.rank(cols, &keep, basis.len());
        Ok(GradedDims {
            class: basis.class.clone(),
            dim_s: basis.len(),
            dim_j,
            dim_r: basis.len() - dim_j,
        })
    }

    /// Decides whether `S_{β₁} · S_γ + J(f)_{β₁+γ} = S_{β₁+γ}`, which is
    /// surjectivity of the multiplication on `R(f)` since `J(f)` is an ideal.
    pub fn multiplication_surjective(
        &self,
        beta1: &DivisorClass,
        gamma: &DivisorClass,
    ) -> Result<SurjectivityCheck, JacobianError> {
        let cl = self.variety.class_group();
        let target_class = cl.add(beta1, gamma);
        let target = graded_basis(self.variety, &target_class)?;
        let left = graded_basis(self.variety, beta1)?;
        let right = graded_basis(self.variety, gamma)?;
        let index: HashMap<&Monomial, usize> = target
            .monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();

        // Products are monomials, i.e. unit columns; they account for their
        // own coordinates and the Jacobian columns are ranked on the rest.
        let mut hit = vec![false; target.len()];
        for a in &left.monomials {
            for b in &right.monomials {
                hit[index[&a.mul(b)]] = true;
            }
        }
        let products = hit.iter().filter(|&&h| h).count();
        let mut keep = vec![None; target.len()];
        let mut width = 0;
        for (r, &h) in hit.iter().enumerate() {
            if !h {
                keep[r] = Some(width);
                width += 1;
            }
        }
        let cols = self.jacobian_columns(&target_class, &index)?;
        let all_rows: Vec<Option<usize>> = (0..target.len()).map(Some).collect();
        let dim_j = self.rank(cols.clone(), &all_rows, target.len());
        let combined = products + self.rank(cols, &keep, width);
        Ok(SurjectivityCheck {
            surjective: combined == target.len(),
            image_rank: combined - dim_j,
            target: GradedDims {
                class: target_class,
                dim_s: target.len(),
                dim_j,
                dim_r: target.len() - dim_j,
            },
        })
    }

    /// `dim PH^{p, d-1-p} = dim R(f)_{(d-p)β - β₀}` for `p ≠ d/2 - 1`.
    pub fn primitive_hodge_dims(&self) -> Result<HodgeSummary, JacobianError> {
        let cl = self.variety.class_group();
        let d = self.variety.dim();
        let beta = self.beta().clone();
        let beta0 = anticanonical_class(self.variety);
        let mut entries = Vec::with_capacity(d);
        for p in 0..d {
            let class = cl.sub(&cl.scale(&beta, (d - p) as i64), &beta0);
            let valid = 2 * p + 2 != d;
            let dims = if valid {
                Some(self.dims(&class)?)
            } else {
                None
            };
            entries.push(HodgeEntry {
                p,
                q: d - 1 - p,
                class,
                valid,
                dims,
            });
        }
        Ok(HodgeSummary {
            dim: d,
            beta,
            beta0,
            entries,
        })
    }

    pub fn nl_check(&self) -> Result<NLReport, JacobianError> {
        let v = self.variety;
        if v.dim() != 3 {
            return Err(JacobianError::UnsupportedDimension(v.dim()));
        }
        let cl = v.class_group();
        let beta = self.beta().clone();
        let verdict =
            is_ample_class(v, &beta).ok_or_else(|| JacobianError::ClassMismatch(beta.clone()))?;
        if !verdict.ample {
            return Err(JacobianError::NotAmple(beta));
        }
        let beta0 = anticanonical_class(v);
        let ph20 = cl.sub(&beta, &beta0);
        let check = self.multiplication_surjective(&beta, &ph20)?;
        let dim_t = self.dims(&beta)?.dim_r;
        let dim_ph20 = self.dims(&ph20)?.dim_r;
        let short_circuit = beta == beta0 && is_fano(v);
        let surjective = short_circuit || check.surjective;
        Ok(NLReport {
            surjective,
            dim_source_t: dim_t,
            dim_source_ph20: dim_ph20,
            dim_target: check.target.dim_r,
            rank_achieved: check.image_rank,
            predicted_picard: surjective.then(|| v.picard_number()),
            explicit_surjective: check.surjective,
            short_circuit,
            cartier: verdict.cartier,
        })
    }

    /// Hodge numbers of an anticanonical K3 surface: `h^{1,1} = ρ(Σ) + dim R(f)_β`.
    pub fn k3_hodge_summary(&self) -> Result<K3Summary, JacobianError> {
        let v = self.variety;
        if v.dim() != 3 {
            return Err(JacobianError::UnsupportedDimension(v.dim()));
        }
        let beta0 = anticanonical_class(v);
        if *self.beta() != beta0 {
            return Err(JacobianError::NotAnticanonical {
                class: self.beta().clone(),
                anticanonical: beta0,
            });
        }
        if !is_fano(v) {
            return Err(JacobianError::NotFano);
        }
        let h20 = self.dims(&v.class_group().zero())?.dim_r;
        let primitive_h11 = self.dims(&beta0)?.dim_r;
        let ambient_h11 = v.picard_number();
        Ok(K3Summary {
            h20,
            h11: ambient_h11 + primitive_h11,
            primitive_h11,
            ambient_h11,
        })
    }
}

pub fn jacobian_dims(
    variety: &ToricVariety,
    f: &CoxPolynomial,
    gamma: &DivisorClass,
) -> Result<GradedDims, JacobianError> {
    Jacobian::new(variety, f)?.dims(gamma)
}

pub fn primitive_hodge_dims(
    variety: &ToricVariety,
    f: &CoxPolynomial,
) -> Result<HodgeSummary, JacobianError> {
    Jacobian::new(variety, f)?.primitive_hodge_dims()
}

pub fn multiplication_surjective(
    variety: &ToricVariety,
    f: &CoxPolynomial,
    beta1: &DivisorClass,
    gamma: &DivisorClass,
) -> Result<SurjectivityCheck, JacobianError> {
    Jacobian::new(variety, f)?.multiplication_surjective(beta1, gamma)
}

pub fn nl_check(variety: &ToricVariety, f: &CoxPolynomial) -> Result<NLReport, JacobianError> {
    Jacobian::new(variety, f)?.nl_check()
}

pub fn k3_hodge_summary(
    variety: &ToricVariety,
    f: &CoxPolynomial,
) -> Result<K3Summary, JacobianError> {
    Jacobian::new(variety, f)?.k3_hodge_summary()
}
