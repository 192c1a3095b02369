//! Filtered φ-modules with diagonal Frobenius.
//!
//! The Frobenius acts on basis line `i` by `unit_i · p^{m_i}` with `unit_i = ±1`;
//! only the exponents `m_i` and the eigenvalue classes matter, so the prime
//! itself is never needed. The filtration is a decreasing flag of rational
//! subspaces listed at its jumps.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Matrix};
use crate::polygon::{parse_rational, Polygon, Rational, SlopeMultiset};

/// Largest rank for which subobjects are enumerated exhaustively.
pub const MAX_ENUMERATION_RANK: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PhiError {
    #[error("malformed filtration: {0}")]
    MalformedFiltration(String),
    #[error("malformed group action: {0}")]
    MalformedGroup(String),
    #[error("unsupported: non-distinct Newton slopes (exponent {0} repeats)")]
    RepeatedExponents(i64),
    #[error("unsupported: rank {0} exceeds the subobject enumeration limit")]
    RankTooLarge(usize),
    #[error("invariant subspace is not spanned by Frobenius eigenvectors")]
    NotEigenlineSpanned,
    #[error("Frobenius unit must be 1 or -1, got {0}")]
    BadUnit(i64),
    #[error("cannot parse module description: {0}")]
    Parse(String),
}

/// Eigenvalue `unit · p^exponent` of one basis line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrobeniusEigen {
    pub unit: i8,
    pub exponent: i64,
}

impl FrobeniusEigen {
    pub fn new(unit: i8, exponent: i64) -> Self {
        FrobeniusEigen { unit, exponent }
    }
}

/// `Fil^jump`, spanned by the rows of `basis`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilStep {
    pub jump: i64,
    pub basis: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredPhiModule {
    frobenius: Vec<FrobeniusEigen>,
    filtration: Vec<FilStep>,
}

impl FilteredPhiModule {
    /// Validates the flag: jumps strictly increasing, first step the whole space,
    /// every step of full row rank, nested, with strictly decreasing dimensions.
    pub fn new(frobenius: Vec<FrobeniusEigen>, filtration: Vec<FilStep>) -> Result<Self, PhiError> {
        let n = frobenius.len();
        let bad = |s: String| Err(PhiError::MalformedFiltration(s));
        if let Some(e) = frobenius.iter().find(|e| e.unit != 1 && e.unit != -1) {
            return Err(PhiError::BadUnit(e.unit as i64));
        }
        if n == 0 {
            if !filtration.is_empty() {
                return bad("rank-0 module must have an empty filtration".into());
            }
            return Ok(FilteredPhiModule {
                frobenius,
                filtration,
            });
        }
        if filtration.is_empty() {
            return bad("filtration must list at least the whole space".into());
        }
        let mut prev: Option<&FilStep> = None;
        for step in &filtration {
            if step.basis.iter().any(|row| row.len() != n) {
                return bad(format!("Fil^{} has vectors of the wrong length", step.jump));
            }
            if step.basis.is_empty() || linalg::rank(&step.basis) != step.basis.len() {
                return bad(format!(
                    "Fil^{} basis is empty or not of full row rank",
                    step.jump
                ));
            }
            match prev {
                None if step.basis.len() != n => {
                    return bad(format!(
                        "Fil^{} (lowest jump) must be the whole space",
                        step.jump
                    ));
                }
                Some(p) if step.jump <= p.jump => return bad("jumps must strictly increase".into()),
                Some(p) if step.basis.len() >= p.basis.len() => {
                    return bad(format!(
                        "dim Fil^{} does not drop below dim Fil^{}",
                        step.jump, p.jump
                    ));
                }
                Some(p) if !step.basis.iter().all(|v| linalg::in_span(&p.basis, v)) => {
                    return bad(format!(
                        "Fil^{} is not contained in Fil^{}",
                        step.jump, p.jump
                    ));
                }
                _ => {}
            }
            prev = Some(step);
        }
        Ok(FilteredPhiModule {
            frobenius,
            filtration,
        })
    }

    /// Rebuilds a valid flag from `(jump, subspace)` pairs whose dimensions may stall or vanish.
    fn from_induced(frobenius: Vec<FrobeniusEigen>, steps: Vec<FilStep>) -> Result<Self, PhiError> {
        let mut kept: Vec<FilStep> = Vec::new();
        for step in steps.into_iter().filter(|s| !s.basis.is_empty()) {
            // equal dimension means equal subspace; the lower jump has zero graded piece
            if kept
                .last()
                .is_some_and(|k| k.basis.len() == step.basis.len())
            {
                kept.pop();
            }
            kept.push(step);
        }
        FilteredPhiModule::new(frobenius, kept)
    }

    pub fn rank(&self) -> usize {
        self.frobenius.len()
    }

    pub fn frobenius(&self) -> &[FrobeniusEigen] {
        &self.frobenius
    }

    pub fn filtration(&self) -> &[FilStep] {
        &self.filtration
    }

    pub fn exponents(&self) -> Vec<i64> {
        self.frobenius.iter().map(|e| e.exponent).collect()
    }

    /// `(jump, dim Fil^jump − dim Fil^{next jump})` for every listed jump.
    pub fn graded_dimensions(&self) -> Vec<(i64, usize)> {
        graded(self.filtration.iter().map(|s| (s.jump, s.basis.len())))
    }

    /// `t_N = Σ m_i`.
    pub fn newton_number(&self) -> i64 {
        self.frobenius.iter().map(|e| e.exponent).sum()
    }

    /// `t_H = Σ jump · graded dimension`.
    pub fn hodge_number(&self) -> i64 {
        self.graded_dimensions()
            .iter()
            .map(|&(j, d)| j * d as i64)
            .sum()
    }

    /// `t_H` of the subobject spanned by the basis lines in `lines`, with induced filtration.
    pub fn subobject_hodge_number(&self, lines: &[usize]) -> i64 {
        let dims = self.filtration.iter().map(|s| {
            // dim(Fil ∩ span(e_S)) = dim Fil − rank of Fil projected away from S
            let outside: Matrix = s
                .basis
                .iter()
                .map(|row| {
                    (0..self.rank())
                        .filter(|i| !lines.contains(i))
                        .map(|i| row[i].clone())
                        .collect()
                })
                .collect();
            let proj_rank = if outside.first().is_some_and(|r| r.is_empty()) {
                0
            } else {
                linalg::rank(&outside)
            };
            (s.jump, s.basis.len() - proj_rank)
        });
        graded(dims).iter().map(|&(j, d)| j * d as i64).sum()
    }

    /// Applies a basis permutation: new line `k` is old line `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, PhiError> {
        let frob = perm.iter().map(|&i| self.frobenius[i]).collect();
        let filt = self
            .filtration
            .iter()
            .map(|s| FilStep {
                jump: s.jump,
                basis: s
                    .basis
                    .iter()
                    .map(|row| perm.iter().map(|&i| row[i].clone()).collect())
                    .collect(),
            })
            .collect();
        FilteredPhiModule::new(frob, filt)
    }
}

fn graded(dims: impl Iterator<Item = (i64, usize)>) -> Vec<(i64, usize)> {
    let dims: Vec<(i64, usize)> = dims.collect();
    dims.iter()
        .enumerate()
        .map(|(i, &(j, d))| (j, d - dims.get(i + 1).map_or(0, |&(_, next)| next)))
        .collect()
}

/// Finite group of rational matrices acting on the module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAction {
    elements: Vec<Matrix>,
}

impl GroupAction {
    /// Checks squareness, invertibility, identity, and closure under product and inverse.
    pub fn new(elements: Vec<Matrix>) -> Result<Self, PhiError> {
        let bad = |s: &str| Err(PhiError::MalformedGroup(s.into()));
        let Some(n) = elements.first().map(|e| e.len()) else {
            return bad("group must contain at least the identity");
        };
        if elements
            .iter()
            .any(|e| e.len() != n || e.iter().any(|r| r.len() != n))
        {
            return bad("elements must be square matrices of equal size");
        }
        if !elements.contains(&linalg::identity(n)) {
            return bad("identity missing");
        }
        for a in &elements {
            let Some(inv) = linalg::inverse(a) else {
                return bad("element is not invertible");
            };
            if !elements.contains(&inv) {
                return bad("not closed under inverse");
            }
            for b in &elements {
                if !elements.contains(&linalg::mat_mul(a, b)) {
                    return bad("not closed under product");
                }
            }
        }
        Ok(GroupAction { elements })
    }

    /// Closure of `generators` under multiplication (capped at `limit` elements).
    pub fn generate(generators: &[Matrix], n: usize, limit: usize) -> Result<Self, PhiError> {
        let mut elements = vec![linalg::identity(n)];
        let mut frontier = elements.clone();
        while let Some(x) = frontier.pop() {
            for g in generators {
                let y = linalg::mat_mul(&x, g);
                if !elements.contains(&y) {
                    if elements.len() >= limit {
                        return Err(PhiError::MalformedGroup(
                            "generated group exceeds size limit".into(),
                        ));
                    }
                    elements.push(y.clone());
                    frontier.push(y);
                }
            }
        }
        GroupAction::new(elements)
    }

    pub fn trivial(n: usize) -> Self {
        GroupAction {
            elements: vec![linalg::identity(n)],
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dimension(&self) -> usize {
        self.elements[0].len()
    }

    pub fn elements(&self) -> &[Matrix] {
        &self.elements
    }

    /// For a group `{1, h}` of order 2, the twisted action `{1, −h}`.
    pub fn sign_twisted(&self) -> Option<GroupAction> {
        if self.order() != 2 {
            return None;
        }
        let id = linalg::identity(self.dimension());
        let h = self.elements.iter().find(|e| **e != id)?;
        let neg: Matrix = h
            .iter()
            .map(|r| r.iter().map(|x| -x.clone()).collect())
            .collect();
        GroupAction::new(vec![id, neg]).ok()
    }

    /// Averaging projector `(1/|H|) Σ h`.
    pub fn averaging_projector(&self) -> Matrix {
        let n = self.dimension();
        let mut p = linalg::zeros(n, n);
        for e in &self.elements {
            for i in 0..n {
                for j in 0..n {
                    p[i][j] += &e[i][j];
                }
            }
        }
        let inv = Rational::new(BigInt::one(), BigInt::from(self.order()));
        for row in p.iter_mut() {
            for x in row.iter_mut() {
                *x *= &inv;
            }
        }
        p
    }

    /// Checks that every element commutes with Frobenius and stabilizes every `Fil^j`.
    pub fn check_compatible(&self, d: &FilteredPhiModule) -> Result<(), PhiError> {
        let n = d.rank();
        if self.dimension() != n {
            return Err(PhiError::MalformedGroup(format!(
                "group acts on dimension {}, module has rank {n}",
                self.dimension()
            )));
        }
        let frob = d.frobenius();
        for h in &self.elements {
            for i in 0..n {
                for j in 0..n {
                    if !h[i][j].is_zero() && frob[i] != frob[j] {
                        return Err(PhiError::MalformedGroup(
                            "element does not commute with Frobenius".into(),
                        ));
                    }
                }
            }
            for step in d.filtration() {
                if !step
                    .basis
                    .iter()
                    .all(|v| linalg::in_span(&step.basis, &linalg::mat_vec(h, v)))
                {
                    return Err(PhiError::MalformedGroup(format!(
                        "element does not preserve Fil^{}",
                        step.jump
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Newton polygon: slopes are the Frobenius exponents.
pub fn newton_polygon_of(d: &FilteredPhiModule) -> Polygon {
    Polygon::from_slopes(&SlopeMultiset::from_integers(d.exponents()))
}

/// Hodge polygon: slope `j` with multiplicity `dim Fil^j − dim Fil^{j+1}`.
pub fn hodge_polygon_of(d: &FilteredPhiModule) -> Polygon {
    let slopes = SlopeMultiset::from_pairs(
        d.graded_dimensions()
            .into_iter()
            .map(|(j, m)| (Rational::from_integer(BigInt::from(j)), m as u64)),
    );
    Polygon::from_slopes(&slopes)
}

pub fn is_ordinary(d: &FilteredPhiModule) -> bool {
    newton_polygon_of(d) == hodge_polygon_of(d)
}

/// Weak admissibility on the distinct-exponent domain, where the φ-stable
/// subspaces are exactly the spans of eigenline subsets.
///
/// A filtration with a single jump `j` is decided for any exponents: then
/// `t_H(D') = j · dim D'` and the module is weakly admissible iff every exponent is `j`.
pub fn is_weakly_admissible(d: &FilteredPhiModule) -> Result<bool, PhiError> {
    let n = d.rank();
    if let [only] = d.filtration() {
        return Ok(d.exponents().iter().all(|&m| m == only.jump));
    }
    let mut seen = BTreeSet::new();
    for e in d.exponents() {
        if !seen.insert(e) {
            return Err(PhiError::RepeatedExponents(e));
        }
    }
    if n > MAX_ENUMERATION_RANK {
        return Err(PhiError::RankTooLarge(n));
    }
    if d.newton_number() != d.hodge_number() {
        return Ok(false);
    }
    let exps = d.exponents();
    for mask in 1u32..(1u32 << n) {
        let lines: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let t_n: i64 = lines.iter().map(|&i| exps[i]).sum();
        if d.subobject_hodge_number(&lines) > t_n {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `D^H`: image of the averaging projector with induced Frobenius and filtration.
pub fn invariants(d: &FilteredPhiModule, h: &GroupAction) -> Result<FilteredPhiModule, PhiError> {
    h.check_compatible(d)?;
    let n = d.rank();
    let proj = h.averaging_projector();
    let image = linalg::row_basis(&linalg::transpose(&proj, n));

    // decompose along Frobenius eigenspaces
    let classes: BTreeSet<FrobeniusEigen> = d.frobenius().iter().copied().collect();
    let mut basis: Matrix = Vec::new();
    let mut frob = Vec::new();
    for class in classes {
        let eigenspace: Matrix = (0..n)
            .filter(|&i| d.frobenius()[i] == class)
            .map(|i| unit_vector(n, i))
            .collect();
        for v in linalg::intersect(&image, &eigenspace, n) {
            basis.push(v);
            frob.push(class);
        }
    }
    if basis.len() != image.len() {
        return Err(PhiError::NotEigenlineSpanned);
    }

    let steps = d
        .filtration()
        .iter()
        .map(|s| {
            let meet = linalg::intersect(&s.basis, &basis, n);
            let coords = meet
                .iter()
                .map(|v| linalg::coordinates(&basis, v).ok_or(PhiError::NotEigenlineSpanned))
                .collect::<Result<Matrix, _>>()?;
            Ok(FilStep {
                jump: s.jump,
                basis: coords,
            })
        })
        .collect::<Result<Vec<_>, PhiError>>()?;
    FilteredPhiModule::from_induced(frob, steps)
}

fn unit_vector(n: usize, i: usize) -> Vec<Rational> {
    (0..n)
        .map(|j| {
            if i == j {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect()
}

/// Rational serialized as a string (`"a/b"`) or a bare integer.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalRepr {
    Int(i64),
    Text(String),
}

impl RationalRepr {
    fn value(&self) -> Result<Rational, PhiError> {
        match self {
            RationalRepr::Int(n) => Ok(BigRational::from_integer(BigInt::from(*n))),
            RationalRepr::Text(s) => parse_rational(s).map_err(|e| PhiError::Parse(e.to_string())),
        }
    }

    fn from_value(r: &Rational) -> Self {
        RationalRepr::Text(r.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilStepRepr {
    pub jump: i64,
    pub basis: Vec<Vec<RationalRepr>>,
}

/// JSON description of a module and an optional group action.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhiModuleDescription {
    pub frobenius: Vec<FrobeniusEigenRepr>,
    pub filtration: Vec<FilStepRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<Vec<Vec<Vec<RationalRepr>>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrobeniusEigenRepr {
    #[serde(default = "default_unit")]
    pub unit: i64,
    pub exponent: i64,
}

fn default_unit() -> i64 {
    1
}

fn matrix_of(rows: &[Vec<RationalRepr>]) -> Result<Matrix, PhiError> {
    rows.iter()
        .map(|r| r.iter().map(RationalRepr::value).collect())
        .collect()
}

impl PhiModuleDescription {
    pub fn parse(text: &str) -> Result<Self, PhiError> {
        serde_json::from_str(text).map_err(|e| PhiError::Parse(e.to_string()))
    }

    pub fn module(&self) -> Result<FilteredPhiModule, PhiError> {
        let frob = self
            .frobenius
            .iter()
            .map(|e| match e.unit {
                1 | -1 => Ok(FrobeniusEigen::new(e.unit as i8, e.exponent)),
                u => Err(PhiError::BadUnit(u)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let filt = self
            .filtration
            .iter()
            .map(|s| {
                Ok(FilStep {
                    jump: s.jump,
                    basis: matrix_of(&s.basis)?,
                })
            })
            .collect::<Result<Vec<_>, PhiError>>()?;
        FilteredPhiModule::new(frob, filt)
    }

    pub fn group_action(&self) -> Result<Option<GroupAction>, PhiError> {
        self.group
            .as_ref()
            .map(|els| {
                GroupAction::new(els.iter().map(|m| matrix_of(m)).collect::<Result<_, _>>()?)
            })
            .transpose()
    }

    pub fn from_module(d: &FilteredPhiModule) -> Self {
        PhiModuleDescription {
            frobenius: d
                .frobenius()
                .iter()
                .map(|e| FrobeniusEigenRepr {
                    unit: e.unit as i64,
                    exponent: e.exponent,
                })
                .collect(),
            filtration: d
                .filtration()
                .iter()
                .map(|s| FilStepRepr {
                    jump: s.jump,
                    basis: s
                        .basis
                        .iter()
                        .map(|r| r.iter().map(RationalRepr::from_value).collect())
                        .collect(),
                })
                .collect(),
            group: None,
        }
    }
}
