//! Slope algebra for duals, tensor products and endomorphism objects, and
//! the slope-window test for abelian origin.
//!
//! If an F-isocrystal comes from a family of abelian varieties, every Newton
//! slope of its monodromy Lie algebra at a closed point is a difference
//! `α − β` of slopes in `[0, 1]`, hence lies in `[−1, 1]`. Given the slopes of
//! a fiber `V` and the dimension of the monodromy Lie algebra, this module
//! computes how large a sub-object of `End(V)` with slopes in that window
//! can be, and reports a violation when the Lie algebra is too big to fit.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::polygon::{Rational, SlopeMultiset};

/// Caller-supplied shape of a monodromy Lie algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LieConstraint {
    pub dimension: u64,
    pub traceless: bool,
    pub self_dual: bool,
}

impl LieConstraint {
    /// `None` when `dimension == 0`.
    pub fn new(dimension: u64, traceless: bool, self_dual: bool) -> Option<Self> {
        (dimension >= 1).then_some(LieConstraint {
            dimension,
            traceless,
            self_dual,
        })
    }

    /// `sp_4`: 10-dimensional, traceless, self-dual.
    pub fn sp4() -> Self {
        LieConstraint {
            dimension: 10,
            traceless: true,
            self_dual: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Consistent,
    Violation,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "CONSISTENT",
            Verdict::Violation => "VIOLATION",
        })
    }
}

/// Dimension-counting certificate for the abelian-origin test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriterionReport {
    pub input_slopes: SlopeMultiset,
    pub end_slopes: SlopeMultiset,
    /// Multiplicities of End slopes inside the window, after the trace-zero cap.
    pub window_multiplicities: BTreeMap<Rational, u64>,
    pub window_lower: Rational,
    /// `None` for the one-sided window used without self-duality.
    pub window_upper: Option<Rational>,
    pub admissible_dimension_bound: u64,
    pub lie_dimension: u64,
    pub verdict: Verdict,
    /// The window content is not symmetric about 0 (only possible when `self_dual` is false).
    pub asymmetric_window: bool,
    pub notes: Vec<String>,
}

/// `α ↦ −α`.
pub fn dual_slopes(s: &SlopeMultiset) -> SlopeMultiset {
    SlopeMultiset::from_pairs(s.iter().map(|(a, m)| (-a.clone(), m)))
}

/// All pairwise sums with product multiplicities.
pub fn tensor_slopes(a: &SlopeMultiset, b: &SlopeMultiset) -> SlopeMultiset {
    let mut out = SlopeMultiset::new();
    for (x, mx) in a.iter() {
        for (y, my) in b.iter() {
            out.insert(x + y, mx * my);
        }
    }
    out
}

/// Slopes of `End(V) = V ⊗ V^∨`: all differences `α − β`.
pub fn end_slopes(s: &SlopeMultiset) -> SlopeMultiset {
    tensor_slopes(s, &dual_slopes(s))
}

/// Necessary condition for `R^1` of an abelian scheme: every slope in `[0, 1]`.
pub fn av_slope_bound_check(s: &SlopeMultiset) -> bool {
    let zero = Rational::zero();
    let one = Rational::one();
    s.iter().all(|(a, _)| *a >= zero && *a <= one)
}

/// Runs the window test with the window `[−1, 1]` (self-dual) or `[−1, ∞)`.
pub fn max_admissible_lie_dim(s_v: &SlopeMultiset, lie: &LieConstraint) -> CriterionReport {
    max_admissible_lie_dim_in_window(s_v, lie, &Rational::one())
}

/// Same as [`max_admissible_lie_dim`] with the window widened to `[−c, c]` / `[−c, ∞)`.
pub fn max_admissible_lie_dim_in_window(
    s_v: &SlopeMultiset,
    lie: &LieConstraint,
    c: &Rational,
) -> CriterionReport {
    let end = end_slopes(s_v);
    let lower = -c.clone();
    let upper = lie.self_dual.then(|| c.clone());
    let window = end.restrict(&lower, upper.as_ref());

    let zero = Rational::zero();
    let mut mults: BTreeMap<Rational, u64> = window.iter().map(|(s, m)| (s.clone(), m)).collect();
    let mut notes = Vec::new();
    if lie.traceless {
        if let Some(m) = mults.get_mut(&zero) {
            // the identity line of End(V) is not traceless
            *m -= 1;
            notes.push(format!(
                "trace-zero cap: slope 0 multiplicity {} -> {}",
                *m + 1,
                *m
            ));
            if *m == 0 {
                mults.remove(&zero);
            }
        }
    }
    let bound: u64 = mults.values().sum();

    let asymmetric_window = mults
        .iter()
        .any(|(s, m)| mults.get(&-s.clone()).copied().unwrap_or(0) != *m);
    if !lie.self_dual && end.max().is_some_and(|m| *m > *c) {
        notes.push(format!(
            "not self-dual: End slopes above {c} are kept; window [{lower}, inf) is one-sided"
        ));
    }

    let verdict = if lie.dimension > bound {
        Verdict::Violation
    } else {
        Verdict::Consistent
    };
    CriterionReport {
        input_slopes: s_v.clone(),
        end_slopes: end,
        window_multiplicities: mults,
        window_lower: lower,
        window_upper: upper,
        admissible_dimension_bound: bound,
        lie_dimension: lie.dimension,
        verdict,
        asymmetric_window,
        notes,
    }
}

/// Convenience wrapper returning only the verdict.
pub fn check_abelian_origin_criterion(s_v: &SlopeMultiset, lie: &LieConstraint) -> Verdict {
    max_admissible_lie_dim(s_v, lie).verdict
}

/// Integer rational helper for tests and callers.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ms(v: &[i64]) -> SlopeMultiset {
        SlopeMultiset::from_integers(v.iter().copied())
    }

    fn pairs(v: &[(i64, u64)]) -> SlopeMultiset {
        SlopeMultiset::from_pairs(v.iter().map(|&(s, m)| (int(s), m)))
    }

    /// Enumerates ordered pairs directly.
    fn brute_end(slopes: &[i64]) -> SlopeMultiset {
        let mut out = SlopeMultiset::new();
        for a in slopes {
            for b in slopes {
                out.insert(int(a - b), 1);
            }
        }
        out
    }

    #[test]
    fn duals() {
        assert_eq!(dual_slopes(&ms(&[0, 1, 2, 3])), ms(&[-3, -2, -1, 0]));
        assert_eq!(dual_slopes(&ms(&[0, 0])), ms(&[0, 0]));
        let half = SlopeMultiset::from_pairs([(Rational::new(1.into(), 2.into()), 1)]);
        let neg_half = SlopeMultiset::from_pairs([(Rational::new((-1).into(), 2.into()), 1)]);
        assert_eq!(dual_slopes(&half), neg_half);
    }

    #[test]
    fn tensors() {
        assert_eq!(tensor_slopes(&ms(&[0, 1]), &ms(&[0])), ms(&[0, 1]));
        assert_eq!(tensor_slopes(&ms(&[0, 1]), &ms(&[0, 1])), ms(&[0, 1, 1, 2]));
        let sq = tensor_slopes(&ms(&[0, 1, 2, 3]), &ms(&[0, 1, 2, 3]));
        assert_eq!(sq.total(), 16);
        assert_eq!(
            sq,
            pairs(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 3), (5, 2), (6, 1)])
        );
    }

    #[test]
    fn end_of_ordinary_quartic() {
        let e = end_slopes(&ms(&[0, 1, 2, 3]));
        assert_eq!(
            e,
            pairs(&[(-3, 1), (-2, 2), (-1, 3), (0, 4), (1, 3), (2, 2), (3, 1)])
        );
        assert_eq!(e, brute_end(&[0, 1, 2, 3]));
        assert_eq!(end_slopes(&ms(&[0])), ms(&[0]));
        assert_eq!(end_slopes(&ms(&[0, 1])), pairs(&[(-1, 1), (0, 2), (1, 1)]));
    }

    #[test]
    fn abelian_range() {
        assert!(av_slope_bound_check(&ms(&[0, 0, 1, 1])));
        assert!(av_slope_bound_check(&"1/2,1/2".parse().unwrap()));
        assert!(!av_slope_bound_check(&ms(&[0, 1, 2, 3])));
    }

    #[test]
    fn dwork_violation() {
        let r = max_admissible_lie_dim(&ms(&[0, 1, 2, 3]), &LieConstraint::sp4());
        let expect: BTreeMap<Rational, u64> = [(int(-1), 3), (int(0), 3), (int(1), 3)]
            .into_iter()
            .collect();
        assert_eq!(r.window_multiplicities, expect);
        assert_eq!(r.admissible_dimension_bound, 9);
        assert_eq!(r.verdict, Verdict::Violation);
        assert!(!r.asymmetric_window);
    }

    #[test]
    fn abelian_surface_is_consistent() {
        let r = max_admissible_lie_dim(&ms(&[0, 0, 1, 1]), &LieConstraint::sp4());
        assert_eq!(r.end_slopes, pairs(&[(-1, 4), (0, 8), (1, 4)]));
        assert_eq!(r.admissible_dimension_bound, 15);
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn two_slope_violation() {
        let lie = LieConstraint::new(2, true, true).unwrap();
        let r = max_admissible_lie_dim(&ms(&[0, 3]), &lie);
        assert_eq!(r.end_slopes, pairs(&[(-3, 1), (0, 2), (3, 1)]));
        assert_eq!(r.window_multiplicities, [(int(0), 1)].into_iter().collect());
        assert_eq!(r.admissible_dimension_bound, 1);
        assert_eq!(r.verdict, Verdict::Violation);
    }

    #[test]
    fn rank_one_trivial() {
        let lie = LieConstraint::new(1, false, false).unwrap();
        let r = max_admissible_lie_dim(&ms(&[0]), &lie);
        assert_eq!(r.admissible_dimension_bound, 1);
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn one_sided_window_is_reported() {
        let lie = LieConstraint::new(10, true, false).unwrap();
        let r = max_admissible_lie_dim(&ms(&[0, 1, 2, 3]), &lie);
        // [-1, inf): 3 + (4-1) + 3 + 2 + 1
        assert_eq!(r.admissible_dimension_bound, 12);
        assert_eq!(r.window_upper, None);
        assert!(r.asymmetric_window);
        assert!(r.notes.iter().any(|n| n.contains("one-sided")));
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn lie_constraint_requires_positive_dimension() {
        assert!(LieConstraint::new(0, true, true).is_none());
    }
}
