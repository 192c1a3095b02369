//! Frobenius data for the Dwork quintic pencil
//! `x₀⁵ + ⋯ + x₄⁵ − 5t·x₀⋯x₄ = 0`.
//!
//! Traces on the rank-4 piece fixed by the group `H` of diagonal fifth roots
//! of unity are computed with a finite hypergeometric sum; everything else
//! (characteristic polynomials, slopes, scans) is derived from those traces.

pub mod characters;
pub mod charpoly;
pub mod counting;
pub mod field;
pub mod hypergeometric;

use thiserror::Error;

pub use charpoly::{
    charpoly_invariant, ordinarity_scan, summarize_scan, FrobeniusFiberData, ScanSummary,
    TraceEngine, TraceProvider,
};
pub use counting::{
    count_points_affine, is_smooth_fiber, projective_point_count, quotient_point_count,
    quotient_trace, FiberParameter, DEFAULT_ENUMERATION_BUDGET,
};
pub use field::FiniteField;
pub use hypergeometric::{
    gauss_sum, invariant_trace, Backend, InvariantTraceTable, TraceValue, RESIDUAL_THRESHOLD,
};

/// Primes scanned when none are given.
pub const DEFAULT_SCAN_PRIMES: [u64; 3] = [11, 31, 41];

#[derive(Debug, Error)]
pub enum DworkError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field degree must be at least 1")]
    InvalidDegree,
    #[error("F_{p}^{k} exceeds the field size cap of {cap} elements")]
    FieldTooLarge { p: u64, k: u32, cap: u64 },
    #[error("the Dwork pencil is not handled in characteristic 5")]
    CharacteristicFive,
    #[error("p must be ≡ 1 mod 5 (got q = {0})")]
    NotOneModFive(u64),
    #[error("t = {t} gives a singular fiber over F_{p} (t^5 = 1)")]
    SingularFiber { t: u64, p: u64 },
    #[error("t = 0 is excluded from the base of the family")]
    ZeroParameter,
    #[error("enumeration of {size} points exceeds the budget {budget}")]
    BudgetExceeded { size: u128, budget: u128 },
    #[error("precision failure: {0}")]
    Precision(String),
    #[error("modular evaluations disagree for q = {q}, t = {t}: {first} vs {second}")]
    BackendDisagreement {
        q: u64,
        t: u64,
        first: i64,
        second: i64,
    },
    #[error("trace {trace} over F_{q} violates the Weil bound")]
    WeilBound { q: u64, trace: i64 },
    #[error(
        "self-check failed at k = {k}: charpoly predicts a_(p^{k}) = {expected}, computed {got}"
    )]
    OracleMismatch { k: u32, expected: i128, got: i128 },
    #[error("a_p^2 - a_(p^2) = {0} is odd")]
    OddDiscriminant(i128),
    #[error("slopes over F_(p^2) ({extension}) differ from slopes over F_p ({base})")]
    ExtensionMismatch { base: String, extension: String },
    #[error("{0}")]
    Internal(String),
}
