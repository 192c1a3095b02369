//! Characteristic polynomials of Frobenius on the invariant piece, their
//! slopes, and scans over all fibers at a prime.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use serde::Serialize;

use super::counting::FiberParameter;
use super::hypergeometric::{Backend, InvariantTraceTable, TraceValue};
use super::DworkError;
use crate::polygon::{
    integer_valuation, lies_on_or_above, polygon_from_hodge_numbers, polygon_from_valuations,
    HodgeNumbers, Polygon, SlopeMultiset,
};

/// Source of `a_{p^k}(t)`. Implementations may cache.
pub trait TraceProvider {
    fn trace(&mut self, p: u64, k: u32, t: u64) -> Result<TraceValue, DworkError>;
}

/// Computes traces directly, keeping one kernel table per field.
#[derive(Debug, Default)]
pub struct TraceEngine {
    backend: Backend,
    tables: HashMap<(u64, u32), InvariantTraceTable>,
    evaluations: usize,
}

impl TraceEngine {
    pub fn new(backend: Backend) -> Self {
        TraceEngine {
            backend,
            tables: HashMap::new(),
            evaluations: 0,
        }
    }

    /// Number of character-sum evaluations performed so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn table(&mut self, p: u64, k: u32) -> Result<&InvariantTraceTable, DworkError> {
        if !self.tables.contains_key(&(p, k)) {
            let table = InvariantTraceTable::for_prime_power(p, k, self.backend)?;
            self.tables.insert((p, k), table);
        }
        Ok(&self.tables[&(p, k)])
    }
}

impl TraceProvider for TraceEngine {
    fn trace(&mut self, p: u64, k: u32, t: u64) -> Result<TraceValue, DworkError> {
        let v = self.table(p, k)?.trace(t)?;
        self.evaluations += 1;
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrobeniusFiberData {
    pub t: u64,
    pub p: u64,
    /// `a_{p^k}` for `k = 1..4`.
    pub traces: [i64; 4],
    /// `[1, c₁, c₂, c₃, c₄]` with `P(T) = Σ c_j T^j`.
    pub charpoly: [i128; 5],
    #[serde(serialize_with = "crate::report::serialize_display")]
    pub newton_slopes: SlopeMultiset,
    pub ordinary: bool,
    /// Largest rounding residual among the four traces.
    pub residual: f64,
}

impl FrobeniusFiberData {
    pub fn newton_polygon(&self) -> Polygon {
        Polygon::from_slopes(&self.newton_slopes)
    }

    /// Newton on or above the Hodge polygon of `h = [1,1,1,1]`, with equal endpoints.
    pub fn mazur_ok(&self) -> bool {
        let hodge = hodge_polygon();
        let newton = self.newton_polygon();
        lies_on_or_above(&newton, &hodge) && newton.endpoint() == hodge.endpoint()
    }
}

pub fn hodge_polygon() -> Polygon {
    let h = HodgeNumbers::new(vec![1, 1, 1, 1]).expect("valid Hodge numbers");
    polygon_from_hodge_numbers(&h).expect("nonempty Hodge numbers")
}

/// `P(T)` of weight 3 over `F_q` from `a_q` and `a_{q²}`.
fn reconstruct(a1: i64, a2: i64, q: i128) -> Result<[i128; 5], DworkError> {
    let (a1, a2) = (a1 as i128, a2 as i128);
    let c1 = -a1;
    let d = a1 * a1 - a2;
    if d % 2 != 0 {
        return Err(DworkError::OddDiscriminant(d));
    }
    let q3 = q * q * q;
    Ok([1, c1, d / 2, q3 * c1, q3 * q3])
}

/// Power sums `s₃, s₄` of the reciprocal roots of `P`.
fn predicted_power_sums(c: &[i128; 5]) -> (i128, i128) {
    let (e1, e2, e3, e4) = (-c[1], c[2], -c[3], c[4]);
    let s1 = e1;
    let s2 = e1 * s1 - 2 * e2;
    let s3 = e1 * s2 - e2 * s1 + 3 * e3;
    let s4 = e1 * s3 - e2 * s2 + e3 * s1 - 4 * e4;
    (s3, s4)
}

fn slopes_of(c: &[i128; 5], p: u64, norm: u64) -> Result<SlopeMultiset, DworkError> {
    let vals: Vec<_> = c
        .iter()
        .map(|&ci| integer_valuation(&BigInt::from(ci), p))
        .collect();
    polygon_from_valuations(&vals, norm)
        .map(|poly| poly.slopes())
        .map_err(|e| DworkError::Internal(format!("Newton polygon: {e}")))
}

/// Rebuilds `P(T)` from `a_p, a_{p²}`, checks it against independently computed `a_{p³}, a_{p⁴}`,
/// and reads off the Newton slopes.
pub fn charpoly_invariant(
    fiber: &FiberParameter,
    provider: &mut dyn TraceProvider,
) -> Result<FrobeniusFiberData, DworkError> {
    let (p, t) = (fiber.p, fiber.t);
    if p % 5 != 1 {
        return Err(DworkError::NotOneModFive(p));
    }
    if t == 0 {
        return Err(DworkError::ZeroParameter);
    }
    if !fiber.in_base() {
        return Err(DworkError::SingularFiber { t, p });
    }
    let mut traces = [0i64; 4];
    let mut residual = 0f64;
    for k in 1..=4u32 {
        let v = provider.trace(p, k, t)?;
        traces[k as usize - 1] = v.trace;
        residual = residual.max(v.residual);
    }

    let charpoly = reconstruct(traces[0], traces[1], p as i128)?;
    let (s3, s4) = predicted_power_sums(&charpoly);
    for (k, expected, got) in [(3, s3, traces[2] as i128), (4, s4, traces[3] as i128)] {
        if expected != got {
            return Err(DworkError::OracleMismatch { k, expected, got });
        }
    }

    let newton_slopes = slopes_of(&charpoly, p, 1)?;
    let over_p2 = slopes_of(&reconstruct(traces[1], traces[3], (p * p) as i128)?, p, 2)?;
    if over_p2 != newton_slopes {
        return Err(DworkError::ExtensionMismatch {
            base: newton_slopes.to_string(),
            extension: over_p2.to_string(),
        });
    }
    let ordinary = newton_slopes == SlopeMultiset::from_integers([0, 1, 2, 3]);
    Ok(FrobeniusFiberData {
        t,
        p,
        traces,
        charpoly,
        newton_slopes,
        ordinary,
        residual,
    })
}

/// `t ∈ F_p` with `t ≠ 0` and `t⁵ ≠ 1`.
pub fn admissible_parameters(p: u64) -> Result<Vec<FiberParameter>, DworkError> {
    let mut out = Vec::new();
    for t in 1..p {
        let f = FiberParameter::new(t as i64, p)?;
        if f.in_base() {
            out.push(f);
        }
    }
    Ok(out)
}

/// [`charpoly_invariant`] at every admissible fiber over `F_p`.
pub fn ordinarity_scan(
    p: u64,
    provider: &mut dyn TraceProvider,
) -> Result<Vec<FrobeniusFiberData>, DworkError> {
    let params = admissible_parameters(p)?;
    if p % 5 != 1 {
        return Err(DworkError::NotOneModFive(p));
    }
    params
        .iter()
        .map(|f| charpoly_invariant(f, provider))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub p: u64,
    pub fibers: usize,
    pub ordinary: usize,
    /// Slope pattern → number of fibers.
    pub patterns: BTreeMap<String, usize>,
    pub all_mazur_ok: bool,
    pub max_residual: f64,
}

pub fn summarize_scan(p: u64, rows: &[FrobeniusFiberData]) -> ScanSummary {
    let mut patterns = BTreeMap::new();
    for r in rows {
        *patterns.entry(r.newton_slopes.to_string()).or_insert(0) += 1;
    }
    ScanSummary {
        p,
        fibers: rows.len(),
        ordinary: rows.iter().filter(|r| r.ordinary).count(),
        patterns,
        all_mazur_ok: rows.iter().all(FrobeniusFiberData::mazur_ok),
        max_residual: rows.iter().map(|r| r.residual).fold(0.0, f64::max),
    }
}
