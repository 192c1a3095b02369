//! Point counts on fibers of the pencil and on their quotients by `H`.

use rayon::prelude::*;
use serde::Serialize;

use super::field::{is_prime, FiniteField};
use super::DworkError;

/// Default cap on `q⁵` for [`count_points_affine`].
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 200_000_000;

/// Default cap on `125·q⁴` for [`quotient_point_count`].
pub const DEFAULT_QUOTIENT_BUDGET: u128 = 2_000_000_000;

/// A parameter value `t ∈ F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FiberParameter {
    pub t: u64,
    pub p: u64,
}

impl FiberParameter {
    pub fn new(t: i64, p: u64) -> Result<Self, DworkError> {
        if !is_prime(p) {
            return Err(DworkError::NotPrime(p));
        }
        if p == 5 {
            return Err(DworkError::CharacteristicFive);
        }
        Ok(FiberParameter {
            t: t.rem_euclid(p as i64) as u64,
            p,
        })
    }

    /// `t ≠ 0` and `t⁵ ≠ 1`: a point of the base `P¹ ∖ {0, 1, ∞}` of the quotient family.
    pub fn in_base(&self) -> bool {
        self.t != 0 && is_smooth_fiber(self)
    }
}

/// `t⁵ ≠ 1` in `F_p`.
pub fn is_smooth_fiber(fp: &FiberParameter) -> bool {
    super::field::pow_mod(fp.t, 5, fp.p) != 1
}

/// Number of `s ∈ F_q⁵` with `Σ c_i s_i⁵ = λ·Π s_i`.
fn count_twisted(field: &FiniteField, c: [u32; 5], lambda: u32) -> u64 {
    let q = field.size() as usize;
    let p5: Vec<u32> = field.elements().map(|x| field.pow(x, 5)).collect();
    let scaled: Vec<Vec<u32>> = c
        .iter()
        .map(|&ci| p5.iter().map(|&x| field.mul(ci, x)).collect())
        .collect();
    // last[b·q + A] = #{s : c₄s⁵ − b·s + A = 0}
    let mut last = vec![0u32; q * q];
    for b in field.elements() {
        for s in field.elements() {
            let v = field.sub(scaled[4][s as usize], field.mul(b, s));
            last[b as usize * q + field.neg(v) as usize] += 1;
        }
    }
    field
        .elements()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|s0| {
            let mut n = 0u64;
            let (a0, m0) = (scaled[0][s0 as usize], field.mul(lambda, s0));
            for s1 in field.elements() {
                let (a1, m1) = (field.add(a0, scaled[1][s1 as usize]), field.mul(m0, s1));
                for s2 in field.elements() {
                    let (a2, m2) = (field.add(a1, scaled[2][s2 as usize]), field.mul(m1, s2));
                    for s3 in field.elements() {
                        let a3 = field.add(a2, scaled[3][s3 as usize]);
                        let m3 = field.mul(m2, s3);
                        n += last[m3 as usize * q + a3 as usize] as u64;
                    }
                }
            }
            n
        })
        .sum()
}

fn check_budget(size: u128, budget: u128) -> Result<(), DworkError> {
    if size > budget {
        return Err(DworkError::BudgetExceeded { size, budget });
    }
    Ok(())
}

/// `#{x ∈ F_q⁵ : Σ x_i⁵ − 5t·Π x_i = 0}` for `t ∈ F_p`.
pub fn count_points_affine(t: i64, field: &FiniteField, budget: u128) -> Result<u64, DworkError> {
    check_budget((field.size() as u128).pow(5), budget)?;
    let lambda = field.from_int(5 * t.rem_euclid(field.p() as i64));
    Ok(count_twisted(field, [1; 5], lambda))
}

/// `(N_affine − 1)/(q − 1)`.
pub fn projective_point_count(affine: u64, q: u64) -> Result<u64, DworkError> {
    let nonzero = affine
        .checked_sub(1)
        .ok_or_else(|| DworkError::Internal("affine count must include the origin".into()))?;
    if nonzero % (q - 1) != 0 {
        return Err(DworkError::Internal(format!(
            "affine count {affine} is not 1 mod {}",
            q - 1
        )));
    }
    Ok(nonzero / (q - 1))
}

/// `#(X_t/H)(F_q)` by averaging fixed points of the twisted Frobenii `h∘F` over the 125 elements of `H`.
///
/// For `h = diag(ζ^{a_i})` with `Σ a_i = 5m`, the fixed points of `h∘F` are the
/// `F_q`-points of `Σ g^{a_i} y_i⁵ − 5t·g^m·Π y_i = 0`.
pub fn quotient_point_count(t: i64, field: &FiniteField, budget: u128) -> Result<u64, DworkError> {
    if field.p() == 5 {
        return Err(DworkError::CharacteristicFive);
    }
    let q = field.size();
    if q % 5 != 1 {
        return Err(DworkError::NotOneModFive(q));
    }
    check_budget(125 * (q as u128).pow(4), budget)?;
    let g = field.generator();
    let five_t = field.from_int(5 * t.rem_euclid(field.p() as i64));
    let reps: Vec<[u64; 5]> = (0..125u64)
        .map(|r| {
            let (a1, a2, a3) = (r % 5, r / 5 % 5, r / 25);
            [0, a1, a2, a3, (15 - a1 - a2 - a3) % 5]
        })
        .collect();
    let total: u64 = reps
        .par_iter()
        .map(|a| {
            let c = a.map(|ai| field.pow(g, ai));
            let m = a.iter().sum::<u64>() / 5;
            let lambda = field.mul(five_t, field.pow(g, m));
            (count_twisted(field, c, lambda) - 1) / (q - 1)
        })
        .sum();
    if total % 125 != 0 {
        return Err(DworkError::Internal(format!(
            "fixed-point total {total} is not divisible by |H| = 125"
        )));
    }
    Ok(total / 125)
}

/// `a_q(t) = 1 + q + q² + q³ − #(X_t/H)(F_q)`.
pub fn quotient_trace(t: i64, field: &FiniteField, budget: u128) -> Result<i64, DworkError> {
    let q = field.size() as i64;
    let n = quotient_point_count(t, field, budget)? as i64;
    Ok(1 + q + q * q + q * q * q - n)
}
