//! Traces of Frobenius on the `H`-invariant piece via the finite
//! hypergeometric sum with parameters `(1/5, 2/5, 3/5, 4/5; 0, 0, 0, 0)`.
//!
//! With `L = q − 1`, `ω` the character sending the field generator to `ζ_L`,
//! `g(m)` the Gauss sum of `ω^m` against `ψ(x) = ζ_p^{Tr x}` and
//! `a_j = jL/5`,
//!
//! ```text
//! a_q(t) = 1/(1 − q) · Σ_{m=0}^{L−1} Π_j g(m + a_j)/g(a_j) · g(−m)^4 · ω(z)^m,   z = t^{−5}.
//! ```
//!
//! All `L` Gauss sums come out of one DFT of `k ↦ ψ(g^k)`, and the sum over
//! `m` is a single pass over a precomputed kernel per fiber.

use rayon::prelude::*;
use rug::{Complex, Float};

use super::characters::{dft, CharacterRing, ComplexRing, ModularRing};
use super::field::FiniteField;
use super::DworkError;

/// Largest residual accepted when rounding a complex character sum.
pub const RESIDUAL_THRESHOLD: f64 = 1e-6;

/// Field size cap for the complex backend (memory is ~120 bytes per element).
pub const COMPLEX_FIELD_CAP: u64 = 1_000_000;

/// Minimum size of the primes used by the exact backend.
const MODULAR_BITS: u32 = 40;

/// How character sums are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Residues modulo two independent primes `ℓ ≡ 1 (mod p(q−1))`; must agree.
    #[default]
    Exact,
    /// MPFR complex numbers at the given precision in bits.
    Complex(u32),
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Backend::Exact),
            "complex" => Ok(Backend::Complex(
                super::characters::DEFAULT_COMPLEX_PRECISION,
            )),
            other => Err(format!(
                "unknown backend '{other}' (expected exact or complex)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceValue {
    pub trace: i64,
    /// Distance of the character sum from the returned integer (0 for the exact backend).
    pub residual: f64,
}

struct Kernel<R: CharacterRing> {
    ring: R,
    zeta: Vec<R::Elem>,
    kernel: Vec<R::Elem>,
    scale: R::Elem,
}

fn gauss_sum_table<R: CharacterRing>(
    field: &FiniteField,
    ring: &R,
    zeta: &[R::Elem],
) -> Result<Vec<R::Elem>, DworkError> {
    let zp = ring.roots_of_unity(field.p())?;
    let x: Vec<R::Elem> = (0..field.unit_order())
        .into_par_iter()
        .map(|k| zp[field.trace(field.exp(k)) as usize].clone())
        .collect();
    Ok(dft(ring, &x, zeta))
}

impl<R: CharacterRing> Kernel<R> {
    fn build(field: &FiniteField, ring: R) -> Result<Self, DworkError> {
        let l = field.unit_order() as usize;
        let zeta = ring.roots_of_unity(l as u64)?;
        let g = gauss_sum_table(field, &ring, &zeta)?;
        let a: Vec<usize> = (1..=4).map(|j| j * l / 5).collect();

        let denom = a.iter().fold(ring.one(), |acc, &aj| ring.mul(&acc, &g[aj]));
        let inv = ring.inv(&denom).ok_or_else(|| {
            DworkError::Internal("vanishing Gauss sum in the normalization".into())
        })?;
        let kernel: Vec<R::Elem> = (0..l)
            .into_par_iter()
            .map(|m| {
                let mut term = inv.clone();
                for &aj in &a {
                    term = ring.mul(&term, &g[(m + aj) % l]);
                }
                let gm = &g[(l - m) % l];
                let gm2 = ring.mul(gm, gm);
                ring.mul(&term, &ring.mul(&gm2, &gm2))
            })
            .collect();
        let one_minus_q = ring.from_i64(1 - field.size() as i64);
        let scale = ring.inv(&one_minus_q).ok_or_else(|| {
            DworkError::Internal("1 - q is not invertible in the coefficient ring".into())
        })?;
        Ok(Kernel {
            ring,
            zeta,
            kernel,
            scale,
        })
    }

    /// The hypergeometric sum at the argument with discrete log `d`.
    fn evaluate(&self, d: u64) -> R::Elem {
        let l = self.kernel.len() as u64;
        let ring = &self.ring;
        let sum = (0..l)
            .into_par_iter()
            .fold(
                || ring.zero(),
                |mut acc, m| {
                    ring.mul_add_assign(
                        &mut acc,
                        &self.kernel[m as usize],
                        &self.zeta[((m * d) % l) as usize],
                    );
                    acc
                },
            )
            .reduce(
                || ring.zero(),
                |mut a, b| {
                    ring.add_assign(&mut a, &b);
                    a
                },
            );
        ring.mul(&sum, &self.scale)
    }
}

enum Evaluator {
    Exact(Box<[Kernel<ModularRing>; 2]>),
    Complex(Kernel<ComplexRing>),
}

/// Precomputed hypergeometric kernel for one field; evaluates `a_q(t)` for any admissible `t`.
pub struct InvariantTraceTable {
    field: FiniteField,
    backend: Backend,
    evaluator: Evaluator,
}

impl std::fmt::Debug for InvariantTraceTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InvariantTraceTable")
            .field("p", &self.field.p())
            .field("k", &self.field.degree())
            .field("backend", &self.backend)
            .finish()
    }
}

fn check_dwork_field(field: &FiniteField) -> Result<(), DworkError> {
    if field.p() == 5 {
        return Err(DworkError::CharacteristicFive);
    }
    if field.size() % 5 != 1 {
        return Err(DworkError::NotOneModFive(field.size()));
    }
    Ok(())
}

impl InvariantTraceTable {
    pub fn new(field: FiniteField, backend: Backend) -> Result<Self, DworkError> {
        check_dwork_field(&field)?;
        let order = field.p() * field.unit_order();
        let evaluator = match backend {
            Backend::Exact => {
                let first = Kernel::build(&field, ModularRing::for_order(order, MODULAR_BITS, 0)?)?;
                let second =
                    Kernel::build(&field, ModularRing::for_order(order, MODULAR_BITS, 1)?)?;
                Evaluator::Exact(Box::new([first, second]))
            }
            Backend::Complex(prec) => {
                if field.size() > COMPLEX_FIELD_CAP {
                    return Err(DworkError::FieldTooLarge {
                        p: field.p(),
                        k: field.degree(),
                        cap: COMPLEX_FIELD_CAP,
                    });
                }
                Evaluator::Complex(Kernel::build(&field, ComplexRing::new(prec))?)
            }
        };
        Ok(InvariantTraceTable {
            field,
            backend,
            evaluator,
        })
    }

    /// Builds `F_{p^k}` and its table.
    pub fn for_prime_power(p: u64, k: u32, backend: Backend) -> Result<Self, DworkError> {
        if p == 5 {
            return Err(DworkError::CharacteristicFive);
        }
        Self::new(FiniteField::new(p, k)?, backend)
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// `a_q(t)` for `t` in the prime field.
    pub fn trace(&self, t: u64) -> Result<TraceValue, DworkError> {
        let f = &self.field;
        let p = f.p();
        let t = t % p;
        if t == 0 {
            return Err(DworkError::ZeroParameter);
        }
        let t5 = f.pow(t as u32, 5);
        if t5 == 1 {
            return Err(DworkError::SingularFiber { t, p });
        }
        let z = f.inv(t5).expect("t is a unit");
        let d = f.dlog(z).expect("z is a unit");
        let q = f.size();

        let value = match &self.evaluator {
            Evaluator::Exact(kernels) => {
                let [a, b] = kernels.as_ref();
                let first = a.ring.round(&a.evaluate(d))?;
                let second = b.ring.round(&b.evaluate(d))?;
                if first.value != second.value {
                    return Err(DworkError::BackendDisagreement {
                        q,
                        t,
                        first: first.value,
                        second: second.value,
                    });
                }
                TraceValue {
                    trace: first.value,
                    residual: 0.0,
                }
            }
            Evaluator::Complex(kernel) => {
                let r = kernel.ring.round(&kernel.evaluate(d))?;
                if r.residual.is_nan() || r.residual >= RESIDUAL_THRESHOLD {
                    return Err(DworkError::Precision(format!(
                        "rounding residual {:e} for q = {q}, t = {t}",
                        r.residual
                    )));
                }
                TraceValue {
                    trace: r.value,
                    residual: r.residual,
                }
            }
        };
        check_weil(q, value.trace)?;
        Ok(value)
    }
}

/// `|a| ≤ 4·q^{3/2}`, checked as `a² ≤ 16q³`.
pub fn check_weil(q: u64, trace: i64) -> Result<(), DworkError> {
    let q = q as i128;
    if (trace as i128).pow(2) > 16 * q * q * q {
        return Err(DworkError::WeilBound { q: q as u64, trace });
    }
    Ok(())
}

/// One-off evaluation; build an [`InvariantTraceTable`] to evaluate many fibers.
pub fn invariant_trace(
    t: u64,
    field: &FiniteField,
    backend: Backend,
) -> Result<TraceValue, DworkError> {
    InvariantTraceTable::new(field.clone(), backend)?.trace(t)
}

/// `g(ω^chi) = Σ_{x≠0} ω^chi(x) ψ(x)` by direct summation at 192 bits.
///
/// `chi ≡ 0 (mod q − 1)` gives `−1`.
pub fn gauss_sum(field: &FiniteField, chi: i64) -> Result<Complex, DworkError> {
    let ring = ComplexRing::default();
    let l = field.unit_order();
    if field.size() > COMPLEX_FIELD_CAP {
        return Err(DworkError::FieldTooLarge {
            p: field.p(),
            k: field.degree(),
            cap: COMPLEX_FIELD_CAP,
        });
    }
    let zeta = ring.roots_of_unity(l)?;
    let zp = ring.roots_of_unity(field.p())?;
    let c = chi.rem_euclid(l as i64) as u64;
    let mut acc = ring.zero();
    for k in 0..l {
        let x = field.exp(k);
        ring.mul_add_assign(
            &mut acc,
            &zeta[((c * k) % l) as usize],
            &zp[field.trace(x) as usize],
        );
    }
    Ok(acc)
}

/// `|z|` as an `f64`.
pub fn complex_abs(z: &Complex) -> f64 {
    Float::with_val(z.prec().0, z.abs_ref()).to_f64()
}
