//! Rings that receive multiplicative and additive characters of `F_q`.
//!
//! Gauss sums live in `Z[ζ_p, ζ_{q−1}]`. A [`CharacterRing`] is a concrete
//! image of that ring: either high-precision complex numbers, or the residue
//! field `F_ℓ` for a prime `ℓ ≡ 1 (mod p(q−1))` where both roots of unity
//! exist. The character-sum code is written once against this trait.

use rayon::prelude::*;
use rug::float::Constant;
use rug::{Complex, Float};

use super::field::{is_prime, mul_mod, pow_mod, prime_factors};
use super::DworkError;

/// Above this length the DFT combine step runs on the rayon pool.
const PARALLEL_THRESHOLD: usize = 1 << 12;

/// An integer recovered from a ring element, with the rounding residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rounded {
    pub value: i64,
    pub residual: f64,
}

pub trait CharacterRing: Sync {
    type Elem: Clone + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, n: i64) -> Self::Elem;
    fn add_assign(&self, acc: &mut Self::Elem, x: &Self::Elem);
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    fn mul_add_assign(&self, acc: &mut Self::Elem, a: &Self::Elem, b: &Self::Elem) {
        let t = self.mul(a, b);
        self.add_assign(acc, &t);
    }

    /// `[ζ_n^0, …, ζ_n^{n−1}]` for a primitive n-th root `ζ_n`. Compatible across `n`:
    /// `ζ_m^{m/n} = ζ_n` whenever both tables exist.
    fn roots_of_unity(&self, n: u64) -> Result<Vec<Self::Elem>, DworkError>;

    /// Nearest rational integer.
    fn round(&self, a: &Self::Elem) -> Result<Rounded, DworkError>;
}

/// Multiplication-heavy helper: `a^e` by repeated squaring.
pub fn ring_pow<R: CharacterRing>(ring: &R, a: &R::Elem, mut e: u64) -> R::Elem {
    let mut acc = ring.one();
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = ring.mul(&acc, &base);
        }
        base = ring.mul(&base, &base);
        e >>= 1;
    }
    acc
}

/// `X[m] = Σ_k x[k] ζ^{mk}` with `roots[j] = ζ^j` (`roots.len() == x.len()`).
///
/// Mixed-radix decimation in time; cost `n · Σ radices`.
pub fn dft<R: CharacterRing>(ring: &R, x: &[R::Elem], roots: &[R::Elem]) -> Vec<R::Elem> {
    assert_eq!(
        x.len(),
        roots.len(),
        "root table must match the transform length"
    );
    let radices = super::field::factor_with_multiplicity(x.len() as u64);
    dft_rec(ring, x.to_vec(), roots, 1, &radices)
}

fn dft_rec<R: CharacterRing>(
    ring: &R,
    x: Vec<R::Elem>,
    roots: &[R::Elem],
    stride: usize,
    radices: &[u64],
) -> Vec<R::Elem> {
    let n = x.len();
    if n <= 1 {
        return x;
    }
    let r = radices[0] as usize;
    let m = n / r;
    let subs: Vec<Vec<R::Elem>> = (0..r)
        .map(|j| x.iter().skip(j).step_by(r).cloned().collect())
        .collect();
    drop(x);
    let parts: Vec<Vec<R::Elem>> = if n >= PARALLEL_THRESHOLD {
        subs.into_par_iter()
            .map(|s| dft_rec(ring, s, roots, stride * r, &radices[1..]))
            .collect()
    } else {
        subs.into_iter()
            .map(|s| dft_rec(ring, s, roots, stride * r, &radices[1..]))
            .collect()
    };
    // X[k] = Σ_j ζ_n^{jk} Y_j[k mod m], with ζ_n^e = roots[e · stride]
    let combine = |k: usize| {
        let mut acc = ring.zero();
        for (j, part) in parts.iter().enumerate() {
            let e = (j * k) % n;
            ring.mul_add_assign(&mut acc, &roots[e * stride], &part[k % m]);
        }
        acc
    };
    if n >= PARALLEL_THRESHOLD {
        (0..n).into_par_iter().map(combine).collect()
    } else {
        (0..n).map(combine).collect()
    }
}

/// The residue field `F_ℓ` with a fixed primitive root of unity of order `N`.
#[derive(Debug, Clone)]
pub struct ModularRing {
    modulus: u64,
    order: u64,
    root: u64,
}

impl ModularRing {
    /// The `index`-th prime `ℓ ≡ 1 (mod order)` above `2^min_bits`, with a primitive `order`-th root.
    pub fn for_order(order: u64, min_bits: u32, index: usize) -> Result<Self, DworkError> {
        let limit = 1u64 << 62;
        let mut c = (1u64 << min_bits).div_ceil(order).max(1);
        let mut found = 0;
        while order.checked_mul(c).is_some_and(|v| v < limit) {
            let ell = order * c + 1;
            if is_prime(ell) {
                if found == index {
                    return Ok(ModularRing {
                        modulus: ell,
                        order,
                        root: primitive_root_of_order(ell, order),
                    });
                }
                found += 1;
            }
            c += 1;
        }
        Err(DworkError::Internal(format!(
            "no prime l = 1 mod {order} below 2^62"
        )))
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

fn primitive_root_of_order(ell: u64, order: u64) -> u64 {
    let factors = prime_factors(order);
    let cofactor = (ell - 1) / order;
    (2..ell)
        .map(|x| pow_mod(x, cofactor, ell))
        .find(|&w| factors.iter().all(|&r| pow_mod(w, order / r, ell) != 1))
        .expect("F_l^* is cyclic, so an element of every order dividing l-1 exists")
}

impl CharacterRing for ModularRing {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }

    fn one(&self) -> u64 {
        1
    }

    fn from_i64(&self, n: i64) -> u64 {
        n.rem_euclid(self.modulus as i64) as u64
    }

    fn add_assign(&self, acc: &mut u64, x: &u64) {
        let s = *acc + *x;
        *acc = if s >= self.modulus {
            s - self.modulus
        } else {
            s
        };
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(*a, *b, self.modulus)
    }

    fn mul_add_assign(&self, acc: &mut u64, a: &u64, b: &u64) {
        *acc = ((*acc as u128 + *a as u128 * *b as u128) % self.modulus as u128) as u64;
    }

    fn inv(&self, a: &u64) -> Option<u64> {
        (*a % self.modulus != 0).then(|| pow_mod(*a, self.modulus - 2, self.modulus))
    }

    fn roots_of_unity(&self, n: u64) -> Result<Vec<u64>, DworkError> {
        if n == 0 || self.order % n != 0 {
            return Err(DworkError::Internal(format!(
                "no root of unity of order {n} in this ring"
            )));
        }
        let zeta = pow_mod(self.root, self.order / n, self.modulus);
        let mut out = Vec::with_capacity(n as usize);
        let mut x = 1u64;
        for _ in 0..n {
            out.push(x);
            x = mul_mod(x, zeta, self.modulus);
        }
        Ok(out)
    }

    /// Symmetric lift to `(−ℓ/2, ℓ/2]`; exact, so the residual is zero.
    fn round(&self, a: &u64) -> Result<Rounded, DworkError> {
        let v = if *a > self.modulus / 2 {
            *a as i128 - self.modulus as i128
        } else {
            *a as i128
        };
        Ok(Rounded {
            value: v as i64,
            residual: 0.0,
        })
    }
}

/// Complex numbers with a fixed MPFR precision.
#[derive(Debug, Clone, Copy)]
pub struct ComplexRing {
    precision: u32,
}

pub const DEFAULT_COMPLEX_PRECISION: u32 = 192;

impl ComplexRing {
    pub fn new(precision: u32) -> Self {
        ComplexRing { precision }
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `exp(2πi · num/den)`.
    pub fn root(&self, num: u64, den: u64) -> Complex {
        let prec = self.precision + 32;
        let pi = Float::with_val(prec, Constant::Pi);
        let angle = pi * Float::with_val(prec, 2 * (num % den)) / Float::with_val(prec, den);
        let c = Float::with_val(prec, angle.cos_ref());
        let s = angle.sin();
        Complex::with_val(self.precision, (c, s))
    }
}

impl Default for ComplexRing {
    fn default() -> Self {
        ComplexRing::new(DEFAULT_COMPLEX_PRECISION)
    }
}

impl CharacterRing for ComplexRing {
    type Elem = Complex;

    fn zero(&self) -> Complex {
        Complex::new(self.precision)
    }

    fn one(&self) -> Complex {
        Complex::with_val(self.precision, 1)
    }

    fn from_i64(&self, n: i64) -> Complex {
        Complex::with_val(self.precision, n)
    }

    fn add_assign(&self, acc: &mut Complex, x: &Complex) {
        *acc += x;
    }

    fn mul(&self, a: &Complex, b: &Complex) -> Complex {
        Complex::with_val(self.precision, a * b)
    }

    fn inv(&self, a: &Complex) -> Option<Complex> {
        (!a.is_zero()).then(|| Complex::with_val(self.precision, a.recip_ref()))
    }

    fn roots_of_unity(&self, n: u64) -> Result<Vec<Complex>, DworkError> {
        if n == 0 {
            return Err(DworkError::Internal("root of unity of order 0".into()));
        }
        // ζ^j = ζ^{B·hi} · ζ^{lo}: two short tables of exactly rounded values
        let block = (n as f64).sqrt().ceil() as u64;
        let low: Vec<Complex> = (0..block).map(|j| self.root(j, n)).collect();
        let high: Vec<Complex> = (0..n.div_ceil(block))
            .map(|h| self.root(h * block, n))
            .collect();
        Ok((0..n)
            .into_par_iter()
            .map(|j| {
                let (h, l) = ((j / block) as usize, (j % block) as usize);
                Complex::with_val(self.precision, &high[h] * &low[l])
            })
            .collect())
    }

    fn round(&self, a: &Complex) -> Result<Rounded, DworkError> {
        let re = a.real();
        let nearest = Float::with_val(self.precision, re.round_ref()).to_f64();
        if !nearest.is_finite() || nearest.abs() >= 9.0e15 {
            return Err(DworkError::Precision(format!(
                "character sum {a} is not a representable integer"
            )));
        }
        let nearest = nearest as i64;
        let frac = (Float::with_val(self.precision, re - nearest))
            .abs()
            .to_f64();
        let imag = Float::with_val(self.precision, a.imag().abs_ref()).to_f64();
        Ok(Rounded {
            value: nearest,
            residual: frac.max(imag),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft<R: CharacterRing>(ring: &R, x: &[R::Elem], roots: &[R::Elem]) -> Vec<R::Elem> {
        let n = x.len();
        (0..n)
            .map(|m| {
                let mut acc = ring.zero();
                for (k, xk) in x.iter().enumerate() {
                    ring.mul_add_assign(&mut acc, &roots[(m * k) % n], xk);
                }
                acc
            })
            .collect()
    }

    #[test]
    fn modular_dft_matches_naive() {
        for n in [1u64, 2, 6, 10, 30, 120, 37 * 4] {
            let ring = ModularRing::for_order(n * 7, 40, 0).unwrap();
            let roots = ring.roots_of_unity(n).unwrap();
            let x: Vec<u64> = (0..n).map(|i| ring.from_i64((i * i + 3) as i64)).collect();
            assert_eq!(
                dft(&ring, &x, &roots),
                naive_dft(&ring, &x, &roots),
                "n = {n}"
            );
        }
    }

    #[test]
    fn modular_roots_are_primitive_and_compatible() {
        let ring = ModularRing::for_order(11 * 120, 40, 1).unwrap();
        assert!(ring.modulus() > 1 << 40);
        assert_eq!(ring.modulus() % (11 * 120), 1);
        let r120 = ring.roots_of_unity(120).unwrap();
        let r11 = ring.roots_of_unity(11).unwrap();
        let r5 = ring.roots_of_unity(5).unwrap();
        assert_eq!(r120[24], r5[1]);
        assert_eq!(ring.mul(&r11[1], &r11[10]), 1);
        assert!((1..11).all(|j| r11[j] != 1));
        assert!(ring.roots_of_unity(7).is_err());
    }

    #[test]
    fn modular_rounding_is_symmetric() {
        let ring = ModularRing::for_order(10, 40, 0).unwrap();
        let r = ring.round(&ring.from_i64(-12345)).unwrap();
        assert_eq!(
            r,
            Rounded {
                value: -12345,
                residual: 0.0
            }
        );
    }

    #[test]
    fn complex_dft_matches_naive() {
        let ring = ComplexRing::new(128);
        let n = 12u64;
        let roots = ring.roots_of_unity(n).unwrap();
        let x: Vec<Complex> = (0..n).map(|i| ring.from_i64(i as i64 - 4)).collect();
        let fast = dft(&ring, &x, &roots);
        let slow = naive_dft(&ring, &x, &roots);
        for (a, b) in fast.iter().zip(&slow) {
            let diff = Complex::with_val(128, a - b);
            assert!(Float::with_val(128, diff.abs_ref()).to_f64() < 1e-30);
        }
    }

    #[test]
    fn complex_roots_close_up() {
        let ring = ComplexRing::default();
        let roots = ring.roots_of_unity(1000).unwrap();
        let full = ring_pow(&ring, &roots[1], 1000);
        let err = Complex::with_val(192, &full - ring.one());
        assert!(Float::with_val(192, err.abs_ref()).to_f64() < 1e-50);
        let r = ring.round(&ring.from_i64(-7)).unwrap();
        assert_eq!(r.value, -7);
        assert!(r.residual < 1e-50);
    }
}
