//! Finite fields `F_{p^k}` with discrete-log tables.
//!
//! An element is encoded as the integer `Σ c_j p^j` where `c_j` is the
//! coefficient of `X^j` in its polynomial representative modulo the field's
//! defining polynomial. The constants `0..p` are therefore the prime field.

use super::DworkError;

/// Largest field handled (table memory is `O(q)`).
pub const MAX_FIELD_SIZE: u64 = 10_000_000;

#[derive(Debug, Clone)]
pub struct FiniteField {
    p: u64,
    k: u32,
    q: u64,
    /// Monic defining polynomial, coefficients low to high (length `k + 1`).
    modulus: Vec<u64>,
    generator: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    /// `Tr(X^j)` for `j < k`.
    basis_traces: Vec<u64>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % small == 0 {
            return n == small;
        }
    }
    // deterministic Miller-Rabin for 64-bit integers
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    acc
}

/// Distinct prime factors by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Prime factors with multiplicity, ascending.
pub fn factor_with_multiplicity(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        while n % d == 0 {
            out.push(d);
            n /= d;
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl FiniteField {
    /// Builds `F_{p^k}` from the first primitive polynomial found in lexicographic order.
    pub fn new(p: u64, k: u32) -> Result<Self, DworkError> {
        if !is_prime(p) {
            return Err(DworkError::NotPrime(p));
        }
        if k == 0 {
            return Err(DworkError::InvalidDegree);
        }
        let q =
            p.checked_pow(k)
                .filter(|&q| q <= MAX_FIELD_SIZE)
                .ok_or(DworkError::FieldTooLarge {
                    p,
                    k,
                    cap: MAX_FIELD_SIZE,
                })?;
        let order = q - 1;
        let factors = prime_factors(order);

        // monic polynomials X^k + c_{k-1} X^{k-1} + ... + c_0 with c_0 != 0
        for tail in 1..q {
            let mut modulus = digits(tail, p, k as usize);
            if modulus[0] == 0 {
                continue;
            }
            modulus.push(1);
            let mut field = FiniteField {
                p,
                k,
                q,
                modulus,
                generator: 0,
                exp: Vec::new(),
                log: Vec::new(),
                basis_traces: Vec::new(),
            };
            // a primitive element of the quotient ring exists iff the modulus is irreducible
            let Some(g) = (1..q.min(64))
                .map(|c| c as u32)
                .find(|&c| field.has_order(c, order, &factors))
            else {
                continue;
            };
            field.generator = g;
            field.build_tables();
            return Ok(field);
        }
        Err(DworkError::Internal(format!(
            "no primitive polynomial found for F_{p}^{k}"
        )))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn size(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn generator(&self) -> u32 {
        self.generator
    }

    /// Multiplicative group order `q − 1`.
    pub fn unit_order(&self) -> u64 {
        self.q - 1
    }

    /// Embeds an integer into the prime field.
    pub fn from_int(&self, n: i64) -> u32 {
        n.rem_euclid(self.p as i64) as u32
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.k == 1 {
            return ((a as u64 + b as u64) % self.p) as u32;
        }
        let (mut a, mut b) = (a as u64, b as u64);
        let (mut out, mut place) = (0u64, 1u64);
        for _ in 0..self.k {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out as u32
    }

    pub fn neg(&self, a: u32) -> u32 {
        let mut a = a as u64;
        let (mut out, mut place) = (0u64, 1u64);
        for _ in 0..self.k {
            out += ((self.p - a % self.p) % self.p) * place;
            a /= self.p;
            place *= self.p;
        }
        out as u32
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let e = (self.log[a as usize] as u64 + self.log[b as usize] as u64) % self.unit_order();
        self.exp[e as usize]
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let l = (self.log[a as usize] as u128 * e as u128) % self.unit_order() as u128;
        self.exp[l as usize]
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| {
            let l = self.log[a as usize] as u64;
            self.exp[((self.unit_order() - l) % self.unit_order()) as usize]
        })
    }

    /// `g^i` for the fixed generator `g`.
    pub fn exp(&self, i: u64) -> u32 {
        self.exp[(i % self.unit_order()) as usize]
    }

    /// Discrete logarithm to base `g`; `None` for zero.
    pub fn dlog(&self, a: u32) -> Option<u64> {
        (a != 0).then(|| self.log[a as usize] as u64)
    }

    /// Absolute trace `Tr_{F_q/F_p}` as an integer in `0..p`.
    pub fn trace(&self, a: u32) -> u64 {
        let mut a = a as u64;
        let mut t = 0u64;
        for &bt in &self.basis_traces {
            t = (t + (a % self.p) * bt) % self.p;
            a /= self.p;
        }
        t
    }

    /// Iterator over all elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.q as u32
    }

    fn poly_mul(&self, a: u64, b: u64) -> u64 {
        let k = self.k as usize;
        let (da, db) = (digits(a, self.p, k), digits(b, self.p, k));
        let mut prod = vec![0u64; 2 * k];
        for i in 0..k {
            for j in 0..k {
                prod[i + j] = (prod[i + j] + da[i] * db[j]) % self.p;
            }
        }
        // reduce with the monic modulus from the top degree down
        for deg in (k..2 * k).rev() {
            let c = prod[deg];
            if c != 0 {
                for (i, &m) in self.modulus.iter().enumerate() {
                    let idx = deg - k + i;
                    prod[idx] = (prod[idx] + self.p - c * m % self.p) % self.p;
                }
            }
        }
        undigits(&prod[..k], self.p)
    }

    fn poly_pow(&self, a: u64, mut e: u64) -> u64 {
        let (mut acc, mut base) = (1u64, a);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.poly_mul(acc, base);
            }
            base = self.poly_mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn has_order(&self, c: u32, order: u64, factors: &[u64]) -> bool {
        self.poly_pow(c as u64, order) == 1
            && factors
                .iter()
                .all(|&r| self.poly_pow(c as u64, order / r) != 1)
    }

    fn build_tables(&mut self) {
        let n = self.unit_order() as usize;
        self.exp = Vec::with_capacity(n);
        self.log = vec![u32::MAX; self.q as usize];
        let mut x = 1u64;
        for i in 0..n {
            self.exp.push(x as u32);
            self.log[x as usize] = i as u32;
            x = self.poly_mul(x, self.generator as u64);
        }
        debug_assert_eq!(x, 1);
        // Tr(X^j) = Σ_i (X^j)^{p^i}, read off through the log table
        self.basis_traces = (0..self.k)
            .map(|j| {
                let xj = self.p.pow(j) as u32;
                let mut sum = 0u32;
                let mut conj = xj;
                for _ in 0..self.k {
                    sum = self.add(sum, conj);
                    conj = self.pow(conj, self.p);
                }
                debug_assert!((sum as u64) < self.p, "trace must lie in the prime field");
                sum as u64
            })
            .collect();
    }
}

fn digits(mut n: u64, p: u64, k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        out.push(n % p);
        n /= p;
    }
    out
}

fn undigits(d: &[u64], p: u64) -> u64 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}
