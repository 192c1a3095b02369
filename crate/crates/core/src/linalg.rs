//! Small dense linear algebra over the rationals.
//!
//! Vectors are `Vec<Rational>`; a subspace is given by a list of spanning
//! row vectors. Matrices act on column vectors.

use num_traits::{One, Zero};

use crate::polygon::Rational;

pub type Matrix = Vec<Vec<Rational>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn zeros(rows: usize, cols: usize) -> Matrix {
    vec![vec![Rational::zero(); cols]; rows]
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let k = b.len();
    let mut out = zeros(n, m);
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] += &a[i][l] * &b[l][j];
            }
        }
    }
    out
}

pub fn mat_vec(a: &Matrix, v: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
        })
        .collect()
}

pub fn transpose(a: &Matrix, cols: usize) -> Matrix {
    (0..cols)
        .map(|j| a.iter().map(|row| row[j].clone()).collect())
        .collect()
}

/// Reduced row echelon form; returns the nonzero rows and their pivot columns.
pub fn rref(rows: &[Vec<Rational>]) -> (Matrix, Vec<usize>) {
    let mut m: Matrix = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..ncols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    rref(rows).1.len()
}

/// Basis (in reduced echelon form) of the row space.
pub fn row_basis(rows: &[Vec<Rational>]) -> Matrix {
    rref(rows).0
}

/// Basis of `{x : A x = 0}` for `A` with `ncols` columns.
pub fn nullspace(a: &[Vec<Rational>], ncols: usize) -> Matrix {
    let (r, pivots) = rref(a);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &pc) in r.iter().zip(&pivots) {
                v[pc] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Basis of `span(a) ∩ span(b)`.
pub fn intersect(a: &[Vec<Rational>], b: &[Vec<Rational>], n: usize) -> Matrix {
    let a = row_basis(a);
    let b = row_basis(b);
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // columns of M are the a_i and −b_j; a kernel vector (x, y) gives Σ x_i a_i ∈ span(b)
    let mut cols: Matrix = a.clone();
    cols.extend(b.iter().map(|v| v.iter().map(|x| -x.clone()).collect()));
    let m = transpose(&cols, n);
    let ker = nullspace(&m, cols.len());
    let vecs: Matrix = ker
        .iter()
        .map(|k| {
            let mut v = vec![Rational::zero(); n];
            for (coef, ai) in k.iter().zip(&a) {
                for (dst, x) in v.iter_mut().zip(ai) {
                    *dst += coef * x;
                }
            }
            v
        })
        .collect();
    row_basis(&vecs)
}

/// Whether `v` lies in the row span of `basis`.
pub fn in_span(basis: &[Vec<Rational>], v: &[Rational]) -> bool {
    let mut rows = basis.to_vec();
    let before = rank(&rows);
    rows.push(v.to_vec());
    rank(&rows) == before
}

/// Coefficients `c` with `Σ c_i basis_i = v`, if they exist. `basis` must be independent.
pub fn coordinates(basis: &[Vec<Rational>], v: &[Rational]) -> Option<Vec<Rational>> {
    let n = v.len();
    let k = basis.len();
    // augmented system: columns are basis vectors, last column is v
    let aug: Matrix = (0..n)
        .map(|i| {
            let mut row: Vec<Rational> = basis.iter().map(|b| b[i].clone()).collect();
            row.push(v[i].clone());
            row
        })
        .collect();
    if aug.is_empty() {
        return Some(vec![Rational::zero(); k]);
    }
    let (r, pivots) = rref(&aug);
    if pivots.contains(&k) {
        return None;
    }
    let mut c = vec![Rational::zero(); k];
    for (row, &pc) in r.iter().zip(&pivots) {
        c[pc] = row[k].clone();
    }
    Some(c)
}

pub fn inverse(a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let aug: Matrix = a
        .iter()
        .zip(identity(n))
        .map(|(row, id)| row.iter().cloned().chain(id).collect())
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
}
