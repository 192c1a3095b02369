//! Random generators and brute-force oracles shared by the property suites.
#![allow(dead_code)]

use isoslope::linalg::{self, Matrix};
use isoslope::phi_module::{
    is_weakly_admissible, FilStep, FilteredPhiModule, FrobeniusEigen, GroupAction,
};
use isoslope::polygon::{Rational, Valuation, Vertex};
use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Valuation list of length `d + 1 ≤ 13` with entries in `[0, 20]`, about 1 in 6 interior entries infinite.
pub fn random_valuations(rng: &mut StdRng) -> Vec<Valuation> {
    let d = rng.gen_range(1..=12);
    (0..=d)
        .map(|j| {
            if j == 0 {
                Valuation::int(0)
            } else if j < d && rng.gen_ratio(1, 6) {
                Valuation::Infinite
            } else {
                Valuation::int(rng.gen_range(0..=20))
            }
        })
        .collect()
}

/// Lower hull by checking every pair of points: heights at each integer abscissa, and the vertex list.
pub fn brute_force_hull(vals: &[Valuation], norm: u64) -> (Vec<Rational>, Vec<Vertex>) {
    let n = q(norm as i64);
    let pts: Vec<(i64, Rational)> = vals
        .iter()
        .enumerate()
        .filter_map(|(j, v)| v.finite().map(|v| (j as i64, v / &n)))
        .collect();
    let d = pts.last().unwrap().0;
    let interp = |a: &(i64, Rational), b: &(i64, Rational), x: i64| -> Rational {
        if a.0 == b.0 {
            a.1.clone()
        } else {
            &a.1 + (&b.1 - &a.1) * q(x - a.0) / q(b.0 - a.0)
        }
    };
    let heights: Vec<Rational> = (0..=d)
        .map(|x| {
            let mut best: Option<Rational> = None;
            for a in pts.iter().filter(|a| a.0 <= x) {
                for b in pts.iter().filter(|b| b.0 >= x) {
                    let h = interp(a, b, x);
                    if best.as_ref().is_none_or(|m| h < *m) {
                        best = Some(h);
                    }
                }
            }
            best.unwrap()
        })
        .collect();
    // a point is a vertex if it is on the hull and no segment between other points passes through it
    let vertices = pts
        .iter()
        .filter(|p| heights[p.0 as usize] == p.1)
        .filter(|p| {
            !pts.iter().any(|a| {
                a.0 < p.0
                    && pts.iter().any(|b| {
                        b.0 > p.0
                            && interp(a, b, p.0) == p.1
                            && heights[a.0 as usize] == a.1
                            && heights[b.0 as usize] == b.1
                    })
            })
        })
        .map(|p| Vertex::new(p.0 as u64, p.1.clone()))
        .collect();
    (heights, vertices)
}

fn diag(entries: &[i64]) -> Matrix {
    let n = entries.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { q(entries[i]) } else { q(0) })
                .collect()
        })
        .collect()
}

/// An ordinary, weakly admissible module with a finite group action commuting with it.
pub struct OrdinaryCase {
    pub module: FilteredPhiModule,
    pub group: GroupAction,
    /// Dimension of the fixed space, known from the construction.
    pub fixed_rank: usize,
}

fn sign_generators(rng: &mut StdRng, n: usize) -> Vec<Vec<i64>> {
    (0..rng.gen_range(1..=2))
        .map(|_| {
            (0..n)
                .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
                .collect()
        })
        .collect()
}

fn flag_from(dims_by_jump: &[(i64, Vec<Vec<Rational>>)]) -> Vec<FilStep> {
    dims_by_jump
        .iter()
        .map(|(j, b)| FilStep {
            jump: *j,
            basis: b.clone(),
        })
        .collect()
}

/// Distinct exponents, diagonal sign group, flag generic inside each isotypic component.
fn sign_case(rng: &mut StdRng) -> Option<OrdinaryCase> {
    let n = rng.gen_range(1..=5);
    let mut pool: Vec<i64> = (-2..=5).collect();
    pool.shuffle(rng);
    let exps: Vec<i64> = pool[..n].to_vec();
    let frob: Vec<FrobeniusEigen> = exps
        .iter()
        .map(|&m| FrobeniusEigen::new(if rng.gen_bool(0.5) { 1 } else { -1 }, m))
        .collect();
    let gens = sign_generators(rng, n);

    // isotypic components: coordinates with the same sign pattern
    let mut comps: Vec<(Vec<i64>, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let pattern: Vec<i64> = gens.iter().map(|g| g[i]).collect();
        match comps.iter_mut().find(|c| c.0 == pattern) {
            Some(c) => c.1.push(i),
            None => comps.push((pattern, vec![i])),
        }
    }
    // a random basis of each component; Fil^j ∩ W takes the first #{i ∈ W : m_i ≥ j} vectors
    let bases: Vec<Vec<Vec<Rational>>> = comps
        .iter()
        .map(|(_, idx)| {
            (0..idx.len())
                .map(|_| {
                    let mut v = vec![q(0); n];
                    for &i in idx {
                        v[i] = q(rng.gen_range(-3..=3));
                    }
                    v
                })
                .collect()
        })
        .collect();
    if bases.iter().any(|b| linalg::rank(b) != b.len()) {
        return None;
    }
    let mut jumps = exps.clone();
    jumps.sort_unstable();
    let steps: Vec<(i64, Vec<Vec<Rational>>)> = jumps
        .iter()
        .map(|&j| {
            let mut rows = Vec::new();
            for ((_, idx), basis) in comps.iter().zip(&bases) {
                let c = idx.iter().filter(|&&i| exps[i] >= j).count();
                rows.extend(basis[..c].iter().cloned());
            }
            (j, rows)
        })
        .collect();
    let module = FilteredPhiModule::new(frob, flag_from(&steps)).ok()?;
    if is_weakly_admissible(&module) != Ok(true) {
        return None;
    }
    let group =
        GroupAction::generate(&gens.iter().map(|g| diag(g)).collect::<Vec<_>>(), n, 64).ok()?;
    let fixed_rank = (0..n).filter(|&i| gens.iter().all(|g| g[i] == 1)).count();
    Some(OrdinaryCase {
        module,
        group,
        fixed_rank,
    })
}

/// Repeated eigenvalues; a sign group conjugated by an automorphism of the φ-module,
/// which turns some signs into permutations and mixtures of equal eigenlines.
fn conjugated_case(rng: &mut StdRng) -> Option<OrdinaryCase> {
    let n = rng.gen_range(2..=5);
    let classes: Vec<FrobeniusEigen> = (0..rng.gen_range(1..=3))
        .map(|c| {
            FrobeniusEigen::new(
                if rng.gen_bool(0.5) { 1 } else { -1 },
                c as i64 - 1 + rng.gen_range(0..2) * 3,
            )
        })
        .collect();
    let mut frob: Vec<FrobeniusEigen> = (0..n).map(|_| *classes.choose(rng).unwrap()).collect();
    frob.sort();
    let exps: Vec<i64> = frob.iter().map(|e| e.exponent).collect();

    // automorphism g: invertible, block-diagonal along equal eigenvalues
    let mut g: Matrix = linalg::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if frob[i] == frob[j] {
                g[i][j] = q(rng.gen_range(-2..=2));
            }
        }
    }
    let g_inv = linalg::inverse(&g)?;
    let gens = sign_generators(rng, n);
    let conj: Vec<Matrix> = gens
        .iter()
        .map(|s| linalg::mat_mul(&linalg::mat_mul(&g, &diag(s)), &g_inv))
        .collect();

    let mut jumps = exps.clone();
    jumps.dedup();
    // split flag Fil^j = span{e_i : m_i ≥ j}, moved by g (columns of g are the images of e_i)
    let steps: Vec<(i64, Vec<Vec<Rational>>)> = jumps
        .iter()
        .map(|&j| {
            (
                j,
                (0..n)
                    .filter(|&i| exps[i] >= j)
                    .map(|i| (0..n).map(|r| g[r][i].clone()).collect())
                    .collect(),
            )
        })
        .collect();
    let module = FilteredPhiModule::new(frob, flag_from(&steps)).ok()?;
    let group = GroupAction::generate(&conj, n, 64).ok()?;
    let fixed_rank = (0..n).filter(|&i| gens.iter().all(|s| s[i] == 1)).count();
    Some(OrdinaryCase {
        module,
        group,
        fixed_rank,
    })
}

/// 70% distinct-exponent sign cases, 30% conjugated cases with repeated eigenvalues.
pub fn random_ordinary_case(rng: &mut StdRng) -> OrdinaryCase {
    loop {
        let case = if rng.gen_ratio(7, 10) {
            sign_case(rng)
        } else {
            conjugated_case(rng)
        };
        if let Some(c) = case {
            return c;
        }
    }
}
