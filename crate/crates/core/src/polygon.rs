//! Exact-rational Newton and Hodge polygons.
//!
//! A polygon is stored in canonical form: the minimal vertex list of a lower
//! convex hull starting at the origin, with integral abscissae and exact
//! rational ordinates. Two polygons are equal iff their vertex lists are.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolygonError {
    #[error("valuation list is empty")]
    Empty,
    #[error("valuation list needs at least two entries (degree >= 1)")]
    DegreeZero,
    #[error("first valuation must be 0, got {0}")]
    NonzeroConstant(String),
    #[error("final valuation must be finite")]
    InfiniteLast,
    #[error("degree normalization must be positive")]
    ZeroNorm,
    #[error("Hodge numbers are all zero")]
    AllZeroHodge,
    #[error("Hodge number list is empty")]
    EmptyHodge,
    #[error("malformed polygon: {0}")]
    Malformed(String),
    #[error("cannot parse rational `{0}`")]
    Parse(String),
}

/// Parses `a`, `-a`, or `a/b` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, PolygonError> {
    let s = s.trim();
    let bad = || PolygonError::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(
            BigInt::from_str(s).map_err(|_| bad())?,
        )),
    }
}

/// Parses a comma-separated list of rationals.
pub fn parse_rational_list(s: &str) -> Result<Vec<Rational>, PolygonError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_rational).collect()
}

/// p-adic valuation of a coefficient; zero coefficients carry `Infinite`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Valuation {
    Finite(Rational),
    Infinite,
}

impl Valuation {
    pub fn int(v: i64) -> Self {
        Valuation::Finite(Rational::from_integer(BigInt::from(v)))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl FromStr for Valuation {
    type Err = PolygonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "oo" | "∞") {
            Ok(Valuation::Infinite)
        } else {
            parse_rational(t).map(Valuation::Finite)
        }
    }
}

/// Multiset of rational slopes. Multiplicities are always >= 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SlopeMultiset {
    entries: BTreeMap<Rational, u64>,
}

impl SlopeMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_integers<I: IntoIterator<Item = i64>>(slopes: I) -> Self {
        slopes
            .into_iter()
            .map(|s| Rational::from_integer(BigInt::from(s)))
            .collect()
    }

    /// Builds a multiset from `(slope, multiplicity)` pairs; zero multiplicities are dropped.
    pub fn from_pairs<I: IntoIterator<Item = (Rational, u64)>>(pairs: I) -> Self {
        let mut s = Self::new();
        for (slope, mult) in pairs {
            s.insert(slope, mult);
        }
        s
    }

    pub fn insert(&mut self, slope: Rational, mult: u64) {
        if mult > 0 {
            *self.entries.entry(slope).or_insert(0) += mult;
        }
    }

    pub fn multiplicity(&self, slope: &Rational) -> u64 {
        self.entries.get(slope).copied().unwrap_or(0)
    }

    /// Sum of multiplicities (horizontal length / rank).
    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct slopes in increasing order with their multiplicities.
    pub fn iter(&self) -> impl Iterator<Item = (&Rational, u64)> + '_ {
        self.entries.iter().map(|(s, m)| (s, *m))
    }

    pub fn min(&self) -> Option<&Rational> {
        self.entries.keys().next()
    }

    pub fn max(&self) -> Option<&Rational> {
        self.entries.keys().next_back()
    }

    /// Slopes listed with repetition, ascending.
    pub fn to_vec(&self) -> Vec<Rational> {
        self.entries
            .iter()
            .flat_map(|(s, &m)| std::iter::repeat(s.clone()).take(m as usize))
            .collect()
    }

    /// `Σ α · mult(α)`; equals the final height of the polygon with these slopes.
    pub fn weighted_sum(&self) -> Rational {
        self.entries.iter().fold(Rational::zero(), |acc, (s, &m)| {
            acc + s * Rational::from_integer(BigInt::from(m))
        })
    }

    /// True iff `mult(α) = mult(weight − α)` for every α.
    pub fn is_symmetric(&self, weight: &Rational) -> bool {
        self.entries
            .iter()
            .all(|(s, &m)| self.multiplicity(&(weight - s)) == m)
    }

    /// Sub-multiset of slopes in the closed interval `[lo, hi]` (`hi = None` means unbounded).
    pub fn restrict(&self, lo: &Rational, hi: Option<&Rational>) -> SlopeMultiset {
        SlopeMultiset {
            entries: self
                .entries
                .iter()
                .filter(|(s, _)| *s >= lo && hi.is_none_or(|h| *s <= h))
                .map(|(s, m)| (s.clone(), *m))
                .collect(),
        }
    }
}

impl FromIterator<Rational> for SlopeMultiset {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        let mut s = SlopeMultiset::new();
        for slope in iter {
            s.insert(slope, 1);
        }
        s
    }
}

impl fmt::Display for SlopeMultiset {
    /// Comma-separated slopes with repetition, e.g. `0,1/2,1/2,1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_vec().iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for SlopeMultiset {
    type Err = PolygonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(parse_rational_list(s)?.into_iter().collect())
    }
}

/// Hodge numbers `h^{r, i-r}` for `r = 0..=i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HodgeNumbers(Vec<u64>);

impl HodgeNumbers {
    pub fn new(h: Vec<u64>) -> Result<Self, PolygonError> {
        if h.is_empty() {
            return Err(PolygonError::EmptyHodge);
        }
        if h.iter().all(|&x| x == 0) {
            return Err(PolygonError::AllZeroHodge);
        }
        Ok(HodgeNumbers(h))
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub x: u64,
    pub y: Rational,
}

impl Vertex {
    pub fn new(x: u64, y: Rational) -> Self {
        Vertex { x, y }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Canonical lower-convex polygon starting at `(0,0)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polygon {
    vertices: Vec<Vertex>,
}

fn rat(x: u64) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

/// `(b - a) × (c - a)`; positive for a strict left turn.
fn cross(a: &Vertex, b: &Vertex, c: &Vertex) -> Rational {
    let abx = rat(b.x) - rat(a.x);
    let acx = rat(c.x) - rat(a.x);
    abx * (&c.y - &a.y) - (&b.y - &a.y) * acx
}

/// Lower hull of points sorted by strictly increasing x. Collinear points are dropped.
fn lower_hull(points: Vec<Vertex>) -> Vec<Vertex> {
    let mut hull: Vec<Vertex> = Vec::with_capacity(points.len());
    for pt in points {
        while hull.len() >= 2
            && !cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &pt).is_positive()
        {
            hull.pop();
        }
        hull.push(pt);
    }
    hull
}

impl Polygon {
    /// Lower convex hull of an arbitrary point set (duplicate abscissae keep the lowest point).
    /// The leftmost point must be the origin.
    pub fn hull_of(mut points: Vec<Vertex>) -> Result<Polygon, PolygonError> {
        if points.is_empty() {
            return Err(PolygonError::Empty);
        }
        points.sort_by(|a, b| a.x.cmp(&b.x).then_with(|| a.y.cmp(&b.y)));
        points.dedup_by(|later, earlier| later.x == earlier.x);
        if points[0].x != 0 || !points[0].y.is_zero() {
            return Err(PolygonError::Malformed(
                "polygon must start at (0,0)".into(),
            ));
        }
        Ok(Polygon {
            vertices: lower_hull(points),
        })
    }

    /// Polygon whose slopes are exactly `slopes`, each slope covering its multiplicity.
    pub fn from_slopes(slopes: &SlopeMultiset) -> Polygon {
        let mut vertices = vec![Vertex::new(0, Rational::zero())];
        let (mut x, mut y) = (0u64, Rational::zero());
        for (s, m) in slopes.iter() {
            x += m;
            y += s * rat(m);
            vertices.push(Vertex::new(x, y.clone()));
        }
        Polygon { vertices }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Horizontal extent.
    pub fn width(&self) -> u64 {
        self.vertices.last().map_or(0, |v| v.x)
    }

    pub fn endpoint(&self) -> &Vertex {
        self.vertices
            .last()
            .expect("polygon has at least the origin")
    }

    /// Slope multiset read off consecutive vertices.
    pub fn slopes(&self) -> SlopeMultiset {
        let mut s = SlopeMultiset::new();
        for w in self.vertices.windows(2) {
            let dx = w[1].x - w[0].x;
            s.insert((&w[1].y - &w[0].y) / rat(dx), dx);
        }
        s
    }

    /// Height at abscissa `x` (exact linear interpolation); `None` outside `[0, width]`.
    pub fn height_at(&self, x: u64) -> Option<Rational> {
        if x > self.width() {
            return None;
        }
        let i = self.vertices.partition_point(|v| v.x < x);
        let v = &self.vertices[i];
        if v.x == x {
            return Some(v.y.clone());
        }
        let u = &self.vertices[i - 1];
        let t = Rational::new(BigInt::from(x - u.x), BigInt::from(v.x - u.x));
        Some(&u.y + (&v.y - &u.y) * t)
    }

    /// Vertices rendered as `[["x","y"], ...]` fraction strings.
    pub fn vertex_strings(&self) -> Vec<[String; 2]> {
        self.vertices
            .iter()
            .map(|v| [v.x.to_string(), v.y.to_string()])
            .collect()
    }
}

impl fmt::Display for Polygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.vertices.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Newton polygon of `Σ a_j T^j` from the valuations `v_p(a_j)`: lower hull of `(j, vals[j]/degree_norm)`.
pub fn polygon_from_valuations(
    vals: &[Valuation],
    degree_norm: u64,
) -> Result<Polygon, PolygonError> {
    if vals.is_empty() {
        return Err(PolygonError::Empty);
    }
    if vals.len() < 2 {
        return Err(PolygonError::DegreeZero);
    }
    if degree_norm == 0 {
        return Err(PolygonError::ZeroNorm);
    }
    match &vals[0] {
        Valuation::Finite(v) if v.is_zero() => {}
        Valuation::Finite(v) => return Err(PolygonError::NonzeroConstant(v.to_string())),
        Valuation::Infinite => return Err(PolygonError::NonzeroConstant("inf".into())),
    }
    if vals[vals.len() - 1] == Valuation::Infinite {
        return Err(PolygonError::InfiniteLast);
    }
    let norm = rat(degree_norm);
    let points = vals
        .iter()
        .enumerate()
        .filter_map(|(j, v)| v.finite().map(|v| Vertex::new(j as u64, v / &norm)))
        .collect();
    Ok(Polygon {
        vertices: lower_hull(points),
    })
}

/// Hodge polygon: vertices `(Σ_{r<=j} h^r, Σ_{r<=j} r·h^r)`.
pub fn polygon_from_hodge_numbers(h: &HodgeNumbers) -> Result<Polygon, PolygonError> {
    let mut points = vec![Vertex::new(0, Rational::zero())];
    let (mut x, mut y) = (0u64, 0u64);
    for (r, &hr) in h.as_slice().iter().enumerate() {
        x += hr;
        y += r as u64 * hr;
        points.push(Vertex::new(x, rat(y)));
    }
    Polygon::hull_of(points)
}

/// `p` lies on or above `q` on their common horizontal range. Endpoints need not agree.
pub fn lies_on_or_above(p: &Polygon, q: &Polygon) -> bool {
    let end = p.width().min(q.width());
    let mut xs: Vec<u64> = p
        .vertices()
        .iter()
        .chain(q.vertices())
        .map(|v| v.x)
        .filter(|&x| x <= end)
        .collect();
    xs.push(end);
    xs.sort_unstable();
    xs.dedup();
    xs.into_iter()
        .all(|x| match (p.height_at(x), q.height_at(x)) {
            (Some(hp), Some(hq)) => hp >= hq,
            _ => false,
        })
}

/// Slope multiset is symmetric about `weight / 2` (α ↔ weight − α).
pub fn is_symmetric(s: &SlopeMultiset, weight: &Rational) -> bool {
    s.is_symmetric(weight)
}

/// Exact p-adic valuation of a nonzero integer; `Infinite` for zero.
pub fn integer_valuation(n: &BigInt, p: u64) -> Valuation {
    if n.is_zero() {
        return Valuation::Infinite;
    }
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0i64;
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    Valuation::int(v)
}
