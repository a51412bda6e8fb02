//! Exact finite metric spaces and point-set geometry.
//!
//! Distances are stored as `u32` numerators over one common positive
//! denominator (`scale`). Graph metrics have `scale == 1`. Radii are exact
//! rationals; comparing `d(x, y) <= k` reduces to comparing numerators with
//! `floor(k * scale)`, so no floating point is involved anywhere.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Sentinel-aware distance used for set separations: `Infinite` stands for
/// the distance to an empty set (or a family with at most one nonempty set).
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Separation {
    Finite(Rational),
    Infinite,
}

impl Separation {
    /// `true` iff the separation is at least `bound`.
    pub fn at_least(&self, bound: Rational) -> bool {
        match self {
            Separation::Finite(v) => *v >= bound,
            Separation::Infinite => true,
        }
    }

    /// `true` iff the separation is strictly larger than `bound`.
    pub fn exceeds(&self, bound: Rational) -> bool {
        match self {
            Separation::Finite(v) => *v > bound,
            Separation::Infinite => true,
        }
    }
}

impl fmt::Display for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Separation::Finite(v) => write!(f, "{v}"),
            Separation::Infinite => f.write_str("inf"),
        }
    }
}

/// A sorted, duplicate-free set of point indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointSet(Vec<usize>);

impl PointSet {
    pub fn new(points: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = points.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        PointSet(v)
    }

    pub fn empty() -> Self {
        PointSet(Vec::new())
    }

    pub fn range(r: std::ops::Range<usize>) -> Self {
        PointSet(r.collect())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, p: usize) -> bool {
        self.0.binary_search(&p).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.0.iter().all(|&p| other.contains(p))
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        PointSet::new(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        PointSet(
            self.0
                .iter()
                .copied()
                .filter(|&p| other.contains(p))
                .collect(),
        )
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        PointSet(
            self.0
                .iter()
                .copied()
                .filter(|&p| !other.contains(p))
                .collect(),
        )
    }

    pub fn to_bits(&self, n: usize) -> FixedBitSet {
        let mut bits = FixedBitSet::with_capacity(n);
        for &p in &self.0 {
            bits.insert(p);
        }
        bits
    }
}

impl FromIterator<usize> for PointSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        PointSet::new(iter)
    }
}

/// A finite point set with an exact metric.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    n: usize,
    scale: i64,
    dist: Vec<u32>,
    labels: Option<Vec<String>>,
    basepoint: Option<usize>,
}

impl fmt::Debug for FiniteMetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteMetricSpace")
            .field("n", &self.n)
            .field("scale", &self.scale)
            .field("basepoint", &self.basepoint)
            .finish()
    }
}

impl FiniteMetricSpace {
    /// Builds a space from raw numerators without checking the metric axioms.
    /// Callers that derive distances from BFS use this to skip the cubic
    /// triangle check.
    pub(crate) fn from_raw(n: usize, scale: i64, dist: Vec<u32>) -> Self {
        debug_assert_eq!(dist.len(), n * n);
        debug_assert!(scale > 0);
        FiniteMetricSpace {
            n,
            scale,
            dist,
            labels: None,
            basepoint: None,
        }
    }

    /// Integer distance matrix; validated.
    pub fn from_integer_matrix(rows: &[Vec<u32>]) -> Result<Self> {
        let n = rows.len();
        let mut dist = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::InvalidMetric("distance matrix is not square".into()));
            }
            dist.extend_from_slice(row);
        }
        let space = Self::from_raw(n, 1, dist);
        space.validate()?;
        Ok(space)
    }

    /// Rational distance matrix; brought to a common denominator and validated.
    pub fn from_rational_matrix(rows: &[Vec<Rational>]) -> Result<Self> {
        let n = rows.len();
        let mut scale: i64 = 1;
        for row in rows {
            if row.len() != n {
                return Err(Error::InvalidMetric("distance matrix is not square".into()));
            }
            for d in row {
                if *d < Rational::zero() {
                    return Err(Error::InvalidMetric(format!("negative distance {d}")));
                }
                scale = num_integer_lcm(scale, *d.denom());
            }
        }
        let mut dist = Vec::with_capacity(n * n);
        for row in rows {
            for d in row {
                let v = (*d * scale).to_integer();
                let v = u32::try_from(v)
                    .map_err(|_| Error::InvalidMetric(format!("distance {d} out of range")))?;
                dist.push(v);
            }
        }
        let space = Self::from_raw(n, scale, dist);
        space.validate()?;
        Ok(space)
    }

    /// Shortest-path metric of an unweighted connected graph.
    pub fn from_graph(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge ({a},{b}) out of range")));
            }
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        let dist = all_pairs_bfs(&adj, n)?;
        Ok(Self::from_raw(n, 1, dist))
    }

    /// Path graph on `0..n`.
    pub fn path(n: usize) -> Self {
        let mut dist = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = i.abs_diff(j) as u32;
            }
        }
        Self::from_raw(n, 1, dist)
    }

    /// Rectangular grid with the ℓ¹ metric; points enumerated in row-major
    /// order, last coordinate fastest. Labels are the coordinates.
    pub fn grid(dims: &[usize]) -> Self {
        let coords = grid_coords(dims);
        let n = coords.len();
        let mut dist = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = coords[i]
                    .iter()
                    .zip(&coords[j])
                    .map(|(a, b)| a.abs_diff(*b) as u32)
                    .sum();
            }
        }
        let labels = coords.iter().map(|c| format_coords(c)).collect();
        Self::from_raw(n, 1, dist).with_labels(labels)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n, "one label per point");
        self.labels = Some(labels);
        self
    }

    pub fn with_basepoint(mut self, basepoint: usize) -> Self {
        assert!(basepoint < self.n);
        self.basepoint = Some(basepoint);
        self
    }

    /// Checks symmetry, zero diagonal, positivity off the diagonal and the
    /// triangle inequality. Cubic in the number of points.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        for x in 0..n {
            if self.units(x, x) != 0 {
                return Err(Error::InvalidMetric(format!("d({x},{x}) != 0")));
            }
            for y in 0..n {
                if self.units(x, y) != self.units(y, x) {
                    return Err(Error::InvalidMetric(format!("d({x},{y}) != d({y},{x})")));
                }
                if x != y && self.units(x, y) == 0 {
                    return Err(Error::InvalidMetric(format!(
                        "d({x},{y}) = 0 for distinct points"
                    )));
                }
            }
        }
        for y in 0..n {
            for x in 0..n {
                let dxy = self.units(x, y) as u64;
                for z in 0..n {
                    if self.units(x, z) as u64 > dxy + self.units(y, z) as u64 {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails for ({x},{y},{z})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Common denominator of all distances.
    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn is_integral(&self) -> bool {
        self.scale == 1
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, p: usize) -> String {
        match &self.labels {
            Some(l) => l[p].clone(),
            None => p.to_string(),
        }
    }

    /// Integer coordinates parsed from labels of the form `(x,y,..)`.
    pub fn coordinates(&self) -> Option<Vec<Vec<i64>>> {
        self.labels
            .as_ref()?
            .iter()
            .map(|l| parse_coords(l))
            .collect()
    }

    pub fn basepoint(&self) -> Option<usize> {
        self.basepoint
    }

    /// Distance numerator (distance times `scale`).
    #[inline]
    pub fn units(&self, x: usize, y: usize) -> u32 {
        self.dist[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[u32] {
        &self.dist[x * self.n..(x + 1) * self.n]
    }

    pub fn dist(&self, x: usize, y: usize) -> Rational {
        Rational::new(self.units(x, y) as i64, self.scale)
    }

    /// Converts a radius to numerator units: `floor(k * scale)`, so that
    /// `d(x, y) <= k` iff `units(x, y) <= radius_units(k)`.
    pub fn radius_units(&self, k: Rational) -> u64 {
        if k < Rational::zero() {
            return 0;
        }
        (k * self.scale)
            .floor()
            .to_integer()
            .to_u64()
            .unwrap_or(u64::MAX)
    }

    pub fn units_to_rational(&self, units: u64) -> Rational {
        Rational::new(units as i64, self.scale)
    }

    pub fn all_points(&self) -> PointSet {
        PointSet::range(0..self.n)
    }

    pub fn complement(&self, a: &PointSet) -> PointSet {
        PointSet((0..self.n).filter(|&p| !a.contains(p)).collect())
    }

    /// Closed ball `{y : d(center, y) <= k}`.
    pub fn ball(&self, center: usize, k: Rational) -> PointSet {
        let r = self.radius_units(k);
        PointSet(
            self.row(center)
                .iter()
                .enumerate()
                .filter(|(_, &d)| d as u64 <= r)
                .map(|(y, _)| y)
                .collect(),
        )
    }

    pub fn diam(&self, a: &PointSet) -> Result<Rational> {
        if a.is_empty() {
            return Err(Error::EmptySetDiameter);
        }
        Ok(self.units_to_rational(self.diam_units(a.members()) as u64))
    }

    /// Diameter in numerator units; 0 for empty or singleton slices.
    pub fn diam_units(&self, points: &[usize]) -> u32 {
        let mut best = 0;
        for (i, &x) in points.iter().enumerate() {
            let row = self.row(x);
            for &y in &points[i + 1..] {
                best = best.max(row[y]);
            }
        }
        best
    }

    /// `{x : d(x, A) <= k}`. Empty for empty `A`.
    pub fn outer_neighborhood(&self, a: &PointSet, k: Rational) -> PointSet {
        let r = self.radius_units(k);
        if a.is_empty() {
            return PointSet::empty();
        }
        PointSet(
            (0..self.n)
                .filter(|&x| {
                    let row = self.row(x);
                    a.iter().any(|p| row[p] as u64 <= r)
                })
                .collect(),
        )
    }

    /// `X \ N_k(X \ A)`, the points whose closed `k`-ball stays inside `A`.
    pub fn inner_neighborhood(&self, a: &PointSet, k: Rational) -> PointSet {
        let outside = self.complement(a);
        let grown = self.outer_neighborhood(&outside, k);
        self.complement(&grown)
    }

    /// Minimum pairwise distance between two sets; `Infinite` if either is
    /// empty.
    pub fn set_distance(&self, a: &PointSet, b: &PointSet) -> Separation {
        match self.set_distance_units(a.members(), b.members()) {
            Some(u) => Separation::Finite(self.units_to_rational(u as u64)),
            None => Separation::Infinite,
        }
    }

    pub(crate) fn set_distance_units(&self, a: &[usize], b: &[usize]) -> Option<u32> {
        let mut best: Option<u32> = None;
        for &x in a {
            let row = self.row(x);
            for &y in b {
                let d = row[y];
                if best.is_none_or(|b| d < b) {
                    best = Some(d);
                }
            }
        }
        best
    }

    /// Minimum set distance over distinct pairs of nonempty members.
    pub fn family_separation(&self, family: &[PointSet]) -> Separation {
        let nonempty: Vec<&PointSet> = family.iter().filter(|s| !s.is_empty()).collect();
        let mut best = Separation::Infinite;
        for i in 0..nonempty.len() {
            for j in i + 1..nonempty.len() {
                if let Some(u) =
                    self.set_distance_units(nonempty[i].members(), nonempty[j].members())
                {
                    let v = self.units_to_rational(u as u64);
                    best = match best {
                        Separation::Finite(b) if b <= v => best,
                        _ => Separation::Finite(v),
                    };
                }
            }
        }
        best
    }

    /// Restriction of the metric to `s`. Returns the subspace and, for each
    /// subspace point, its index in `self`.
    pub fn subspace(&self, s: &PointSet) -> Result<(FiniteMetricSpace, Vec<usize>)> {
        if s.is_empty() {
            return Err(Error::invalid("subspace of an empty point set"));
        }
        let idx = s.members().to_vec();
        let m = idx.len();
        let mut dist = Vec::with_capacity(m * m);
        for &x in &idx {
            let row = self.row(x);
            dist.extend(idx.iter().map(|&y| row[y]));
        }
        let mut sub = Self::from_raw(m, self.scale, dist);
        if let Some(labels) = &self.labels {
            sub.labels = Some(idx.iter().map(|&p| labels[p].clone()).collect());
        }
        if let Some(b) = self.basepoint {
            sub.basepoint = idx.iter().position(|&p| p == b);
        }
        Ok((sub, idx))
    }

    /// Largest cardinality of a closed `k`-ball.
    pub fn max_ball_cardinality(&self, k: Rational) -> usize {
        let r = self.radius_units(k);
        (0..self.n)
            .map(|x| self.row(x).iter().filter(|&&d| d as u64 <= r).count())
            .max()
            .unwrap_or(0)
    }

    /// Adjacency lists of the unit-distance graph (integral metrics only).
    pub fn unit_graph(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|x| {
                self.row(x)
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| d as i64 == self.scale)
                    .map(|(y, _)| y)
                    .collect()
            })
            .collect()
    }
}

/// All-pairs BFS distances; errors if the graph is disconnected.
pub(crate) fn all_pairs_bfs(adj: &[Vec<usize>], n: usize) -> Result<Vec<u32>> {
    let mut dist = vec![u32::MAX; n * n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0;
        queue.clear();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let du = row[u];
            for &v in &adj[u] {
                if row[v] == u32::MAX {
                    row[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        if row.contains(&u32::MAX) {
            return Err(Error::InvalidMetric("graph is disconnected".into()));
        }
    }
    Ok(dist)
}

pub(crate) fn grid_coords(dims: &[usize]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &d in dims {
        let mut next = Vec::with_capacity(out.len() * d);
        for prefix in &out {
            for c in 0..d as i64 {
                let mut v = prefix.clone();
                v.push(c);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

pub fn format_coords(c: &[i64]) -> String {
    let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

pub fn parse_coords(label: &str) -> Option<Vec<i64>> {
    let inner = label.strip_prefix('(')?.strip_suffix(')')?;
    if inner.is_empty() {
        return Some(Vec::new());
    }
    inner.split(',').map(|t| t.trim().parse().ok()).collect()
}

fn num_integer_lcm(a: i64, b: i64) -> i64 {
    fn gcd(mut a: i64, mut b: i64) -> i64 {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a.abs()
    }
    a / gcd(a, b) * b
}

/// A map between finite metric spaces together with its claimed
/// quasi-isometry constants.
#[derive(Clone, Debug)]
pub struct QuasiIsometryData {
    pub source: Arc<FiniteMetricSpace>,
    pub target: Arc<FiniteMetricSpace>,
    pub map: Vec<usize>,
    pub alpha: Rational,
    pub epsilon: Rational,
    /// Coarse density constant; also bounds the round trips through the
    /// quasi-inverse.
    pub c: Rational,
    pub quasi_inverse: Option<Box<QuasiIsometryData>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QiViolation {
    /// `(1/alpha) d(x,y) - epsilon > d(fx, fy)`
    LowerBound {
        x: usize,
        y: usize,
    },
    /// `d(fx, fy) > alpha d(x,y) + epsilon`
    UpperBound {
        x: usize,
        y: usize,
    },
    /// target point farther than `c` from the image
    NotCoarselyDense {
        y: usize,
    },
    /// `d(f(g(y)), y) > c`
    TargetRoundTrip {
        y: usize,
    },
    /// `d(g(f(x)), x) > c`
    SourceRoundTrip {
        x: usize,
    },
    /// a violation of the quasi-inverse's own inequalities
    Inverse(Box<QiViolation>),
    Malformed {
        detail: String,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct QiReport {
    pub valid: bool,
    pub violations: Vec<QiViolation>,
}

impl QuasiIsometryData {
    pub fn identity(space: Arc<FiniteMetricSpace>) -> Self {
        let n = space.len();
        QuasiIsometryData {
            source: space.clone(),
            target: space,
            map: (0..n).collect(),
            alpha: Rational::from_integer(1),
            epsilon: Rational::zero(),
            c: Rational::zero(),
            quasi_inverse: None,
        }
    }

    /// Identity with itself recorded as quasi-inverse.
    pub fn identity_with_inverse(space: Arc<FiniteMetricSpace>) -> Self {
        let mut q = Self::identity(space.clone());
        q.quasi_inverse = Some(Box::new(Self::identity(space)));
        q
    }

    fn inequality_violations(&self) -> Vec<QiViolation> {
        let mut out = Vec::new();
        if self.map.len() != self.source.len() {
            out.push(QiViolation::Malformed {
                detail: format!(
                    "map has {} entries for {} source points",
                    self.map.len(),
                    self.source.len()
                ),
            });
            return out;
        }
        if let Some(&bad) = self.map.iter().find(|&&y| y >= self.target.len()) {
            out.push(QiViolation::Malformed {
                detail: format!("map value {bad} outside target"),
            });
            return out;
        }
        if self.alpha < Rational::from_integer(1) || self.epsilon < Rational::zero() {
            out.push(QiViolation::Malformed {
                detail: "alpha must be >= 1 and epsilon >= 0".into(),
            });
            return out;
        }
        let n = self.source.len();
        for x in 0..n {
            for y in x + 1..n {
                let d = self.source.dist(x, y);
                let e = self.target.dist(self.map[x], self.map[y]);
                if d / self.alpha - self.epsilon > e {
                    out.push(QiViolation::LowerBound { x, y });
                }
                if e > self.alpha * d + self.epsilon {
                    out.push(QiViolation::UpperBound { x, y });
                }
            }
        }
        out
    }

    /// Exhaustive check of the quasi-isometry inequalities, coarse density
    /// and (if present) the quasi-inverse round trips.
    pub fn check(&self) -> QiReport {
        let mut violations = self.inequality_violations();
        if violations
            .iter()
            .any(|v| matches!(v, QiViolation::Malformed { .. }))
        {
            return QiReport {
                valid: false,
                violations,
            };
        }
        let image = PointSet::new(self.map.iter().copied());
        let cu = self.target.radius_units(self.c);
        for y in 0..self.target.len() {
            let row = self.target.row(y);
            if !image.iter().any(|p| row[p] as u64 <= cu) {
                violations.push(QiViolation::NotCoarselyDense { y });
            }
        }
        if let Some(inv) = &self.quasi_inverse {
            if inv.source.len() != self.target.len() || inv.target.len() != self.source.len() {
                violations.push(QiViolation::Malformed {
                    detail: "quasi-inverse has mismatched spaces".into(),
                });
            } else {
                violations.extend(
                    inv.inequality_violations()
                        .into_iter()
                        .map(|v| QiViolation::Inverse(Box::new(v))),
                );
                if !violations
                    .iter()
                    .any(|v| matches!(v, QiViolation::Inverse(_)))
                {
                    let su = self.source.radius_units(self.c);
                    for y in 0..self.target.len() {
                        if self.target.units(self.map[inv.map[y]], y) as u64 > cu {
                            violations.push(QiViolation::TargetRoundTrip { y });
                        }
                    }
                    for x in 0..self.source.len() {
                        if self.source.units(inv.map[self.map[x]], x) as u64 > su {
                            violations.push(QiViolation::SourceRoundTrip { x });
                        }
                    }
                }
            }
        }
        QiReport {
            valid: violations.is_empty(),
            violations,
        }
    }
}

/// Free-function form of [`QuasiIsometryData::check`].
pub fn check_quasi_isometry(q: &QuasiIsometryData) -> QiReport {
    q.check()
}
