//! Balls in Cayley graphs with exact word-metric distances.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use super::{Element, SharedGroup};
use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::estimator::{brick_cover_with, tree_cover, BrickSpec, Subject};
use crate::metric::{FiniteMetricSpace, PointSet};

/// The ball `B_R(e)` of a Cayley graph. Distances are word-metric
/// distances measured inside `B_{R+margin}`; they are exact whenever
/// `margin >= R` or balls are convex.
#[derive(Clone, Debug)]
pub struct CayleyWindow {
    pub group: SharedGroup,
    /// ball elements, sphere by sphere, each sphere in lexicographic order
    pub elements: Vec<Element>,
    pub index: HashMap<Element, usize>,
    /// word length of each element
    pub lengths: Vec<u32>,
    pub radius: u64,
    pub margin: u64,
    pub exact: bool,
    /// identity is the basepoint (index 0)
    pub space: Arc<FiniteMetricSpace>,
}

impl CayleyWindow {
    pub fn lookup(&self, g: &Element) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Indices of elements of word length `<= r`.
    pub fn sub_ball(&self, r: u64) -> PointSet {
        PointSet::new((0..self.len()).filter(|&i| self.lengths[i] as u64 <= r))
    }
}

/// Spheres of a breadth-first exploration, stopping once the total passes
/// `max_points`. The flag is set when the group ran out of elements.
fn explore(group: &SharedGroup, radius: u64, max_points: usize) -> (Vec<Vec<Element>>, bool) {
    let gens = group.generators().len();
    let mut seen: std::collections::HashSet<Element> = std::collections::HashSet::new();
    let id = group.identity();
    seen.insert(id.clone());
    let mut layers = vec![vec![id]];
    let mut total = 1;
    while (layers.len() as u64) <= radius {
        let mut next = Vec::new();
        for g in layers.last().expect("nonempty") {
            for s in 0..gens {
                let h = group.multiply(g, s);
                if seen.insert(h.clone()) {
                    next.push(h);
                }
            }
        }
        if next.is_empty() {
            return (layers, true);
        }
        next.sort();
        total += next.len();
        layers.push(next);
        if total > max_points {
            break;
        }
    }
    (layers, false)
}

/// `B_radius(e)` with distances measured in `B_{radius+margin}`. `margin`
/// defaults to 0 for convex balls and `radius` otherwise; it shrinks to fit
/// `max_points`. Errors if even the bare ball does not fit.
pub fn cayley_window(
    group: &SharedGroup,
    radius: u64,
    margin: Option<u64>,
    max_points: usize,
) -> Result<CayleyWindow> {
    let want_margin = margin.unwrap_or(if group.convex_balls() { 0 } else { radius });
    let (layers, finite) = explore(group, radius + want_margin, max_points);
    let cumulative: Vec<usize> = layers
        .iter()
        .scan(0, |t, l| {
            *t += l.len();
            Some(*t)
        })
        .collect();
    let depth = layers.len() - 1;
    let fits = |r: u64| {
        ((r as usize) <= depth || finite) && cumulative[(r as usize).min(depth)] <= max_points
    };
    if !fits(radius) {
        let achieved = (0..=radius).rev().find(|&r| fits(r)).unwrap_or(0);
        return Err(Error::BallBudget {
            budget: max_points,
            achieved,
        });
    }
    let outer = (radius..=radius + want_margin)
        .rev()
        .find(|&r| fits(r))
        .unwrap_or(radius);
    build(group, &layers, radius, outer - radius, finite)
}

/// Like [`cayley_window`] but shrinks the radius to fit `max_points`.
pub fn cayley_window_capped(
    group: &SharedGroup,
    radius: u64,
    max_points: usize,
) -> Result<CayleyWindow> {
    match cayley_window(group, radius, None, max_points) {
        Err(Error::BallBudget { achieved, .. }) => cayley_window(group, achieved, None, max_points),
        other => other,
    }
}

fn build(
    group: &SharedGroup,
    layers: &[Vec<Element>],
    radius: u64,
    margin: u64,
    finite: bool,
) -> Result<CayleyWindow> {
    let outer = ((radius + margin) as usize).min(layers.len() - 1);
    let inner = (radius as usize).min(layers.len() - 1);
    let all: Vec<&Element> = layers[..=outer].iter().flatten().collect();
    let n_inner: usize = layers[..=inner].iter().map(|l| l.len()).sum();
    let index_all: HashMap<&Element, usize> =
        all.iter().enumerate().map(|(i, g)| (*g, i)).collect();
    let gens = group.generators().len();
    let adj: Vec<Vec<usize>> = all
        .iter()
        .map(|g| {
            (0..gens)
                .filter_map(|s| index_all.get(&group.multiply(g, s)).copied())
                .collect()
        })
        .collect();
    let mut dist = vec![0u32; n_inner * n_inner];
    let mut d = vec![u32::MAX; all.len()];
    let mut queue = VecDeque::new();
    for src in 0..n_inner {
        d.iter_mut().for_each(|x| *x = u32::MAX);
        d[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if d[v] == u32::MAX {
                    d[v] = d[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist[src * n_inner..(src + 1) * n_inner].copy_from_slice(&d[..n_inner]);
    }
    let elements: Vec<Element> = all[..n_inner].iter().map(|g| (*g).clone()).collect();
    let lengths = dist[..n_inner].to_vec();
    let labels = elements.iter().map(|g| group.label(g)).collect();
    let space = FiniteMetricSpace::from_raw(n_inner, 1, dist)
        .with_labels(labels)
        .with_basepoint(0);
    let index = elements
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, g)| (g, i))
        .collect();
    Ok(CayleyWindow {
        group: group.clone(),
        elements,
        index,
        lengths,
        radius,
        margin,
        exact: group.convex_balls() || margin >= radius || finite,
        space: Arc::new(space),
    })
}

/// A group as a curve subject: Cayley balls plus lattice bricks and tree
/// covers as witnesses.
pub struct GroupSubject {
    pub group: SharedGroup,
}

impl Subject for GroupSubject {
    fn describe(&self) -> String {
        self.group.name()
    }

    fn ball(&self, radius: u64, max_points: usize) -> Result<(Arc<FiniteMetricSpace>, u64)> {
        let w = cayley_window_capped(&self.group, radius, max_points)?;
        Ok((w.space, w.radius))
    }

    fn witnesses(
        &self,
        space: &Arc<FiniteMetricSpace>,
        window: &PointSet,
        lambda: u64,
        d: u64,
    ) -> Vec<(String, Cover)> {
        let mut out = Vec::new();
        if let (Some(n), Some(coords)) = (self.group.lattice_dim(), space.coordinates()) {
            let spread = n as u64 * lambda;
            if d >= spread && n > 0 {
                let side = ((d - spread) / n as u64 + 1) as i64;
                let spec = BrickSpec::cube(n, lambda, side);
                if let Ok(c) = brick_cover_with(space, &coords, window, &spec) {
                    out.push(("brick".to_string(), c));
                }
            }
        }
        if let Ok(c) = tree_cover(space, lambda, window, None) {
            out.push(("tree".to_string(), c));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::groups::*;
    use super::*;
    use crate::metric::Rational;

    #[test]
    fn line_and_free_balls() {
        let z: SharedGroup = Arc::new(Zn { n: 1 });
        let w = cayley_window(&z, 3, None, 100).unwrap();
        assert_eq!(w.len(), 7);
        for i in 0..7 {
            for j in 0..7 {
                let (a, b) = (w.elements[i][0], w.elements[j][0]);
                assert_eq!(w.space.units(i, j) as i64, (a - b).abs());
            }
        }
        let f: SharedGroup = Arc::new(Free { k: 2 });
        let w = cayley_window(&f, 2, None, 100).unwrap();
        assert_eq!(w.len(), 17);
        let sizes: Vec<usize> = (0..=5)
            .map(|r| {
                cayley_window(&f, r, None, 10_000)
                    .unwrap()
                    .sub_ball(r)
                    .len()
            })
            .collect();
        assert_eq!(sizes, vec![1, 5, 17, 53, 161, 485]);
    }

    #[test]
    fn free_distances_are_reduced_word_lengths() {
        let f: SharedGroup = Arc::new(Free { k: 2 });
        let w = cayley_window(&f, 4, None, 10_000).unwrap();
        for i in 0..w.len() {
            for j in 0..w.len() {
                let q = f.mul(&f.inverse(&w.elements[i]), &w.elements[j]);
                assert_eq!(w.space.units(i, j) as usize, q.len());
            }
        }
    }

    #[test]
    fn margin_makes_distances_left_invariant() {
        let l: SharedGroup = Arc::new(Lamplighter);
        let w = cayley_window(&l, 3, None, 100_000).unwrap();
        assert!(w.exact && w.margin == 3);
        for i in 0..w.len() {
            for j in 0..w.len() {
                let q = l.mul(&l.inverse(&w.elements[i]), &w.elements[j]);
                if let Some(k) = w.lookup(&q) {
                    assert_eq!(w.space.units(i, j), w.lengths[k]);
                }
            }
        }
    }

    #[test]
    fn finite_groups_and_budgets() {
        let s: SharedGroup = Arc::new(Symmetric { n: 4 });
        let w = cayley_window(&s, 20, None, 1000).unwrap();
        assert_eq!(w.len(), 24);
        assert_eq!(
            w.space.diam(&w.space.all_points()).unwrap(),
            Rational::from_integer(6)
        );
        let f: SharedGroup = Arc::new(Free { k: 2 });
        match cayley_window(&f, 6, None, 200) {
            Err(Error::BallBudget { achieved, .. }) => assert_eq!(achieved, 4),
            other => panic!("{other:?}"),
        }
        assert_eq!(cayley_window_capped(&f, 6, 200).unwrap().radius, 4);
    }
}
