//! Constructive covers used as upper-bound witnesses. Every construction is
//! validated after it is built; none of its claimed bounds are assumed.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::clique::{Budget, ThresholdGraph};
use crate::cover::{Cover, DEFAULT_CLIQUE_BUDGET};
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, PointSet};

/// Staggered bricks in `Z^dim`, each fattened by the box `[0, lambda]^dim`
/// in the positive directions. A set of diameter `<= lambda` lies in the
/// brick of its coordinatewise minimum.
///
/// Axis `i` is shifted by half a side on odd layers of axis `i + 1`, so
/// every axis but the last needs both halves `>= lambda`; the layer axis
/// needs side `>= lambda + 1`. Multiplicity `dim + 1` is reached for
/// `dim <= 2`; callers validate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrickSpec {
    pub lambda: u64,
    /// tile side per axis
    pub sides: Vec<i64>,
    /// tile origin per axis
    pub origin: Vec<i64>,
}

impl BrickSpec {
    pub fn cube(dim: usize, lambda: u64, side: i64) -> Self {
        BrickSpec {
            lambda,
            sides: vec![side; dim],
            origin: vec![0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    /// Diameter bound of a fattened brick in the l1 metric.
    pub fn mesh_bound(&self) -> u64 {
        self.sides
            .iter()
            .map(|&s| (s - 1) as u64 + self.lambda)
            .sum()
    }

    /// Least admissible side per axis.
    pub fn min_sides(dim: usize, lambda: u64) -> Vec<i64> {
        (0..dim)
            .map(|i| if i + 1 < dim { (2 * lambda).max(lambda + 1) } else { lambda + 1 } as i64)
            .collect()
    }

    /// Tile index of a lattice point; axis `i` is shifted by half a side
    /// when the tile index along axis `i + 1` is odd.
    fn tile(&self, v: &[i64]) -> Vec<i64> {
        let dim = self.dim();
        let mut t = vec![0i64; dim];
        for i in (0..dim).rev() {
            let shift = if i + 1 < dim && t[i + 1].rem_euclid(2) == 1 {
                self.sides[i] / 2
            } else {
                0
            };
            t[i] = (v[i] - self.origin[i] - shift).div_euclid(self.sides[i]);
        }
        t
    }
}

fn box_offsets(dim: usize, side: i64) -> Vec<Vec<i64>> {
    if dim == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..=side {
        for mut rest in box_offsets(dim - 1, side) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Brick cover of `window` from explicit lattice coordinates (one per point
/// of the space). Not validated; see [`brick_cover`].
pub fn brick_cover_with(
    space: &Arc<FiniteMetricSpace>,
    coords: &[Vec<i64>],
    window: &PointSet,
    spec: &BrickSpec,
) -> Result<Cover> {
    let dim = spec.dim();
    if spec.origin.len() != dim || spec.sides.iter().any(|&s| s < 1) {
        return Err(Error::invalid(
            "brick spec needs one positive side and one origin per axis",
        ));
    }
    let need = BrickSpec::min_sides(dim, spec.lambda);
    if let Some(i) = (0..dim).find(|&i| spec.sides[i] < need[i]) {
        return Err(Error::pre(
            "brick_cover",
            format!(
                "side {} on axis {i} is below {} for lambda {}",
                spec.sides[i], need[i], spec.lambda
            ),
        ));
    }
    let shifts = box_offsets(dim, spec.lambda as i64);
    let mut tiles: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for p in window.iter() {
        let v = coords.get(p).filter(|v| v.len() == dim).ok_or_else(|| {
            Error::invalid(format!("point {p} has no {dim}-dimensional coordinates"))
        })?;
        let mut seen: Vec<Vec<i64>> = Vec::new();
        for s in &shifts {
            let q: Vec<i64> = v.iter().zip(s).map(|(a, b)| a - b).collect();
            let t = spec.tile(&q);
            if !seen.contains(&t) {
                seen.push(t);
            }
        }
        for t in seen {
            tiles.entry(t).or_default().push(p);
        }
    }
    let sets = tiles.into_values().map(PointSet::new).collect();
    Ok(Cover::new(space.clone(), sets, window.clone()))
}

/// Validated brick cover of a lattice window whose labels are coordinates.
/// Errors if the result misses multiplicity `dim + 1`, Lebesgue number
/// `lambda` or the brick mesh bound.
pub fn brick_cover(
    space: &Arc<FiniteMetricSpace>,
    dim: usize,
    lambda: u64,
    side: i64,
    window: &PointSet,
) -> Result<Cover> {
    let coords = space
        .coordinates()
        .ok_or_else(|| Error::invalid("brick cover needs coordinate labels"))?;
    let spec = BrickSpec::cube(dim, lambda, side);
    let cover = brick_cover_with(space, &coords, window, &spec)?;
    check_construction("brick_cover", &cover, dim + 1, lambda, spec.mesh_bound())?;
    Ok(cover)
}

fn check_construction(
    op: &'static str,
    cover: &Cover,
    m: usize,
    lambda: u64,
    mesh: u64,
) -> Result<()> {
    let got_m = cover.multiplicity()?;
    let got_l = cover.lebesgue_number()?;
    let got_mesh = cover.mesh_units();
    if got_m > m || !got_l.at_least(lambda) || got_mesh > mesh {
        return Err(Error::CertificateFailed {
            op,
            detail: format!(
                "multiplicity {got_m} (claimed <= {m}), lebesgue {got_l} (claimed >= {lambda}), \
                 mesh {got_mesh} (claimed <= {mesh})"
            ),
        });
    }
    Ok(())
}

/// Depth of every point from `root` and its parent in the breadth-first
/// tree, after checking that the unit-distance graph is a tree.
fn rooted_tree(space: &FiniteMetricSpace, root: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let adj = space.unit_graph();
    let n = space.len();
    let edges: usize = adj.iter().map(|a| a.len()).sum::<usize>() / 2;
    if space.scale() != 1 || edges + 1 != n {
        return Err(Error::NotATree {
            detail: format!("{n} points but {edges} unit edges"),
        });
    }
    let mut depth = vec![usize::MAX; n];
    let mut parent = vec![root; n];
    depth[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    if depth.contains(&usize::MAX) {
        return Err(Error::NotATree {
            detail: "unit-distance graph is disconnected".into(),
        });
    }
    Ok((depth, parent))
}

/// Depth bands: the root set `[0, lambda]`, then bands starting at
/// `1 + i*w` covering `w + lambda` consecutive depths, `w = max(lambda, 1)`.
fn bands(lambda: u64, max_depth: usize) -> Vec<(usize, usize)> {
    let l = lambda as usize;
    let w = l.max(1);
    let mut out = vec![(0, l)];
    let mut s = 1;
    while s <= max_depth {
        out.push((s, s + w - 1 + l));
        s += w;
    }
    out
}

fn root_of(space: &FiniteMetricSpace, root: Option<usize>) -> Result<usize> {
    root.or(space.basepoint())
        .filter(|&r| r < space.len())
        .ok_or_else(|| Error::invalid("tree cover needs a root (basepoint)"))
}

/// Annulus cover of a tree window: within each depth band, points are
/// grouped by their ancestor at the band's first depth. Validated for
/// multiplicity 2, Lebesgue number `lambda` and mesh `4*lambda - 2`.
pub fn tree_cover(
    space: &Arc<FiniteMetricSpace>,
    lambda: u64,
    window: &PointSet,
    root: Option<usize>,
) -> Result<Cover> {
    let root = root_of(space, root)?;
    let (depth, parent) = rooted_tree(space, root)?;
    let max_depth = window.iter().map(|p| depth[p]).max().unwrap_or(0);
    let ancestor = |mut p: usize, level: usize| {
        while depth[p] > level {
            p = parent[p];
        }
        p
    };
    let mut sets = Vec::new();
    for (i, (lo, hi)) in bands(lambda, max_depth).into_iter().enumerate() {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for p in window.iter().filter(|&p| (lo..=hi).contains(&depth[p])) {
            let key = if i == 0 { root } else { ancestor(p, lo) };
            groups.entry(key).or_default().push(p);
        }
        sets.extend(groups.into_values().map(PointSet::new));
    }
    let cover = Cover::new(space.clone(), sets, window.clone());
    let mesh = (4 * lambda).saturating_sub(2).max(2 * lambda);
    let m = if lambda == 0 { 1 } else { 2 };
    check_construction("tree_cover", &cover, m, lambda, mesh)?;
    Ok(cover)
}

/// Depth bands around a root in any graph-metric window, split into the
/// connected pieces of the `lambda`-threshold graph. Nothing is guaranteed;
/// callers validate.
pub fn annulus_cover(
    space: &Arc<FiniteMetricSpace>,
    lambda: u64,
    window: &PointSet,
    root: Option<usize>,
) -> Result<Cover> {
    let root = root_of(space, root)?;
    let row = space.row(root);
    let depth = |p: usize| row[p] as usize;
    let max_depth = window.iter().map(depth).max().unwrap_or(0);
    let mut sets = Vec::new();
    for (i, (lo, hi)) in bands(lambda, max_depth).into_iter().enumerate() {
        let pts: Vec<usize> = window
            .iter()
            .filter(|&p| (lo..=hi).contains(&depth(p)))
            .collect();
        if pts.is_empty() {
            continue;
        }
        if i == 0 {
            sets.push(PointSet::new(pts));
            continue;
        }
        let g = ThresholdGraph::new(space, &pts, lambda * space.scale() as u64);
        for comp in g.components() {
            sets.push(PointSet::new(comp.into_iter().map(|j| pts[j])));
        }
    }
    Ok(Cover::new(space.clone(), sets, window.clone()))
}

/// Every maximal `lambda`-clique of the window as its own set.
pub fn clique_cover(
    space: &Arc<FiniteMetricSpace>,
    lambda: u64,
    window: &PointSet,
) -> Result<Cover> {
    let pts = window.members();
    let g = ThresholdGraph::new(space, pts, lambda * space.scale() as u64);
    let cliques = g.maximal_cliques(&mut Budget::new("clique cover", DEFAULT_CLIQUE_BUDGET))?;
    let sets = cliques
        .into_iter()
        .map(|c| PointSet::new(c.into_iter().map(|j| pts[j])))
        .collect();
    Ok(Cover::new(space.clone(), sets, window.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::Lebesgue;

    fn tree_ball(depth: usize, branching: usize) -> FiniteMetricSpace {
        // root has `branching` children, others `branching - 1`
        let mut edges = Vec::new();
        let mut frontier = vec![0usize];
        let mut n = 1;
        for d in 0..depth {
            let mut next = Vec::new();
            for &u in &frontier {
                let kids = if d == 0 { branching } else { branching - 1 };
                for _ in 0..kids {
                    edges.push((u, n));
                    next.push(n);
                    n += 1;
                }
            }
            frontier = next;
        }
        FiniteMetricSpace::from_graph(n, &edges)
            .unwrap()
            .with_basepoint(0)
    }

    #[test]
    fn brick_examples() {
        let z = Arc::new(FiniteMetricSpace::grid(&[100]));
        let w = z.all_points();
        let c = brick_cover(&z, 1, 3, 24, &w).unwrap();
        assert_eq!(c.multiplicity().unwrap(), 2);
        assert!(c.lebesgue_number().unwrap().at_least(3));
        let c = brick_cover(&z, 1, 0, 5, &w).unwrap();
        assert_eq!(c.multiplicity().unwrap(), 1);
        let g = Arc::new(FiniteMetricSpace::grid(&[20, 20]));
        let c = brick_cover(&g, 2, 1, 8, &g.all_points()).unwrap();
        assert!(c.multiplicity().unwrap() <= 3);
        let c = brick_cover(&g, 2, 1, 2, &g.all_points()).unwrap();
        assert_eq!(c.multiplicity().unwrap(), 3);
        assert_eq!(c.mesh_units(), 4);
    }

    #[test]
    fn brick_side_precondition() {
        let z = Arc::new(FiniteMetricSpace::grid(&[10]));
        let r = brick_cover(&z, 1, 3, 3, &z.all_points());
        assert!(matches!(r, Err(Error::Precondition { .. })));
    }

    #[test]
    fn tree_cover_examples() {
        let t = Arc::new(tree_ball(7, 4));
        let inner = t.ball(0, crate::metric::Rational::from_integer(5));
        let c = tree_cover(&t, 2, &inner, None).unwrap();
        assert!(c.multiplicity().unwrap() <= 2);
        assert!(c.lebesgue_number().unwrap().at_least(2));

        let p = Arc::new(FiniteMetricSpace::path(12).with_basepoint(0));
        let c = tree_cover(&p, 2, &p.all_points(), None).unwrap();
        assert_eq!(c.multiplicity().unwrap(), 2);

        let one = Arc::new(FiniteMetricSpace::path(1).with_basepoint(0));
        let c = tree_cover(&one, 3, &one.all_points(), None).unwrap();
        assert_eq!(c.sets.len(), 1);
        assert_eq!(c.lebesgue_number().unwrap(), Lebesgue::AllSubsets);
    }

    #[test]
    fn tree_cover_rejects_cycles() {
        let c4 = Arc::new(
            FiniteMetricSpace::from_graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)])
                .unwrap()
                .with_basepoint(0),
        );
        assert!(matches!(
            tree_cover(&c4, 1, &c4.all_points(), None),
            Err(Error::NotATree { .. })
        ));
    }

    #[test]
    fn tree_cover_all_small_lambdas() {
        let t = Arc::new(tree_ball(6, 3));
        for lambda in 0..=4 {
            tree_cover(&t, lambda, &t.all_points(), None).unwrap();
        }
    }

    #[test]
    fn annulus_and_clique_covers_are_covers() {
        let g = Arc::new(FiniteMetricSpace::grid(&[6, 6]).with_basepoint(0));
        let a = annulus_cover(&g, 2, &g.all_points(), None).unwrap();
        assert!(a.lebesgue_number().unwrap().at_least(2));
        let c = clique_cover(&g, 2, &g.all_points()).unwrap();
        assert!(c.lebesgue_number().unwrap().at_least(2));
        assert!(c.mesh_units() <= 2);
    }
}
