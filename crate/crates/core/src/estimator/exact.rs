//! Exact minimum-multiplicity covers with a Lebesgue floor and a diameter
//! budget, by branch-and-bound over groupings of maximal cliques.
//!
//! A subset of the window with diameter `<= lambda` is a clique of the
//! threshold graph `G_lambda`, so `L >= lambda` says every maximal clique of
//! `G_lambda` sits inside some cover set. Shrinking each cover set to the
//! union of the maximal cliques it contains keeps every constraint, so it is
//! enough to search over ways of grouping maximal cliques into sets of
//! diameter `<= D`, minimising the largest point incidence.

use fixedbitset::FixedBitSet;

use crate::clique::{Budget, ThresholdGraph};
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, PointSet};

pub(crate) struct Instance {
    /// window points (global indices), local index = position
    pub pts: Vec<usize>,
    /// `near[p]`: local points within `D` of `p`
    near: Vec<FixedBitSet>,
    /// maximal cliques of `G_lambda`, size descending then lexicographic
    pub cliques: Vec<Vec<usize>>,
    clique_bits: Vec<FixedBitSet>,
    graph: ThresholdGraph,
}

#[derive(Clone)]
struct Group {
    union: FixedBitSet,
    /// points within `D` of every member
    allowed: FixedBitSet,
}

impl Instance {
    pub fn new(
        space: &FiniteMetricSpace,
        window: &PointSet,
        lambda: u64,
        d: u64,
        budget: &mut Budget,
    ) -> Result<Self> {
        if space.scale() != 1 {
            return Err(Error::CliqueMethodNeedsIntegers {
                scale: space.scale(),
            });
        }
        if lambda > d {
            return Err(Error::invalid(format!(
                "lambda {lambda} exceeds diameter budget {d}"
            )));
        }
        let pts = window.members().to_vec();
        let n = pts.len();
        let graph = ThresholdGraph::new(space, &pts, lambda);
        let mut cliques = graph.maximal_cliques(budget)?;
        cliques.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        let clique_bits = cliques
            .iter()
            .map(|c| {
                let mut b = FixedBitSet::with_capacity(n);
                c.iter().for_each(|&i| b.insert(i));
                b
            })
            .collect();
        let near = pts
            .iter()
            .map(|&x| {
                let row = space.row(x);
                let mut b = FixedBitSet::with_capacity(n);
                for (j, &y) in pts.iter().enumerate() {
                    if row[y] as u64 <= d {
                        b.insert(j);
                    }
                }
                b
            })
            .collect();
        Ok(Instance {
            pts,
            near,
            cliques,
            clique_bits,
            graph,
        })
    }

    fn to_global(&self, local: &FixedBitSet) -> PointSet {
        PointSet::new(local.ones().map(|i| self.pts[i]))
    }

    fn diam_ok(&self, set: &[usize]) -> bool {
        set.iter()
            .all(|&i| set.iter().all(|&j| self.near[i].contains(j)))
    }

    /// Multiplicity one is possible iff every component of `G_lambda` fits
    /// in the diameter budget; the components are then the cover.
    pub fn single_multiplicity_cover(&self) -> Option<Vec<PointSet>> {
        let comps = self.graph.components();
        if comps.iter().all(|c| self.diam_ok(c)) {
            Some(
                comps
                    .iter()
                    .map(|c| PointSet::new(c.iter().map(|&i| self.pts[i])))
                    .collect(),
            )
        } else {
            None
        }
    }

    /// Each maximal clique as its own set; always valid.
    pub fn clique_cover(&self) -> Vec<PointSet> {
        self.clique_bits.iter().map(|b| self.to_global(b)).collect()
    }

    /// A cover with multiplicity `<= m`, or `None` if none exists.
    pub fn feasible(&self, m: usize, budget: &mut Budget) -> Result<Option<Vec<PointSet>>> {
        if self.pts.is_empty() {
            return Ok(Some(Vec::new()));
        }
        if m == 0 {
            return Ok(None);
        }
        if m == 1 {
            return Ok(self.single_multiplicity_cover());
        }
        let mut groups = Vec::new();
        let mut inc = vec![0usize; self.pts.len()];
        if self.search(&mut groups, &mut inc, m, budget)? {
            Ok(Some(
                groups.iter().map(|g| self.to_global(&g.union)).collect(),
            ))
        } else {
            Ok(None)
        }
    }

    /// Ways to place clique `c`: indices of joinable groups, plus whether a
    /// fresh group is allowed.
    fn options(&self, c: usize, groups: &[Group], inc: &[usize], m: usize) -> (Vec<usize>, bool) {
        let bits = &self.clique_bits[c];
        let mut joins = Vec::new();
        for (g, grp) in groups.iter().enumerate() {
            if !bits.is_subset(&grp.allowed) {
                continue;
            }
            if bits.difference(&grp.union).all(|p| inc[p] < m) {
                joins.push(g);
            }
        }
        let fresh = self.cliques[c].iter().all(|&p| inc[p] < m);
        (joins, fresh)
    }

    fn search(
        &self,
        groups: &mut Vec<Group>,
        inc: &mut [usize],
        m: usize,
        budget: &mut Budget,
    ) -> Result<bool> {
        budget.tick()?;
        // fail-first: pick the pending clique with the fewest placements
        let mut best: Option<(usize, Vec<usize>, bool)> = None;
        // a node costs one unit per clique and group it inspects
        budget.charge((self.cliques.len() * (groups.len() + 1)) as u64)?;
        for c in 0..self.cliques.len() {
            let bits = &self.clique_bits[c];
            if groups.iter().any(|g| bits.is_subset(&g.union)) {
                continue;
            }
            let (joins, fresh) = self.options(c, groups, inc, m);
            let count = joins.len() + fresh as usize;
            if count == 0 {
                return Ok(false);
            }
            if best
                .as_ref()
                .is_none_or(|(_, j, f)| count < j.len() + *f as usize)
            {
                best = Some((c, joins, fresh));
            }
        }
        let Some((c, joins, fresh)) = best else {
            return Ok(true);
        };
        let members = &self.cliques[c];
        for g in joins {
            let saved = groups[g].clone();
            let added: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&p| !saved.union.contains(p))
                .collect();
            for &p in &added {
                inc[p] += 1;
                groups[g].union.insert(p);
                groups[g].allowed.intersect_with(&self.near[p]);
            }
            if self.search(groups, inc, m, budget)? {
                return Ok(true);
            }
            for &p in &added {
                inc[p] -= 1;
            }
            groups[g] = saved;
        }
        if fresh {
            let mut allowed = self.near[members[0]].clone();
            for &p in &members[1..] {
                allowed.intersect_with(&self.near[p]);
            }
            for &p in members {
                inc[p] += 1;
            }
            groups.push(Group {
                union: self.clique_bits[c].clone(),
                allowed,
            });
            if self.search(groups, inc, m, budget)? {
                return Ok(true);
            }
            groups.pop();
            for &p in members {
                inc[p] -= 1;
            }
        }
        Ok(false)
    }
}
