//! Threshold graphs and budgeted Bron–Kerbosch clique search.
//!
//! Subsets of diameter at most `t` are exactly the cliques of the threshold
//! graph whose edges join points at distance `<= t`. Every routine here
//! works on local indices `0..n` of a point list.

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;

/// Node counter for exponential searches. Exceeding the limit is an error,
/// never a silent truncation.
#[derive(Clone, Debug)]
pub struct Budget {
    what: &'static str,
    limit: u64,
    used: u64,
}

impl Budget {
    pub fn new(what: &'static str, limit: u64) -> Self {
        Budget {
            what,
            limit,
            used: 0,
        }
    }

    pub fn unlimited(what: &'static str) -> Self {
        Self::new(what, u64::MAX)
    }

    #[inline]
    pub fn tick(&mut self) -> Result<()> {
        self.charge(1)
    }

    /// Spends `units` of work at once.
    #[inline]
    pub fn charge(&mut self, units: u64) -> Result<()> {
        self.used = self.used.saturating_add(units);
        if self.used > self.limit {
            Err(Error::BudgetExhausted {
                what: self.what,
                budget: self.limit,
            })
        } else {
            Ok(())
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }
}

#[derive(Clone, Debug)]
pub struct ThresholdGraph {
    adj: Vec<FixedBitSet>,
}

impl ThresholdGraph {
    /// Graph on `points` (local indices follow the slice order) with an edge
    /// whenever the distance numerator is at most `threshold_units`.
    pub fn new(space: &FiniteMetricSpace, points: &[usize], threshold_units: u64) -> Self {
        let n = points.len();
        let mut adj = vec![FixedBitSet::with_capacity(n); n];
        for (i, &x) in points.iter().enumerate() {
            let row = space.row(x);
            for (j, &y) in points.iter().enumerate().skip(i + 1) {
                if row[y] as u64 <= threshold_units {
                    adj[i].insert(j);
                    adj[j].insert(i);
                }
            }
        }
        ThresholdGraph { adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &FixedBitSet {
        &self.adj[v]
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = FixedBitSet::with_capacity(n);
        let mut out = Vec::new();
        for s in 0..n {
            if seen.contains(s) {
                continue;
            }
            seen.insert(s);
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for v in self.adj[u].ones() {
                    if !seen.contains(v) {
                        seen.insert(v);
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    fn pivot(&self, p: &FixedBitSet, x: &FixedBitSet) -> Option<usize> {
        p.ones()
            .chain(x.ones())
            .max_by_key(|&u| (self.adj[u].intersection(p).count(), std::cmp::Reverse(u)))
    }

    /// All maximal cliques, each sorted, in lexicographic order.
    pub fn maximal_cliques(&self, budget: &mut Budget) -> Result<Vec<Vec<usize>>> {
        let n = self.len();
        let mut out = Vec::new();
        let mut p = FixedBitSet::with_capacity(n);
        p.insert_range(..);
        let x = FixedBitSet::with_capacity(n);
        let mut r = Vec::new();
        self.bk_all(&mut r, p, x, &mut out, budget)?;
        for c in &mut out {
            c.sort_unstable();
        }
        out.sort();
        Ok(out)
    }

    fn bk_all(
        &self,
        r: &mut Vec<usize>,
        mut p: FixedBitSet,
        mut x: FixedBitSet,
        out: &mut Vec<Vec<usize>>,
        budget: &mut Budget,
    ) -> Result<()> {
        budget.tick()?;
        if p.is_clear() {
            if x.is_clear() && !r.is_empty() {
                out.push(r.clone());
            }
            return Ok(());
        }
        let u = self.pivot(&p, &x).expect("p is nonempty");
        let branch: Vec<usize> = p.difference(&self.adj[u]).collect();
        for v in branch {
            let np = intersect(&p, &self.adj[v]);
            let nx = intersect(&x, &self.adj[v]);
            r.push(v);
            self.bk_all(r, np, nx, out, budget)?;
            r.pop();
            p.set(v, false);
            x.insert(v);
        }
        Ok(())
    }

    /// Searches for a clique that no set of `sets` contains. Returns one
    /// such clique (sorted) or `None` when every clique is covered.
    pub fn find_uncontained_clique(
        &self,
        sets: &[FixedBitSet],
        budget: &mut Budget,
    ) -> Result<Option<Vec<usize>>> {
        let n = self.len();
        if n == 0 {
            return Ok(None);
        }
        if sets.is_empty() {
            return Ok(Some(vec![0]));
        }
        let mut p = FixedBitSet::with_capacity(n);
        p.insert_range(..);
        let x = FixedBitSet::with_capacity(n);
        let cands: Vec<usize> = (0..sets.len()).collect();
        let mut r = Vec::new();
        let found = self.bad_search(&mut r, p, x, &cands, sets, budget)?;
        Ok(found.map(|mut c| {
            c.sort_unstable();
            c
        }))
    }

    fn bad_search(
        &self,
        r: &mut Vec<usize>,
        mut p: FixedBitSet,
        mut x: FixedBitSet,
        cands: &[usize],
        sets: &[FixedBitSet],
        budget: &mut Budget,
    ) -> Result<Option<Vec<usize>>> {
        budget.tick()?;
        if cands.is_empty() {
            return Ok(Some(r.clone()));
        }
        if p.is_clear() || cands.iter().any(|&c| p.is_subset(&sets[c])) {
            return Ok(None);
        }
        let u = self.pivot(&p, &x).expect("p is nonempty");
        let branch: Vec<usize> = p.difference(&self.adj[u]).collect();
        for v in branch {
            let next: Vec<usize> = cands
                .iter()
                .copied()
                .filter(|&c| sets[c].contains(v))
                .collect();
            let np = intersect(&p, &self.adj[v]);
            let nx = intersect(&x, &self.adj[v]);
            r.push(v);
            let found = self.bad_search(r, np, nx, &next, sets, budget)?;
            r.pop();
            if found.is_some() {
                return Ok(found);
            }
            p.set(v, false);
            x.insert(v);
        }
        Ok(None)
    }
}

fn intersect(a: &FixedBitSet, b: &FixedBitSet) -> FixedBitSet {
    let mut out = a.clone();
    out.intersect_with(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_threshold_cliques_are_intervals() {
        let p = FiniteMetricSpace::path(6);
        let pts: Vec<usize> = (0..6).collect();
        let g = ThresholdGraph::new(&p, &pts, 2);
        let cl = g.maximal_cliques(&mut Budget::unlimited("test")).unwrap();
        assert_eq!(
            cl,
            vec![vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 4], vec![3, 4, 5]]
        );
    }

    #[test]
    fn isolated_points_are_singleton_cliques() {
        let p = FiniteMetricSpace::path(5);
        let pts = vec![0, 2, 4];
        let g = ThresholdGraph::new(&p, &pts, 1);
        let cl = g.maximal_cliques(&mut Budget::unlimited("test")).unwrap();
        assert_eq!(cl, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(g.components().len(), 3);
    }

    #[test]
    fn uncontained_clique_search() {
        let p = FiniteMetricSpace::path(10);
        let pts: Vec<usize> = (0..10).collect();
        let sets = vec![
            crate::metric::PointSet::range(0..6).to_bits(10),
            crate::metric::PointSet::range(3..10).to_bits(10),
        ];
        let g3 = ThresholdGraph::new(&p, &pts, 3);
        assert!(g3
            .find_uncontained_clique(&sets, &mut Budget::unlimited("t"))
            .unwrap()
            .is_none());
        let g4 = ThresholdGraph::new(&p, &pts, 4);
        let bad = g4
            .find_uncontained_clique(&sets, &mut Budget::unlimited("t"))
            .unwrap()
            .unwrap();
        assert!(p.diam_units(&bad) <= 4);
        assert!(!bad.iter().all(|&x| x < 6) && !bad.iter().all(|&x| x >= 3));
    }

    #[test]
    fn budget_is_enforced() {
        let g = FiniteMetricSpace::grid(&[4, 4]);
        let pts: Vec<usize> = (0..16).collect();
        let t = ThresholdGraph::new(&g, &pts, 2);
        let err = t
            .maximal_cliques(&mut Budget::new("cliques", 3))
            .unwrap_err();
        assert!(matches!(err, Error::BudgetExhausted { .. }));
    }
}
