//! Slow exhaustive reference for the exact solver, for cross-checking on
//! tiny windows.

use crate::metric::{FiniteMetricSpace, PointSet};

/// Largest window the reference accepts.
pub const REFERENCE_MAX_POINTS: usize = 16;

/// Maximal subsets of `pts` with diameter `<= lambda`, found by scanning
/// every subset.
fn maximal_small_sets(space: &FiniteMetricSpace, pts: &[usize], lambda: u64) -> Vec<u32> {
    let n = pts.len();
    let small: Vec<bool> = (0..1u32 << n)
        .map(|mask| {
            let members: Vec<usize> = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| pts[i])
                .collect();
            space.diam_units(&members) as u64 <= lambda
        })
        .collect();
    (0..1u32 << n)
        .filter(|&mask| mask != 0 && small[mask as usize])
        .filter(|&mask| (0..n).all(|i| mask >> i & 1 == 1 || !small[(mask | 1 << i) as usize]))
        .collect()
}

/// Minimal `ad` (multiplicity minus one) over covers of the window by sets
/// of diameter `<= d` with Lebesgue number `>= lambda`: every assignment
/// of the maximal `lambda`-small sets to groups is tried. `None` if the
/// window is too large or no such cover exists.
pub fn naive_ad(
    space: &FiniteMetricSpace,
    window: &PointSet,
    lambda: u64,
    d: u64,
) -> Option<usize> {
    let pts = window.members();
    if pts.len() > REFERENCE_MAX_POINTS {
        return None;
    }
    if pts.is_empty() {
        return Some(0);
    }
    let cliques = maximal_small_sets(space, pts, lambda);
    let diam = |mask: u32| -> u64 {
        let members: Vec<usize> = (0..pts.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| pts[i])
            .collect();
        space.diam_units(&members) as u64
    };
    if cliques.iter().any(|&c| diam(c) > d) {
        return None;
    }
    let mut best = usize::MAX;
    let mut groups: Vec<u32> = Vec::new();
    search(&cliques, 0, &mut groups, &diam, d, pts.len(), &mut best);
    Some(best - 1)
}

fn incidence(groups: &[u32], n: usize) -> usize {
    (0..n)
        .map(|i| groups.iter().filter(|&&g| g >> i & 1 == 1).count())
        .max()
        .unwrap_or(0)
}

fn search(
    cliques: &[u32],
    next: usize,
    groups: &mut Vec<u32>,
    diam: &dyn Fn(u32) -> u64,
    d: u64,
    n: usize,
    best: &mut usize,
) {
    // incidence only grows along a branch
    if incidence(groups, n) >= *best {
        return;
    }
    if next == cliques.len() {
        *best = incidence(groups, n);
        return;
    }
    let c = cliques[next];
    for g in 0..groups.len() {
        let merged = groups[g] | c;
        if diam(merged) <= d {
            let old = groups[g];
            groups[g] = merged;
            search(cliques, next + 1, groups, diam, d, n, best);
            groups[g] = old;
        }
    }
    groups.push(c);
    search(cliques, next + 1, groups, diam, d, n, best);
    groups.pop();
}
