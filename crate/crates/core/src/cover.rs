//! Covers of finite windows and their exact statistics: multiplicity,
//! `k`-multiplicity, Lebesgue number and mesh.
//!
//! Statistics are always evaluated on the cover's window; cover sets may
//! reach outside it.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::clique::{Budget, ThresholdGraph};
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, PointSet, Rational};

/// Default node budget for Lebesgue clique searches.
pub const DEFAULT_CLIQUE_BUDGET: u64 = 20_000_000;

/// Lebesgue number of a cover. `AllSubsets` means some cover set contains
/// the whole window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lebesgue {
    Finite(u64),
    AllSubsets,
}

impl Lebesgue {
    /// Numeric value for arithmetic claims. `AllSubsets` is worth the window
    /// diameter, since every subset of the window has at most that diameter.
    pub fn value(&self, window_diam: u64) -> u64 {
        match *self {
            Lebesgue::Finite(v) => v,
            Lebesgue::AllSubsets => window_diam,
        }
    }

    pub fn at_least(&self, lambda: u64) -> bool {
        match *self {
            Lebesgue::Finite(v) => v >= lambda,
            Lebesgue::AllSubsets => true,
        }
    }
}

impl fmt::Display for Lebesgue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lebesgue::Finite(v) => write!(f, "{v}"),
            Lebesgue::AllSubsets => f.write_str("all-subsets"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverStats {
    pub multiplicity: usize,
    /// keyed by the rendered radius (`"1"`, `"3/2"`)
    pub k_multiplicity: BTreeMap<String, usize>,
    pub lebesgue: Lebesgue,
    pub mesh: Rational,
}

#[derive(Clone, Debug)]
pub struct Cover {
    pub space: Arc<FiniteMetricSpace>,
    pub sets: Vec<PointSet>,
    pub window: PointSet,
}

impl Cover {
    pub fn new(space: Arc<FiniteMetricSpace>, sets: Vec<PointSet>, window: PointSet) -> Self {
        Cover {
            space,
            sets,
            window,
        }
    }

    /// Cover whose window is the whole space.
    pub fn of_space(space: Arc<FiniteMetricSpace>, sets: Vec<PointSet>) -> Self {
        let window = space.all_points();
        Cover {
            space,
            sets,
            window,
        }
    }

    /// Errors with a witness if some window point lies in no set.
    pub fn check_covers(&self) -> Result<()> {
        let n = self.space.len();
        let mut union = FixedBitSet::with_capacity(n);
        for s in &self.sets {
            for p in s.iter() {
                union.insert(p);
            }
        }
        match self.window.iter().find(|&p| !union.contains(p)) {
            Some(point) => Err(Error::NotACover { point }),
            None => Ok(()),
        }
    }

    pub fn window_diam(&self) -> u64 {
        self.space.diam_units(self.window.members()) as u64
    }

    /// Incidence count of every window point, in window order.
    pub fn incidences(&self) -> Vec<usize> {
        let bits: Vec<FixedBitSet> = self
            .sets
            .iter()
            .map(|s| s.to_bits(self.space.len()))
            .collect();
        self.window
            .iter()
            .map(|p| bits.iter().filter(|b| b.contains(p)).count())
            .collect()
    }

    pub fn multiplicity(&self) -> Result<usize> {
        self.check_covers()?;
        Ok(self.incidences().into_iter().max().unwrap_or(0))
    }

    /// Largest number of sets met by a closed `k`-ball around a window point.
    pub fn k_multiplicity(&self, k: Rational) -> Result<usize> {
        self.check_covers()?;
        let r = self.space.radius_units(k);
        let best = self
            .window
            .iter()
            .map(|x| {
                let row = self.space.row(x);
                self.sets
                    .iter()
                    .filter(|s| s.iter().any(|y| row[y] as u64 <= r))
                    .count()
            })
            .max()
            .unwrap_or(0);
        Ok(best)
    }

    /// Largest diameter of a nonempty cover set.
    pub fn mesh(&self) -> Rational {
        let u = self
            .sets
            .iter()
            .map(|s| self.space.diam_units(s.members()))
            .max()
            .unwrap_or(0);
        self.space.units_to_rational(u as u64)
    }

    pub fn mesh_units(&self) -> u64 {
        self.sets
            .iter()
            .map(|s| self.space.diam_units(s.members()) as u64)
            .max()
            .unwrap_or(0)
    }

    /// Cover sets intersected with the window (indices preserved).
    pub fn restricted_to_window(&self) -> Cover {
        Cover {
            space: self.space.clone(),
            sets: self
                .sets
                .iter()
                .map(|s| s.intersection(&self.window))
                .collect(),
            window: self.window.clone(),
        }
    }

    fn local_sets(&self) -> Vec<FixedBitSet> {
        let w = self.window.members();
        let m = w.len();
        self.sets
            .iter()
            .map(|s| {
                let mut b = FixedBitSet::with_capacity(m);
                for (i, &p) in w.iter().enumerate() {
                    if s.contains(p) {
                        b.insert(i);
                    }
                }
                b
            })
            .filter(|b| !b.is_clear())
            .collect()
    }

    fn contains_window(&self) -> bool {
        self.sets.iter().any(|s| self.window.is_subset(s))
    }

    fn distinct_window_distances(&self) -> Vec<u64> {
        let w = self.window.members();
        let mut ds: Vec<u64> = Vec::new();
        for (i, &x) in w.iter().enumerate() {
            let row = self.space.row(x);
            ds.extend(w[i + 1..].iter().map(|&y| row[y] as u64));
        }
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    /// Exact Lebesgue number on the window via clique containment at every
    /// distinct threshold.
    pub fn lebesgue_number(&self) -> Result<Lebesgue> {
        self.lebesgue_number_with_budget(&mut Budget::new(
            "lebesgue clique search",
            DEFAULT_CLIQUE_BUDGET,
        ))
    }

    pub fn lebesgue_number_with_budget(&self, budget: &mut Budget) -> Result<Lebesgue> {
        if !self.space.is_integral() {
            return Err(Error::CliqueMethodNeedsIntegers {
                scale: self.space.scale(),
            });
        }
        self.check_covers()?;
        if self.contains_window() {
            return Ok(Lebesgue::AllSubsets);
        }
        let local = self.local_sets();
        let w = self.window.members();
        let mut passes = |t: u64| -> Result<bool> {
            let g = ThresholdGraph::new(&self.space, w, t);
            Ok(g.find_uncontained_clique(&local, budget)?.is_none())
        };
        let ds = self.distinct_window_distances();
        let first_fail = first_failure(&ds, &mut passes)?;
        match first_fail {
            Some(d) => Ok(Lebesgue::Finite(d - 1)),
            None => Ok(Lebesgue::AllSubsets),
        }
    }

    /// Fast sufficient bound: the largest `t` such that every closed
    /// `t`-ball around a window point (intersected with the window) lies in
    /// one cover set. Never exceeds the exact Lebesgue number.
    pub fn lebesgue_lower_bound_balls(&self) -> Result<Lebesgue> {
        if !self.space.is_integral() {
            return Err(Error::CliqueMethodNeedsIntegers {
                scale: self.space.scale(),
            });
        }
        self.check_covers()?;
        if self.contains_window() {
            return Ok(Lebesgue::AllSubsets);
        }
        let local = self.local_sets();
        let w = self.window.members();
        let mut passes = |t: u64| -> Result<bool> {
            Ok(w.iter().all(|&x| {
                let row = self.space.row(x);
                let mut ball = FixedBitSet::with_capacity(w.len());
                for (i, &y) in w.iter().enumerate() {
                    if row[y] as u64 <= t {
                        ball.insert(i);
                    }
                }
                local.iter().any(|s| ball.is_subset(s))
            }))
        };
        let ds = self.distinct_window_distances();
        match first_failure(&ds, &mut passes)? {
            Some(d) => Ok(Lebesgue::Finite(d - 1)),
            None => Ok(Lebesgue::AllSubsets),
        }
    }

    /// Multiplicity, Lebesgue number, mesh and the requested
    /// `k`-multiplicities (`k = 0` is always included).
    pub fn validate(&self, ks: &[Rational]) -> Result<CoverStats> {
        let multiplicity = self.multiplicity()?;
        let lebesgue = self.lebesgue_number()?;
        let mut k_multiplicity = BTreeMap::new();
        k_multiplicity.insert("0".to_string(), multiplicity);
        for &k in ks {
            k_multiplicity.insert(k.to_string(), self.k_multiplicity(k)?);
        }
        Ok(CoverStats {
            multiplicity,
            k_multiplicity,
            lebesgue,
            mesh: self.mesh(),
        })
    }
}

/// Smallest threshold in the sorted list `ds` for which `passes` is false,
/// assuming monotonicity (passing at `t` implies passing below `t`).
/// Gallops from the bottom, then bisects.
fn first_failure(ds: &[u64], passes: &mut impl FnMut(u64) -> Result<bool>) -> Result<Option<u64>> {
    let mut lo = 0usize; // every index < lo is known to pass
    let mut step = 1usize;
    let mut hi = ds.len(); // index hi is known to fail (or len)
    loop {
        let probe = lo + step - 1;
        if probe >= hi {
            break;
        }
        if passes(ds[probe])? {
            lo = probe + 1;
            step *= 2;
        } else {
            hi = probe;
            break;
        }
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if passes(ds[mid])? {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Ok(ds.get(lo).copied())
}
