//! Windowed asymptotic dimension values: exact solutions on small
//! instances, certified (lower, upper) sandwiches on larger ones, sampled
//! curves and their growth comparison.

mod construct;
mod curve;
mod exact;
mod reference;

pub use construct::{
    annulus_cover, brick_cover, brick_cover_with, clique_cover, tree_cover, BrickSpec,
};
pub use curve::{
    dim_curve, dominates, find_min_k, CurveSample, DimCurve, Domination, Subject, WindowPolicy,
};
pub use reference::{naive_ad, REFERENCE_MAX_POINTS};

use std::sync::Arc;

use crate::clique::Budget;
use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, PointSet};

/// Default work budget for the branch-and-bound search, in clique-group
/// inspections.
pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;

#[derive(Clone, Debug)]
pub struct ExactAd {
    /// minimum multiplicity minus one
    pub ad: usize,
    pub witness: Cover,
}

/// Exact minimum, over covers of `window` by sets of diameter `<= d` with
/// Lebesgue number `>= lambda`, of the multiplicity, minus one.
pub fn ad_exact(
    space: &Arc<FiniteMetricSpace>,
    lambda: u64,
    d: u64,
    window: &PointSet,
) -> Result<ExactAd> {
    ad_exact_with_budget(space, lambda, d, window, DEFAULT_SEARCH_BUDGET)
}

pub fn ad_exact_with_budget(
    space: &Arc<FiniteMetricSpace>,
    lambda: u64,
    d: u64,
    window: &PointSet,
    budget: u64,
) -> Result<ExactAd> {
    let mut budget = Budget::new("branch-and-bound", budget);
    let inst = exact::Instance::new(space, window, lambda, d, &mut budget)?;
    let mut m = 1;
    loop {
        if let Some(sets) = inst.feasible(m, &mut budget)? {
            return Ok(ExactAd {
                ad: m.saturating_sub(1),
                witness: Cover::new(space.clone(), sets, window.clone()),
            });
        }
        m += 1;
    }
}

/// Certified sandwich `lower <= ad <= upper` with the witness for `upper`.
#[derive(Clone, Debug)]
pub struct AdBounds {
    pub lower: usize,
    pub upper: usize,
    pub lower_method: String,
    pub upper_method: String,
    pub witness: Cover,
}

impl AdBounds {
    pub fn method(&self) -> String {
        if self.lower_method == self.upper_method {
            self.lower_method.clone()
        } else {
            format!("{}/{}", self.lower_method, self.upper_method)
        }
    }
}

/// Multiplicity of `cover` if it is an admissible witness: covers the
/// window, window-restricted mesh `<= d`, Lebesgue number `>= lambda`.
pub fn witness_multiplicity(cover: &Cover, lambda: u64, d: u64) -> Option<usize> {
    let restricted = cover.restricted_to_window();
    if restricted.mesh_units() > d * cover.space.scale() as u64 {
        return None;
    }
    let m = restricted.multiplicity().ok()?;
    let l = restricted.lebesgue_number().ok()?;
    l.at_least(lambda).then_some(m)
}

/// Sandwich for the windowed value. The upper bound is the best admissible
/// witness among the clique cover, the annulus cover (when the space has a
/// basepoint), `extra` and any cover found by search; the lower bound comes
/// from the component test, search refutations on the window, and
/// refutations on sub-windows (a cover of the window restricts to one of
/// any sub-window).
pub fn ad_bounds(
    space: &Arc<FiniteMetricSpace>,
    lambda: u64,
    d: u64,
    window: &PointSet,
    extra: Vec<(String, Cover)>,
    search_budget: u64,
) -> Result<AdBounds> {
    if window.is_empty() || (space.diam_units(window.members()) as u64) <= d {
        return Ok(AdBounds {
            lower: 0,
            upper: 0,
            lower_method: "single-set".into(),
            upper_method: "single-set".into(),
            witness: Cover::new(space.clone(), vec![window.clone()], window.clone()),
        });
    }
    let mut budget = Budget::new("branch-and-bound", search_budget);
    let inst = exact::Instance::new(space, window, lambda, d, &mut budget)?;
    if let Some(sets) = inst.single_multiplicity_cover() {
        return Ok(AdBounds {
            lower: 0,
            upper: 0,
            lower_method: "components".into(),
            upper_method: "components".into(),
            witness: Cover::new(space.clone(), sets, window.clone()),
        });
    }
    let mut candidates = vec![(
        "clique-cover".to_string(),
        Cover::new(space.clone(), inst.clique_cover(), window.clone()),
    )];
    if space.basepoint().is_some() {
        if let Ok(c) = annulus_cover(space, lambda, window, None) {
            candidates.push(("annulus".into(), c));
        }
    }
    candidates.extend(extra);
    let (mut best_m, mut upper_method, mut witness) = (usize::MAX, String::new(), None);
    for (name, c) in candidates {
        if let Some(m) = witness_multiplicity(&c, lambda, d) {
            if m < best_m {
                best_m = m;
                upper_method = name;
                witness = Some(c);
            }
        }
    }
    let mut witness = witness.expect("the clique cover is always admissible");
    let mut lower_m = 2;
    let mut lower_method = "components".to_string();
    let mut sub = None;
    while lower_m < best_m {
        match inst.feasible(lower_m, &mut budget) {
            Ok(Some(sets)) => {
                best_m = lower_m;
                upper_method = "exact".into();
                witness = Cover::new(space.clone(), sets, window.clone());
            }
            Ok(None) => {
                lower_m += 1;
                lower_method = "exact".into();
            }
            Err(Error::BudgetExhausted { .. }) => {
                sub = Some(lower_m);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if let Some(m) = sub {
        lower_m = m;
        if let Some(found) =
            subwindow_refutations(space, lambda, d, window, m, best_m, search_budget)?
        {
            lower_m = found;
            lower_method = "subwindow-exact".into();
        } else if lower_method == "exact" {
            lower_method = "exact-partial".into();
        }
    }
    Ok(AdBounds {
        lower: lower_m - 1,
        upper: best_m - 1,
        lower_method,
        upper_method,
        witness,
    })
}

/// Refutes multiplicities `m, m+1, ..` on shrinking balls around the
/// basepoint inside the window; returns the first multiplicity not refuted.
fn subwindow_refutations(
    space: &Arc<FiniteMetricSpace>,
    lambda: u64,
    d: u64,
    window: &PointSet,
    mut m: usize,
    best_m: usize,
    search_budget: u64,
) -> Result<Option<usize>> {
    let Some(base) = space.basepoint() else {
        return Ok(None);
    };
    let row = space.row(base);
    let radius = window.iter().map(|p| row[p]).max().unwrap_or(0);
    let start = m;
    for r in (1..radius).rev() {
        let sub = PointSet::new(window.iter().filter(|&p| row[p] <= r));
        let mut budget = Budget::new("branch-and-bound", search_budget);
        let Ok(inst) = exact::Instance::new(space, &sub, lambda, d, &mut budget) else {
            continue;
        };
        while m < best_m {
            match inst.feasible(m, &mut budget) {
                Ok(None) => m += 1,
                _ => break,
            }
        }
        if m > start || m >= best_m {
            break;
        }
    }
    Ok((m > start).then_some(m))
}
