//! Isometric actions of group windows on finite metric spaces.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::cayley::CayleyWindow;
use super::gog::BassSerreTree;
use super::{Element, GroupModel};
use crate::metric::{format_coords, FiniteMetricSpace, PointSet, Rational};

/// `g . x`, or `None` when the image falls outside the space.
pub type ApplyFn = Arc<dyn Fn(&Element, usize) -> Option<usize> + Send + Sync>;

#[derive(Clone)]
pub struct ActionWindow {
    pub name: String,
    pub gamma: CayleyWindow,
    pub space: Arc<FiniteMetricSpace>,
    pub basepoint: usize,
    apply: ApplyFn,
}

impl fmt::Debug for ActionWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ActionWindow")
            .field("name", &self.name)
            .field("gamma", &self.gamma.len())
            .field("space", &self.space.len())
            .field("basepoint", &self.basepoint)
            .finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ActionAudit {
    pub isometry_pairs: usize,
    pub isometry_violations: usize,
    pub identity_ok: bool,
    pub compatibility_checked: usize,
    pub compatibility_violations: usize,
    pub pass: bool,
}

impl ActionWindow {
    pub fn new(
        name: &str,
        gamma: CayleyWindow,
        space: Arc<FiniteMetricSpace>,
        basepoint: usize,
        apply: ApplyFn,
    ) -> Self {
        ActionWindow {
            name: name.to_string(),
            gamma,
            space,
            basepoint,
            apply,
        }
    }

    pub fn group(&self) -> &dyn GroupModel {
        self.gamma.group.as_ref()
    }

    pub fn apply(&self, g: &Element, x: usize) -> Option<usize> {
        (self.apply)(g, x)
    }

    /// The orbit map `gamma_i -> gamma_i . x0` over the window.
    pub fn projection(&self) -> Vec<Option<usize>> {
        self.gamma
            .elements
            .iter()
            .map(|g| self.apply(g, self.basepoint))
            .collect()
    }

    /// Largest displacement of the basepoint by a generator; `None` if some
    /// generator moves it out of the space.
    pub fn mu(&self) -> Option<Rational> {
        let g = self.group();
        let id = g.identity();
        (0..g.generators().len())
            .map(|s| {
                self.apply(&g.multiply(&id, s), self.basepoint)
                    .map(|y| self.space.dist(y, self.basepoint))
            })
            .try_fold(Rational::from_integer(0), |m, d| d.map(|d| m.max(d)))
    }

    /// Exhaustive checks: generators act isometrically where defined, the
    /// identity acts trivially, and `(g s) . x = g . (s . x)` on the window.
    pub fn audit(&self) -> ActionAudit {
        let g = self.group();
        let n = self.space.len();
        let id = g.identity();
        let gens: Vec<Element> = (0..g.generators().len())
            .map(|s| g.multiply(&id, s))
            .collect();
        let identity_ok = (0..n).all(|x| self.apply(&id, x) == Some(x));
        let mut pairs = 0;
        let mut bad = 0;
        for s in &gens {
            let image: Vec<Option<usize>> = (0..n).map(|x| self.apply(s, x)).collect();
            for x in 0..n {
                let Some(sx) = image[x] else { continue };
                for y in x + 1..n {
                    let Some(sy) = image[y] else { continue };
                    pairs += 1;
                    if self.space.units(sx, sy) != self.space.units(x, y) {
                        bad += 1;
                    }
                }
            }
        }
        let mut checked = 0;
        let mut compat_bad = 0;
        for h in &self.gamma.elements {
            for (si, s) in gens.iter().enumerate() {
                let hs = g.multiply(h, si);
                for x in 0..n {
                    let Some(sx) = self.apply(s, x) else { continue };
                    let (Some(a), Some(b)) = (self.apply(&hs, x), self.apply(h, sx)) else {
                        continue;
                    };
                    checked += 1;
                    if a != b {
                        compat_bad += 1;
                    }
                }
            }
        }
        ActionAudit {
            isometry_pairs: pairs,
            isometry_violations: bad,
            identity_ok,
            compatibility_checked: checked,
            compatibility_violations: compat_bad,
            pass: bad == 0 && identity_ok && compat_bad == 0,
        }
    }
}

/// `W_R(x0)`: window elements moving the basepoint at most `r`.
pub fn stabilizer_window(act: &ActionWindow, r: Rational) -> PointSet {
    PointSet::new(
        act.projection()
            .iter()
            .enumerate()
            .filter(|(_, y)| y.is_some_and(|y| act.space.dist(y, act.basepoint) <= r))
            .map(|(i, _)| i),
    )
}

/// `Z^2` (window `gamma`) acting on the segment `[-half, half]` of `Z` by
/// translation along the first coordinate; basepoint 0.
pub fn action_on_line(gamma: CayleyWindow, half: usize) -> ActionWindow {
    let len = 2 * half + 1;
    let labels = (0..len)
        .map(|i| format_coords(&[i as i64 - half as i64]))
        .collect();
    let space = Arc::new(
        FiniteMetricSpace::path(len)
            .with_labels(labels)
            .with_basepoint(half),
    );
    let apply: ApplyFn = Arc::new(move |g: &Element, x: usize| {
        let y = x as i64 + g[0];
        (0..len as i64).contains(&y).then_some(y as usize)
    });
    ActionWindow::new("z2-on-line", gamma, space, half, apply)
}

/// The fundamental group acting on a Bass–Serre tree window by left
/// multiplication of cosets.
pub fn action_on_tree(tree: Arc<BassSerreTree>, gamma: CayleyWindow) -> ActionWindow {
    let space = tree.space.clone();
    let apply: ApplyFn = Arc::new(move |g: &Element, v: usize| tree.apply(g, v));
    ActionWindow::new("bass-serre", gamma, space, 0, apply)
}

#[cfg(test)]
mod tests {
    use super::super::cayley::cayley_window;
    use super::super::gog::{bass_serre_tree_window, GraphOfGroups};
    use super::super::groups::{Amalgam, Zn};
    use super::*;

    #[test]
    fn line_action_and_strip_stabilizer() {
        let gamma = cayley_window(&(Arc::new(Zn { n: 2 }) as _), 10, None, 10_000).unwrap();
        let act = action_on_line(gamma, 12);
        assert!(act.audit().pass);
        assert_eq!(act.mu(), Some(Rational::from_integer(1)));
        let w = stabilizer_window(&act, Rational::from_integer(4));
        let want: Vec<usize> = (0..act.gamma.len())
            .filter(|&i| {
                let g = &act.gamma.elements[i];
                g[0].abs() <= 4 && g[0].abs() + g[1].abs() <= 10
            })
            .collect();
        assert_eq!(w.members(), &want[..]);
    }

    #[test]
    fn tree_action_audit_and_vertex_stabilizer() {
        let gog = GraphOfGroups::Amalgam(Amalgam::free_product(2, 3).unwrap());
        let big = cayley_window(&gog.group(), 8, None, 100_000).unwrap();
        let tree = Arc::new(bass_serre_tree_window(&gog, &big, 4).unwrap());
        let gamma = cayley_window(&gog.group(), 3, None, 100_000).unwrap();
        let act = action_on_tree(tree, gamma);
        let audit = act.audit();
        assert!(audit.pass && audit.isometry_pairs > 0, "{audit:?}");
        let s = stabilizer_window(&act, Rational::from_integer(0));
        let labels: Vec<String> = s.iter().map(|i| act.gamma.space.label(i)).collect();
        assert_eq!(labels, vec!["e", "a"]);
    }
}
