//! Word metrics relative to peripheral subgroups and the ball
//! decomposition `B(n) = U_l B(n-1) H_l  u  U_s B(n-1) s`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::cayley::CayleyWindow;
use super::groups::Free;
use super::{Element, SharedGroup};
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, PointSet, Rational, Separation};

/// A subgroup given by an exact membership predicate on normal forms.
#[derive(Clone)]
pub struct Subgroup {
    pub name: String,
    contains: Arc<dyn Fn(&Element) -> bool + Send + Sync>,
}

impl Subgroup {
    pub fn new(name: &str, contains: Arc<dyn Fn(&Element) -> bool + Send + Sync>) -> Self {
        Subgroup {
            name: name.to_string(),
            contains,
        }
    }

    pub fn contains(&self, g: &Element) -> bool {
        (self.contains)(g)
    }
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subgroup({})", self.name)
    }
}

#[derive(Clone, Debug)]
pub struct RelHypData {
    pub name: String,
    pub group: SharedGroup,
    pub subgroups: Vec<Subgroup>,
}

impl RelHypData {
    /// `relhyp:fK|x,y,..`: a free group relative to cyclic subgroups
    /// generated by basis letters (`a` = first letter, `b` = second, ..).
    pub fn parse(name: &str) -> Result<Self> {
        let rest = name
            .trim()
            .strip_prefix("relhyp:")
            .ok_or_else(|| Error::invalid("relhyp names start with 'relhyp:'"))?;
        let (group, subs) = rest
            .split_once('|')
            .ok_or_else(|| Error::invalid("relhyp needs 'group|letters'"))?;
        let k = match group
            .strip_prefix("fk:")
            .or_else(|| group.strip_prefix('f'))
        {
            Some(k) => k
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad free rank in {group:?}")))?,
            None => {
                return Err(Error::invalid(
                    "relhyp supports free groups only (f2, fk:N)",
                ))
            }
        };
        if k == 0 {
            return Err(Error::invalid("free rank must be positive"));
        }
        let mut subgroups = Vec::new();
        for letter in subs.split(',') {
            let c = letter.trim();
            let idx = match c.as_bytes() {
                [b] if b.is_ascii_lowercase() && ((b - b'a') as usize) < k => (b - b'a') as i64 + 1,
                _ => {
                    return Err(Error::invalid(format!(
                        "subgroup generator {c:?} is not a basis letter"
                    )))
                }
            };
            subgroups.push(Subgroup::new(
                &format!("<{c}>"),
                Arc::new(move |g: &Element| g.iter().all(|&x| x.abs() == idx)),
            ));
        }
        Ok(RelHypData {
            name: name.trim().to_string(),
            group: Arc::new(Free { k }),
            subgroups,
        })
    }

    fn in_any(&self, g: &Element) -> bool {
        self.subgroups.iter().any(|h| h.contains(g))
    }
}

/// Graph metric on the window with an edge for every generator and for
/// every pair `(g, g h)` with `h` a nontrivial peripheral element. Window
/// distances only use paths inside the window, so they bound the global
/// relative distances from above.
pub fn relhyp_metric(rh: &RelHypData, window: &CayleyWindow) -> Result<Arc<FiniteMetricSpace>> {
    let g = rh.group.as_ref();
    let n = window.len();
    let mut edges = Vec::new();
    for (i, x) in window.elements.iter().enumerate() {
        for s in 0..g.generators().len() {
            if let Some(j) = window.lookup(&g.multiply(x, s)) {
                if i < j {
                    edges.push((i, j));
                }
            }
        }
    }
    let inverses: Vec<Element> = window.elements.iter().map(|x| g.inverse(x)).collect();
    for i in 0..n {
        for j in i + 1..n {
            if rh.in_any(&g.mul(&inverses[i], &window.elements[j])) {
                edges.push((i, j));
            }
        }
    }
    let labels = window.elements.iter().map(|x| g.label(x)).collect();
    Ok(Arc::new(
        FiniteMetricSpace::from_graph(n, &edges)?
            .with_labels(labels)
            .with_basepoint(0),
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct CosetReport {
    pub subgroup: String,
    /// distinct cosets `gamma H` met by `B(n-1) H`
    pub pieces: usize,
    pub disjoint: bool,
    pub y_size: usize,
    /// `d_S` separation of the trimmed cosets
    pub separation: Separation,
    pub separated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub n: u64,
    pub r: u64,
    pub ball: usize,
    pub union: usize,
    pub covers_exactly: bool,
    pub cosets: Vec<CosetReport>,
    pub pass: bool,
}

/// Materializes `B(n)` on the window, checks that it equals the union of
/// the translates `B(n-1) H_l` and `B(n-1) s`, tags `B(n-1) H_l` by coset,
/// and measures the `d_S` separation of the cosets after removing
/// `Y_r = B(n-1) . {h in H_l : |h|_S <= r}`.
pub fn relhyp_ball_decompose(
    rh: &RelHypData,
    window: &CayleyWindow,
    n: u64,
    r: u64,
) -> Result<Decomposition> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if window.radius < r + 1 || !window.exact {
        return Err(Error::WindowTooSmall {
            detail: format!("need an exact d_S window of radius >= {}", r + 1),
        });
    }
    let g = rh.group.as_ref();
    let rel = relhyp_metric(rh, window)?;
    let ball_of =
        |k: u64| PointSet::new((0..window.len()).filter(|&i| rel.units(0, i) as u64 <= k));
    let ball = ball_of(n);
    let prev = ball_of(n - 1);
    let prev_inv: Vec<Element> = prev
        .iter()
        .map(|i| g.inverse(&window.elements[i]))
        .collect();

    let mut union = Vec::new();
    for s in 0..g.generators().len() {
        union.extend(
            prev.iter()
                .filter_map(|i| window.lookup(&g.multiply(&window.elements[i], s))),
        );
    }
    let mut cosets = Vec::new();
    for h in &rh.subgroups {
        // y lies in B(n-1) H iff x^-1 y in H for some x in B(n-1)
        let members: Vec<usize> = (0..window.len())
            .filter(|&y| {
                prev_inv
                    .iter()
                    .any(|xi| h.contains(&g.mul(xi, &window.elements[y])))
            })
            .collect();
        union.extend(members.iter().copied());
        // tag each member by the least window index of its coset
        let mut pieces: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &y in &members {
            let yi = g.inverse(&window.elements[y]);
            let rep = members
                .iter()
                .copied()
                .find(|&z| h.contains(&g.mul(&yi, &window.elements[z])))
                .expect("y is in its own coset");
            pieces.entry(rep).or_default().push(y);
        }
        let reps: Vec<usize> = pieces.keys().copied().collect();
        let mut disjoint = true;
        for (a, &p) in reps.iter().enumerate() {
            let pi = g.inverse(&window.elements[p]);
            for &q in &reps[a + 1..] {
                disjoint &= !h.contains(&g.mul(&pi, &window.elements[q]));
            }
        }
        let short: Vec<Element> = (0..window.len())
            .filter(|&i| window.lengths[i] as u64 <= r && h.contains(&window.elements[i]))
            .map(|i| window.elements[i].clone())
            .collect();
        let y = PointSet::new(
            prev.iter()
                .flat_map(|x| {
                    short
                        .iter()
                        .filter_map(move |s| window.lookup(&g.mul(&window.elements[x], s)))
                })
                .collect::<Vec<_>>(),
        );
        let trimmed: Vec<PointSet> = pieces
            .values()
            .map(|p| PointSet::new(p.iter().copied()).difference(&y))
            .filter(|p| !p.is_empty())
            .collect();
        let separation = window.space.family_separation(&trimmed);
        cosets.push(CosetReport {
            subgroup: h.name.clone(),
            pieces: pieces.len(),
            disjoint,
            y_size: y.len(),
            separation,
            separated: separation.exceeds(Rational::from_integer(r as i64)),
        });
    }
    let union = PointSet::new(union);
    let covers_exactly = union == ball;
    let pass = covers_exactly && cosets.iter().all(|c| c.disjoint && c.separated);
    Ok(Decomposition {
        n,
        r,
        ball: ball.len(),
        union: union.len(),
        covers_exactly,
        cosets,
        pass,
    })
}
