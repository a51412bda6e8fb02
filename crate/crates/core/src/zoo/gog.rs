//! Amalgams and HNN extensions as graphs of groups: path-length strata,
//! coset separation audits and windows of the Bass–Serre tree.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;

use super::cayley::CayleyWindow;
use super::groups::{Amalgam, Hnn};
use super::{Element, GroupModel, SharedGroup};
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, PointSet, Rational, Separation};

#[derive(Clone, Debug)]
pub enum GraphOfGroups {
    /// two vertex groups `A`, `B` over `C`; based at `A`
    Amalgam(Amalgam),
    /// one vertex group `<a>` with stable letter `t`
    Hnn(Hnn),
}

impl GraphOfGroups {
    pub fn group(&self) -> SharedGroup {
        match self {
            GraphOfGroups::Amalgam(a) => Arc::new(a.clone()),
            GraphOfGroups::Hnn(h) => Arc::new(h.clone()),
        }
    }

    fn model(&self) -> &dyn GroupModel {
        match self {
            GraphOfGroups::Amalgam(a) => a,
            GraphOfGroups::Hnn(h) => h,
        }
    }

    /// Length of the path in the underlying graph traced by the normal
    /// form, starting at the base vertex.
    pub fn path_length(&self, g: &Element) -> usize {
        match self {
            GraphOfGroups::Amalgam(_) => {
                let syl = Amalgam::syllables(g);
                syl.len() - usize::from(syl.first().is_some_and(|s| s.0 == 0))
            }
            GraphOfGroups::Hnn(_) => Hnn::t_letters(g),
        }
    }

    /// Splits `g` as `x * letter * v` with `x` one step shorter, `letter`
    /// an edge letter (empty for amalgams) and `v` in a vertex group.
    pub fn factor(&self, g: &Element) -> Option<(Element, Vec<usize>, Element)> {
        match self {
            GraphOfGroups::Amalgam(_) => {
                let syl = Amalgam::syllables(g);
                let (&last, rest) = syl.split_last()?;
                Some((
                    Amalgam::from_parts(Amalgam::c_power(g), rest),
                    Vec::new(),
                    Amalgam::from_parts(0, &[last]),
                ))
            }
            GraphOfGroups::Hnn(_) => {
                if g.len() < 3 {
                    return None;
                }
                let letter = if g[g.len() - 2] == 1 { 2 } else { 3 };
                Some((Hnn::prefix(g), vec![letter], vec![g[g.len() - 1]]))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Strata {
    /// `strata[j]` holds window indices with path length `j`
    pub strata: Vec<PointSet>,
    /// elements whose factoring was audited
    pub factored: usize,
}

/// Partitions the window by path length up to `j_max` (longer elements
/// are an error) and audits that every element of `K_{j+1}` factors as an
/// element of `K_j` times an edge letter times a vertex-group element.
pub fn stratify_words(gog: &GraphOfGroups, window: &CayleyWindow, j_max: usize) -> Result<Strata> {
    let g = gog.model();
    let mut strata = vec![Vec::new(); j_max + 1];
    for (i, e) in window.elements.iter().enumerate() {
        let j = gog.path_length(e);
        if j > j_max {
            return Err(Error::invalid(format!(
                "element {} has path length {j} > {j_max}",
                g.label(e)
            )));
        }
        strata[j].push(i);
    }
    let mut factored = 0;
    for e in &window.elements {
        let j = gog.path_length(e);
        if j == 0 {
            continue;
        }
        let (x, letter, v) = gog
            .factor(e)
            .ok_or_else(|| Error::NormalForm(format!("{} does not factor", g.label(e))))?;
        let rebuilt = g.mul(&g.mul(&x, &g.eval(&letter)), &v);
        if rebuilt != *e || gog.path_length(&x) + 1 != j {
            return Err(Error::NormalForm(format!(
                "{} factors as {} . {:?} . {} which is not a step down",
                g.label(e),
                g.label(&x),
                letter,
                g.label(&v)
            )));
        }
        factored += 1;
    }
    let strata: Vec<PointSet> = strata.into_iter().map(PointSet::new).collect();
    let total: usize = strata.iter().map(|s| s.len()).sum();
    if total != window.len() {
        return Err(Error::NormalForm(
            "strata do not partition the window".into(),
        ));
    }
    Ok(Strata { strata, factored })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub j: usize,
    pub r: u64,
    /// edge letter and target vertex group, e.g. `"-> B"` or `"t -> <a>"`
    pub edge: String,
    pub cosets: usize,
    pub y_size: usize,
    pub separation: Separation,
    pub separated: bool,
    pub pairs_checked: usize,
    pub coset_identity_ok: bool,
    pub pass: bool,
}

struct EdgeData {
    letter: Element,
    label: String,
    in_target: Box<dyn Fn(&Element) -> bool>,
    in_edge_image: Box<dyn Fn(&Element) -> bool>,
    /// whether `x` may start a coset (normal form of `x * letter` grows)
    admissible: Box<dyn Fn(&Element) -> bool>,
}

fn edge_data(gog: &GraphOfGroups, j: usize) -> EdgeData {
    match gog {
        GraphOfGroups::Amalgam(a) => {
            // strata alternate: K_0 sits in A, odd strata end in B
            let target = if j.is_multiple_of(2) { 1 } else { 0 };
            EdgeData {
                letter: a.identity(),
                label: format!("-> {}", if target == 1 { "B" } else { "A" }),
                in_target: Box::new(move |g| Amalgam::in_factor(g, target)),
                in_edge_image: Box::new(Amalgam::in_edge_group),
                admissible: Box::new(move |g: &Element| {
                    Amalgam::syllables(g).last().is_none_or(|s| s.0 != target)
                }),
            }
        }
        GraphOfGroups::Hnn(h) => {
            let q = h.q;
            let p = h.p;
            EdgeData {
                letter: vec![0, 1, 0],
                label: "t -> <a>".into(),
                in_target: Box::new(Hnn::in_vertex_group),
                in_edge_image: Box::new(move |g| Hnn::in_vertex_group(g) && g[0] % q == 0),
                admissible: Box::new(move |g: &Element| {
                    let e = g[g.len() - 1];
                    let pinch = g.len() >= 3 && g[g.len() - 2] == -1 && e == 0;
                    (0..p).contains(&e) && !pinch
                }),
            }
        }
    }
}

/// Audits that the cosets `x * letter * G_target` for `x` in `K_j`, with
/// `Y_r = K_j * letter * N_r(edge image)` removed, are pairwise more than
/// `r` apart, and that two cosets agree exactly when `x^-1 x'` lies in the
/// conjugated target group and are disjoint otherwise.
pub fn separation_audit(
    gog: &GraphOfGroups,
    window: &CayleyWindow,
    j: usize,
    r: u64,
) -> Result<SeparationReport> {
    if window.radius < r + 1 || !window.exact {
        return Err(Error::WindowTooSmall {
            detail: format!(
                "separation at r = {r} needs an exact window of radius >= {} (have {}, exact = {})",
                r + 1,
                window.radius,
                window.exact
            ),
        });
    }
    let g = gog.model();
    let edge = edge_data(gog, j);
    let ks: Vec<Element> = window
        .elements
        .iter()
        .filter(|e| gog.path_length(e) == j && (edge.admissible)(e))
        .cloned()
        .collect();
    let starts: Vec<Element> = ks.iter().map(|x| g.mul(x, &edge.letter)).collect();
    let inverses: Vec<Element> = starts.iter().map(|s| g.inverse(s)).collect();
    let mut coset_of: Vec<PointSet> = Vec::with_capacity(ks.len());
    let mut z = Vec::new();
    for inv in &inverses {
        let mut members = Vec::new();
        for (i, y) in window.elements.iter().enumerate() {
            let q = g.mul(inv, y);
            if (edge.in_target)(&q) {
                members.push(i);
                if (edge.in_edge_image)(&q) {
                    z.push(i);
                }
            }
        }
        coset_of.push(PointSet::new(members));
    }
    let y = window
        .space
        .outer_neighborhood(&PointSet::new(z), Rational::from_integer(r as i64));
    let mut pairs = 0;
    let mut identity_ok = true;
    for a in 0..ks.len() {
        for b in a + 1..ks.len() {
            pairs += 1;
            let same = (edge.in_target)(&g.mul(&inverses[a], &starts[b]));
            let ok = if same {
                coset_of[a] == coset_of[b]
            } else {
                coset_of[a].intersection(&coset_of[b]).is_empty()
            };
            identity_ok &= ok;
        }
    }
    let mut distinct: BTreeMap<Vec<usize>, ()> = BTreeMap::new();
    for c in &coset_of {
        distinct.insert(c.members().to_vec(), ());
    }
    let trimmed: Vec<PointSet> = distinct
        .keys()
        .map(|c| PointSet::new(c.iter().copied()).difference(&y))
        .filter(|c| !c.is_empty())
        .collect();
    let separation = window.space.family_separation(&trimmed);
    let separated = separation.exceeds(Rational::from_integer(r as i64));
    Ok(SeparationReport {
        j,
        r,
        edge: edge.label,
        cosets: distinct.len(),
        y_size: y.len(),
        separation,
        separated,
        pairs_checked: pairs,
        coset_identity_ok: identity_ok,
        pass: separated && identity_ok,
    })
}

/// Vertex of the Bass–Serre tree: a coset of a vertex group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    /// `(factor, syllables)` for amalgams: the coset `s_1..s_r * G_factor`
    Amalgam(i64, Vec<(i64, i64)>),
    /// Britton form with the trailing exponent dropped: `g<a>`
    Hnn(Vec<i64>),
}

/// A ball in the Bass–Serre tree around the base vertex, realized from
/// the cosets met by a Cayley window.
#[derive(Clone, Debug)]
pub struct BassSerreTree {
    pub gog: GraphOfGroups,
    pub vertices: Vec<Vertex>,
    pub index: HashMap<Vertex, usize>,
    /// tree metric, basepoint = base vertex (index 0)
    pub space: Arc<FiniteMetricSpace>,
    pub depth: u64,
}

impl BassSerreTree {
    fn vertex_of(gog: &GraphOfGroups, g: &Element, factor: i64) -> Vertex {
        match gog {
            GraphOfGroups::Amalgam(_) => {
                let mut syl = Amalgam::syllables(g);
                if syl.last().is_some_and(|s| s.0 == factor) {
                    syl.pop();
                }
                Vertex::Amalgam(factor, syl)
            }
            GraphOfGroups::Hnn(_) => Vertex::Hnn(g[..g.len() - 1].to_vec()),
        }
    }

    fn representative(v: &Vertex) -> Element {
        match v {
            Vertex::Amalgam(_, syl) => Amalgam::from_parts(0, syl),
            Vertex::Hnn(prefix) => {
                let mut g = prefix.clone();
                g.push(0);
                g
            }
        }
    }

    /// `h . v`, or `None` when the image leaves the window.
    pub fn apply(&self, h: &Element, v: usize) -> Option<usize> {
        let g = self.gog.model();
        let vert = &self.vertices[v];
        let image = g.mul(h, &Self::representative(vert));
        let factor = match vert {
            Vertex::Amalgam(f, _) => *f,
            Vertex::Hnn(_) => 0,
        };
        self.index
            .get(&Self::vertex_of(&self.gog, &image, factor))
            .copied()
    }

    /// Number of tree neighbours of each vertex inside the window.
    pub fn degrees(&self) -> Vec<usize> {
        self.space.unit_graph().iter().map(|a| a.len()).collect()
    }
}

/// Tree vertices within `depth` of the base vertex among the cosets of
/// the elements of `gamma`; checked to form a tree.
pub fn bass_serre_tree_window(
    gog: &GraphOfGroups,
    gamma: &CayleyWindow,
    depth: u64,
) -> Result<BassSerreTree> {
    let g = gog.model();
    let mut ids: HashMap<Vertex, usize> = HashMap::new();
    let mut verts: Vec<Vertex> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut id = |v: Vertex, verts: &mut Vec<Vertex>| -> usize {
        *ids.entry(v.clone()).or_insert_with(|| {
            verts.push(v);
            verts.len() - 1
        })
    };
    let base = id(BassSerreTree::vertex_of(gog, &g.identity(), 0), &mut verts);
    for e in &gamma.elements {
        let (u, w) = match gog {
            GraphOfGroups::Amalgam(_) => (
                BassSerreTree::vertex_of(gog, e, 0),
                BassSerreTree::vertex_of(gog, e, 1),
            ),
            GraphOfGroups::Hnn(_) => (
                BassSerreTree::vertex_of(gog, e, 0),
                BassSerreTree::vertex_of(gog, &g.multiply(e, 2), 0),
            ),
        };
        let (a, b) = (id(u, &mut verts), id(w, &mut verts));
        let key = (a.min(b), a.max(b));
        if !edges.contains(&key) {
            edges.push(key);
        }
    }
    // breadth-first depth from the base vertex
    let n = verts.len();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut dist = vec![u64::MAX; n];
    dist[base] = 0;
    let mut queue = std::collections::VecDeque::from([base]);
    let mut order = Vec::new();
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &v in &adj[u] {
            if dist[v] == u64::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let keep: Vec<usize> = order.into_iter().filter(|&v| dist[v] <= depth).collect();
    let local: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let kept_edges: Vec<(usize, usize)> = edges
        .iter()
        .filter_map(|&(a, b)| Some((*local.get(&a)?, *local.get(&b)?)))
        .collect();
    if kept_edges.len() + 1 != keep.len() {
        return Err(Error::NotATree {
            detail: format!(
                "{} coset vertices but {} edges",
                keep.len(),
                kept_edges.len()
            ),
        });
    }
    let vertices: Vec<Vertex> = keep.iter().map(|&v| verts[v].clone()).collect();
    let labels = vertices
        .iter()
        .map(|v| {
            let rep = g.label(&BassSerreTree::representative(v));
            match v {
                Vertex::Amalgam(0, _) => format!("{rep} A"),
                Vertex::Amalgam(_, _) => format!("{rep} B"),
                Vertex::Hnn(_) => format!("{rep} <a>"),
            }
        })
        .collect();
    let space = FiniteMetricSpace::from_graph(vertices.len(), &kept_edges)
        .map_err(|e| Error::NotATree {
            detail: e.to_string(),
        })?
        .with_labels(labels)
        .with_basepoint(0);
    let index = vertices
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    Ok(BassSerreTree {
        gog: gog.clone(),
        vertices,
        index,
        space: Arc::new(space),
        depth,
    })
}
