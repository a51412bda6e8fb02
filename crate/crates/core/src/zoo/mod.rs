//! Finitely generated groups as normal-form engines, Cayley windows,
//! actions on finite windows, graphs of groups and relative metrics.

mod action;
mod cayley;
mod gog;
mod groups;
mod parse;
mod relhyp;

use std::fmt;
use std::sync::Arc;

pub use action::{
    action_on_line, action_on_tree, stabilizer_window, ActionAudit, ActionWindow, ApplyFn,
};
pub use cayley::{cayley_window, cayley_window_capped, CayleyWindow, GroupSubject};
pub use gog::{
    bass_serre_tree_window, separation_audit, stratify_words, BassSerreTree, GraphOfGroups,
    SeparationReport, Strata, Vertex,
};
pub use groups::{
    Amalgam, Cyclic, Free, Hnn, Lamplighter, Product, Symmetric, ZGens, ZWreathZ, Zn,
};
pub use parse::{parse_gog, parse_group, zoo_names};
pub use relhyp::{
    relhyp_ball_decompose, relhyp_metric, CosetReport, Decomposition, RelHypData, Subgroup,
};

/// Canonical (normal form) encoding of a group element.
pub type Element = Vec<i64>;

/// A group with a finite symmetric generating set and a normal form.
/// `multiply` right-multiplies a normal form by one generator.
pub trait GroupModel: Send + Sync {
    fn name(&self) -> String;

    /// Letter names; generator `i` has inverse `inverse_generator(i)`.
    fn generators(&self) -> Vec<String>;

    fn inverse_generator(&self, s: usize) -> usize;

    fn identity(&self) -> Element;

    fn multiply(&self, g: &Element, s: usize) -> Element;

    /// Some word in the generators representing `g` (not necessarily
    /// geodesic).
    fn word(&self, g: &Element) -> Vec<usize>;

    fn label(&self, g: &Element) -> String;

    /// Whether balls about the identity are geodesically convex, so that
    /// distances inside a ball need no margin.
    fn convex_balls(&self) -> bool {
        false
    }

    /// `Some(n)` for the standard lattice `Z^n`, whose labels are coordinates.
    fn lattice_dim(&self) -> Option<usize> {
        None
    }

    fn mul(&self, g: &Element, h: &Element) -> Element {
        self.word(h)
            .into_iter()
            .fold(g.clone(), |acc, s| self.multiply(&acc, s))
    }

    fn inverse(&self, g: &Element) -> Element {
        self.word(g)
            .into_iter()
            .rev()
            .fold(self.identity(), |acc, s| {
                self.multiply(&acc, self.inverse_generator(s))
            })
    }

    fn eval(&self, word: &[usize]) -> Element {
        word.iter()
            .fold(self.identity(), |acc, &s| self.multiply(&acc, s))
    }
}

impl fmt::Debug for dyn GroupModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupModel({})", self.name())
    }
}

pub type SharedGroup = Arc<dyn GroupModel>;
