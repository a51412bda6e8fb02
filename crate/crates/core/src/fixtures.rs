//! Named fixtures shared by the command line and the test suites.

use std::sync::Arc;

use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::estimator::tree_cover;
use crate::metric::{FiniteMetricSpace, PointSet, QuasiIsometryData, Rational};
use crate::zoo::{
    action_on_line, action_on_tree, bass_serre_tree_window, cayley_window, stabilizer_window,
    ActionWindow, Amalgam, GraphOfGroups, SharedGroup, Zn,
};

pub const ACTION_FIXTURES: &[&str] = &["z2-line", "z2z3-tree"];

fn interval(a: usize, b: usize) -> PointSet {
    PointSet::range(a..b + 1)
}

/// Path on 30 points covered by `{0..14}` and `{10..29}`; Lebesgue 5.
pub fn p30_cover() -> Cover {
    Cover::of_space(
        Arc::new(FiniteMetricSpace::path(30)),
        vec![interval(0, 14), interval(10, 29)],
    )
}

/// Path on 16 points covered by `{0..9}` and `{3..15}` (Lebesgue 6).
pub fn p16_cover() -> Cover {
    Cover::of_space(
        Arc::new(FiniteMetricSpace::path(16)),
        vec![interval(0, 9), interval(3, 15)],
    )
}

/// `x -> 2x` from the path on `n` points onto the even integers `0..2n-2`
/// with the usual metric, together with its inverse.
pub fn doubling(n: usize) -> QuasiIsometryData {
    let path = Arc::new(FiniteMetricSpace::path(n));
    let evens: Vec<Vec<u32>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| 2 * (i as i32 - j as i32).unsigned_abs())
                .collect()
        })
        .collect();
    let target =
        Arc::new(FiniteMetricSpace::from_integer_matrix(&evens).expect("scaled path metric"));
    let half = QuasiIsometryData {
        source: target.clone(),
        target: path.clone(),
        map: (0..n).collect(),
        alpha: Rational::from_integer(2),
        epsilon: Rational::from_integer(0),
        c: Rational::from_integer(1),
        quasi_inverse: None,
    };
    QuasiIsometryData {
        source: path,
        target,
        map: (0..n).collect(),
        alpha: Rational::from_integer(2),
        epsilon: Rational::from_integer(0),
        c: Rational::from_integer(1),
        quasi_inverse: Some(Box::new(half)),
    }
}

/// Inputs of an action transport run.
pub struct ActionFixture {
    pub act: ActionWindow,
    pub orbit: Cover,
    pub stab: Cover,
    pub lambda: u64,
    pub r: u64,
    pub interior_radius: u64,
}

/// `Z^2` acting on the line through the first coordinate: orbit cover by
/// intervals of length 5 stepping 3, stabilizer strip cut into horizontal
/// bands six rows tall. Only `lambda = 2` is set up.
pub fn z2_on_line(lambda: u64) -> Result<ActionFixture> {
    if lambda != 2 {
        return Err(Error::InvalidInput(
            "the z2-line fixture is built for lambda 2".into(),
        ));
    }
    let r = 10;
    let z2: SharedGroup = Arc::new(Zn { n: 2 });
    let gamma = cayley_window(&z2, 24, None, 10_000)?;
    let act = action_on_line(gamma, 30);
    let x = act.space.clone();
    let orbit = Cover::of_space(
        x,
        (0..61)
            .step_by(3)
            .map(|s| interval(s, (s + 5).min(60)))
            .collect(),
    );
    let w_r = stabilizer_window(&act, Rational::from_integer(r as i64));
    let bands = (-27..=24)
        .step_by(3)
        .map(|s| {
            PointSet::new(
                w_r.iter()
                    .filter(|&i| (s..s + 6).contains(&act.gamma.elements[i][1])),
            )
        })
        .filter(|b| !b.is_empty())
        .collect();
    let stab = Cover::new(act.gamma.space.clone(), bands, w_r);
    Ok(ActionFixture {
        act,
        orbit,
        stab,
        lambda,
        r,
        interior_radius: 12,
    })
}

/// `Z2 * Z3` acting on its Bass-Serre tree: tree cover at `2 lambda` on
/// the orbit side, the whole stabilizer window `W_{16 lambda}` as one set.
pub fn z2z3_on_tree(lambda: u64) -> Result<ActionFixture> {
    if !(1..=2).contains(&lambda) {
        return Err(Error::InvalidInput(
            "the z2z3-tree fixture supports lambda 1 and 2".into(),
        ));
    }
    let gog = GraphOfGroups::Amalgam(Amalgam::free_product(2, 3)?);
    let g = gog.group();
    let big = cayley_window(&g, 10, None, 100_000)?;
    let tree = Arc::new(bass_serre_tree_window(&gog, &big, 11)?);
    let gamma = cayley_window(&g, 8, None, 100_000)?;
    let act = action_on_tree(tree, gamma);
    let r = 16 * lambda;
    let orbit = tree_cover(&act.space, 2 * lambda, &act.space.all_points(), Some(0))?;
    let w_r = stabilizer_window(&act, Rational::from_integer(r as i64));
    let stab = Cover::new(act.gamma.space.clone(), vec![w_r.clone()], w_r);
    Ok(ActionFixture {
        act,
        orbit,
        stab,
        lambda,
        r,
        interior_radius: 4,
    })
}

pub fn action_fixture(name: &str, lambda: u64) -> Result<ActionFixture> {
    match name {
        "z2-line" => z2_on_line(lambda),
        "z2z3-tree" => z2z3_on_tree(lambda),
        _ => Err(Error::InvalidInput(format!(
            "unknown action fixture {name:?}; known: {}",
            ACTION_FIXTURES.join(", ")
        ))),
    }
}
