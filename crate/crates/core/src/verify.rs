//! Seeded property suites over random spaces and covers. Each instance
//! draws from its own ChaCha stream, so reports do not depend on thread
//! scheduling.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::estimator::{ad_bounds, ad_exact, naive_ad, DEFAULT_SEARCH_BUDGET};
use crate::metric::{FiniteMetricSpace, PointSet, QuasiIsometryData, Rational};
use crate::transport::{qi_transport, shrink, union_transport, UniformFamily};

pub const SUITES: &[&str] = &[
    "shrink",
    "union",
    "qi",
    "lebesgue",
    "metric-duality",
    "exact-oracle",
    "bounds",
];

/// Window size up to which union instances are also checked against the
/// exact finite-union sandwich.
pub const SANDWICH_MAX_POINTS: usize = 14;

/// Window size up to which the exact solver is compared with the
/// exhaustive reference.
pub const ORACLE_MAX_POINTS: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub count: usize,
    pub passed: usize,
    /// instances that also went through an exact cross-check
    pub cross_checked: usize,
    /// first few counterexamples
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Outcome of one instance: `Ok(cross_checked)` or a counterexample.
type Outcome = std::result::Result<bool, String>;

pub fn instance_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

pub fn run_suite(name: &str, seed: u64, count: usize) -> Result<SuiteReport> {
    let instance: fn(&mut ChaCha8Rng) -> Outcome = match name {
        "shrink" => shrink_instance,
        "union" => union_instance,
        "qi" => qi_instance,
        "lebesgue" => lebesgue_instance,
        "metric-duality" => duality_instance,
        "exact-oracle" => oracle_instance,
        "bounds" => bounds_instance,
        _ => {
            return Err(Error::invalid(format!(
                "unknown suite {name:?}; known suites: {}",
                SUITES.join(", ")
            )))
        }
    };
    let outcomes: Vec<Outcome> = (0..count)
        .into_par_iter()
        .map(|i| instance(&mut instance_rng(seed, i)))
        .collect();
    let failures: Vec<String> = outcomes
        .iter()
        .enumerate()
        .filter_map(|(i, o)| o.as_ref().err().map(|e| format!("instance {i}: {e}")))
        .collect();
    let passed = count - failures.len();
    Ok(SuiteReport {
        suite: name.to_string(),
        seed,
        count,
        passed,
        cross_checked: outcomes.iter().filter(|o| matches!(o, Ok(true))).count(),
        pass: failures.is_empty(),
        failures: failures.into_iter().take(10).collect(),
    })
}

/// Connected random graph: a random spanning tree plus extra edges.
pub fn random_graph(rng: &mut impl Rng, n: usize, extra: f64) -> FiniteMetricSpace {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(extra) {
                edges.push((a, b));
            }
        }
    }
    FiniteMetricSpace::from_graph(n, &edges).expect("spanning tree keeps the graph connected")
}

/// Shortest-path metric of a complete graph with random weights.
pub fn random_weighted(rng: &mut impl Rng, n: usize, max_weight: u32) -> FiniteMetricSpace {
    let mut d = vec![vec![0u32; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let w = rng.gen_range(1..=max_weight);
            d[a][b] = w;
            d[b][a] = w;
        }
    }
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                d[a][b] = d[a][b].min(d[a][k] + d[k][b]);
            }
        }
    }
    FiniteMetricSpace::from_integer_matrix(&d).expect("shortest paths form a metric")
}

/// A random space of about `n` points: path, grid, sparse graph or
/// weighted complete graph.
pub fn random_space(rng: &mut impl Rng, n: usize) -> FiniteMetricSpace {
    match rng.gen_range(0..4) {
        0 => FiniteMetricSpace::path(n),
        1 => {
            let w = (n as f64).sqrt().ceil() as usize;
            FiniteMetricSpace::grid(&[w, n.div_ceil(w)])
        }
        2 => random_graph(rng, n, 2.0 / n as f64),
        _ => random_weighted(rng, n, 4),
    }
}

/// Balls of radius `big` around a random `small`-net of the window;
/// Lebesgue number at least `big - small`.
pub fn net_cover(
    rng: &mut impl Rng,
    space: &Arc<FiniteMetricSpace>,
    window: &PointSet,
    small: u64,
    big: u64,
) -> Cover {
    let mut order = window.members().to_vec();
    order.shuffle(rng);
    let mut centers: Vec<usize> = Vec::new();
    for &x in &order {
        if centers.iter().all(|&c| space.units(c, x) as u64 > small) {
            centers.push(x);
        }
    }
    let sets = centers
        .iter()
        .map(|&c| {
            space
                .ball(c, Rational::from_integer(big as i64))
                .intersection(window)
        })
        .collect();
    Cover::new(space.clone(), sets, window.clone())
}

/// Random balls until the window is covered.
pub fn random_ball_cover(
    rng: &mut impl Rng,
    space: &Arc<FiniteMetricSpace>,
    max_radius: u64,
) -> Cover {
    let n = space.len();
    let mut sets: Vec<PointSet> = Vec::new();
    let mut covered = PointSet::empty();
    while covered.len() < n {
        let c = if rng.gen_bool(0.5) {
            rng.gen_range(0..n)
        } else {
            space.complement(&covered).members()[0]
        };
        let b = space.ball(
            c,
            Rational::from_integer(rng.gen_range(0..=max_radius) as i64),
        );
        covered = covered.union(&b);
        sets.push(b);
    }
    Cover::of_space(space.clone(), sets)
}

fn shrink_instance(rng: &mut ChaCha8Rng) -> Outcome {
    for _ in 0..50 {
        let n = rng.gen_range(10..=40);
        let space = Arc::new(random_space(rng, n));
        let small = rng.gen_range(1..=3);
        let big = small + 4 + rng.gen_range(0..=4);
        let c = net_cover(rng, &space, &space.all_points(), small, big);
        let l = c
            .lebesgue_number()
            .map_err(|e| e.to_string())?
            .value(c.window_diam());
        if l < 4 {
            continue;
        }
        let k = rng.gen_range(1..=l / 4);
        return shrink(&c, k)
            .map(|_| false)
            .map_err(|e| format!("k = {k}, L = {l}: {e}"));
    }
    Err("no admissible cover drawn".into())
}

/// Product tiles `[s, s+t]^dim` stepping by `t - lambda`, clipped to `region`.
fn tile_cover(
    space: &Arc<FiniteMetricSpace>,
    coords: &[Vec<i64>],
    region: &PointSet,
    t: i64,
    lambda: i64,
) -> Cover {
    let step = (t - lambda).max(1);
    let dim = coords[0].len();
    let max = coords
        .iter()
        .flat_map(|c| c.iter().copied())
        .max()
        .unwrap_or(0);
    let starts: Vec<i64> = (-t..=max).step_by(step as usize).collect();
    let mut sets = Vec::new();
    let mut corner = vec![0usize; dim];
    loop {
        let s = PointSet::new(region.iter().filter(|&p| {
            (0..dim).all(|k| (starts[corner[k]]..=starts[corner[k]] + t).contains(&coords[p][k]))
        }));
        if !s.is_empty() {
            sets.push(s);
        }
        let mut k = 0;
        while k < dim {
            corner[k] += 1;
            if corner[k] < starts.len() {
                break;
            }
            corner[k] = 0;
            k += 1;
        }
        if k == dim {
            break;
        }
    }
    Cover::new(space.clone(), sets, region.clone())
}

fn union_instance(rng: &mut ChaCha8Rng) -> Outcome {
    if rng.gen_bool(0.5) {
        union_strips(rng)
    } else {
        union_small_graph(rng)
    }
}

/// Two column strips separated by a middle strip `Y` on a line or grid.
fn union_strips(rng: &mut ChaCha8Rng) -> Outcome {
    let lambda = rng.gen_range(1..=2i64);
    let t = lambda + rng.gen_range(1..=2);
    let dims = if rng.gen_bool(0.5) {
        vec![]
    } else {
        vec![rng.gen_range(2..=4usize)]
    };
    // tiles have l1 diameter at most t per coordinate
    let b = t * (1 + dims.len() as i64);
    let y_len = 3 * b - 1 + rng.gen_range(0..=3);
    let left = rng.gen_range(2..=6);
    let right = rng.gen_range(2..=6);
    let width = (left + y_len + right) as usize;
    let mut all_dims = vec![width];
    all_dims.extend(&dims);
    let space = Arc::new(FiniteMetricSpace::grid(&all_dims));
    let coords = space.coordinates().ok_or("grid without coordinates")?;
    let (c, e) = (left, left + y_len - 1);
    // collars stay inside the regions, which stay apart outside the core of Y
    let a = rng.gen_range(c - 1 + lambda..=e - lambda);
    let bb = rng.gen_range(c + lambda..=e + 1 - lambda);
    let cols = |lo: i64, hi: i64| {
        PointSet::new((0..space.len()).filter(|&p| (lo..=hi).contains(&coords[p][0])))
    };
    let (x1, x2, y) = (cols(0, a), cols(bb, width as i64 - 1), cols(c, e));
    let lam = lambda as u64;
    let members = vec![
        (x1.clone(), tile_cover(&space, &coords, &x1, t, lambda)),
        (x2.clone(), tile_cover(&space, &coords, &x2, t, lambda)),
    ];
    let m = members
        .iter()
        .map(|(_, c)| c.multiplicity())
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let family = UniformFamily::new(members, b as u64, lam, m.into_iter().max().unwrap_or(0))
        .map_err(|e| e.to_string())?;
    let y_cov = tile_cover(&space, &coords, &y, t, lambda);
    let (w, _) = union_transport(&family, &y_cov, lam)
        .map_err(|e| format!("dims {all_dims:?}, lambda {lambda}, t {t}: {e}"))?;
    sandwich(
        &w,
        &[x1, x2, y],
        lam,
        family.multiplicity + y_cov.multiplicity().map_err(|e| e.to_string())?,
    )
}

/// `X = A u B` on a small random graph with `Y = B` and `A` containing
/// every point outside the `lambda`-interior of `B`.
fn union_small_graph(rng: &mut ChaCha8Rng) -> Outcome {
    let n = rng.gen_range(6..=SANDWICH_MAX_POINTS);
    let space = Arc::new(random_graph(rng, n, 0.15));
    let lambda = rng.gen_range(1..=2u64);
    let d = lambda + rng.gen_range(0..=3);
    let lam = Rational::from_integer(lambda as i64);
    let b_set = space.ball(
        rng.gen_range(0..n),
        Rational::from_integer(rng.gen_range(1..=3)),
    );
    let interior = space.inner_neighborhood(&b_set, lam);
    let a_set = PointSet::new((0..n).filter(|&p| !interior.contains(p) || rng.gen_bool(0.2)));
    if a_set.is_empty() {
        return Ok(false);
    }
    let ea = ad_exact(&space, lambda, d, &a_set).map_err(|e| e.to_string())?;
    let eb = ad_exact(&space, lambda, d, &b_set).map_err(|e| e.to_string())?;
    let family = UniformFamily::new(
        vec![(a_set.clone(), ea.witness.clone())],
        d,
        lambda,
        ea.ad + 1,
    )
    .map_err(|e| e.to_string())?;
    let (w, _) = union_transport(&family, &eb.witness, lambda).map_err(|e| e.to_string())?;
    sandwich(&w, &[a_set, b_set], lambda, ea.ad + eb.ad + 2)
}

/// `max ad(piece) <= ad(window) <= mult(W) - 1 <= combined - 1` on small
/// windows, with `D` the mesh of `W`.
fn sandwich(w: &Cover, pieces: &[PointSet], lambda: u64, combined: usize) -> Outcome {
    let mult = w.multiplicity().map_err(|e| e.to_string())?;
    if mult > combined {
        return Err(format!("union multiplicity {mult} > {combined}"));
    }
    if w.window.len() > SANDWICH_MAX_POINTS {
        return Ok(false);
    }
    let d = w.mesh_units().max(lambda);
    let ad = |s: &PointSet| {
        ad_exact(&w.space, lambda, d, s)
            .map(|e| e.ad)
            .map_err(|e| e.to_string())
    };
    let whole = ad(&w.window)?;
    for p in pieces.iter().filter(|p| !p.is_empty()) {
        let part = ad(p)?;
        if part > whole {
            return Err(format!("piece has ad {part} > ad of the union {whole}"));
        }
    }
    if whole + 1 > mult {
        return Err(format!(
            "ad of the union {whole} exceeds the union cover's {}",
            mult - 1
        ));
    }
    Ok(true)
}

fn qi_instance(rng: &mut ChaCha8Rng) -> Outcome {
    let n = rng.gen_range(5..=25);
    let space = Arc::new(random_space(rng, n));
    let c = random_ball_cover(rng, &space, 3);
    let l = c
        .lebesgue_number()
        .map_err(|e| e.to_string())?
        .value(c.window_diam());
    let q = QuasiIsometryData::identity_with_inverse(space);
    let (out, _) = qi_transport(&c, &q, l).map_err(|e| e.to_string())?;
    if out.sets != c.sets {
        return Err("identity transport changed the cover".into());
    }
    Ok(false)
}

fn lebesgue_instance(rng: &mut ChaCha8Rng) -> Outcome {
    let n = rng.gen_range(4..=30);
    let space = Arc::new(random_space(rng, n));
    let c = if rng.gen_bool(0.5) {
        random_ball_cover(rng, &space, 4)
    } else {
        let small = rng.gen_range(1..=2);
        let big = small + rng.gen_range(0..=4);
        net_cover(rng, &space, &space.all_points(), small, big)
    };
    let lb = c.lebesgue_lower_bound_balls().map_err(|e| e.to_string())?;
    let exact = c.lebesgue_number().map_err(|e| e.to_string())?;
    let diam = c.window_diam();
    if lb.value(diam) > exact.value(diam) {
        return Err(format!("ball bound {lb} exceeds exact {exact}"));
    }
    Ok(true)
}

fn duality_instance(rng: &mut ChaCha8Rng) -> Outcome {
    let n = rng.gen_range(2..=30);
    let space = random_space(rng, n);
    let a = PointSet::new((0..space.len()).filter(|_| rng.gen_bool(0.5)));
    let k = Rational::new(rng.gen_range(0..=8), rng.gen_range(1..=2));
    let inner = space.inner_neighborhood(&a, k);
    let dual = space.complement(&space.outer_neighborhood(&space.complement(&a), k));
    if inner != dual {
        return Err(format!(
            "k = {k}: {:?} vs {:?}",
            inner.members(),
            dual.members()
        ));
    }
    Ok(false)
}

fn oracle_instance(rng: &mut ChaCha8Rng) -> Outcome {
    let n = rng.gen_range(1..=ORACLE_MAX_POINTS);
    let space = Arc::new(random_space(rng, n));
    let window = if rng.gen_bool(0.7) {
        space.all_points()
    } else {
        PointSet::new((0..space.len()).filter(|_| rng.gen_bool(0.7)))
    };
    if window.len() > ORACLE_MAX_POINTS {
        return Ok(false);
    }
    let lambda = rng.gen_range(0..=3);
    let d = lambda + rng.gen_range(0..=4);
    let fast = ad_exact(&space, lambda, d, &window).map_err(|e| e.to_string())?;
    let slow = naive_ad(&space, &window, lambda, d).ok_or("reference found no cover")?;
    if fast.ad != slow {
        return Err(format!(
            "lambda {lambda}, D {d}: exact {} vs reference {slow}",
            fast.ad
        ));
    }
    Ok(true)
}

fn bounds_instance(rng: &mut ChaCha8Rng) -> Outcome {
    let n = rng.gen_range(2..=30);
    let space = Arc::new(random_space(rng, n));
    let lambda = rng.gen_range(0..=3);
    let d = lambda + rng.gen_range(0..=6);
    let b = ad_bounds(
        &space,
        lambda,
        d,
        &space.all_points(),
        Vec::new(),
        DEFAULT_SEARCH_BUDGET / 10,
    )
    .map_err(|e| e.to_string())?;
    if b.lower > b.upper {
        return Err(format!("lower {} > upper {}", b.lower, b.upper));
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_pass_and_repeat() {
        for suite in SUITES {
            let a = run_suite(suite, 3, 12).unwrap();
            assert!(a.pass, "{a:?}");
            assert_eq!(a, run_suite(suite, 3, 12).unwrap());
        }
        assert!(run_suite("nope", 0, 1).is_err());
    }
}
