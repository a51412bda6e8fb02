//! Cover transformations: shrinking, pushing through quasi-isometries,
//! unions of uniform families, enlarging disjoint families and pulling
//! covers back along group actions. Every operation re-measures its
//! output and returns a certificate.

use std::fmt::Display;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cover::{Cover, Lebesgue};
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, PointSet, QuasiIsometryData, Rational};
use crate::zoo::{stabilizer_window, ActionWindow};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub property: String,
    pub bound: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measured {
    pub property: String,
    pub value: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportCertificate {
    pub op: String,
    pub claimed: Vec<Claim>,
    pub measured: Vec<Measured>,
    pub pass: bool,
}

impl TransportCertificate {
    fn new(op: &str) -> Self {
        TransportCertificate {
            op: op.to_string(),
            claimed: Vec::new(),
            measured: Vec::new(),
            pass: true,
        }
    }

    fn record(&mut self, property: &str, bound: String, value: String, holds: bool) {
        self.claimed.push(Claim {
            property: property.to_string(),
            bound,
        });
        self.measured.push(Measured {
            property: property.to_string(),
            value,
            holds,
        });
        self.pass &= holds;
    }

    fn le<T: Display + PartialOrd>(&mut self, property: &str, value: T, bound: T) {
        let holds = value <= bound;
        self.record(property, format!("<= {bound}"), value.to_string(), holds);
    }

    fn lebesgue(&mut self, cover: &Cover, lambda: u64) -> Result<Lebesgue> {
        let l = cover.lebesgue_number()?;
        self.record(
            "lebesgue",
            format!(">= {lambda}"),
            l.to_string(),
            l.at_least(lambda),
        );
        Ok(l)
    }

    fn covers(&mut self, cover: &Cover) {
        let detail = match cover.check_covers() {
            Ok(()) => "yes".to_string(),
            Err(e) => e.to_string(),
        };
        let ok = detail == "yes";
        self.record("covers-window", "yes".into(), detail, ok);
    }

    /// Turns a failing certificate into a hard error naming the failing
    /// claims; failures on admissible inputs are bugs, not data.
    pub fn ensure(self) -> Result<Self> {
        if self.pass {
            return Ok(self);
        }
        let failed: Vec<String> = self
            .measured
            .iter()
            .zip(&self.claimed)
            .filter(|(m, _)| !m.holds)
            .map(|(m, c)| format!("{} = {} (claimed {})", m.property, m.value, c.bound))
            .collect();
        Err(Error::CertificateFailed {
            op: op_name(&self.op),
            detail: failed.join("; "),
        })
    }
}

fn op_name(op: &str) -> &'static str {
    match op {
        "shrink" => "shrink",
        "qi" => "qi",
        "union" => "union",
        "families" => "families",
        _ => "action",
    }
}

fn lebesgue_value(cover: &Cover) -> Result<u64> {
    Ok(cover.lebesgue_number()?.value(cover.window_diam()))
}

/// `{x in set n window : B_k(x) n window in set}`.
fn inner_in_window(
    space: &FiniteMetricSpace,
    window: &PointSet,
    set: &PointSet,
    k: u64,
) -> PointSet {
    PointSet::new(set.intersection(window).iter().filter(|&x| {
        let row = space.row(x);
        window.iter().all(|y| row[y] as u64 > k || set.contains(y))
    }))
}

/// `V_i = {x : B_k(x) in U_i}` with balls taken inside the window; the
/// indices of the sets are preserved. Needs `4k <= L(C)`.
pub fn shrink(cover: &Cover, k: u64) -> Result<(Cover, TransportCertificate)> {
    if !cover.space.is_integral() {
        return Err(Error::CliqueMethodNeedsIntegers {
            scale: cover.space.scale(),
        });
    }
    let l = lebesgue_value(cover)?;
    if 4 * k > l {
        return Err(Error::pre(
            "shrink",
            format!("need 4k <= L(C); k = {k}, L(C) = {l}"),
        ));
    }
    let sets: Vec<PointSet> = cover
        .sets
        .iter()
        .map(|s| inner_in_window(&cover.space, &cover.window, s, k))
        .collect();
    let out = Cover::new(cover.space.clone(), sets, cover.window.clone());
    let mut cert = TransportCertificate::new("shrink");
    cert.covers(&out);
    let m = cover.multiplicity()?;
    if cert.pass {
        cert.lebesgue(&out, l - 2 * k)?;
        cert.le(
            "k-multiplicity",
            out.k_multiplicity(Rational::from_integer(k as i64))?,
            m,
        );
    }
    let nested = out
        .sets
        .iter()
        .zip(&cover.sets)
        .all(|(v, u)| v.is_subset(u));
    cert.record("nested", "V_i in U_i".into(), nested.to_string(), nested);
    Ok((out, cert.ensure()?))
}

/// Shrinks by `c`, pushes the sets forward and thickens them by `c` in
/// the target. `c` is the quasi-isometry's constant; the quasi-inverse
/// supplies `alpha'` and `epsilon'` for the Lebesgue precondition.
pub fn qi_transport(
    cover: &Cover,
    q: &QuasiIsometryData,
    lambda: u64,
) -> Result<(Cover, TransportCertificate)> {
    let report = q.check();
    if !report.valid {
        return Err(Error::pre(
            "qi",
            format!(
                "map is not a quasi-isometry: {:?}",
                report.violations.first()
            ),
        ));
    }
    let inv = q
        .quasi_inverse
        .as_ref()
        .ok_or_else(|| Error::pre("qi", "a quasi-inverse is required"))?;
    if !Arc::ptr_eq(&cover.space, &q.source) && cover.space.len() != q.source.len() {
        return Err(Error::pre("qi", "cover does not live on the map's source"));
    }
    if cover.window.len() != cover.space.len() {
        return Err(Error::pre("qi", "the cover must cover the whole source"));
    }
    let l = lebesgue_value(cover)?;
    let need = inv.alpha * Rational::from_integer(lambda as i64) + inv.epsilon + q.c * 2;
    if Rational::from_integer(l as i64) < need {
        return Err(Error::pre(
            "qi",
            format!("need L(C) >= alpha' lambda + epsilon' + 2C = {need}; L(C) = {l}"),
        ));
    }
    let k = cover.space.radius_units(q.c);
    let shrunk: Vec<PointSet> = cover
        .sets
        .iter()
        .map(|s| inner_in_window(&cover.space, &cover.window, s, k))
        .collect();
    let target = q.target.clone();
    let sets: Vec<PointSet> = shrunk
        .iter()
        .map(|s| target.outer_neighborhood(&PointSet::new(s.iter().map(|x| q.map[x])), q.c))
        .collect();
    let out = Cover::of_space(target.clone(), sets);
    let mut cert = TransportCertificate::new("qi");
    cert.covers(&out);
    if cert.pass {
        cert.lebesgue(&out, lambda)?;
        let bound = target.max_ball_cardinality(q.c) * cover.multiplicity()?;
        cert.le("multiplicity", out.multiplicity()?, bound);
    }
    cert.le(
        "mesh",
        out.mesh(),
        q.alpha * cover.mesh() + q.epsilon + q.c * 2,
    );
    Ok((out, cert.ensure()?))
}

/// Regions `X_a` of one space with covers sharing a mesh bound, a
/// Lebesgue floor and a multiplicity ceiling.
#[derive(Clone, Debug)]
pub struct UniformFamily {
    pub members: Vec<(PointSet, Cover)>,
    pub mesh_bound: u64,
    pub lambda: u64,
    pub multiplicity: usize,
}

impl UniformFamily {
    /// Validates every member cover on its region.
    pub fn new(
        members: Vec<(PointSet, Cover)>,
        mesh_bound: u64,
        lambda: u64,
        multiplicity: usize,
    ) -> Result<Self> {
        let space = members
            .first()
            .map(|(_, c)| c.space.clone())
            .ok_or_else(|| Error::invalid("a uniform family needs at least one member"))?;
        for (i, (region, c)) in members.iter().enumerate() {
            if !Arc::ptr_eq(&c.space, &space) {
                return Err(Error::invalid("family members must share one space"));
            }
            let c = Cover::new(space.clone(), c.sets.clone(), region.clone());
            let (mesh, m, l) = (c.mesh_units(), c.multiplicity()?, c.lebesgue_number()?);
            if mesh > mesh_bound || m > multiplicity || !l.at_least(lambda) {
                return Err(Error::invalid(format!(
                    "member {i}: mesh {mesh}, multiplicity {m}, lebesgue {l} against bounds {mesh_bound}, {multiplicity}, {lambda}"
                )));
            }
        }
        Ok(UniformFamily {
            members,
            mesh_bound,
            lambda,
            multiplicity,
        })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.members[0].1.space
    }
}

/// `W = {U \ N_-lambda(Y) : U in U_a} u Y_cov`, where `Y = Y_cov.window`.
/// Besides the separation preconditions, each `lambda`-collar of
/// `X_a \ Y` must stay inside `X_a`, and the regions must be disjoint
/// outside the `lambda`-interior of `Y`.
pub fn union_transport(
    family: &UniformFamily,
    y_cov: &Cover,
    lambda: u64,
) -> Result<(Cover, TransportCertificate)> {
    let space = family.space().clone();
    if !Arc::ptr_eq(&y_cov.space, &space) {
        return Err(Error::pre(
            "union",
            "the cover of Y must live on the family's space",
        ));
    }
    if lambda > family.lambda {
        return Err(Error::pre(
            "union",
            format!("members have lebesgue floor {} < {lambda}", family.lambda),
        ));
    }
    let b = family.mesh_bound;
    if 3 * b < 3 * lambda {
        return Err(Error::pre(
            "union",
            format!("need 3B - 2 lambda >= lambda; B = {b}, lambda = {lambda}"),
        ));
    }
    let y = &y_cov.window;
    let outside: Vec<PointSet> = family
        .members
        .iter()
        .map(|(r, _)| r.difference(y))
        .collect();
    let sep = space.family_separation(&outside);
    let need = Rational::from_integer(3 * b as i64);
    if !sep.at_least(need) {
        return Err(Error::pre(
            "union",
            format!("regions outside Y are {sep} apart; need 3B = {need}"),
        ));
    }
    let ly = y_cov.lebesgue_number()?;
    if !ly.at_least(lambda) {
        return Err(Error::pre(
            "union",
            format!("cover of Y has lebesgue {ly} < {lambda}"),
        ));
    }
    let window = family
        .members
        .iter()
        .fold(y.clone(), |acc, (r, _)| acc.union(r));
    let lam = Rational::from_integer(lambda as i64);
    for (i, ((region, _), out)) in family.members.iter().zip(&outside).enumerate() {
        let collar = space.outer_neighborhood(out, lam).intersection(&window);
        if !collar.is_subset(region) {
            return Err(Error::pre(
                "union",
                format!("the {lambda}-collar of region {i} outside Y leaves the region"),
            ));
        }
    }
    let core = inner_in_window(&space, &window, y, lambda);
    let reach: Vec<PointSet> = family
        .members
        .iter()
        .map(|(r, _)| r.difference(&core))
        .collect();
    for a in 0..reach.len() {
        for b in a + 1..reach.len() {
            if let Some(p) = reach[a].intersection(&reach[b]).iter().next() {
                return Err(Error::pre(
                    "union",
                    format!(
                        "regions {a} and {b} share point {p} outside the {lambda}-interior of Y"
                    ),
                ));
            }
        }
    }
    let mut sets = Vec::new();
    let mut owner = Vec::new();
    for (a, (_, c)) in family.members.iter().enumerate() {
        for s in &c.sets {
            let t = s.difference(&core);
            if !t.is_empty() {
                sets.push(t);
                owner.push(Some(a));
            }
        }
    }
    sets.extend(y_cov.sets.iter().cloned());
    owner.extend(y_cov.sets.iter().map(|_| None));
    let out = Cover::new(space.clone(), sets, window);
    let mut cert = TransportCertificate::new("union");
    cert.covers(&out);
    if cert.pass {
        cert.lebesgue(&out, lambda)?;
        cert.le(
            "multiplicity",
            out.multiplicity()?,
            family.multiplicity + y_cov.multiplicity()?,
        );
    }
    cert.le("mesh", out.mesh_units(), b.max(y_cov.mesh_units()));
    let crossing = out.window.iter().find(|&p| {
        let mut alphas = out
            .sets
            .iter()
            .zip(&owner)
            .filter_map(|(s, o)| o.filter(|_| s.contains(p)));
        let first = alphas.next();
        alphas.any(|a| Some(a) != first)
    });
    cert.record(
        "single-index",
        "each point meets one region's sets".into(),
        crossing.map_or("yes".into(), |p| format!("point {p} meets two regions")),
        crossing.is_none(),
    );
    Ok((out, cert.ensure()?))
}

/// Enlarges each set of `n` families (each internally more than `2
/// lambda`-separated) by `lambda`: multiplicity `<= n`, Lebesgue `>= lambda`.
pub fn disjoint_families_to_cover(
    space: &Arc<FiniteMetricSpace>,
    window: &PointSet,
    families: &[Vec<PointSet>],
    lambda: u64,
) -> Result<(Cover, TransportCertificate)> {
    let lam = Rational::from_integer(lambda as i64);
    for (i, f) in families.iter().enumerate() {
        let sep = space.family_separation(f);
        if !sep.exceeds(lam * 2) {
            return Err(Error::pre(
                "families",
                format!("family {i} is only {sep} separated; need > {}", 2 * lambda),
            ));
        }
    }
    let all: Vec<PointSet> = families.iter().flatten().cloned().collect();
    let base = Cover::new(space.clone(), all.clone(), window.clone());
    base.check_covers()
        .map_err(|e| Error::pre("families", format!("families do not cover the window: {e}")))?;
    let d = base.mesh_units();
    let sets = all
        .iter()
        .map(|s| space.outer_neighborhood(s, lam))
        .collect();
    let out = Cover::new(space.clone(), sets, window.clone());
    let mut cert = TransportCertificate::new("families");
    cert.covers(&out);
    cert.lebesgue(&out, lambda)?;
    cert.le("multiplicity", out.multiplicity()?, families.len());
    cert.le("mesh", out.mesh_units(), d + 2 * lambda);
    Ok((out, cert.ensure()?))
}

/// Pulls an orbit cover of `X` and a cover of the stabilizer window back
/// to the group: sets `gamma_U V n pi^-1(U)`, with `gamma_U` the first
/// window element (length-lex) mapping into `U`. Claims are measured on
/// the interior `{|gamma| <= interior_radius, pi(gamma) in the orbit
/// window}`, which needs `2 interior_radius <= ` the group window radius.
pub fn action_transport(
    orbit_cover: &Cover,
    stab_cover: &Cover,
    act: &ActionWindow,
    lambda: u64,
    r: u64,
    interior_radius: u64,
) -> Result<(Cover, TransportCertificate)> {
    let gamma = &act.gamma;
    let group = act.group();
    if !Arc::ptr_eq(&orbit_cover.space, &act.space) {
        return Err(Error::pre(
            "action",
            "orbit cover must live on the acted-on space",
        ));
    }
    if !Arc::ptr_eq(&stab_cover.space, &gamma.space) {
        return Err(Error::pre(
            "action",
            "stabilizer cover must live on the group window",
        ));
    }
    if 2 * interior_radius > gamma.radius {
        return Err(Error::WindowTooSmall {
            detail: format!(
                "interior radius {interior_radius} needs a group window of radius >= {}",
                2 * interior_radius
            ),
        });
    }
    let mu = act
        .mu()
        .ok_or_else(|| Error::pre("action", "a generator moves the basepoint out of the space"))?;
    let pi = act.projection();
    for (i, g) in gamma.elements.iter().enumerate() {
        for s in 0..group.generators().len() {
            let Some(j) = gamma.lookup(&group.multiply(g, s)) else {
                continue;
            };
            if let (Some(a), Some(b)) = (pi[i], pi[j]) {
                if act.space.dist(a, b) > mu {
                    return Err(Error::pre(
                        "action",
                        format!(
                            "orbit map is not {mu}-Lipschitz on an edge at {}",
                            gamma.space.label(i)
                        ),
                    ));
                }
            }
        }
    }
    let rr = Rational::from_integer(r as i64);
    if orbit_cover.mesh() * 2 > rr {
        return Err(Error::pre(
            "action",
            format!(
                "orbit cover mesh {} exceeds R/2 = {}",
                orbit_cover.mesh(),
                rr / 2
            ),
        ));
    }
    let need = mu * Rational::from_integer(lambda as i64);
    let lo = orbit_cover.lebesgue_number()?;
    if !lo.at_least(need.ceil().to_integer() as u64) {
        return Err(Error::pre(
            "action",
            format!("orbit cover lebesgue {lo} < lambda mu = {need}"),
        ));
    }
    let w_r = stabilizer_window(act, rr);
    if stab_cover.window != w_r {
        return Err(Error::pre(
            "action",
            format!(
                "stabilizer cover window has {} points; W_R has {}",
                stab_cover.window.len(),
                w_r.len()
            ),
        ));
    }
    let ls = stab_cover.lebesgue_number()?;
    if !ls.at_least(lambda) {
        return Err(Error::pre(
            "action",
            format!("stabilizer cover lebesgue {ls} < {lambda}"),
        ));
    }
    let interior = PointSet::new((0..gamma.len()).filter(|&i| {
        gamma.lengths[i] as u64 <= interior_radius
            && pi[i].is_some_and(|x| orbit_cover.window.contains(x))
    }));
    let mut sets = Vec::new();
    for u in &orbit_cover.sets {
        let preimage: Vec<usize> = (0..gamma.len())
            .filter(|&i| pi[i].is_some_and(|x| u.contains(x)))
            .collect();
        let Some(&rep) = preimage.first() else {
            continue;
        };
        let g_u = &gamma.elements[rep];
        for v in &stab_cover.sets {
            let moved = PointSet::new(
                v.iter()
                    .filter_map(|i| gamma.lookup(&group.mul(g_u, &gamma.elements[i]))),
            );
            let s = moved.intersection(&PointSet::new(preimage.iter().copied()));
            if !s.is_empty() {
                sets.push(s);
            }
        }
    }
    let out = Cover::new(gamma.space.clone(), sets, interior);
    let mut cert = TransportCertificate::new("action");
    cert.covers(&out);
    if cert.pass {
        cert.lebesgue(&out, lambda)?;
        cert.le(
            "multiplicity",
            out.multiplicity()?,
            orbit_cover.multiplicity()? * stab_cover.multiplicity()?,
        );
    }
    let mesh = out.restricted_to_window().mesh_units();
    cert.record("mesh", "recorded".into(), mesh.to_string(), true);
    Ok((out, cert.ensure()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Arc<FiniteMetricSpace> {
        Arc::new(FiniteMetricSpace::path(n))
    }

    fn interval(a: usize, b: usize) -> PointSet {
        PointSet::range(a..b + 1)
    }

    #[test]
    fn shrink_p30_hits_equality() {
        let c = Cover::of_space(path(30), vec![interval(0, 14), interval(10, 29)]);
        let (v, cert) = shrink(&c, 1).unwrap();
        assert!(cert.pass);
        assert_eq!(v.sets, vec![interval(0, 13), interval(11, 29)]);
        assert_eq!(v.lebesgue_number().unwrap(), Lebesgue::Finite(3));
        assert_eq!(v.k_multiplicity(Rational::from_integer(1)).unwrap(), 2);
        let (same, _) = shrink(&c, 0).unwrap();
        assert_eq!(same.sets, c.sets);
        assert!(matches!(shrink(&c, 2), Err(Error::Precondition { .. })));
    }

    #[test]
    fn qi_identity_and_doubling() {
        let p = path(16);
        let c = Cover::of_space(p.clone(), vec![interval(0, 9), interval(3, 15)]);
        let (same, cert) =
            qi_transport(&c, &QuasiIsometryData::identity_with_inverse(p.clone()), 6).unwrap();
        assert!(cert.pass);
        assert_eq!(same.sets, c.sets);

        let q = crate::fixtures::doubling(16);
        let (_, cert) = qi_transport(&c, &q, 2).unwrap();
        assert!(cert.pass, "{cert:?}");
    }

    #[test]
    fn union_on_the_line() {
        let p = path(100);
        let cover_of = |a: usize, b: usize| {
            let sets = (a..=b)
                .step_by(2)
                .map(|s| interval(s, (s + 2).min(b)))
                .collect();
            Cover::new(p.clone(), sets, interval(a, b))
        };
        let family = UniformFamily::new(
            vec![
                (interval(0, 45), cover_of(0, 45)),
                (interval(54, 99), cover_of(54, 99)),
            ],
            2,
            1,
            2,
        )
        .unwrap();
        let y = cover_of(40, 59);
        let (w, cert) = union_transport(&family, &y, 1).unwrap();
        assert!(cert.pass, "{cert:?}");
        assert!(w.multiplicity().unwrap() <= 4);
        // separation below 3B is refused
        let close = UniformFamily::new(
            vec![
                (interval(0, 45), cover_of(0, 45)),
                (interval(46, 99), cover_of(46, 99)),
            ],
            2,
            1,
            2,
        )
        .unwrap();
        assert!(
            union_transport(&close, &Cover::new(p.clone(), vec![], PointSet::empty()), 1).is_err()
        );
    }

    #[test]
    fn families_of_singletons_and_tiles() {
        let p = path(10);
        let singletons = vec![(0..10).step_by(3).map(|i| PointSet::new([i])).collect()];
        let window = PointSet::new((0..10).step_by(3));
        let (c, cert) = disjoint_families_to_cover(&p, &window, &singletons, 1).unwrap();
        assert!(cert.pass);
        assert_eq!(c.multiplicity().unwrap(), 1);
        let lambda = 2;
        let p = path(40);
        let tiles = |start: usize| -> Vec<PointSet> {
            (start..40)
                .step_by(4 * lambda + 2)
                .map(|s| interval(s, (s + 2 * lambda).min(39)))
                .collect()
        };
        let (c, cert) = disjoint_families_to_cover(
            &p,
            &p.all_points(),
            &[tiles(0), tiles(2 * lambda + 1)],
            lambda as u64,
        )
        .unwrap();
        assert!(cert.pass);
        assert_eq!(c.multiplicity().unwrap(), 2);
    }

    #[test]
    fn z2_acting_on_the_line() {
        let f = crate::fixtures::z2_on_line(2).unwrap();
        let (out, cert) =
            action_transport(&f.orbit, &f.stab, &f.act, f.lambda, f.r, f.interior_radius).unwrap();
        assert!(cert.pass, "{cert:?}");
        assert!(out.multiplicity().unwrap() <= 4);
    }

    #[test]
    fn free_product_on_its_tree() {
        for lambda in [1u64, 2] {
            let f = crate::fixtures::z2z3_on_tree(lambda).unwrap();
            let (out, cert) =
                action_transport(&f.orbit, &f.stab, &f.act, f.lambda, f.r, f.interior_radius)
                    .unwrap();
            assert!(cert.pass, "{cert:?}");
            assert!(out.multiplicity().unwrap() <= 2);
        }
    }
}
