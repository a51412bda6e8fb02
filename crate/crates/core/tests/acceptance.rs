//! Acceptance run: one PASS/FAIL line per criterion, then a summary.
//!
//! Tolerances and counts are pinned below. A check listed in
//! `KNOWN_UNATTAINABLE` still prints FAIL; the run only errors when the set
//! of failing checks differs from that list.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use adgrowth::cover::Cover;
use adgrowth::estimator::{ad_exact, brick_cover, dim_curve, find_min_k, DimCurve, WindowPolicy};
use adgrowth::fixtures::{doubling, p16_cover, p30_cover, z2_on_line, z2z3_on_tree};
use adgrowth::io::sha256_hex;
use adgrowth::metric::{FiniteMetricSpace, QuasiIsometryData, Rational};
use adgrowth::transport::{action_transport, qi_transport, shrink};
use adgrowth::verify::{run_suite, SuiteReport, ORACLE_MAX_POINTS, SANDWICH_MAX_POINTS};
use adgrowth::zoo::{
    cayley_window, parse_group, relhyp_ball_decompose, relhyp_metric, separation_audit,
    stratify_words, Amalgam, GraphOfGroups, GroupSubject, RelHypData,
};

const SEED: u64 = 7;
const SHRINK_COUNT: usize = 300;
const UNION_COUNT: usize = 200;
const LEBESGUE_COUNT: usize = 500;
const BOUNDS_COUNT: usize = 500;
const ORACLE_COUNT: usize = 300;
const QI_K_MAX: u64 = 8;
/// minimal domination constants measured on the first run, `{+-1}` over
/// `{+-1,+-2,+-3}` and back
const QI_K_BASELINE: (u64, u64) = (1, 1);
const SEPARATION_RADII: [u64; 2] = [2, 4];

const MINUTE: u64 = 60;
const LIMITS: [(u8, u64); 9] = [
    (1, 2 * MINUTE),
    (2, 5 * MINUTE),
    (3, 10 * MINUTE),
    (4, 10 * MINUTE),
    (5, 15 * MINUTE),
    (6, 5 * MINUTE),
    (7, 5 * MINUTE),
    (8, 10 * MINUTE),
    (9, 10 * MINUTE),
];

/// Checks that cannot hold on this implementation; see the decisions ledger.
const KNOWN_UNATTAINABLE: &[&str] = &["5: Z^2 lambda 1 D 4 on the 7x7 ball: lower bound >= 2"];

struct Criterion {
    id: u8,
    checks: Vec<(String, bool, String)>,
}

impl Criterion {
    fn new(id: u8) -> Self {
        Criterion {
            id,
            checks: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.checks
            .push((format!("{}: {name}", self.id), ok, detail.into()));
    }

    fn suite(&mut self, report: &SuiteReport) {
        let detail = format!(
            "{}/{} passed, {} cross-checked{}",
            report.passed,
            report.count,
            report.cross_checked,
            report
                .failures
                .first()
                .map(|f| format!("; first failure {f}"))
                .unwrap_or_default()
        );
        self.check(
            &format!("{} suite x{}", report.suite, report.count),
            report.pass,
            detail,
        );
    }
}

fn suite(name: &str, count: usize) -> SuiteReport {
    run_suite(name, SEED, count).expect("known suite")
}

fn curve(group: &str, lambdas: &[u64]) -> DimCurve {
    let subject = GroupSubject {
        group: parse_group(group).expect("zoo group"),
    };
    dim_curve(&subject, lambdas, &WindowPolicy::default()).expect("curve")
}

fn all_samples(c: &DimCurve, lower: usize, upper: usize) -> (bool, String) {
    let got: Vec<String> = c
        .samples
        .iter()
        .map(|s| format!("{}:({},{})", s.lambda, opt(s.lower), opt(s.upper)))
        .collect();
    let ok = c
        .samples
        .iter()
        .all(|s| s.lower == Some(lower) && s.upper == Some(upper));
    (ok, got.join(" "))
}

fn opt(v: Option<usize>) -> String {
    v.map_or("-".into(), |v| v.to_string())
}

fn criterion_1() -> Criterion {
    let mut c = Criterion::new(1);
    c.suite(&suite("shrink", SHRINK_COUNT));
    let u = p30_cover();
    let k = 1;
    let lu = u.lebesgue_number().unwrap().value(u.window_diam());
    match shrink(&u, k) {
        Ok((v, cert)) => {
            let lv = v.lebesgue_number().unwrap().value(v.window_diam());
            let km = v.k_multiplicity(Rational::from_integer(k as i64)).unwrap();
            let ok = cert.pass && lv == lu - 2 * k && km <= u.multiplicity().unwrap();
            c.check(
                "P30 shrink hits L(V) = L(U) - 2k",
                ok,
                format!("L(U) {lu}, L(V) {lv}, k-mult {km}"),
            );
        }
        Err(e) => c.check("P30 shrink hits L(V) = L(U) - 2k", false, e.to_string()),
    }
    c
}

fn criterion_2() -> Criterion {
    let mut c = Criterion::new(2);
    let u = p16_cover();
    let id = QuasiIsometryData::identity_with_inverse(u.space.clone());
    match qi_transport(&u, &id, 6) {
        Ok((v, cert)) => c.check(
            "identity transport is exact",
            cert.pass && v.sets == u.sets,
            "sets unchanged",
        ),
        Err(e) => c.check("identity transport is exact", false, e.to_string()),
    }
    match qi_transport(&u, &doubling(16), 2) {
        Ok((v, cert)) => c.check(
            "x -> 2x fixture",
            cert.pass,
            format!(
                "multiplicity {}, mesh {}",
                v.multiplicity().unwrap(),
                v.mesh()
            ),
        ),
        Err(e) => c.check("x -> 2x fixture", false, e.to_string()),
    }
    let lambdas: Vec<u64> = (1..=6).collect();
    let f = curve("z:1", &lambdas);
    let g = curve("z:1,2,3", &lambdas);
    let fg = find_min_k(&f, &g, QI_K_MAX).ok().flatten();
    let gf = find_min_k(&g, &f, QI_K_MAX).ok().flatten();
    c.check(
        &format!("Z curves for two generating sets dominate both ways with k <= {QI_K_MAX}"),
        fg.is_some() && gf.is_some(),
        format!(
            "k = {} and {}",
            opt(fg.map(|k| k as usize)),
            opt(gf.map(|k| k as usize))
        ),
    );
    c.check(
        "domination constants match the recorded baseline",
        (fg, gf) == (Some(QI_K_BASELINE.0), Some(QI_K_BASELINE.1)),
        format!("baseline {:?}", QI_K_BASELINE),
    );
    c
}

fn criterion_3() -> Criterion {
    let mut c = Criterion::new(3);
    let r = suite("union", UNION_COUNT);
    c.suite(&r);
    c.check(
        &format!("finite-union sandwich on windows with <= {SANDWICH_MAX_POINTS} points"),
        r.pass && r.cross_checked > 0,
        format!("{} instances cross-checked with ad_exact", r.cross_checked),
    );
    c
}

fn criterion_4() -> Criterion {
    let mut c = Criterion::new(4);
    let line = z2_on_line(2).unwrap();
    match action_transport(
        &line.orbit,
        &line.stab,
        &line.act,
        line.lambda,
        line.r,
        line.interior_radius,
    ) {
        Ok((out, cert)) => {
            let w = out.restricted_to_window();
            let (m, l) = (w.multiplicity().unwrap(), w.lebesgue_number().unwrap());
            c.check(
                "Z^2 on the line: multiplicity <= 4 and L >= 2 on the interior",
                cert.pass && m <= 4 && l.at_least(2),
                format!(
                    "interior {} points, multiplicity {m}, L {l}",
                    w.window.len()
                ),
            );
        }
        Err(e) => c.check(
            "Z^2 on the line: multiplicity <= 4 and L >= 2 on the interior",
            false,
            e.to_string(),
        ),
    }
    for lambda in [1, 2] {
        let name = format!("Z2*Z3 on its tree: upper bound 1 at lambda {lambda}");
        let f = z2z3_on_tree(lambda).unwrap();
        match action_transport(&f.orbit, &f.stab, &f.act, f.lambda, f.r, f.interior_radius) {
            Ok((out, cert)) => {
                let w = out.restricted_to_window();
                let (m, l) = (w.multiplicity().unwrap(), w.lebesgue_number().unwrap());
                c.check(
                    &name,
                    cert.pass && m <= 2 && l.at_least(lambda),
                    format!("multiplicity {m}, L {l}, mesh {}", w.mesh_units()),
                );
            }
            Err(e) => c.check(&name, false, e.to_string()),
        }
    }
    c
}

/// Multiplicity, Lebesgue >= 1 and mesh of a cover of a graph window,
/// recomputed by brute force.
fn recheck_graph_cover(cover: &Cover, d: u64) -> (usize, bool, bool) {
    let s = &cover.space;
    let w = cover.window.members();
    let mult = w
        .iter()
        .map(|&p| cover.sets.iter().filter(|x| x.contains(p)).count())
        .max()
        .unwrap_or(0);
    let edges_inside = w.iter().all(|&p| {
        w.iter()
            .filter(|&&q| s.units(p, q) == 1)
            .all(|&q| cover.sets.iter().any(|x| x.contains(p) && x.contains(q)))
    });
    let mesh_ok = cover.sets.iter().all(|x| {
        let m: Vec<usize> = x.iter().filter(|p| cover.window.contains(*p)).collect();
        m.iter()
            .all(|&p| m.iter().all(|&q| s.units(p, q) as u64 <= d))
    });
    (mult, edges_inside, mesh_ok)
}

fn criterion_5() -> Criterion {
    let mut c = Criterion::new(5);
    let (ok, got) = all_samples(&curve("z:1", &(1..=6).collect::<Vec<_>>()), 1, 1);
    c.check("Z at lambda 1..6 gives (1,1)", ok, got);
    for g in [
        "trivial",
        "cyclic:2",
        "cyclic:5",
        "cyclic:8",
        "sym:3",
        "product:cyclic:2+cyclic:3",
    ] {
        let (ok, got) = all_samples(&curve(g, &[1, 2, 3, 4]), 0, 0);
        c.check(&format!("{g} gives (0,0)"), ok, got);
    }
    let (ok, got) = all_samples(&curve("f:2", &[1, 2, 3]), 1, 1);
    c.check("F2 at lambda 1..3 gives (1,1)", ok, got);

    let grid = Arc::new(FiniteMetricSpace::grid(&[7, 7]));
    let window = grid.all_points();
    match brick_cover(&grid, 2, 1, 2, &window) {
        Ok(b) => {
            let (m, edges, mesh) = recheck_graph_cover(&b, 4);
            c.check(
                "Z^2 lambda 1 D 4 on the 7x7 ball: brick upper bound 2",
                m <= 3 && edges && mesh,
                format!("brick multiplicity {m}"),
            );
        }
        Err(e) => c.check(
            "Z^2 lambda 1 D 4 on the 7x7 ball: brick upper bound 2",
            false,
            e.to_string(),
        ),
    }
    let exact = ad_exact(&grid, 1, 4, &window).unwrap();
    let (m, edges, mesh) = recheck_graph_cover(&exact.witness, 4);
    c.check(
        "Z^2 lambda 1 D 4 on the 7x7 ball: lower bound >= 2",
        exact.ad >= 2,
        format!(
            "ad_exact = {}; its witness re-checked by brute force: multiplicity {m}, every edge inside a set {edges}, mesh <= 4 {mesh}",
            exact.ad
        ),
    );
    c
}

fn criterion_6() -> Criterion {
    let mut c = Criterion::new(6);
    let cases = [
        (
            "Z*Z",
            GraphOfGroups::Amalgam(Amalgam::free_product(0, 0).unwrap()),
            6,
        ),
        (
            "Z2*Z3",
            GraphOfGroups::Amalgam(Amalgam::free_product(2, 3).unwrap()),
            8,
        ),
    ];
    for (name, gog, radius) in cases {
        let w = cayley_window(&gog.group(), radius, None, 100_000).unwrap();
        match stratify_words(&gog, &w, radius as usize) {
            Ok(s) => {
                let sizes: Vec<usize> = s.strata.iter().map(|k| k.len()).collect();
                let total: usize = sizes.iter().sum();
                let ok = total == w.len() && s.factored == w.len() - sizes[0];
                c.check(
                    &format!("{name} radius {radius}: strata partition and factor through K_j a G"),
                    ok,
                    format!(
                        "{} points, strata {sizes:?}, {} factored",
                        w.len(),
                        s.factored
                    ),
                );
            }
            Err(e) => c.check(
                &format!("{name} radius {radius}: strata"),
                false,
                e.to_string(),
            ),
        }
        for r in SEPARATION_RADII {
            let reports: Vec<_> = (0..=2).map(|j| separation_audit(&gog, &w, j, r)).collect();
            let ok = reports.iter().all(|x| matches!(x, Ok(rep) if rep.pass));
            let detail = reports
                .iter()
                .map(|x| match x {
                    Ok(rep) => format!(
                        "j{} {} cosets, {} pairs",
                        rep.j, rep.cosets, rep.pairs_checked
                    ),
                    Err(e) => e.to_string(),
                })
                .collect::<Vec<_>>()
                .join("; ");
            c.check(
                &format!("{name} radius {radius}: separation audit at r = {r}"),
                ok,
                detail,
            );
        }
    }
    c
}

fn criterion_7() -> Criterion {
    let mut c = Criterion::new(7);
    let rh = RelHypData::parse("relhyp:f2|a").unwrap();
    let w = cayley_window(&rh.group, 6, None, 100_000).unwrap();
    let rel = relhyp_metric(&rh, &w).unwrap();
    let n = w.len();
    let below = (0..n).all(|i| (0..n).all(|j| rel.units(i, j) <= w.space.units(i, j)));
    c.check("d_{S u H} <= d_S pointwise", below, format!("{n} points"));
    let g = rh.group.as_ref();
    let word: Vec<usize> = "aabaaa"
        .chars()
        .map(|ch| {
            g.generators()
                .iter()
                .position(|s| *s == ch.to_string())
                .unwrap()
        })
        .collect();
    let x = w.lookup(&g.eval(&word)).unwrap();
    c.check(
        "d_{S u H}(a^2 b a^3, e) = 3",
        rel.units(0, x) == 3,
        format!("{}", rel.units(0, x)),
    );
    match relhyp_ball_decompose(&rh, &w, 2, 2) {
        Ok(d) => {
            c.check(
                "B(2) decomposition covers exactly",
                d.covers_exactly,
                format!("ball {}, union {}", d.ball, d.union),
            );
            let sep: Vec<String> = d
                .cosets
                .iter()
                .map(|k| format!("{} pieces, {}", k.pieces, k.separation))
                .collect();
            c.check(
                "trimmed cosets are 2-separated",
                d.cosets.iter().all(|k| k.disjoint && k.separated),
                sep.join("; "),
            );
        }
        Err(e) => c.check("B(2) decomposition", false, e.to_string()),
    }
    c
}

fn digest_dir(dir: &Path) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                sha256_hex(&std::fs::read(&p).unwrap()),
            )
        })
        .collect();
    out.sort();
    out
}

fn run_cli(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_adgrowth"))
        .args(args)
        .output()
        .expect("run adgrowth")
        .status
        .code()
        .unwrap_or(-1)
}

fn criterion_8() -> Criterion {
    let mut c = Criterion::new(8);
    let tmp = tempfile::tempdir().unwrap();
    let cover_path = tmp.path().join("p30.json");
    std::fs::write(
        &cover_path,
        adgrowth::io::to_json(&adgrowth::io::CoverDoc::from_cover(&p30_cover())).unwrap(),
    )
    .unwrap();
    let runs: Vec<(&str, Vec<String>)> = vec![
        (
            "adcurve",
            vec!["adcurve", "--group", "z:1", "--lambdas", "1..6"]
                .into_iter()
                .map(String::from)
                .collect(),
        ),
        (
            "adcurve-f2",
            vec!["adcurve", "--group", "f:2", "--lambdas", "1..3"]
                .into_iter()
                .map(String::from)
                .collect(),
        ),
        (
            "combine-shrink",
            vec![
                "combine".into(),
                "shrink".into(),
                "--input".into(),
                cover_path.display().to_string(),
                "--k".into(),
                "1".into(),
            ],
        ),
        (
            "combine-action",
            vec!["combine", "action", "--fixture", "z2-line", "--lambda", "2"]
                .into_iter()
                .map(String::from)
                .collect(),
        ),
    ];
    for (name, args) in runs {
        let mut digests = Vec::new();
        for rep in 0..2 {
            let dir = tmp.path().join(format!("{name}-{rep}"));
            let mut a: Vec<String> = args.clone();
            a.push("--out".into());
            a.push(dir.display().to_string());
            let refs: Vec<&str> = a.iter().map(String::as_str).collect();
            let code = run_cli(&refs);
            digests.push((code, digest_dir(&dir)));
        }
        let same = digests[0] == digests[1] && digests[0].0 == 0 && !digests[0].1.is_empty();
        c.check(
            &format!("{name} outputs are byte-identical across runs"),
            same,
            format!("{} files", digests[0].1.len()),
        );
    }
    for (name, count) in [
        ("shrink", SHRINK_COUNT),
        ("union", UNION_COUNT),
        ("lebesgue", LEBESGUE_COUNT),
    ] {
        let a = serde_json::to_vec(&suite(name, count)).unwrap();
        let b = serde_json::to_vec(&suite(name, count)).unwrap();
        c.check(
            &format!("{name} suite report is byte-identical across runs"),
            sha256_hex(&a) == sha256_hex(&b),
            sha256_hex(&a)[..16].to_string(),
        );
    }
    c
}

fn criterion_9() -> Criterion {
    let mut c = Criterion::new(9);
    c.suite(&suite("lebesgue", LEBESGUE_COUNT));
    c.suite(&suite("bounds", BOUNDS_COUNT));
    let r = suite("exact-oracle", ORACLE_COUNT);
    c.suite(&r);
    c.check(
        &format!("ad_exact matches the exhaustive reference on every instance with <= {ORACLE_MAX_POINTS} points"),
        r.pass && r.cross_checked > 0,
        format!("{} instances compared", r.cross_checked),
    );
    c
}

fn main() {
    let criteria: [(u8, fn() -> Criterion); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failing = BTreeSet::new();
    for (id, run) in criteria {
        let start = Instant::now();
        let mut c = run();
        let elapsed = start.elapsed();
        let limit = Duration::from_secs(LIMITS.iter().find(|(i, _)| *i == id).unwrap().1);
        c.check(
            &format!("runtime under {}s", limit.as_secs()),
            elapsed <= limit,
            format!("{:.1}s", elapsed.as_secs_f64()),
        );
        let pass = c.checks.iter().all(|(_, ok, _)| *ok);
        println!(
            "criterion {id}: {} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        for (name, ok, detail) in &c.checks {
            println!("    [{}] {name}: {detail}", if *ok { "ok" } else { "FAIL" });
            if !ok {
                failing.insert(name.clone());
            }
        }
    }
    let known: BTreeSet<String> = KNOWN_UNATTAINABLE.iter().map(|s| s.to_string()).collect();
    let unexpected: Vec<&String> = failing.difference(&known).collect();
    let recovered: Vec<&String> = known.difference(&failing).collect();
    println!(
        "acceptance: {} failing check(s), {} known unattainable",
        failing.len(),
        known.intersection(&failing).count()
    );
    if !unexpected.is_empty() || !recovered.is_empty() {
        println!(
            "unexpected failures: {unexpected:?}; known failures that now pass: {recovered:?}"
        );
        std::process::exit(1);
    }
}
