use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use adgrowth::cover::Cover;
use adgrowth::fixtures::p30_cover;
use adgrowth::io::{
    self, CertificateDoc, CoverDoc, CurveDoc, Manifest, MetricDoc, RegionDoc, UnionDoc, Verdict,
    UNION_SCHEMA,
};
use adgrowth::metric::{FiniteMetricSpace, PointSet};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adgrowth"))
        .args(args)
        .env_remove("ADGROWTH_MAX_BUDGET")
        .env_remove("ADGROWTH_MAX_POINTS")
        .output()
        .expect("spawn adgrowth")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn manifest(dir: &Path) -> Manifest {
    let m: Manifest = io::read_json(&dir.join("manifest.json")).unwrap();
    m.check().unwrap();
    for f in &m.files {
        let bytes = std::fs::read(dir.join(&f.path)).unwrap();
        assert_eq!(io::sha256_hex(&bytes), f.sha256, "digest of {}", f.path);
    }
    m
}

fn values(dir: &Path) -> Vec<(u64, Option<usize>, Option<usize>)> {
    let doc: CurveDoc = io::read_json(&dir.join("curve.json")).unwrap();
    let curve = doc.into_curve().unwrap();
    let from_csv = io::read_curve(&dir.join("curve.csv")).unwrap();
    assert_eq!(curve.samples.len(), from_csv.samples.len());
    curve
        .samples
        .iter()
        .map(|s| (s.lambda, s.lower, s.upper))
        .collect()
}

#[test]
fn adcurve_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "adcurve",
        "--group",
        "z:1",
        "--lambdas",
        "1..6",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("lambda,lower,upper"));
    let v = values(dir.path());
    assert_eq!(v.len(), 6);
    assert!(
        v.iter().all(|&(_, lo, up)| lo == Some(1) && up == Some(1)),
        "{v:?}"
    );
    let m = manifest(dir.path());
    assert_eq!(m.command, "adcurve");
    assert!(m.steps.iter().all(|s| s.seconds.is_none()));
}

#[test]
fn adcurve_trivial_group() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "adcurve",
        "--group",
        "trivial",
        "--lambdas",
        "1..4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(values(dir.path())
        .iter()
        .all(|&(_, lo, up)| lo == Some(0) && up == Some(0)));
    manifest(dir.path());
}

#[test]
fn adcurve_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        code(&run(&[
            "adcurve",
            "--group",
            "nonsense:7",
            "--lambdas",
            "1",
            "--out",
            out
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "adcurve",
            "--group",
            "z:1",
            "--lambdas",
            "3,2",
            "--out",
            out
        ])),
        2
    );
    assert_eq!(code(&run(&["adcurve", "--lambdas", "1", "--out", out])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(
            "group = \"trivial\"\nlambdas = [1, 2]\nseed = 3\nout = {:?}\n",
            out
        ),
    )
    .unwrap();
    let o = run(&[
        "adcurve",
        "--config",
        cfg.to_str().unwrap(),
        "--lambdas",
        "4",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m.config["group"], "trivial");
    assert_eq!(m.config["lambdas"], serde_json::json!([4]));
    assert_eq!(m.config["seed"], 3);

    std::fs::write(&cfg, "group = \"trivial\"\nlambda = 2\n").unwrap();
    let o = run(&["adcurve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("lambda"), "{}", stderr(&o));
}

#[test]
fn budget_ceiling_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_adgrowth"))
        .args([
            "adcurve",
            "--group",
            "trivial",
            "--lambdas",
            "1",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .env("ADGROWTH_MAX_BUDGET", "1000")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("ADGROWTH_MAX_BUDGET"));
    assert_eq!(manifest(dir.path()).config["policy"]["search_budget"], 1000);
}

fn combine_outputs(dir: &Path) -> (Cover, CertificateDoc) {
    let m = manifest(dir);
    assert_eq!(m.certificates.len(), 1);
    let cover = io::read_json::<CoverDoc>(&dir.join("cover.json"))
        .unwrap()
        .to_cover()
        .unwrap();
    let cert: CertificateDoc = io::read_json(&dir.join("certificate.json")).unwrap();
    assert_eq!(cert.certificate.pass, m.certificates[0].pass);
    (cover, cert)
}

#[test]
fn combine_shrink_p30() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("p30.json");
    std::fs::write(
        &input,
        io::to_json(&CoverDoc::from_cover(&p30_cover())).unwrap(),
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "combine",
        "shrink",
        "--input",
        input.to_str().unwrap(),
        "--k",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("certificate pass"));
    let (cover, cert) = combine_outputs(&out);
    assert!(cert.certificate.pass);
    assert_eq!(cover.sets.len(), 2);
    assert_eq!(cover.lebesgue_number().unwrap().value(29), 3);

    let o = run(&[
        "combine",
        "shrink",
        "--input",
        input.to_str().unwrap(),
        "--k",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3, "4k above the Lebesgue number is refused");
}

/// Strip `a..=b` of a path cut into intervals of diameter 4 stepping 3.
fn strip(a: usize, b: usize) -> RegionDoc {
    RegionDoc {
        region: (a..=b).collect(),
        sets: (a..b)
            .step_by(3)
            .map(|s| (s..=(s + 4).min(b)).collect())
            .collect(),
    }
}

fn union_doc(members: Vec<RegionDoc>, y: RegionDoc) -> UnionDoc {
    UnionDoc {
        schema: UNION_SCHEMA.into(),
        metric: MetricDoc::from_space(&FiniteMetricSpace::path(40)),
        lambda: 1,
        mesh_bound: 4,
        multiplicity: 2,
        members,
        y,
    }
}

#[test]
fn combine_union() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("union.json");
    let out = dir.path().join("out");
    let doc = union_doc(vec![strip(0, 14), strip(21, 39)], strip(10, 25));
    std::fs::write(&input, io::to_json(&doc).unwrap()).unwrap();
    let o = run(&[
        "combine",
        "union",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let (cover, cert) = combine_outputs(&out);
    assert!(cert.certificate.pass);
    assert_eq!(cover.window, PointSet::range(0..40));

    let doc = union_doc(vec![strip(0, 14), strip(16, 39)], strip(10, 14));
    std::fs::write(&input, io::to_json(&doc).unwrap()).unwrap();
    let o = run(&[
        "combine",
        "union",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("3B"), "{}", stderr(&o));
}

#[test]
fn combine_action_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&[
        "combine",
        "action",
        "--fixture",
        "z2-line",
        "--lambda",
        "2",
        "--out",
        out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (_, cert) = combine_outputs(dir.path());
    assert!(cert.certificate.pass);
    assert_eq!(
        code(&run(&[
            "combine",
            "action",
            "--fixture",
            "z2-line",
            "--lambda",
            "3",
            "--out",
            out
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "combine",
            "action",
            "--fixture",
            "nope",
            "--lambda",
            "1",
            "--out",
            out
        ])),
        2
    );
}

#[test]
fn combine_qi_doubling() {
    let dir = tempfile::tempdir().unwrap();
    let q = adgrowth::fixtures::doubling(16);
    let cover = Cover::of_space(
        Arc::new(FiniteMetricSpace::path(16)),
        vec![PointSet::range(0..10), PointSet::range(3..16)],
    );
    let input = dir.path().join("cover.json");
    let map = dir.path().join("qi.json");
    std::fs::write(&input, io::to_json(&CoverDoc::from_cover(&cover)).unwrap()).unwrap();
    std::fs::write(&map, io::to_json(&io::QiDoc::from_data(&q)).unwrap()).unwrap();
    let out = dir.path().join("out");
    let args = |lambda: &'static str| {
        run(&[
            "combine",
            "qi",
            "--input",
            input.to_str().unwrap(),
            "--map",
            map.to_str().unwrap(),
            "--lambda",
            lambda,
            "--out",
            out.to_str().unwrap(),
        ])
    };
    let o = args("2");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (pushed, cert) = combine_outputs(&out);
    assert!(cert.certificate.pass);
    assert_eq!(pushed.space.len(), 16);
    assert_eq!(code(&args("9")), 3);
}

#[test]
fn verify_suites() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let o = run(&[
        "verify",
        "shrink",
        "--count",
        "300",
        "--seed",
        "7",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let report: serde_json::Value = io::read_json(&json).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["passed"], 300);

    let o = run(&["verify", "metric-duality", "--count", "500"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("500/500"));

    let o = run(&["verify", "no-such-suite"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("known"));
}

fn write_csv(dir: &Path, name: &str, rows: &[(u64, usize)]) -> String {
    let mut text = String::from("lambda,lower,upper,D,R,method,seconds\n");
    for &(l, v) in rows {
        text += &format!("{l},{v},{v},{},{},test,\n", 4 * l, 20 * l);
    }
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn dominate_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_csv(dir.path(), "f.csv", &[(1, 1), (2, 1), (3, 1)]);
    let json = dir.path().join("v.json");
    let o = run(&["dominate", &f, &f, "--json", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("minimal k = 1"));
    let v: Verdict = io::read_json(&json).unwrap();
    assert_eq!((v.verdict.as_str(), v.k), ("dominated", Some(1)));

    let big = write_csv(dir.path(), "big.csv", &[(1, 9), (2, 9), (3, 9)]);
    let zero = write_csv(dir.path(), "zero.csv", &[(1, 0), (2, 0), (3, 0), (50, 0)]);
    let o = run(&["dominate", &big, &zero, "--k-max", "8"]);
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).contains("minimal k = 9")
            || stdout(&o).contains("not dominated within k_max = 8")
    );

    let late = write_csv(dir.path(), "late.csv", &[(10, 1)]);
    let o = run(&["dominate", &f, &late]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("insufficient-range"));
}

#[test]
fn zoo_commands() {
    let o = run(&["zoo", "list"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("z:"));
    let o = run(&["zoo", "ball", "z:1", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: MetricDoc = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc.schema, io::METRIC_SCHEMA);
    assert_eq!(doc.labels.as_ref().map(Vec::len), Some(7));
    assert_eq!(doc.to_space().unwrap().len(), 7);
    let o = run(&["zoo", "ball", "f:2", "6", "--max-points", "10"]);
    assert_ne!(code(&o), 0);
}
