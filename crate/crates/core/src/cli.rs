//! The `adgrowth` command line.
//!
//! Exit codes: 0 success, 1 certificate or property failure, 2 usage or
//! invalid input, 3 unmet precondition, 4 insufficient data.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::estimator::{dim_curve, find_min_k, WindowPolicy, DEFAULT_SEARCH_BUDGET};
use crate::fixtures::{action_fixture, ACTION_FIXTURES};
use crate::io::{
    self, CertificateDoc, CertificateSummary, CoverDoc, FileDigest, Manifest, MetricDoc, QiDoc,
    StepTiming, UnionDoc, Verdict, MANIFEST_SCHEMA, VERDICT_SCHEMA,
};
use crate::transport::{
    action_transport, qi_transport, shrink, union_transport, TransportCertificate,
};
use crate::verify::{run_suite, SUITES};
use crate::zoo::{cayley_window, parse_group, relhyp_metric, zoo_names, GroupSubject, RelHypData};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CERTIFICATE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_INSUFFICIENT: i32 = 4;

/// Ceiling on the branch-and-bound budget of any run.
pub const BUDGET_ENV: &str = "ADGROWTH_MAX_BUDGET";
/// Ceiling on ambient ball sizes.
pub const POINTS_ENV: &str = "ADGROWTH_MAX_POINTS";

#[derive(Debug, Parser)]
#[command(
    name = "adgrowth",
    version,
    about = "Windowed asymptotic dimension curves and certified cover transports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the dimension curve of a group
    Adcurve(AdcurveArgs),
    /// Run a cover transport and certify the result
    Combine {
        #[command(subcommand)]
        op: CombineOp,
    },
    /// Run a fuzzed property suite
    Verify(VerifyArgs),
    /// Least k with f(l) <= k g(k l + k) + k at every sample of f
    Dominate(DominateArgs),
    /// Built-in groups
    Zoo {
        #[command(subcommand)]
        cmd: ZooCmd,
    },
}

#[derive(Debug, Args)]
pub struct AdcurveArgs {
    /// TOML file with any of the keys below; flags win
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub group: Option<String>,
    /// `a..b` (inclusive) or a comma list
    #[arg(long)]
    pub lambdas: Option<String>,
    #[arg(long)]
    pub d_mul: Option<u64>,
    #[arg(long)]
    pub r_mul: Option<u64>,
    #[arg(long)]
    pub max_points: Option<usize>,
    #[arg(long)]
    pub search_budget: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record wall-clock seconds (outputs are then no longer reproducible)
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Subcommand)]
pub enum CombineOp {
    /// Shrink every set to its inner k-neighbourhood
    Shrink {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Push a cover forward along a quasi-isometry
    Qi {
        /// cover of the whole source space
        #[arg(long)]
        input: PathBuf,
        /// quasi-isometry out of the cover's space
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        lambda: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Merge uniform covers of separated regions with a cover of Y
    Union {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Pull orbit and stabilizer covers back to a group window
    Action {
        /// one of z2-line, z2z3-tree
        #[arg(long)]
        fixture: String,
        #[arg(long)]
        lambda: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub suite: String,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report as JSON
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DominateArgs {
    pub f: PathBuf,
    pub g: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub k_max: u64,
    /// Write the verdict as JSON
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ZooCmd {
    List,
    /// Emit a ball of the Cayley graph in the metric schema
    Ball {
        group: String,
        radius: u64,
        #[arg(long, default_value_t = 200_000)]
        max_points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Keys accepted in an `adcurve` config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub group: Option<String>,
    pub lambdas: Option<LambdaSpec>,
    pub d_mul: Option<u64>,
    pub r_mul: Option<u64>,
    pub max_points: Option<usize>,
    pub search_budget: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub timings: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Text(String),
    List(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub group: String,
    pub lambdas: Vec<u64>,
    pub policy: WindowPolicy,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
    pub timings: bool,
}

pub fn parse_lambdas(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::invalid(format!("bad lambda list {text:?}; use a..b or a,b,c"));
    let text = text.trim();
    let list: Vec<u64> = if let Some((a, b)) = text.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b): (u64, u64) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        );
        (a..=b).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    check_lambdas(list)
}

fn check_lambdas(list: Vec<u64>) -> Result<Vec<u64>> {
    if list.is_empty() || list[0] == 0 || list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "lambdas must be positive and strictly increasing",
        ));
    }
    Ok(list)
}

fn env_ceiling(var: &str) -> Result<Option<u64>> {
    match std::env::var(var) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::invalid(format!("{var} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

impl ExperimentConfig {
    /// Defaults, then the config file, then flags, then env ceilings.
    pub fn resolve(args: &AdcurveArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                toml::from_str::<ConfigFile>(&text)
                    .map_err(|e| Error::invalid(format!("{}: {e}", p.display())))?
            }
            None => ConfigFile::default(),
        };
        let group =
            args.group.clone().or(file.group).ok_or_else(|| {
                Error::invalid("no group given (--group or `group` in the config)")
            })?;
        let lambdas = match (&args.lambdas, file.lambdas) {
            (Some(t), _) => parse_lambdas(t)?,
            (None, Some(LambdaSpec::Text(t))) => parse_lambdas(&t)?,
            (None, Some(LambdaSpec::List(l))) => check_lambdas(l)?,
            (None, None) => {
                return Err(Error::invalid(
                    "no lambdas given (--lambdas or `lambdas` in the config)",
                ))
            }
        };
        let defaults = WindowPolicy::default();
        let mut policy = WindowPolicy {
            d_mul: args.d_mul.or(file.d_mul).unwrap_or(defaults.d_mul),
            r_mul: args.r_mul.or(file.r_mul).unwrap_or(defaults.r_mul),
            max_points: args
                .max_points
                .or(file.max_points)
                .unwrap_or(defaults.max_points),
            search_budget: args
                .search_budget
                .or(file.search_budget)
                .unwrap_or(DEFAULT_SEARCH_BUDGET),
        };
        if let Some(cap) = env_ceiling(BUDGET_ENV)? {
            if policy.search_budget > cap {
                eprintln!("note: search budget lowered to {cap} by {BUDGET_ENV}");
                policy.search_budget = cap;
            }
        }
        if let Some(cap) = env_ceiling(POINTS_ENV)? {
            if policy.max_points as u64 > cap {
                eprintln!("note: max points lowered to {cap} by {POINTS_ENV}");
                policy.max_points = cap as usize;
            }
        }
        policy.check()?;
        Ok(ExperimentConfig {
            group,
            lambdas,
            policy,
            seed: args.seed.or(file.seed).unwrap_or(0),
            out: args
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from(".")),
            timings: args.timings || file.timings.unwrap_or(false),
        })
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CertificateFailed { .. } => EXIT_CERTIFICATE,
        Error::InvalidInput(_) | Error::InvalidMetric(_) | Error::Json(_) | Error::Io(_) => {
            EXIT_USAGE
        }
        Error::InsufficientRange(_) => EXIT_INSUFFICIENT,
        _ => EXIT_PRECONDITION,
    }
}

/// Collects output files, then writes them and the manifest (last).
struct Outputs {
    dir: PathBuf,
    command: String,
    timings: bool,
    files: Vec<(String, Vec<u8>)>,
    steps: Vec<StepTiming>,
    certificates: Vec<CertificateSummary>,
}

impl Outputs {
    fn new(dir: &Path, command: &str, timings: bool) -> Self {
        Outputs {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            timings,
            files: Vec::new(),
            steps: Vec::new(),
            certificates: Vec::new(),
        }
    }

    fn step<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f();
        self.steps.push(StepTiming {
            step: name.to_string(),
            seconds: self.timings.then(|| start.elapsed().as_secs_f64()),
        });
        out
    }

    fn add(&mut self, name: &str, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), bytes.into()));
    }

    fn certificate(&mut self, cert: TransportCertificate) -> Result<()> {
        self.certificates.push(CertificateSummary {
            op: cert.op.clone(),
            pass: cert.pass,
        });
        self.add(
            "certificate.json",
            io::to_json(&CertificateDoc::from(cert))?,
        );
        Ok(())
    }

    fn write(self, config: serde_json::Value) -> Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        let mut digests = Vec::new();
        for (name, bytes) in &self.files {
            std::fs::write(self.dir.join(name), bytes)?;
            digests.push(FileDigest {
                path: name.clone(),
                sha256: io::sha256_hex(bytes),
            });
        }
        let manifest = Manifest {
            schema: MANIFEST_SCHEMA.into(),
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command,
            config,
            steps: self.steps,
            certificates: self.certificates,
            files: digests,
        };
        std::fs::write(self.dir.join("manifest.json"), io::to_json(&manifest)?)?;
        Ok(())
    }
}

fn cmd_adcurve(args: &AdcurveArgs) -> Result<i32> {
    let config = ExperimentConfig::resolve(args)?;
    let subject = GroupSubject {
        group: parse_group(&config.group)?,
    };
    let mut out = Outputs::new(&config.out, "adcurve", config.timings);
    let curve = out.step("dim_curve", || {
        dim_curve(&subject, &config.lambdas, &config.policy)
    })?;
    let csv = io::curve_csv(&curve, config.timings);
    print!("{csv}");
    out.add("curve.csv", csv);
    out.add("curve.json", io::curve_json(&curve, config.timings)?);
    let gaps = curve.samples.iter().filter(|s| s.upper.is_none()).count();
    if gaps > 0 {
        eprintln!("note: {gaps} sample(s) are gaps; see the method column");
    }
    out.write(serde_json::to_value(&config)?)?;
    Ok(EXIT_OK)
}

fn read_cover(path: &Path) -> Result<Cover> {
    io::read_json::<CoverDoc>(path)?.to_cover()
}

fn finish_combine(
    mut out: Outputs,
    cover: &Cover,
    cert: TransportCertificate,
    config: serde_json::Value,
) -> Result<i32> {
    let pass = cert.pass;
    out.add("cover.json", io::to_json(&CoverDoc::from_cover(cover))?);
    println!(
        "{}: certificate {}",
        cert.op,
        if pass { "pass" } else { "FAIL" }
    );
    for (c, m) in cert.claimed.iter().zip(&cert.measured) {
        println!("  {:<16} {:<14} claimed {}", m.property, m.value, c.bound);
    }
    out.certificate(cert)?;
    out.write(config)?;
    Ok(if pass { EXIT_OK } else { EXIT_CERTIFICATE })
}

fn cmd_combine(op: &CombineOp) -> Result<i32> {
    match op {
        CombineOp::Shrink { input, k, out } => {
            let cover = read_cover(input)?;
            let mut o = Outputs::new(out, "combine shrink", false);
            let (v, cert) = o.step("shrink", || shrink(&cover, *k))?;
            finish_combine(o, &v, cert, serde_json::json!({ "op": "shrink", "k": k }))
        }
        CombineOp::Qi {
            input,
            map,
            lambda,
            out,
        } => {
            let cover = read_cover(input)?;
            let q = io::read_json::<QiDoc>(map)?.to_data(cover.space.clone())?;
            let mut o = Outputs::new(out, "combine qi", false);
            let (v, cert) = o.step("qi", || qi_transport(&cover, &q, *lambda))?;
            finish_combine(
                o,
                &v,
                cert,
                serde_json::json!({ "op": "qi", "lambda": lambda }),
            )
        }
        CombineOp::Union { input, out } => {
            let doc: UnionDoc = io::read_json(input)?;
            let (family, y) = doc.to_inputs()?;
            let mut o = Outputs::new(out, "combine union", false);
            let (w, cert) = o.step("union", || union_transport(&family, &y, doc.lambda))?;
            finish_combine(
                o,
                &w,
                cert,
                serde_json::json!({ "op": "union", "lambda": doc.lambda }),
            )
        }
        CombineOp::Action {
            fixture,
            lambda,
            out,
        } => {
            let f = action_fixture(fixture, *lambda)?;
            let mut o = Outputs::new(out, "combine action", false);
            let (c, cert) = o.step("action", || {
                action_transport(&f.orbit, &f.stab, &f.act, f.lambda, f.r, f.interior_radius)
            })?;
            let config = serde_json::json!({
                "op": "action",
                "fixture": fixture,
                "known_fixtures": ACTION_FIXTURES,
                "lambda": lambda,
                "R": f.r,
                "interior_radius": f.interior_radius,
            });
            finish_combine(o, &c, cert, config)
        }
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    if !SUITES.contains(&args.suite.as_str()) {
        return Err(Error::invalid(format!(
            "unknown suite {:?}; known: {}",
            args.suite,
            SUITES.join(", ")
        )));
    }
    let report = run_suite(&args.suite, args.seed, args.count)?;
    println!(
        "{} seed {}: {}/{} passed, {} cross-checked: {}",
        report.suite,
        report.seed,
        report.passed,
        report.count,
        report.cross_checked,
        if report.pass { "pass" } else { "FAIL" }
    );
    for f in &report.failures {
        println!("  counterexample: {f}");
    }
    if let Some(p) = &args.json {
        std::fs::write(p, io::to_json(&report)?)?;
    }
    Ok(if report.pass {
        EXIT_OK
    } else {
        EXIT_CERTIFICATE
    })
}

fn cmd_dominate(args: &DominateArgs) -> Result<i32> {
    let f = io::read_curve(&args.f)?;
    let g = io::read_curve(&args.g)?;
    let (verdict, k, detail, code) = match find_min_k(&f, &g, args.k_max) {
        Ok(Some(k)) => ("dominated", Some(k), format!("minimal k = {k}"), EXIT_OK),
        Ok(None) => (
            "not-dominated",
            None,
            format!("not dominated within k_max = {}", args.k_max),
            EXIT_OK,
        ),
        Err(Error::InsufficientRange(d)) => (
            "insufficient-range",
            None,
            format!("insufficient-range: {d}"),
            EXIT_INSUFFICIENT,
        ),
        Err(e) => return Err(e),
    };
    println!("{detail}");
    let v = Verdict {
        schema: VERDICT_SCHEMA.into(),
        f: args.f.display().to_string(),
        g: args.g.display().to_string(),
        k_max: args.k_max,
        verdict: verdict.into(),
        k,
        detail,
    };
    if let Some(p) = &args.json {
        std::fs::write(p, io::to_json(&v)?)?;
    }
    Ok(code)
}

fn cmd_zoo(cmd: &ZooCmd) -> Result<i32> {
    match cmd {
        ZooCmd::List => {
            for (name, about) in zoo_names() {
                println!("{name:<24} {about}");
            }
        }
        ZooCmd::Ball {
            group,
            radius,
            max_points,
            out,
        } => {
            let space = if group.trim().starts_with("relhyp:") {
                let rh = RelHypData::parse(group)?;
                let w = cayley_window(&rh.group, *radius, None, *max_points)?;
                relhyp_metric(&rh, &w)?
            } else {
                cayley_window(&parse_group(group)?, *radius, None, *max_points)?.space
            };
            let text = io::to_json(&MetricDoc::from_space(&space))?;
            match out {
                Some(p) => std::fs::write(p, text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(EXIT_OK)
}

pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Adcurve(a) => cmd_adcurve(a),
        Command::Combine { op } => cmd_combine(op),
        Command::Verify(a) => cmd_verify(a),
        Command::Dominate(a) => cmd_dominate(a),
        Command::Zoo { cmd } => cmd_zoo(cmd),
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
