//! Versioned JSON documents and CSV curve output.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::estimator::CurveSample;
use crate::estimator::DimCurve;
use crate::metric::{FiniteMetricSpace, PointSet, QuasiIsometryData, Rational};
use crate::transport::{TransportCertificate, UniformFamily};

pub const METRIC_SCHEMA: &str = "adgrowth.metric/1";
pub const COVER_SCHEMA: &str = "adgrowth.cover/1";
pub const CERTIFICATE_SCHEMA: &str = "adgrowth.certificate/1";
pub const CURVE_SCHEMA: &str = "adgrowth.curve/1";
pub const MANIFEST_SCHEMA: &str = "adgrowth.manifest/1";
pub const QI_SCHEMA: &str = "adgrowth.qi/1";
pub const UNION_SCHEMA: &str = "adgrowth.union/1";
pub const VERDICT_SCHEMA: &str = "adgrowth.verdict/1";

fn check_schema(found: &str, want: &str) -> Result<()> {
    if found == want {
        return Ok(());
    }
    let family = want.split('/').next().unwrap_or(want);
    if found.split('/').next() == Some(family) {
        Err(Error::invalid(format!(
            "unsupported {family} version {found:?}; this build reads {want:?}"
        )))
    } else {
        Err(Error::invalid(format!(
            "expected a {want:?} document, found {found:?}"
        )))
    }
}

/// A metric given either as a matrix of numerators over `scale` or as an
/// unweighted graph on `n` vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricDoc {
    pub schema: String,
    #[serde(default = "one")]
    pub scale: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<usize>,
}

fn one() -> i64 {
    1
}

impl MetricDoc {
    pub fn from_space(space: &FiniteMetricSpace) -> Self {
        MetricDoc {
            schema: METRIC_SCHEMA.into(),
            scale: space.scale(),
            distances: Some((0..space.len()).map(|x| space.row(x).to_vec()).collect()),
            n: None,
            edges: None,
            labels: space.labels().map(|l| l.to_vec()),
            basepoint: space.basepoint(),
        }
    }

    pub fn to_space(&self) -> Result<FiniteMetricSpace> {
        check_schema(&self.schema, METRIC_SCHEMA)?;
        if self.scale < 1 {
            return Err(Error::InvalidMetric("scale must be positive".into()));
        }
        let space = match (&self.distances, self.n, &self.edges) {
            (Some(rows), None, None) => {
                let rational: Vec<Vec<Rational>> = rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|&d| Rational::new(d as i64, self.scale))
                            .collect()
                    })
                    .collect();
                FiniteMetricSpace::from_rational_matrix(&rational)?
            }
            (None, Some(n), Some(edges)) => FiniteMetricSpace::from_graph(n, edges)?,
            _ => {
                return Err(Error::InvalidMetric(
                    "give either \"distances\" or both \"n\" and \"edges\"".into(),
                ))
            }
        };
        let n = space.len();
        let space = match &self.labels {
            Some(l) if l.len() != n => {
                return Err(Error::InvalidMetric(format!(
                    "{} labels for {n} points",
                    l.len()
                )))
            }
            Some(l) => space.with_labels(l.clone()),
            None => space,
        };
        Ok(match self.basepoint {
            Some(b) if b >= n => {
                return Err(Error::InvalidMetric(format!("basepoint {b} out of range")))
            }
            Some(b) => space.with_basepoint(b),
            None => space,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverDoc {
    pub schema: String,
    pub metric: MetricDoc,
    pub sets: Vec<Vec<usize>>,
    /// defaults to the whole space
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Vec<usize>>,
}

impl CoverDoc {
    pub fn from_cover(cover: &Cover) -> Self {
        let whole = cover.window.len() == cover.space.len();
        CoverDoc {
            schema: COVER_SCHEMA.into(),
            metric: MetricDoc::from_space(&cover.space),
            sets: cover.sets.iter().map(|s| s.members().to_vec()).collect(),
            window: (!whole).then(|| cover.window.members().to_vec()),
        }
    }

    pub fn to_cover(&self) -> Result<Cover> {
        check_schema(&self.schema, COVER_SCHEMA)?;
        let space = Arc::new(self.metric.to_space()?);
        let n = space.len();
        let in_range = |v: &[usize]| v.iter().all(|&p| p < n);
        if !self.sets.iter().all(|s| in_range(s)) || !self.window.as_deref().is_none_or(in_range) {
            return Err(Error::invalid(format!(
                "cover mentions a point outside 0..{n}"
            )));
        }
        let sets = self
            .sets
            .iter()
            .map(|s| PointSet::new(s.iter().copied()))
            .collect();
        Ok(match &self.window {
            Some(w) => Cover::new(space, sets, PointSet::new(w.iter().copied())),
            None => Cover::of_space(space, sets),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub schema: String,
    #[serde(flatten)]
    pub certificate: TransportCertificate,
}

impl From<TransportCertificate> for CertificateDoc {
    fn from(certificate: TransportCertificate) -> Self {
        CertificateDoc {
            schema: CERTIFICATE_SCHEMA.into(),
            certificate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveDoc {
    pub schema: String,
    #[serde(flatten)]
    pub curve: DimCurve,
}

impl CurveDoc {
    pub fn new(curve: DimCurve) -> Self {
        CurveDoc {
            schema: CURVE_SCHEMA.into(),
            curve,
        }
    }

    pub fn into_curve(self) -> Result<DimCurve> {
        check_schema(&self.schema, CURVE_SCHEMA)?;
        self.curve.check()?;
        Ok(self.curve)
    }
}

/// One direction of a quasi-isometry: `map[i]` is the image of source
/// point `i`; constants are decimal or `p/q` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QiMapDoc {
    pub map: Vec<usize>,
    pub alpha: String,
    pub epsilon: String,
    pub c: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QiDoc {
    pub schema: String,
    pub target: MetricDoc,
    pub forward: QiMapDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<QiMapDoc>,
}

fn rational(text: &str) -> Result<Rational> {
    let bad = || Error::invalid(format!("not a rational constant: {text:?}"));
    let (p, q) = text.trim().split_once('/').unwrap_or((text.trim(), "1"));
    let p: i64 = p.trim().parse().map_err(|_| bad())?;
    let q: i64 = q.trim().parse().map_err(|_| bad())?;
    if q <= 0 {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

impl QiDoc {
    pub fn from_data(q: &QuasiIsometryData) -> Self {
        let dir = |q: &QuasiIsometryData| QiMapDoc {
            map: q.map.clone(),
            alpha: q.alpha.to_string(),
            epsilon: q.epsilon.to_string(),
            c: q.c.to_string(),
        };
        QiDoc {
            schema: QI_SCHEMA.into(),
            target: MetricDoc::from_space(&q.target),
            forward: dir(q),
            inverse: q.quasi_inverse.as_deref().map(dir),
        }
    }

    /// Quasi-isometry out of `source`.
    pub fn to_data(&self, source: Arc<FiniteMetricSpace>) -> Result<QuasiIsometryData> {
        check_schema(&self.schema, QI_SCHEMA)?;
        let target = Arc::new(self.target.to_space()?);
        let dir = |m: &QiMapDoc,
                   from: &Arc<FiniteMetricSpace>,
                   to: &Arc<FiniteMetricSpace>|
         -> Result<QuasiIsometryData> {
            if m.map.len() != from.len() || m.map.iter().any(|&y| y >= to.len()) {
                return Err(Error::invalid(format!(
                    "map must send {} points into 0..{}",
                    from.len(),
                    to.len()
                )));
            }
            Ok(QuasiIsometryData {
                source: from.clone(),
                target: to.clone(),
                map: m.map.clone(),
                alpha: rational(&m.alpha)?,
                epsilon: rational(&m.epsilon)?,
                c: rational(&m.c)?,
                quasi_inverse: None,
            })
        };
        let mut q = dir(&self.forward, &source, &target)?;
        if let Some(inv) = &self.inverse {
            q.quasi_inverse = Some(Box::new(dir(inv, &target, &source)?));
        }
        Ok(q)
    }
}

/// A region with a cover of it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionDoc {
    pub region: Vec<usize>,
    pub sets: Vec<Vec<usize>>,
}

/// Input of the union transport: regions `X_a` with uniform covers and a
/// cover of `Y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnionDoc {
    pub schema: String,
    pub metric: MetricDoc,
    pub lambda: u64,
    pub mesh_bound: u64,
    pub multiplicity: usize,
    pub members: Vec<RegionDoc>,
    pub y: RegionDoc,
}

impl UnionDoc {
    pub fn to_inputs(&self) -> Result<(UniformFamily, Cover)> {
        check_schema(&self.schema, UNION_SCHEMA)?;
        let space = Arc::new(self.metric.to_space()?);
        let n = space.len();
        let cover = |r: &RegionDoc| -> Result<(PointSet, Cover)> {
            if r.region
                .iter()
                .chain(r.sets.iter().flatten())
                .any(|&p| p >= n)
            {
                return Err(Error::invalid(format!(
                    "region mentions a point outside 0..{n}"
                )));
            }
            let region = PointSet::new(r.region.iter().copied());
            let sets = r
                .sets
                .iter()
                .map(|s| PointSet::new(s.iter().copied()))
                .collect();
            Ok((region.clone(), Cover::new(space.clone(), sets, region)))
        };
        let members = self.members.iter().map(cover).collect::<Result<Vec<_>>>()?;
        let family = UniformFamily::new(members, self.mesh_bound, self.lambda, self.multiplicity)?;
        Ok((family, cover(&self.y)?.1))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepTiming {
    pub step: String,
    /// `None` unless timings were requested
    pub seconds: Option<f64>,
}

/// Written last: what was run, how, and digests of every other output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub steps: Vec<StepTiming>,
    pub certificates: Vec<CertificateSummary>,
    pub files: Vec<FileDigest>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub op: String,
    pub pass: bool,
}

impl Manifest {
    pub fn check(&self) -> Result<()> {
        check_schema(&self.schema, MANIFEST_SCHEMA)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub schema: String,
    pub f: String,
    pub g: String,
    pub k_max: u64,
    /// `dominated`, `not-dominated` or `insufficient-range`
    pub verdict: String,
    pub k: Option<u64>,
    pub detail: String,
}

/// Reads a curve from CSV (as written by [`curve_csv`]) or from curve JSON.
pub fn read_curve(path: &Path) -> Result<DimCurve> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        let doc: CurveDoc = serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        return doc.into_curve();
    }
    parse_curve_csv(&text, &path.display().to_string())
}

pub fn parse_curve_csv(text: &str, subject: &str) -> Result<DimCurve> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    if header != ["lambda", "lower", "upper", "D", "R", "method", "seconds"] {
        return Err(Error::invalid(format!(
            "unexpected curve columns {header:?}"
        )));
    }
    let int = |field: &str, what: &str| -> Result<u64> {
        field
            .parse()
            .map_err(|_| Error::invalid(format!("bad {what} {field:?}")))
    };
    let opt = |field: &str, what: &str| -> Result<Option<usize>> {
        if field.is_empty() {
            Ok(None)
        } else {
            int(field, what).map(|v| Some(v as usize))
        }
    };
    let mut samples = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err)?;
        samples.push(CurveSample {
            lambda: int(&row[0], "lambda")?,
            lower: opt(&row[1], "lower")?,
            upper: opt(&row[2], "upper")?,
            d: int(&row[3], "D")?,
            r: int(&row[4], "R")?,
            method: row[5].to_string(),
            seconds: if row[6].is_empty() {
                0.0
            } else {
                row[6]
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad seconds {:?}", &row[6])))?
            },
        });
    }
    let curve = DimCurve {
        subject: subject.to_string(),
        policy: Default::default(),
        samples,
    };
    curve.check()?;
    Ok(curve)
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid(format!("curve csv: {e}"))
}

/// `lambda,lower,upper,D,R,method,seconds`; gaps leave bounds empty and
/// `seconds` stays empty unless `timings` is set, so that outputs are
/// reproducible byte for byte.
pub fn curve_csv(curve: &DimCurve, timings: bool) -> String {
    let mut out = String::from("lambda,lower,upper,D,R,method,seconds\n");
    let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
    for s in &curve.samples {
        let secs = if timings {
            format!("{:.3}", s.seconds)
        } else {
            String::new()
        };
        let method = if s.method.contains(',') {
            format!("\"{}\"", s.method)
        } else {
            s.method.clone()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.lambda,
            opt(s.lower),
            opt(s.upper),
            s.d,
            s.r,
            method,
            secs
        );
    }
    out
}

/// Curve JSON with timings zeroed unless requested.
pub fn curve_json(curve: &DimCurve, timings: bool) -> Result<String> {
    let mut c = curve.clone();
    if !timings {
        c.samples.iter_mut().for_each(|s| s.seconds = 0.0);
    }
    Ok(serde_json::to_string_pretty(&CurveDoc::new(c))? + "\n")
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
