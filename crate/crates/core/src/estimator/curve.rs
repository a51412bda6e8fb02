//! Sampled dimension curves and the growth preorder on them.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ad_bounds, DEFAULT_SEARCH_BUDGET};
use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, PointSet, Rational};

/// How windows are sized for a sample at scale `lambda`:
/// `D = d_mul * lambda`, `R = r_mul * D`, statistics on `B_{R-D}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPolicy {
    pub d_mul: u64,
    pub r_mul: u64,
    /// largest ambient ball the subject may build
    pub max_points: usize,
    pub search_budget: u64,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy {
            d_mul: 4,
            r_mul: 5,
            max_points: 5000,
            search_budget: DEFAULT_SEARCH_BUDGET,
        }
    }
}

impl WindowPolicy {
    pub fn check(&self) -> Result<()> {
        if self.d_mul < 1 || self.r_mul < 2 || self.max_points == 0 || self.search_budget == 0 {
            return Err(Error::invalid(
                "window policy needs d_mul >= 1, r_mul >= 2 and positive budgets",
            ));
        }
        Ok(())
    }

    pub fn diameter(&self, lambda: u64) -> u64 {
        self.d_mul * lambda
    }

    pub fn radius(&self, lambda: u64) -> u64 {
        self.r_mul * self.diameter(lambda)
    }
}

/// Something that can produce balls about a basepoint.
pub trait Subject: Sync {
    fn describe(&self) -> String;

    /// Ball of radius at most `radius` about the basepoint (which the
    /// returned space carries), shrunk if it would exceed `max_points`.
    /// Returns the radius actually used.
    fn ball(&self, radius: u64, max_points: usize) -> Result<(Arc<FiniteMetricSpace>, u64)>;

    /// Subject-specific covers worth trying as upper-bound witnesses.
    fn witnesses(
        &self,
        _space: &Arc<FiniteMetricSpace>,
        _window: &PointSet,
        _lambda: u64,
        _d: u64,
    ) -> Vec<(String, Cover)> {
        Vec::new()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub lambda: u64,
    /// `None` marks a gap
    pub lower: Option<usize>,
    pub upper: Option<usize>,
    pub d: u64,
    pub r: u64,
    pub method: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimCurve {
    pub subject: String,
    pub policy: WindowPolicy,
    pub samples: Vec<CurveSample>,
}

impl DimCurve {
    /// Curve from bare `(lambda, lower, upper)` triples.
    pub fn from_values(subject: &str, values: &[(u64, usize, usize)]) -> Self {
        DimCurve {
            subject: subject.to_string(),
            policy: WindowPolicy::default(),
            samples: values
                .iter()
                .map(|&(lambda, lower, upper)| CurveSample {
                    lambda,
                    lower: Some(lower),
                    upper: Some(upper),
                    d: 0,
                    r: 0,
                    method: "given".into(),
                    seconds: 0.0,
                })
                .collect(),
        }
    }

    pub fn check(&self) -> Result<()> {
        for w in self.samples.windows(2) {
            if w[0].lambda >= w[1].lambda {
                return Err(Error::invalid(
                    "curve samples must have strictly increasing lambda",
                ));
            }
        }
        for s in &self.samples {
            if let (Some(l), Some(u)) = (s.lower, s.upper) {
                if l > u {
                    return Err(Error::invalid(format!(
                        "lower {l} exceeds upper {u} at lambda {}",
                        s.lambda
                    )));
                }
            }
        }
        Ok(())
    }

    /// Samples restricted to `lambda <= max`.
    pub fn truncated(&self, max: u64) -> DimCurve {
        DimCurve {
            samples: self
                .samples
                .iter()
                .filter(|s| s.lambda <= max)
                .cloned()
                .collect(),
            ..self.clone()
        }
    }
}

fn sample(subject: &dyn Subject, lambda: u64, policy: &WindowPolicy) -> CurveSample {
    let start = Instant::now();
    let d = policy.diameter(lambda);
    let r = policy.radius(lambda);
    let mut out = CurveSample {
        lambda,
        lower: None,
        upper: None,
        d,
        r,
        method: String::new(),
        seconds: 0.0,
    };
    let result = subject
        .ball(r, policy.max_points)
        .and_then(|(space, used)| {
            let base = space
                .basepoint()
                .ok_or_else(|| Error::invalid("subject ball has no basepoint"))?;
            let (window, capped) = if used >= r {
                (
                    space.ball(base, Rational::from_integer((r - d) as i64)),
                    false,
                )
            } else {
                (space.all_points(), true)
            };
            let extra = subject.witnesses(&space, &window, lambda, d);
            let b = ad_bounds(&space, lambda, d, &window, extra, policy.search_budget)?;
            let mut method = b.method();
            if capped {
                method.push_str(&format!(";window-capped:R={used}"));
            }
            Ok((b.lower, b.upper, method))
        });
    match result {
        Ok((lower, upper, method)) => {
            out.lower = Some(lower);
            out.upper = Some(upper);
            out.method = method;
        }
        Err(e) => {
            out.method = format!("gap:{}", e.to_string().split(':').next().unwrap_or("error"))
        }
    }
    out.seconds = start.elapsed().as_secs_f64();
    out
}

/// Certified samples at each `lambda`, computed in parallel; errors become
/// gaps in the curve rather than aborting it.
pub fn dim_curve(
    subject: &dyn Subject,
    lambdas: &[u64],
    policy: &WindowPolicy,
) -> Result<DimCurve> {
    policy.check()?;
    if lambdas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("lambda samples must be strictly increasing"));
    }
    let samples = lambdas
        .par_iter()
        .map(|&l| sample(subject, l, policy))
        .collect();
    Ok(DimCurve {
        subject: subject.describe(),
        policy: policy.clone(),
        samples,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domination {
    pub holds: bool,
    /// first `lambda` of `f` where the inequality fails
    pub witness: Option<u64>,
}

/// Upper value of `g` at `x` as a step function from below: the sample
/// with the largest `lambda <= x`.
fn step_from_below(g: &DimCurve, x: u64) -> Option<usize> {
    g.samples
        .iter()
        .rfind(|s| s.lambda <= x && s.upper.is_some())
        .and_then(|s| s.upper)
}

/// Whether `f(lambda) <= k * g(k*lambda + k) + k` at every sample of `f`,
/// using upper bounds on both sides.
pub fn dominates(f: &DimCurve, g: &DimCurve, k: u64) -> Result<Domination> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    for s in &f.samples {
        let fu = s.upper.ok_or_else(|| {
            Error::InsufficientRange(format!("f has a gap at lambda {}", s.lambda))
        })?;
        let x = k * s.lambda + k;
        let gu = step_from_below(g, x)
            .ok_or_else(|| Error::InsufficientRange(format!("g has no sample at or below {x}")))?;
        if fu as u64 > k * gu as u64 + k {
            return Ok(Domination {
                holds: false,
                witness: Some(s.lambda),
            });
        }
    }
    Ok(Domination {
        holds: true,
        witness: None,
    })
}

/// Least `k` in `1..=k_max` with `dominates(f, g, k)`.
pub fn find_min_k(f: &DimCurve, g: &DimCurve, k_max: u64) -> Result<Option<u64>> {
    if k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    for k in 1..=k_max {
        if dominates(f, g, k)?.holds {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(v: usize) -> DimCurve {
        DimCurve::from_values("const", &(1..=10).map(|l| (l, v, v)).collect::<Vec<_>>())
    }

    #[test]
    fn preorder_examples() {
        let f = constant(2);
        assert!(dominates(&f, &f, 1).unwrap().holds);
        assert_eq!(find_min_k(&f, &f, 4).unwrap(), Some(1));
        assert!(dominates(&constant(2), &constant(0), 2).unwrap().holds);
        assert!(!dominates(&constant(2), &constant(0), 1).unwrap().holds);
        assert_eq!(find_min_k(&constant(5), &constant(0), 10).unwrap(), Some(5));
        assert_eq!(find_min_k(&constant(5), &constant(0), 4).unwrap(), None);
    }

    #[test]
    fn insufficient_range_only_below_first_sample() {
        let f = constant(1);
        let g = DimCurve::from_values("late", &[(5, 1, 1), (6, 1, 1)]);
        assert!(matches!(
            dominates(&f, &g, 1),
            Err(Error::InsufficientRange(_))
        ));
        // beyond g's last sample the step extends
        let g = DimCurve::from_values("short", &[(1, 1, 1), (2, 1, 1)]);
        assert!(dominates(&f, &g, 1).unwrap().holds);
    }

    #[test]
    fn growing_curves() {
        let f = DimCurve::from_values(
            "lin",
            &(1..=6).map(|l| (l, 0, l as usize)).collect::<Vec<_>>(),
        );
        let g = DimCurve::from_values(
            "lin2",
            &(1..=30).map(|l| (l, 0, l as usize / 2)).collect::<Vec<_>>(),
        );
        let d = dominates(&f, &g, 1).unwrap();
        assert_eq!((d.holds, d.witness), (false, Some(4)));
        assert_eq!(find_min_k(&f, &g, 8).unwrap(), Some(2));
    }
}
