//! Log-log slopes of oracle calls against accuracy.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::run::{read_rows, AggregateRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Po,
    Lmo,
    Fo,
    Sfo,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Po, Metric::Lmo, Metric::Fo, Metric::Sfo];

    pub fn of(self, row: &AggregateRow) -> f64 {
        match self {
            Metric::Po => row.po_calls,
            Metric::Lmo => row.lmo_calls,
            Metric::Fo => row.fo_calls,
            Metric::Sfo => row.sfo_calls,
        }
    }
}

/// Least-squares line `log(calls) = slope * log(1/eps) + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Sum of squared residuals in log space.
    pub residual: f64,
}

/// Fits `(epsilon, calls)` pairs; `None` with fewer than three points or a
/// single distinct epsilon.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<LineFit> {
    if points.len() < 3 {
        return None;
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|&(e, c)| ((1.0 / e).ln(), c.ln())).collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xy.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    Some(LineFit {
        slope,
        intercept,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopePoint {
    pub epsilon: f64,
    /// Calls at the first row whose gap is at most epsilon.
    pub calls: f64,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flag {
    /// `None` for a flag on the fit as a whole.
    pub epsilon: Option<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSlope {
    pub algorithm: String,
    pub fit: Option<LineFit>,
    pub points: Vec<SlopePoint>,
    pub flagged: Vec<Flag>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeReport {
    pub metric: Metric,
    pub solvers: Vec<SolverSlope>,
}

impl SlopeReport {
    pub fn get(&self, algorithm: &str) -> Option<&SolverSlope> {
        self.solvers.iter().find(|s| s.algorithm == algorithm)
    }
}

/// Slope per algorithm from aggregate rows, counting calls up to the first
/// row with gap at most epsilon.
pub fn fit_slopes(rows: &[AggregateRow], metric: Metric) -> SlopeReport {
    let mut algorithms: Vec<&str> = Vec::new();
    for r in rows {
        if !algorithms.contains(&r.algorithm.as_str()) {
            algorithms.push(&r.algorithm);
        }
    }
    let solvers = algorithms
        .into_iter()
        .map(|alg| {
            let mut epsilons: Vec<f64> = Vec::new();
            for r in rows.iter().filter(|r| r.algorithm == alg) {
                if !epsilons.contains(&r.epsilon) {
                    epsilons.push(r.epsilon);
                }
            }
            let mut points = Vec::new();
            let mut flagged = Vec::new();
            for eps in epsilons {
                let mut series: Vec<&AggregateRow> =
                    rows.iter().filter(|r| r.algorithm == alg && r.epsilon == eps).collect();
                series.sort_by_key(|r| r.k);
                match series.iter().find(|r| r.gap <= eps) {
                    None => flagged.push(Flag {
                        epsilon: Some(eps),
                        reason: "gap never reached epsilon".into(),
                    }),
                    Some(r) if !(metric.of(r) > 0.0) => flagged.push(Flag {
                        epsilon: Some(eps),
                        reason: format!("reached epsilon at step {} with no {metric:?} calls", r.k),
                    }),
                    Some(r) => points.push(SlopePoint {
                        epsilon: eps,
                        calls: metric.of(r),
                        k: r.k,
                    }),
                }
            }
            let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.epsilon, p.calls)).collect();
            let fit = fit_slope(&pairs);
            if fit.is_none() {
                flagged.push(Flag {
                    epsilon: None,
                    reason: format!("{} usable points; at least 3 distinct epsilons needed", pairs.len()),
                });
            }
            SolverSlope {
                algorithm: alg.to_string(),
                fit,
                points,
                flagged,
            }
        })
        .collect();
    SlopeReport { metric, solvers }
}

pub fn fit_slopes_file(path: &Path, metric: Metric) -> Result<SlopeReport> {
    let rows: Vec<AggregateRow> = read_rows(path)?;
    Ok(fit_slopes(&rows, metric))
}
