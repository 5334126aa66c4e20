//! SFO-to-target scaling across target accuracies.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Algorithm;
use crate::error::BenchError;
use crate::run::{CellStatus, ExperimentSummary, TRACE_HEADER};

/// One (solver, eps) cell of the scaling table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub solver: String,
    pub algorithm: Algorithm,
    pub eps: f64,
    pub seeds: usize,
    pub reached: usize,
    /// Median over seeds of the SFO count at the first recorded iteration
    /// with stationarity `<= eps`; seeds that never get there count as
    /// infinite, so `None` means the median itself is unreachable.
    pub median_sfo: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub solver: String,
    pub algorithm: Algorithm,
    /// Least-squares slope `p` of `log SFO` against `log(1/eps)`.
    pub exponent: Option<f64>,
    /// SFO ratio between the smallest and largest eps (two-point case: the
    /// ratio the bands below are stated for).
    pub ratio: Option<f64>,
    pub band: Option<(f64, f64)>,
    pub within_band: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub rows: Vec<ScalingRow>,
    pub fits: Vec<ScalingFit>,
}

/// Declared exponent band for an algorithm, if any: `SFO ~ eps^-p` with `p`
/// near 2 for finite sums and near 3 online. Halving `eps` then multiplies
/// SFO by `2^p`, so the bands are ratios `[2.4, 6.7]` and `[4, 16]`.
pub fn exponent_band(algorithm: Algorithm) -> Option<(f64, f64)> {
    match algorithm {
        Algorithm::Spiderboost | Algorithm::ProxSpiderboost => Some((2.4f64.log2(), 6.7f64.log2())),
        Algorithm::ProxSpiderboostO => Some((2.0, 4.0)),
        _ => None,
    }
}

/// First `sfo` whose stationarity column (`gnorm_eta`, else `gradnorm`) is at
/// most `eps`. Rejects files whose header differs from the trace schema.
pub fn sfo_at_target_from_csv(path: &Path, eps: f64) -> Result<Option<u64>, BenchError> {
    let err = |source| BenchError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    let header: Vec<String> = r
        .headers()
        .map_err(err)?
        .iter()
        .map(str::to_string)
        .collect();
    if header != TRACE_HEADER {
        return Err(BenchError::Schema {
            path: path.display().to_string(),
            message: format!("header {header:?}"),
        });
    }
    let parse = |s: &str| -> Option<f64> {
        if s.is_empty() {
            None
        } else {
            s.parse().ok()
        }
    };
    for rec in r.records() {
        let rec = rec.map_err(err)?;
        let stat = parse(&rec[6]).or_else(|| parse(&rec[4]));
        if stat.is_some_and(|g| g <= eps) {
            let sfo = rec[1].parse().map_err(|_| BenchError::Schema {
                path: path.display().to_string(),
                message: format!("bad sfo value {:?}", &rec[1]),
            })?;
            return Ok(Some(sfo));
        }
    }
    Ok(None)
}

fn median(mut v: Vec<Option<u64>>) -> Option<f64> {
    v.sort_by_key(|x| x.unwrap_or(u64::MAX));
    let n = v.len();
    if n == 0 {
        return None;
    }
    if n % 2 == 1 {
        v[n / 2].map(|x| x as f64)
    } else {
        Some((v[n / 2 - 1]? as f64 + v[n / 2]? as f64) / 2.0)
    }
}

/// Builds the scaling table. `summaries` pairs each summary with the
/// directory holding its traces. `eps` overrides the target of each summary
/// (same order); by default each summary's own `eps` is used.
pub fn report_complexity(
    summaries: &[(PathBuf, ExperimentSummary)],
    eps: Option<&[f64]>,
) -> Result<ComplexityReport, BenchError> {
    if let Some(e) = eps {
        if e.len() != summaries.len() {
            return Err(BenchError::Config(vec![format!(
                "{} eps values for {} summaries",
                e.len(),
                summaries.len()
            )]));
        }
    }
    let targets: Vec<f64> = match eps {
        Some(e) => e.to_vec(),
        None => summaries.iter().map(|(_, s)| s.eps).collect(),
    };
    let mut distinct = targets.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(BenchError::InsufficientPoints(format!(
            "need summaries at two or more distinct eps, got {}",
            distinct.len()
        )));
    }

    let mut rows = Vec::new();
    for ((dir, summary), &target) in summaries.iter().zip(&targets) {
        let mut solvers: Vec<(&str, Algorithm)> = Vec::new();
        for c in &summary.cells {
            if !solvers.iter().any(|(s, _)| *s == c.solver) {
                solvers.push((&c.solver, c.algorithm));
            }
        }
        for (solver, algorithm) in solvers {
            let mut hits = Vec::new();
            for c in summary.cells.iter().filter(|c| c.solver == solver) {
                let hit = match (&c.status, &c.trace_file) {
                    (CellStatus::Ok, Some(f)) => sfo_at_target_from_csv(&dir.join(f), target)?,
                    _ => None,
                };
                hits.push(hit);
            }
            rows.push(ScalingRow {
                solver: solver.to_string(),
                algorithm,
                eps: target,
                seeds: hits.len(),
                reached: hits.iter().filter(|h| h.is_some()).count(),
                median_sfo: median(hits),
            });
        }
    }

    let mut fits = Vec::new();
    let mut names: Vec<(&str, Algorithm)> = Vec::new();
    for r in &rows {
        if !names.iter().any(|(s, _)| *s == r.solver) {
            names.push((&r.solver, r.algorithm));
        }
    }
    for (solver, algorithm) in names {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.solver == solver)
            .filter_map(|r| r.median_sfo.map(|s| ((1.0 / r.eps).ln(), s.ln())))
            .collect();
        let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let exponent = (xs.len() >= 2).then(|| {
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
            sxy / sxx
        });
        let lo = pts.iter().min_by(|a, b| a.0.total_cmp(&b.0));
        let hi = pts.iter().max_by(|a, b| a.0.total_cmp(&b.0));
        let ratio = match (lo, hi, exponent) {
            (Some(lo), Some(hi), Some(_)) => Some((hi.1 - lo.1).exp()),
            _ => None,
        };
        let band = exponent_band(algorithm);
        let within_band = band.zip(exponent).map(|((a, b), p)| p >= a && p <= b);
        fits.push(ScalingFit {
            solver: solver.to_string(),
            algorithm,
            exponent,
            ratio,
            band,
            within_band,
        });
    }
    Ok(ComplexityReport { rows, fits })
}

/// Loads `summary.json` files (or directories containing one).
pub fn load_summaries(paths: &[PathBuf]) -> Result<Vec<(PathBuf, ExperimentSummary)>, BenchError> {
    paths
        .iter()
        .map(|p| {
            let file = if p.is_dir() {
                p.join("summary.json")
            } else {
                p.clone()
            };
            let dir = file.parent().map(Path::to_path_buf).unwrap_or_default();
            Ok((dir, ExperimentSummary::load(&file)?))
        })
        .collect()
}

impl fmt::Display for ComplexityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<24} {:>10} {:>8} {:>14}",
            "solver", "eps", "reached", "median_sfo"
        )?;
        for r in &self.rows {
            let sfo = r
                .median_sfo
                .map(|s| format!("{s:.0}"))
                .unwrap_or_else(|| "unreachable".into());
            writeln!(
                f,
                "{:<24} {:>10} {:>8} {:>14}",
                r.solver,
                r.eps,
                format!("{}/{}", r.reached, r.seeds),
                sfo
            )?;
        }
        writeln!(f)?;
        writeln!(
            f,
            "{:<24} {:>9} {:>9} {:>17} {:>6}",
            "solver", "exponent", "ratio", "band", "flag"
        )?;
        for fit in &self.fits {
            let p = fit
                .exponent
                .map(|p| format!("{p:.3}"))
                .unwrap_or_else(|| "-".into());
            let ratio = fit
                .ratio
                .map(|r| format!("{r:.3}"))
                .unwrap_or_else(|| "-".into());
            let band = fit
                .band
                .map(|(a, b)| format!("[{a:.3}, {b:.3}]"))
                .unwrap_or_else(|| "-".into());
            let flag = match fit.within_band {
                Some(true) => "ok",
                Some(false) => "OUT",
                None => "-",
            };
            writeln!(
                f,
                "{:<24} {:>9} {:>9} {:>17} {:>6}",
                fit.solver, p, ratio, band, flag
            )?;
        }
        Ok(())
    }
}
