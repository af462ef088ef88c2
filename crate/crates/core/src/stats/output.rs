use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::MonteCarloReport;
use crate::error::{DmdError, Result};

/// Boundary samples per ellipse in `ellipse_points.csv`.
pub const ELLIPSE_POINTS: usize = 128;

const STATS_HEADER: &str = "algorithm,mode,ref_re,ref_im,trials,matched,misses,\
mean_re,mean_im,mean_abs,se_abs,cov_rr,cov_ri,cov_ii,\
semi_major,semi_minor,angle,area,worst_mode_error,worst_trial";

/// One row per (algorithm, reference mode). Missing quantities are written
/// as `NaN` (and `-1` for the worst trial index).
pub fn write_stats_csv(report: &MonteCarloReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| DmdError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{STATS_HEADER}").map_err(io)?;
    let nan = f64::NAN;
    for alg in &report.algorithms {
        for (j, mode) in alg.modes.iter().enumerate() {
            let s = &mode.stats;
            let mean = s.mean.map_or((nan, nan), |m| (m.re, m.im));
            let (mabs, se) = s.modulus_mean_se().unwrap_or((nan, nan));
            let cov = s.cov.unwrap_or([[nan; 2]; 2]);
            let (a, b, ang, area) = s
                .ellipse
                .map_or((nan, nan, nan, nan), |e| (e.semi_major, e.semi_minor, e.angle, e.area));
            let (werr, wtrial) = match &mode.mode_errors {
                Some(me) => (
                    me.worst_error().unwrap_or(nan),
                    me.worst_trial.map_or(-1, |t| t as i64),
                ),
                None => (nan, -1),
            };
            let fields = [
                s.reference.re,
                s.reference.im,
                s.samples.len() as f64,
                (s.samples.len() - s.miss_count) as f64,
                s.miss_count as f64,
                mean.0,
                mean.1,
                mabs,
                se,
                cov[0][0],
                cov[0][1],
                cov[1][1],
                a,
                b,
                ang,
                area,
                werr,
            ];
            let fields: Vec<String> = fields.iter().map(|v| v.to_string()).collect();
            writeln!(
                w,
                "{},{},{},{}",
                alg.spec.algorithm(),
                j,
                fields.join(","),
                wtrial
            )
            .map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Sampled boundary of every available ellipse: `algorithm,mode,point,re,im`.
pub fn write_ellipse_points_csv(report: &MonteCarloReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| DmdError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "algorithm,mode,point,re,im").map_err(io)?;
    for alg in &report.algorithms {
        for (j, mode) in alg.modes.iter().enumerate() {
            let Some(e) = mode.stats.ellipse else { continue };
            for (p, z) in e.boundary_points(ELLIPSE_POINTS).iter().enumerate() {
                writeln!(w, "{},{j},{p},{},{}", alg.spec.algorithm(), z.re, z.im).map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}
