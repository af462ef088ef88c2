//! Result files.
//!
//! * `eigs.csv`: header `re,im,st,growth`, one row per eigenvalue in result
//!   order;
//! * `modes.bin`: `DMDS` container with `n = 2 · points` rows interleaving
//!   `Re, Im` of each point and one column per mode; the grid, when known, is
//!   recorded as `(ny, 2 · nx)` so the interleaved layout stays row-major;
//! * `ek.csv`: header `k,e`, one row per scanned truncation level.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use faer::{c64, Mat};

use super::DmdResult;
use crate::error::{DmdError, Result};
use crate::snapshots::{read_container, write_container, Container};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigRow {
    pub re: f64,
    pub im: f64,
    pub st: f64,
    pub growth: f64,
}

pub fn write_eigs_csv(result: &DmdResult, path: impl AsRef<Path>) -> Result<()> {
    let rows: Vec<Vec<f64>> = result
        .eigenvalues
        .iter()
        .zip(result.strouhal())
        .map(|(l, (st, g))| vec![l.re, l.im, st, g])
        .collect();
    write_csv(path.as_ref(), "re,im,st,growth", &rows)
}

pub fn read_eigs_csv(path: impl AsRef<Path>) -> Result<Vec<EigRow>> {
    Ok(read_csv(path.as_ref(), 4)?
        .into_iter()
        .map(|v| EigRow {
            re: v[0],
            im: v[1],
            st: v[2],
            growth: v[3],
        })
        .collect())
}

pub fn write_ek_csv(e_of_k: &[(usize, f64)], path: impl AsRef<Path>) -> Result<()> {
    let rows: Vec<Vec<f64>> = e_of_k.iter().map(|&(k, e)| vec![k as f64, e]).collect();
    write_csv(path.as_ref(), "k,e", &rows)
}

pub fn read_ek_csv(path: impl AsRef<Path>) -> Result<Vec<(usize, f64)>> {
    Ok(read_csv(path.as_ref(), 2)?
        .into_iter()
        .map(|v| (v[0] as usize, v[1]))
        .collect())
}

pub fn write_modes(result: &DmdResult, path: impl AsRef<Path>) -> Result<()> {
    let modes = &result.modes;
    let (points, p) = modes.shape();
    let mut values = Vec::with_capacity(2 * points * p);
    for j in 0..p {
        for z in modes.col(j).iter() {
            values.push(z.re);
            values.push(z.im);
        }
    }
    write_container(
        path.as_ref(),
        &Container {
            n: 2 * points,
            m: p,
            dt: result.dt,
            grid: result.grid.map(|(ny, nx)| (ny, 2 * nx)),
            values,
        },
    )
}

/// Reads `modes.bin` back as an `n × p` complex matrix and the point grid.
pub fn read_modes(path: impl AsRef<Path>) -> Result<(Mat<c64>, Option<(usize, usize)>)> {
    let c = read_container(path.as_ref())?;
    if c.n % 2 != 0 {
        return Err(DmdError::DimensionMismatch(format!(
            "interleaved complex container needs an even row count, got {}",
            c.n
        )));
    }
    let points = c.n / 2;
    let modes = Mat::from_fn(points, c.m, |i, j| {
        let base = j * c.n + 2 * i;
        c64::new(c.values[base], c.values[base + 1])
    });
    Ok((modes, c.grid.map(|(ny, nx2)| (ny, nx2 / 2))))
}

/// Dumps one complex field as two grid-shaped planes: column 0 holds the real
/// part and column 1 the imaginary part.
pub fn write_mode_planes(
    mode: &[c64],
    dt: f64,
    grid: Option<(usize, usize)>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut values: Vec<f64> = mode.iter().map(|z| z.re).collect();
    values.extend(mode.iter().map(|z| z.im));
    write_container(
        path.as_ref(),
        &Container {
            n: mode.len(),
            m: 2,
            dt,
            grid,
            values,
        },
    )
}

pub(crate) fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    let io = |e| DmdError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{header}").map_err(io)?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn read_csv(path: &Path, width: usize) -> Result<Vec<Vec<f64>>> {
    let io = |e| DmdError::io(path, e);
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut rows = Vec::new();
    for (lineno, line) in reader.lines().enumerate().skip(1) {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| DmdError::Parse {
                    line: lineno + 1,
                    message: format!("cannot parse `{f}`"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != width {
            return Err(DmdError::Parse {
                line: lineno + 1,
                message: format!("expected {width} fields, got {}", row.len()),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}
