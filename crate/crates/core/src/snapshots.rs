//! Snapshot matrices: construction, persistence, and the shifted pair (X, Y).
//!
//! Snapshots are stored column-wise (space × time). A spatial grid of shape
//! `(ny, nx)` is flattened row-major, so point `(iy, ix)` lives in row
//! `iy * nx + ix`.
//!
//! Two on-disk formats are supported:
//!
//! * binary: magic `DMDS`, `u32` version (1), `u64` n, `u64` m, `f64` dt,
//!   `u32` grid_ny, `u32` grid_nx (both 0 when absent), then `n * m`
//!   little-endian `f64` values in column-major order;
//! * CSV: a comment header `# n m dt`, an optional `# grid ny nx` line, then
//!   `n` rows of `m` comma-separated values.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use faer::{Mat, MatRef};

use crate::error::{DmdError, Result};

/// Minimum number of snapshots for a regression with two column pairs.
pub const MIN_SNAPSHOTS: usize = 3;

const MAGIC: &[u8; 4] = b"DMDS";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 8 + 4 + 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotFormat {
    Csv,
    Binary,
}

impl SnapshotFormat {
    /// Picks the format from a file extension: `.csv` is CSV, anything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => SnapshotFormat::Csv,
            _ => SnapshotFormat::Binary,
        }
    }
}

/// An `n × m` real matrix whose columns are successive snapshots.
#[derive(Debug, Clone)]
pub struct SnapshotMatrix {
    data: Mat<f64>,
    dt: f64,
    grid: Option<(usize, usize)>,
    mean_removed: bool,
}

impl SnapshotMatrix {
    pub fn new(data: Mat<f64>, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(DmdError::InvalidParameter(format!(
                "snapshot interval dt must be positive and finite, got {dt}"
            )));
        }
        if data.ncols() < MIN_SNAPSHOTS {
            return Err(DmdError::TooFewSnapshots {
                required: MIN_SNAPSHOTS,
                got: data.ncols(),
            });
        }
        if data.nrows() == 0 {
            return Err(DmdError::DimensionMismatch(
                "snapshots must have at least one spatial point".into(),
            ));
        }
        if let Some((row, col)) = first_non_finite(data.as_ref()) {
            return Err(DmdError::NonFinite { row, col });
        }
        Ok(SnapshotMatrix {
            data,
            dt,
            grid: None,
            mean_removed: false,
        })
    }

    pub fn with_grid(mut self, ny: usize, nx: usize) -> Result<Self> {
        if ny * nx != self.n() {
            return Err(DmdError::DimensionMismatch(format!(
                "grid {ny}x{nx} has {} points but snapshots have {} rows",
                ny * nx,
                self.n()
            )));
        }
        self.grid = Some((ny, nx));
        Ok(self)
    }

    /// Number of spatial points (rows).
    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    /// Number of snapshots (columns).
    pub fn m(&self) -> usize {
        self.data.ncols()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> Option<(usize, usize)> {
        self.grid
    }

    pub fn mean_removed(&self) -> bool {
        self.mean_removed
    }

    pub fn data(&self) -> MatRef<'_, f64> {
        self.data.as_ref()
    }

    pub fn into_data(self) -> Mat<f64> {
        self.data
    }

    /// Replaces the data, keeping dt, grid and flags. Used by transforms that
    /// preserve shape.
    pub(crate) fn with_data(&self, data: Mat<f64>) -> Self {
        debug_assert_eq!(data.shape(), self.data.shape());
        SnapshotMatrix {
            data,
            dt: self.dt,
            grid: self.grid,
            mean_removed: self.mean_removed,
        }
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() {
            return Err(DmdError::InvalidParameter(format!(
                "scale factor must be finite, got {factor}"
            )));
        }
        Ok(self.with_data(Mat::from_fn(self.n(), self.m(), |i, j| {
            factor * self.data[(i, j)]
        })))
    }
}

impl PartialEq for SnapshotMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.dt == other.dt
            && self.grid == other.grid
            && self.data.shape() == other.data.shape()
            && (0..self.m()).all(|j| self.data.col_as_slice(j) == other.data.col_as_slice(j))
    }
}

/// The time-shifted pair `X = [ψ₁ … ψ_{m−1}]`, `Y = [ψ₂ … ψ_m]`.
#[derive(Debug, Clone)]
pub struct ShiftedPair {
    x: Mat<f64>,
    y: Mat<f64>,
    dt: f64,
    grid: Option<(usize, usize)>,
}

impl ShiftedPair {
    /// Builds a pair from explicit matrices, checking that they overlap as
    /// shifted copies of one snapshot sequence.
    pub fn from_parts(x: Mat<f64>, y: Mat<f64>, dt: f64) -> Result<Self> {
        if x.shape() != y.shape() {
            return Err(DmdError::DimensionMismatch(format!(
                "X is {:?} but Y is {:?}",
                x.shape(),
                y.shape()
            )));
        }
        if x.ncols() + 1 < MIN_SNAPSHOTS {
            return Err(DmdError::TooFewSnapshots {
                required: MIN_SNAPSHOTS,
                got: x.ncols() + 1,
            });
        }
        for j in 0..x.ncols() - 1 {
            if x.col_as_slice(j + 1) != y.col_as_slice(j) {
                return Err(DmdError::DimensionMismatch(format!(
                    "Y column {j} does not equal X column {}",
                    j + 1
                )));
            }
        }
        Ok(ShiftedPair {
            x,
            y,
            dt,
            grid: None,
        })
    }

    pub fn x(&self) -> MatRef<'_, f64> {
        self.x.as_ref()
    }

    pub fn y(&self) -> MatRef<'_, f64> {
        self.y.as_ref()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> Option<(usize, usize)> {
        self.grid
    }

    /// Reassembles the snapshot sequence `[X, y_last]`.
    pub fn snapshots(&self) -> Result<SnapshotMatrix> {
        let n = self.x.nrows();
        let cols = self.x.ncols();
        let data = Mat::from_fn(n, cols + 1, |i, j| {
            if j < cols {
                self.x[(i, j)]
            } else {
                self.y[(i, cols - 1)]
            }
        });
        let s = SnapshotMatrix::new(data, self.dt)?;
        match self.grid {
            Some((ny, nx)) => s.with_grid(ny, nx),
            None => Ok(s),
        }
    }
}

/// Splits a snapshot sequence into its shifted pair.
pub fn shifted_pair(s: &SnapshotMatrix) -> Result<ShiftedPair> {
    let m = s.m();
    if m < MIN_SNAPSHOTS {
        return Err(DmdError::TooFewSnapshots {
            required: MIN_SNAPSHOTS,
            got: m,
        });
    }
    let d = s.data();
    Ok(ShiftedPair {
        x: d.subcols(0, m - 1).to_owned(),
        y: d.subcols(1, m - 1).to_owned(),
        dt: s.dt(),
        grid: s.grid(),
    })
}

/// Removes the time average from every row.
pub fn subtract_mean(s: &SnapshotMatrix) -> SnapshotMatrix {
    let (n, m) = (s.n(), s.m());
    let d = s.data();
    let means: Vec<f64> = (0..n)
        .map(|i| (0..m).map(|j| d[(i, j)]).sum::<f64>() / m as f64)
        .collect();
    let mut out = s.with_data(Mat::from_fn(n, m, |i, j| d[(i, j)] - means[i]));
    out.mean_removed = true;
    out
}

pub fn load_snapshots(path: impl AsRef<Path>, format: SnapshotFormat) -> Result<SnapshotMatrix> {
    let path = path.as_ref();
    match format {
        SnapshotFormat::Binary => {
            let c = read_container(path)?;
            let data = Mat::from_fn(c.n, c.m, |i, j| c.values[j * c.n + i]);
            let s = SnapshotMatrix::new(data, c.dt)?;
            match c.grid {
                Some((ny, nx)) => s.with_grid(ny, nx),
                None => Ok(s),
            }
        }
        SnapshotFormat::Csv => load_csv(path),
    }
}

pub fn save_snapshots(
    s: &SnapshotMatrix,
    path: impl AsRef<Path>,
    format: SnapshotFormat,
) -> Result<()> {
    let path = path.as_ref();
    match format {
        SnapshotFormat::Binary => {
            let mut values = Vec::with_capacity(s.n() * s.m());
            for j in 0..s.m() {
                values.extend_from_slice(s.data.col_as_slice(j));
            }
            write_container(
                path,
                &Container {
                    n: s.n(),
                    m: s.m(),
                    dt: s.dt(),
                    grid: s.grid(),
                    values,
                },
            )
        }
        SnapshotFormat::Csv => save_csv(s, path),
    }
}

/// Raw contents of a `DMDS` container.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Container {
    pub n: usize,
    pub m: usize,
    pub dt: f64,
    pub grid: Option<(usize, usize)>,
    /// Column-major, `n * m` entries.
    pub values: Vec<f64>,
}

pub(crate) fn write_container(path: &Path, c: &Container) -> Result<()> {
    debug_assert_eq!(c.values.len(), c.n * c.m);
    let io = |e| DmdError::io(path, e);
    let (ny, nx) = c.grid.unwrap_or((0, 0));
    let (ny, nx) = (grid_u32(ny)?, grid_u32(nx)?);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(MAGIC);
    header.extend_from_slice(&VERSION.to_le_bytes());
    header.extend_from_slice(&(c.n as u64).to_le_bytes());
    header.extend_from_slice(&(c.m as u64).to_le_bytes());
    header.extend_from_slice(&c.dt.to_le_bytes());
    header.extend_from_slice(&ny.to_le_bytes());
    header.extend_from_slice(&nx.to_le_bytes());
    w.write_all(&header).map_err(io)?;
    for v in &c.values {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn grid_u32(v: usize) -> Result<u32> {
    u32::try_from(v)
        .map_err(|_| DmdError::InvalidParameter(format!("grid extent {v} does not fit in u32")))
}

pub(crate) fn read_container(path: &Path) -> Result<Container> {
    let io = |e| DmdError::io(path, e);
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(io)?;
    if bytes.len() < HEADER_LEN {
        return Err(DmdError::MalformedHeader(format!(
            "file is {} bytes, shorter than the {HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(DmdError::MalformedHeader("missing DMDS magic bytes".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(DmdError::MalformedHeader(format!(
            "unsupported version {version}"
        )));
    }
    let n = usize::try_from(u64_at(8))
        .map_err(|_| DmdError::MalformedHeader("n does not fit in usize".into()))?;
    let m = usize::try_from(u64_at(16))
        .map_err(|_| DmdError::MalformedHeader("m does not fit in usize".into()))?;
    let dt = f64::from_bits(u64_at(24));
    let (ny, nx) = (u32_at(32) as usize, u32_at(36) as usize);
    let grid = match (ny, nx) {
        (0, 0) => None,
        (ny, nx) if ny * nx == n => Some((ny, nx)),
        (ny, nx) => {
            return Err(DmdError::DimensionMismatch(format!(
                "header grid {ny}x{nx} does not match n = {n}"
            )))
        }
    };
    let expected = n
        .checked_mul(m)
        .and_then(|nm| nm.checked_mul(8))
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| DmdError::MalformedHeader(format!("n = {n}, m = {m} overflow")))?;
    if bytes.len() != expected {
        return Err(DmdError::DimensionMismatch(format!(
            "header declares {n}x{m} ({expected} bytes) but file has {} bytes",
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(p) = values.iter().position(|v| !v.is_finite()) {
        return Err(DmdError::NonFinite {
            row: p % n,
            col: p / n,
        });
    }
    Ok(Container {
        n,
        m,
        dt,
        grid,
        values,
    })
}

fn save_csv(s: &SnapshotMatrix, path: &Path) -> Result<()> {
    let io = |e| DmdError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "# {} {} {}", s.n(), s.m(), s.dt()).map_err(io)?;
    if let Some((ny, nx)) = s.grid() {
        writeln!(w, "# grid {ny} {nx}").map_err(io)?;
    }
    let d = s.data();
    let mut line = String::new();
    for i in 0..s.n() {
        line.clear();
        for j in 0..s.m() {
            if j > 0 {
                line.push(',');
            }
            // `{}` prints the shortest representation that round-trips exactly.
            line.push_str(&d[(i, j)].to_string());
        }
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

fn load_csv(path: &Path) -> Result<SnapshotMatrix> {
    let io = |e| DmdError::io(path, e);
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line.map_err(io)?,
        None => return Err(DmdError::MalformedHeader("empty CSV file".into())),
    };
    let fields: Vec<&str> = header
        .strip_prefix('#')
        .ok_or_else(|| DmdError::MalformedHeader("first line must be `# n m dt`".into()))?
        .split_whitespace()
        .collect();
    if fields.len() != 3 {
        return Err(DmdError::MalformedHeader(format!(
            "expected `# n m dt`, got `{header}`"
        )));
    }
    let bad = |what: &str| DmdError::MalformedHeader(format!("cannot parse {what} in `{header}`"));
    let n: usize = fields[0].parse().map_err(|_| bad("n"))?;
    let m: usize = fields[1].parse().map_err(|_| bad("m"))?;
    let dt: f64 = fields[2].parse().map_err(|_| bad("dt"))?;

    let mut grid = None;
    let mut values = vec![0.0; n * m];
    let mut row = 0;
    for (lineno, line) in lines {
        let line = line.map_err(io)?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if let ["grid", ny, nx] = parts.as_slice() {
                let parse = |v: &str| {
                    v.parse::<usize>().map_err(|_| DmdError::Parse {
                        line: lineno + 1,
                        message: format!("bad grid extent `{v}`"),
                    })
                };
                grid = Some((parse(ny)?, parse(nx)?));
            }
            continue;
        }
        if row >= n {
            return Err(DmdError::DimensionMismatch(format!(
                "header declares {n} rows but line {} holds row {}",
                lineno + 1,
                row + 1
            )));
        }
        let mut count = 0;
        for (col, field) in trimmed.split(',').enumerate() {
            if col >= m {
                return Err(DmdError::DimensionMismatch(format!(
                    "row {row} (line {}) has more than {m} values",
                    lineno + 1
                )));
            }
            let v: f64 = field.trim().parse().map_err(|_| DmdError::Parse {
                line: lineno + 1,
                message: format!("cannot parse `{}` at (row {row}, column {col})", field.trim()),
            })?;
            if !v.is_finite() {
                return Err(DmdError::NonFinite { row, col });
            }
            values[col * n + row] = v;
            count += 1;
        }
        if count != m {
            return Err(DmdError::DimensionMismatch(format!(
                "row {row} (line {}) has {count} values, expected {m}",
                lineno + 1
            )));
        }
        row += 1;
    }
    if row != n {
        return Err(DmdError::DimensionMismatch(format!(
            "header declares {n} rows, found {row}"
        )));
    }
    let s = SnapshotMatrix::new(Mat::from_fn(n, m, |i, j| values[j * n + i]), dt)?;
    match grid {
        Some((ny, nx)) => s.with_grid(ny, nx),
        None => Ok(s),
    }
}

fn first_non_finite(d: MatRef<'_, f64>) -> Option<(usize, usize)> {
    for j in 0..d.ncols() {
        for i in 0..d.nrows() {
            if !d[(i, j)].is_finite() {
                return Some((i, j));
            }
        }
    }
    None
}
