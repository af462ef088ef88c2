//! Synthetic snapshot data with planted spectra, plus seeded observation
//! noise.

mod config;
mod rng;

use std::f64::consts::PI;

use faer::{c64, Mat};

use crate::error::{DmdError, Result};
use crate::snapshots::SnapshotMatrix;

pub use config::{GeneratorConfig, ModeSpec};
pub use rng::{child_seed, GaussianStream};

/// Phase speed (in free-stream units) used to turn a planted Strouhal number
/// into a streamwise wavenumber.
pub const CONVECTIVE_SPEED: f64 = 0.8;

/// One planted oscillation: `Re[a · shape · exp((growth + 2πi·st)·t)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedMode {
    /// Complex spatial pattern, one entry per grid point (row-major).
    pub shape: Vec<c64>,
    pub st: f64,
    pub growth: f64,
    pub amplitude: f64,
}

impl PlantedMode {
    /// Discrete-time eigenvalue `exp((growth + 2πi·st)·dt)`.
    pub fn eigenvalue(&self, dt: f64) -> c64 {
        c64::new(self.growth * dt, 2.0 * PI * self.st * dt).exp()
    }
}

/// A real field made of planted modes on a `(ny, nx)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedField {
    pub grid: (usize, usize),
    pub modes: Vec<PlantedMode>,
    pub dt: f64,
    pub m: usize,
}

impl PlantedField {
    pub fn n(&self) -> usize {
        self.grid.0 * self.grid.1
    }

    pub fn eigenvalues(&self) -> Vec<c64> {
        self.modes.iter().map(|md| md.eigenvalue(self.dt)).collect()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(DmdError::InvalidParameter("grid must be nonempty".into()));
        }
        for (j, md) in self.modes.iter().enumerate() {
            if md.shape.len() != n {
                return Err(DmdError::DimensionMismatch(format!(
                    "mode {j} shape has {} points, grid has {n}",
                    md.shape.len()
                )));
            }
            if !(md.st.is_finite() && md.growth.is_finite() && md.amplitude.is_finite()) {
                return Err(DmdError::InvalidParameter(format!(
                    "mode {j} has non-finite parameters"
                )));
            }
        }
        Ok(())
    }
}

/// Observation noise: i.i.d. `N(0, variance)` per entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub variance: f64,
    pub seed: u64,
}

/// Smooth wave packet for planted mode number `index`: a Gaussian envelope
/// centred in the downstream part of the domain, times a downstream
/// travelling wave `exp(−iκx)` with `κ = 2π·st / CONVECTIVE_SPEED`. Even
/// indices are symmetric in `y`, odd ones antisymmetric. Normalized so
/// `max |shape| = 1`.
pub fn wave_packet(
    index: usize,
    st: f64,
    grid: (usize, usize),
    x_range: (f64, f64),
    y_range: (f64, f64),
) -> Vec<c64> {
    let (ny, nx) = grid;
    let coord = |i: usize, count: usize, (lo, hi): (f64, f64)| {
        if count <= 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (count - 1) as f64
        }
    };
    let lx = x_range.1 - x_range.0;
    let ly = y_range.1 - y_range.0;
    let xc = x_range.0 + 0.45 * lx;
    let yc = 0.5 * (y_range.0 + y_range.1);
    let sx = 0.3 * lx;
    let sy = 0.15 * ly;
    let kappa = 2.0 * PI * st / CONVECTIVE_SPEED;
    let mut shape = Vec::with_capacity(ny * nx);
    for iy in 0..ny {
        let y = coord(iy, ny, y_range) - yc;
        let sym = if index % 2 == 0 { 1.0 } else { y / sy };
        for ix in 0..nx {
            let x = coord(ix, nx, x_range);
            let env = (-(x - xc).powi(2) / (2.0 * sx * sx) - y * y / (2.0 * sy * sy)).exp();
            shape.push(c64::from_polar(env * sym, -kappa * x));
        }
    }
    let peak = shape.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak > 0.0 {
        shape.iter_mut().for_each(|z| *z /= peak);
    }
    shape
}

/// Snapshot `t` is `Σ_j Re[a_j · shape_j · exp((growth_j + 2πi·st_j)·t·dt)]`.
pub fn gen_planted_field(spec: &PlantedField) -> Result<SnapshotMatrix> {
    spec.validate()?;
    let n = spec.n();
    let mut data = Mat::<f64>::zeros(n, spec.m);
    for md in &spec.modes {
        for t in 0..spec.m {
            // direct evaluation avoids drift from repeated multiplication
            let time = t as f64 * spec.dt;
            let z = md.amplitude * c64::new(md.growth * time, 2.0 * PI * md.st * time).exp();
            let col = data.col_as_slice_mut(t);
            for (x, s) in col.iter_mut().zip(&md.shape) {
                *x += z.re * s.re - z.im * s.im;
            }
        }
    }
    let (ny, nx) = spec.grid;
    SnapshotMatrix::new(data, spec.dt)?.with_grid(ny, nx)
}

/// Adds i.i.d. `N(0, σ²)` noise, filling entries in column-major order from
/// a [`GaussianStream`] seeded with `spec.seed`.
pub fn add_noise(s: &SnapshotMatrix, spec: &NoiseSpec) -> Result<SnapshotMatrix> {
    if !(spec.variance >= 0.0 && spec.variance.is_finite()) {
        return Err(DmdError::InvalidParameter(format!(
            "noise variance must be finite and nonnegative, got {}",
            spec.variance
        )));
    }
    if spec.variance == 0.0 {
        return Ok(s.clone());
    }
    let sigma = spec.variance.sqrt();
    let mut gauss = GaussianStream::new(spec.seed);
    let mut data = s.data().to_owned();
    for j in 0..data.ncols() {
        for x in data.col_as_slice_mut(j) {
            *x += sigma * gauss.next_standard();
        }
    }
    Ok(s.with_data(data))
}

/// Snapshots of a linear system together with its (real) operator.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub snapshots: SnapshotMatrix,
    /// `A = S D S⁺`, with `D` block-diagonal holding the prescribed spectrum.
    pub operator: Mat<f64>,
}

/// `x_t = A x_{t−1}` for a real `n × n` matrix `A` whose nonzero spectrum is
/// exactly `eigenvalues`. Complex eigenvalues must come in conjugate pairs.
/// Snapshot interval is 1.
pub fn gen_linear_system(
    eigenvalues: &[c64],
    n: usize,
    m: usize,
    seed: u64,
) -> Result<SnapshotMatrix> {
    Ok(linear_system(eigenvalues, n, m, seed)?.snapshots)
}

pub fn linear_system(eigenvalues: &[c64], n: usize, m: usize, seed: u64) -> Result<LinearSystem> {
    let p = eigenvalues.len();
    if p == 0 || p > n {
        return Err(DmdError::InvalidParameter(format!(
            "need 1..={n} eigenvalues, got {p}"
        )));
    }
    let blocks = pair_blocks(eigenvalues)?;

    // Block-diagonal D: 1×1 for real eigenvalues, [[a, −b], [b, a]] for a ± ib.
    let mut d = Mat::<f64>::zeros(p, p);
    let mut at = 0;
    for block in &blocks {
        match *block {
            Block::Real(l) => {
                d[(at, at)] = l;
                at += 1;
            }
            Block::Pair(l) => {
                d[(at, at)] = l.re;
                d[(at, at + 1)] = -l.im;
                d[(at + 1, at)] = l.im;
                d[(at + 1, at + 1)] = l.re;
                at += 2;
            }
        }
    }

    let mut gauss = GaussianStream::new(seed);
    let s = Mat::from_fn(n, p, |_, _| gauss.next_standard());
    let mut z: Vec<f64> = (0..p)
        .map(|_| {
            let sign = if gauss.next_uniform() < 0.5 { -1.0 } else { 1.0 };
            sign * (0.5 + gauss.next_uniform())
        })
        .collect();

    let mut data = Mat::<f64>::zeros(n, m);
    for t in 0..m {
        let zt = Mat::from_fn(p, 1, |i, _| z[i]);
        let xt = &s * &zt;
        for i in 0..n {
            data[(i, t)] = xt[(i, 0)];
        }
        let next = &d * &zt;
        z = (0..p).map(|i| next[(i, 0)]).collect();
    }
    let s_pinv = crate::linalg::pinv(s.as_ref(), n.max(p) as f64 * f64::EPSILON)?;
    let operator = &s * &d * &s_pinv.mat;
    Ok(LinearSystem {
        snapshots: SnapshotMatrix::new(data, 1.0)?,
        operator,
    })
}

enum Block {
    Real(f64),
    /// Upper-half-plane member of a conjugate pair.
    Pair(c64),
}

fn pair_blocks(eigenvalues: &[c64]) -> Result<Vec<Block>> {
    let mut used = vec![false; eigenvalues.len()];
    let mut blocks = Vec::new();
    for i in 0..eigenvalues.len() {
        if used[i] {
            continue;
        }
        let l = eigenvalues[i];
        used[i] = true;
        if l.im == 0.0 {
            blocks.push(Block::Real(l.re));
            continue;
        }
        let tol = 1e-12 * l.norm().max(1.0);
        let partner = (0..eigenvalues.len())
            .find(|&j| !used[j] && (eigenvalues[j] - l.conj()).norm() <= tol)
            .ok_or(DmdError::UnpairedEigenvalue(l))?;
        used[partner] = true;
        blocks.push(Block::Pair(if l.im > 0.0 { l } else { l.conj() }));
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_system_is_geometric() {
        let s = gen_linear_system(&[c64::new(0.9, 0.0)], 1, 6, 3).unwrap();
        let d = s.data();
        for t in 1..6 {
            assert!((d[(0, t)] - 0.9 * d[(0, t - 1)]).abs() < 1e-15);
        }
        assert!(d[(0, 0)] != 0.0);
    }

    #[test]
    fn fixed_point_is_constant() {
        let s = gen_linear_system(&[c64::new(1.0, 0.0)], 3, 5, 11).unwrap();
        let d = s.data();
        for t in 1..5 {
            for i in 0..3 {
                assert_eq!(d[(i, t)], d[(i, 0)]);
            }
        }
    }

    #[test]
    fn unpaired_complex_is_error() {
        let err = gen_linear_system(&[c64::new(0.5, 0.5)], 2, 5, 0).unwrap_err();
        assert!(matches!(err, DmdError::UnpairedEigenvalue(_)));
        let err = gen_linear_system(&[c64::new(0.5, 0.5), c64::new(0.5, 0.4)], 2, 5, 0).unwrap_err();
        assert!(matches!(err, DmdError::UnpairedEigenvalue(_)));
    }

    #[test]
    fn too_many_eigenvalues() {
        let eigs = vec![c64::new(0.5, 0.0); 3];
        assert!(gen_linear_system(&eigs, 2, 5, 0).is_err());
    }

    #[test]
    fn snapshots_follow_operator() {
        let eigs = [
            c64::from_polar(1.0, 0.4),
            c64::from_polar(1.0, -0.4),
            c64::new(0.7, 0.0),
        ];
        let sys = linear_system(&eigs, 6, 12, 5).unwrap();
        let d = sys.snapshots.data();
        let x = d.subcols(0, 11);
        let y = d.subcols(1, 11);
        let resid = y - &sys.operator * x;
        assert!(resid.norm_l2() <= 1e-12 * y.norm_l2());
    }

    #[test]
    fn traveling_packet_norm_constant() {
        // exp(−iκx) with many wavelengths makes Re and Im parts orthogonal with
        // equal energy, so the real field norm stays constant over time
        let shape: Vec<c64> = (0..64)
            .map(|i| c64::from_polar(1.0, -2.0 * PI * i as f64 / 8.0))
            .collect();
        let field = PlantedField {
            grid: (1, 64),
            modes: vec![PlantedMode {
                shape,
                st: 0.147,
                growth: 0.0,
                amplitude: 0.5,
            }],
            dt: 0.25,
            m: 30,
        };
        let s = gen_planted_field(&field).unwrap();
        let norms: Vec<f64> = (0..30).map(|t| s.data().col(t).norm_l2()).collect();
        for w in &norms {
            assert!((w - norms[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_modes_is_zero_matrix() {
        let field = PlantedField {
            grid: (3, 2),
            modes: vec![],
            dt: 1.0,
            m: 4,
        };
        let s = gen_planted_field(&field).unwrap();
        assert!(s.data().norm_l2() == 0.0);
        assert_eq!(s.grid(), Some((3, 2)));
    }

    #[test]
    fn noise_is_deterministic_and_pure() {
        let field = PlantedField {
            grid: (3, 3),
            modes: vec![],
            dt: 1.0,
            m: 5,
        };
        let clean = gen_planted_field(&field).unwrap();
        let spec = NoiseSpec {
            variance: 0.1,
            seed: 9,
        };
        let a = add_noise(&clean, &spec).unwrap();
        let b = add_noise(&clean, &spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(clean.data().norm_l2(), 0.0);
        let zero = add_noise(&clean, &NoiseSpec { variance: 0.0, seed: 9 }).unwrap();
        assert_eq!(zero, clean);
        assert!(add_noise(&clean, &NoiseSpec { variance: -1.0, seed: 0 }).is_err());
    }

    #[test]
    fn wave_packet_symmetry() {
        let grid = (11, 21);
        let even = wave_packet(0, 0.147, grid, (0.0, 10.0), (-5.0, 5.0));
        let odd = wave_packet(1, 0.296, grid, (0.0, 10.0), (-5.0, 5.0));
        let at = |v: &Vec<c64>, iy: usize, ix: usize| v[iy * 21 + ix];
        for ix in 0..21 {
            for iy in 0..5 {
                assert!((at(&even, iy, ix) - at(&even, 10 - iy, ix)).norm() < 1e-12);
                assert!((at(&odd, iy, ix) + at(&odd, 10 - iy, ix)).norm() < 1e-12);
            }
        }
        let peak = even.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-15);
    }
}
