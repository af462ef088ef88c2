//! Dynamic mode decomposition variants.
//!
//! Four algorithms share one result type:
//!
//! * [`exact_dmd`]: least-squares operator from the SVD of `X`, modes lifted
//!   through `Y` so they lie in its column space;
//! * [`tls_dmd`]: total-least-squares operator on POD-projected data;
//! * [`ttls_dmd`]: truncated TLS, keeping only the first `k` right singular
//!   vectors of the augmented matrix `[X̃ᵀ Ỹᵀ]`, with `k` optionally chosen by
//!   [`select_k`];
//! * [`subspace_dmd`]: projects stacked future snapshots onto the row space
//!   of stacked past snapshots before extracting the operator.
//!
//! Every algorithm first compresses the snapshot matrix with a thin QR
//! factorization (see [`PreparedSnapshots`]). All SVDs and products are then
//! carried out on the `m × m` triangular factor, which is exact in exact
//! arithmetic and makes repeated decompositions of tall data cheap.

mod exact;
pub mod io;
mod pod;
mod prepared;
mod subspace;
mod ttls;

use std::fmt;
use std::str::FromStr;

use faer::{c64, Mat, MatRef};

use crate::error::{DmdError, Result};
use crate::snapshots::{ShiftedPair, SnapshotMatrix};

pub use pod::{pod_basis, project, PodBasis, ReducedPair};
pub use prepared::{PreparedSnapshots, ReducedDmd};
pub use ttls::{select_k, KSelection, SelectKOptions};

/// Eigenvalues with `|λ| ≤ tol · max|λ|` are treated as zero and dropped.
pub const DEFAULT_ZERO_EIG_TOL: f64 = 1e-12;

/// Ties in `E(k)` are values within `tol · σ₁([X̃ᵀ Ỹᵀ])` of the minimum.
pub const DEFAULT_EK_TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Exact,
    Tls,
    Ttls,
    Subspace,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Exact,
        Algorithm::Tls,
        Algorithm::Ttls,
        Algorithm::Subspace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Exact => "exact",
            Algorithm::Tls => "tls",
            Algorithm::Ttls => "ttls",
            Algorithm::Subspace => "subspace",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = DmdError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| {
                DmdError::InvalidParameter(format!(
                    "unknown algorithm `{s}` (valid: exact, tls, ttls, subspace)"
                ))
            })
    }
}

/// Truncation level of T-TLS DMD.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationLevel {
    Explicit(usize),
    /// Minimize `E(k)` over `k = 1..=r`.
    Auto,
}

impl fmt::Display for TruncationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruncationLevel::Explicit(k) => write!(f, "{k}"),
            TruncationLevel::Auto => f.write_str("auto"),
        }
    }
}

impl FromStr for TruncationLevel {
    type Err = DmdError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(TruncationLevel::Auto);
        }
        match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(TruncationLevel::Explicit(k)),
            _ => Err(DmdError::InvalidParameter(format!(
                "truncation level must be a positive integer or `auto`, got `{s}`"
            ))),
        }
    }
}

/// Matrix norm used for the selection residual `E(k) = ‖Ỹ − Ã(k) X̃‖`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EkNorm {
    /// Largest singular value.
    #[default]
    Spectral,
    Frobenius,
}

impl fmt::Display for EkNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EkNorm::Spectral => "spectral",
            EkNorm::Frobenius => "frobenius",
        })
    }
}

impl FromStr for EkNorm {
    type Err = DmdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "spectral" => Ok(EkNorm::Spectral),
            "frobenius" => Ok(EkNorm::Frobenius),
            other => Err(DmdError::InvalidParameter(format!(
                "unknown E(k) norm `{other}` (valid: spectral, frobenius)"
            ))),
        }
    }
}

/// Configuration of (truncated) TLS DMD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TtlsConfig {
    /// Number of POD vectors kept; must satisfy `r < m/2`.
    pub r: usize,
    pub k: TruncationLevel,
    /// Relative singular-value cutoff for `V₁₁⁺`. `None` uses
    /// `max(r, k) · ε`.
    pub rank_tol: Option<f64>,
    /// Relative threshold below which eigenvalues count as zero.
    pub zero_eig_tol: f64,
    pub ek_norm: EkNorm,
    pub ek_tie_tol: f64,
}

impl TtlsConfig {
    pub fn new(r: usize, k: TruncationLevel) -> Self {
        TtlsConfig {
            r,
            k,
            rank_tol: None,
            zero_eig_tol: DEFAULT_ZERO_EIG_TOL,
            ek_norm: EkNorm::Spectral,
            ek_tie_tol: DEFAULT_EK_TIE_TOL,
        }
    }

    pub fn auto(r: usize) -> Self {
        Self::new(r, TruncationLevel::Auto)
    }

    pub fn select_options(&self) -> SelectKOptions {
        SelectKOptions {
            norm: self.ek_norm,
            rank_tol: self.rank_tol,
            tie_tol: self.ek_tie_tol,
        }
    }
}

/// An algorithm together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlgorithmSpec {
    Exact { r: usize },
    Tls { r: usize },
    Ttls(TtlsConfig),
    Subspace { r: usize },
}

impl AlgorithmSpec {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            AlgorithmSpec::Exact { .. } => Algorithm::Exact,
            AlgorithmSpec::Tls { .. } => Algorithm::Tls,
            AlgorithmSpec::Ttls(_) => Algorithm::Ttls,
            AlgorithmSpec::Subspace { .. } => Algorithm::Subspace,
        }
    }

    pub fn r(&self) -> usize {
        match *self {
            AlgorithmSpec::Exact { r } | AlgorithmSpec::Tls { r } | AlgorithmSpec::Subspace { r } => r,
            AlgorithmSpec::Ttls(cfg) => cfg.r,
        }
    }
}

/// The reduced-order operator `Ã` whose eigenpairs define the decomposition.
#[derive(Debug, Clone)]
pub struct ReducedOperator(pub Mat<f64>);

impl ReducedOperator {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_ref(&self) -> MatRef<'_, f64> {
        self.0.as_ref()
    }
}

/// Eigenvalues and unit-norm modes of one decomposition.
///
/// Eigenvalues are ordered by `|St|` ascending, then `|λ|` descending, then
/// imaginary part descending, so conjugate pairs are adjacent with the
/// upper-half-plane member first.
#[derive(Debug, Clone)]
pub struct DmdResult {
    pub algorithm: Algorithm,
    pub eigenvalues: Vec<c64>,
    /// `n × p`; column `i` belongs to `eigenvalues[i]`.
    pub modes: Mat<c64>,
    pub operator: ReducedOperator,
    pub r_used: usize,
    /// Truncation level, for TLS-family algorithms.
    pub k_used: Option<usize>,
    /// `(k, E(k))` for every scanned `k` when the truncation level was automatic.
    pub e_of_k: Option<Vec<(usize, f64)>>,
    pub dt: f64,
    pub grid: Option<(usize, usize)>,
}

impl DmdResult {
    pub fn mode(&self, i: usize) -> Vec<c64> {
        self.modes.col(i).iter().copied().collect()
    }

    /// `(St, growth)` for every eigenvalue.
    pub fn strouhal(&self) -> Vec<(f64, f64)> {
        self.eigenvalues
            .iter()
            .map(|&l| eigen_to_strouhal(l, self.dt).expect("zero eigenvalues are filtered"))
            .collect()
    }
}

/// Converts a discrete-time eigenvalue to `(St, growth)`:
/// `St = arg(λ) / (2π dt)`, `growth = ln|λ| / dt`.
pub fn eigen_to_strouhal(lambda: c64, dt: f64) -> Result<(f64, f64)> {
    if !(dt > 0.0) {
        return Err(DmdError::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if lambda.norm() == 0.0 {
        return Err(DmdError::ZeroEigenvalue);
    }
    let st = lambda.arg() / (2.0 * std::f64::consts::PI * dt);
    let growth = lambda.norm().ln() / dt;
    Ok((st, growth))
}

/// Exact DMD on a shifted pair, truncating the SVD of `X` to rank `r`.
pub fn exact_dmd(pair: &ShiftedPair, r: usize, zero_eig_tol: f64) -> Result<DmdResult> {
    let prepared = PreparedSnapshots::new(&pair.snapshots()?)?;
    let reduced = prepared.exact(r, zero_eig_tol)?;
    Ok(prepared.lift(&reduced))
}

/// T-TLS DMD; with `k = r` this is plain TLS DMD.
pub fn ttls_dmd(psi: &SnapshotMatrix, cfg: &TtlsConfig) -> Result<DmdResult> {
    let prepared = PreparedSnapshots::new(psi)?;
    let reduced = prepared.ttls(cfg)?;
    Ok(prepared.lift(&reduced))
}

/// TLS DMD, i.e. T-TLS with no truncation.
pub fn tls_dmd(psi: &SnapshotMatrix, r: usize) -> Result<DmdResult> {
    let prepared = PreparedSnapshots::new(psi)?;
    let reduced = prepared.tls(r)?;
    Ok(prepared.lift(&reduced))
}

/// Subspace DMD through the rank-`r` POD basis.
pub fn subspace_dmd(pair: &ShiftedPair, r: usize) -> Result<DmdResult> {
    let prepared = PreparedSnapshots::new(&pair.snapshots()?)?;
    let reduced = prepared.subspace(r, DEFAULT_ZERO_EIG_TOL)?;
    Ok(prepared.lift(&reduced))
}

/// Runs any algorithm on a snapshot matrix.
pub fn decompose(psi: &SnapshotMatrix, spec: &AlgorithmSpec) -> Result<DmdResult> {
    let prepared = PreparedSnapshots::new(psi)?;
    let reduced = prepared.run(spec)?;
    Ok(prepared.lift(&reduced))
}

/// Drops numerically zero eigenvalues and returns the surviving indices in
/// output order.
pub(crate) fn order_eigenvalues(eigs: &[c64], zero_eig_tol: f64) -> Vec<usize> {
    let max_abs = eigs.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let cutoff = zero_eig_tol * max_abs;
    let mut keep: Vec<usize> = (0..eigs.len())
        .filter(|&i| eigs[i].norm() > cutoff)
        .collect();
    keep.sort_by(|&a, &b| {
        let (la, lb) = (eigs[a], eigs[b]);
        la.arg()
            .abs()
            .total_cmp(&lb.arg().abs())
            .then(lb.norm().total_cmp(&la.norm()))
            .then(lb.im.total_cmp(&la.im))
            .then(a.cmp(&b))
    });
    keep
}
