use faer::{Mat, MatRef};

use super::prepared::{eigen_tail, PreparedSnapshots, ReducedDmd};
use super::{
    Algorithm, EkNorm, ReducedOperator, TruncationLevel, TtlsConfig, DEFAULT_EK_TIE_TOL,
    DEFAULT_ZERO_EIG_TOL,
};
use crate::error::{DmdError, Result};
use crate::linalg;

/// Options for [`select_k`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectKOptions {
    pub norm: EkNorm,
    /// Relative cutoff for `V₁₁⁺`; `None` uses `max(r, k) · ε`.
    pub rank_tol: Option<f64>,
    /// `E(k)` values within `tie_tol · σ₁` of the minimum count as ties and
    /// resolve to the smallest `k`.
    pub tie_tol: f64,
}

impl Default for SelectKOptions {
    fn default() -> Self {
        SelectKOptions {
            norm: EkNorm::Spectral,
            rank_tol: None,
            tie_tol: DEFAULT_EK_TIE_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSelection {
    pub k_opt: usize,
    /// `(k, E(k))` for `k = 1..=r`.
    pub e_of_k: Vec<(usize, f64)>,
}

/// SVD of the augmented matrix `Z̃ = [X̃ᵀ Ỹᵀ]`, from which every truncated
/// operator `Ã(k) = V₂₁ V₁₁⁺` and its residual are built.
pub(crate) struct TlsFactor {
    r: usize,
    /// `2r × 2r` right singular vectors.
    v: Mat<f64>,
    /// `2r` singular values, zero-padded when `Z̃` has fewer than `2r` rows.
    sigma: Vec<f64>,
}

impl TlsFactor {
    pub fn new(xt: MatRef<'_, f64>, yt: MatRef<'_, f64>) -> Result<Self> {
        let r = xt.nrows();
        let cols = xt.ncols();
        let z = Mat::from_fn(cols, 2 * r, |i, j| {
            if j < r {
                xt[(j, i)]
            } else {
                yt[(j - r, i)]
            }
        });
        let svd = if cols >= 2 * r {
            linalg::thin_svd(z.as_ref())?
        } else {
            linalg::full_svd(z.as_ref())?
        };
        let s = svd.S().column_vector();
        let mut sigma: Vec<f64> = (0..s.nrows()).map(|i| s[i]).collect();
        sigma.resize(2 * r, 0.0);
        Ok(TlsFactor {
            r,
            v: svd.V().to_owned(),
            sigma,
        })
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma[0]
    }

    /// `Ã(k) = V₂₁ V₁₁⁺` with `V₁₁ = V[0..r, 0..k]`, `V₂₁ = V[r..2r, 0..k]`.
    pub fn operator(&self, k: usize, rank_tol: Option<f64>) -> Result<Mat<f64>> {
        let r = self.r;
        debug_assert!((1..=r).contains(&k));
        let v11 = self.v.submatrix(0, 0, r, k);
        let v21 = self.v.submatrix(r, 0, r, k);
        let rtol = rank_tol.unwrap_or(r.max(k) as f64 * f64::EPSILON);
        let pinv = linalg::pinv(v11, rtol)?;
        if pinv.sigma_max <= 2.0 * r as f64 * f64::EPSILON {
            return Err(DmdError::SingularV11 { k });
        }
        Ok(v21 * &pinv.mat)
    }

    /// Scans `E(k) = ‖Ỹ − Ã(k) X̃‖` for every `k`, evaluated as
    /// `‖(V_bot − Ã V_top) Σ‖`: since `[X̃; Ỹ] = V Σ Uᵀ` with orthonormal
    /// `U`, both norms are unchanged.
    pub fn scan(&self, opts: &SelectKOptions) -> Result<KSelection> {
        let r = self.r;
        let sigma = |j: usize| self.sigma[j];
        let top = Mat::from_fn(r, 2 * r, |i, j| self.v[(i, j)] * sigma(j));
        let bot = Mat::from_fn(r, 2 * r, |i, j| self.v[(r + i, j)] * sigma(j));
        let leading = LeadingQr::new(self.v.submatrix(0, 0, r, r), self.v.submatrix(r, 0, r, r));

        let mut e_of_k = Vec::with_capacity(r);
        for k in 1..=r {
            let rtol = opts.rank_tol.unwrap_or(r.max(k) as f64 * f64::EPSILON);
            let a = match leading.operator(k, rtol) {
                Some(a) => a,
                None => self.operator(k, opts.rank_tol)?,
            };
            let w = &bot - &a * &top;
            let e = match opts.norm {
                EkNorm::Spectral => linalg::spectral_norm(w.as_ref())?,
                EkNorm::Frobenius => linalg::frobenius_norm(w.as_ref()),
            };
            e_of_k.push((k, e));
        }
        let e_min = e_of_k.iter().map(|&(_, e)| e).fold(f64::INFINITY, f64::min);
        let threshold = e_min + opts.tie_tol * self.sigma_max();
        let k_opt = e_of_k
            .iter()
            .find(|&&(_, e)| e <= threshold)
            .map(|&(k, _)| k)
            .expect("scan covers at least k = 1");
        Ok(KSelection { k_opt, e_of_k })
    }
}

/// Smallest lower bound on `σ_min(V₁₁(k))` for which the QR route is used.
const QR_ROUTE_MIN_SIGMA: f64 = 1e-6;

/// One QR factorization `V₁₁ = Q R` of the full square block serves every
/// truncation level: the first `k` columns of `Q` and the leading `k × k`
/// block of `R` factor `V₁₁(k)`, and since `R⁻¹` is upper triangular,
/// `V₂₁(k) R_k⁻¹` is the first `k` columns of `B = V₂₁ R⁻¹`. Hence
/// `Ã(k) = B_k Q_kᵀ` without a factorization per `k`.
///
/// That equals the SVD pseudoinverse only while `V₁₁(k)` has full column
/// rank under the cutoff, so each `k` is gated on the lower bound
/// `σ_min(V₁₁(k)) ≥ 1 / ‖R_k⁻¹‖_F`.
struct LeadingQr {
    q: Mat<f64>,
    b: Mat<f64>,
    /// `1 / ‖R_k⁻¹‖_F` for `k = 1..=r` (index `k − 1`).
    sigma_lower: Vec<f64>,
}

impl LeadingQr {
    fn new(v11: MatRef<'_, f64>, v21: MatRef<'_, f64>) -> Self {
        let r = v11.nrows();
        let qr = v11.qr();
        let q = qr.compute_thin_Q();
        let rf = qr.thin_R();
        // R⁻¹ column by column; column j only involves the leading j + 1 block
        let mut rinv = Mat::<f64>::zeros(r, r);
        for j in 0..r {
            rinv[(j, j)] = 1.0 / rf[(j, j)];
            for i in (0..j).rev() {
                let mut acc = 0.0;
                for l in i + 1..=j {
                    acc += rf[(i, l)] * rinv[(l, j)];
                }
                rinv[(i, j)] = -acc / rf[(i, i)];
            }
        }
        let mut sigma_lower = Vec::with_capacity(r);
        let mut frob2 = 0.0;
        for j in 0..r {
            frob2 += (0..=j).map(|i| rinv[(i, j)].powi(2)).sum::<f64>();
            sigma_lower.push(if frob2.is_finite() { 1.0 / frob2.sqrt() } else { 0.0 });
        }
        let b = v21 * &rinv;
        LeadingQr { q, b, sigma_lower }
    }

    /// `Ã(k)`, or `None` when `V₁₁(k)` may be rank-deficient under `rtol`.
    fn operator(&self, k: usize, rtol: f64) -> Option<Mat<f64>> {
        // σ_max(V₁₁(k)) ≤ 1 because its columns come from an orthogonal matrix
        let bound = self.sigma_lower[k - 1];
        if !(bound >= QR_ROUTE_MIN_SIGMA && bound > 10.0 * rtol) {
            return None;
        }
        Some(self.b.subcols(0, k) * self.q.subcols(0, k).transpose())
    }
}
/// Scans `E(k) = ‖Ỹ − Ã(k) X̃‖` for `k = 1..=r` and returns the minimizer.
///
/// `E(k)` is not monotone in `k` in general, so every level is evaluated.
pub fn select_k(
    x_tilde: MatRef<'_, f64>,
    y_tilde: MatRef<'_, f64>,
    opts: &SelectKOptions,
) -> Result<KSelection> {
    if x_tilde.shape() != y_tilde.shape() {
        return Err(DmdError::DimensionMismatch(format!(
            "X̃ is {:?} but Ỹ is {:?}",
            x_tilde.shape(),
            y_tilde.shape()
        )));
    }
    if x_tilde.nrows() == 0 || x_tilde.ncols() == 0 {
        return Err(DmdError::InvalidParameter(
            "reduced matrices must be nonempty".into(),
        ));
    }
    TlsFactor::new(x_tilde, y_tilde)?.scan(opts)
}

impl PreparedSnapshots {
    /// T-TLS DMD: POD projection to `r` dimensions, SVD of the augmented
    /// matrix, `Ã = V₂₁ V₁₁⁺` with `k` retained columns, modes `P_r φ̃`.
    pub fn ttls(&self, cfg: &TtlsConfig) -> Result<ReducedDmd> {
        self.tls_family(cfg, Algorithm::Ttls)
    }

    /// TLS DMD: T-TLS with `k = r`.
    pub fn tls(&self, r: usize) -> Result<ReducedDmd> {
        let cfg = TtlsConfig {
            zero_eig_tol: DEFAULT_ZERO_EIG_TOL,
            ..TtlsConfig::new(r, TruncationLevel::Explicit(r))
        };
        self.tls_family(&cfg, Algorithm::Tls)
    }

    fn tls_family(&self, cfg: &TtlsConfig, label: Algorithm) -> Result<ReducedDmd> {
        let (r, m) = (cfg.r, self.m());
        if r == 0 {
            return Err(DmdError::InvalidParameter("r must be at least 1".into()));
        }
        if 2 * r >= m {
            return Err(DmdError::ReducedDimensionTooLarge { r, m });
        }
        if let TruncationLevel::Explicit(k) = cfg.k {
            if k == 0 || k > r {
                return Err(DmdError::InvalidTruncation { k, r });
            }
        }
        let ur = self.pod_vectors(r)?;
        let xt = ur.transpose() * self.coeffs_x();
        let yt = ur.transpose() * self.coeffs_y();
        let factor = TlsFactor::new(xt.as_ref(), yt.as_ref())?;

        let (k, e_of_k) = match cfg.k {
            TruncationLevel::Explicit(k) => (k, None),
            TruncationLevel::Auto => {
                let sel = factor.scan(&cfg.select_options())?;
                (sel.k_opt, Some(sel.e_of_k))
            }
        };
        let a_tilde = factor.operator(k, cfg.rank_tol)?;
        let tail = eigen_tail(a_tilde.as_ref(), cfg.zero_eig_tol, |_, w| {
            linalg::real_times_complex(ur, w)
        })?;

        Ok(ReducedDmd {
            algorithm: label,
            eigenvalues: tail.eigenvalues,
            coeff_modes: tail.coeff_modes,
            operator: ReducedOperator(a_tilde),
            r_used: r,
            k_used: Some(k),
            e_of_k,
        })
    }
}
