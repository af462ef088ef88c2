use faer::{c64, Mat};

use super::prepared::{eigen_tail, PreparedSnapshots, ReducedDmd};
use super::{Algorithm, ReducedOperator};
use crate::error::{DmdError, Result};
use crate::linalg;

impl PreparedSnapshots {
    /// Exact DMD with the SVD of `X` truncated to rank `r`.
    ///
    /// `Ã = Uᵣᵀ Y Vᵣ Σᵣ⁻¹` and each mode is `λ⁻¹ Y Vᵣ Σᵣ⁻¹ φ̃`.
    pub fn exact(&self, r: usize, zero_eig_tol: f64) -> Result<ReducedDmd> {
        let m = self.m();
        let max_r = self.rho().min(m - 1);
        if r == 0 || r > max_r {
            return Err(DmdError::InvalidParameter(format!(
                "exact DMD rank r = {r} outside 1..={max_r}"
            )));
        }
        let cx = self.coeffs_x();
        let cy = self.coeffs_y();
        let svd = linalg::thin_svd(cx)?;
        let s = svd.S().column_vector();
        let tol = self.n().max(m) as f64 * f64::EPSILON * s[0];
        let achieved = (0..s.nrows()).take_while(|&i| s[i] > tol).count();
        if achieved < r {
            return Err(DmdError::RankDeficient {
                requested: r,
                achieved,
            });
        }
        let ur = svd.U().subcols(0, r);
        let v = svd.V();
        // Y Vᵣ Σᵣ⁻¹
        let v_scaled = Mat::from_fn(v.nrows(), r, |i, j| v[(i, j)] / s[j]);
        let y_v_sinv = cy * &v_scaled;
        let a_tilde = ur.transpose() * &y_v_sinv;

        let tail = eigen_tail(a_tilde.as_ref(), zero_eig_tol, |eigs, w| {
            let mut modes = linalg::real_times_complex(y_v_sinv.as_ref(), w);
            for (j, &lambda) in eigs.iter().enumerate() {
                let inv: c64 = lambda.inv();
                modes.col_mut(j).iter_mut().for_each(|z| *z *= inv);
            }
            modes
        })?;

        Ok(ReducedDmd {
            algorithm: Algorithm::Exact,
            eigenvalues: tail.eigenvalues,
            coeff_modes: tail.coeff_modes,
            operator: ReducedOperator(a_tilde),
            r_used: r,
            k_used: None,
            e_of_k: None,
        })
    }
}
