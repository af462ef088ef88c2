//! Eigenvalue statistics over repeated noisy decompositions.

mod monte_carlo;
mod output;

use std::f64::consts::PI;

use faer::c64;

use crate::error::{DmdError, Result};
use crate::linalg::{cdot, cnorm};

pub use monte_carlo::{
    monte_carlo, planted_references, AlgorithmReport, ModeReport, MonteCarloConfig,
    MonteCarloReport, Reference,
};
pub use output::{write_ellipse_points_csv, write_stats_csv, ELLIPSE_POINTS};

/// 95% quantile of the χ² distribution with two degrees of freedom.
pub const CHI2_2DOF_95: f64 = 5.991;

pub const DEFAULT_MATCH_RADIUS: f64 = 0.2;

/// Index of the candidate with `Im ≥ 0` closest to `reference`, if it lies
/// within `radius`. Exact distance ties go to the larger modulus, then to the
/// earlier index.
pub fn match_index(candidates: &[c64], reference: c64, radius: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &l) in candidates.iter().enumerate() {
        if l.im < 0.0 {
            continue;
        }
        let d = (l - reference).norm();
        let better = match best {
            None => true,
            Some((j, bd)) => d < bd || (d == bd && l.norm() > candidates[j].norm()),
        };
        if better {
            best = Some((i, d));
        }
    }
    best.filter(|&(_, d)| d <= radius).map(|(i, _)| i)
}

/// Nearest upper-half-plane candidate within `radius` of `reference`.
pub fn match_eigenvalue(candidates: &[c64], reference: c64, radius: f64) -> Option<c64> {
    match_index(candidates, reference, radius).map(|i| candidates[i])
}

/// Mean accumulated as offsets from the first sample, so identical samples
/// reproduce their value exactly.
fn shifted_mean(samples: &[c64]) -> c64 {
    let origin = samples[0];
    origin + samples.iter().map(|z| z - origin).sum::<c64>() / samples.len() as f64
}

/// Sample mean and covariance (normalized by `n − 1`) of points in the plane.
pub fn sample_moments(samples: &[c64]) -> Result<(c64, [[f64; 2]; 2])> {
    if samples.len() < 2 {
        return Err(DmdError::TooFewSamples {
            required: 2,
            got: samples.len(),
        });
    }
    let n = samples.len() as f64;
    let mean = shifted_mean(samples);
    let (mut rr, mut ri, mut ii) = (0.0, 0.0, 0.0);
    for z in samples {
        let d = z - mean;
        rr += d.re * d.re;
        ri += d.re * d.im;
        ii += d.im * d.im;
    }
    let s = 1.0 / (n - 1.0);
    Ok((mean, [[rr * s, ri * s], [ri * s, ii * s]]))
}

/// Confidence ellipse `{z : (z − c)ᵀ Σ⁻¹ (z − c) ≤ χ²}` of a 2-D sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub center: c64,
    pub cov: [[f64; 2]; 2],
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Angle of the major axis from the real axis, in `(−π/2, π/2]`.
    pub angle: f64,
    pub area: f64,
}

impl Ellipse {
    /// Ellipse at the 95% level from given moments. Slightly negative
    /// covariance eigenvalues from rounding are clamped to zero.
    pub fn from_moments(center: c64, cov: [[f64; 2]; 2]) -> Self {
        let (a, b, c) = (cov[0][0], cov[0][1], cov[1][1]);
        let half_tr = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        let l1 = (half_tr + rad).max(0.0);
        let l2 = (half_tr - rad).max(0.0);
        let angle = if b == 0.0 && a >= c {
            0.0
        } else {
            0.5 * (2.0 * b).atan2(a - c)
        };
        let semi_major = (CHI2_2DOF_95 * l1).sqrt();
        let semi_minor = (CHI2_2DOF_95 * l2).sqrt();
        Ellipse {
            center,
            cov,
            semi_major,
            semi_minor,
            angle,
            area: PI * semi_major * semi_minor,
        }
    }

    fn axes(&self) -> (c64, c64) {
        let u = c64::from_polar(1.0, self.angle);
        (u, c64::new(-u.im, u.re))
    }

    pub fn contains(&self, z: c64) -> bool {
        let (u1, u2) = self.axes();
        let d = z - self.center;
        let p1 = d.re * u1.re + d.im * u1.im;
        let p2 = d.re * u2.re + d.im * u2.im;
        let term = |p: f64, s: f64| {
            if s > 0.0 {
                (p / s).powi(2)
            } else if p == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        };
        term(p1, self.semi_major) + term(p2, self.semi_minor) <= 1.0
    }

    /// `count` points evenly spaced in parameter angle around the boundary,
    /// starting at the positive end of the major axis.
    pub fn boundary_points(&self, count: usize) -> Vec<c64> {
        let (u1, u2) = self.axes();
        (0..count)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / count as f64;
                self.center + u1 * (self.semi_major * t.cos()) + u2 * (self.semi_minor * t.sin())
            })
            .collect()
    }
}

/// 95% confidence ellipse of at least two samples. Two samples give a
/// degenerate (zero-area) ellipse along the segment joining them.
pub fn confidence_ellipse(samples: &[c64]) -> Result<Ellipse> {
    let (mean, cov) = sample_moments(samples)?;
    Ok(Ellipse::from_moments(mean, cov))
}

fn unit(v: &[c64]) -> Result<Vec<c64>> {
    let norm = cnorm(v);
    if !(norm > 0.0) {
        return Err(DmdError::InvalidParameter("vector must be nonzero".into()));
    }
    Ok(v.iter().map(|z| z / norm).collect())
}

fn check_lengths(mode: &[c64], reference: &[c64]) -> Result<()> {
    if mode.len() != reference.len() {
        return Err(DmdError::DimensionMismatch(format!(
            "mode has length {}, reference has {}",
            mode.len(),
            reference.len()
        )));
    }
    Ok(())
}

/// Unit-normalizes `mode` and multiplies it by the unit-modulus factor that
/// brings it closest to the unit-normalized `reference`.
pub fn align_phase(mode: &[c64], reference: &[c64]) -> Result<Vec<c64>> {
    check_lengths(mode, reference)?;
    let m = unit(mode)?;
    let r = unit(reference)?;
    let s = cdot(&r, &m);
    if s.norm() == 0.0 {
        return Err(DmdError::ZeroInnerProduct);
    }
    let c = s.conj() / s.norm();
    Ok(m.into_iter().map(|z| c * z).collect())
}

/// Distance between the phase-aligned unit mode and the unit reference, in
/// `[0, 2]`. Orthogonal vectors have no preferred phase and give `√2`.
pub fn mode_error(mode: &[c64], reference: &[c64]) -> Result<f64> {
    check_lengths(mode, reference)?;
    let m = unit(mode)?;
    let r = unit(reference)?;
    let s = cdot(&r, &m);
    let c = if s.norm() == 0.0 {
        c64::new(1.0, 0.0)
    } else {
        s.conj() / s.norm()
    };
    let diff: Vec<c64> = m.iter().zip(&r).map(|(a, b)| c * a - b).collect();
    Ok(cnorm(&diff))
}

/// Matched eigenvalues of one reference mode across trials.
#[derive(Debug, Clone, PartialEq)]
pub struct EigTrialStats {
    pub reference: c64,
    /// One entry per trial, `None` when nothing matched.
    pub samples: Vec<Option<c64>>,
    pub mean: Option<c64>,
    pub cov: Option<[[f64; 2]; 2]>,
    /// Present when at least two trials matched.
    pub ellipse: Option<Ellipse>,
    pub miss_count: usize,
}

impl EigTrialStats {
    pub fn new(reference: c64, samples: Vec<Option<c64>>) -> Self {
        let hits = Self::hits_of(&samples);
        let miss_count = samples.len() - hits.len();
        let mean = (!hits.is_empty()).then(|| shifted_mean(&hits));
        let cov = sample_moments(&hits).ok().map(|(_, c)| c);
        let ellipse = confidence_ellipse(&hits).ok();
        EigTrialStats {
            reference,
            samples,
            mean,
            cov,
            ellipse,
            miss_count,
        }
    }

    fn hits_of(samples: &[Option<c64>]) -> Vec<c64> {
        samples.iter().flatten().copied().collect()
    }

    pub fn hits(&self) -> Vec<c64> {
        Self::hits_of(&self.samples)
    }

    /// Mean of `|λ̂|` over matched trials and its standard error.
    pub fn modulus_mean_se(&self) -> Option<(f64, f64)> {
        let mods: Vec<f64> = self.hits().iter().map(|z| z.norm()).collect();
        if mods.len() < 2 {
            return None;
        }
        let n = mods.len() as f64;
        let mean = mods.iter().sum::<f64>() / n;
        let var = mods.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Some((mean, (var / n).sqrt()))
    }

    /// `|mean − reference|`.
    pub fn bias(&self) -> Option<f64> {
        self.mean.map(|m| (m - self.reference).norm())
    }
}

/// Phase-aligned mode errors of one reference mode across trials.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeErrorReport {
    /// One entry per trial, `None` when the eigenvalue was not matched.
    pub errors: Vec<Option<f64>>,
    pub worst_trial: Option<usize>,
    /// Full-space mode of the worst trial, unit norm and phase-aligned to the
    /// reference.
    pub worst_mode: Option<Vec<c64>>,
}

impl ModeErrorReport {
    pub fn worst_error(&self) -> Option<f64> {
        self.worst_trial.and_then(|t| self.errors[t])
    }

    /// Trial with the largest error; the earliest one wins ties.
    pub(crate) fn argmax(errors: &[Option<f64>]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (t, e) in errors.iter().enumerate() {
            if let Some(e) = *e {
                if best.map_or(true, |(_, b)| e > b) {
                    best = Some((t, e));
                }
            }
        }
        best.map(|(t, _)| t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::GaussianStream;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    #[test]
    fn match_basic() {
        let cands = [c(1.0, 0.0), c(0.0, 1.0)];
        assert_eq!(match_eigenvalue(&cands, c(0.0, 1.0), 0.1), Some(c(0.0, 1.0)));
        assert_eq!(match_eigenvalue(&cands, c(0.5, 0.5), 0.1), None);
    }

    #[test]
    fn match_ignores_lower_half_plane() {
        let cands = [c(0.9, -0.3), c(0.9, 0.2)];
        assert_eq!(match_index(&cands, c(0.9, -0.29), 0.6), Some(1));
    }

    #[test]
    fn match_ties_to_larger_modulus() {
        let cands = [c(0.75, 0.5), c(1.25, 0.5)];
        assert_eq!(match_index(&cands, c(1.0, 0.5), 0.3), Some(1));
        let cands = [c(1.25, 0.5), c(0.75, 0.5)];
        assert_eq!(match_index(&cands, c(1.0, 0.5), 0.3), Some(0));
    }

    #[test]
    fn circle_samples_give_round_ellipse() {
        let rho: f64 = 0.3;
        let samples: Vec<c64> = (0..720)
            .map(|i| c64::from_polar(rho, 2.0 * PI * i as f64 / 720.0) + c(1.0, 2.0))
            .collect();
        let e = confidence_ellipse(&samples).unwrap();
        // uniform circle has covariance (ρ²/2) I; the n−1 normalization
        // inflates it by n/(n−1)
        let expected = (CHI2_2DOF_95 * rho * rho / 2.0 * 720.0 / 719.0).sqrt();
        assert!((e.semi_major - expected).abs() < 1e-12);
        assert!((e.semi_minor - expected).abs() < 1e-12);
        assert!((e.center - c(1.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn identical_samples_zero_area() {
        let e = confidence_ellipse(&[c(0.5, 0.5); 5]).unwrap();
        assert_eq!(e.area, 0.0);
        assert!(e.contains(c(0.5, 0.5)));
        assert!(!e.contains(c(0.5, 0.50001)));
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            confidence_ellipse(&[c(1.0, 0.0)]),
            Err(DmdError::TooFewSamples { required: 2, got: 1 })
        ));
        let pair = confidence_ellipse(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(pair.area, 0.0);
    }

    #[test]
    fn area_matches_determinant_rule() {
        let mut g = GaussianStream::new(3);
        let samples: Vec<c64> = (0..200)
            .map(|_| {
                let (a, b) = (g.next_standard(), g.next_standard());
                c(2.0 * a + b, 0.3 * b)
            })
            .collect();
        let e = confidence_ellipse(&samples).unwrap();
        let det = e.cov[0][0] * e.cov[1][1] - e.cov[0][1] * e.cov[1][0];
        assert!((e.area - PI * CHI2_2DOF_95 * det.sqrt()).abs() < 1e-10 * e.area);
        // boundary points lie on the ellipse: Mahalanobis distance = χ²
        let inv = [
            [e.cov[1][1] / det, -e.cov[0][1] / det],
            [-e.cov[1][0] / det, e.cov[0][0] / det],
        ];
        for z in e.boundary_points(16) {
            let d = z - e.center;
            let q = d.re * (inv[0][0] * d.re + inv[0][1] * d.im)
                + d.im * (inv[1][0] * d.re + inv[1][1] * d.im);
            assert!((q - CHI2_2DOF_95).abs() < 1e-9);
        }
    }

    #[test]
    fn alignment_removes_pure_phase() {
        let r = vec![c(1.0, 2.0), c(-0.5, 0.1), c(0.0, 3.0)];
        let m: Vec<c64> = r.iter().map(|z| c(0.0, 1.0) * z).collect();
        let a = align_phase(&m, &r).unwrap();
        let ru = unit(&r).unwrap();
        for (x, y) in a.iter().zip(&ru) {
            assert!((x - y).norm() < 1e-15);
        }
        assert!(mode_error(&m, &r).unwrap() < 1e-15);
        let neg: Vec<c64> = r.iter().map(|z| -z).collect();
        assert!(mode_error(&neg, &r).unwrap() < 1e-15);
    }

    #[test]
    fn orthogonal_error_is_sqrt2() {
        let a = [c(1.0, 0.0), c(0.0, 0.0)];
        let b = [c(0.0, 0.0), c(0.0, 5.0)];
        assert!((mode_error(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(align_phase(&a, &b), Err(DmdError::ZeroInnerProduct)));
    }

    #[test]
    fn zero_vector_rejected() {
        let z = [c(0.0, 0.0); 2];
        assert!(align_phase(&z, &[c(1.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn trial_stats_counts_misses() {
        let s = EigTrialStats::new(
            c(1.0, 0.0),
            vec![Some(c(1.0, 0.0)), None, Some(c(1.0, 0.0)), Some(c(1.0, 0.0))],
        );
        assert_eq!(s.miss_count, 1);
        assert_eq!(s.cov, Some([[0.0; 2]; 2]));
        assert_eq!(s.ellipse.unwrap().area, 0.0);
        assert_eq!(s.modulus_mean_se(), Some((1.0, 0.0)));
    }
}
