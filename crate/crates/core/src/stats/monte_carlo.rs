use faer::c64;
use rayon::prelude::*;

use super::{align_phase, match_index, EigTrialStats, ModeErrorReport, DEFAULT_MATCH_RADIUS};
use crate::dmd::{AlgorithmSpec, PreparedSnapshots, ReducedDmd};
use crate::error::{DmdError, Result};
use crate::linalg::{cdot, cnorm};
use crate::snapshots::{subtract_mean, SnapshotMatrix};
use crate::synth::{add_noise, child_seed, NoiseSpec, PlantedField};

/// A noiseless eigenvalue, optionally with its full-space mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub eigenvalue: c64,
    pub mode: Option<Vec<c64>>,
}

/// Reference eigenpairs of a planted field: `λ_j = exp((g_j + 2πi·st_j)·dt)`
/// with the planted shape as mode.
pub fn planted_references(field: &PlantedField) -> Vec<Reference> {
    field
        .modes
        .iter()
        .map(|md| Reference {
            eigenvalue: md.eigenvalue(field.dt),
            mode: Some(md.shape.clone()),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloConfig {
    /// At least two.
    pub trials: usize,
    pub base_seed: u64,
    pub match_radius: f64,
    /// Run trials on the rayon pool. Results do not depend on this.
    pub parallel: bool,
    /// Compute phase-aligned mode errors for references that carry a mode.
    pub mode_errors: bool,
    pub subtract_mean: bool,
}

impl MonteCarloConfig {
    pub fn new(trials: usize, base_seed: u64) -> Self {
        MonteCarloConfig {
            trials,
            base_seed,
            match_radius: DEFAULT_MATCH_RADIUS,
            parallel: true,
            mode_errors: true,
            subtract_mean: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeReport {
    pub stats: EigTrialStats,
    pub mode_errors: Option<ModeErrorReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmReport {
    pub spec: AlgorithmSpec,
    /// One entry per reference, in reference order.
    pub modes: Vec<ModeReport>,
    /// Truncation level used in each trial (TLS family only).
    pub k_used: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub trials: usize,
    pub sigma2: f64,
    pub algorithms: Vec<AlgorithmReport>,
}

/// What one algorithm produced for each reference in one trial.
struct TrialAlgo {
    matched: Vec<Option<c64>>,
    errors: Vec<Option<f64>>,
    k_used: Option<usize>,
}

struct TrialSetup<'a> {
    clean: &'a SnapshotMatrix,
    sigma2: f64,
    references: &'a [Reference],
    algorithms: &'a [AlgorithmSpec],
    cfg: &'a MonteCarloConfig,
}

impl TrialSetup<'_> {
    fn prepare(&self, trial: usize) -> Result<PreparedSnapshots> {
        let noise = NoiseSpec {
            variance: self.sigma2,
            seed: child_seed(self.cfg.base_seed, trial),
        };
        let mut noisy = add_noise(self.clean, &noise)?;
        if self.cfg.subtract_mean {
            noisy = subtract_mean(&noisy);
        }
        PreparedSnapshots::new(&noisy)
    }

    fn run(&self, trial: usize) -> Result<Vec<TrialAlgo>> {
        let prepared = self.prepare(trial)?;
        // unit references expressed in coefficient space, shared by all
        // algorithms of this trial
        let restricted: Vec<Option<(Vec<c64>, f64)>> = if self.cfg.mode_errors {
            self.references
                .iter()
                .map(|r| match &r.mode {
                    Some(v) => {
                        let norm = cnorm(v);
                        let unit: Vec<c64> = v.iter().map(|z| z / norm).collect();
                        prepared.restrict(&unit).map(|q| Some((q, norm)))
                    }
                    None => Ok(None),
                })
                .collect::<Result<_>>()?
        } else {
            vec![None; self.references.len()]
        };

        self.algorithms
            .iter()
            .map(|spec| {
                let red = prepared.run(spec)?;
                Ok(self.score(&red, &restricted))
            })
            .collect()
    }

    fn score(&self, red: &ReducedDmd, restricted: &[Option<(Vec<c64>, f64)>]) -> TrialAlgo {
        let mut matched = Vec::with_capacity(self.references.len());
        let mut errors = Vec::with_capacity(self.references.len());
        for (r, q) in self.references.iter().zip(restricted) {
            let idx = match_index(&red.eigenvalues, r.eigenvalue, self.cfg.match_radius);
            matched.push(idx.map(|i| red.eigenvalues[i]));
            errors.push(match (idx, q) {
                (Some(i), Some((q, _))) => {
                    // ‖c·Qw − ref‖² = 2 − 2|⟨Qw, ref⟩| for unit w and ref,
                    // and ⟨Qw, ref⟩ = ⟨w, Qᵀref⟩
                    let w: Vec<c64> = red.coeff_modes.col(i).iter().copied().collect();
                    let s = cdot(&w, q).norm();
                    Some((2.0 - 2.0 * s).max(0.0).sqrt())
                }
                _ => None,
            });
        }
        TrialAlgo {
            matched,
            errors,
            k_used: red.k_used,
        }
    }

    fn worst_mode(&self, trial: usize, alg: usize, reference: &Reference) -> Result<Option<Vec<c64>>> {
        let prepared = self.prepare(trial)?;
        let red = prepared.run(&self.algorithms[alg])?;
        let Some(i) = match_index(&red.eigenvalues, reference.eigenvalue, self.cfg.match_radius)
        else {
            return Ok(None);
        };
        let lifted = prepared.lift_modes(red.coeff_modes.subcols(i, 1));
        let mode: Vec<c64> = lifted.col(0).iter().copied().collect();
        let refmode = reference.mode.as_deref().expect("worst mode only for references with modes");
        Ok(Some(align_phase(&mode, refmode).unwrap_or(mode)))
    }
}

/// Repeats every algorithm on `trials` noisy copies of `clean`.
///
/// Trial `t` adds `N(0, sigma2)` noise seeded with `child_seed(base_seed, t)`
/// and runs all algorithms on that same noisy matrix. Results are gathered
/// in trial order, so they are identical for serial and parallel runs.
pub fn monte_carlo(
    clean: &SnapshotMatrix,
    sigma2: f64,
    references: &[Reference],
    algorithms: &[AlgorithmSpec],
    cfg: &MonteCarloConfig,
) -> Result<MonteCarloReport> {
    if cfg.trials < 2 {
        return Err(DmdError::InvalidParameter(format!(
            "need at least 2 trials, got {}",
            cfg.trials
        )));
    }
    if !(cfg.match_radius > 0.0) {
        return Err(DmdError::InvalidParameter(format!(
            "match radius must be positive, got {}",
            cfg.match_radius
        )));
    }
    for r in references {
        if let Some(m) = &r.mode {
            if m.len() != clean.n() {
                return Err(DmdError::DimensionMismatch(format!(
                    "reference mode has length {}, snapshots have {} rows",
                    m.len(),
                    clean.n()
                )));
            }
            if cnorm(m) == 0.0 {
                return Err(DmdError::InvalidParameter("reference mode is zero".into()));
            }
        }
    }

    let setup = TrialSetup {
        clean,
        sigma2,
        references,
        algorithms,
        cfg,
    };
    let run = |t: usize| setup.run(t).map_err(|e| DmdError::Trial { trial: t, source: Box::new(e) });
    let outcomes: Vec<Result<Vec<TrialAlgo>>> = if cfg.parallel {
        (0..cfg.trials).into_par_iter().map(run).collect()
    } else {
        (0..cfg.trials).map(run).collect()
    };
    let outcomes: Vec<Vec<TrialAlgo>> = outcomes.into_iter().collect::<Result<_>>()?;

    let mut reports = Vec::with_capacity(algorithms.len());
    for (a, spec) in algorithms.iter().enumerate() {
        let mut modes = Vec::with_capacity(references.len());
        for (j, reference) in references.iter().enumerate() {
            let samples: Vec<Option<c64>> = outcomes.iter().map(|o| o[a].matched[j]).collect();
            let stats = EigTrialStats::new(reference.eigenvalue, samples);
            let mode_errors = if cfg.mode_errors && reference.mode.is_some() {
                let errors: Vec<Option<f64>> = outcomes.iter().map(|o| o[a].errors[j]).collect();
                let worst_trial = ModeErrorReport::argmax(&errors);
                let worst_mode = match worst_trial {
                    Some(t) => setup
                        .worst_mode(t, a, reference)
                        .map_err(|e| DmdError::Trial { trial: t, source: Box::new(e) })?,
                    None => None,
                };
                Some(ModeErrorReport {
                    errors,
                    worst_trial,
                    worst_mode,
                })
            } else {
                None
            };
            modes.push(ModeReport { stats, mode_errors });
        }
        reports.push(AlgorithmReport {
            spec: *spec,
            modes,
            k_used: outcomes.iter().map(|o| o[a].k_used).collect(),
        });
    }
    Ok(MonteCarloReport {
        trials: cfg.trials,
        sigma2,
        algorithms: reports,
    })
}
