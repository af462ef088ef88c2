mod common;

use common::{multiset_distance, noisy_system, random_mat, test_spectrum};
use faer::linalg::solvers::Solve;
use faer::{c64, Mat};
use ttls_dmd::dmd::{pod_basis, project, EkNorm};
use ttls_dmd::synth::{gen_planted_field, GeneratorConfig};
use ttls_dmd::{
    decompose, shifted_pair, tls_dmd, ttls_dmd, AlgorithmSpec, DmdError, SnapshotMatrix,
    TruncationLevel, TtlsConfig,
};

fn all_specs(r: usize) -> [AlgorithmSpec; 4] {
    [
        AlgorithmSpec::Exact { r },
        AlgorithmSpec::Tls { r },
        AlgorithmSpec::Ttls(TtlsConfig::auto(r)),
        AlgorithmSpec::Subspace { r },
    ]
}

#[test]
fn noiseless_linear_system_spectrum_is_recovered() {
    let psi = noisy_system(30, 40, 0.0, 7);
    for spec in all_specs(5) {
        let res = decompose(&psi, &spec).unwrap();
        let d = multiset_distance(&res.eigenvalues, &test_spectrum());
        assert!(d < 1e-8, "{:?}: eigenvalue distance {d}", spec.algorithm());
    }
}

#[test]
fn modes_are_unit_norm_and_eigenvalues_ordered() {
    let psi = noisy_system(24, 50, 1e-3, 3);
    for spec in all_specs(6) {
        let res = decompose(&psi, &spec).unwrap();
        for i in 0..res.eigenvalues.len() {
            let norm: f64 = res.mode(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-10);
        }
        let args: Vec<f64> = res.eigenvalues.iter().map(|l| l.arg().abs()).collect();
        assert!(args.windows(2).all(|w| w[0] <= w[1] + 1e-15));
    }
}

#[test]
fn planted_field_strouhal_numbers() {
    let mut cfg = GeneratorConfig::cylinder_analog();
    cfg.grid = (21, 21);
    cfg.m = 120;
    let psi = gen_planted_field(&cfg.planted_field()).unwrap();
    for spec in all_specs(4) {
        let res = decompose(&psi, &spec).unwrap();
        let st: Vec<f64> = res.strouhal().iter().map(|&(s, _)| s).collect();
        for target in [0.147, -0.147, 0.296, -0.296] {
            let best = st.iter().map(|s| (s - target).abs()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9, "{:?} misses St {target}", spec.algorithm());
        }
        for l in &res.eigenvalues {
            assert!((l.norm() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn ttls_at_full_rank_is_tls() {
    for seed in 0..20 {
        let r = 2 + (seed as usize % 8);
        let psi = SnapshotMatrix::new(random_mat(30, 3 * r + 4, seed), 1.0).unwrap();
        let tls = tls_dmd(&psi, r).unwrap();
        let ttls = ttls_dmd(&psi, &TtlsConfig::new(r, TruncationLevel::Explicit(r))).unwrap();
        let d = multiset_distance(&tls.eigenvalues, &ttls.eigenvalues);
        assert!(d <= 1e-12, "seed {seed}: {d}");
    }
}

/// Textbook TLS solution of `X̃ᵀ Ãᵀ ≈ Ỹᵀ`: with `[X̃ᵀ Ỹᵀ] = U Σ Vᵀ` and `V`
/// split into `r × r` blocks, `Ãᵀ = −V₁₂ V₂₂⁻¹`.
fn classic_tls_operator(xt: &Mat<f64>, yt: &Mat<f64>) -> Mat<f64> {
    let r = xt.nrows();
    let z = Mat::from_fn(xt.ncols(), 2 * r, |i, j| {
        if j < r {
            xt[(j, i)]
        } else {
            yt[(j - r, i)]
        }
    });
    let svd = z.svd().unwrap();
    let v = svd.V();
    let v12 = v.submatrix(0, r, r, r);
    let v22 = v.submatrix(r, r, r, r);
    // V₂₂ᵀ Ã = −V₁₂ᵀ
    let rhs = Mat::from_fn(r, r, |i, j| -v12[(j, i)]);
    v22.transpose().to_owned().partial_piv_lu().solve(&rhs)
}

#[test]
fn tls_matches_textbook_formula() {
    for seed in 0..5 {
        let psi = noisy_system(20, 40, 1e-2, 100 + seed);
        let r = 5;
        let basis = pod_basis(&psi, r).unwrap();
        let reduced = project(&shifted_pair(&psi).unwrap(), &basis).unwrap();
        let oracle = classic_tls_operator(&reduced.x, &reduced.y);
        let expected: Vec<c64> = oracle.eigenvalues().unwrap();
        let got = tls_dmd(&psi, r).unwrap().eigenvalues;
        let d = multiset_distance(&got, &expected);
        assert!(d < 1e-10, "seed {seed}: {d}");
    }
}

#[test]
fn reduced_dimension_must_be_below_half_the_snapshots() {
    let psi = noisy_system(20, 20, 0.0, 1);
    for spec in [AlgorithmSpec::Tls { r: 10 }, AlgorithmSpec::Ttls(TtlsConfig::auto(12))] {
        let err = decompose(&psi, &spec).unwrap_err();
        assert!(matches!(err, DmdError::ReducedDimensionTooLarge { .. }), "{err}");
        assert!(err.to_string().contains("r < m/2"), "{err}");
    }
}

#[test]
fn truncation_level_outside_range_is_rejected() {
    let psi = noisy_system(20, 30, 0.0, 1);
    for k in [0, 6] {
        let cfg = TtlsConfig::new(5, TruncationLevel::Explicit(k));
        assert!(matches!(
            ttls_dmd(&psi, &cfg),
            Err(DmdError::InvalidTruncation { .. })
        ));
    }
}

#[test]
fn auto_selection_reports_its_scan() {
    let psi = noisy_system(25, 60, 0.05, 9);
    for norm in [EkNorm::Spectral, EkNorm::Frobenius] {
        let cfg = TtlsConfig {
            ek_norm: norm,
            ..TtlsConfig::auto(8)
        };
        let res = ttls_dmd(&psi, &cfg).unwrap();
        let scan = res.e_of_k.as_ref().unwrap();
        assert_eq!(scan.iter().map(|&(k, _)| k).collect::<Vec<_>>(), (1..=8).collect::<Vec<_>>());
        let k = res.k_used.unwrap();
        let e_opt = scan[k - 1].1;
        assert!(scan.iter().all(|&(_, e)| e_opt <= e + 1e-9 * scan[0].1.max(1.0)));
    }
}

#[test]
fn explicit_k_matches_auto_choice() {
    let psi = noisy_system(25, 60, 0.05, 11);
    let auto = ttls_dmd(&psi, &TtlsConfig::auto(8)).unwrap();
    let k = auto.k_used.unwrap();
    let fixed = ttls_dmd(&psi, &TtlsConfig::new(8, TruncationLevel::Explicit(k))).unwrap();
    assert_eq!(auto.eigenvalues, fixed.eigenvalues);
}
