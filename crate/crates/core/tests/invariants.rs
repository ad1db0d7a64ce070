use ness_efp::correlation::{
    assemble_full_skew, assemble_theta, assemble_theta_structured, efp, efp_profile, AssemblyPath, NessModel,
};
use ness_efp::model::{ness_density, toeplitz_symbol, ChainParams, Pm, ScalarSymbol};
use ness_efp::linalg::Matrix;
use ness_efp::oracle::{FiniteVolume, FiniteVolumeSpec};
use ness_efp::pfaffian::{logdet, pfaffian};
use ness_efp::szego::{decay_rates, geometric_mean, toeplitz_section, HankelMode};
use ness_efp::{Integrator, QuadSpec};
use proptest::prelude::*;

fn model(p: ChainParams<f64>) -> NessModel<f64> {
    NessModel::new(p, QuadSpec::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn structured_path_matches_direct(bl in 0.1f64..2.0, extra in 0.0f64..3.0, kappa in 0.05f64..3.0, x0 in 0i64..4) {
        let m = model(ChainParams::new(bl, bl + extra, kappa, x0, 0).unwrap());
        let d = assemble_theta(&m, 6).unwrap();
        let s = assemble_theta_structured(&m, 6, HankelMode::B).unwrap();
        prop_assert!(d.matrix.max_abs_diff(&s.matrix) <= 1e-8);
        prop_assert!(d.matrix.hermitian_defect() <= 1e-12);
        prop_assert!(d.matrix.as_slice().iter().all(|z| z.norm() <= 1.0));
    }

    #[test]
    fn probabilities_decrease(bl in 0.1f64..2.0, extra in 0.0f64..3.0, kappa in 0.05f64..3.0, x0 in -3i64..4) {
        let m = model(ChainParams::new(bl, bl + extra, kappa, x0, 0).unwrap());
        let p: Vec<f64> = efp_profile(&m, 7, AssemblyPath::Direct).unwrap().iter().map(|v| v.value().re).collect();
        prop_assert!(p.iter().all(|&v| v > 0.0 && v <= 1.0));
        prop_assert!(p.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn pfaffian_of_full_matrix(bl in 0.1f64..2.0, extra in 0.0f64..3.0, kappa in 0.05f64..3.0, x0 in -2i64..3) {
        let m = model(ChainParams::new(bl, bl + extra, kappa, x0, 0).unwrap());
        let full = assemble_full_skew(&m, 4).unwrap();
        let det = logdet(&assemble_theta(&m, 4).unwrap().matrix).unwrap();
        prop_assert!(pfaffian(&full).rel_diff(&det) <= 1e-10);
    }

    #[test]
    fn infinite_temperature_any_coupling(kappa in 0.01f64..5.0, x0 in -4i64..5) {
        let m = model(ChainParams::infinite_temperature(kappa, x0, 0).unwrap());
        let p = efp(&m, 4).unwrap();
        prop_assert!((p.value().re * 16.0 - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn rate_identity(bl in 0.05f64..4.0, extra in 0.0f64..4.0, kappa in 0.01f64..20.0) {
        let p = ChainParams::new(bl, bl + extra, kappa, 0, 0).unwrap();
        let q = Integrator::new(QuadSpec::default()).unwrap();
        let r = decay_rates(&p, &q).unwrap();
        let g = geometric_mean(&toeplitz_symbol(&p), &q).unwrap();
        prop_assert!((r.gamma_total - g.rate).abs() <= 1e-10);
        prop_assert!(r.rewrite_defect <= 1e-10);
        if extra > 1e-3 {
            prop_assert!(r.strictly_ordered());
        }
    }
}

#[test]
fn equal_temperatures_leave_a_pure_hankel_remainder() {
    let m = model(ChainParams::new(0.8, 0.8, 0.3, 0, 0).unwrap());
    let q = m.integrator();
    let p = *m.params();
    let thermal = ScalarSymbol::real(move |k| ness_density(&p, k, Pm::Minus), &[0.0], None);
    let t = toeplitz_section(&thermal, 5, q).unwrap();
    assert!(toeplitz_section(&toeplitz_symbol(&p), 5, q).unwrap().max_abs_diff(&t) <= 1e-12);
    let s = assemble_theta_structured(&m, 5, HankelMode::B).unwrap();
    let h = Matrix::from_fn(5, 5, |i, j| s.matrix[(i, j)] - t[(i, j)]);
    assert!(h.as_slice().iter().any(|z| z.norm() > 1e-4));
    for i in 0..4 {
        for j in 1..5 {
            assert!((h[(i, j)] - h[(i + 1, j - 1)]).norm() <= 1e-12);
        }
    }
}

#[test]
fn small_coupling_matches_translation_invariant_density() {
    let m = model(ChainParams::new(0.5, 2.0, 1e-6, 1, 0).unwrap());
    let p = *m.params();
    let s = ScalarSymbol::real(move |k| ness_density(&p, k, Pm::Minus), &[], None);
    let t = toeplitz_section(&s, 5, m.integrator()).unwrap();
    let d = assemble_theta(&m, 5).unwrap();
    for i in 0..5 {
        for j in i..5 {
            assert!((d.matrix[(i, j)] - t[(i, j)]).norm() <= 1e-4);
        }
    }
}

#[test]
fn oracle_entries_agree() {
    let p = ChainParams::new(0.5, 2.0, 0.2, 1, 0).unwrap();
    let fv = FiniteVolume::new(FiniteVolumeSpec::default(), p).unwrap();
    let avg = fv.theta_time_average(5).unwrap();
    let exact = assemble_theta(&model(p), 5).unwrap();
    assert!(avg.matrix.max_abs_diff(&exact.matrix) <= 5e-3);
}
