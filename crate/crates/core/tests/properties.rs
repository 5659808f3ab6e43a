use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use plsdof::baselines::{fit_pcr, fit_ridge};
use plsdof::dataprep::{moments, standardize};
use plsdof::dof_krylov::dof_krylov_path;
use plsdof::dof_lanczos::dof_lanczos;
use plsdof::linalg::numerical_rank;
use plsdof::oracle::closed_form_dof_one_component;
use plsdof::pls::fit_pls;
use plsdof::selection::{cross_validate, select_bic, CvConfig, Method};
use plsdof::{RawDataset, StandardizedData};

fn dataset() -> impl Strategy<Value = RawDataset> {
    (8usize..30, 2usize..8).prop_flat_map(|(n, p)| {
        (
            prop::collection::vec(-3.0f64..3.0, n * p),
            prop::collection::vec(-3.0f64..3.0, n),
        )
            .prop_map(move |(xs, ys)| {
                RawDataset::new(DMatrix::from_vec(n, p, xs), DVector::from_vec(ys)).unwrap()
            })
    })
}

fn standardized(raw: &RawDataset) -> StandardizedData {
    standardize(raw).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engines_agree_on_valid_prefix(raw in dataset()) {
        let data = standardized(&raw);
        let m_max = (data.n() - 1).min(data.p());
        let model = fit_pls(&data, m_max).unwrap();
        let k = model.n_components();
        let jp = dof_lanczos(&data, k, false).unwrap();
        let kp = dof_krylov_path(&data, &model, k).unwrap();
        let valid = jp.truncated_at.unwrap_or(jp.dof.len()).min(kp.truncated_at.unwrap_or(kp.dof.len()));
        prop_assert_eq!(jp.dof[0], 1.0);
        for m in 0..valid {
            prop_assert!((jp.dof[m] - kp.dof[m]).abs() < 1e-6, "m={} {} vs {}", m, jp.dof[m], kp.dof[m]);
        }
    }

    #[test]
    fn one_component_dof_matches_closed_form(raw in dataset()) {
        let data = standardized(&raw);
        let mm = moments(&data);
        let jp = dof_lanczos(&data, 1, false).unwrap();
        let cf = closed_form_dof_one_component(&mm.s_matrix, &mm.s_vector).unwrap();
        prop_assert!((jp.dof[1] - cf).abs() < 1e-8);
    }

    #[test]
    fn pls_fits_training_data_at_least_as_well_as_pcr(raw in dataset()) {
        let data = standardized(&raw);
        let top = (data.n() - 1).min(numerical_rank(&data.x));
        let pls = fit_pls(&data, top).unwrap().rss_path();
        let pcr = fit_pcr(&data, top).unwrap().rss_path();
        for m in 0..pls.len().min(pcr.len()) {
            prop_assert!(pls[m] <= pcr[m] + 1e-9 * (1.0 + pcr[m]));
        }
    }

    #[test]
    fn ridge_dof_decreases_in_lambda(raw in dataset(), a in 1e-3f64..10.0, b in 1e-3f64..10.0) {
        let data = standardized(&raw);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-6);
        let d_lo = fit_ridge(&data, lo).unwrap().dof;
        let d_hi = fit_ridge(&data, hi).unwrap().dof;
        prop_assert!(d_hi <= d_lo + 1e-12);
        prop_assert!(d_hi >= 1.0);
    }

    #[test]
    fn bic_selection_respects_truncation(raw in dataset()) {
        let data = standardized(&raw);
        let m_max = (data.n() - 1).min(data.p());
        for method in [Method::Krylov, Method::Lanczos, Method::Naive] {
            let table = select_bic(&data, m_max, method).unwrap();
            prop_assert!(table.chosen_m < table.rows.len());
            if let Some(t) = table.truncated_at {
                prop_assert!(table.rows.len() <= t);
            }
            prop_assert!(table.rows.iter().all(|r| r.dof.is_none_or(|d| d >= 0.0)));
        }
    }
}

#[test]
fn cross_validation_is_deterministic_for_a_seed() {
    let raw = RawDataset::new(
        DMatrix::from_fn(30, 4, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0 + 0.1 * j as f64),
        DVector::from_fn(30, |i, _| (i as f64 * 0.37).sin()),
    )
    .unwrap();
    let cfg = CvConfig { folds: 5, seed: 9, shuffle: true };
    let a = cross_validate(&raw, 4, &cfg).unwrap();
    let b = cross_validate(&raw, 4, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.method, Method::Cv);
}
