//! Repeated train/test comparison of PLSR, PCR and ridge regression, with
//! per-component training-error curves for PLSR and PCR.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{approximation_error, fit_ols, fit_pcr, fit_ridge};
use crate::dataprep::{standardize, RawDataset};
use crate::dof_lanczos::dof_lanczos;
use crate::linalg::numerical_rank;
use crate::pls::{coefficients_original_scale, fit_pls, predict};
use crate::selection::{cross_validate_curve, fold_assignment, pls_path_predictions, CvConfig};
use crate::{PlsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegressionMethod {
    Pls,
    Pcr,
    Ridge,
}

impl RegressionMethod {
    pub const ALL: [RegressionMethod; 3] = [RegressionMethod::Pls, RegressionMethod::Pcr, RegressionMethod::Ridge];

    pub fn name(self) -> &'static str {
        match self {
            RegressionMethod::Pls => "PLS",
            RegressionMethod::Pcr => "PCR",
            RegressionMethod::Ridge => "RIDGE",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonConfig {
    pub n_train: usize,
    /// Defaults to all rows not used for training.
    pub n_test: Option<usize>,
    pub reps: usize,
    pub seed: u64,
    pub m_max: usize,
    /// Ridge penalties on the standardized scale; all must be positive.
    pub lambdas: Vec<f64>,
    pub folds: usize,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self { n_train: 50, n_test: Some(153), reps: 50, seed: 0, m_max: 30, lambdas: default_lambda_grid(), folds: 10 }
    }
}

/// 20 log-spaced penalties from `1e-3` to `1e4`.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..20).map(|i| 10f64.powf(-3.0 + 7.0 * i as f64 / 19.0)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RepMetrics {
    pub rep: usize,
    pub method: RegressionMethod,
    pub test_mse: f64,
    pub chosen_components: Option<usize>,
    pub chosen_lambda: Option<f64>,
    pub chosen_dof: f64,
}

/// Training-set quantities for one split and one component count.
#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub rep: usize,
    pub m: usize,
    pub pls_training_error: f64,
    pub pcr_training_error: f64,
    pub pls_dof: f64,
    pub pcr_dof: f64,
    pub pls_approximation_error: f64,
    pub pcr_approximation_error: f64,
}

/// Curve averages over the reps that reach `m`.
#[derive(Debug, Clone, Serialize)]
pub struct MeanCurvePoint {
    pub m: usize,
    pub reps: usize,
    pub pls_training_error: f64,
    pub pcr_training_error: f64,
    pub pls_dof: f64,
    pub pcr_dof: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub seed: u64,
    pub reps: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub lambdas: Vec<f64>,
    pub metrics: Vec<RepMetrics>,
    pub curves: Vec<CurvePoint>,
    pub mean_curve: Vec<MeanCurvePoint>,
}

fn validate(raw: &RawDataset, cfg: &ComparisonConfig) -> Result<usize> {
    let n_test = cfg.n_test.unwrap_or(raw.n().saturating_sub(cfg.n_train));
    if cfg.n_train + n_test > raw.n() {
        return Err(PlsError::SplitTooLarge { requested: cfg.n_train + n_test, available: raw.n() });
    }
    if n_test == 0 || cfg.n_train < 3 {
        return Err(PlsError::InvalidConfig("need at least 3 training rows and 1 test row".into()));
    }
    if cfg.reps == 0 {
        return Err(PlsError::InvalidConfig("reps must be at least 1".into()));
    }
    if cfg.lambdas.is_empty() || cfg.lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(PlsError::InvalidConfig("ridge grid must be non-empty and positive".into()));
    }
    if cfg.folds < 2 || cfg.folds > cfg.n_train {
        return Err(PlsError::InvalidConfig(format!("{} folds for {} training rows", cfg.folds, cfg.n_train)));
    }
    Ok(n_test)
}

pub fn compare_methods(raw: &RawDataset, cfg: &ComparisonConfig) -> Result<ComparisonReport> {
    let n_test = validate(raw, cfg)?;
    let per_rep: Vec<(Vec<RepMetrics>, Vec<CurvePoint>)> =
        (0..cfg.reps).into_par_iter().map(|rep| run_rep(raw, cfg, n_test, rep)).collect::<Result<_>>()?;
    let mut metrics = Vec::new();
    let mut curves = Vec::new();
    for (m, c) in per_rep {
        metrics.extend(m);
        curves.extend(c);
    }
    let top = curves.iter().map(|c| c.m).max().unwrap_or(0);
    let mean_curve = (0..=top)
        .filter_map(|m| {
            let pts: Vec<&CurvePoint> = curves.iter().filter(|c| c.m == m).collect();
            let k = pts.len() as f64;
            (!pts.is_empty()).then(|| MeanCurvePoint {
                m,
                reps: pts.len(),
                pls_training_error: pts.iter().map(|c| c.pls_training_error).sum::<f64>() / k,
                pcr_training_error: pts.iter().map(|c| c.pcr_training_error).sum::<f64>() / k,
                pls_dof: pts.iter().map(|c| c.pls_dof).sum::<f64>() / k,
                pcr_dof: pts.iter().map(|c| c.pcr_dof).sum::<f64>() / k,
            })
        })
        .collect();
    Ok(ComparisonReport {
        seed: cfg.seed,
        reps: cfg.reps,
        n_train: cfg.n_train,
        n_test,
        lambdas: cfg.lambdas.clone(),
        metrics,
        curves,
        mean_curve,
    })
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &v)| if v < best.1 { (i, v) } else { best })
        .0
}

fn pcr_path_predictions(train: &RawDataset, test_x: &DMatrix<f64>, m_max: usize) -> Result<Vec<DVector<f64>>> {
    let d = standardize(train)?;
    let top = m_max.min(numerical_rank(&d.x));
    let model = fit_pcr(&d, top)?;
    (0..=m_max)
        .map(|m| {
            let (b0, b) = model.coefficients_original_scale(m.min(top), &d)?;
            predict(b0, &b, test_x)
        })
        .collect()
}

fn ridge_predictions(train: &RawDataset, test_x: &DMatrix<f64>, lambdas: &[f64]) -> Result<Vec<DVector<f64>>> {
    let d = standardize(train)?;
    lambdas
        .iter()
        .map(|&l| {
            let r = fit_ridge(&d, l)?;
            predict(r.intercept, &r.beta_original, test_x)
        })
        .collect()
}

fn run_rep(raw: &RawDataset, cfg: &ComparisonConfig, n_test: usize, rep: usize) -> Result<(Vec<RepMetrics>, Vec<CurvePoint>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep as u64);
    let mut order: Vec<usize> = (0..raw.n()).collect();
    order.shuffle(&mut rng);
    let train = raw.rows(&order[..cfg.n_train])?;
    let test = raw.rows(&order[cfg.n_train..cfg.n_train + n_test])?;
    let folds = fold_assignment(cfg.n_train, &CvConfig { folds: cfg.folds, seed: rng.next_u64(), shuffle: true })?;

    let data = standardize(&train)?;
    let rank = numerical_rank(&data.x);
    let pls = fit_pls(&data, cfg.m_max.min(cfg.n_train - 1).min(data.p()))?;
    let m_top = pls.n_components().min(rank);
    let pcr = fit_pcr(&data, m_top)?;
    let pls_dof = dof_lanczos(&data, pls.n_components(), false)?.dof;
    let ols = fit_ols(&data)?;
    let n = cfg.n_train;

    let mse = |b0: f64, b: &DVector<f64>| -> Result<f64> {
        Ok((predict(b0, b, &test.x)? - &test.y).norm_squared() / n_test as f64)
    };

    let pls_cv = cross_validate_curve(&train, &folds, m_top + 1, |tr, tx| pls_path_predictions(tr, tx, m_top))?;
    let m_pls = argmin(&pls_cv);
    let (b0, b) = coefficients_original_scale(&pls, m_pls, &data)?;
    let pls_row = RepMetrics {
        rep,
        method: RegressionMethod::Pls,
        test_mse: mse(b0, &b)?,
        chosen_components: Some(m_pls),
        chosen_lambda: None,
        chosen_dof: pls_dof[m_pls],
    };

    let pcr_cv = cross_validate_curve(&train, &folds, m_top + 1, |tr, tx| pcr_path_predictions(tr, tx, m_top))?;
    let m_pcr = argmin(&pcr_cv);
    let (b0, b) = pcr.coefficients_original_scale(m_pcr, &data)?;
    let pcr_row = RepMetrics {
        rep,
        method: RegressionMethod::Pcr,
        test_mse: mse(b0, &b)?,
        chosen_components: Some(m_pcr),
        chosen_lambda: None,
        chosen_dof: pcr.dof[m_pcr],
    };

    let ridge_cv = cross_validate_curve(&train, &folds, cfg.lambdas.len(), |tr, tx| ridge_predictions(tr, tx, &cfg.lambdas))?;
    let ridge = fit_ridge(&data, cfg.lambdas[argmin(&ridge_cv)])?;
    let ridge_row = RepMetrics {
        rep,
        method: RegressionMethod::Ridge,
        test_mse: mse(ridge.intercept, &ridge.beta_original)?,
        chosen_components: None,
        chosen_lambda: Some(ridge.lambda),
        chosen_dof: ridge.dof,
    };

    let pls_rss = pls.rss_path();
    let pcr_rss = pcr.rss_path();
    let curves = (0..=m_top)
        .map(|m| {
            Ok(CurvePoint {
                rep,
                m,
                pls_training_error: pls_rss[m] / n as f64,
                pcr_training_error: pcr_rss[m] / n as f64,
                pls_dof: pls_dof[m],
                pcr_dof: pcr.dof[m],
                pls_approximation_error: approximation_error(&ols.fitted, &pls.fitted(m)?, n)?,
                pcr_approximation_error: approximation_error(&ols.fitted, &pcr.fitted_path.column(m).into_owned(), n)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((vec![pls_row, pcr_row, ridge_row], curves))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn dataset(n: usize, p: usize, seed: u64) -> RawDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0));
        let beta = DVector::from_fn(p, |j, _| 1.0 / (j as f64 + 1.0));
        let y = &x * beta + DVector::from_fn(n, |_, _| 0.3 * rng.random_range(-1.0..1.0));
        RawDataset::new(x, y).unwrap()
    }

    fn small() -> ComparisonConfig {
        ComparisonConfig { n_train: 30, n_test: Some(40), reps: 2, seed: 3, m_max: 8, folds: 5, ..Default::default() }
    }

    #[test]
    fn report_shape_and_finiteness() {
        let r = compare_methods(&dataset(80, 6, 1), &small()).unwrap();
        assert_eq!(r.metrics.len(), 6);
        for row in &r.metrics {
            assert!(row.test_mse.is_finite() && row.test_mse >= 0.0);
            assert!(row.chosen_dof.is_finite());
        }
        assert!(r.curves.iter().all(|c| c.pcr_dof == c.m as f64 + 1.0));
    }

    #[test]
    fn pls_training_error_dominates_pcr() {
        let r = compare_methods(&dataset(80, 6, 2), &small()).unwrap();
        for c in &r.curves {
            assert!(c.pls_training_error <= c.pcr_training_error + 1e-10, "{c:?}");
            assert!(c.pls_approximation_error <= c.pcr_approximation_error + 1e-10);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let a = compare_methods(&dataset(80, 5, 4), &small()).unwrap();
        let b = compare_methods(&dataset(80, 5, 4), &small()).unwrap();
        let bits = |r: &ComparisonReport| r.metrics.iter().map(|m| m.test_mse.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn oversized_split_is_rejected() {
        let cfg = ComparisonConfig { n_train: 50, n_test: Some(153), ..small() };
        assert_eq!(
            compare_methods(&dataset(60, 4, 5), &cfg).unwrap_err(),
            PlsError::SplitTooLarge { requested: 203, available: 60 }
        );
    }

    #[test]
    fn lambda_grid_is_increasing() {
        let g = default_lambda_grid();
        assert_eq!(g.len(), 20);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
