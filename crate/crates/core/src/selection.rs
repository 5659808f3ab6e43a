//! Choosing the number of PLSR components.
//!
//! BIC is `‖ŷ_m − y‖² + log(n)·σ̂²·DoF(m)`, with `σ̂²` recomputed for every
//! candidate from that candidate's own residual and DoF:
//!
//! * `Lanczos`: DoF from [`crate::dof_lanczos`], `σ̂*² = rss / ‖I − H‖_F²`
//!   with the approximate hat matrix `H`.
//! * `Krylov`: DoF from [`crate::dof_krylov`], `σ̂² = rss / (n − DoF)`.
//! * `Naive`: DoF `m + 1`, `σ̂² = rss / (n − m − 1)`.
//!
//! Candidates after the first negative DoF are dropped, and a candidate whose
//! noise estimate is undefined (`DoF ≥ n`) stays in the table but is never
//! chosen.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dataprep::{standardize, RawDataset, StandardizedData};
use crate::dof_krylov::dof_krylov_path;
use crate::dof_lanczos::{approximate_hat_matrix, dof_lanczos};
use crate::pls::{coefficients_original_scale, fit_pls, predict};
use crate::{PlsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Cv,
    Lanczos,
    Krylov,
    Naive,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Cv, Method::Lanczos, Method::Krylov, Method::Naive];

    pub fn name(self) -> &'static str {
        match self {
            Method::Cv => "CV",
            Method::Lanczos => "LANCZOS",
            Method::Krylov => "KRYLOV",
            Method::Naive => "NAIVE",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionRow {
    pub m: usize,
    /// Training `‖ŷ_m − y‖²`.
    pub rss: f64,
    pub dof: Option<f64>,
    pub sigma2_hat: Option<f64>,
    /// BIC value, or the mean squared prediction error for CV.
    pub criterion: Option<f64>,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionTable {
    pub method: Method,
    pub rows: Vec<CriterionRow>,
    pub chosen_m: usize,
    /// First excluded component count under the negative-DoF rule.
    pub truncated_at: Option<usize>,
}

impl CriterionTable {
    pub fn chosen(&self) -> &CriterionRow {
        &self.rows[self.chosen_m]
    }

    fn from_rows(method: Method, rows: Vec<CriterionRow>, truncated_at: Option<usize>) -> Result<Self> {
        let chosen_m = argmin(&rows).ok_or(PlsError::DegenerateDenominator)?;
        Ok(Self { method, rows, chosen_m, truncated_at })
    }
}

/// Smallest `m` attaining the minimum criterion among valid rows.
fn argmin(rows: &[CriterionRow]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for row in rows.iter().filter(|r| r.valid) {
        if let Some(v) = row.criterion {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((row.m, v));
            }
        }
    }
    best.map(|(m, _)| m)
}

/// `σ̂* = sqrt(‖r‖² / trace((I − H)(I − H)ᵀ))`.
pub fn sigma_hat_star(residual: &DVector<f64>, hat: &DMatrix<f64>) -> Result<f64> {
    let n = residual.len();
    if hat.shape() != (n, n) {
        return Err(PlsError::DimensionMismatch { expected: n, found: hat.nrows() });
    }
    let denom = (DMatrix::identity(n, n) - hat).norm_squared();
    if !(denom > 1e-10) {
        return Err(PlsError::DegenerateDenominator);
    }
    Ok((residual.norm_squared() / denom).sqrt())
}

/// `σ̂ = sqrt(rss / (n − dof))`.
pub fn sigma_hat(rss: f64, n: usize, dof: f64) -> Result<f64> {
    if !(dof < n as f64) {
        return Err(PlsError::DofExceedsN { dof, n });
    }
    Ok((rss / (n as f64 - dof)).sqrt())
}

pub fn bic(rss: f64, n: f64, sigma2: f64, dof: f64) -> f64 {
    rss + n.ln() * sigma2 * dof
}

/// Valid-prefix length and per-entry validity: everything from the first
/// negative entry on is invalid.
pub fn truncate_negative_dof(dof: &[f64]) -> (usize, Vec<bool>) {
    let len = dof.iter().position(|&d| d < 0.0).unwrap_or(dof.len());
    (len, (0..dof.len()).map(|i| i < len).collect())
}

/// BIC selection over `m = 0..=m_max` (limited by the fitted path).
pub fn select_bic(data: &StandardizedData, m_max: usize, method: Method) -> Result<CriterionTable> {
    let model = fit_pls(data, m_max)?;
    let rss = model.rss_path();
    let n = data.n();
    let k = model.n_components();

    let mut rows = Vec::with_capacity(k + 1);
    let truncated_at = match method {
        Method::Naive => {
            for (m, &r) in rss.iter().enumerate() {
                rows.push(plug_in_row(m, r, n, m as f64 + 1.0));
            }
            None
        }
        Method::Krylov => {
            let path = dof_krylov_path(data, &model, k)?;
            let (len, _) = truncate_negative_dof(&path.dof);
            for m in 0..len {
                rows.push(plug_in_row(m, rss[m], n, path.dof[m]));
            }
            (len < path.dof.len()).then_some(len)
        }
        Method::Lanczos => {
            let jp = dof_lanczos(data, k, true)?;
            let (len, _) = truncate_negative_dof(&jp.dof);
            for m in 0..len {
                let dof = jp.dof[m];
                let resid = &model.y_raw - model.fitted_path.column(m);
                let hat = approximate_hat_matrix(&jp, m)?;
                let sigma = sigma_hat_star(&resid, &hat).ok();
                rows.push(bic_row(m, rss[m], n, dof, sigma));
            }
            (len < jp.dof.len()).then_some(len)
        }
        Method::Cv => {
            return Err(PlsError::InvalidConfig("cross-validation is run through cross_validate".into()));
        }
    };
    CriterionTable::from_rows(method, rows, truncated_at)
}

fn plug_in_row(m: usize, rss: f64, n: usize, dof: f64) -> CriterionRow {
    bic_row(m, rss, n, dof, sigma_hat(rss, n, dof).ok())
}

fn bic_row(m: usize, rss: f64, n: usize, dof: f64, sigma: Option<f64>) -> CriterionRow {
    let sigma2 = sigma.map(|s| s * s);
    CriterionRow {
        m,
        rss,
        dof: Some(dof),
        sigma2_hat: sigma2,
        criterion: sigma2.map(|s2| bic(rss, n as f64, s2, dof)),
        valid: sigma2.is_some(),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { folds: 10, seed: 0, shuffle: true }
    }
}

/// Partitions `0..n` into `cfg.folds` test folds of near-equal size.
pub fn fold_assignment(n: usize, cfg: &CvConfig) -> Result<Vec<Vec<usize>>> {
    if cfg.folds < 2 || cfg.folds > n {
        return Err(PlsError::FoldTooSmall(format!("{} folds for {n} rows", cfg.folds)));
    }
    let mut order: Vec<usize> = (0..n).collect();
    if cfg.shuffle {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    }
    let mut folds = vec![Vec::new(); cfg.folds];
    for (pos, idx) in order.into_iter().enumerate() {
        folds[pos % cfg.folds].push(idx);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Cross-validated mean squared prediction error for every parameter index
/// `0..n_params`. `fit_predict(train, test_x)` returns one prediction vector
/// per parameter; each training fold is a fresh [`RawDataset`], so any
/// standardization happens inside the fold.
pub fn cross_validate_curve<F>(raw: &RawDataset, folds: &[Vec<usize>], n_params: usize, fit_predict: F) -> Result<Vec<f64>>
where
    F: Fn(&RawDataset, &DMatrix<f64>) -> Result<Vec<DVector<f64>>>,
{
    let n = raw.n();
    let mut seen = vec![false; n];
    for &i in folds.iter().flatten() {
        if i >= n || seen[i] {
            return Err(PlsError::FoldTooSmall("folds do not partition the rows".into()));
        }
        seen[i] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(PlsError::FoldTooSmall("folds do not cover every row".into()));
    }
    let mut sse = vec![0.0; n_params];
    for test in folds {
        let train: Vec<usize> = (0..n).filter(|i| test.binary_search(i).is_err()).collect();
        if train.len() < 2 || test.is_empty() {
            return Err(PlsError::FoldTooSmall(format!("training fold of {} rows", train.len())));
        }
        let train_raw = raw.rows(&train)?;
        let test_raw = raw.rows(test)?;
        let preds = fit_predict(&train_raw, &test_raw.x)?;
        for (k, pred) in preds.iter().enumerate().take(n_params) {
            sse[k] += (pred - &test_raw.y).norm_squared();
        }
    }
    Ok(sse.into_iter().map(|s| s / n as f64).collect())
}

/// PLSR predictions for `m = 0..=m_max`; beyond the fitted path the last
/// fitted model is reused (the Krylov space is exhausted there).
pub fn pls_path_predictions(train: &RawDataset, test_x: &DMatrix<f64>, m_max: usize) -> Result<Vec<DVector<f64>>> {
    let d = standardize(train)?;
    let model = fit_pls(&d, m_max.min(d.n() - 1).min(d.p()))?;
    (0..=m_max)
        .map(|m| {
            let (b0, b) = coefficients_original_scale(&model, m.min(model.n_components()), &d)?;
            predict(b0, &b, test_x)
        })
        .collect()
}

pub fn cross_validate(raw: &RawDataset, m_max: usize, cfg: &CvConfig) -> Result<CriterionTable> {
    let folds = fold_assignment(raw.n(), cfg)?;
    cross_validate_with_folds(raw, m_max, &folds)
}

pub fn cross_validate_with_folds(raw: &RawDataset, m_max: usize, folds: &[Vec<usize>]) -> Result<CriterionTable> {
    let min_train = folds.iter().map(|f| raw.n() - f.len()).min().unwrap_or(0);
    if min_train < 2 {
        return Err(PlsError::FoldTooSmall(format!("training fold of {min_train} rows")));
    }
    let full = standardize(raw)?;
    let model = fit_pls(&full, m_max.min(raw.n() - 1).min(raw.p()))?;
    let top = m_max.min(model.n_components());
    let errors = cross_validate_curve(raw, folds, top + 1, |train, test_x| pls_path_predictions(train, test_x, top))?;
    let rss = model.rss_path();
    let rows = (0..=top)
        .map(|m| CriterionRow {
            m,
            rss: rss[m],
            dof: None,
            sigma2_hat: None,
            criterion: Some(errors[m]),
            valid: true,
        })
        .collect();
    CriterionTable::from_rows(Method::Cv, rows, None)
}
