//! Linear smoothers used as complexity references: ridge, principal
//! components regression and ordinary least squares.

use nalgebra::{DMatrix, DVector};

use crate::dataprep::StandardizedData;
use crate::linalg::{numerical_rank, symmetric_eigen};
use crate::pls::original_scale;
use crate::{PlsError, Result};

#[derive(Debug, Clone)]
pub struct RidgeModel {
    pub lambda: f64,
    /// Coefficients in the standardized scale.
    pub beta: DVector<f64>,
    /// Original-scale intercept and coefficients.
    pub intercept: f64,
    pub beta_original: DVector<f64>,
    /// `1 + Σ d_i/(d_i + λ)` over the eigenvalues `d_i` of `XᵀX`.
    pub dof: f64,
    pub fitted: DVector<f64>,
}

pub fn fit_ridge(data: &StandardizedData, lambda: f64) -> Result<RidgeModel> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(PlsError::InvalidConfig(format!("ridge penalty must be finite and ≥ 0, got {lambda}")));
    }
    let xt = data.x.transpose();
    let eig = symmetric_eigen(&(&xt * &data.x))?;
    let top = eig.values[0].max(0.0);
    let tol = data.n().max(data.p()) as f64 * f64::EPSILON * top;
    let d: Vec<f64> = eig.values.iter().map(|&v| if v > tol { v } else { 0.0 }).collect();
    if lambda == 0.0 && d.contains(&0.0) {
        return Err(PlsError::SingularSystem);
    }
    let proj = eig.vectors.transpose() * (&xt * &data.y);
    let shrunk = DVector::from_fn(d.len(), |i, _| if d[i] + lambda > 0.0 { proj[i] / (d[i] + lambda) } else { 0.0 });
    let beta = &eig.vectors * shrunk;
    let dof = 1.0 + d.iter().map(|&v| if v > 0.0 { v / (v + lambda) } else { 0.0 }).sum::<f64>();
    let fitted = (&data.x * &beta).add_scalar(data.y_mean);
    let (intercept, beta_original) = original_scale(&beta, data);
    Ok(RidgeModel { lambda, beta, intercept, beta_original, dof, fitted })
}

#[derive(Debug, Clone)]
pub struct PcrModel {
    /// Principal directions of `S`, by decreasing eigenvalue, `p × k`.
    pub directions: DMatrix<f64>,
    pub eigenvalues: DVector<f64>,
    pub beta_path: DMatrix<f64>,
    pub fitted_path: DMatrix<f64>,
    /// `m + 1` for each `m = 0..=k`.
    pub dof: Vec<f64>,
    pub y_raw: DVector<f64>,
}

impl PcrModel {
    pub fn n_components(&self) -> usize {
        self.directions.ncols()
    }

    pub fn rss_path(&self) -> Vec<f64> {
        self.fitted_path.column_iter().map(|c| (&self.y_raw - c).norm_squared()).collect()
    }

    pub fn coefficients_original_scale(&self, m: usize, data: &StandardizedData) -> Result<(f64, DVector<f64>)> {
        if m > self.n_components() {
            return Err(PlsError::ComponentOutOfRange { requested: m, available: self.n_components() });
        }
        Ok(original_scale(&self.beta_path.column(m).into_owned(), data))
    }
}

pub fn fit_pcr(data: &StandardizedData, m_max: usize) -> Result<PcrModel> {
    let rank = numerical_rank(&data.x);
    if m_max > rank {
        return Err(PlsError::RankExceeded { requested: m_max, rank });
    }
    let s = data.x.transpose() * &data.x / (data.n() as f64 - 1.0);
    let eig = symmetric_eigen(&s)?;
    let directions = eig.vectors.columns(0, m_max).into_owned();
    let eigenvalues = eig.values.rows(0, m_max).into_owned();
    let p = data.p();
    let mut beta_path = DMatrix::zeros(p, m_max + 1);
    for i in 0..m_max {
        let dir = directions.column(i);
        let z = &data.x * dir;
        let coef = z.dot(&data.y) / z.norm_squared();
        let next = beta_path.column(i) + dir * coef;
        beta_path.set_column(i + 1, &next);
    }
    let mut fitted_path = &data.x * &beta_path;
    fitted_path.add_scalar_mut(data.y_mean);
    Ok(PcrModel {
        directions,
        eigenvalues,
        beta_path,
        fitted_path,
        dof: (0..=m_max).map(|m| m as f64 + 1.0).collect(),
        y_raw: data.y.add_scalar(data.y_mean),
    })
}

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub beta: DVector<f64>,
    /// Raw-scale fitted values, `ȳ·1 + X β`.
    pub fitted: DVector<f64>,
    /// Projector onto the column space of the standardized `X`.
    pub hat: DMatrix<f64>,
    pub rank: usize,
    /// Set when `X` is rank deficient and the pseudo-inverse was used.
    pub pseudo_inverse: bool,
}

pub fn fit_ols(data: &StandardizedData) -> Result<OlsFit> {
    let svd = data.x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = data.n().max(data.p()) as f64 * f64::EPSILON * smax;
    let u = svd.u.as_ref().ok_or(PlsError::SingularSystem)?;
    let vt = svd.v_t.as_ref().ok_or(PlsError::SingularSystem)?;
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > tol).collect();
    let rank = keep.len();
    let mut beta = DVector::zeros(data.p());
    let mut hat = DMatrix::zeros(data.n(), data.n());
    for &i in &keep {
        let ui = u.column(i);
        let vi = vt.row(i).transpose();
        beta.axpy(ui.dot(&data.y) / svd.singular_values[i], &vi, 1.0);
        hat.ger(1.0, &ui, &ui, 1.0);
    }
    let fitted = (&data.x * &beta).add_scalar(data.y_mean);
    Ok(OlsFit { beta, fitted, hat, rank, pseudo_inverse: rank < data.p() })
}

/// `‖ŷ_ols − ŷ_m‖²/n`.
pub fn approximation_error(ols_fitted: &DVector<f64>, fitted: &DVector<f64>, n: usize) -> Result<f64> {
    if ols_fitted.len() != fitted.len() {
        return Err(PlsError::DimensionMismatch { expected: ols_fitted.len(), found: fitted.len() });
    }
    Ok((ols_fitted - fitted).norm_squared() / n as f64)
}
