//! PLSR path fitting.
//!
//! [`fit_pls`] builds the latent components through pseudo-weights `v_i`
//! with `t_i = X v_i`, never deflating `X`:
//!
//! ```text
//! w_i = Xᵀ (y − X β_{i−1})
//! u_i = w_i − Σ_{j<i} v_j (v_jᵀ XᵀX w_i)      (full Gram–Schmidt sum)
//! v_i = ± u_i / ‖X u_i‖                        (sign: t_iᵀ y ≥ 0)
//! β_i = β_{i−1} + v_i (t_iᵀ y)
//! ```
//!
//! The recursion is exposed through [`lanczos_recursion`] so that the
//! derivative engine in [`crate::dof_lanczos`] follows exactly the same
//! forward path. [`fit_nipals_reference`] is the deflation-based
//! formulation, kept as an independent check.

use nalgebra::{DMatrix, DVector};

use crate::dataprep::StandardizedData;
use crate::{PlsError, Result};

/// A component is degenerate when `‖X u_i‖ < DEGENERACY_TOL · ‖X‖_F² · ‖y‖`.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// One step of the pseudo-weight recursion.
#[derive(Debug, Clone)]
pub(crate) struct RecursionStep {
    /// Unnormalized weight `w_i = Xᵀ r_{i−1}`.
    pub w: DVector<f64>,
    /// Gram–Schmidt coefficients `v_jᵀ XᵀX w_i`, `j < i`.
    pub proj: Vec<f64>,
    /// `u_i` before normalization.
    pub u: DVector<f64>,
    /// `±‖X u_i‖`, carrying the sign convention.
    pub scale: f64,
    pub v: DVector<f64>,
    pub t: DVector<f64>,
    /// `t_iᵀ y`.
    pub ty: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Recursion {
    pub steps: Vec<RecursionStep>,
    /// 1-based index of the first degenerate component, if any.
    pub degenerate_at: Option<usize>,
}

pub(crate) fn validate_m_max(n: usize, p: usize, m_max: usize) -> Result<()> {
    let limit = (n - 1).min(p);
    if m_max > limit {
        return Err(PlsError::InvalidComponentCount(format!(
            "m_max = {m_max} exceeds min(n − 1, p) = {limit}"
        )));
    }
    Ok(())
}

pub(crate) fn degeneracy_threshold(x: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    DEGENERACY_TOL * x.norm_squared() * y.norm()
}

pub(crate) fn lanczos_recursion(x: &DMatrix<f64>, y: &DVector<f64>, m_max: usize) -> Recursion {
    let p = x.ncols();
    let threshold = degeneracy_threshold(x, y);
    let mut beta = DVector::zeros(p);
    let mut steps: Vec<RecursionStep> = Vec::with_capacity(m_max);
    let mut degenerate_at = None;
    for i in 1..=m_max {
        let resid = y - x * &beta;
        let w = x.transpose() * resid;
        let xw = x * &w;
        let proj: Vec<f64> = steps.iter().map(|s| s.t.dot(&xw)).collect();
        let mut u = w.clone();
        for (s, a) in steps.iter().zip(&proj) {
            u.axpy(-a, &s.v, 1.0);
        }
        let xu = x * &u;
        let norm = xu.norm();
        if !(norm >= threshold) || norm == 0.0 {
            degenerate_at = Some(i);
            break;
        }
        let mut scale = norm;
        let mut v = &u / scale;
        let mut t = xu / scale;
        let mut ty = t.dot(y);
        if ty < 0.0 {
            scale = -scale;
            v.neg_mut();
            t.neg_mut();
            ty = -ty;
        }
        beta.axpy(ty, &v, 1.0);
        steps.push(RecursionStep { w, proj, u, scale, v, t, ty });
    }
    Recursion { steps, degenerate_at }
}

/// The fitted PLSR path for component counts `0..=n_components()`.
#[derive(Debug, Clone)]
pub struct PlsModel {
    /// Requested maximum number of components.
    pub m_max: usize,
    /// Latent components (unit norm, mutually orthogonal), `n × k`.
    pub t: DMatrix<f64>,
    /// Pseudo-weights with `t_i = X v_i`, `p × k`.
    pub v: DMatrix<f64>,
    /// Unit-norm raw weights, `p × k`.
    pub w: DMatrix<f64>,
    /// `Tᵀ X W`, upper bidiagonal.
    pub l: DMatrix<f64>,
    /// Column `m` is `β̂_m` in the standardized scale.
    pub beta_path: DMatrix<f64>,
    /// Original-scale intercepts `β̂⁽⁰⁾_m`.
    pub intercept_path: DVector<f64>,
    /// Column `m` is `ȳ·1 + X β̂_m`.
    pub fitted_path: DMatrix<f64>,
    /// Training response (raw scale) the model was fit to.
    pub y_raw: DVector<f64>,
    pub y_mean: f64,
    /// 1-based index of the component at which the Krylov space was
    /// exhausted; the path stops one before it.
    pub degenerate_at: Option<usize>,
}

impl PlsModel {
    /// Number of components actually fitted.
    pub fn n_components(&self) -> usize {
        self.t.ncols()
    }

    /// `‖y − ŷ_m‖²` for every `m` on the path.
    pub fn rss_path(&self) -> Vec<f64> {
        self.fitted_path
            .column_iter()
            .map(|col| (&self.y_raw - col).norm_squared())
            .collect()
    }

    pub fn fitted(&self, m: usize) -> Result<DVector<f64>> {
        self.check_m(m)?;
        Ok(self.fitted_path.column(m).into_owned())
    }

    /// The degeneracy flag as an error value, for reporting.
    pub fn warning(&self) -> Option<PlsError> {
        self.degenerate_at.map(PlsError::DegenerateComponent)
    }

    fn check_m(&self, m: usize) -> Result<()> {
        if m > self.n_components() {
            return Err(PlsError::ComponentOutOfRange {
                requested: m,
                available: self.n_components(),
            });
        }
        Ok(())
    }

    fn assemble(
        data: &StandardizedData,
        m_max: usize,
        t_cols: Vec<DVector<f64>>,
        v_cols: Vec<DVector<f64>>,
        w_cols: Vec<DVector<f64>>,
        degenerate_at: Option<usize>,
    ) -> Self {
        let (n, p) = data.x.shape();
        let k = t_cols.len();
        let t = cols_to_matrix(n, &t_cols);
        let v = cols_to_matrix(p, &v_cols);
        let w = cols_to_matrix(p, &w_cols);
        let l = t.transpose() * &data.x * &w;

        let mut beta_path = DMatrix::zeros(p, k + 1);
        for i in 0..k {
            let ty = t.column(i).dot(&data.y);
            let next = beta_path.column(i) + v.column(i) * ty;
            beta_path.set_column(i + 1, &next);
        }
        let mut fitted_path = &data.x * &beta_path;
        fitted_path.add_scalar_mut(data.y_mean);
        let intercept_path = DVector::from_iterator(
            k + 1,
            (0..=k).map(|m| original_scale(&beta_path.column(m).into_owned(), data).0),
        );
        let y_raw = data.y.add_scalar(data.y_mean);
        PlsModel {
            m_max,
            t,
            v,
            w,
            l,
            beta_path,
            intercept_path,
            fitted_path,
            y_raw,
            y_mean: data.y_mean,
            degenerate_at,
        }
    }
}

fn cols_to_matrix(rows: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Fits PLSR with up to `m_max` components. A degenerate component truncates
/// the path and is reported through [`PlsModel::degenerate_at`].
pub fn fit_pls(data: &StandardizedData, m_max: usize) -> Result<PlsModel> {
    validate_m_max(data.n(), data.p(), m_max)?;
    let rec = lanczos_recursion(&data.x, &data.y, m_max);
    let t = rec.steps.iter().map(|s| s.t.clone()).collect();
    let v = rec.steps.iter().map(|s| s.v.clone()).collect();
    let w = rec.steps.iter().map(|s| s.w.normalize()).collect();
    let model = PlsModel::assemble(data, m_max, t, v, w, rec.degenerate_at);
    if model.beta_path.iter().chain(model.fitted_path.iter()).any(|v| !v.is_finite())
        || model.rss_path().iter().any(|v| !v.is_finite())
    {
        return Err(PlsError::NumericalOverflow("the PLSR fit".into()));
    }
    Ok(model)
}

/// Deflation-based NIPALS: `X_i = X − P_{t_1..t_{i−1}} X`, `w_i ∝ X_iᵀ y`.
pub fn fit_nipals_reference(data: &StandardizedData, m_max: usize) -> Result<PlsModel> {
    validate_m_max(data.n(), data.p(), m_max)?;
    let x = &data.x;
    let y = &data.y;
    let threshold = degeneracy_threshold(x, y);
    let mut xi = x.clone();
    let (mut ts, mut vs, mut ws) = (Vec::new(), Vec::new(), Vec::new());
    let mut degenerate_at = None;
    for i in 1..=m_max {
        let w = xi.transpose() * y;
        let ti = &xi * &w;
        let norm = ti.norm();
        if !(norm >= threshold) || norm == 0.0 {
            degenerate_at = Some(i);
            break;
        }
        let mut sign = 1.0 / norm;
        if ti.dot(y) < 0.0 {
            sign = -sign;
        }
        let t = ti * sign;
        // X_i w = X w − Σ t_j (t_jᵀ X w) and t_j = X v_j, so v_i absorbs the deflations.
        let xw = x * &w;
        let mut v = w.clone();
        for (tj, vj) in ts.iter().zip(&vs) {
            let c = DVector::dot(tj, &xw);
            v.axpy(-c, vj, 1.0);
        }
        v *= sign;
        let proj = &t * (t.transpose() * &xi);
        xi -= proj;
        ws.push(w.normalize());
        ts.push(t);
        vs.push(v);
    }
    Ok(PlsModel::assemble(data, m_max, ts, vs, ws, degenerate_at))
}

/// `β̂_m` and `β̂⁽⁰⁾_m` in the original units of the predictors and response.
pub fn coefficients_original_scale(
    model: &PlsModel,
    m: usize,
    data: &StandardizedData,
) -> Result<(f64, DVector<f64>)> {
    model.check_m(m)?;
    Ok(original_scale(&model.beta_path.column(m).into_owned(), data))
}

pub(crate) fn original_scale(beta_std: &DVector<f64>, data: &StandardizedData) -> (f64, DVector<f64>) {
    let beta = beta_std.component_div(&data.x_scale);
    let intercept = data.y_mean - data.x_mean.dot(&beta);
    (intercept, beta)
}

pub fn predict(intercept: f64, beta: &DVector<f64>, x_new: &DMatrix<f64>) -> Result<DVector<f64>> {
    if x_new.ncols() != beta.len() {
        return Err(PlsError::DimensionMismatch {
            expected: beta.len(),
            found: x_new.ncols(),
        });
    }
    Ok((x_new * beta).add_scalar(intercept))
}
