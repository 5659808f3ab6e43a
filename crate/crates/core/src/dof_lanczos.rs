//! Degrees of freedom by differentiating the pseudo-weight recursion.
//!
//! Every quantity of the forward recursion in [`crate::pls`] is paired with
//! its Jacobian with respect to the response, a `p × n` matrix:
//!
//! ```text
//! ∂w_i = Xᵀ − XᵀX ∂β_{i−1}
//! ∂u_i = ∂w_i − Σ_j [ (v_j zᵀ + (v_jᵀz) I) ∂v_j + v_j v_jᵀ XᵀX ∂w_i ],   z = XᵀX w_i
//! ∂v_i = (1/s_i) (I − u_i u_iᵀ XᵀX / (u_iᵀ XᵀX u_i)) ∂u_i,             s_i = ±‖X u_i‖
//! ∂β_i = ∂β_{i−1} + (v_i (Xᵀy)ᵀ + (t_iᵀy) I) ∂v_i + v_i t_iᵀ
//! ```
//!
//! The fitted values are `ȳ·1 + X β_m`; since `X` is column-centered the
//! centering of `y` drops out of `X ∂β_m`, and the hat matrix is
//! `11ᵀ/n + X ∂β_m` with trace `1 + trace(X ∂β_m)`.

use nalgebra::DMatrix;

use crate::dataprep::StandardizedData;
use crate::pls::{lanczos_recursion, validate_m_max};
use crate::{PlsError, Result};

/// Per-component Jacobians `∂β̂_m/∂y` and the DoF path derived from them.
#[derive(Debug, Clone)]
pub struct JacobianPath {
    /// `∂β̂_m/∂y` for `m = 0..=k` when retained.
    pub dbeta: Option<Vec<DMatrix<f64>>>,
    /// `dof[m] = 1 + trace(X ∂β̂_m/∂y)`.
    pub dof: Vec<f64>,
    /// First `m` with a negative DoF; entries from there on are invalid.
    pub truncated_at: Option<usize>,
    /// Propagated from the fit.
    pub degenerate_at: Option<usize>,
    x: DMatrix<f64>,
}

impl JacobianPath {
    /// Largest component count with a fitted Jacobian.
    pub fn n_components(&self) -> usize {
        self.dof.len() - 1
    }

    pub fn is_valid(&self, m: usize) -> bool {
        m < self.dof.len() && self.truncated_at.is_none_or(|t| m < t)
    }

    pub fn instability(&self) -> Option<PlsError> {
        self.truncated_at.map(PlsError::NumericalInstability)
    }

    pub fn jacobian(&self, m: usize) -> Result<&DMatrix<f64>> {
        let all = self.dbeta.as_ref().ok_or(PlsError::JacobiansNotRetained)?;
        all.get(m).ok_or(PlsError::ComponentOutOfRange {
            requested: m,
            available: self.n_components(),
        })
    }
}

/// Runs the derivative recursion for `m = 0..=m_max`. With
/// `retain_jacobians = false` only a running `p × n` buffer is kept.
pub fn dof_lanczos(data: &StandardizedData, m_max: usize, retain_jacobians: bool) -> Result<JacobianPath> {
    validate_m_max(data.n(), data.p(), m_max)?;
    let x = &data.x;
    let y = &data.y;
    let (n, p) = x.shape();
    let xt = x.transpose();
    let gram = if p <= n { Some(&xt * x) } else { None };
    let gram_mul = |m: &DMatrix<f64>| -> DMatrix<f64> {
        match &gram {
            Some(g) => g * m,
            None => &xt * (x * m),
        }
    };
    let xty = &xt * y;

    let rec = lanczos_recursion(x, y, m_max);
    let mut dbeta = DMatrix::<f64>::zeros(p, n);
    let mut dvs: Vec<DMatrix<f64>> = Vec::with_capacity(rec.steps.len());
    let mut stored = retain_jacobians.then(|| vec![dbeta.clone()]);
    let mut dof = vec![1.0];

    for (i, step) in rec.steps.iter().enumerate() {
        let dw = &xt - gram_mul(&dbeta);
        let z = &xt * (x * &step.w);
        let dz = gram_mul(&dw);
        let mut du = dw;
        for j in 0..i {
            let vj = &rec.steps[j].v;
            let dvj = &dvs[j];
            // (v_j zᵀ + a_j I) ∂v_j + v_j v_jᵀ ∂z
            let zt_dv = z.transpose() * dvj;
            let vt_dz = vj.transpose() * &dz;
            du.ger(-1.0, vj, &(zt_dv + vt_dz).transpose(), 1.0);
            let a = step.proj[j];
            du.zip_apply(dvj, |d, e| *d -= a * e);
        }
        let g_u = &xt * (x * &step.u);
        let s2 = step.scale * step.scale;
        let gu_du = g_u.transpose() * &du;
        let mut dv = du;
        dv.ger(-1.0 / s2, &step.u, &gu_du.transpose(), 1.0);
        dv /= step.scale;

        let dc = xty.transpose() * &dv + step.t.transpose();
        dbeta.ger(1.0, &step.v, &dc.transpose(), 1.0);
        let c = step.ty;
        dbeta.zip_apply(&dv, |d, e| *d += c * e);

        dof.push(1.0 + trace_of_product(x, &dbeta));
        if let Some(s) = stored.as_mut() {
            s.push(dbeta.clone());
        }
        dvs.push(dv);
    }

    let truncated_at = dof.iter().position(|&d| d < 0.0);
    Ok(JacobianPath {
        dbeta: stored,
        dof,
        truncated_at,
        degenerate_at: rec.degenerate_at,
        x: x.clone(),
    })
}

/// `trace(A B)` for `A: n × p`, `B: p × n` without forming the product.
pub(crate) fn trace_of_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.transpose().iter()).map(|(u, v)| u * v).sum()
}

/// `∂ŷ_m/∂y = 11ᵀ/n + X ∂β̂_m/∂y`, whose trace is `dof[m]`.
pub fn approximate_hat_matrix(jp: &JacobianPath, m: usize) -> Result<DMatrix<f64>> {
    let d = jp.jacobian(m)?;
    let n = jp.x.nrows();
    let mut h = &jp.x * d;
    h.add_scalar_mut(1.0 / n as f64);
    Ok(h)
}

/// First-order covariance `σ̂² (∂β̂_m/∂y)(∂β̂_m/∂y)ᵀ` in the standardized scale.
pub fn coefficient_covariance(jp: &JacobianPath, m: usize, sigma_hat: f64) -> Result<DMatrix<f64>> {
    if m == 0 {
        return Err(PlsError::ComponentOutOfRange {
            requested: 0,
            available: jp.n_components(),
        });
    }
    if !(sigma_hat >= 0.0) {
        return Err(PlsError::InvalidConfig("sigma_hat must be non-negative".into()));
    }
    let d = jp.jacobian(m)?;
    let c = d * d.transpose() * (sigma_hat * sigma_hat);
    Ok((&c + c.transpose()) * 0.5)
}
