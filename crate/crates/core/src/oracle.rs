//! Independent checks for the degrees-of-freedom engines: a finite-difference
//! Jacobian trace and the one-component closed form with its lower bound.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::dataprep::StandardizedData;
use crate::linalg::symmetric_eigen;
use crate::pls::fit_pls;
use crate::{PlsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdScheme {
    Forward,
    Central,
}

/// Step size is `epsilon · (1 + ‖y‖_∞)`.
#[derive(Debug, Clone, Copy)]
pub struct FdConfig {
    pub epsilon: f64,
    pub scheme: FdScheme,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-5,
            scheme: FdScheme::Central,
        }
    }
}

/// Trace of the Jacobian of `fit_fn` at `y`, by numerical differentiation.
pub fn fd_trace<F>(fit_fn: F, y: &DVector<f64>, cfg: FdConfig) -> Result<f64>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>> + Sync,
{
    if !(cfg.epsilon > 0.0) {
        return Err(PlsError::InvalidConfig("finite-difference epsilon must be positive".into()));
    }
    let n = y.len();
    let h = cfg.epsilon * (1.0 + y.amax());
    let base = fit_fn(y)?;
    if fit_fn(y)? != base {
        return Err(PlsError::NonDeterministicFit);
    }
    if base.len() != n {
        return Err(PlsError::DimensionMismatch { expected: n, found: base.len() });
    }
    let diag: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut up = y.clone();
            up[i] += h;
            let f_up = fit_fn(&up)?[i];
            match cfg.scheme {
                FdScheme::Forward => Ok((f_up - base[i]) / h),
                FdScheme::Central => {
                    let mut down = y.clone();
                    down[i] -= h;
                    Ok((f_up - fit_fn(&down)?[i]) / (2.0 * h))
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(diag.iter().sum())
}

/// Fitted values of the `m`-component PLSR fit as a function of the raw
/// response, with `X` held fixed. Centering is redone for every call.
pub fn pls_fit_map(data: &StandardizedData, m: usize) -> impl Fn(&DVector<f64>) -> Result<DVector<f64>> + Sync + '_ {
    move |y_raw: &DVector<f64>| {
        let d = data.with_response(y_raw)?;
        fit_pls(&d, m)?.fitted(m)
    }
}

/// Degrees of freedom of the one-component fit,
/// `3 + (sᵀs/sᵀSs)·[trace(S) − 2·sᵀS²s/sᵀSs]`.
pub fn closed_form_dof_one_component(s_matrix: &DMatrix<f64>, s: &DVector<f64>) -> Result<f64> {
    let ss = s.dot(s);
    let s_s = s_matrix * s;
    let sss = s.dot(&s_s);
    if !(sss > f64::MIN_POSITIVE * 1e10) || ss == 0.0 {
        return Err(PlsError::ZeroGradient);
    }
    let ss2s = s_s.dot(&s_s);
    Ok(3.0 + ss / sss * (s_matrix.trace() - 2.0 * ss2s / sss))
}

/// `1 + trace(S)/λ_max` when `λ_max ≤ trace(S)/2`, otherwise `None`.
pub fn dof_lower_bound(s_matrix: &DMatrix<f64>) -> Result<Option<f64>> {
    let eig = symmetric_eigen(s_matrix)?;
    let lmax = eig.values[0];
    let tr = s_matrix.trace();
    if lmax > 0.0 && lmax <= 0.5 * tr {
        Ok(Some(1.0 + tr / lmax))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_map_trace_is_n() {
        let y = DVector::from_vec(vec![0.3, -1.0, 4.0, 2.0]);
        let tr = fd_trace(|v| Ok(v.clone()), &y, FdConfig::default()).unwrap();
        assert_abs_diff_eq!(tr, 4.0, epsilon = 1e-8);
    }

    #[test]
    fn scaled_map_trace() {
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        for scheme in [FdScheme::Central, FdScheme::Forward] {
            let cfg = FdConfig { scheme, ..Default::default() };
            let tr = fd_trace(|v| Ok(v * 0.5), &y, cfg).unwrap();
            assert_abs_diff_eq!(tr, 1.5, epsilon = 1e-8);
        }
    }

    #[test]
    fn linear_map_reproduces_trace() {
        let h = DMatrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let y = DVector::from_fn(6, |i, _| i as f64 * 0.7 - 1.0);
        let tr = fd_trace(|v| Ok(&h * v), &y, FdConfig::default()).unwrap();
        assert_abs_diff_eq!(tr, h.trace(), epsilon = 1e-8 * 6.0);
    }

    #[test]
    fn nondeterministic_fit_detected() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        let calls = AtomicUsize::new(0);
        let y = DVector::from_vec(vec![1.0, 2.0]);
        let err = fd_trace(
            |v| Ok(v * calls.fetch_add(1, Ordering::SeqCst) as f64),
            &y,
            FdConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err, PlsError::NonDeterministicFit);
    }

    #[test]
    fn mean_model_trace_is_one() {
        use crate::dataprep::{standardize, RawDataset};
        let x = DMatrix::from_fn(7, 2, |i, j| ((i + 1) * (j + 2)) as f64 + (i * i) as f64 * 0.1);
        let y = DVector::from_fn(7, |i, _| (i as f64).sin());
        let d = standardize(&RawDataset::new(x, y.clone()).unwrap()).unwrap();
        let tr = fd_trace(pls_fit_map(&d, 0), &y, FdConfig::default()).unwrap();
        assert_abs_diff_eq!(tr, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn closed_form_identity_and_univariate() {
        let s = DVector::from_vec(vec![0.3, -0.2, 0.9, 0.1]);
        assert_abs_diff_eq!(
            closed_form_dof_one_component(&DMatrix::identity(4, 4), &s).unwrap(),
            5.0,
            epsilon = 1e-12
        );
        let one = DMatrix::from_element(1, 1, 1.0);
        assert_abs_diff_eq!(
            closed_form_dof_one_component(&one, &DVector::from_element(1, 0.7)).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_eq!(
            closed_form_dof_one_component(&DMatrix::identity(2, 2), &DVector::zeros(2)).unwrap_err(),
            PlsError::ZeroGradient
        );
    }

    #[test]
    fn lower_bound_cases() {
        assert_abs_diff_eq!(dof_lower_bound(&DMatrix::identity(3, 3)).unwrap().unwrap(), 4.0, epsilon = 1e-12);
        let d31 = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0]));
        assert_eq!(dof_lower_bound(&d31).unwrap(), None);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.5]));
        assert_abs_diff_eq!(dof_lower_bound(&d).unwrap().unwrap(), 3.5, epsilon = 1e-12);
    }
}
