//! Degrees of freedom from the Krylov representation of the fit.
//!
//! With `K = X Xᵀ`, the first `m` latent components span
//! `{Ky, K²y, …, K^m y}`. Writing `B_ij = ⟨t_i, K^j y⟩`, `c = B⁻¹ Tᵀ y` and
//! `V = T (B⁻¹)ᵀ`, the Jacobian of the centered fit is
//!
//! ```text
//! ∂ŷ_m/∂y = 11ᵀ/n + Σ_j c_j (I − T Tᵀ) K^j + Σ_j v_j (y − ŷ_m)ᵀ K^j + T Tᵀ
//! ```
//!
//! and its trace is
//!
//! ```text
//! 1 + Σ_j c_j trace(K^j) − Σ_{j,l} c_j t_lᵀ K^j t_l + (y − ŷ_m)ᵀ Σ_j K^j v_j + m.
//! ```
//!
//! Note the `c_j` inside the double sum: it comes from taking the trace of
//! the Jacobian term by term.
//!
//! Internally `K` is divided by its largest eigenvalue `α`. Every term of the
//! trace is invariant under that rescaling (`c_j ↦ α^j c_j`, `v_j ↦ α^j v_j`)
//! while the monomial basis `K^j y` stays representable for large `m`. The
//! stored `b`, `c`, `v` and `k_powers_y` refer to the scaled kernel; use
//! [`KrylovBasis::unscaled_b`] and [`KrylovBasis::unscaled_c`] for the raw ones.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::dataprep::StandardizedData;
use crate::linalg::{symmetric_eigen, SortedEigen};
use crate::pls::PlsModel;
use crate::{PlsError, Result};

/// Bases with `cond(B)` above this are treated as singular.
pub const MAX_BASIS_CONDITION: f64 = 1e12;

/// Eigendecomposition of the kernel, shared across component counts.
#[derive(Debug, Clone)]
pub struct KernelSpectrum {
    pub kernel: DMatrix<f64>,
    pub eigen: SortedEigen,
    /// `α`, the largest eigenvalue (1 for a zero kernel).
    pub scale: f64,
}

impl KernelSpectrum {
    pub fn new(kernel: &DMatrix<f64>) -> Result<Self> {
        let eigen = symmetric_eigen(kernel)?;
        let top = eigen.values.iter().cloned().fold(0.0, f64::max);
        let scale = if top > 0.0 { top } else { 1.0 };
        Ok(Self { kernel: kernel.clone(), eigen, scale })
    }

    pub fn from_data(data: &StandardizedData) -> Result<Self> {
        Self::new(&(&data.x * data.x.transpose()))
    }

    fn scaled_values(&self) -> DVector<f64> {
        &self.eigen.values / self.scale
    }
}

#[derive(Debug, Clone)]
pub struct KrylovBasis {
    pub m: usize,
    /// `α` such that the scaled kernel is `K/α`.
    pub kernel_scale: f64,
    /// `B_ij = ⟨t_i, (K/α)^j y⟩`.
    pub b: DMatrix<f64>,
    /// `B⁻¹ Tᵀ y`.
    pub c: DVector<f64>,
    /// `T (B⁻¹)ᵀ`, `n × m`.
    pub v: DMatrix<f64>,
    /// `(K/α)^j y` for `j = 1..=m`.
    pub k_powers_y: Vec<DVector<f64>>,
    /// `trace(K^j)` for `j = 1..=m`, unscaled.
    pub trace_k_powers: Vec<f64>,
    /// 2-norm condition number of `B`.
    pub condition: f64,
    /// Largest relative residual of `K^j y` after projection onto `T`.
    pub span_residual: f64,
    spectrum: Arc<KernelSpectrum>,
}

impl KrylovBasis {
    pub fn unscaled_b(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.m, self.m, |i, j| self.b[(i, j)] * self.kernel_scale.powi(j as i32 + 1))
    }

    pub fn unscaled_c(&self) -> DVector<f64> {
        DVector::from_fn(self.m, |j, _| self.c[j] / self.kernel_scale.powi(j as i32 + 1))
    }
}

/// `trace(K^j)` for `j = 1..=m` from one symmetric eigendecomposition.
pub fn kernel_power_traces(kernel: &DMatrix<f64>, m: usize) -> Result<Vec<f64>> {
    let eig = symmetric_eigen(kernel)?;
    Ok(power_traces(&eig.values, m))
}

fn power_traces(values: &DVector<f64>, m: usize) -> Vec<f64> {
    let mut pow = DVector::from_element(values.len(), 1.0);
    (0..m)
        .map(|_| {
            pow.component_mul_assign(values);
            pow.sum()
        })
        .collect()
}

/// Builds the Krylov basis for the first `m` components of `model`.
pub fn krylov_basis(model: &PlsModel, kernel: &DMatrix<f64>, y: &DVector<f64>, m: usize) -> Result<KrylovBasis> {
    let spectrum = Arc::new(KernelSpectrum::new(kernel)?);
    krylov_basis_with(model, &spectrum, y, m)
}

/// As [`krylov_basis`], reusing a precomputed spectrum.
pub fn krylov_basis_with(
    model: &PlsModel,
    spectrum: &Arc<KernelSpectrum>,
    y: &DVector<f64>,
    m: usize,
) -> Result<KrylovBasis> {
    let n = y.len();
    if spectrum.kernel.nrows() != n || model.t.nrows() != n {
        return Err(PlsError::DimensionMismatch { expected: n, found: spectrum.kernel.nrows() });
    }
    if m > model.n_components() {
        return match model.degenerate_at {
            Some(d) if m >= d => Err(PlsError::SingularBasis { m, condition: f64::INFINITY }),
            _ => Err(PlsError::ComponentOutOfRange { requested: m, available: model.n_components() }),
        };
    }
    let alpha = spectrum.scale;
    let scaled_kernel = &spectrum.kernel / alpha;
    let t = model.t.columns(0, m).into_owned();

    let mut k_powers_y = Vec::with_capacity(m);
    let mut current = y.clone();
    for _ in 0..m {
        current = &scaled_kernel * current;
        k_powers_y.push(current.clone());
    }
    let mut b = DMatrix::zeros(m, m);
    let mut span_residual: f64 = 0.0;
    for (j, kjy) in k_powers_y.iter().enumerate() {
        let coef = t.transpose() * kjy;
        b.set_column(j, &coef);
        let resid = kjy - &t * &coef;
        if kjy.norm() > 0.0 {
            span_residual = span_residual.max(resid.norm() / kjy.norm());
        }
    }
    let trace_k_powers = power_traces(&spectrum.eigen.values, m);

    if m == 0 {
        return Ok(KrylovBasis {
            m,
            kernel_scale: alpha,
            b,
            c: DVector::zeros(0),
            v: DMatrix::zeros(n, 0),
            k_powers_y,
            trace_k_powers,
            condition: 1.0,
            span_residual,
            spectrum: Arc::clone(spectrum),
        });
    }

    let sv = b.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_BASIS_CONDITION) {
        return Err(PlsError::SingularBasis { m, condition });
    }
    let lu = b.clone().lu();
    let c = lu.solve(&(t.transpose() * y)).ok_or(PlsError::SingularBasis { m, condition })?;
    let vt = lu.solve(&t.transpose()).ok_or(PlsError::SingularBasis { m, condition })?;
    Ok(KrylovBasis {
        m,
        kernel_scale: alpha,
        b,
        c,
        v: vt.transpose(),
        k_powers_y,
        trace_k_powers,
        condition,
        span_residual,
        spectrum: Arc::clone(spectrum),
    })
}

fn residual(model: &PlsModel, y: &DVector<f64>, m: usize) -> DVector<f64> {
    let t = model.t.columns(0, m);
    y - t * (t.transpose() * y)
}

/// Unbiased DoF estimate for `basis.m` components (centered `y`).
pub fn dof_krylov(basis: &KrylovBasis, model: &PlsModel, y: &DVector<f64>) -> f64 {
    let m = basis.m;
    if m == 0 {
        return 1.0;
    }
    let spec = &basis.spectrum;
    let lambda = spec.scaled_values();
    let u = &spec.eigen.vectors;
    let t = model.t.columns(0, m);
    // Squared coordinates of each t_l in the eigenbasis.
    let coords = u.transpose() * t;
    let coords_sq = coords.map(|v| v * v);

    let mut trace_terms = 0.0;
    let mut leverage_terms = 0.0;
    let mut pow = DVector::from_element(lambda.len(), 1.0);
    for j in 0..m {
        pow.component_mul_assign(&lambda);
        let tr_kj = pow.sum();
        let tkt: f64 = coords_sq.column_iter().map(|col| col.dot(&pow)).sum();
        trace_terms += basis.c[j] * tr_kj;
        leverage_terms += basis.c[j] * tkt;
    }

    let scaled_kernel = &spec.kernel / basis.kernel_scale;
    let mut kr = residual(model, y, m);
    let mut cross = 0.0;
    for j in 0..m {
        kr = &scaled_kernel * kr;
        cross += kr.dot(&basis.v.column(j));
    }
    1.0 + trace_terms - leverage_terms + cross + m as f64
}

/// The full `n × n` Jacobian `∂ŷ_m/∂y` of the raw-scale fit.
pub fn jacobian_krylov(basis: &KrylovBasis, model: &PlsModel, y: &DVector<f64>) -> DMatrix<f64> {
    let n = y.len();
    let m = basis.m;
    let mut jac = DMatrix::from_element(n, n, 1.0 / n as f64);
    if m == 0 {
        return jac;
    }
    let spec = &basis.spectrum;
    let lambda = spec.scaled_values();
    let u = &spec.eigen.vectors;
    let t = model.t.columns(0, m).into_owned();

    let mut poly = DVector::zeros(lambda.len());
    let mut pow = DVector::from_element(lambda.len(), 1.0);
    for j in 0..m {
        pow.component_mul_assign(&lambda);
        poly.axpy(basis.c[j], &pow, 1.0);
    }
    let poly_k = u * DMatrix::from_diagonal(&poly) * u.transpose();
    let tt = &t * t.transpose();
    jac += &poly_k - &tt * &poly_k;

    let scaled_kernel = &spec.kernel / basis.kernel_scale;
    let mut kr = residual(model, y, m);
    for j in 0..m {
        kr = &scaled_kernel * kr;
        jac.ger(1.0, &basis.v.column(j).into_owned(), &kr, 1.0);
    }
    jac + tt
}

/// Krylov DoF for `m = 0..=m_max`, stopping at the first singular basis.
#[derive(Debug, Clone)]
pub struct KrylovDofPath {
    pub dof: Vec<f64>,
    pub condition: Vec<f64>,
    /// Component count whose basis was singular; the path ends before it.
    pub singular_at: Option<usize>,
    /// The `SingularBasis` error raised at `singular_at`.
    pub singular: Option<PlsError>,
    /// First `m` with a negative DoF.
    pub truncated_at: Option<usize>,
}

pub fn dof_krylov_path(data: &StandardizedData, model: &PlsModel, m_max: usize) -> Result<KrylovDofPath> {
    let spectrum = Arc::new(KernelSpectrum::from_data(data)?);
    let top = m_max.min(model.n_components());
    let mut dof = Vec::with_capacity(top + 1);
    let mut condition = Vec::with_capacity(top + 1);
    let mut singular = None;
    for m in 0..=top {
        match krylov_basis_with(model, &spectrum, &data.y, m) {
            Ok(basis) => {
                dof.push(dof_krylov(&basis, model, &data.y));
                condition.push(basis.condition);
            }
            Err(e @ PlsError::SingularBasis { .. }) => {
                singular = Some(e);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let singular_at = singular.as_ref().map(|_| dof.len());
    let truncated_at = dof.iter().position(|&d| d < 0.0);
    Ok(KrylovDofPath { dof, condition, singular_at, singular, truncated_at })
}
