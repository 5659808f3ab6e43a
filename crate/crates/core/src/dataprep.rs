//! Dataset ingestion, standardization and moment summaries.
//!
//! Standard deviations use the unbiased `n − 1` denominator throughout, so
//! that `S = XᵀX/(n−1)` is the empirical correlation matrix of the raw
//! predictors.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::{PlsError, Result};

/// Absolute tolerance for the standardization invariants.
pub const STANDARDIZE_TOL: f64 = 1e-8;

/// Predictor matrix and response as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub names: Vec<String>,
    pub target: String,
}

impl RawDataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let names = (0..x.ncols()).map(|j| format!("x{}", j + 1)).collect();
        Self::with_names(x, y, names, "y".to_string())
    }

    pub fn with_names(
        x: DMatrix<f64>,
        y: DVector<f64>,
        names: Vec<String>,
        target: String,
    ) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(PlsError::DimensionMismatch {
                expected: x.nrows(),
                found: y.len(),
            });
        }
        if names.len() != x.ncols() {
            return Err(PlsError::DimensionMismatch {
                expected: x.ncols(),
                found: names.len(),
            });
        }
        if x.nrows() < 2 {
            return Err(PlsError::DimensionTooSmall(format!("n = {} < 2", x.nrows())));
        }
        if x.ncols() < 1 {
            return Err(PlsError::DimensionTooSmall("p = 0".into()));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(PlsError::NonFiniteInput);
        }
        Ok(Self { x, y, names, target })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Subset of rows, keeping column labels.
    pub fn rows(&self, idx: &[usize]) -> Result<Self> {
        Self::with_names(
            crate::linalg::select_rows(&self.x, idx),
            crate::linalg::select_entries(&self.y, idx),
            self.names.clone(),
            self.target.clone(),
        )
    }

    /// Writes the dataset as CSV with the predictors first and the target last.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| PlsError::Io(e.to_string()))?;
        let mut header = self.names.clone();
        header.push(self.target.clone());
        w.write_record(&header).map_err(|e| PlsError::Io(e.to_string()))?;
        for i in 0..self.n() {
            let mut rec: Vec<String> = (0..self.p()).map(|j| format_f64(self.x[(i, j)])).collect();
            rec.push(format_f64(self.y[i]));
            w.write_record(&rec).map_err(|e| PlsError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| PlsError::Io(e.to_string()))
    }
}

// Shortest representation that parses back to the same f64.
fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Reads a fully numeric CSV with a header row into its column names and an
/// `n × k` matrix.
///
/// `NonNumericCell` reports the 1-based file line and 1-based column.
pub fn read_numeric_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => PlsError::Io(format!("{}: {e}", path.as_ref().display())),
            _ => PlsError::ParseError { line: 1, message: e.to_string() },
        })?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| PlsError::ParseError { line: 1, message: e.to_string() })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut values: Vec<f64> = Vec::new();
    let mut n = 0usize;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| PlsError::ParseError {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(n + 2);
        for (col, cell) in rec.iter().enumerate() {
            let value: f64 = cell
                .trim()
                .parse()
                .map_err(|_| PlsError::NonNumericCell { row: line, col: col + 1 })?;
            if !value.is_finite() {
                return Err(PlsError::NonFiniteInput);
            }
            values.push(value);
        }
        n += 1;
    }
    Ok((header.clone(), DMatrix::from_row_slice(n, header.len(), &values)))
}

/// Reads a numeric CSV with a header row; `target` names the response column
/// and every other column becomes a predictor, in header order.
pub fn load_csv(path: impl AsRef<Path>, target: &str) -> Result<RawDataset> {
    let (header, data) = read_numeric_csv(path)?;
    let target_idx = header
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| PlsError::MissingTarget(target.to_string()))?;
    let keep: Vec<usize> = (0..header.len()).filter(|&j| j != target_idx).collect();
    RawDataset::with_names(
        data.select_columns(&keep),
        data.column(target_idx).into_owned(),
        keep.iter().map(|&j| header[j].clone()).collect(),
        target.to_string(),
    )
}

/// Centered and scaled predictors with a centered response.
#[derive(Debug, Clone)]
pub struct StandardizedData {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub x_mean: DVector<f64>,
    pub x_scale: DVector<f64>,
    pub y_mean: f64,
}

impl StandardizedData {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Same predictors with a different (raw, uncentered) response.
    pub fn with_response(&self, y_raw: &DVector<f64>) -> Result<Self> {
        if y_raw.len() != self.n() {
            return Err(PlsError::DimensionMismatch {
                expected: self.n(),
                found: y_raw.len(),
            });
        }
        if y_raw.iter().any(|v| !v.is_finite()) {
            return Err(PlsError::NonFiniteInput);
        }
        let y_mean = y_raw.mean();
        Ok(Self {
            y: y_raw.map(|v| v - y_mean),
            y_mean,
            ..self.clone()
        })
    }

    /// Maps raw predictor rows into the standardized scale.
    pub fn transform(&self, x_raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x_raw.ncols() != self.p() {
            return Err(PlsError::DimensionMismatch {
                expected: self.p(),
                found: x_raw.ncols(),
            });
        }
        Ok(DMatrix::from_fn(x_raw.nrows(), x_raw.ncols(), |i, j| {
            (x_raw[(i, j)] - self.x_mean[j]) / self.x_scale[j]
        }))
    }
}

pub fn standardize(raw: &RawDataset) -> Result<StandardizedData> {
    let (n, p) = raw.x.shape();
    if raw.x.iter().chain(raw.y.iter()).any(|v| !v.is_finite()) {
        return Err(PlsError::NonFiniteInput);
    }
    let mut x = raw.x.clone();
    let mut x_mean = DVector::zeros(p);
    let mut x_scale = DVector::zeros(p);
    for j in 0..p {
        let mut col = x.column_mut(j);
        let mean = col.mean();
        col.add_scalar_mut(-mean);
        let sd = (col.norm_squared() / (n as f64 - 1.0)).sqrt();
        let scale = raw.x.column(j).amax().max(f64::MIN_POSITIVE);
        if sd <= 1e-12 * scale || sd == 0.0 {
            return Err(PlsError::ZeroVarianceColumn(j));
        }
        col /= sd;
        x_mean[j] = mean;
        x_scale[j] = sd;
    }
    let y_mean = raw.y.mean();
    Ok(StandardizedData {
        x,
        y: raw.y.map(|v| v - y_mean),
        x_mean,
        x_scale,
        y_mean,
    })
}

/// `S = XᵀX/(n−1)`, `s = Xᵀy/(n−1)` and the kernel `K = XXᵀ`.
#[derive(Debug, Clone)]
pub struct MomentSummary {
    pub s_matrix: DMatrix<f64>,
    pub s_vector: DVector<f64>,
    pub kernel: DMatrix<f64>,
}

pub fn moments(data: &StandardizedData) -> MomentSummary {
    let denom = data.n() as f64 - 1.0;
    let xt = data.x.transpose();
    let s_matrix = symmetrize(&xt * &data.x) / denom;
    let s_vector = &xt * &data.y / denom;
    let kernel = symmetrize(&data.x * &xt);
    MomentSummary { s_matrix, s_vector, kernel }
}

fn symmetrize(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}

/// Mean of the absolute off-diagonal entries of a correlation matrix.
pub fn mean_abs_correlation(s: &DMatrix<f64>) -> Result<f64> {
    let p = s.nrows();
    if p < 2 {
        return Err(PlsError::DimensionTooSmall(format!("p = {p} < 2")));
    }
    let mut total = 0.0;
    for i in 0..p {
        for j in (i + 1)..p {
            total += s[(i, j)].abs();
        }
    }
    Ok(2.0 * total / (p * p - p) as f64)
}
