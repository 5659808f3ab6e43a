//! Radial-basis simulation study comparing the four selection criteria.
//!
//! Each `(d, rep)` cell draws `d` centers `c_j ∈ [−1, 1]^p` and coefficients
//! `β_j ~ U[1, 3]`, maps the base design through `φ_j(x) = exp(−‖x − c_j‖²)`,
//! splits the rows into training and test sets and adds Gaussian noise whose
//! variance makes `var(f)/σ² = snr` on the training rows. Every cell owns an
//! independent ChaCha stream keyed by `(rep, d)`, so results do not depend on
//! the order in which cells run.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataprep::{standardize, RawDataset};
use crate::dof_krylov::dof_krylov_path;
use crate::linalg::median;
use crate::pls::{coefficients_original_scale, fit_pls, predict};
use crate::selection::{cross_validate, select_bic, sigma_hat, CriterionTable, CvConfig, Method};
use crate::{PlsError, Result};

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    /// Base rows, each coordinate in `[−1, 1]`.
    pub base_design: DMatrix<f64>,
    pub d_values: Vec<usize>,
    pub n_train: usize,
    /// Defaults to all rows not used for training.
    pub n_test: Option<usize>,
    pub snr: f64,
    pub reps: usize,
    pub seed: u64,
    pub m_max: usize,
    pub cv_folds: usize,
}

impl SimulationConfig {
    /// Defaults around the built-in synthetic base design.
    pub fn with_synthetic_base(seed: u64) -> Self {
        Self {
            base_design: synthetic_base_design(203, 12, seed),
            d_values: vec![10, 50, 90, 130, 170, 210],
            n_train: 50,
            n_test: Some(153),
            snr: 9.0,
            reps: 50,
            seed,
            m_max: 30,
            cv_folds: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rows = self.base_design.nrows();
        let n_test = self.n_test.unwrap_or(rows.saturating_sub(self.n_train));
        if self.n_train + n_test > rows {
            return Err(PlsError::SplitTooLarge { requested: self.n_train + n_test, available: rows });
        }
        if n_test == 0 || self.n_train < 3 {
            return Err(PlsError::InvalidConfig("need at least 3 training rows and 1 test row".into()));
        }
        if !(self.snr > 0.0) {
            return Err(PlsError::InvalidConfig("snr must be positive".into()));
        }
        if self.reps == 0 {
            return Err(PlsError::InvalidConfig("reps must be at least 1".into()));
        }
        if self.d_values.is_empty() || self.d_values.contains(&0) {
            return Err(PlsError::InvalidConfig("d values must be positive".into()));
        }
        if self.cv_folds < 2 || self.cv_folds > self.n_train {
            return Err(PlsError::InvalidConfig(format!("{} folds for {} training rows", self.cv_folds, self.n_train)));
        }
        if self.base_design.iter().any(|v| !v.is_finite() || v.abs() > 1.0 + 1e-12) {
            return Err(PlsError::InvalidConfig("base design must lie in [-1, 1]".into()));
        }
        Ok(())
    }

    fn n_test(&self) -> usize {
        self.n_test.unwrap_or(self.base_design.nrows() - self.n_train)
    }
}

/// Uniform rows in `[−1, 1]^p`.
pub fn synthetic_base_design(rows: usize, p: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, p, |_, _| rng.random_range(-1.0..=1.0))
}

/// Affine per-column map of a raw design onto `[−1, 1]`.
pub fn rescale_to_unit_box(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = x.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let lo = col.min();
        let hi = col.max();
        if !(hi > lo) {
            return Err(PlsError::ZeroVarianceColumn(j));
        }
        col.apply(|v| *v = 2.0 * (*v - lo) / (hi - lo) - 1.0);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RbfDesign {
    /// `X_ij = φ_j(x_i)`, `n × d`.
    pub x: DMatrix<f64>,
    /// `d × p`.
    pub centers: DMatrix<f64>,
    pub coefficients: DVector<f64>,
    pub f: DVector<f64>,
}

pub fn rbf_features(base: &DMatrix<f64>, centers: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(base.nrows(), centers.nrows(), |i, j| {
        let dist2: f64 = base.row(i).iter().zip(centers.row(j).iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        (-dist2).exp()
    })
}

/// Draws centers and coefficients, then evaluates the basis on `base`.
pub fn generate_rbf_design<R: Rng + ?Sized>(base: &DMatrix<f64>, d: usize, rng: &mut R) -> RbfDesign {
    let p = base.ncols();
    let centers = DMatrix::from_fn(d, p, |_, _| rng.random_range(-1.0..=1.0));
    let coefficients = DVector::from_fn(d, |_, _| rng.random_range(1.0..=3.0));
    let x = rbf_features(base, &centers);
    let f = &x * &coefficients;
    RbfDesign { x, centers, coefficients, f }
}

/// `σ = sqrt(var(f)/snr)` with the sample (`n − 1`) variance.
pub fn noise_sigma(f: &DVector<f64>, snr: f64) -> Result<f64> {
    if f.len() < 2 {
        return Err(PlsError::DegenerateSignal);
    }
    let var = f.variance() * f.len() as f64 / (f.len() as f64 - 1.0);
    if !(var > 0.0) {
        return Err(PlsError::DegenerateSignal);
    }
    Ok((var / snr).sqrt())
}

pub fn add_noise<R: Rng + ?Sized>(f: &DVector<f64>, sigma: f64, rng: &mut R) -> DVector<f64> {
    f.map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal))
}

/// `y = f + ε` with `σ² = var(f)/snr`.
pub fn draw_response<R: Rng + ?Sized>(f: &DVector<f64>, snr: f64, rng: &mut R) -> Result<(DVector<f64>, f64)> {
    let sigma = noise_sigma(f, snr)?;
    Ok((add_noise(f, sigma, rng), sigma))
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationRow {
    pub d: usize,
    pub rep: usize,
    pub method: Method,
    pub normalized_test_error: f64,
    pub chosen_m: Option<usize>,
    pub chosen_dof: f64,
    pub sigma_ratio: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MedianRow {
    pub d: usize,
    pub method: Method,
    pub normalized_test_error: f64,
    pub chosen_m: f64,
    pub chosen_dof: f64,
    pub sigma_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub seed: u64,
    pub reps: usize,
    pub d_values: Vec<usize>,
    pub n_train: usize,
    pub n_test: usize,
    pub snr: f64,
    pub m_max: usize,
    pub rows: Vec<SimulationRow>,
    pub medians: Vec<MedianRow>,
}

impl SimulationReport {
    pub fn median(&self, d: usize, method: Method) -> Option<&MedianRow> {
        self.medians.iter().find(|r| r.d == d && r.method == method)
    }
}

fn cell_rng(seed: u64, rep: usize, d: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((rep as u64) << 32) | d as u64);
    rng
}

pub fn run_simulation(cfg: &SimulationConfig) -> Result<SimulationReport> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = cfg
        .d_values
        .iter()
        .flat_map(|&d| (0..cfg.reps).map(move |rep| (d, rep)))
        .collect();
    let rows: Vec<SimulationRow> = cells
        .par_iter()
        .map(|&(d, rep)| match run_cell(cfg, d, rep) {
            Ok(rows) => rows,
            Err(e) => Method::ALL
                .iter()
                .map(|&method| SimulationRow {
                    d,
                    rep,
                    method,
                    normalized_test_error: f64::NAN,
                    chosen_m: None,
                    chosen_dof: f64::NAN,
                    sigma_ratio: f64::NAN,
                    error: Some(e.to_string()),
                })
                .collect(),
        })
        .flatten()
        .collect();

    let mut medians = Vec::new();
    for &d in &cfg.d_values {
        for method in Method::ALL {
            let sel: Vec<&SimulationRow> = rows.iter().filter(|r| r.d == d && r.method == method).collect();
            let col = |f: &dyn Fn(&SimulationRow) -> f64| median(&sel.iter().map(|r| f(r)).collect::<Vec<_>>());
            medians.push(MedianRow {
                d,
                method,
                normalized_test_error: col(&|r| r.normalized_test_error),
                chosen_m: col(&|r| r.chosen_m.map_or(f64::NAN, |m| m as f64)),
                chosen_dof: col(&|r| r.chosen_dof),
                sigma_ratio: col(&|r| r.sigma_ratio),
            });
        }
    }
    Ok(SimulationReport {
        seed: cfg.seed,
        reps: cfg.reps,
        d_values: cfg.d_values.clone(),
        n_train: cfg.n_train,
        n_test: cfg.n_test(),
        snr: cfg.snr,
        m_max: cfg.m_max,
        rows,
        medians,
    })
}

fn run_cell(cfg: &SimulationConfig, d: usize, rep: usize) -> Result<Vec<SimulationRow>> {
    let mut rng = cell_rng(cfg.seed, rep, d);
    let design = generate_rbf_design(&cfg.base_design, d, &mut rng);
    let mut order: Vec<usize> = (0..cfg.base_design.nrows()).collect();
    order.shuffle(&mut rng);
    let train_idx = &order[..cfg.n_train];
    let test_idx = &order[cfg.n_train..cfg.n_train + cfg.n_test()];

    let pick = |idx: &[usize]| DVector::from_iterator(idx.len(), idx.iter().map(|&i| design.f[i]));
    let f_train = pick(train_idx);
    let f_test = pick(test_idx);
    let sigma = noise_sigma(&f_train, cfg.snr)?;
    let y_train = add_noise(&f_train, sigma, &mut rng);
    let y_test = add_noise(&f_test, sigma, &mut rng);
    let cv_seed = rng.next_u64();

    let x_train = crate::linalg::select_rows(&design.x, train_idx);
    let x_test = crate::linalg::select_rows(&design.x, test_idx);
    let raw = RawDataset::new(x_train, y_train.clone())?;
    let data = standardize(&raw)?;
    let m_max = cfg.m_max.min(cfg.n_train - 1).min(d);
    let model = fit_pls(&data, m_max)?;
    let krylov = dof_krylov_path(&data, &model, model.n_components())?;
    let rss = model.rss_path();

    let trivial = y_test.map(|v| v - y_train.mean()).norm_squared();
    let test_error = |m: usize| -> Result<f64> {
        let (b0, b) = coefficients_original_scale(&model, m, &data)?;
        Ok((predict(b0, &b, &x_test)? - &y_test).norm_squared() / trivial)
    };

    let mut out = Vec::with_capacity(4);
    for method in Method::ALL {
        let table: CriterionTable = match method {
            Method::Cv => cross_validate(&raw, m_max, &CvConfig { folds: cfg.cv_folds, seed: cv_seed, shuffle: true })?,
            _ => select_bic(&data, m_max, method)?,
        };
        let m = table.chosen_m;
        let row = table.chosen();
        let (dof, sigma_hat_value) = match method {
            Method::Cv => {
                let dof = krylov.dof.get(m).cloned().unwrap_or(f64::NAN);
                (dof, sigma_hat(rss[m], cfg.n_train, dof).unwrap_or(f64::NAN))
            }
            _ => (row.dof.unwrap_or(f64::NAN), row.sigma2_hat.map_or(f64::NAN, f64::sqrt)),
        };
        out.push(SimulationRow {
            d,
            rep,
            method,
            normalized_test_error: test_error(m)?,
            chosen_m: Some(m),
            chosen_dof: dof,
            sigma_ratio: sigma_hat_value / sigma,
            error: None,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn basis_is_one_at_its_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let base = synthetic_base_design(20, 3, 2);
        let design = generate_rbf_design(&base, 4, &mut rng);
        let at_center = rbf_features(&design.centers.rows(1, 1).into_owned(), &design.centers);
        assert_eq!(at_center[(0, 1)], 1.0);
        assert!(design.x.iter().all(|&v| v > 0.0 && v <= 1.0));
        assert!(design.coefficients.iter().all(|&b| (1.0..=3.0).contains(&b)));
    }

    #[test]
    fn single_basis_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = synthetic_base_design(10, 2, 4);
        let design = generate_rbf_design(&base, 1, &mut rng);
        let beta = design.coefficients[0];
        assert_abs_diff_eq!(design.f, design.x.column(0) * beta, epsilon = 1e-15);
    }

    #[test]
    fn noise_level_and_limit() {
        let f = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 6.0]);
        let var = 3.7; // sample variance of f
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (_, sigma) = draw_response(&f, 9.0, &mut rng).unwrap();
        assert_abs_diff_eq!(sigma * sigma, var / 9.0, epsilon = 1e-12);
        let (y, _) = draw_response(&f, 1e12, &mut rng).unwrap();
        assert_abs_diff_eq!(y, f.clone(), epsilon = 1e-4);
        assert_eq!(draw_response(&DVector::from_element(4, 2.0), 9.0, &mut rng).unwrap_err(), PlsError::DegenerateSignal);
    }

    #[test]
    fn noise_generator_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = DVector::zeros(100_000);
        let eps = add_noise(&f, 1.7, &mut rng);
        let var = eps.variance();
        assert!((var / (1.7 * 1.7) - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn rescaling_hits_the_unit_box() {
        let x = DMatrix::from_row_slice(3, 2, &[0.0, 10.0, 5.0, 20.0, 10.0, 15.0]);
        let r = rescale_to_unit_box(&x).unwrap();
        assert_eq!(r.column(0).as_slice(), &[-1.0, 0.0, 1.0]);
        assert_eq!(r.column(1).as_slice(), &[-1.0, 1.0, 0.0]);
    }

    fn small_config() -> SimulationConfig {
        SimulationConfig {
            reps: 1,
            d_values: vec![10],
            m_max: 10,
            ..SimulationConfig::with_synthetic_base(1)
        }
    }

    #[test]
    fn single_cell_shape() {
        let report = run_simulation(&small_config()).unwrap();
        assert_eq!(report.rows.len(), 4);
        for row in &report.rows {
            assert!(row.error.is_none(), "{:?}", row.error);
            assert!(row.normalized_test_error.is_finite() && row.normalized_test_error >= 0.0);
            assert!(row.chosen_dof.is_finite());
            assert!(row.sigma_ratio.is_finite() && row.sigma_ratio > 0.0);
        }
        let naive = report.rows.iter().find(|r| r.method == Method::Naive).unwrap();
        assert_eq!(naive.chosen_dof, naive.chosen_m.unwrap() as f64 + 1.0);
    }

    #[test]
    fn report_is_deterministic() {
        let cfg = SimulationConfig { reps: 2, d_values: vec![10, 20], ..small_config() };
        let a = serde_json_like(&run_simulation(&cfg).unwrap());
        let b = serde_json_like(&run_simulation(&cfg).unwrap());
        assert_eq!(a, b);
    }

    fn serde_json_like(r: &SimulationReport) -> Vec<(usize, usize, u64, Option<usize>, u64, u64)> {
        r.rows
            .iter()
            .map(|x| (x.d, x.rep, x.normalized_test_error.to_bits(), x.chosen_m, x.chosen_dof.to_bits(), x.sigma_ratio.to_bits()))
            .collect()
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_config();
        cfg.n_train = 150;
        assert!(matches!(cfg.validate(), Err(PlsError::SplitTooLarge { .. })));
        let cfg = SimulationConfig { snr: 0.0, ..small_config() };
        assert!(matches!(cfg.validate(), Err(PlsError::InvalidConfig(_))));
        let cfg = SimulationConfig { reps: 0, ..small_config() };
        assert!(cfg.validate().is_err());
    }
}
