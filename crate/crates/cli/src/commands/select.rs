use serde::Serialize;

use plsdof::dataprep::load_csv;
use plsdof::dof_krylov::dof_krylov_path;
use plsdof::dof_lanczos::dof_lanczos;
use plsdof::pls::{coefficients_original_scale, fit_pls, predict};
use plsdof::selection::{cross_validate, select_bic, sigma_hat, CriterionRow, CriterionTable, CvConfig, Method};
use plsdof::PlsError;

use super::{load, print_schema, Loaded};
use crate::args::{Format, SelectArgs, SelectMethod};
use crate::error::CliResult;
use crate::output::{csv_table, emit_warnings, opt_cell, to_json, write_text, Warning};
use crate::schema;

#[derive(Serialize)]
struct Holdout {
    n: usize,
    mse: f64,
    normalized_error: f64,
}

#[derive(Serialize)]
struct SelectOutput {
    command: &'static str,
    method: Method,
    n: usize,
    p: usize,
    m_max: usize,
    chosen_m: usize,
    dof: Option<f64>,
    sigma_hat: Option<f64>,
    criterion_value: Option<f64>,
    truncated_at: Option<usize>,
    warnings: Vec<Warning>,
    test: Option<Holdout>,
    table: Vec<CriterionRow>,
}

/// DoF of a cross-validation choice: the Krylov estimate, or the Lanczos one
/// where the Krylov basis is unavailable.
fn dof_for_cv_choice(loaded: &Loaded, m: usize) -> CliResult<Option<f64>> {
    let model = fit_pls(&loaded.data, m)?;
    let path = dof_krylov_path(&loaded.data, &model, m)?;
    if let Some(&d) = path.dof.get(m) {
        return Ok(Some(d));
    }
    Ok(dof_lanczos(&loaded.data, m, false)?.dof.get(m).copied())
}

pub fn run(args: &SelectArgs) -> CliResult<()> {
    if args.data.json_schema {
        return print_schema(schema::SELECT);
    }
    let loaded = load(&args.data)?;
    let model = fit_pls(&loaded.data, loaded.m_max)?;
    let mut warnings = Vec::new();
    if let Some(e) = model.warning() {
        warnings.push(Warning::from_error(&e, &format!("candidates limited to m ≤ {}", model.n_components())));
    }

    let table: CriterionTable = match args.method {
        SelectMethod::Cv => cross_validate(&loaded.raw, loaded.m_max, &CvConfig { folds: args.folds, seed: args.seed, shuffle: true })?,
        SelectMethod::BicLanczos => select_bic(&loaded.data, loaded.m_max, Method::Lanczos)?,
        SelectMethod::BicKrylov => select_bic(&loaded.data, loaded.m_max, Method::Krylov)?,
        SelectMethod::BicNaive => select_bic(&loaded.data, loaded.m_max, Method::Naive)?,
    };
    if let Some(m) = table.truncated_at {
        warnings.push(Warning::from_error(&PlsError::NumericalInstability(m), &format!("candidates limited to m < {m}")));
    }
    emit_warnings(&warnings);

    let chosen = table.chosen().clone();
    let n = loaded.raw.n();
    let (dof, sigma) = match table.method {
        Method::Cv => {
            let dof = dof_for_cv_choice(&loaded, chosen.m)?;
            (dof, dof.and_then(|d| sigma_hat(chosen.rss, n, d).ok()))
        }
        _ => (chosen.dof, chosen.sigma2_hat.map(f64::sqrt)),
    };

    let test = match &args.test {
        Some(path) => {
            let target = loaded.raw.target.clone();
            let holdout = load_csv(path, &target)?;
            if holdout.names != loaded.raw.names {
                return Err(PlsError::DimensionMismatch { expected: loaded.raw.p(), found: holdout.p() }.into());
            }
            let (b0, b) = coefficients_original_scale(&model, chosen.m, &loaded.data)?;
            let sse = (predict(b0, &b, &holdout.x)? - &holdout.y).norm_squared();
            let trivial = holdout.y.map(|v| v - loaded.raw.y.mean()).norm_squared();
            Some(Holdout { n: holdout.n(), mse: sse / holdout.n() as f64, normalized_error: sse / trivial })
        }
        None => None,
    };

    let text = match args.data.format {
        Format::Json => to_json(&SelectOutput {
            command: "select",
            method: table.method,
            n,
            p: loaded.raw.p(),
            m_max: loaded.m_max,
            chosen_m: chosen.m,
            dof,
            sigma_hat: sigma,
            criterion_value: chosen.criterion,
            truncated_at: table.truncated_at,
            warnings,
            test,
            table: table.rows.clone(),
        })?,
        Format::Csv => {
            let header = ["m", "rss", "dof", "sigma2_hat", "criterion", "valid", "chosen"].map(String::from);
            let rows: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.m.to_string(),
                        opt_cell(Some(r.rss)),
                        opt_cell(r.dof),
                        opt_cell(r.sigma2_hat),
                        opt_cell(r.criterion),
                        r.valid.to_string(),
                        (r.m == chosen.m).to_string(),
                    ]
                })
                .collect();
            csv_table(&header, &rows)?
        }
    };
    write_text(args.data.output.as_deref(), &text)
}
