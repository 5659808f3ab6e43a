use serde::Serialize;

use plsdof::pls::{coefficients_original_scale, fit_pls};

use super::{load, print_schema};
use crate::args::{FitArgs, Format};
use crate::error::CliResult;
use crate::output::{cell, csv_table, emit_warnings, to_json, write_text, Warning};
use crate::schema;

#[derive(Serialize)]
struct PathEntry {
    m: usize,
    intercept: f64,
    coefficients: Vec<f64>,
    training_rss: f64,
    fitted: Vec<f64>,
}

#[derive(Serialize)]
struct FitOutput {
    command: &'static str,
    target: String,
    predictors: Vec<String>,
    n: usize,
    p: usize,
    m_max: usize,
    n_components: usize,
    degenerate_at: Option<usize>,
    warnings: Vec<Warning>,
    path: Vec<PathEntry>,
}

pub fn run(args: &FitArgs) -> CliResult<()> {
    if args.data.json_schema {
        return print_schema(schema::FIT);
    }
    let loaded = load(&args.data)?;
    let model = fit_pls(&loaded.data, loaded.m_max)?;
    let k = model.n_components();
    let warnings: Vec<Warning> = model
        .warning()
        .map(|e| Warning::from_error(&e, &format!("path truncated to {k} components")))
        .into_iter()
        .collect();
    emit_warnings(&warnings);

    let rss = model.rss_path();
    let path = (0..=k)
        .map(|m| {
            let (b0, b) = coefficients_original_scale(&model, m, &loaded.data)?;
            Ok(PathEntry {
                m,
                intercept: b0,
                coefficients: b.iter().copied().collect(),
                training_rss: rss[m],
                fitted: model.fitted(m)?.iter().copied().collect(),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let text = match args.data.format {
        Format::Json => to_json(&FitOutput {
            command: "fit",
            target: loaded.raw.target.clone(),
            predictors: loaded.raw.names.clone(),
            n: loaded.raw.n(),
            p: loaded.raw.p(),
            m_max: loaded.m_max,
            n_components: k,
            degenerate_at: model.degenerate_at,
            warnings,
            path,
        })?,
        Format::Csv => {
            let mut header = vec!["m".to_string(), "intercept".into(), "training_rss".into()];
            header.extend(loaded.raw.names.iter().cloned());
            let rows: Vec<Vec<String>> = path
                .iter()
                .map(|e| {
                    let mut r = vec![e.m.to_string(), cell(e.intercept), cell(e.training_rss)];
                    r.extend(e.coefficients.iter().map(|&c| cell(c)));
                    r
                })
                .collect();
            csv_table(&header, &rows)?
        }
    };
    write_text(args.data.output.as_deref(), &text)
}
