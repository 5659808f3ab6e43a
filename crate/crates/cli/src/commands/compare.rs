use plsdof::comparison::{compare_methods, default_lambda_grid, ComparisonConfig};
use plsdof::dataprep::load_csv;

use super::{print_schema, required};
use crate::args::CompareArgs;
use crate::error::CliResult;
use crate::output::{csv_string, join, prepare_dir, to_json, write_text};
use crate::schema;

pub fn run(args: &CompareArgs) -> CliResult<()> {
    if args.json_schema {
        return print_schema(schema::COMPARE);
    }
    let raw = load_csv(required(&args.input, "input")?, &required(&args.target, "target")?)?;
    let cfg = ComparisonConfig {
        n_train: args.n_train,
        n_test: args.n_test,
        reps: args.reps,
        seed: args.seed,
        m_max: args.m_max,
        lambdas: args.lambdas.clone().unwrap_or_else(default_lambda_grid),
        folds: args.folds,
    };
    let report = compare_methods(&raw, &cfg)?;
    prepare_dir(&args.out_dir)?;
    write_text(Some(&join(&args.out_dir, "comparison_metrics.csv")), &csv_string(&report.metrics)?)?;
    write_text(Some(&join(&args.out_dir, "comparison_curves.csv")), &csv_string(&report.curves)?)?;
    write_text(Some(&join(&args.out_dir, "comparison.json")), &to_json(&report)?)?;
    Ok(())
}
