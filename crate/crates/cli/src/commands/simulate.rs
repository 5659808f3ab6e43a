use std::path::PathBuf;

use serde::Deserialize;

use plsdof::dataprep::read_numeric_csv;
use plsdof::simulate::{rescale_to_unit_box, run_simulation, synthetic_base_design, SimulationConfig};
use plsdof::PlsError;

use super::print_schema;
use crate::args::SimulateArgs;
use crate::error::{CliError, CliResult};
use crate::output::{csv_string, join, prepare_dir, to_json, write_text};
use crate::schema;

/// Settings accepted in the `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    reps: Option<usize>,
    d: Option<Vec<usize>>,
    seed: Option<u64>,
    n_train: Option<usize>,
    n_test: Option<usize>,
    snr: Option<f64>,
    m_max: Option<usize>,
    folds: Option<usize>,
    base: Option<PathBuf>,
    base_target: Option<String>,
    base_rows: Option<usize>,
    base_p: Option<usize>,
    out_dir: Option<PathBuf>,
}

fn read_config(path: &PathBuf) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    toml::from_str(&text).map_err(|e| PlsError::InvalidConfig(format!("{}: {}", path.display(), e.message())).into())
}

fn base_design(path: &PathBuf, target: Option<&str>) -> CliResult<nalgebra::DMatrix<f64>> {
    let (header, data) = read_numeric_csv(path)?;
    let keep: Vec<usize> = match target {
        Some(t) => {
            let idx = header.iter().position(|h| h == t).ok_or_else(|| PlsError::MissingTarget(t.to_string()))?;
            (0..header.len()).filter(|&j| j != idx).collect()
        }
        None => (0..header.len()).collect(),
    };
    Ok(rescale_to_unit_box(&data.select_columns(&keep))?)
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    if args.json_schema {
        return print_schema(schema::SIMULATE);
    }
    let file = match &args.config {
        Some(p) => read_config(p)?,
        None => FileConfig::default(),
    };
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let base = match args.base.as_ref().or(file.base.as_ref()) {
        Some(p) => base_design(p, args.base_target.as_deref().or(file.base_target.as_deref()))?,
        None => synthetic_base_design(file.base_rows.unwrap_or(203), file.base_p.unwrap_or(12), seed),
    };
    let defaults = SimulationConfig::with_synthetic_base(seed);
    let n_train = args.n_train.or(file.n_train).unwrap_or(defaults.n_train);
    let n_test = args.n_test.or(file.n_test).or_else(|| (base.nrows() >= n_train + 153).then_some(153));
    let cfg = SimulationConfig {
        base_design: base,
        d_values: args.d.clone().or(file.d).unwrap_or(defaults.d_values),
        n_train,
        n_test,
        snr: args.snr.or(file.snr).unwrap_or(defaults.snr),
        reps: args.reps.or(file.reps).unwrap_or(defaults.reps),
        seed,
        m_max: args.m_max.or(file.m_max).unwrap_or(defaults.m_max),
        cv_folds: args.folds.or(file.folds).unwrap_or(defaults.cv_folds),
    };
    let report = run_simulation(&cfg)?;
    for row in report.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("warning: cell d={} rep={} failed: {}", row.d, row.rep, row.error.as_deref().unwrap_or(""));
    }
    let out_dir = args.out_dir.clone().or(file.out_dir).unwrap_or_else(|| PathBuf::from("."));
    prepare_dir(&out_dir)?;
    write_text(Some(&join(&out_dir, "simulation.csv")), &csv_string(&report.rows)?)?;
    write_text(Some(&join(&out_dir, "simulation.json")), &to_json(&report)?)?;
    Ok(())
}
