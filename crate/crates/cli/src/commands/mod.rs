mod compare;
mod dof;
mod fit;
mod select;
mod simulate;

pub use compare::run as compare;
pub use dof::run as dof;
pub use fit::run as fit;
pub use select::run as select;
pub use simulate::run as simulate;

use std::path::PathBuf;

use plsdof::dataprep::{load_csv, standardize};
use plsdof::{RawDataset, StandardizedData};

use crate::args::DataArgs;
use crate::error::{CliError, CliResult};
use crate::output::write_text;

pub struct Loaded {
    pub raw: RawDataset,
    pub data: StandardizedData,
    pub m_max: usize,
}

fn required<T: Clone>(value: &Option<T>, flag: &str) -> CliResult<T> {
    value.clone().ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

pub fn load(args: &DataArgs) -> CliResult<Loaded> {
    let input: PathBuf = required(&args.input, "input")?;
    let target: String = required(&args.target, "target")?;
    let raw = load_csv(&input, &target)?;
    let data = standardize(&raw)?;
    let m_max = args.m_max.unwrap_or((raw.n() - 1).min(raw.p()));
    Ok(Loaded { raw, data, m_max })
}

pub fn print_schema(schema: &str) -> CliResult<()> {
    write_text(None, schema)
}
