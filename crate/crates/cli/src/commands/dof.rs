use serde::Serialize;

use plsdof::dof_krylov::dof_krylov_path;
use plsdof::dof_lanczos::dof_lanczos;
use plsdof::pls::fit_pls;
use plsdof::PlsError;

use super::{load, print_schema};
use crate::args::{DofArgs, Engine, Format};
use crate::error::CliResult;
use crate::output::{cell, csv_table, emit_warnings, opt_cell, to_json, write_text, Warning};
use crate::schema;

#[derive(Serialize)]
struct DofRow {
    m: usize,
    lanczos: Option<f64>,
    krylov: Option<f64>,
    naive: f64,
    valid: bool,
}

#[derive(Serialize)]
struct DofOutput {
    command: &'static str,
    engine: &'static str,
    n: usize,
    p: usize,
    m_max: usize,
    n_components: usize,
    degenerate_at: Option<usize>,
    lanczos_truncated_at: Option<usize>,
    krylov_truncated_at: Option<usize>,
    krylov_singular_at: Option<usize>,
    max_disagreement: Option<f64>,
    warnings: Vec<Warning>,
    rows: Vec<DofRow>,
}

fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Lanczos => "lanczos",
        Engine::Krylov => "krylov",
        Engine::Both => "both",
        Engine::Naive => "naive",
    }
}

pub fn run(args: &DofArgs) -> CliResult<()> {
    if args.data.json_schema {
        return print_schema(schema::DOF);
    }
    let loaded = load(&args.data)?;
    let model = fit_pls(&loaded.data, loaded.m_max)?;
    let k = model.n_components();
    let mut warnings = Vec::new();
    if let Some(e) = model.warning() {
        warnings.push(Warning::from_error(&e, &format!("table truncated to m ≤ {k}")));
    }

    let want_lanczos = matches!(args.engine, Engine::Lanczos | Engine::Both);
    let want_krylov = matches!(args.engine, Engine::Krylov | Engine::Both);
    let lanczos = want_lanczos.then(|| dof_lanczos(&loaded.data, k, false)).transpose()?;
    let krylov = want_krylov.then(|| dof_krylov_path(&loaded.data, &model, k)).transpose()?;

    if let Some(jp) = &lanczos {
        if let Some(e) = jp.instability() {
            warnings.push(Warning::from_error(&e, "lanczos estimates excluded from that m on"));
        }
    }
    if let Some(path) = &krylov {
        if let Some(e) = &path.singular {
            warnings.push(Warning::from_error(e, "krylov estimates unavailable from that m on"));
        }
        if let Some(m) = path.truncated_at {
            warnings.push(Warning::from_error(&PlsError::NumericalInstability(m), "krylov estimates excluded from that m on"));
        }
    }
    emit_warnings(&warnings);

    let before = |t: Option<usize>, m: usize| t.is_none_or(|t| m < t);
    let rows: Vec<DofRow> = (0..=k)
        .map(|m| {
            let l = lanczos.as_ref().map(|jp| jp.dof[m]);
            let kr = krylov.as_ref().and_then(|p| p.dof.get(m).copied());
            let valid = lanczos.as_ref().is_none_or(|jp| before(jp.truncated_at, m))
                && krylov.as_ref().is_none_or(|p| m < p.dof.len() && before(p.truncated_at, m));
            DofRow { m, lanczos: l, krylov: kr, naive: m as f64 + 1.0, valid }
        })
        .collect();
    let max_disagreement = (args.engine == Engine::Both).then(|| {
        rows.iter()
            .filter(|r| r.valid)
            .filter_map(|r| Some((r.lanczos? - r.krylov?).abs()))
            .fold(0.0, f64::max)
    });

    let text = match args.data.format {
        Format::Json => to_json(&DofOutput {
            command: "dof",
            engine: engine_name(args.engine),
            n: loaded.raw.n(),
            p: loaded.raw.p(),
            m_max: loaded.m_max,
            n_components: k,
            degenerate_at: model.degenerate_at,
            lanczos_truncated_at: lanczos.as_ref().and_then(|jp| jp.truncated_at),
            krylov_truncated_at: krylov.as_ref().and_then(|p| p.truncated_at),
            krylov_singular_at: krylov.as_ref().and_then(|p| p.singular_at),
            max_disagreement,
            warnings,
            rows,
        })?,
        Format::Csv => {
            let header = ["m", "lanczos", "krylov", "naive", "valid"].map(String::from);
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![r.m.to_string(), opt_cell(r.lanczos), opt_cell(r.krylov), cell(r.naive), r.valid.to_string()])
                .collect();
            csv_table(&header, &body)?
        }
    };
    write_text(args.data.output.as_deref(), &text)
}
