//! CSV input and output for the `test` subcommand.

use std::io::{Read, Write};

use ihw::engine::IhwResult;
use ihw::hypothesis::{Covariates, HypothesisTable};
use ihw::procedures::weighted_pvalue;

use crate::Failure;

pub const OUTPUT_COLUMNS: [&str; 8] = [
    "index",
    "pvalue",
    "covariate",
    "fold",
    "weight",
    "weighted_pvalue",
    "rejected",
    "threshold",
];

/// A parsed input file; `covariate_text` keeps the covariate cells verbatim
/// for echoing back.
#[derive(Debug)]
pub struct InputTable {
    pub table: HypothesisTable,
    pub covariate_text: Vec<String>,
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

/// Reads `pvalue`, `covariate` and an optional `fold` column. The covariate
/// is numeric when every cell parses as a finite number and categorical
/// otherwise.
pub fn read_table<R: Read>(reader: R) -> Result<InputTable, Failure> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Failure::data(format!("cannot read header: {e}")))?
        .clone();
    let p_col = column(&headers, "pvalue")
        .ok_or_else(|| Failure::data("line 1: missing required column \"pvalue\""))?;
    let x_col = column(&headers, "covariate")
        .ok_or_else(|| Failure::data("line 1: missing required column \"covariate\""))?;
    let fold_col = column(&headers, "fold");

    let mut pvalues = Vec::new();
    let mut covariate_text = Vec::new();
    let mut folds = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Failure::data(format!("malformed CSV: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |col: usize, name: &str| {
            record
                .get(col)
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Failure::data(format!("line {line}: empty {name}")))
        };
        let p = cell(p_col, "pvalue")?;
        let p: f64 = p
            .parse()
            .map_err(|_| Failure::data(format!("line {line}: pvalue {p:?} is not a number")))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Failure::data(format!("line {line}: pvalue {p} is outside [0, 1]")));
        }
        pvalues.push(p);
        covariate_text.push(cell(x_col, "covariate")?.to_string());
        if let Some(c) = fold_col {
            let f = cell(c, "fold")?;
            let label: usize = f
                .parse()
                .ok()
                .filter(|&l| l >= 1)
                .ok_or_else(|| Failure::data(format!("line {line}: fold {f:?} is not a label >= 1")))?;
            folds.push(label);
        }
    }
    if pvalues.is_empty() {
        return Err(Failure::data("input has no rows"));
    }

    let numeric: Option<Vec<f64>> = covariate_text
        .iter()
        .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect();
    let covariates = match numeric {
        Some(x) => Covariates::Numeric(x),
        None => Covariates::Categorical(covariate_text.clone()),
    };
    let table = HypothesisTable::new(pvalues, covariates, fold_col.map(|_| folds))
        .map_err(Failure::from_data)?;
    Ok(InputTable {
        table,
        covariate_text,
    })
}

/// Writes one row per hypothesis. Reported weights are the normalized IHW
/// weights; for the Storey variant the threshold column already includes
/// the per-fold `1 / pi0` factor.
pub fn write_results<W: Write>(
    input: &InputTable,
    result: &IhwResult,
    folds: &[usize],
    writer: W,
) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Failure::data(format!("cannot write output: {e}"));
    w.write_record(OUTPUT_COLUMNS).map_err(io)?;
    let pvalues = input.table.pvalues();
    let weights = result.weights.weights();
    for i in 0..pvalues.len() {
        let (p, wt) = (pvalues[i], weights[i]);
        w.write_record([
            (i + 1).to_string(),
            p.to_string(),
            input.covariate_text[i].clone(),
            folds[i].to_string(),
            wt.to_string(),
            weighted_pvalue(p, wt).to_string(),
            u8::from(result.outcome.rejected[i]).to_string(),
            result.outcome.thresholds[i].to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Failure::data(format!("cannot write output: {e}")))
}
