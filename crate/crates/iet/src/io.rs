use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::DataError;
use crate::summary::SummaryTable;

/// One JSON document per line, `\n` terminated.
pub fn write_jsonl<T: Serialize, W: Write + ?Sized>(
    out: &mut W,
    item: &T,
) -> Result<(), DataError> {
    serde_json::to_writer(&mut *out, item).map_err(|e| DataError::Json { line: 0, source: e })?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Reads every nonblank line; errors carry the 1-based line number.
pub fn read_jsonl<T: DeserializeOwned>(input: impl BufRead) -> Result<Vec<T>, DataError> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| DataError::Json {
            line: n + 1,
            source: e,
        })?);
    }
    Ok(out)
}

pub const SUMMARY_HEADER: [&str; 12] = [
    "i",
    "samples",
    "with_hit",
    "hits",
    "frequency",
    "ci_lo",
    "ci_hi",
    "exact_m_frequency",
    "distinct_m",
    "max_multiplicity",
    "median_balance",
    "slope",
];

/// One row per window; the regression slope is repeated on every row and
/// left empty when there was too little data.
pub fn write_summary_csv(out: impl Write, table: &SummaryTable) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    let slope = table
        .slope
        .as_ref()
        .map(|r| r.slope.to_string())
        .unwrap_or_default();
    for b in &table.bins {
        w.write_record([
            b.i.to_string(),
            b.samples.to_string(),
            b.with_hit.to_string(),
            b.hits.to_string(),
            b.frequency.to_string(),
            b.ci95.0.to_string(),
            b.ci95.1.to_string(),
            b.exact_m_frequency.to_string(),
            b.distinct_m.to_string(),
            b.max_multiplicity.to_string(),
            b.median_balance.map(|x| x.to_string()).unwrap_or_default(),
            slope.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
