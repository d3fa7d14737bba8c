//! Byte-stable result emission: sorted rows, fixed float formatting.

use std::path::Path;

use crate::config::StudyKind;
use crate::study::{Row, StudyResult};
use crate::HarnessError;

fn write(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    std::fs::write(path, bytes)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

/// Rows as CSV text; callers get identical bytes for identical results.
pub fn rows_csv(rows: &[Row]) -> String {
    let mut out = String::from(Row::CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

/// Approximation rows in the study's dedicated schema. The study runs
/// the ReLU pipeline, so the activation column is fixed and tau is zero;
/// `bound_thm` is the existence-rate reference sqrt(116) B / sqrt(m).
pub fn approx_rows_csv(rows: &[Row]) -> String {
    let mut out =
        String::from("d,m,m1,m2,activation,tau,seed,h1_error,barron_norm,bound_thm\n");
    for row in rows.iter().filter(|r| r.error.is_empty()) {
        let (m1, m2) = ritz_core::width_split(row.m);
        let bound_thm = 116.0_f64.sqrt() * row.bound / (row.m as f64).sqrt();
        out.push_str(&format!(
            "{},{},{m1},{m2},relu,0,{},{:.12e},{:.12e},{:.12e}\n",
            row.d, row.m, row.seed, row.value, row.bound, bound_thm
        ));
    }
    out
}

/// Full result as pretty JSON. Serialization order is struct order and
/// row order is the result's sorted order, so the bytes are stable.
pub fn result_json(result: &StudyResult) -> String {
    let mut text = serde_json::to_string_pretty(result).expect("result serializes");
    text.push('\n');
    text
}

/// Writes `rows.csv` and `result.json` into `dir`, replacing the
/// crash-safety partial log if one is present.
pub fn emit(result: &StudyResult, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    write(&dir.join("rows.csv"), rows_csv(&result.rows).as_bytes())?;
    if result.kind == StudyKind::Approximation {
        write(
            &dir.join("approx_rows.csv"),
            approx_rows_csv(&result.rows).as_bytes(),
        )?;
    }
    write(&dir.join("result.json"), result_json(result).as_bytes())?;
    let partial = dir.join("rows.partial.csv");
    if partial.exists() {
        let _ = std::fs::remove_file(partial);
    }
    Ok(())
}
