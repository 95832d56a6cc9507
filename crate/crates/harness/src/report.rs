use std::path::Path;

use crate::{HarnessError, Result};

/// Round of the first entry whose accuracy reaches `threshold` (`>=`).
pub fn rounds_to_threshold(series: &[(usize, f64)], threshold: f64) -> Result<Option<usize>> {
    if series.is_empty() {
        return Err(HarnessError::EmptySeries);
    }
    Ok(series.iter().find(|(_, acc)| *acc >= threshold).map(|(round, _)| *round))
}

/// `(round, global_accuracy)` pairs of a metrics CSV, skipping the round-0
/// evaluation of the initial model.
pub fn read_accuracy_series(path: &Path) -> Result<Vec<(usize, f64)>> {
    let csv_err = |source| HarnessError::Csv { path: path.to_path_buf(), source };
    let malformed = |msg: String| HarnessError::MalformedCsv { path: path.to_path_buf(), msg };
    let mut reader = csv::ReaderBuilder::new().from_path(path).map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    let column =
        |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| malformed(format!("missing column {name}")));
    let (round_col, acc_col) = (column("round")?, column("global_accuracy")?);

    let mut series = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let round: usize =
            field(round_col).parse().map_err(|_| malformed(format!("bad round {:?}", field(round_col))))?;
        let acc: f64 = field(acc_col).parse().map_err(|_| malformed(format!("bad accuracy {:?}", field(acc_col))))?;
        if round > 0 {
            series.push((round, acc));
        }
    }
    Ok(series)
}
