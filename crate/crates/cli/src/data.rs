// SPDX-License-Identifier: MIT OR Apache-2.0

//! CSV input and output. One row per observation in time order, one column
//! per grid point.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use mmdseg::kernel::Dataset;

use crate::error::{CliError, Result};

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok()
}

/// Parses CSV text. A first line with any non-numeric cell is a header and
/// is skipped. Rows and columns in messages are 1-based file positions.
pub fn parse_csv(input: impl Read) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (index, record) in reader.records().enumerate() {
        let line = index + 1;
        let record = record.map_err(|e| CliError::data(format!("row {line}: {e}")))?;
        if record.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        if index == 0 && record.iter().any(|c| parse_cell(c).is_none()) {
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(CliError::data(format!("row {line}: expected {expected} columns, found {}", record.len())));
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(col, cell)| match parse_cell(cell) {
                Some(v) if v.is_finite() => Ok(v),
                _ => Err(CliError::data(format!(
                    "row {line}, column {}: `{}` is not a finite number",
                    col + 1,
                    cell.trim()
                ))),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::data("no observations in input"));
    }
    Ok(Dataset::from_rows(rows)?)
}

pub fn load_csv(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_csv(file).map_err(|e| match e {
        CliError::Data(msg) => CliError::data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Writes curves with shortest round-trip formatting, so reading them back
/// reproduces every value exactly.
pub fn write_csv(data: &Dataset, out: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in data.rows() {
        writer.write_record(row.iter().map(|v| v.to_string())).map_err(|e| CliError::data(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::data(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset> {
        parse_csv(text.as_bytes())
    }

    #[test]
    fn plain_numeric() {
        let data = parse("1,2,3,4\n5,6,7,8\n9,10,11,12\n").unwrap();
        assert_eq!((data.len(), data.grid_size()), (3, 4));
        assert_eq!(data.row(2), &[9.0, 10.0, 11.0, 12.0]);
    }

    #[test]
    fn header_is_skipped() {
        let data = parse("t1,t2,t3\n1,2,3\n4,5,6\n").unwrap();
        assert_eq!((data.len(), data.grid_size()), (2, 3));
    }

    #[test]
    fn ragged_row_is_named() {
        let err = parse("1,2,3\n4,5\n").unwrap_err().to_string();
        assert!(err.contains("row 2"), "{err}");
    }

    #[test]
    fn bad_cell_is_located() {
        let err = parse("1,2,3\n4,x,6\n").unwrap_err().to_string();
        assert!(err.contains("row 2, column 2"), "{err}");
        assert!(parse("1,2\nnan,1\n").is_err());
    }

    #[test]
    fn empty_input() {
        assert!(matches!(parse(""), Err(CliError::Data(_))));
        assert!(matches!(parse("a,b\n"), Err(CliError::Data(_))));
    }

    #[test]
    fn round_trip_is_exact() {
        let rows = vec![vec![0.1 + 0.2, -1e-300, std::f64::consts::PI], vec![1.0 / 3.0, 2.5e17, -0.0]];
        let data = Dataset::from_rows(rows).unwrap();
        let mut buffer = Vec::new();
        write_csv(&data, &mut buffer).unwrap();
        assert_eq!(parse_csv(buffer.as_slice()).unwrap(), data);
    }
}
