//! Plain-text measurement files: one sensor per line, whitespace separated,
//! `x y azimuth` in 2-D or `x y z azimuth elevation` in 3-D. Lines whose first
//! non-blank character is `#` are comments.

use aoa_core::{MeasurementSet, SensorArray};

/// A parse failure with a 1-based position.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFile {
    pub array: SensorArray,
    pub measurements: MeasurementSet,
}

fn columns_for(dim: usize) -> usize {
    if dim == 2 {
        3
    } else {
        5
    }
}

/// Parses a measurement file. `dim` fixes the dimension; otherwise it is taken
/// from the column count of the first data row.
pub fn parse_measurements(text: &str, dim: Option<usize>, degrees: bool) -> Result<MeasurementFile, ParseError> {
    let mut dim = dim;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut last_line = 0;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = Vec::new();
        let mut offset = 0;
        for tok in line.split_whitespace() {
            let col = line[offset..].find(tok).map(|p| p + offset).unwrap_or(offset);
            offset = col + tok.len();
            let value: f64 = tok.parse().map_err(|_| ParseError {
                line: line_no,
                column: col + 1,
                message: format!("`{tok}` is not a number"),
            })?;
            if !value.is_finite() {
                return Err(ParseError { line: line_no, column: col + 1, message: format!("`{tok}` is not finite") });
            }
            fields.push(value);
        }
        let d = *dim.get_or_insert(match fields.len() {
            3 => 2,
            5 => 3,
            k => {
                return Err(ParseError {
                    line: line_no,
                    column: 1,
                    message: format!("expected 3 columns (x y az) or 5 (x y z az el), found {k}"),
                })
            }
        });
        if fields.len() != columns_for(d) {
            return Err(ParseError {
                line: line_no,
                column: 1,
                message: format!("expected {} columns for {d}-D data, found {}", columns_for(d), fields.len()),
            });
        }
        rows.push(fields);
    }
    let d = dim.unwrap_or(2);
    if !(d == 2 || d == 3) {
        return Err(ParseError { line: 0, column: 0, message: format!("dimension must be 2 or 3, got {d}") });
    }
    let scale = if degrees { std::f64::consts::PI / 180.0 } else { 1.0 };
    let positions: Vec<Vec<f64>> = rows.iter().map(|r| r[..d].to_vec()).collect();
    let azimuths: Vec<f64> = rows.iter().map(|r| r[d] * scale).collect();
    let array = SensorArray::from_rows(d, &positions).map_err(|e| ParseError {
        line: last_line,
        column: 0,
        message: e.to_string(),
    })?;
    let measurements = if d == 2 {
        MeasurementSet::planar(azimuths)
    } else {
        let elevations = rows.iter().map(|r| r[4] * scale).collect();
        MeasurementSet::spatial(azimuths, elevations).map_err(|e| ParseError {
            line: last_line,
            column: 0,
            message: e.to_string(),
        })?
    };
    Ok(MeasurementFile { array, measurements })
}

/// Writes a measurement file that [`parse_measurements`] reads back exactly.
pub fn format_measurements(array: &SensorArray, meas: &MeasurementSet) -> String {
    let mut out = String::new();
    if array.dim() == 2 {
        out.push_str("# x y azimuth\n");
    } else {
        out.push_str("# x y z azimuth elevation\n");
    }
    for (i, p) in array.positions().iter().enumerate() {
        let a = meas.azimuths[i];
        let line = match &meas.elevations {
            Some(e) => format!("{:?} {:?} {:?} {:?} {:?}\n", p[0], p[1], p[2], a, e[i]),
            None => format!("{:?} {:?} {:?}\n", p[0], p[1], a),
        };
        out.push_str(&line);
    }
    out
}
