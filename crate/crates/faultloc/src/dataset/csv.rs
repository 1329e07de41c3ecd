//! On-disk CSV format for trace datasets.
//!
//! One header line followed by one data row per record:
//!
//! ```text
//! channel,sample_rate_hz,distance_km,fault_resistance_ohm,inductance_mh,event_kind,s0,...,s{n-1}
//! current,10000,250,50,100,fault,0,0,1812.3,...
//! ```
//!
//! Floats are written in Rust's shortest round-trip decimal form, so
//! `read_csv(write_csv(ds))` reproduces every field bit-for-bit. Files are
//! UTF-8 with LF line endings.

use super::{Channel, DatasetError, EventKind, TraceDataset, TraceRecord};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

const META_COLUMNS: [&str; 6] = [
    "channel",
    "sample_rate_hz",
    "distance_km",
    "fault_resistance_ohm",
    "inductance_mh",
    "event_kind",
];

fn io_err(path: &Path, source: std::io::Error) -> DatasetError {
    DatasetError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn schema_err(path: &Path, line: usize, message: impl Into<String>) -> DatasetError {
    DatasetError::Schema {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Writes the dataset in the CSV schema above.
pub fn write_csv(ds: &TraceDataset, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    if ds.is_empty() {
        return Err(DatasetError::InvalidDataset(
            "refusing to write a dataset with no records".into(),
        ));
    }
    ds.validate_rectangular()?;

    let n = ds.n_samples();
    let mut out = String::new();
    out.push_str(&META_COLUMNS.join(","));
    for j in 0..n {
        let _ = write!(out, ",s{j}");
    }
    out.push('\n');
    for r in &ds.records {
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            ds.channel,
            ds.sample_rate_hz,
            r.distance_km,
            r.fault_resistance_ohm,
            r.inductance_mh,
            r.event_kind
        );
        for s in &r.samples {
            let _ = write!(out, ",{s}");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Reads a dataset written by [`write_csv`], validating the schema.
pub fn read_csv(path: impl AsRef<Path>) -> Result<TraceDataset, DatasetError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .filter(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| schema_err(path, 1, "missing header"))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < META_COLUMNS.len() {
        return Err(schema_err(
            path,
            1,
            format!(
                "header has {} columns, expected at least {}",
                columns.len(),
                META_COLUMNS.len()
            ),
        ));
    }
    for (i, expected) in META_COLUMNS.iter().enumerate() {
        if columns[i] != *expected {
            return Err(schema_err(
                path,
                1,
                format!("header column {i} is '{}', expected '{expected}'", columns[i]),
            ));
        }
    }
    let n_samples = columns.len() - META_COLUMNS.len();
    for (j, col) in columns[META_COLUMNS.len()..].iter().enumerate() {
        if *col != format!("s{j}") {
            return Err(schema_err(
                path,
                1,
                format!("sample column {j} is named '{col}', expected 's{j}'"),
            ));
        }
    }

    let parse_f64 = |path: &Path, line: usize, col: &str, cell: &str| -> Result<f64, DatasetError> {
        cell.parse::<f64>().map_err(|_| {
            schema_err(path, line, format!("column {col}: invalid number '{cell}'"))
        })
    };

    let mut records = Vec::new();
    let mut channel: Option<Channel> = None;
    let mut sample_rate: Option<f64> = None;
    for (idx, row) in lines {
        if row.trim().is_empty() {
            continue;
        }
        let line = idx + 1;
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != columns.len() {
            return Err(schema_err(
                path,
                line,
                format!("expected {} columns, found {}", columns.len(), cells.len()),
            ));
        }
        let row_channel: Channel = cells[0]
            .parse()
            .map_err(|e: String| schema_err(path, line, format!("column channel: {e}")))?;
        let row_rate = parse_f64(path, line, "sample_rate_hz", cells[1])?;
        let distance_km = parse_f64(path, line, "distance_km", cells[2])?;
        let fault_resistance_ohm = parse_f64(path, line, "fault_resistance_ohm", cells[3])?;
        let inductance_mh = parse_f64(path, line, "inductance_mh", cells[4])?;
        let event_kind: EventKind = cells[5]
            .parse()
            .map_err(|e: String| schema_err(path, line, format!("column event_kind: {e}")))?;

        match channel {
            None => channel = Some(row_channel),
            Some(c) if c != row_channel => {
                return Err(schema_err(
                    path,
                    line,
                    format!("inconsistent channel '{row_channel}', dataset is '{c}'"),
                ));
            }
            _ => {}
        }
        match sample_rate {
            None => sample_rate = Some(row_rate),
            Some(r) if r != row_rate => {
                return Err(schema_err(
                    path,
                    line,
                    format!("inconsistent sample_rate_hz {row_rate}, dataset uses {r}"),
                ));
            }
            _ => {}
        }
        if event_kind == EventKind::Fault && !(distance_km > 0.0) {
            return Err(schema_err(
                path,
                line,
                format!("fault record with non-positive distance_km {distance_km}"),
            ));
        }

        let mut samples = Vec::with_capacity(n_samples);
        for (j, cell) in cells[META_COLUMNS.len()..].iter().enumerate() {
            samples.push(parse_f64(path, line, &format!("s{j}"), cell)?);
        }
        records.push(TraceRecord {
            samples,
            distance_km,
            fault_resistance_ohm,
            inductance_mh,
            event_kind,
        });
    }

    let (channel, sample_rate_hz) = match (channel, sample_rate) {
        (Some(c), Some(r)) => (c, r),
        _ => return Err(schema_err(path, 2, "no data rows")),
    };
    Ok(TraceDataset {
        records,
        sample_rate_hz,
        channel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SynthConfig};
    use proptest::prelude::*;

    fn sample_dataset() -> TraceDataset {
        TraceDataset {
            records: vec![
                TraceRecord {
                    samples: vec![1.0, 2.5],
                    distance_km: 25.0,
                    fault_resistance_ohm: 0.01,
                    inductance_mh: 1.0,
                    event_kind: EventKind::Fault,
                },
                TraceRecord {
                    samples: vec![-0.125, 3.0e-7],
                    distance_km: 975.0,
                    fault_resistance_ohm: 200.0,
                    inductance_mh: 200.0,
                    event_kind: EventKind::NonFault,
                },
            ],
            sample_rate_hz: 10_000.0,
            channel: Channel::Current,
        }
    }

    #[test]
    fn writes_header_plus_one_line_per_record() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        write_csv(&sample_dataset(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("channel,sample_rate_hz,"));
        assert!(lines[0].ends_with(",s0,s1"));
        assert!(lines[1].ends_with(",1,2.5"));
    }

    #[test]
    fn round_trips_field_by_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        let ds = sample_dataset();
        write_csv(&ds, &path).unwrap();
        assert_eq!(read_csv(&path).unwrap(), ds);
    }

    #[test]
    fn round_trips_generated_data() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gen.csv");
        let cfg = SynthConfig {
            noise_snr_db: Some(40.0),
            random_seed: 3,
            ..SynthConfig::default()
        };
        let ds = generate_synthetic(
            &cfg,
            &[(25.0, 0.01, 1.0), (500.0, 50.0, 100.0), (975.0, 200.0, 200.0)],
            Channel::Voltage,
        )
        .unwrap();
        write_csv(&ds, &path).unwrap();
        assert_eq!(read_csv(&path).unwrap(), ds);
    }

    #[test]
    fn ragged_row_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ragged.csv");
        std::fs::write(
            &path,
            "channel,sample_rate_hz,distance_km,fault_resistance_ohm,inductance_mh,event_kind,s0,s1\n\
             current,10000,25,0.01,1,fault,1,2\n\
             current,10000,50,0.01,1,fault,1\n",
        )
        .unwrap();
        let err = read_csv(&path).unwrap_err();
        match err {
            DatasetError::Schema { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("expected 8 columns, found 7"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_missing_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "").unwrap();
        let err = read_csv(&path).unwrap_err();
        assert!(err.to_string().contains("missing header"), "{err}");
    }

    #[test]
    fn non_numeric_cell_names_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(
            &path,
            "channel,sample_rate_hz,distance_km,fault_resistance_ohm,inductance_mh,event_kind,s0\n\
             current,10000,25,0.01,1,fault,oops\n",
        )
        .unwrap();
        let err = read_csv(&path).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(err.contains("s0"), "{err}");
    }

    #[test]
    fn well_formed_three_row_file_has_three_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("three.csv");
        std::fs::write(
            &path,
            "channel,sample_rate_hz,distance_km,fault_resistance_ohm,inductance_mh,event_kind,s0,s1\n\
             voltage,10000,25,0.01,1,fault,640000,100\n\
             voltage,10000,50,0.01,1,fault,640000,200\n\
             voltage,10000,75,0.01,1,fault,640000,300\n",
        )
        .unwrap();
        let ds = read_csv(&path).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.channel, Channel::Voltage);
        assert_eq!(ds.sample_rate_hz, 10_000.0);
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_identity(
            rows in proptest::collection::vec(
                (
                    proptest::collection::vec(-1e6f64..1e6, 4),
                    1.0f64..1000.0,
                    0.01f64..200.0,
                    1.0f64..200.0,
                ),
                1..8,
            )
        ) {
            let ds = TraceDataset {
                records: rows
                    .into_iter()
                    .map(|(samples, d, rf, l)| TraceRecord {
                        samples,
                        distance_km: d,
                        fault_resistance_ohm: rf,
                        inductance_mh: l,
                        event_kind: EventKind::Fault,
                    })
                    .collect(),
                sample_rate_hz: 10_000.0,
                channel: Channel::Current,
            };
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("prop.csv");
            write_csv(&ds, &path).unwrap();
            prop_assert_eq!(read_csv(&path).unwrap(), ds);
        }
    }
}
