//! Trace data model, CSV persistence, and surrogate transient generation.
//!
//! A [`TraceDataset`] is a rectangular collection of fixed-length sampled
//! signals, one row per simulated scenario, labeled with the fault distance
//! in kilometers from the measuring terminal. Datasets either come from the
//! surrogate generator in [`generate_synthetic`] or from disk via
//! [`read_csv`] / [`write_csv`].

mod csv;
mod synth;

pub use csv::{read_csv, write_csv};
pub use synth::{
    generate_non_fault, generate_synthetic, generate_synthetic_serial, SynthConfig,
    FAULT_RESISTANCE_RANGE_OHM, INDUCTANCE_RANGE_MH,
};

use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Errors produced by dataset construction, generation, and persistence.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("empty scenario grid")]
    EmptyGrid,
    #[error("scenario {index} out of range: {message}")]
    ScenarioOutOfRange { index: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error in {path} line {line}: {message}")]
    Schema {
        path: String,
        line: usize,
        message: String,
    },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
}

/// Measured quantity carried by a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Current,
    Voltage,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Current => "current",
            Channel::Voltage => "voltage",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "current" => Ok(Channel::Current),
            "voltage" => Ok(Channel::Voltage),
            other => Err(format!("unknown channel '{other}'")),
        }
    }
}

/// Kind of recorded event. Non-fault events (load changes) carry no
/// meaningful distance label and are excluded from regression by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Fault,
    NonFault,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Fault => "fault",
            EventKind::NonFault => "non_fault",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fault" => Ok(EventKind::Fault),
            "non_fault" => Ok(EventKind::NonFault),
            other => Err(format!("unknown event kind '{other}'")),
        }
    }
}

/// One sampled trace with its scenario parameters.
///
/// `distance_km` is the regression target and must be positive for fault
/// events; it is ignored for non-fault events.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub samples: Vec<f64>,
    pub distance_km: f64,
    pub fault_resistance_ohm: f64,
    pub inductance_mh: f64,
    pub event_kind: EventKind,
}

/// A rectangular set of trace records sharing one channel and sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceDataset {
    pub records: Vec<TraceRecord>,
    pub sample_rate_hz: f64,
    pub channel: Channel,
}

impl TraceDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of samples per record (0 for an empty dataset).
    pub fn n_samples(&self) -> usize {
        self.records.first().map_or(0, |r| r.samples.len())
    }

    /// Checks that every record has the same sample count.
    pub fn validate_rectangular(&self) -> Result<(), DatasetError> {
        let n = self.n_samples();
        for (i, r) in self.records.iter().enumerate() {
            if r.samples.len() != n {
                return Err(DatasetError::InvalidDataset(format!(
                    "record {i} has {} samples, expected {n}",
                    r.samples.len()
                )));
            }
        }
        Ok(())
    }

    /// A copy containing only fault records, preserving order.
    pub fn faults_only(&self) -> TraceDataset {
        TraceDataset {
            records: self
                .records
                .iter()
                .filter(|r| r.event_kind == EventKind::Fault)
                .cloned()
                .collect(),
            sample_rate_hz: self.sample_rate_hz,
            channel: self.channel,
        }
    }

    /// Sample matrix with one row per record.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let p = self.n_samples();
        DMatrix::from_fn(n, p, |i, j| self.records[i].samples[j])
    }

    /// Distance labels in record order.
    pub fn distances(&self) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.records.iter().map(|r| r.distance_km))
    }
}
