//! Per-step simulation records and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::vehicle::{ControlInput, Pose};

pub const TRACE_HEADER: [&str; 13] = [
    "step",
    "truth_x",
    "truth_y",
    "truth_theta",
    "est_x",
    "est_y",
    "est_theta",
    "trace_pos",
    "entropy",
    "meas_nT",
    "v",
    "omega",
    "gramian_det",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SimTraceRecord {
    pub step: usize,
    pub truth: Pose,
    pub estimate: Pose,
    /// Trace of the position covariance, m².
    pub trace_position: f64,
    /// Belief entropy in nats (belief-grid runs only).
    pub entropy: Option<f64>,
    /// Sensor reading taken during this step, nT.
    pub measurement: Option<f64>,
    pub control: ControlInput,
    /// Gramian determinant at the estimate under the applied control (particle-filter runs only).
    pub gramian_det: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes records as CSV. Floats use shortest round-trip formatting.
pub fn write_trace_to<W: Write>(records: &[SimTraceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Trace(e.to_string());
    w.write_record(TRACE_HEADER).map_err(err)?;
    for r in records {
        w.write_record([
            r.step.to_string(),
            r.truth.x.to_string(),
            r.truth.y.to_string(),
            r.truth.theta.to_string(),
            r.estimate.x.to_string(),
            r.estimate.y.to_string(),
            r.estimate.theta.to_string(),
            r.trace_position.to_string(),
            opt(r.entropy),
            opt(r.measurement),
            r.control.v.to_string(),
            r.control.omega.to_string(),
            opt(r.gramian_det),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Trace(e.to_string()))
}

pub fn trace_to_string(records: &[SimTraceRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_trace_to(records, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Trace(e.to_string()))
}

pub fn write_trace(records: &[SimTraceRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace_to(records, std::io::BufWriter::new(file))
}

pub fn read_trace_from<R: Read>(input: R) -> Result<Vec<SimTraceRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Trace(e.to_string()))?
        .clone();
    if headers.iter().ne(TRACE_HEADER) {
        return Err(Error::Trace(format!(
            "unexpected header: {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Trace(format!("line {line}: {e}")))?;
        let field = |k: usize| -> Result<Option<f64>> {
            let s = &row[k];
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>()
                .map(Some)
                .map_err(|e| Error::Trace(format!("line {line}, column {}: {e}", TRACE_HEADER[k])))
        };
        let req = |k: usize| -> Result<f64> {
            field(k)?
                .ok_or_else(|| Error::Trace(format!("line {line}: missing {}", TRACE_HEADER[k])))
        };
        let step = row[0]
            .parse::<usize>()
            .map_err(|e| Error::Trace(format!("line {line}, column step: {e}")))?;
        out.push(SimTraceRecord {
            step,
            truth: Pose {
                x: req(1)?,
                y: req(2)?,
                theta: req(3)?,
            },
            estimate: Pose {
                x: req(4)?,
                y: req(5)?,
                theta: req(6)?,
            },
            trace_position: req(7)?,
            entropy: field(8)?,
            measurement: field(9)?,
            control: ControlInput::new(req(10)?, req(11)?),
            gramian_det: field(12)?,
        });
    }
    Ok(out)
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<SimTraceRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_trace_from(std::io::BufReader::new(file))
}
