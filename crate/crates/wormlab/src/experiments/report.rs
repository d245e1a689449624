//! Experiment reports and their CSV form.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The requested parameter is out of reach of the construction.
    Infeasible,
    /// The error budget cannot resolve the quantity.
    Inconclusive,
    /// Measured without a tolerance.
    Recorded,
}

impl Status {
    /// `Some(pass)` for rows with a tolerance check.
    pub fn pass_flag(self) -> Option<bool> {
        match self {
            Status::Pass => Some(true),
            Status::Fail => Some(false),
            _ => None,
        }
    }
}

/// How `value` is compared against `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub parameter: String,
    pub value: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub status: Status,
}

impl ReportRow {
    pub fn at_most(parameter: impl Into<String>, value: f64, limit: f64) -> Self {
        let status = if value <= limit { Status::Pass } else { Status::Fail };
        Self { parameter: parameter.into(), value, relation: Relation::AtMost, tolerance: limit, status }
    }

    pub fn at_least(parameter: impl Into<String>, value: f64, limit: f64) -> Self {
        let status = if value >= limit { Status::Pass } else { Status::Fail };
        Self { parameter: parameter.into(), value, relation: Relation::AtLeast, tolerance: limit, status }
    }

    /// A boolean property, stored as 1 or 0 and checked against 1.
    pub fn holds(parameter: impl Into<String>, ok: bool) -> Self {
        Self::at_least(parameter, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    pub fn record(parameter: impl Into<String>, value: f64) -> Self {
        Self { parameter: parameter.into(), value, relation: Relation::None, tolerance: f64::NAN, status: Status::Recorded }
    }

    pub fn infeasible(parameter: impl Into<String>, value: f64) -> Self {
        Self { status: Status::Infeasible, ..Self::record(parameter, value) }
    }

    pub fn inconclusive(parameter: impl Into<String>, value: f64) -> Self {
        Self { status: Status::Inconclusive, ..Self::record(parameter, value) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub resolution: f64,
    /// SHA-256 of the Worm's JSON form.
    pub spec_hash: String,
}

impl Metadata {
    pub fn new(seed: u64, resolution: f64, spec_json: &str) -> Self {
        Self { seed, resolution, spec_hash: hex::encode(Sha256::digest(spec_json.as_bytes())) }
    }
}

/// One row of a δ / slimness trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub scale: f64,
    pub t_n: Option<f64>,
    pub delta: Option<f64>,
    pub slimness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    pub rows: Vec<ReportRow>,
    pub metadata: Metadata,
    pub trace: Vec<TraceRow>,
}

/// Nine significant digits.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.8e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub const REPORT_HEADER: [&str; 10] = ["experiment", "parameter", "value", "relation", "tolerance", "status", "pass", "seed", "resolution", "spec_hash"];
pub const TRACE_HEADER: [&str; 6] = ["scale", "t_n", "delta", "slimness", "resolution", "seed"];

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, metadata: Metadata) -> Self {
        Self { experiment: experiment.into(), rows: Vec::new(), metadata, trace: Vec::new() }
    }

    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    /// No row failed its tolerance.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.status != Status::Fail)
    }

    pub fn row(&self, parameter: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.parameter == parameter)
    }

    pub fn count(&self, status: Status) -> usize {
        self.rows.iter().filter(|r| r.status == status).count()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(REPORT_HEADER).expect("in-memory write");
        let relation = |r: Relation| match r {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::None => "",
        };
        let status = |s: Status| serde_json::to_value(s).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        for r in &self.rows {
            let pass = r.status.pass_flag().map(|p| p.to_string()).unwrap_or_default();
            w.write_record([
                self.experiment.clone(),
                r.parameter.clone(),
                fmt_float(r.value),
                relation(r.relation).to_owned(),
                fmt_float(r.tolerance),
                status(r.status),
                pass,
                self.metadata.seed.to_string(),
                fmt_float(self.metadata.resolution),
                self.metadata.spec_hash.clone(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    pub fn trace_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(TRACE_HEADER).expect("in-memory write");
        for t in &self.trace {
            w.write_record([fmt_float(t.scale), fmt_opt(t.t_n), fmt_opt(t.delta), fmt_opt(t.slimness), fmt_float(self.metadata.resolution), self.metadata.seed.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    /// Writes `<experiment>.csv`, and `<experiment>_trace.csv` when there is
    /// a trace.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::File::create(dir.join(format!("{}.csv", self.experiment)))?.write_all(self.to_csv().as_bytes())?;
        if !self.trace.is_empty() {
            std::fs::File::create(dir.join(format!("{}_trace.csv", self.experiment)))?.write_all(self.trace_csv().as_bytes())?;
        }
        Ok(())
    }

    /// Rows of a report CSV written by [`ExperimentReport::write`], grouped
    /// by experiment.
    pub fn read_csv(path: &Path) -> Result<Vec<ExperimentReport>> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
        if r.headers().map_err(|e| Error::Parse(e.to_string()))?.iter().ne(REPORT_HEADER) {
            return Err(Error::Parse(format!("{} is not a report", path.display())));
        }
        let mut out: Vec<ExperimentReport> = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let num = |i: usize| -> Result<f64> {
                let s = &rec[i];
                if s.is_empty() {
                    Ok(f64::NAN)
                } else {
                    s.parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
                }
            };
            let relation = match &rec[3] {
                "<=" => Relation::AtMost,
                ">=" => Relation::AtLeast,
                _ => Relation::None,
            };
            let status: Status = serde_json::from_value(serde_json::Value::String(rec[5].to_owned()))?;
            let metadata = Metadata { seed: rec[7].parse().map_err(|_| Error::Parse("bad seed".into()))?, resolution: num(8)?, spec_hash: rec[9].to_owned() };
            let row = ReportRow { parameter: rec[1].to_owned(), value: num(2)?, relation, tolerance: num(4)?, status };
            match out.last_mut() {
                Some(rep) if rep.experiment == rec[0] => rep.rows.push(row),
                _ => {
                    let mut rep = ExperimentReport::new(&rec[0], metadata);
                    rep.rows.push(row);
                    out.push(rep);
                }
            }
        }
        Ok(out)
    }
}
