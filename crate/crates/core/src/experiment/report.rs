use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentKind, ExperimentParams, SolverSettings};
use crate::closed_form::NlsParams;
use crate::error::{Error, Result};
use crate::io::{csv_bytes, fmt_f64, to_json_string, write_atomic};
use crate::spectral::Dealias;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    Pde,
    /// Closed-form two-mode evolution standing in for an unaffordable PDE run.
    ClosedFormFallback,
}

/// Solver configuration behind a number in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub gridsize: usize,
    pub dt: f64,
    pub dealias: Dealias,
}

impl RunRecord {
    pub fn new(label: impl Into<String>, settings: &SolverSettings) -> Self {
        Self {
            label: label.into(),
            gridsize: settings.gridsize,
            dt: settings.dt,
            dealias: settings.dealias,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub gap: Option<f64>,
    pub bound_ratio: Option<f64>,
    pub mass: Option<f64>,
    pub hamiltonian: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub source: TraceSource,
    /// `None` for quantities evaluated in closed form.
    pub run: Option<RunRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Verdict {
    /// `measured >= threshold`
    pub fn at_least(name: &str, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: measured >= threshold,
            measured,
            threshold,
            detail: detail.into(),
        }
    }

    /// `measured < threshold`
    pub fn below(name: &str, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: measured < threshold,
            measured,
            threshold,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub nls: NlsParams,
    pub params: Option<ExperimentParams>,
    pub source: TraceSource,
    pub runs: Vec<RunRecord>,
    pub trace: Vec<TraceRow>,
    pub measurements: Vec<Measurement>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(kind: ExperimentKind, nls: NlsParams, source: TraceSource) -> Self {
        Self {
            kind,
            nls,
            params: None,
            source,
            runs: Vec::new(),
            trace: Vec::new(),
            measurements: Vec::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn measure(&mut self, name: &str, value: f64, source: TraceSource, run: Option<&RunRecord>) {
        self.measurements.push(Measurement {
            name: name.into(),
            value,
            source,
            run: run.cloned(),
        });
    }

    pub fn measurement(&self, name: &str) -> Option<f64> {
        self.measurements.iter().find(|m| m.name == name).map(|m| m.value)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn trace_csv(&self) -> Result<Vec<u8>> {
        let cell = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        csv_bytes(
            &["t", "gap", "bound_ratio", "mass", "hamiltonian"],
            self.trace.iter().map(|r| {
                vec![
                    fmt_f64(r.t),
                    cell(r.gap),
                    cell(r.bound_ratio),
                    cell(r.mass),
                    cell(r.hamiltonian),
                ]
            }),
        )
    }

    /// Writes `<kind>_report.json` and `<kind>_trace.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        let json = dir.join(format!("{}_report.json", self.kind.name()));
        let csv = dir.join(format!("{}_trace.csv", self.kind.name()));
        write_atomic(&json, to_json_string(self)?.as_bytes())?;
        write_atomic(&csv, &self.trace_csv()?)?;
        Ok((json, csv))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.into_inner().to_string(),
        })
    }

    pub fn summary(&self) -> String {
        let mut out = format!(
            "{} ({}): {}\n",
            self.kind.name(),
            match self.source {
                TraceSource::Pde => "pde",
                TraceSource::ClosedFormFallback => "closed-form fallback",
            },
            if self.passed() { "PASS" } else { "FAIL" }
        );
        for v in &self.verdicts {
            out.push_str(&format!(
                "  [{}] {}: measured {} vs threshold {}  {}\n",
                if v.passed { "pass" } else { "FAIL" },
                v.name,
                fmt_f64(v.measured),
                fmt_f64(v.threshold),
                v.detail
            ));
        }
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::Sign;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new(
            ExperimentKind::Thm1,
            NlsParams::cubic(Sign::Defocusing),
            TraceSource::Pde,
        );
        let run = RunRecord::new("unit", &SolverSettings::default());
        r.runs.push(run.clone());
        r.trace.push(TraceRow {
            t: 0.0,
            gap: Some(0.0),
            mass: Some(0.1),
            ..Default::default()
        });
        r.measure("sup_gap", 0.5, TraceSource::Pde, Some(&run));
        r.verdicts.push(Verdict::at_least("sup_gap", 0.5, 0.25, ""));
        r
    }

    #[test]
    fn csv_leaves_missing_columns_empty() {
        let text = String::from_utf8(sample().trace_csv().unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,gap,bound_ratio,mass,hamiltonian"));
        assert_eq!(
            lines.next(),
            Some("0.0000000000000000e0,0.0000000000000000e0,,1.0000000000000001e-1,")
        );
    }

    #[test]
    fn write_and_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let r = sample();
        let (json, csv) = r.write(dir.path()).unwrap();
        assert!(csv.exists());
        assert_eq!(ExperimentReport::read(&json).unwrap(), r);
        assert!(r.passed());
        assert_eq!(r.measurement("sup_gap"), Some(0.5));
    }
}
