//! Machine-readable run reports emitted by the CLI with `--machine`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::irreducibility::IrreducibilityReport;
use crate::model::ValidationReport;
use crate::policy::PolicyFile;
use crate::saddle::SaddleResult;
use crate::value_iteration::ValueApproxResult;
use crate::verification::{SaddleCertificate, SimulationEstimate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub phase: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Payload {
    Validation(ValidationReport),
    Irreducibility(IrreducibilityReport),
    Value(ValueApproxResult),
    Saddle {
        result: SaddleResult,
        policies: PolicyFile,
        certificate: Option<SaddleCertificate>,
    },
    Verification(SaddleCertificate),
    Simulation(SimulationEstimate),
    Generated {
        path: String,
        n_states: usize,
        report: IrreducibilityReport,
        theta_admissible: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: serde_json::Value,
    pub outputs: Payload,
    pub timings: Vec<PhaseTiming>,
    pub version: String,
}

impl RunReport {
    pub fn new(
        command: &str,
        inputs: serde_json::Value,
        outputs: Payload,
        timings: Vec<PhaseTiming>,
    ) -> Self {
        RunReport {
            command: command.to_string(),
            inputs,
            outputs,
            timings,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Collects wall-clock durations of named phases.
#[derive(Debug, Default)]
pub struct Stopwatch {
    timings: Vec<PhaseTiming>,
}

impl Stopwatch {
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(PhaseTiming {
            phase: phase.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn finish(self) -> Vec<PhaseTiming> {
        self.timings
    }
}
