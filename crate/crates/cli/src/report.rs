//! Machine-readable reports. Every float is written with 17 significant
//! digits so a report pins down the exact binary values.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;
use std::time::Instant;

use quasilocal_core::{
    quasilocal_energy, AssemblyMode, ClosedFormResult, EnergyValue, FiberPath, Method, Residuals,
};
use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
pub struct Report {
    pub energy: EnergyValue,
    pub neg_inf: bool,
    pub method: Method,
    pub method_values: BTreeMap<Method, EnergyValue>,
    pub cross_check_deltas: BTreeMap<String, f64>,
    pub kernel_dim: usize,
    pub singular_values: Vec<f64>,
    pub kernel_threshold: f64,
    pub kernel_ambiguous: bool,
    pub brown_york: EnergyValue,
    pub closed_form: Option<ClosedFormResult>,
    pub residuals: Residuals,
    pub resolution: (usize, usize),
    pub path: FiberPath,
    pub assembly: AssemblyMode,
    pub data_modified: bool,
    pub flagged: bool,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
    pub config_echo: RunConfig,
}

/// Runs one configuration.
pub fn compute(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let rep = quasilocal_energy(&config.request())?;
    let elapsed = start.elapsed().as_secs_f64();
    if let Some(m) = config.methods.iter().find(|m| !rep.method_values.contains_key(m)) {
        return Err(CliError::Validation(format!("method {} is not available for this specification", m.name())));
    }
    let brown_york = if rep.brown_york.is_finite() { EnergyValue::Finite(rep.brown_york) } else { EnergyValue::NegInf };
    Ok(Report {
        energy: rep.energy,
        neg_inf: rep.is_neg_inf(),
        method: rep.method,
        method_values: rep.method_values,
        cross_check_deltas: rep.cross_check_deltas,
        kernel_dim: rep.kernel.dim,
        singular_values: rep.kernel.singular_values,
        kernel_threshold: rep.kernel.threshold,
        kernel_ambiguous: rep.kernel.ambiguous,
        brown_york,
        closed_form: rep.closed_form,
        residuals: rep.residuals,
        resolution: rep.resolution,
        path: rep.path,
        assembly: rep.assembly,
        data_modified: rep.data_modified,
        flagged: rep.flagged,
        notes: rep.notes,
        runtime_seconds: config.record_runtime.then_some(elapsed),
        config_echo: config.clone(),
    })
}

/// Pretty JSON with 17 significant digits per float.
struct SignificantDigits<'a>(PrettyFormatter<'a>);

impl Formatter for SignificantDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<S: Serialize>(value: &S) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SignificantDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    std::fs::write(path, to_json(value)).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// What a failed run leaves in the output file.
#[derive(Debug, serde::Serialize)]
pub struct FailureReport<'a> {
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    pub config_echo: &'a RunConfig,
}

impl<'a> FailureReport<'a> {
    pub fn new(err: &CliError, config: &'a RunConfig) -> Self {
        let residual = match err {
            CliError::Core(quasilocal_core::Error::NonConvergence { residual }) => Some(*residual),
            _ => None,
        };
        Self { error: err.to_string(), residual, config_echo: config }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_significant_digits() {
        let json = to_json(&vec![std::f64::consts::PI, 0.1, 0.0, -2.5e-300]);
        assert!(json.contains("3.1415926535897931e0"), "{json}");
        assert!(json.contains("1.0000000000000001e-1"), "{json}");
        let back: Vec<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![std::f64::consts::PI, 0.1, 0.0, -2.5e-300]);
    }

    #[test]
    fn non_convergence_keeps_its_residual() {
        let config = RunConfig::new(quasilocal_core::MetricSpec::FlatDisk { radius: 1.0 }, (16, 32));
        let err = CliError::Core(quasilocal_core::Error::NonConvergence { residual: 0.25 });
        let json = to_json(&FailureReport::new(&err, &config));
        assert!(json.contains("\"residual\": 2.5000000000000000e-1"), "{json}");
    }
}
