use crate::config::{ConfigOverrides, SystemConfig};
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub provenance: Provenance,
    pub values: Vec<f64>,
    /// Standard-error column name and values.
    pub stderr: Option<(String, Vec<f64>)>,
}

impl Series {
    pub fn analytic(name: &str, values: Vec<f64>) -> Self {
        Self { name: name.into(), provenance: Provenance::Analytic, values, stderr: None }
    }

    pub fn monte_carlo(name: &str, values: Vec<f64>, stderr: Option<(&str, Vec<f64>)>) -> Self {
        Self {
            name: name.into(),
            provenance: Provenance::MonteCarlo,
            values,
            stderr: stderr.map(|(n, v)| (n.to_string(), v)),
        }
    }
}

/// Curves over one x-axis, written as one CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSet {
    pub id: String,
    pub x_name: String,
    pub x: Vec<f64>,
    pub series: Vec<Series>,
}

impl CurveSet {
    pub fn new(id: &str, x_name: &str, x: Vec<f64>) -> Self {
        Self { id: id.into(), x_name: x_name.into(), x, series: Vec::new() }
    }

    pub fn push(&mut self, series: Series) -> &mut Self {
        self.series.push(series);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    /// Values of series `name`; panics if absent.
    pub fn values(&self, name: &str) -> &[f64] {
        &self.get(name).unwrap_or_else(|| panic!("no series `{name}` in {}", self.id)).values
    }

    /// Standard errors stored under column `name`.
    pub fn stderr(&self, name: &str) -> Option<&[f64]> {
        self.series.iter().find_map(|s| match &s.stderr {
            Some((n, v)) if n == name => Some(v.as_slice()),
            _ => None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let len = self.x.len();
        for s in &self.series {
            if s.values.len() != len || s.stderr.as_ref().is_some_and(|(_, e)| e.len() != len) {
                return Err(invalid("curve", format!("series `{}` does not match the {len} x values", s.name)));
            }
            if let Some((name, e)) = &s.stderr {
                if e.iter().any(|&v| v < 0.0) {
                    return Err(invalid("curve", format!("negative standard error in `{name}`")));
                }
            }
        }
        Ok(())
    }

    /// Header row, then one row per x value: series values first, standard
    /// errors after them.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        self.validate()?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let io = |e: csv::Error| invalid("csv", e.to_string());
        let mut header = vec![self.x_name.clone()];
        header.extend(self.series.iter().map(|s| s.name.clone()));
        header.extend(self.series.iter().filter_map(|s| s.stderr.as_ref().map(|(n, _)| n.clone())));
        w.write_record(&header).map_err(io)?;
        for i in 0..self.x.len() {
            let mut row = vec![self.x[i].to_string()];
            row.extend(self.series.iter().map(|s| s.values[i].to_string()));
            row.extend(self.series.iter().filter_map(|s| s.stderr.as_ref().map(|(_, e)| e[i].to_string())));
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| invalid("csv", e.to_string()))
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Everything needed to rerun a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub preset: Option<String>,
    pub config: ConfigOverrides,
    pub seed: u64,
    pub workers: usize,
    /// Command-specific extras, e.g. the detection test and its τ grid.
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub extra: serde_json::Map<String, serde_json::Value>,
    pub outputs: Vec<String>,
    pub version: String,
    pub wall_clock_secs: f64,
}

impl RunManifest {
    pub fn new(command: &str, preset: Option<&str>, cfg: &SystemConfig, workers: usize) -> Self {
        Self {
            command: command.into(),
            preset: preset.map(str::to_string),
            config: cfg.clone().into(),
            seed: cfg.seed,
            workers,
            extra: serde_json::Map::new(),
            outputs: Vec::new(),
            version: version(),
            wall_clock_secs: 0.0,
        }
    }

    pub fn system_config(&self) -> Result<SystemConfig> {
        self.config.clone().try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Config(e.to_string()))
    }
}

pub fn version() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CurveSet {
        let mut c = CurveSet::new("t", "tau", vec![1.0, 2.5]);
        c.push(Series::analytic("a", vec![0.5, 0.25]));
        c.push(Series::monte_carlo("m", vec![0.4, 0.3], Some(("stderr_m", vec![0.01, 0.02]))));
        c
    }

    #[test]
    fn csv_layout() {
        let text = sample().to_csv_string().unwrap();
        assert_eq!(text, "tau,a,m,stderr_m\n1,0.5,0.4,0.01\n2.5,0.25,0.3,0.02\n");
        assert_eq!(sample().stderr("stderr_m").unwrap(), &[0.01, 0.02]);
    }

    #[test]
    fn ragged_series_rejected() {
        let mut c = sample();
        c.push(Series::analytic("b", vec![1.0]));
        assert!(c.write_csv(Vec::new()).is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let cfg = SystemConfig { l: 40, seed: 9, ..Default::default() };
        let mut m = RunManifest::new("figure", Some("fig6-sweepN"), &cfg, 3);
        m.outputs.push("a.csv".into());
        let back = RunManifest::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.system_config().unwrap(), cfg);
    }
}
