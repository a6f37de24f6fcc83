//! Flat experiment configuration, read from `key = value` text or a JSON
//! object with scalar values.

use std::collections::BTreeMap;
use std::path::Path;

use floorlab::catalog::CatalogFunction;
use floorlab::difference::DeltaPolynomial;
use floorlab::number::Real;
use floorlab::systems::{DynamicalSystem, Region};
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Weyl,
    Recurrence,
    Blocks,
    Pet,
    Khintchine,
    Haar,
}

impl ExperimentKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "weyl" => ExperimentKind::Weyl,
            "recurrence" => ExperimentKind::Recurrence,
            "blocks" => ExperimentKind::Blocks,
            "pet" => ExperimentKind::Pet,
            "khintchine" => ExperimentKind::Khintchine,
            "haar" => ExperimentKind::Haar,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Weyl => "weyl",
            ExperimentKind::Recurrence => "recurrence",
            ExperimentKind::Blocks => "blocks",
            ExperimentKind::Pet => "pet",
            ExperimentKind::Khintchine => "khintchine",
            ExperimentKind::Haar => "haar",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecurrenceMode {
    Single,
    Multiple,
    Poly,
}

/// Every key a configuration may contain.
pub const KEYS: &[&str] = &[
    "alpha",
    "delta",
    "epsilon",
    "families",
    "function",
    "horizon",
    "k",
    "kind",
    "l",
    "level",
    "mode",
    "n",
    "n0",
    "name",
    "output",
    "polynomials",
    "probes",
    "resolution",
    "run_length",
    "samples",
    "seed",
    "set",
    "spans",
    "system",
    "tau",
    "tolerance",
    "windows",
];

/// A validated configuration. Specs are kept as text for the artifact echo
/// and parsed on demand.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub name: String,
    pub function: String,
    pub system: String,
    pub set: String,
    pub level: Option<u32>,
    pub epsilon: f64,
    pub horizon: u64,
    /// Window span targets for Weyl runs.
    pub spans: Vec<f64>,
    /// Geometric schedule: first end point and number of windows.
    pub n0: u64,
    pub windows: usize,
    pub alpha: Vec<String>,
    pub tau: i64,
    pub seed: u64,
    pub output: Option<String>,
    pub tolerance: Option<f64>,
    pub families: usize,
    /// Block lengths `N`.
    pub n: Vec<u32>,
    pub delta: Option<f64>,
    pub mode: RecurrenceMode,
    pub k: u32,
    pub polynomials: Vec<String>,
    pub l: f64,
    pub probes: usize,
    pub run_length: Option<u64>,
    pub samples: u64,
    pub resolution: usize,
}

fn err(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

fn list(s: &str) -> Vec<String> {
    s.split(';').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
}

impl ExperimentConfig {
    /// Reads a file, choosing JSON when the first non-blank character is `{`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| err("config", format!("{}: {e}", path.display())))?;
        ExperimentConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let entries = if text.trim_start().starts_with('{') {
            parse_json(text)?
        } else {
            parse_key_values(text)?
        };
        ExperimentConfig::from_entries(&entries)
    }

    fn from_entries(e: &BTreeMap<String, String>) -> Result<Self, CliError> {
        if let Some(k) = e.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(err(k, "unknown key"));
        }
        let kind_s = e.get("kind").ok_or_else(|| err("kind", "missing"))?;
        let kind = ExperimentKind::parse(kind_s).ok_or_else(|| {
            err("kind", format!("`{kind_s}` is not one of blocks, haar, khintchine, pet, recurrence, weyl"))
        })?;
        let text = |key: &str, default: &str| e.get(key).cloned().unwrap_or_else(|| default.to_string());
        fn num<T: std::str::FromStr>(e: &BTreeMap<String, String>, key: &str, default: T) -> Result<T, CliError> {
            match e.get(key) {
                None => Ok(default),
                Some(v) => v.trim().parse().map_err(|_| err(key, format!("cannot parse `{v}`"))),
            }
        }
        fn opt<T: std::str::FromStr>(e: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
            e.get(key)
                .map(|v| v.trim().parse().map_err(|_| err(key, format!("cannot parse `{v}`"))))
                .transpose()
        }
        let mode = match e.get("mode").map(String::as_str) {
            None | Some("single") => RecurrenceMode::Single,
            Some("multiple") => RecurrenceMode::Multiple,
            Some("poly") => RecurrenceMode::Poly,
            Some(other) => return Err(err("mode", format!("`{other}` is not one of single, multiple, poly"))),
        };
        let spans = list(&text("spans", "1000;1500;2000"))
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| err("spans", format!("cannot parse `{s}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        let n = list(&text("n", "3;4;5"))
            .iter()
            .map(|s| s.parse::<u32>().map_err(|_| err("n", format!("cannot parse `{s}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        let cfg = ExperimentConfig {
            kind,
            name: text("name", kind.name()),
            function: text("function", "power:b=1,c=3/2"),
            system: text("system", "rotation:d=1,alpha=sqrt2"),
            set: text("set", "arc:0,0.3"),
            level: opt(e, "level")?,
            epsilon: num(e, "epsilon", 0.05)?,
            horizon: num(e, "horizon", 100_000)?,
            spans,
            n0: num(e, "n0", 1000)?,
            windows: num(e, "windows", 6)?,
            alpha: list(&text("alpha", "sqrt2-1;1/2;1/3")),
            tau: num(e, "tau", 1)?,
            seed: num(e, "seed", 0)?,
            output: e.get("output").cloned(),
            tolerance: opt(e, "tolerance")?,
            families: num(e, "families", 100)?,
            n,
            delta: opt(e, "delta")?,
            mode,
            k: num(e, "k", 2)?,
            polynomials: list(&text("polynomials", "")),
            l: num(e, "l", 5.0)?,
            probes: num(e, "probes", 200)?,
            run_length: opt(e, "run_length")?,
            samples: num(e, "samples", 20_000)?,
            resolution: num(e, "resolution", 100_000)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses every spec the experiment uses so that bad input is reported
    /// before any work starts.
    fn validate(&self) -> Result<(), CliError> {
        let uses_function = !matches!(self.kind, ExperimentKind::Haar);
        if uses_function {
            self.catalog_function()?;
        }
        if matches!(self.kind, ExperimentKind::Recurrence | ExperimentKind::Khintchine) {
            self.dynamical_system()?;
            self.region()?;
            self.delta_polynomials()?;
        }
        if matches!(self.kind, ExperimentKind::Weyl | ExperimentKind::Haar) {
            self.alpha_values()?;
            if self.alpha.is_empty() {
                return Err(err("alpha", "at least one value is required"));
            }
        }
        if self.horizon == 0 {
            return Err(err("horizon", "must be positive"));
        }
        if self.tau < 0 {
            return Err(err("tau", "must be non-negative"));
        }
        if self.kind == ExperimentKind::Recurrence && self.mode == RecurrenceMode::Poly && self.polynomials.is_empty() {
            return Err(err("polynomials", "poly mode needs at least one polynomial"));
        }
        Ok(())
    }

    pub fn catalog_function(&self) -> Result<CatalogFunction, CliError> {
        CatalogFunction::parse(&self.function).map_err(|e| err("function", e.to_string()))
    }

    pub fn dynamical_system(&self) -> Result<DynamicalSystem, CliError> {
        DynamicalSystem::parse(&self.system).map_err(|e| err("system", e.to_string()))
    }

    pub fn region(&self) -> Result<Region, CliError> {
        Region::parse(&self.set).map_err(|e| err("set", e.to_string()))
    }

    pub fn alpha_values(&self) -> Result<Vec<Real>, CliError> {
        self.alpha
            .iter()
            .map(|a| Real::parse(a).map_err(|e| err("alpha", e.to_string())))
            .collect()
    }

    /// Polynomials given as `;`-separated coefficient lists, e.g. `1;1,1`.
    pub fn delta_polynomials(&self) -> Result<Vec<DeltaPolynomial>, CliError> {
        self.polynomials
            .iter()
            .map(|p| DeltaPolynomial::parse(p).map_err(|e| err("polynomials", e.to_string())))
            .collect()
    }
}

fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err("config", format!("line {}: expected key = value", i + 1)))?;
        let k = k.trim().to_string();
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(err(&k, "given twice"));
        }
    }
    Ok(out)
}

fn parse_json(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| err("config", e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| err("config", "expected a JSON object"))?;
    obj.iter()
        .map(|(k, v)| {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                _ => return Err(err(k, "values must be strings, numbers or booleans")),
            };
            Ok((k.clone(), s))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values_and_json_agree() {
        let a = ExperimentConfig::parse("kind = weyl\nfunction = power:c=1.5\n# comment\nseed = 7\n").unwrap();
        let b = ExperimentConfig::parse(r#"{"kind": "weyl", "function": "power:c=1.5", "seed": 7}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seed, 7);
    }

    #[test]
    fn errors_name_the_field() {
        let e = ExperimentConfig::parse("kind = weyl\nfunction = power:c=2").unwrap_err();
        assert!(matches!(&e, CliError::Config { field, .. } if field == "function"));
        assert!(e.to_string().contains("integer"));
        let e = ExperimentConfig::parse("kind = recurrence\nsystem = torus").unwrap_err();
        assert!(matches!(&e, CliError::Config { field, .. } if field == "system"));
        let e = ExperimentConfig::parse("kind = weyl\ncolour = red").unwrap_err();
        assert!(matches!(&e, CliError::Config { field, .. } if field == "colour"));
        assert!(ExperimentConfig::parse("function = power:c=1.5").is_err());
    }
}
