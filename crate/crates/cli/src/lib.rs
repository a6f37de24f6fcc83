//! Batch experiment runner: reads a flat config, runs one experiment and
//! writes a JSON summary plus a CSV detail file.

pub mod config;
pub mod run;

use serde::Serialize;

pub use config::{ExperimentConfig, ExperimentKind, RecurrenceMode};
pub use run::{run, run_experiment, Artifact, RunOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Run(#[from] floorlab::Error),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// 2 for configuration problems, 1 for everything that went wrong while
    /// running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Serialize)]
struct ListingEntry {
    name: String,
    params: Vec<String>,
    constraints: String,
}

fn listing() -> (Vec<ListingEntry>, Vec<ListingEntry>, Vec<ListingEntry>) {
    let families = floorlab::catalog::registry()
        .into_iter()
        .map(|e| ListingEntry {
            name: e.name.to_string(),
            params: e.params.iter().map(|p| p.to_string()).collect(),
            constraints: e.constraints.to_string(),
        })
        .collect();
    let systems = floorlab::systems::system_registry()
        .into_iter()
        .map(|(name, desc)| ListingEntry {
            name: name.to_string(),
            params: Vec::new(),
            constraints: desc.to_string(),
        })
        .collect();
    let constants = floorlab::number::NAMED_CONSTANTS
        .iter()
        .map(|(name, value)| ListingEntry {
            name: name.to_string(),
            params: Vec::new(),
            constraints: format!("{value:.17e}"),
        })
        .collect();
    (families, systems, constants)
}

/// Function families, systems and named constants, each sorted by name.
/// With `json`, an array of `{name, params, constraints}` for the families
/// followed by objects for systems and constants tagged by `section`.
pub fn list_catalog(json: bool) -> String {
    let (families, systems, constants) = listing();
    if json {
        let mut out: Vec<serde_json::Value> = Vec::new();
        for (section, entries) in [("family", families), ("system", systems), ("constant", constants)] {
            for e in entries {
                let mut v = serde_json::to_value(&e).expect("listing serializes");
                v["section"] = serde_json::Value::from(section);
                out.push(v);
            }
        }
        return serde_json::to_string_pretty(&out).expect("listing serializes") + "\n";
    }
    let mut s = String::from("functions:\n");
    for e in &families {
        s += &format!("  {:<12} {:<14} {}\n", e.name, e.params.join(","), e.constraints);
    }
    s += "systems:\n";
    for e in &systems {
        s += &format!("  {:<12} {}\n", e.name, e.constraints);
    }
    s += "constants:\n";
    for e in &constants {
        s += &format!("  {:<12} {}\n", e.name, e.constraints);
    }
    s
}
