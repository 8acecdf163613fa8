use super::Outcome;
use crate::config::{config_hash, Loaded};
use crate::error::CliError;
use crate::output::Artifacts;
use serde::Serialize;
use serde_json::json;
use std::io::Write;
use std::path::Path;

/// Shipped configs, run in order.
pub const CONFIGS: &[(&str, &str)] = &[
    ("ricci-flow", include_str!("../../configs/ricci-flow.toml")),
    ("wvol", include_str!("../../configs/wvol.toml")),
    ("beltrami-solve", include_str!("../../configs/beltrami-solve.toml")),
    ("schwarzian", include_str!("../../configs/schwarzian.toml")),
    ("hessian-lab", include_str!("../../configs/hessian-lab.toml")),
    ("corrected-vr", include_str!("../../configs/corrected-vr.toml")),
    ("cusp-decay", include_str!("../../configs/cusp-decay.toml")),
];

/// Data files the shipped configs refer to.
pub const DATA: &[(&str, &str)] = &[("genus2.mesh", include_str!("../../configs/genus2.mesh")), ("gluing.json", include_str!("../../configs/gluing.json"))];

#[derive(Serialize)]
struct Entry {
    command: &'static str,
    pass: bool,
    exit_code: u8,
    config_hash: Option<String>,
    summary: String,
}

pub fn run_selftest(out: &Path) -> Result<(Outcome, u8), CliError> {
    let inputs = out.join("inputs");
    std::fs::create_dir_all(&inputs).map_err(|e| CliError::Io(inputs.clone(), e))?;
    for (name, text) in DATA {
        let p = inputs.join(name);
        std::fs::write(&p, text).map_err(|e| CliError::Io(p.clone(), e))?;
    }
    let mut entries = Vec::new();
    for (command, text) in CONFIGS {
        let result = Loaded::from_str(text, inputs.clone()).and_then(|cfg| crate::dispatch(command, &cfg, &out.join(command)));
        let entry = match result {
            Ok(o) => Entry { command, pass: o.pass, exit_code: if o.pass { 0 } else { 1 }, config_hash: Some(o.config_hash), summary: o.summary },
            Err(e) => Entry { command, pass: false, exit_code: e.exit_code(), config_hash: None, summary: e.to_string() },
        };
        let _ = writeln!(std::io::stdout(), "  {command}: {} {}", if entry.pass { "PASS" } else { "FAIL" }, entry.summary);
        entries.push(entry);
    }
    let code = entries.iter().map(|e| e.exit_code).max().unwrap_or(0);
    let pass = code == 0;
    let hashes: Vec<(&str, &str)> = CONFIGS.iter().copied().chain(DATA.iter().copied()).collect();
    let hash = config_hash("selftest", 0, &hashes, &Default::default());
    let mut a = Artifacts::new(out, "selftest", hash.clone(), json!("per command, see each summary"))?;
    a.json("selftest.json", pass, &json!({ "runs": entries }))?;
    let passed = entries.iter().filter(|e| e.pass).count();
    Ok((Outcome { pass, summary: format!("{passed}/{} shipped configs pass", entries.len()), config_hash: hash, written: a.written }, code))
}
