use super::Outcome;
use crate::config::{config_hash, Loaded};
use crate::error::CliError;
use crate::output::Artifacts;
use rvlab::wvol::{cusp_decay_report, reference_profiles, CuspProfile, CUSP_FLOOR, MIN_R2};
use serde::Deserialize;
use serde_json::json;
use std::path::Path;

#[derive(Deserialize)]
struct Sample {
    v: f64,
    w: f64,
    psi: f64,
}

/// Reads `v,w,psi` rows covering a full `v × w` grid.
fn profile_from_csv(bytes: &[u8], r_inf: f64) -> Result<CuspProfile, CliError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes);
    let rows: Vec<Sample> = rdr.deserialize().collect::<Result<_, _>>().map_err(|e| CliError::Config(format!("cusp profile: {e}")))?;
    let mut v: Vec<f64> = rows.iter().map(|r| r.v).collect();
    let mut w: Vec<f64> = rows.iter().map(|r| r.w).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v.dedup();
    w.sort_by(f64::total_cmp);
    w.dedup();
    if v.len() * w.len() != rows.len() || v.iter().any(|x| *x <= 0.0) {
        return Err(CliError::Config("cusp profile must sample a full grid of positive v values".into()));
    }
    let mut psi = vec![vec![f64::NAN; w.len()]; v.len()];
    for r in &rows {
        let i = v.iter().position(|x| *x == r.v).unwrap();
        let j = w.iter().position(|x| *x == r.w).unwrap();
        psi[i][j] = r.psi;
    }
    if psi.iter().flatten().any(|x| x.is_nan()) {
        return Err(CliError::Config("cusp profile has repeated samples".into()));
    }
    Ok(CuspProfile { v, w, psi, r_inf })
}

pub fn run_cusp_decay(cfg: &Loaded, out: &Path) -> Result<Outcome, CliError> {
    let c = &cfg.file.cusp_decay;
    let inputs = cfg.inputs(&[("profile", c.profile.as_ref())])?;
    let hash = config_hash("cusp-decay", cfg.file.seed, c, &inputs);
    let (name, profile) = match inputs.get("profile") {
        Some((path, bytes)) => (path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()), profile_from_csv(bytes, c.r_inf)?),
        None => reference_profiles(c.r_inf)?
            .into_iter()
            .find(|(n, _)| *n == c.family)
            .map(|(n, p)| (n.to_string(), p))
            .ok_or_else(|| CliError::Config(format!("unknown cusp family '{}'", c.family)))?,
    };
    let report = cusp_decay_report(&profile)?;
    let mut a = Artifacts::new(out, "cusp-decay", hash.clone(), json!({ "fit_r_squared": MIN_R2, "vanishing": CUSP_FLOOR }))?;
    let summary = json!({
        "profile": name,
        "r_inf": c.r_inf,
        "v_range": [profile.v.first(), profile.v.last()],
        "w_samples": profile.w.len(),
        "report": report,
    });
    a.json("cusp-decay.json", report.pass, &summary)?;
    let rate = report.exponential.as_ref().map_or(f64::NAN, |f| f.rate);
    Ok(Outcome {
        pass: report.pass,
        summary: format!("{name}: {:?}, exponential rate {rate:.4}, w-term decays {}", report.class, report.w_term_decays),
        config_hash: hash,
        written: a.written,
    })
}
