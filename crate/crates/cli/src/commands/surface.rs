use super::Outcome;
use crate::config::{config_hash, Loaded, SurfaceConfig};
use crate::error::CliError;
use crate::output::Artifacts;
use rvlab::wvol::{
    bolza_mesh, nonuniqueness_witness, random_perturbation, ricci_flow, w_along_path, w_conformal_change, w_first_variation, DiscreteMetricSurface, Mesh,
    Termination,
};
use serde::Serialize;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::sync::Arc;

fn build_surface(s: &SurfaceConfig, seed: u64, mesh_file: Option<&(PathBuf, Vec<u8>)>) -> Result<DiscreteMetricSurface, CliError> {
    let (mesh, phi) = match mesh_file {
        Some((path, bytes)) => {
            let text = std::str::from_utf8(bytes).map_err(|_| CliError::Config(format!("{} is not UTF-8", path.display())))?;
            Mesh::from_text(text)?
        }
        None => {
            if s.subdivision == 0 {
                return Err(CliError::Config("subdivision must be positive".into()));
            }
            let m = bolza_mesh(s.subdivision)?;
            let n = m.vertex_count;
            (m, vec![0.0; n])
        }
    };
    let noise = random_perturbation(&mesh, s.perturbation, s.smoothing, seed);
    let phi = phi.iter().zip(&noise).map(|(a, b)| a + b).collect();
    Ok(DiscreteMetricSurface::new(Arc::new(mesh), phi)?)
}

#[derive(Serialize)]
struct TraceRow {
    step: usize,
    t: f64,
    #[serde(rename = "W")]
    w: f64,
    #[serde(rename = "max_abs_K_minus_Kbar")]
    max_dev: f64,
    area: f64,
}

pub fn run_ricci_flow(cfg: &Loaded, out: &Path) -> Result<Outcome, CliError> {
    let c = &cfg.file.ricci_flow;
    let inputs = cfg.inputs(&[("mesh", c.surface.mesh.as_ref())])?;
    let hash = config_hash("ricci-flow", cfg.file.seed, c, &inputs);
    let surface = build_surface(&c.surface, cfg.file.seed, inputs.get("mesh"))?;
    let trace = ricci_flow(&surface, &c.flow)?;

    let tol = json!({ "curvature": c.flow.tol, "w_slack": c.flow.w_slack, "gauss_bonnet": c.gauss_bonnet_tol, "rate": c.rate_tol });
    let mut a = Artifacts::new(out, "ricci-flow", hash.clone(), tol)?;
    let rows: Vec<TraceRow> = trace.rows.iter().map(|r| TraceRow { step: r.step, t: r.t, w: r.w, max_dev: r.max_dev, area: r.area }).collect();
    a.csv("trace.csv", &rows)?;

    let converged = trace.termination == Termination::Converged;
    let (dec, gb, rate) = (trace.worst_decrease(), trace.worst_gauss_bonnet(), trace.worst_rate_mismatch());
    let pass = converged && dec <= c.flow.w_slack && gb < c.gauss_bonnet_tol && rate < c.rate_tol;
    let last = trace.rows.last().expect("trace has the initial row");
    let summary = json!({
        "vertices": surface.vertex_count(),
        "faces": surface.mesh.faces.len(),
        "genus": surface.mesh.genus,
        "termination": trace.termination,
        "accepted_steps": trace.accepted_steps(),
        "rejected_steps": trace.rejected_steps,
        "final_t": last.t,
        "final_w": last.w,
        "final_deviation": trace.final_deviation(),
        "final_area": last.area,
        "worst_w_decrease": dec,
        "worst_rate_mismatch": rate,
        "worst_gauss_bonnet_error": gb,
        "flow": c.flow,
    });
    a.json("ricci-flow.json", pass, &summary)?;
    a.mesh_text("final.mesh", &surface.mesh.to_text(&trace.final_phi))?;
    Ok(Outcome {
        pass,
        summary: format!(
            "{} steps, final max|K-Kbar| {:.2e}, worst W decrease {dec:.1e}, rate mismatch {:.2}%, Gauss-Bonnet {gb:.1e}",
            trace.accepted_steps(),
            trace.final_deviation(),
            100.0 * rate
        ),
        config_hash: hash,
        written: a.written,
    })
}

pub fn run_wvol(cfg: &Loaded, out: &Path) -> Result<Outcome, CliError> {
    let c = &cfg.file.wvol;
    let seed = cfg.file.seed;
    let inputs = cfg.inputs(&[("mesh", c.surface.mesh.as_ref())])?;
    let hash = config_hash("wvol", seed, c, &inputs);
    let s = build_surface(&c.surface, seed, inputs.get("mesh"))?;
    let mesh = s.mesh.clone();
    let u = random_perturbation(&mesh, c.change, c.smoothing, seed.wrapping_add(1));
    let bend = random_perturbation(&mesh, c.bend, c.smoothing, seed.wrapping_add(2));
    let end: Vec<f64> = s.phi.iter().zip(&u).map(|(p, u)| p + u).collect();
    let mid: Vec<f64> = s.phi.iter().zip(&u).zip(&bend).map(|((p, u), b)| p + 0.5 * u + b).collect();

    let straight = w_conformal_change(&s, &u, c.quadrature_order)?;
    let bent = w_along_path(&s, &[mid, end], c.quadrature_order)?;
    let path_diff = (straight.value - bent).abs();

    let chi = s.euler_characteristic() as f64;
    let shift = w_conformal_change(&s, &vec![c.shift; mesh.vertex_count], c.quadrature_order)?.value;
    let shift_expected = -std::f64::consts::PI * chi * c.shift / 2.0;
    let shift_err = (shift - shift_expected).abs();

    let g = s.geometry()?;
    let dw = w_first_variation(&g, &u);
    let eps = c.fd_step;
    let scaled = |k: f64| u.iter().map(|x| k * x).collect::<Vec<f64>>();
    let fd = (w_conformal_change(&s, &scaled(eps), c.quadrature_order)?.value - w_conformal_change(&s, &scaled(-eps), c.quadrature_order)?.value) / (2.0 * eps);
    let fd_err = (fd - dw).abs() / dw.abs().max(1e-300);
    let witness = nonuniqueness_witness(&g, 1e-12).map(|w| w_first_variation(&g, &w));

    let pass = path_diff < c.tol && shift_err < c.tol && fd_err < c.fd_tol;
    let tol = json!({ "path": c.tol, "shift": c.tol, "first_variation": c.fd_tol });
    let mut a = Artifacts::new(out, "wvol", hash.clone(), tol)?;
    let summary = json!({
        "vertices": mesh.vertex_count,
        "euler_characteristic": s.euler_characteristic(),
        "w_change_straight": straight.value,
        "w_change_error_estimate": straight.error_estimate,
        "richardson": straight.table,
        "w_change_bent": bent,
        "path_difference": path_diff,
        "shift": c.shift,
        "w_change_shift": shift,
        "w_change_shift_expected": shift_expected,
        "shift_error": shift_err,
        "first_variation": dw,
        "central_difference": fd,
        "first_variation_relative_error": fd_err,
        "witness_first_variation": witness,
    });
    a.json("wvol.json", pass, &summary)?;
    Ok(Outcome {
        pass,
        summary: format!("path difference {path_diff:.1e}, shift error {shift_err:.1e}, first variation error {fd_err:.1e}"),
        config_hash: hash,
        written: a.written,
    })
}
