use super::Outcome;
use crate::config::{config_hash, Direction, Loaded};
use crate::error::CliError;
use crate::output::Artifacts;
use num_complex::Complex64 as C64;
use rvlab::hessian::{disk_vector, vr_hessian_fd, HessianLab, LabOptions, TangentPair};
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Serialize)]
struct DirectionReport {
    coefficients: Vec<[f64; 3]>,
    target_plus: Vec<C64>,
    target_minus: Vec<C64>,
    /// Per-end relative errors, or the size relative to `|v|/4` for the diagonal.
    errors: Vec<f64>,
    hessian: f64,
    hessian_expected: f64,
    hessian_error: f64,
    forward_slopes: Vec<f64>,
    pass: bool,
    response: rvlab::hessian::LinearResponse,
}

fn tangent(terms: &[[f64; 3]], kind: Direction) -> Result<TangentPair, CliError> {
    let mut coeffs = Vec::new();
    for t in terms {
        if t[0] < 0.0 || t[0].fract() != 0.0 {
            return Err(CliError::Config(format!("direction degree {} is not a non-negative integer", t[0])));
        }
        let k = t[0] as usize;
        if coeffs.len() <= k {
            coeffs.resize(k + 1, C64::new(0.0, 0.0));
        }
        coeffs[k] += C64::new(t[1], t[2]);
    }
    let v = disk_vector(&coeffs);
    Ok(match kind {
        Direction::OneSided => TangentPair::one_sided(v)?,
        Direction::Antidiagonal => TangentPair::antidiagonal(v)?,
        Direction::Diagonal => TangentPair::diagonal(v)?,
    })
}

pub fn run_hessian_lab(cfg: &Loaded, out: &Path) -> Result<Outcome, CliError> {
    let c = &cfg.file.hessian_lab;
    let hash = config_hash("hessian-lab", cfg.file.seed, c, &BTreeMap::new());
    if c.directions.is_empty() {
        return Err(CliError::Config("no directions given".into()));
    }
    let lab = HessianLab::new(LabOptions {
        grid_size: c.grid_size,
        half_width: c.half_width,
        amplitudes: c.amplitudes.clone(),
        degree: c.degree,
        basis_degree: c.basis_size,
        noise_floor: c.noise_floor,
        solver: c.solver,
        theodorsen: c.theodorsen,
    })?;
    let pairs: Vec<TangentPair> = c.directions.iter().map(|d| tangent(d, c.direction)).collect::<Result<_, _>>()?;
    let responses = lab.responses(&pairs).into_iter().collect::<rvlab::Result<Vec<_>>>()?;

    let mut reports = Vec::new();
    for ((terms, pair), r) in c.directions.iter().zip(&pairs).zip(responses) {
        let n = r.plus.len();
        let target = pair.predicted_response(n);
        let scale = pair.norm_sqr() / 8.0;
        let hessian = vr_hessian_fd(pair, &r);
        let (errors, hessian_expected) = match c.direction {
            Direction::OneSided => (vec![r.end_error(true, &target.0)], scale / 2.0),
            Direction::Antidiagonal => (vec![r.end_error(true, &target.0), r.end_error(false, &target.1)], scale),
            Direction::Diagonal => (vec![r.relative_error(&target, Some(0.25 * pair.norm_sqr().sqrt()))], 0.0),
        };
        let hessian_error = (hessian - hessian_expected).abs() / scale;
        let pass = errors.iter().all(|e| *e < c.tol) && hessian_error < c.hessian_tol;
        reports.push(DirectionReport {
            coefficients: terms.clone(),
            target_plus: target.0,
            target_minus: target.1,
            errors,
            hessian,
            hessian_expected,
            hessian_error,
            forward_slopes: r.forward_slopes(),
            pass,
            response: r,
        });
    }
    let pass = reports.iter().all(|r| r.pass);
    let worst = reports.iter().flat_map(|r| r.errors.iter().copied()).fold(0.0, f64::max);
    let worst_h = reports.iter().map(|r| r.hessian_error).fold(0.0, f64::max);

    let tol = json!({ "response": c.tol, "hessian": c.hessian_tol, "noise_floor": c.noise_floor, "solver": c.solver.tol });
    let mut a = Artifacts::new(out, "hessian-lab", hash.clone(), tol)?;
    let summary = json!({
        "direction": c.direction,
        "basis_size": c.basis_size,
        "grid": lab.grid(),
        "directions": reports,
    });
    a.json("hessian-lab.json", pass, &summary)?;
    Ok(Outcome {
        pass,
        summary: format!("{} {:?} directions: worst response error {:.2}%, worst Hessian error {:.2}%", reports.len(), c.direction, 100.0 * worst, 100.0 * worst_h),
        config_hash: hash,
        written: a.written,
    })
}
