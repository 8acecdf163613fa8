use super::{parse_c64, Outcome};
use crate::config::{config_hash, Loaded, MapSpec, MuSpec};
use crate::error::CliError;
use crate::output::Artifacts;
use num_complex::Complex64 as C64;
use rvlab::beltrami::{reflect_across_circle, BeltramiField, BeltramiSolver, MetricField};
use rvlab::density::{ConformalDensity, HyperbolicDensity};
use rvlab::epstein::{assemble_infinity_tensors, ii0_from_uniformizing_map, schwarzian};
use rvlab::grid::{Grid, GridField};
use rvlab::moebius::MoebiusMap;
use rvlab::series::PowerSeries;
use rvlab::tensor::TensorSample;
use serde_json::json;
use std::collections::BTreeMap;
use std::sync::Arc;
use std::path::Path;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub fn run_beltrami_solve(cfg: &Loaded, out: &Path) -> Result<Outcome, CliError> {
    let c = &cfg.file.beltrami_solve;
    let hash = config_hash("beltrami-solve", cfg.file.seed, c, &BTreeMap::new());
    if c.grid_size < 8 || c.half_width <= 1.0 {
        return Err(CliError::Config("beltrami-solve needs grid_size >= 8 and half_width > 1".into()));
    }
    let grid = Grid::centered(c.grid_size, c.half_width);
    let (mu, exact): (BeltramiField, Option<Box<dyn Fn(C64) -> C64>>) = match &c.mu {
        MuSpec::Radial { k } => {
            let k = *k;
            if !(0.0..1.0).contains(&k) {
                return Err(CliError::Config(format!("radial k = {k} must lie in [0, 1)")));
            }
            let alpha = 2.0 * k / (1.0 - k);
            let mu = BeltramiField::from_fn(grid, |z| if z.norm_sqr() < 1.0 && z.norm() > 0.0 { k * z / z.conj() } else { zero() })?;
            (mu, Some(Box::new(move |z: C64| if z.norm_sqr() < 1.0 { z * z.norm().powf(alpha) } else { z })))
        }
        MuSpec::Constant { value } => {
            let m = parse_c64(*value);
            (BeltramiField::from_fn(grid, |z| if z.norm_sqr() < 1.0 { m } else { zero() })?, None)
        }
        MuSpec::Harmonic { coefficients } => {
            let phi = PowerSeries::new(coefficients.iter().map(|c| parse_c64(*c)).collect());
            let mu = reflect_across_circle(
                |z| {
                    let d = 1.0 - z.norm_sqr();
                    phi.eval(z).conj() * d * d / 8.0
                },
                grid,
            )?;
            (mu, None)
        }
        MuSpec::Poincare { group, seed } => {
            let q = seed.build(Arc::new(group.build()?))?;
            let mu = reflect_across_circle(
                |z| {
                    let d = 1.0 - z.norm_sqr();
                    q.eval(z).conj() * d * d / 8.0
                },
                grid,
            )?;
            (mu, None)
        }
    };
    let solver = BeltramiSolver::new(grid, c.solver)?;
    let f = solver.solve(&mu)?;
    let oracle_error = exact.map(|e| {
        let (mut num, mut den) = (0.0, 0.0);
        for (k, z) in grid.points().enumerate() {
            num += (f.f.data[k] - e(z)).norm_sqr();
            den += e(z).norm_sqr();
        }
        (num / den).sqrt()
    });
    let pass = f.residual_l2 < c.residual_tol && oracle_error.map_or(true, |e| e < c.oracle_tol);

    let tol = json!({ "residual": c.residual_tol, "oracle": c.oracle_tol, "solver": c.solver.tol });
    let mut a = Artifacts::new(out, "beltrami-solve", hash.clone(), tol)?;
    a.grid("mu", &grid, &[("mu", mu.field.data.clone())], json!({ "sup_norm": mu.sup_norm }))?;
    a.grid(
        "map",
        &grid,
        &[("f", f.f.data.clone()), ("f_z", f.f_z.clone()), ("f_zbar", f.f_zbar.clone())],
        json!({ "residual_l2": f.residual_l2, "iterations": f.iterations }),
    )?;
    let summary = json!({
        "grid": grid,
        "mu": c.mu,
        "sup_mu": f.sup_mu,
        "iterations": f.iterations,
        "residual_l2": f.residual_l2,
        "normalization": f.normalization,
        "oracle_relative_l2_error": oracle_error,
    });
    a.json("beltrami-solve.json", pass, &summary)?;
    let oracle = oracle_error.map_or(String::new(), |e| format!(", closed-form error {e:.2e}"));
    Ok(Outcome {
        pass,
        summary: format!("{} iterations, residual {:.1e}{oracle}", f.iterations, f.residual_l2),
        config_hash: hash,
        written: a.written,
    })
}

fn split(s: &[TensorSample]) -> (Vec<C64>, Vec<C64>) {
    (s.iter().map(|t| t.q).collect(), s.iter().map(|t| C64::new(t.e, 0.0)).collect())
}

pub fn run_schwarzian(cfg: &Loaded, out: &Path) -> Result<Outcome, CliError> {
    let c = &cfg.file.schwarzian;
    let hash = config_hash("schwarzian", cfg.file.seed, c, &BTreeMap::new());
    if c.grid_size < 8 || c.half_width <= 0.0 || c.half_width >= 1.0 {
        return Err(CliError::Config("schwarzian needs grid_size >= 8 and 0 < half_width < 1".into()));
    }
    let grid = Grid::centered(c.grid_size, c.half_width);
    let values: Vec<C64> = match &c.map {
        MapSpec::Moebius { a, b, c: cc, d } => {
            let m = MoebiusMap::new(parse_c64(*a), parse_c64(*b), parse_c64(*cc), parse_c64(*d))?;
            grid.points().map(|z| m.apply_finite(z).map(|w| w.0)).collect::<rvlab::Result<_>>()?
        }
        MapSpec::Polynomial { coefficients } => {
            let p = PowerSeries::new(coefficients.iter().map(|c| parse_c64(*c)).collect());
            grid.points().map(|z| p.eval(z)).collect()
        }
    };
    let f = GridField { grid, data: values };
    let s = schwarzian(&f)?;
    let ii0 = ii0_from_uniformizing_map(&f)?;
    let rho = HyperbolicDensity::disk();
    let i = MetricField::try_from_fn(grid, |_| true, |z| Ok(TensorSample::conformal(rho.eval(z)?)))?;
    let t = assemble_infinity_tensors(&i, &ii0)?;

    let sup = ii0.sup_norm();
    let identity = t.identity_residual();
    let moebius = matches!(c.map, MapSpec::Moebius { .. });
    let pass = identity < c.identity_tol && (!moebius || sup < c.tol);

    let tol = json!({ "ii0_sup": c.tol, "identities": c.identity_tol });
    let mut a = Artifacts::new(out, "schwarzian", hash.clone(), tol)?;
    let mask = |v: Vec<C64>| -> Vec<C64> { v.into_iter().zip(&t.support).map(|(x, s)| if *s { x } else { zero() }).collect() };
    let (i_q, i_e) = split(&t.i);
    let (ii_q, ii_e) = split(&t.ii);
    let (iii_q, iii_e) = split(&t.iii);
    let support_count = t.support.iter().filter(|s| **s).count();
    a.grid("schwarzian", &grid, &[("S", s.samples.clone())], json!({ "stencil_order": s.stencil_order, "truncation_estimate": s.truncation_estimate }))?;
    a.grid(
        "tensors",
        &grid,
        &[
            ("I_dz2", mask(i_q)),
            ("I_dzdzbar", mask(i_e)),
            ("II_dz2", mask(ii_q)),
            ("II_dzdzbar", mask(ii_e)),
            ("III_dz2", mask(iii_q)),
            ("III_dzdzbar", mask(iii_e)),
            ("II0_dz2", mask(t.ii0.iter().map(|x| x.q).collect())),
            ("H", mask(t.h.iter().map(|h| C64::new(*h, 0.0)).collect())),
        ],
        json!({ "supported_nodes": support_count, "identity_residual": identity }),
    )?;
    let hs: Vec<f64> = t.h.iter().zip(&t.support).filter(|(_, s)| **s).map(|(h, _)| *h).collect();
    let summary = json!({
        "grid": grid,
        "map": c.map,
        "ii0_sup": sup,
        "truncation_estimate": s.truncation_estimate,
        "identity_residual": identity,
        "mean_curvature_range": [hs.iter().cloned().fold(f64::INFINITY, f64::min), hs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)],
        "supported_nodes": support_count,
    });
    a.json("schwarzian.json", pass, &summary)?;
    Ok(Outcome {
        pass,
        summary: format!("sup|II0| {sup:.2e}, tensor identity residual {identity:.1e}"),
        config_hash: hash,
        written: a.written,
    })
}
