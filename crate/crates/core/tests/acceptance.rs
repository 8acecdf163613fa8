//! One line per acceptance criterion, with pinned tolerances. Run with `--nocapture` to see them.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rvlab::beltrami::{metric_variation, BeltramiField, BeltramiSolver, MetricField, SolverOptions, VariationOptions};
use rvlab::corrected::{corrected_hessian, gluing_identity_check, GluingDescription, Interface, Piece, PieceBoundary, SkinningOperator};
use rvlab::density::HyperbolicDensity;
use rvlab::epstein::ii0_from_uniformizing_map;
use rvlab::grid::{Grid, GridField};
use rvlab::hessian::{disk_vector, vr_first_variation, vr_hessian_fd, HessianLab, LabOptions, TangentPair};
use rvlab::moebius::MoebiusMap;
use rvlab::tensor::TensorSample;
use rvlab::wvol::{
    bolza_mesh, cusp_decay_report, random_perturbation, reference_profiles, ricci_flow, w_along_path, w_conformal_change, DecayClass, DiscreteMetricSurface,
    FlowOptions, FlowTrace,
};
use rvlab::C64;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(n: usize, started: Instant, o: &Outcome) {
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict} | {} | {:.1}s", o.detail, started.elapsed().as_secs_f64());
}

fn monomial(k: usize, c: C64) -> rvlab::fuchsian::RqVector {
    let mut s = vec![C64::new(0.0, 0.0); k + 1];
    s[k] = c;
    disk_vector(&s)
}

fn criterion_1() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let grid = Grid::centered(64, 0.5);
    let mut worst_ii0 = 0.0f64;
    let mut worst_dv = 0.0f64;
    let basis: Vec<_> = (0..5).flat_map(|k| [monomial(k, C64::new(1.0, 0.0)), monomial(k, C64::new(0.0, 1.0))]).collect();
    for _ in 0..5 {
        // Pole at distance at least 2 from the origin.
        let pole = C64::from_polar(rng.gen_range(2.0..4.0), rng.gen_range(0.0..2.0 * PI));
        let (a, b) = (C64::new(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0)), C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let m = MoebiusMap::new(a, b, C64::new(1.0, 0.0), -pole).expect("non-degenerate");
        let f = GridField::from_fn(grid, |z| m.apply_finite(z).expect("pole is off the grid").0);
        let ii0 = ii0_from_uniformizing_map(&f).expect("no critical points");
        worst_ii0 = worst_ii0.max(ii0.sup_norm());
        for v in &basis {
            worst_dv = worst_dv.max(vr_first_variation(v, &ii0).expect("same grid").abs());
        }
    }
    // Control: a non-Möbius map has a visible first variation.
    let f = GridField::from_fn(grid, |z| z + 0.1 * z * z * z);
    let ii0 = ii0_from_uniformizing_map(&f).expect("no critical points");
    let control = basis.iter().map(|v| vr_first_variation(v, &ii0).unwrap().abs()).fold(0.0, f64::max);
    Outcome {
        pass: worst_ii0 < TOL && worst_dv < TOL && control > 1e-4,
        detail: format!("sup|II0| = {worst_ii0:.2e}, max|DV_R| over 10 vectors = {worst_dv:.2e} (tol {TOL:.0e}); control map max|DV_R| = {control:.2e}"),
    }
}

fn criterion_2() -> Outcome {
    const TOL: f64 = 1e-3;
    const ID_TOL: f64 = 1e-12;
    let grid = Grid::centered(512, 1.25);
    let solver = BeltramiSolver::new(grid, SolverOptions::default()).unwrap();
    let mu = BeltramiField::from_fn(grid, |z| if z.norm_sqr() < 1.0 { 0.5 * z / z.conj() } else { C64::new(0.0, 0.0) }).unwrap();
    let f = solver.solve(&mu).unwrap();
    let exact = |z: C64| if z.norm_sqr() < 1.0 { z * z.norm_sqr() } else { z };
    let (mut num, mut den) = (0.0, 0.0);
    for (k, z) in grid.points().enumerate() {
        num += (f.f.data[k] - exact(z)).norm_sqr();
        den += exact(z).norm_sqr();
    }
    let rel = (num / den).sqrt();
    let id = solver.solve(&BeltramiField::zero(grid)).unwrap();
    let id_err = grid.points().enumerate().map(|(k, z)| (id.f.data[k] - z).norm()).fold(0.0, f64::max);
    Outcome {
        pass: rel < TOL && id_err < ID_TOL,
        detail: format!("z|z|^2 relative L2 error {rel:.3e} (tol {TOL:.0e}) after {} iterations; identity error {id_err:.1e} (tol {ID_TOL:.0e})", f.iterations),
    }
}

fn criterion_3() -> Outcome {
    const TOL: f64 = 1e-3;
    const ORTH_TOL: f64 = 1e-10;
    let grid = Grid::centered(256, 1.25);
    let solver = BeltramiSolver::new(grid, SolverOptions::default()).unwrap();
    let rho = HyperbolicDensity::disk();
    let support = |z: C64| z.norm() < 0.9;
    let basis: Vec<_> = [(2, C64::new(1.0, 0.0)), (2, C64::new(0.0, 1.0)), (3, C64::new(1.0, 0.0)), (4, C64::new(0.6, 0.8)), (5, C64::new(1.0, 0.0))]
        .iter()
        .map(|&(k, c)| monomial(k, c))
        .collect();
    let probe = MetricField::from_fn(grid, support, |_| TensorSample::ZERO);
    let fields: Vec<MetricField> = basis.iter().map(|w| probe.sample_like(w)).collect();
    let norms: Vec<f64> = fields.iter().map(|f| f.norm(&rho).unwrap()).collect();
    let (mut worst, mut worst_orth) = (0.0f64, 0.0f64);
    for v in &basis {
        let dv = metric_variation(v, &solver, &VariationOptions::default(), support).unwrap();
        let vf = probe.sample_like(v);
        let vn = vf.norm(&rho).unwrap();
        for (w, wn) in fields.iter().zip(&norms) {
            let lhs = dv.field.inner(w, &rho).unwrap();
            let rhs = vf.inner(w, &rho).unwrap();
            worst = worst.max((lhs - rhs).abs() / (vn * wn));
            worst_orth = worst_orth.max(dv.e_field.inner(w, &rho).unwrap().abs() / (dv.e_field.norm(&rho).unwrap().max(1e-300) * wn));
        }
    }
    Outcome {
        pass: worst < TOL && worst_orth < ORTH_TOL,
        detail: format!("max |<DI(v),w> - <v,w>|/(|v||w|) = {worst:.2e} (tol {TOL:.0e}); trace remainder against RQ {worst_orth:.1e} (tol {ORTH_TOL:.0e})"),
    }
}

fn flow_trace() -> FlowTrace {
    let mesh = Arc::new(bolza_mesh(8).unwrap());
    let phi = random_perturbation(&mesh, 0.3, 0, 42);
    let s = DiscreteMetricSurface::new(mesh, phi).unwrap();
    ricci_flow(&s, &FlowOptions::default()).unwrap()
}

fn criterion_4(tr: &FlowTrace) -> Outcome {
    const SLACK: f64 = 1e-10;
    const FINAL: f64 = 1e-4;
    const RATE: f64 = 0.05;
    let dec = tr.worst_decrease();
    let fin = tr.final_deviation();
    let rate = tr.worst_rate_mismatch();
    Outcome {
        pass: dec <= SLACK && fin < FINAL && rate < RATE,
        detail: format!(
            "510 vertices, {} steps: worst W decrease {dec:.1e} (slack {SLACK:.0e}), final max|K-Kbar| {fin:.2e} (tol {FINAL:.0e}), worst dW rate mismatch {:.2}% (tol 5%)",
            tr.accepted_steps(),
            100.0 * rate
        ),
    }
}

fn criterion_5(tr: &FlowTrace) -> Outcome {
    const TOL: f64 = 1e-9;
    let gb = tr.worst_gauss_bonnet();
    Outcome { pass: gb < TOL, detail: format!("max |sum K da - 2 pi chi| over {} states = {gb:.2e} (tol {TOL:.0e})", tr.rows.len()) }
}

fn criterion_6() -> Outcome {
    const TOL: f64 = 1e-8;
    let mesh = Arc::new(bolza_mesh(8).unwrap());
    let s = DiscreteMetricSurface::new(mesh.clone(), random_perturbation(&mesh, 0.2, 3, 11)).unwrap();
    let u = random_perturbation(&mesh, 0.15, 2, 12);
    let bend = random_perturbation(&mesh, 0.1, 2, 13);
    let end: Vec<f64> = s.phi.iter().zip(&u).map(|(p, u)| p + u).collect();
    let mid: Vec<f64> = s.phi.iter().zip(&u).zip(&bend).map(|((p, u), b)| p + 0.5 * u + b).collect();
    let straight = w_conformal_change(&s, &u, 6).unwrap().value;
    let bent = w_along_path(&s, &[mid, end], 6).unwrap();
    let c = 0.4;
    let chi = s.euler_characteristic() as f64;
    let shift = w_conformal_change(&s, &vec![c; mesh.vertex_count], 6).unwrap().value;
    let shift_err = (shift + PI * chi * c / 2.0).abs();
    Outcome {
        pass: (straight - bent).abs() < TOL && shift_err < TOL,
        detail: format!("path difference {:.1e}, constant shift error {shift_err:.1e} (tol {TOL:.0e})", (straight - bent).abs()),
    }
}

struct HessianData {
    directions: Vec<(usize, C64)>,
    one: Vec<rvlab::hessian::LinearResponse>,
    anti: Vec<rvlab::hessian::LinearResponse>,
    diag: Vec<rvlab::hessian::LinearResponse>,
    pairs: Vec<(TangentPair, TangentPair, TangentPair)>,
}

fn hessian_data() -> HessianData {
    let lab = HessianLab::new(LabOptions::default()).unwrap();
    let directions = vec![(2, C64::new(1.0, 0.0)), (3, C64::new(0.0, 1.0)), (4, C64::new(0.6, 0.8))];
    let mut data = HessianData { directions: directions.clone(), one: vec![], anti: vec![], diag: vec![], pairs: vec![] };
    for &(k, c) in &directions {
        let v = monomial(k, c);
        let p = (TangentPair::one_sided(v.clone()).unwrap(), TangentPair::antidiagonal(v.clone()).unwrap(), TangentPair::diagonal(v).unwrap());
        data.one.push(lab.dii0_linear_response(&p.0).unwrap());
        data.anti.push(lab.dii0_linear_response(&p.1).unwrap());
        data.diag.push(lab.dii0_linear_response(&p.2).unwrap());
        data.pairs.push(p);
    }
    data
}

fn criterion_7(h: &HessianData) -> Outcome {
    const TOL: f64 = 0.05;
    let mut worst_one = 0.0f64;
    let mut worst_anti = 0.0f64;
    let mut worst_diag = 0.0f64;
    for (i, (one, anti, diag)) in h.pairs.iter().enumerate() {
        let n = h.one[i].plus.len();
        let target = one.predicted_response(n);
        worst_one = worst_one.max(h.one[i].end_error(true, &target.0));
        let target = anti.predicted_response(n);
        worst_anti = worst_anti.max(h.anti[i].end_error(true, &target.0)).max(h.anti[i].end_error(false, &target.1));
        let scale = 0.25 * diag.norm_sqr().sqrt();
        worst_diag = worst_diag.max(h.diag[i].relative_error(&diag.predicted_response(n), Some(scale)));
    }
    Outcome {
        pass: worst_one < TOL && worst_anti < TOL && worst_diag < TOL,
        detail: format!(
            "{} directions: (v,0) vs -v/4 {:.2}%, (v,-v) vs -v/2 per end {:.2}%, (v,v) relative to |v|/4 {:.2}% (tol 5%)",
            h.directions.len(),
            100.0 * worst_one,
            100.0 * worst_anti,
            100.0 * worst_diag
        ),
    }
}

fn criterion_8(h: &HessianData) -> Outcome {
    const TOL: f64 = 0.10;
    let mut worst_anti = 0.0f64;
    let mut worst_diag = 0.0f64;
    for (i, (_, anti, diag)) in h.pairs.iter().enumerate() {
        let expected = anti.norm_sqr() / 8.0;
        let measured = vr_hessian_fd(anti, &h.anti[i]);
        worst_anti = worst_anti.max((measured - expected).abs() / expected);
        let d = vr_hessian_fd(diag, &h.diag[i]).abs().max(vr_hessian_fd(anti, &h.diag[i]).abs());
        worst_diag = worst_diag.max(d / expected);
    }
    Outcome {
        pass: worst_anti < TOL && worst_diag < TOL,
        detail: format!("anti-diagonal Hess vs |v|^2/8: {:.2}%, diagonal column relative to that scale: {:.2e} (tol 10%)", 100.0 * worst_anti, worst_diag),
    }
}

fn criterion_9() -> Outcome {
    let b = |c: &str, s: &str| PieceBoundary { surface: "S".into(), conformal: c.into(), skinning_image: s.into() };
    let gluing = |vol: f64| GluingDescription {
        pieces: vec![
            Piece { id: "M1".into(), vr: 5.0, boundary: vec![b("c1", "c2")] },
            Piece { id: "M2".into(), vr: 7.0, boundary: vec![b("c2", "c1")] },
        ],
        interfaces: vec![Interface { surface: "S".into(), pieces: vec!["M1".into(), "M2".into()], vr_product: 3.0 }],
        closed_volume: vol,
    };
    let good = gluing_identity_check(&gluing(9.0), 1e-12).unwrap();
    let bad = gluing_identity_check(&gluing(10.0), 1e-12).unwrap();
    let gluing_ok = good.pass && !bad.pass && good.residual.abs() < 1e-12 && (bad.residual - 1.0).abs() < 1e-12;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 8;
    let mut positives = 0;
    let mut planted_ok = 0;
    for _ in 0..20 {
        let q = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
        let mut ev: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.999..0.999)).collect();
        let op = SkinningOperator::new(&q * DMatrix::from_diagonal(&DVector::from_vec(ev.clone())) * q.transpose()).unwrap();
        for _ in 0..1000 {
            let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            if corrected_hessian(&op, &v).unwrap().symmetrized > 0.0 {
                positives += 1;
            }
        }
        ev[0] = 1.2;
        let op = SkinningOperator::new(&q * DMatrix::from_diagonal(&DVector::from_vec(ev)) * q.transpose()).unwrap();
        if corrected_hessian(&op, &q.column(0).into_owned()).unwrap().symmetrized <= 0.0 {
            planted_ok += 1;
        }
    }
    Outcome {
        pass: gluing_ok && positives == 20_000 && planted_ok == 20,
        detail: format!(
            "gluing residuals {:.1e} (PASS) and {:.12} (FAIL); corrected Hessian positive {positives}/20000; planted eigenvalue 1.2 non-positive {planted_ok}/20",
            good.residual, bad.residual
        ),
    }
}

fn criterion_10() -> Outcome {
    const RATE_TOL: f64 = 0.10;
    let profiles = reference_profiles(0.25).unwrap();
    let r: Vec<_> = profiles.iter().map(|(_, p)| cusp_decay_report(p).unwrap()).collect();
    let rate1 = r[1].exponential.as_ref().map_or(f64::NAN, |f| f.rate);
    let rate2 = r[2].exponential.as_ref().map_or(f64::NAN, |f| f.rate);
    let pass = r[0].class == DecayClass::Vanishing
        && r[0].pass
        && r[1].class == DecayClass::Exponential
        && (rate1 - 1.0).abs() < RATE_TOL
        && r[1].pass
        && r[2].class == DecayClass::Exponential
        && (rate2 - 1.0).abs() < RATE_TOL
        && r[2].w_term_decays
        && r[2].pass;
    Outcome {
        pass,
        detail: format!(
            "constant: {:?}; R+v: {:?} rate {rate1:.4}; R+v+e^(-1/v)sin(4 pi w): {:?} rate {rate2:.4}, w-term decays {} (rate tol 10%)",
            r[0].class, r[1].class, r[2].class, r[2].w_term_decays
        ),
    }
}

#[test]
fn acceptance_criteria() {
    let mut all = true;
    let mut run = |n: usize, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        report(n, t, &o);
        all &= o.pass;
    };
    run(1, &mut criterion_1);
    run(2, &mut criterion_2);
    run(3, &mut criterion_3);
    let t = Instant::now();
    let tr = flow_trace();
    println!("flow finished in {:.1}s", t.elapsed().as_secs_f64());
    run(4, &mut || criterion_4(&tr));
    run(5, &mut || criterion_5(&tr));
    run(6, &mut criterion_6);
    let t = Instant::now();
    let h = hessian_data();
    println!("hessian responses finished in {:.1}s", t.elapsed().as_secs_f64());
    run(7, &mut || criterion_7(&h));
    run(8, &mut || criterion_8(&h));
    run(9, &mut criterion_9);
    run(10, &mut criterion_10);
    assert!(all, "at least one acceptance criterion failed");
}
