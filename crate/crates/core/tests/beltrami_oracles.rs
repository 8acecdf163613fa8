use num_complex::Complex64 as C64;
use rvlab::beltrami::{BeltramiField, BeltramiSolver, SolverOptions};
use rvlab::grid::Grid;

fn exact(z: C64) -> C64 {
    if z.norm_sqr() < 1.0 { z * z.norm_sqr() } else { z }
}

/// Symbolic check of the oracle: for f = z|z|^p, μ_f = (p/(p+2)) z/z̄.
#[test]
fn oracle_coefficient_from_symbolic_derivatives() {
    let p = 2.0;
    for z in [C64::new(0.3, 0.4), C64::new(-0.7, 0.1)] {
        let r = z.norm();
        let fz = (1.0 + p / 2.0) * r.powf(p);
        let fzb = (p / 2.0) * r.powf(p - 2.0) * z * z;
        let mu = fzb / fz;
        assert!((mu - p / (p + 2.0) * z / z.conj()).norm() < 1e-14);
    }
}

#[test]
fn radial_cubic_oracle() {
    let grid = Grid::centered(512, 1.25);
    let solver = BeltramiSolver::new(grid, SolverOptions::default()).unwrap();
    let mu = BeltramiField::from_fn(grid, |z| if z.norm_sqr() < 1.0 { 0.5 * z / z.conj() } else { C64::new(0.0, 0.0) }).unwrap();
    let t = std::time::Instant::now();
    let f = solver.solve(&mu).unwrap();
    let (mut num, mut den, mut dnum, mut dden) = (0.0, 0.0, 0.0, 0.0);
    for (k, z) in grid.points().enumerate() {
        let e = exact(z);
        let d = (f.f.data[k] - e).norm_sqr();
        num += d;
        den += e.norm_sqr();
        if z.norm_sqr() < 1.0 {
            dnum += d;
            dden += e.norm_sqr();
        }
    }
    let rel = (num / den).sqrt();
    println!("iterations {} residual {:.2e} rel {:.3e} disk {:.3e} time {:?}", f.iterations, f.residual_l2, rel, (dnum / dden).sqrt(), t.elapsed());
    assert!(rel < 1e-3);
    assert!(f.residual_l2 < 1e-10);
    assert!(f.orientation_preserving());
}

#[test]
fn first_order_term_is_cauchy_transform() {
    let grid = Grid::centered(128, 2.0);
    let solver = BeltramiSolver::new(grid, SolverOptions::default()).unwrap();
    let shape = |z: C64| C64::new(0.3, 0.2) * (-(4.0 * z.norm_sqr())).exp() * (1.0 + z);
    let base = BeltramiField::from_fn(grid, shape).unwrap();
    let lin = solver.cauchy(&base.field.data);
    let err = |t: f64| {
        let f = solver.solve(&base.scaled(t).unwrap()).unwrap();
        grid.points().enumerate().map(|(k, z)| (f.f.data[k] - z - lin[k] * t).norm_sqr()).sum::<f64>().sqrt()
    };
    let (e1, e2, e3) = (err(0.4), err(0.2), err(0.1));
    let s1 = (e1 / e2).log2();
    let s2 = (e2 / e3).log2();
    assert!(s1 >= 1.9 && s2 >= 1.9, "{s1} {s2}");
}

#[test]
fn far_field_is_principal() {
    let grid = Grid::centered(64, 1.5);
    let solver = BeltramiSolver::new(grid, SolverOptions::default()).unwrap();
    let mu = BeltramiField::from_fn(grid, |z| if z.norm() < 1.0 { C64::new(0.3, 0.1) * (1.0 - z.norm_sqr()) } else { C64::new(0.0, 0.0) }).unwrap();
    let f = solver.solve(&mu).unwrap();
    let total: C64 = f.f_zbar.iter().sum::<C64>() * grid.cell_area() / std::f64::consts::PI;
    let mut prev = f64::INFINITY;
    for r in [10.0, 20.0, 40.0, 80.0] {
        let z = C64::from_polar(r, 0.7);
        let v = f.eval(z).unwrap();
        let dev = ((v - z) * z - total).norm();
        assert!(dev < prev);
        prev = dev;
    }
    assert!(prev < 1e-3 * total.norm());
}
