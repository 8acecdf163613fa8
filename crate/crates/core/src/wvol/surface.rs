use super::mesh::Mesh;
use crate::error::{Error, Result};
use crate::gauss::gauss_legendre_on;
use crate::richardson::RichardsonTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// Mesh with per-vertex conformal factors; edge `(i,j)` has length `e^{φᵢ+φⱼ} ℓ⁰ᵢⱼ`.
#[derive(Clone, Debug)]
pub struct DiscreteMetricSurface {
    pub mesh: Arc<Mesh>,
    pub phi: Vec<f64>,
    /// Vertices marked as cusps; carried along, not used by the flow.
    pub cusps: Vec<usize>,
}

/// Angles, vertex areas and curvatures of a surface state.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub angles: Vec<[f64; 3]>,
    /// `2π − Σ angles` at each vertex.
    pub defect: Vec<f64>,
    /// Circumcentric dual areas.
    pub da: Vec<f64>,
    /// `defect / da`.
    pub k: Vec<f64>,
    pub area: f64,
}

impl Geometry {
    /// `K̄ = Σ Kᵢdaᵢ / A`.
    pub fn mean_curvature(&self) -> f64 {
        self.defect.iter().sum::<f64>() / self.area
    }

    pub fn max_deviation(&self) -> f64 {
        let kbar = self.mean_curvature();
        self.k.iter().map(|k| (k - kbar).abs()).fold(0.0, f64::max)
    }

    pub fn total_curvature(&self) -> f64 {
        self.defect.iter().sum()
    }

    /// `Σ K²da − (Σ K da)²/A`, the Hölder gap.
    pub fn holder_gap(&self) -> f64 {
        let kbar = self.mean_curvature();
        self.k.iter().zip(&self.da).map(|(k, a)| (k - kbar) * (k - kbar) * a).sum()
    }
}

impl DiscreteMetricSurface {
    pub fn new(mesh: Arc<Mesh>, phi: Vec<f64>) -> Result<Self> {
        if phi.len() != mesh.vertex_count {
            return Err(Error::Mesh(format!("{} conformal factors for {} vertices", phi.len(), mesh.vertex_count)));
        }
        if phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::Mesh("non-finite conformal factor".into()));
        }
        Ok(Self { mesh, phi, cusps: Vec::new() })
    }

    pub fn with_phi(&self, phi: Vec<f64>) -> Self {
        Self { mesh: self.mesh.clone(), phi, cusps: self.cusps.clone() }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.mesh.euler_characteristic()
    }

    pub fn vertex_count(&self) -> usize {
        self.mesh.vertex_count
    }

    fn face_lengths(&self, f: usize) -> [f64; 3] {
        let t = self.mesh.faces[f];
        let l = self.mesh.lengths[f];
        [0, 1, 2].map(|e| (self.phi[t[e]] + self.phi[t[(e + 1) % 3]]).exp() * l[e])
    }

    pub fn area(&self) -> Result<f64> {
        Ok(self.geometry()?.area)
    }

    /// Fails with [`Error::Metric`] (face index) on a triangle-inequality violation and with
    /// [`Error::Mesh`] when a vertex area is not positive.
    pub fn geometry(&self) -> Result<Geometry> {
        let faces: Vec<([f64; 3], [f64; 3], f64)> = (0..self.mesh.faces.len())
            .into_par_iter()
            .map(|f| {
                let [lij, ljk, lki] = self.face_lengths(f);
                // Opposite edges: vertex 0 ↔ jk, vertex 1 ↔ ki, vertex 2 ↔ ij.
                let opp = [ljk, lki, lij];
                let s = [lij, ljk, lki];
                for e in 0..3 {
                    if opp[e] >= opp[(e + 1) % 3] + opp[(e + 2) % 3] {
                        return Err(Error::Metric(f));
                    }
                }
                let ang = [0, 1, 2].map(|v| {
                    let (a, b, c) = (opp[v], opp[(v + 1) % 3], opp[(v + 2) % 3]);
                    ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0).acos()
                });
                let cot = ang.map(|a| 1.0 / a.tan());
                // Vertex v gets ⅛(ℓ² cot) over its two incident edges.
                let area_part = [0, 1, 2].map(|v| {
                    let (e_out, e_in) = (s[v], s[(v + 2) % 3]);
                    0.125 * (e_out * e_out * cot[(v + 2) % 3] + e_in * e_in * cot[(v + 1) % 3])
                });
                let p = 0.5 * (lij + ljk + lki);
                let area = (p * (p - lij) * (p - ljk) * (p - lki)).max(0.0).sqrt();
                Ok((ang, area_part, area))
            })
            .collect::<Result<_>>()?;
        let n = self.mesh.vertex_count;
        let mut defect = vec![2.0 * PI; n];
        let mut da = vec![0.0; n];
        let mut area = 0.0;
        let mut angles = Vec::with_capacity(faces.len());
        for (t, (ang, part, a)) in self.mesh.faces.iter().zip(faces) {
            for v in 0..3 {
                defect[t[v]] -= ang[v];
                da[t[v]] += part[v];
            }
            area += a;
            angles.push(ang);
        }
        if let Some(v) = da.iter().position(|a| !(*a > 0.0)) {
            return Err(Error::Mesh(format!("vertex {v} has non-positive dual area")));
        }
        let k = defect.iter().zip(&da).map(|(d, a)| d / a).collect();
        Ok(Geometry { angles, defect, da, k, area })
    }
}

/// `δW(u) = −¼ Σ Kᵢ uᵢ daᵢ`.
pub fn w_first_variation(geometry: &Geometry, u: &[f64]) -> f64 {
    -0.25 * geometry.defect.iter().zip(u).map(|(d, u)| d * u).sum::<f64>()
}

/// `W` along the segment `φ₀ + t(φ₁ − φ₀)`, `t ∈ [0,1]`, by `panels` composite Gauss–Legendre panels.
pub fn w_segment(surface: &DiscreteMetricSurface, target: &[f64], order: usize, panels: usize) -> Result<f64> {
    let u: Vec<f64> = target.iter().zip(&surface.phi).map(|(b, a)| b - a).collect();
    let mut total = 0.0;
    for p in 0..panels {
        let (a, b) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
        for (t, w) in gauss_legendre_on(order, a, b) {
            let phi: Vec<f64> = surface.phi.iter().zip(&u).map(|(p, u)| p + t * u).collect();
            let g = surface.with_phi(phi).geometry().map_err(|_| Error::Path(t))?;
            total += w * w_first_variation(&g, &u);
        }
    }
    Ok(total)
}

/// Change of `W` from `surface` to `surface + u`.
#[derive(Clone, Debug, Serialize)]
pub struct WChange {
    pub value: f64,
    pub error_estimate: f64,
    pub table: RichardsonTable,
}

/// `W[φ+u] − W[φ]` along `t ↦ φ + tu`, with `n`-point Gauss–Legendre on 1, 2 and 4 panels
/// extrapolated in the panel width.
pub fn w_conformal_change(surface: &DiscreteMetricSurface, u: &[f64], n: usize) -> Result<WChange> {
    if u.len() != surface.vertex_count() {
        return Err(Error::Mesh("direction has the wrong length".into()));
    }
    let target: Vec<f64> = surface.phi.iter().zip(u).map(|(p, u)| p + u).collect();
    let panels = [1usize, 2, 4];
    let est: Vec<f64> = panels.iter().map(|&m| w_segment(surface, &target, n, m)).collect::<Result<_>>()?;
    let steps: Vec<f64> = panels.iter().map(|&m| 1.0 / m as f64).collect();
    let table = RichardsonTable::build(&steps, &est, 2 * n as u32, 2);
    let value = table.best();
    let error_estimate = table.error_estimate().min((est[2] - est[1]).abs());
    Ok(WChange { value, error_estimate, table })
}

/// `W` along a piecewise-linear path through the given states (first entry is the start).
pub fn w_along_path(surface: &DiscreteMetricSurface, waypoints: &[Vec<f64>], n: usize) -> Result<f64> {
    let mut total = 0.0;
    let mut s = surface.clone();
    for p in waypoints {
        let u: Vec<f64> = p.iter().zip(&s.phi).map(|(a, b)| a - b).collect();
        total += w_conformal_change(&s, &u, n)?.value;
        s = s.with_phi(p.clone());
    }
    Ok(total)
}

/// Direction with `Σ uᵢdaᵢ = 0` and positive first variation, supported at the vertices of
/// largest and smallest curvature. `None` when the curvature is constant to `tol`.
pub fn nonuniqueness_witness(geometry: &Geometry, tol: f64) -> Option<Vec<f64>> {
    let (mut lo, mut hi) = (0, 0);
    for (i, k) in geometry.k.iter().enumerate() {
        if *k < geometry.k[lo] {
            lo = i;
        }
        if *k > geometry.k[hi] {
            hi = i;
        }
    }
    if geometry.k[hi] - geometry.k[lo] <= tol {
        return None;
    }
    let mut u = vec![0.0; geometry.k.len()];
    u[lo] = 1.0 / geometry.da[lo];
    u[hi] = -1.0 / geometry.da[hi];
    Some(u)
}

/// Random conformal factors with `max|φ| = amplitude`: independent uniform values, then
/// `smoothing` passes of neighbour averaging.
pub fn random_perturbation(mesh: &Mesh, amplitude: f64, smoothing: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phi: Vec<f64> = (0..mesh.vertex_count).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nb = mesh.neighbours();
    for _ in 0..smoothing {
        phi = (0..phi.len()).map(|i| (phi[i] + nb[i].iter().map(|&j| phi[j]).sum::<f64>()) / (1 + nb[i].len()) as f64).collect();
    }
    let m = phi.iter().map(|p| p.abs()).fold(0.0, f64::max);
    phi.iter().map(|p| amplitude * p / m).collect()
}

#[cfg(test)]
mod tests {
    use super::super::mesh::bolza_mesh;
    use super::*;
    use proptest::prelude::*;

    fn bolza(n: usize) -> DiscreteMetricSurface {
        let m = Arc::new(bolza_mesh(n).unwrap());
        let phi = vec![0.0; m.vertex_count];
        DiscreteMetricSurface::new(m, phi).unwrap()
    }

    #[test]
    fn gauss_bonnet_and_area() {
        let s = bolza(4);
        let g = s.geometry().unwrap();
        assert!((g.total_curvature() + 4.0 * PI).abs() < 1e-9);
        assert!((g.da.iter().sum::<f64>() - g.area).abs() < 1e-10 * g.area);
        // Euclidean triangles with hyperbolic edge lengths are slightly larger than hyperbolic ones.
        assert!(g.area > 4.0 * PI && g.area < 4.2 * PI, "{}", g.area);
    }

    #[test]
    fn area_derivative_is_four_dual_areas() {
        let s = bolza(2);
        let phi = random_perturbation(&s.mesh, 0.2, 0, 1);
        let s = s.with_phi(phi);
        let g = s.geometry().unwrap();
        let h = 1e-6;
        for i in [0, 5, 17] {
            let mut p = s.phi.clone();
            p[i] += h;
            let a1 = s.with_phi(p.clone()).area().unwrap();
            p[i] -= 2.0 * h;
            let a0 = s.with_phi(p).area().unwrap();
            let d = (a1 - a0) / (2.0 * h);
            assert!((d - 4.0 * g.da[i]).abs() < 1e-6 * g.area, "{d} {}", 4.0 * g.da[i]);
        }
    }

    #[test]
    fn first_variation_closed_forms() {
        let s = bolza(3);
        let g = s.geometry().unwrap();
        assert_eq!(w_first_variation(&g, &vec![0.0; s.vertex_count()]), 0.0);
        let one = vec![1.0; s.vertex_count()];
        assert!((w_first_variation(&g, &one) - PI).abs() < 1e-9);
        // With constant K any area-neutral direction is critical.
        let kc = Geometry { k: vec![-1.0; 3], defect: vec![-1.0, -2.0, -3.0], da: vec![1.0, 2.0, 3.0], angles: vec![], area: 6.0 };
        assert!(w_first_variation(&kc, &[1.0, 1.0, -1.0]).abs() < 1e-15);
    }

    #[test]
    fn constant_shift_and_path_independence() {
        let s = bolza(3);
        let s = s.with_phi(random_perturbation(&s.mesh, 0.2, 2, 7));
        let c = 0.3;
        let w = w_conformal_change(&s, &vec![c; s.vertex_count()], 4).unwrap();
        assert!((w.value - PI * c).abs() < 1e-8, "{}", w.value);
        let u = random_perturbation(&s.mesh, 0.15, 1, 8);
        let bend = random_perturbation(&s.mesh, 0.1, 0, 9);
        let end: Vec<f64> = s.phi.iter().zip(&u).map(|(p, u)| p + u).collect();
        let mid: Vec<f64> = s.phi.iter().zip(&u).zip(&bend).map(|((p, u), b)| p + 0.5 * u + b).collect();
        let straight = w_conformal_change(&s, &u, 4).unwrap().value;
        let bent = w_along_path(&s, &[mid, end], 4).unwrap();
        assert!((straight - bent).abs() < 1e-8, "{straight} {bent}");
    }

    #[test]
    fn witness_properties() {
        let s = bolza(3);
        let s = s.with_phi(random_perturbation(&s.mesh, 0.1, 1, 3));
        let g = s.geometry().unwrap();
        let u = nonuniqueness_witness(&g, 1e-9).unwrap();
        assert!(u.iter().zip(&g.da).map(|(u, a)| u * a).sum::<f64>().abs() < 1e-12);
        let dw = w_first_variation(&g, &u);
        assert!(dw > 0.0);
        let u2: Vec<f64> = u.iter().map(|x| 2.0 * x).collect();
        assert!((w_first_variation(&g, &u2) - 2.0 * dw).abs() < 1e-12 * dw.abs());
        let flat = Geometry { k: vec![-1.0; 4], defect: vec![-1.0; 4], da: vec![1.0; 4], angles: vec![], area: 4.0 };
        assert!(nonuniqueness_witness(&flat, 1e-9).is_none());
    }

    #[test]
    fn triangle_inequality_violation_is_reported() {
        let s = bolza(1);
        let mut phi = vec![0.0; 6];
        phi[0] = -3.0;
        assert!(matches!(s.with_phi(phi).geometry(), Err(Error::Metric(_)) | Err(Error::Mesh(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn gauss_bonnet_for_random_factors(seed in 0u64..1000, amp in 0.0f64..0.3) {
            let s = bolza(2);
            let s = s.with_phi(random_perturbation(&s.mesh, amp, 1, seed));
            if let Ok(g) = s.geometry() {
                prop_assert!((g.total_curvature() + 4.0 * PI).abs() < 1e-9);
                prop_assert!(g.holder_gap() >= -1e-12);
            }
        }
    }
}
