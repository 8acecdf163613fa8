use super::group::{disk_to_klein, klein_to_disk, FundamentalDomain};
use crate::gauss::{gauss_legendre, gauss_legendre_on};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Product Gauss rule on a triangulation of the fundamental domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    /// Gauss points per direction on each triangle.
    pub order: usize,
    /// Number of 4-way subdivisions of each triangle.
    pub refinement: usize,
}

/// Extra subdivision levels applied to triangles touching a polygon corner, where the
/// hyperbolic area element varies fastest.
const CORNER_GRADING: usize = 6;

impl Default for QuadratureRule {
    fn default() -> Self {
        Self { order: 12, refinement: 1 }
    }
}

impl QuadratureRule {
    pub fn refined(&self) -> Self {
        Self { order: self.order, refinement: self.refinement + 1 }
    }
}

/// A node in disk coordinates with its Euclidean area weight.
#[derive(Clone, Copy, Debug)]
pub struct QuadNode {
    pub z: C64,
    pub weight: f64,
}

/// Nodes for integrating against `dx dy` (disk coordinates) over the domain.
pub fn domain_nodes(domain: &FundamentalDomain, rule: QuadratureRule) -> Vec<QuadNode> {
    match domain {
        FundamentalDomain::Polygon { vertices, .. } => {
            let kv: Vec<C64> = vertices.iter().map(|&v| disk_to_klein(v)).collect();
            let centre = kv.iter().sum::<C64>() / kv.len() as f64;
            let mut tris = Vec::new();
            for i in 0..kv.len() {
                tris.push([centre, kv[i], kv[(i + 1) % kv.len()]]);
            }
            for _ in 0..rule.refinement {
                tris = tris.into_iter().flat_map(split).collect();
            }
            for _ in 0..CORNER_GRADING {
                tris = tris
                    .into_iter()
                    .flat_map(|t| {
                        let at_corner = t.iter().any(|p| kv.iter().any(|c| (p - c).norm() < 1e-12));
                        if at_corner { split(t) } else { vec![t] }
                    })
                    .collect();
            }
            let (x, w) = gauss_legendre(rule.order);
            let mut nodes = Vec::with_capacity(tris.len() * rule.order * rule.order);
            for t in &tris {
                let area2 = ((t[1] - t[0]).conj() * (t[2] - t[0])).im.abs();
                for (xi, wi) in x.iter().zip(&w) {
                    let u = 0.5 * (xi + 1.0);
                    for (xj, wj) in x.iter().zip(&w) {
                        let v = 0.5 * (xj + 1.0);
                        // Collapsed square: (u, v) ↦ A + u(B − A) + u v (C − B).
                        let k = t[0] + (t[1] - t[0]) * u + (t[2] - t[1]) * (u * v);
                        let jac = 0.25 * wi * wj * u * area2;
                        nodes.push(klein_node(k, jac));
                    }
                }
            }
            nodes
        }
        FundamentalDomain::Disk => {
            let nr = rule.order << rule.refinement;
            let nt = 4 * nr;
            let mut nodes = Vec::with_capacity(nr * nt);
            for (r, wr) in gauss_legendre_on(nr, 0.0, 1.0) {
                for j in 0..nt {
                    let th = 2.0 * PI * j as f64 / nt as f64;
                    nodes.push(QuadNode { z: C64::from_polar(r, th), weight: wr * r * 2.0 * PI / nt as f64 });
                }
            }
            nodes
        }
        FundamentalDomain::Slab { half_width } => {
            let n = rule.order << rule.refinement;
            let mut nodes = Vec::with_capacity(n * n);
            for (x, wx) in gauss_legendre_on(n, -half_width, *half_width) {
                let c = (1.0 - x * x).sqrt();
                for (th, wt) in gauss_legendre_on(n, -0.5 * PI, 0.5 * PI) {
                    let k = C64::new(x, c * th.sin());
                    nodes.push(klein_node(k, wx * wt * c * th.cos()));
                }
            }
            nodes
        }
    }
}

/// Converts a Klein-area weight at `k` into a Euclidean disk-area weight.
fn klein_node(k: C64, klein_weight: f64) -> QuadNode {
    let z = klein_to_disk(k);
    let s = 1.0 - k.norm_sqr();
    let hyp = klein_weight / (s * s.sqrt());
    let d = 1.0 - z.norm_sqr();
    QuadNode { z, weight: hyp * d * d / 4.0 }
}

fn split(t: [C64; 3]) -> Vec<[C64; 3]> {
    let [a, b, c] = t;
    let (ab, bc, ca) = (0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a));
    vec![[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
}

/// Integrates `f` against `dx dy` over the domain.
pub fn integrate(domain: &FundamentalDomain, rule: QuadratureRule, f: impl Fn(C64) -> f64 + Sync) -> f64 {
    use rayon::prelude::*;
    let nodes = domain_nodes(domain, rule);
    nodes.par_iter().map(|n| n.weight * f(n.z)).collect::<Vec<f64>>().iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::FuchsianGroup;

    #[test]
    fn octagon_area_is_4pi() {
        let g = FuchsianGroup::octagon();
        let area = integrate(&g.domain, QuadratureRule::default(), |z| {
            let d = 1.0 - z.norm_sqr();
            4.0 / (d * d)
        });
        assert!((area - 4.0 * PI).abs() < 1e-8, "{area}");
    }

    #[test]
    fn disk_area() {
        let a = integrate(&FundamentalDomain::Disk, QuadratureRule::default(), |_| 1.0);
        assert!((a - PI).abs() < 1e-12);
    }

    #[test]
    fn slab_euclidean_area_converges() {
        let d = FundamentalDomain::Slab { half_width: 0.5 };
        let a = integrate(&d, QuadratureRule { order: 10, refinement: 2 }, |_| 1.0);
        let b = integrate(&d, QuadratureRule { order: 10, refinement: 3 }, |_| 1.0);
        assert!((a - b).abs() < 1e-8);
    }
}
