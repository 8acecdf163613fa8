use crate::error::{Error, Result};
use crate::moebius::MoebiusMap;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

/// Identification of one side of a fundamental polygon with another.
#[derive(Clone, Debug, Serialize)]
pub struct SidePairing {
    pub side: usize,
    pub target: usize,
    /// Index into [`FuchsianGroup::generators_with_inverses`].
    pub element: usize,
}

/// Fundamental domains, described in the disk model.
#[derive(Clone, Debug, Serialize)]
pub enum FundamentalDomain {
    /// Geodesic polygon with vertices in counterclockwise order; side `k` joins vertex `k-1` to vertex `k`.
    Polygon { vertices: Vec<C64>, pairings: Vec<SidePairing> },
    /// The whole disk (trivial group).
    Disk,
    /// Region between two geodesics orthogonal to the real diameter, `|Re κ| ≤ half_width` in Klein coordinates.
    Slab { half_width: f64 },
}

/// Disk point to Klein-model point.
pub fn disk_to_klein(z: C64) -> C64 {
    z * (2.0 / (1.0 + z.norm_sqr()))
}

pub fn klein_to_disk(k: C64) -> C64 {
    k / (1.0 + (1.0 - k.norm_sqr()).max(0.0).sqrt())
}

impl FundamentalDomain {
    pub fn contains(&self, z: C64) -> bool {
        if z.norm_sqr() >= 1.0 {
            return false;
        }
        match self {
            FundamentalDomain::Disk => true,
            FundamentalDomain::Slab { half_width } => disk_to_klein(z).re.abs() <= *half_width,
            FundamentalDomain::Polygon { vertices, .. } => {
                let k = disk_to_klein(z);
                let kv: Vec<C64> = vertices.iter().map(|&v| disk_to_klein(v)).collect();
                (0..kv.len()).all(|i| {
                    let a = kv[i];
                    let b = kv[(i + 1) % kv.len()];
                    ((b - a).conj() * (k - a)).im >= -1e-14
                })
            }
        }
    }
}

/// A discrete group of isometries of the hyperbolic plane together with a fundamental domain.
///
/// Generators are stored as real matrices acting on the upper half-plane; the disk-model
/// versions are their conjugates by the Cayley map.
#[derive(Clone, Debug, Serialize)]
pub struct FuchsianGroup {
    pub name: String,
    pub generators: Vec<MoebiusMap>,
    pub domain: FundamentalDomain,
    #[serde(skip)]
    disk_generators: Vec<MoebiusMap>,
}

impl FuchsianGroup {
    pub fn new(name: impl Into<String>, generators: Vec<MoebiusMap>, domain: FundamentalDomain) -> Result<Self> {
        for (k, g) in generators.iter().enumerate() {
            if !g.is_real(1e-9) {
                return Err(Error::Structural(format!("generator {k} is not a real matrix")));
            }
            if (g.det() - 1.0).norm() > 1e-12 {
                return Err(Error::Structural(format!("generator {k} does not have unit determinant")));
            }
        }
        let cay = MoebiusMap::cayley();
        let disk_generators = generators.iter().map(|g| g.conjugate_by(&cay.inverse())).collect();
        let group = Self { name: name.into(), generators, domain, disk_generators };
        if let FundamentalDomain::Polygon { vertices, pairings } = &group.domain {
            let n = vertices.len();
            for p in pairings {
                if p.side >= n || p.target >= n || p.element >= 2 * group.generators.len() {
                    return Err(Error::Structural(format!("side pairing {p:?} is out of range")));
                }
            }
        }
        Ok(group)
    }

    fn from_disk(name: &str, disk: Vec<MoebiusMap>, domain: FundamentalDomain) -> Self {
        let cay = MoebiusMap::cayley();
        let uhp: Vec<MoebiusMap> = disk
            .iter()
            .map(|g| {
                let m = g.conjugate_by(&cay).sign_normalized();
                MoebiusMap { a: m.a.re.into(), b: m.b.re.into(), c: m.c.re.into(), d: m.d.re.into() }
            })
            .collect();
        Self::new(name, uhp, domain).expect("built-in group is valid")
    }

    /// The group with only the identity; the domain is the whole disk.
    pub fn trivial() -> Self {
        Self::new("trivial", Vec::new(), FundamentalDomain::Disk).expect("valid")
    }

    /// Side-pairing group of the regular octagon with interior angles π/4 (a closed genus-2 surface).
    ///
    /// Generator `k` (k = 0..3) maps side `k+4` onto side `k`.
    pub fn octagon() -> Self {
        let s2 = 2f64.sqrt();
        let a = 1.0 + s2;
        let b = (2.0 + 2.0 * s2).sqrt();
        let disk: Vec<MoebiusMap> = (0..4)
            .map(|k| {
                let e = C64::from_polar(1.0, k as f64 * PI / 4.0);
                MoebiusMap { a: a.into(), b: e * b, c: e.conj() * b, d: a.into() }
            })
            .collect();
        let radius = octagon_vertex_radius();
        let vertices = (0..8).map(|k| C64::from_polar(radius, (k as f64 + 0.5) * PI / 4.0)).collect();
        let mut pairings = Vec::new();
        for k in 0..4 {
            pairings.push(SidePairing { side: k + 4, target: k, element: k });
            pairings.push(SidePairing { side: k, target: k + 4, element: k + 4 });
        }
        Self::from_disk("octagon", disk, FundamentalDomain::Polygon { vertices, pairings })
    }

    /// Cyclic group generated by a translation of length `ell` along the real diameter of the disk.
    pub fn cyclic(ell: f64) -> Self {
        let (c, s) = ((0.5 * ell).cosh(), (0.5 * ell).sinh());
        let g = MoebiusMap { a: c.into(), b: s.into(), c: s.into(), d: c.into() };
        Self::from_disk("cyclic", vec![g], FundamentalDomain::Slab { half_width: (0.5 * ell).tanh() })
    }

    pub fn disk_generators(&self) -> &[MoebiusMap] {
        &self.disk_generators
    }

    /// Disk-model generators followed by their inverses.
    pub fn generators_with_inverses(&self) -> Vec<MoebiusMap> {
        let mut v = self.disk_generators.clone();
        v.extend(self.disk_generators.iter().map(|g| g.inverse()));
        v
    }

    /// Identifier used to check that two objects live over the same group.
    pub fn same_as(&self, other: &FuchsianGroup) -> bool {
        self.name == other.name
            && self.generators.len() == other.generators.len()
            && self.generators.iter().zip(&other.generators).all(|(a, b)| a.distance(b) < 1e-12)
    }

    /// Distinct group elements (disk model) of word length at most `cutoff`, ordered by word length.
    /// The second vector holds the offsets at which each word length starts.
    pub fn enumerate(&self, cutoff: usize) -> (Vec<MoebiusMap>, Vec<usize>) {
        let gens = self.generators_with_inverses();
        let mut seen: HashMap<[i64; 8], ()> = HashMap::new();
        let id = MoebiusMap::identity();
        seen.insert(key(&id), ());
        let mut out = vec![id];
        let mut offsets = vec![0, 1];
        let mut frontier: VecDeque<MoebiusMap> = VecDeque::from(vec![id]);
        for _ in 0..cutoff {
            let mut next = VecDeque::new();
            for w in &frontier {
                for g in &gens {
                    let e = w.compose(g);
                    if seen.insert(key(&e), ()).is_none() {
                        out.push(e);
                        next.push_back(e);
                    }
                }
            }
            offsets.push(out.len());
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        (out, offsets)
    }

    /// Sample points inside the fundamental domain used for residual checks.
    pub fn sample_points(&self) -> Vec<C64> {
        match &self.domain {
            FundamentalDomain::Disk => ring_points(&[0.0, 0.3, 0.6, 0.85], 8),
            FundamentalDomain::Slab { half_width } => {
                let mut pts = Vec::new();
                for &fx in &[-0.9, -0.5, 0.0, 0.5, 0.9] {
                    for &fy in &[-0.8, -0.4, 0.0, 0.4, 0.8] {
                        let x = fx * half_width;
                        let k = C64::new(x, fy * (1.0 - x * x).sqrt());
                        pts.push(klein_to_disk(k));
                    }
                }
                pts
            }
            FundamentalDomain::Polygon { vertices, .. } => {
                let mut pts = vec![C64::new(0.0, 0.0)];
                let n = vertices.len();
                for k in 0..n {
                    let v = disk_to_klein(vertices[k]);
                    let m = 0.5 * (disk_to_klein(vertices[(k + n - 1) % n]) + v);
                    for f in [0.3, 0.6, 0.9] {
                        pts.push(klein_to_disk(v * f));
                        pts.push(klein_to_disk(m * f));
                    }
                }
                pts
            }
        }
    }
}

fn ring_points(radii: &[f64], m: usize) -> Vec<C64> {
    let mut pts = Vec::new();
    for &r in radii {
        if r == 0.0 {
            pts.push(C64::new(0.0, 0.0));
            continue;
        }
        for j in 0..m {
            pts.push(C64::from_polar(r, 2.0 * PI * (j as f64 + 0.25) / m as f64));
        }
    }
    pts
}

fn key(m: &MoebiusMap) -> [i64; 8] {
    let s = m.sign_normalized();
    let q = |x: f64| (x * 1e6).round() as i64;
    [q(s.a.re), q(s.a.im), q(s.b.re), q(s.b.im), q(s.c.re), q(s.c.im), q(s.d.re), q(s.d.im)]
}

/// Euclidean radius of the vertices of the regular octagon with angles π/4.
pub fn octagon_vertex_radius() -> f64 {
    // cosh(R) = cot(π/8) cot(π/8) for the circumradius R of a regular 8-gon with angle π/4.
    let c = 1.0 / (PI / 8.0).tan();
    let big_r = (c * c).acosh();
    (0.5 * big_r).tanh()
}
