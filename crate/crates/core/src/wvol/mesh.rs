use crate::error::{Error, Result};
use crate::fuchsian::FuchsianGroup;
use num_complex::Complex64 as C64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Closed triangulated surface with reference edge lengths stored per face.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertex_count: usize,
    pub faces: Vec<[usize; 3]>,
    /// Lengths of the edges `(i,j)`, `(j,k)`, `(k,i)` of face `[i, j, k]`.
    pub lengths: Vec<[f64; 3]>,
    pub genus: usize,
}

impl Mesh {
    pub fn new(vertex_count: usize, faces: Vec<[usize; 3]>, lengths: Vec<[f64; 3]>, genus: usize) -> Result<Self> {
        if faces.len() != lengths.len() {
            return Err(Error::Mesh(format!("{} faces but {} length triples", faces.len(), lengths.len())));
        }
        // Directed edge counts and lengths; an oriented closed surface uses each edge once in
        // each direction. Several edges may join the same pair of vertices.
        let mut directed: HashMap<(usize, usize), Vec<f64>> = HashMap::new();
        let mut used = vec![false; vertex_count];
        for (f, (tri, len)) in faces.iter().zip(&lengths).enumerate() {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                if a >= vertex_count || b >= vertex_count || a == b {
                    return Err(Error::Mesh(format!("face {f} has invalid vertices {tri:?}")));
                }
                if !(len[e] > 0.0) || !len[e].is_finite() {
                    return Err(Error::Mesh(format!("face {f} has a non-positive edge length")));
                }
                used[a] = true;
                directed.entry((a, b)).or_default().push(len[e]);
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::Mesh(format!("vertex {v} belongs to no face")));
        }
        for ((a, b), l) in &directed {
            let back = directed.get(&(*b, *a)).map_or(0, Vec::len);
            if back != l.len() {
                return Err(Error::Mesh(format!("edge {a}-{b} is not shared by two consistently oriented faces")));
            }
            if l.len() == 1 {
                let m = directed[&(*b, *a)][0];
                if (m - l[0]).abs() > 1e-9 * l[0] {
                    return Err(Error::Mesh(format!("edge {a}-{b} has inconsistent lengths")));
                }
            }
        }
        let edge_count = directed.values().map(Vec::len).sum::<usize>() / 2;
        let chi = vertex_count as i64 - edge_count as i64 + faces.len() as i64;
        if chi != 2 - 2 * genus as i64 {
            return Err(Error::Mesh(format!("euler characteristic {chi} does not match genus {genus}")));
        }
        Ok(Self { vertex_count, faces, lengths, genus })
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64
    }

    /// Vertex adjacency lists, sorted.
    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut n = vec![Vec::new(); self.vertex_count];
        for t in &self.faces {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                n[a].push(b);
                n[b].push(a);
            }
        }
        for l in &mut n {
            l.sort_unstable();
            l.dedup();
        }
        n
    }

    /// Text form: header lines, one line per face, then a `phi` column.
    pub fn to_text(&self, phi: &[f64]) -> String {
        let mut s = String::new();
        writeln!(s, "rvlab-mesh 1").unwrap();
        writeln!(s, "genus {}", self.genus).unwrap();
        writeln!(s, "vertices {}", self.vertex_count).unwrap();
        writeln!(s, "faces {}", self.faces.len()).unwrap();
        for (t, l) in self.faces.iter().zip(&self.lengths) {
            writeln!(s, "{} {} {} {:.17e} {:.17e} {:.17e}", t[0], t[1], t[2], l[0], l[1], l[2]).unwrap();
        }
        writeln!(s, "phi").unwrap();
        for p in phi {
            writeln!(s, "{p:.17e}").unwrap();
        }
        s
    }

    /// Parses [`Mesh::to_text`] output; a missing `phi` section means `φ ≡ 0`.
    pub fn from_text(text: &str) -> Result<(Self, Vec<f64>)> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let bad = |m: &str| Error::Mesh(m.to_string());
        if lines.next() != Some("rvlab-mesh 1") {
            return Err(bad("missing 'rvlab-mesh 1' header"));
        }
        let mut field = |name: &str| -> Result<usize> {
            let l = lines.next().ok_or_else(|| bad("truncated header"))?;
            let mut it = l.split_whitespace();
            if it.next() != Some(name) {
                return Err(Error::Mesh(format!("expected '{name}' line, found '{l}'")));
            }
            it.next().and_then(|v| v.parse().ok()).ok_or_else(|| Error::Mesh(format!("bad '{name}' value")))
        };
        let genus = field("genus")?;
        let nv = field("vertices")?;
        let nf = field("faces")?;
        let mut faces = Vec::with_capacity(nf);
        let mut lengths = Vec::with_capacity(nf);
        for f in 0..nf {
            let l = lines.next().ok_or_else(|| bad("fewer faces than declared"))?;
            let tok: Vec<&str> = l.split_whitespace().collect();
            if tok.len() != 6 {
                return Err(Error::Mesh(format!("face line {f} needs 6 fields")));
            }
            let idx = |k: usize| tok[k].parse::<usize>().map_err(|_| Error::Mesh(format!("face line {f}: bad index")));
            let len = |k: usize| tok[k].parse::<f64>().map_err(|_| Error::Mesh(format!("face line {f}: bad length")));
            faces.push([idx(0)?, idx(1)?, idx(2)?]);
            lengths.push([len(3)?, len(4)?, len(5)?]);
        }
        let mut phi = vec![0.0; nv];
        if let Some(l) = lines.next() {
            if l != "phi" {
                return Err(Error::Mesh(format!("expected 'phi', found '{l}'")));
            }
            let vals: Vec<f64> = lines.map(|l| l.parse::<f64>().map_err(|_| Error::Mesh(format!("bad phi value '{l}'")))).collect::<Result<_>>()?;
            if vals.len() != nv {
                return Err(Error::Mesh(format!("{} phi values for {nv} vertices", vals.len())));
            }
            phi = vals;
        }
        Ok((Self::new(nv, faces, lengths, genus)?, phi))
    }
}

/// Point of the hyperboloid model for a point of the disk.
fn lift(z: C64) -> [f64; 3] {
    let d = 1.0 - z.norm_sqr();
    [(1.0 + z.norm_sqr()) / d, 2.0 * z.re / d, 2.0 * z.im / d]
}

fn project(x: [f64; 3]) -> C64 {
    let n = (x[0] * x[0] - x[1] * x[1] - x[2] * x[2]).sqrt();
    let x = [x[0] / n, x[1] / n, x[2] / n];
    C64::new(x[1], x[2]) / (1.0 + x[0])
}

/// Hyperbolic distance in the disk.
pub fn disk_distance(a: C64, b: C64) -> f64 {
    let (x, y) = (lift(a), lift(b));
    (x[0] * y[0] - x[1] * y[1] - x[2] * y[2]).max(1.0).acosh()
}

/// Genus-2 mesh from the regular octagon with angles π/4.
///
/// The octagon is cut into sixteen equilateral triangles with angles π/4 (eight around the
/// centre and eight at the corners, through the side midpoints); each is subdivided `n` times
/// along its edges using normalized barycentric combinations on the hyperboloid. Reference
/// lengths are hyperbolic distances. Vertices are identified under the side pairings.
pub fn bolza_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::Mesh("subdivision level must be positive".into()));
    }
    let group = FuchsianGroup::octagon();
    let corner_r = crate::fuchsian::octagon_vertex_radius();
    let mid_r = (0.5 * (1.0 / (PI / 8.0).tan()).acosh()).tanh();
    let corner = |k: usize| C64::from_polar(corner_r, (k as f64 + 0.5) * PI / 4.0);
    let mid = |k: usize| C64::from_polar(mid_r, (k % 8) as f64 * PI / 4.0);
    let mut coarse = Vec::new();
    for k in 0..8 {
        coarse.push([C64::new(0.0, 0.0), mid(k), mid(k + 1)]);
        coarse.push([mid(k), corner(k), mid(k + 1)]);
    }
    let mut points: Vec<C64> = Vec::new();
    let mut faces_raw: Vec<[usize; 3]> = Vec::new();
    for tri in &coarse {
        let x: Vec<[f64; 3]> = tri.iter().map(|&z| lift(z)).collect();
        let mut local = vec![vec![0usize; n + 1]; n + 1];
        for i in 0..=n {
            for j in 0..=n - i {
                let (a, b, c) = ((n - i - j) as f64, i as f64, j as f64);
                let p = [0, 1, 2].map(|d| a * x[0][d] + b * x[1][d] + c * x[2][d]);
                local[i][j] = points.len();
                points.push(project(p));
            }
        }
        for i in 0..n {
            for j in 0..n - i {
                faces_raw.push([local[i][j], local[i + 1][j], local[i][j + 1]]);
                if i + j + 1 < n {
                    faces_raw.push([local[i + 1][j], local[i + 1][j + 1], local[i][j + 1]]);
                }
            }
        }
    }
    // Identify coincident points and points related by a side pairing.
    let mut parent: Vec<usize> = (0..points.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let n = p[y];
            p[y] = r;
            y = n;
        }
        r
    }
    let gens = group.generators_with_inverses();
    let boundary: Vec<usize> = (0..points.len()).filter(|&i| points[i].norm() > mid_r - 1e-9).collect();
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            if (points[a] - points[b]).norm() < 1e-9 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    for &a in &boundary {
        for g in &gens {
            let Some((img, _)) = g.apply(points[a]).finite() else { continue };
            for &b in &boundary {
                if (img - points[b]).norm() < 1e-9 {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut label = HashMap::new();
    let mut ids = vec![0usize; points.len()];
    for i in 0..points.len() {
        let r = find(&mut parent, i);
        let next = label.len();
        ids[i] = *label.entry(r).or_insert(next);
    }
    let faces: Vec<[usize; 3]> = faces_raw.iter().map(|t| t.map(|i| ids[i])).collect();
    let lengths: Vec<[f64; 3]> = faces_raw
        .iter()
        .map(|t| [disk_distance(points[t[0]], points[t[1]]), disk_distance(points[t[1]], points[t[2]]), disk_distance(points[t[2]], points[t[0]])])
        .collect();
    Mesh::new(label.len(), faces, lengths, 2)
}
