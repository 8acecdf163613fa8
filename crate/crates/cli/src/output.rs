//! Artifact writers. Every file carries the schema version, the config hash and the tolerance used.

use crate::error::CliError;
use num_complex::Complex64 as C64;
use rvlab::grid::Grid;
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const SCHEMA: u32 = 1;
pub const GRID_MAGIC: &[u8; 8] = b"RVLBGRID";

pub struct Artifacts {
    pub dir: PathBuf,
    pub command: String,
    pub config_hash: String,
    pub tolerance: Value,
    pub written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path, command: &str, config_hash: String, tolerance: Value) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
        Ok(Self { dir: dir.to_path_buf(), command: command.into(), config_hash, tolerance, written: Vec::new() })
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::Io(path.clone(), e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    fn envelope(&self, body: Value) -> Value {
        json!({
            "schema": SCHEMA,
            "command": self.command,
            "config_hash": self.config_hash,
            "tolerance": self.tolerance,
            "result": body,
        })
    }

    pub fn json<T: Serialize>(&mut self, name: &str, pass: bool, body: &T) -> Result<PathBuf, CliError> {
        let body = serde_json::to_value(body).map_err(|e| CliError::Config(e.to_string()))?;
        let mut doc = self.envelope(body);
        doc["pass"] = json!(pass);
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Config(e.to_string()))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// CSV with a `#` comment line carrying the provenance fields.
    pub fn csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<PathBuf, CliError> {
        let mut buf = format!("# schema={SCHEMA} command={} config_hash={} tolerance={}\n", self.command, self.config_hash, self.tolerance).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            for r in rows {
                w.serialize(r).map_err(|e| CliError::Config(e.to_string()))?;
            }
            w.flush().map_err(|e| CliError::Io(self.dir.join(name), e))?;
        }
        self.write_bytes(name, &buf)
    }

    pub fn mesh_text(&mut self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let s = format!("# schema={SCHEMA} command={} config_hash={}\n{text}", self.command, self.config_hash);
        self.write_bytes(name, s.as_bytes())
    }

    /// Binary grid file plus `<stem>.json` sidecar naming the components.
    pub fn grid(&mut self, stem: &str, grid: &Grid, components: &[(&str, Vec<C64>)], meta: Value) -> Result<PathBuf, CliError> {
        let hash = hex::decode(&self.config_hash).unwrap_or_default();
        let bytes = encode_grid(grid, components.iter().map(|c| c.1.as_slice()), &hash);
        let path = self.write_bytes(&format!("{stem}.bin"), &bytes)?;
        let sidecar = self.envelope(json!({
            "file": format!("{stem}.bin"),
            "nx": grid.nx,
            "ny": grid.ny,
            "origin": [grid.origin.re, grid.origin.im],
            "spacing": grid.h,
            "components": components.iter().map(|c| c.0).collect::<Vec<_>>(),
            "layout": "per component, row-major (j outer, i inner), little-endian f64 pairs (re, im)",
            "meta": meta,
        }));
        let mut text = serde_json::to_string_pretty(&sidecar).map_err(|e| CliError::Config(e.to_string()))?;
        text.push('\n');
        self.write_bytes(&format!("{stem}.json"), text.as_bytes())?;
        Ok(path)
    }
}

/// Header: magic, version, nx, ny, component count (u32), origin re/im and spacing (f64),
/// 32-byte config hash. Body: each component's samples in row-major order.
pub fn encode_grid<'a>(grid: &Grid, components: impl ExactSizeIterator<Item = &'a [C64]>, hash: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(GRID_MAGIC);
    let n = components.len();
    for v in [1u32, grid.nx as u32, grid.ny as u32, n as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in [grid.origin.re, grid.origin.im, grid.h] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let mut h = [0u8; 32];
    h[..hash.len().min(32)].copy_from_slice(&hash[..hash.len().min(32)]);
    out.extend_from_slice(&h);
    for c in components {
        for z in c {
            out.write_all(&z.re.to_le_bytes()).unwrap();
            out.write_all(&z.im.to_le_bytes()).unwrap();
        }
    }
    out
}

#[cfg(test)]
/// Inverse of [`encode_grid`]: the grid, the hash bytes and the component samples.
pub fn decode_grid(bytes: &[u8]) -> Result<(Grid, [u8; 32], Vec<Vec<C64>>), CliError> {
    let bad = || CliError::Config("malformed grid file".into());
    if bytes.len() < 80 || &bytes[..8] != GRID_MAGIC {
        return Err(bad());
    }
    let u = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (nx, ny, n) = (u(12), u(16), u(20));
    let grid = Grid { nx, ny, origin: C64::new(f(24), f(32)), h: f(40) };
    let hash: [u8; 32] = bytes[48..80].try_into().map_err(|_| bad())?;
    let body = &bytes[80..];
    if u(8) != 1 || body.len() != n * nx * ny * 16 {
        return Err(bad());
    }
    let comps = body
        .chunks(nx * ny * 16)
        .map(|c| c.chunks(16).map(|p| C64::new(f64::from_le_bytes(p[..8].try_into().unwrap()), f64::from_le_bytes(p[8..].try_into().unwrap()))).collect())
        .collect();
    Ok((grid, hash, comps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_round_trip() {
        let g = Grid::centered(4, 1.0);
        let a: Vec<C64> = (0..g.len()).map(|k| C64::new(k as f64, -(k as f64))).collect();
        let b: Vec<C64> = g.points().collect();
        let hash = [7u8; 32];
        let bytes = encode_grid(&g, [a.as_slice(), b.as_slice()].into_iter(), &hash);
        let (g2, h2, comps) = decode_grid(&bytes).unwrap();
        assert!(g2.same_as(&g));
        assert_eq!(h2, hash);
        assert_eq!(comps, vec![a, b]);
        assert!(decode_grid(&bytes[..bytes.len() - 1]).is_err());
    }
}
