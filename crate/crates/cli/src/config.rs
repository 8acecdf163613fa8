use crate::error::CliError;
use rvlab::beltrami::SolverOptions;
use rvlab::conformal::TheodorsenOptions;
use rvlab::wvol::FlowOptions;
use rvlab::fuchsian::{GroupSpec, SeedSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Top-level TOML document; each subcommand reads its own table.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    pub ricci_flow: RicciFlowConfig,
    pub wvol: WvolConfig,
    pub beltrami_solve: BeltramiConfig,
    pub schwarzian: SchwarzianConfig,
    pub hessian_lab: HessianConfig,
    pub corrected_vr: CorrectedConfig,
    pub cusp_decay: CuspConfig,
}

/// Either a mesh file or a subdivided genus-2 octagon mesh, plus a random `φ` perturbation.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceConfig {
    pub mesh: Option<PathBuf>,
    pub subdivision: usize,
    pub perturbation: f64,
    pub smoothing: usize,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self { mesh: None, subdivision: 8, perturbation: 0.3, smoothing: 0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RicciFlowConfig {
    pub surface: SurfaceConfig,
    pub flow: FlowOptions,
    pub gauss_bonnet_tol: f64,
    /// Largest allowed `|ΔW − predicted|/|predicted|` per step.
    pub rate_tol: f64,
}

impl Default for RicciFlowConfig {
    fn default() -> Self {
        Self { surface: SurfaceConfig::default(), flow: FlowOptions::default(), gauss_bonnet_tol: 1e-9, rate_tol: 0.05 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WvolConfig {
    pub surface: SurfaceConfig,
    /// Amplitude of the random conformal change `u` and of the path bend.
    pub change: f64,
    pub bend: f64,
    pub smoothing: usize,
    /// Constant shift `c` for the `−πχc/2` check.
    pub shift: f64,
    pub quadrature_order: usize,
    pub tol: f64,
    /// Step of the central difference compared with the first variation.
    pub fd_step: f64,
    pub fd_tol: f64,
}

impl Default for WvolConfig {
    fn default() -> Self {
        Self {
            surface: SurfaceConfig { smoothing: 3, perturbation: 0.2, ..SurfaceConfig::default() },
            change: 0.15,
            bend: 0.1,
            smoothing: 2,
            shift: 0.4,
            quadrature_order: 6,
            tol: 1e-8,
            fd_step: 1e-4,
            fd_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MuSpec {
    /// `μ = k z/z̄` in the unit disk, zero outside. The solution is `z|z|^{2k/(1−k)}` inside, `z` outside.
    Radial { k: f64 },
    /// A constant `μ` on the unit disk, zero outside.
    Constant { value: [f64; 2] },
    /// `μ = φ̄(1−|z|²)²/8` for `φ = Σ cₙzⁿ`, reflected across the unit circle.
    Harmonic { coefficients: Vec<[f64; 2]> },
    /// As `harmonic`, with `φ` the Poincaré series of `seed` over `group`.
    Poincare { group: GroupSpec, seed: SeedSpec },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeltramiConfig {
    pub grid_size: usize,
    pub half_width: f64,
    pub mu: MuSpec,
    pub solver: SolverOptions,
    /// Upper bound on the returned L² Beltrami residual.
    pub residual_tol: f64,
    /// Relative L² error allowed against a closed-form solution, when there is one.
    pub oracle_tol: f64,
}

impl Default for BeltramiConfig {
    fn default() -> Self {
        Self {
            grid_size: 512,
            half_width: 1.25,
            mu: MuSpec::Radial { k: 0.5 },
            solver: SolverOptions::default(),
            residual_tol: 1e-10,
            oracle_tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    /// `(az + b)/(cz + d)`, entries as `[re, im]`.
    Moebius { a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2] },
    Polynomial { coefficients: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchwarzianConfig {
    pub grid_size: usize,
    pub half_width: f64,
    pub map: MapSpec,
    /// Bound on `sup |II₀|` for Möbius maps.
    pub tol: f64,
    /// Bound on the algebraic identities between `I`, `II`, `III`.
    pub identity_tol: f64,
}

impl Default for SchwarzianConfig {
    fn default() -> Self {
        Self {
            grid_size: 64,
            half_width: 0.5,
            map: MapSpec::Moebius { a: [1.0, 0.5], b: [0.2, 0.0], c: [0.3, 0.1], d: [1.0, 0.0] },
            tol: 1e-8,
            identity_tol: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    OneSided,
    Antidiagonal,
    Diagonal,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HessianConfig {
    pub direction: Direction,
    /// Each entry lists `[degree, re, im]` terms of one top-end quadratic differential.
    pub directions: Vec<Vec<[f64; 3]>>,
    pub grid_size: usize,
    pub half_width: f64,
    pub amplitudes: Vec<f64>,
    pub degree: usize,
    pub basis_size: usize,
    pub noise_floor: f64,
    pub solver: SolverOptions,
    pub theodorsen: TheodorsenOptions,
    /// Relative tolerance on responses.
    pub tol: f64,
    /// Relative tolerance on Hessian values.
    pub hessian_tol: f64,
}

impl Default for HessianConfig {
    fn default() -> Self {
        Self {
            direction: Direction::Antidiagonal,
            directions: vec![vec![[2.0, 1.0, 0.0]], vec![[3.0, 0.0, 1.0]], vec![[4.0, 0.6, 0.8]]],
            grid_size: 512,
            half_width: 4.0,
            amplitudes: vec![0.02, 0.01, 0.005],
            degree: 24,
            basis_size: 12,
            noise_floor: 1e-6,
            solver: SolverOptions::default(),
            theodorsen: TheodorsenOptions::default(),
            tol: 0.05,
            hessian_tol: 0.10,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrectedConfig {
    /// JSON gluing description.
    pub gluing: Option<PathBuf>,
    pub tol: f64,
    /// Rows of a skinning-operator matrix to test directly.
    pub skinning: Option<Vec<Vec<f64>>>,
    pub dim: usize,
    pub operators: usize,
    pub vectors: usize,
    pub planted_eigenvalue: f64,
}

impl Default for CorrectedConfig {
    fn default() -> Self {
        Self { gluing: None, tol: 1e-12, skinning: None, dim: 8, operators: 20, vectors: 1000, planted_eigenvalue: 1.2 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CuspConfig {
    /// Built-in profile name: `constant`, `linear` or `flat-oscillation`.
    pub family: String,
    /// CSV with columns `v,w,psi`; overrides `family`.
    pub profile: Option<PathBuf>,
    pub r_inf: f64,
}

impl Default for CuspConfig {
    fn default() -> Self {
        Self { family: "flat-oscillation".into(), profile: None, r_inf: 0.25 }
    }
}

/// A loaded config plus the directory its relative paths resolve against.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub file: ConfigFile,
    pub base: PathBuf,
}

impl Loaded {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_str(&text, base)
    }

    pub fn from_str(text: &str, base: PathBuf) -> Result<Self, CliError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Self { file, base })
    }

    pub fn defaults() -> Self {
        Self { file: ConfigFile::default(), base: PathBuf::from(".") }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() { p.to_path_buf() } else { self.base.join(p) }
    }

    /// Resolves and checks input files, returning their contents keyed by config field.
    pub fn inputs(&self, fields: &[(&str, Option<&PathBuf>)]) -> Result<BTreeMap<String, (PathBuf, Vec<u8>)>, CliError> {
        let mut out = BTreeMap::new();
        for (name, p) in fields {
            if let Some(p) = p {
                let path = self.resolve(p);
                let bytes = std::fs::read(&path).map_err(|e| CliError::Io(path.clone(), e))?;
                out.insert(name.to_string(), (path, bytes));
            }
        }
        Ok(out)
    }
}

/// SHA-256 over the subcommand, seed, effective settings and input file contents.
pub fn config_hash<S: Serialize>(command: &str, seed: u64, settings: &S, inputs: &BTreeMap<String, (PathBuf, Vec<u8>)>) -> String {
    let input_hashes: BTreeMap<&str, String> = inputs.iter().map(|(k, (_, bytes))| (k.as_str(), hex::encode(Sha256::digest(bytes)))).collect();
    let doc = serde_json::json!({
        "command": command,
        "seed": seed,
        "settings": settings,
        "inputs": input_hashes,
    });
    hex::encode(Sha256::digest(doc.to_string().as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let l = Loaded::from_str("", PathBuf::new()).unwrap();
        assert_eq!(l.file.hessian_lab.basis_size, 12);
        assert_eq!(l.file.ricci_flow.flow.dt, 1e-4);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(Loaded::from_str("[ricci_flow]\nbogus = 1\n", PathBuf::new()), Err(CliError::Config(_))));
    }

    #[test]
    fn hash_tracks_settings_and_inputs() {
        let none = BTreeMap::new();
        let a = config_hash("x", 1, &WvolConfig::default(), &none);
        assert_eq!(a, config_hash("x", 1, &WvolConfig::default(), &none));
        assert_ne!(a, config_hash("x", 2, &WvolConfig::default(), &none));
        let mut inputs = BTreeMap::new();
        inputs.insert("mesh".to_string(), (PathBuf::from("m"), b"abc".to_vec()));
        assert_ne!(a, config_hash("x", 1, &WvolConfig::default(), &inputs));
    }

    #[test]
    fn tagged_specs_parse() {
        let l = Loaded::from_str("[beltrami_solve.mu]\nkind = \"harmonic\"\ncoefficients = [[0,0],[0,0],[1,0]]\n", PathBuf::new()).unwrap();
        assert!(matches!(l.file.beltrami_solve.mu, MuSpec::Harmonic { ref coefficients } if coefficients.len() == 3));
        let text = "[beltrami_solve.mu]\nkind = \"poincare\"\ngroup = { kind = \"matrices\", name = \"h\", generators = [[2, 0, 0, 0.5]] }\nseed = { coefficients = [[1, 0]], cutoff = 2 }\n";
        let l = Loaded::from_str(text, PathBuf::new()).unwrap();
        let MuSpec::Poincare { group, seed } = &l.file.beltrami_solve.mu else { panic!("wrong variant") };
        assert_eq!(group.build().unwrap().generators.len(), 1);
        assert_eq!(seed.cutoff, 2);
    }
}
