mod commands;
mod config;
mod error;
mod output;

use clap::{Args, Parser, Subcommand};
use commands::Outcome;
use config::{Direction, Loaded};
use error::CliError;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rvlab", version, about = "Numerical experiments on renormalized and W-volumes")]
struct Cli {
    /// Worker threads (also read from RVLAB_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config; defaults apply to anything it leaves out.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized discrete Ricci flow with a W-volume trace.
    RicciFlow {
        #[command(flatten)]
        common: Common,
        /// Mesh file in the plain-text format.
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Largest time step.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        max_halvings: Option<usize>,
    },
    /// W-volume changes: path independence, constant shifts, first variation.
    Wvol {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mesh: Option<PathBuf>,
    },
    /// Solve a Beltrami equation on a grid.
    BeltramiSolve {
        #[command(flatten)]
        common: Common,
    },
    /// Schwarzian derivative and the tensors at infinity of a map.
    Schwarzian {
        #[command(flatten)]
        common: Common,
    },
    /// Finite-difference Hessian of the renormalized volume at the Fuchsian locus.
    HessianLab {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        direction: Option<Direction>,
        /// Number of monomials in the projection basis.
        #[arg(long)]
        basis_size: Option<usize>,
        #[arg(long)]
        grid_size: Option<usize>,
    },
    /// Gluing identity and corrected Hessian positivity.
    CorrectedVr {
        #[command(flatten)]
        common: Common,
        /// Gluing description (JSON).
        #[arg(long)]
        gluing: Option<PathBuf>,
    },
    /// Decay of the conformal factor in a cusp.
    CuspDecay {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        family: Option<String>,
    },
    /// Run every shipped config.
    Selftest {
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

pub(crate) fn dispatch(command: &str, cfg: &Loaded, out: &Path) -> Result<Outcome, CliError> {
    match command {
        "ricci-flow" => commands::surface::run_ricci_flow(cfg, out),
        "wvol" => commands::surface::run_wvol(cfg, out),
        "beltrami-solve" => commands::fields::run_beltrami_solve(cfg, out),
        "schwarzian" => commands::fields::run_schwarzian(cfg, out),
        "hessian-lab" => commands::hessian::run_hessian_lab(cfg, out),
        "corrected-vr" => commands::corrected::run_corrected_vr(cfg, out),
        "cusp-decay" => commands::cusp::run_cusp_decay(cfg, out),
        other => Err(CliError::Config(format!("unknown subcommand '{other}'"))),
    }
}

fn load(common: &Common) -> Result<Loaded, CliError> {
    let mut cfg = match &common.config {
        Some(p) => Loaded::from_path(p)?,
        None => Loaded::defaults(),
    };
    if let Some(s) = common.seed {
        cfg.file.seed = s;
    }
    Ok(cfg)
}

/// Flag paths are relative to the working directory, config paths to the config file.
fn absolute(p: &Path) -> PathBuf {
    std::env::current_dir().map(|d| d.join(p)).unwrap_or_else(|_| p.to_path_buf())
}

fn out_dir(common: &Common, cfg: &Loaded, command: &str) -> PathBuf {
    match (&common.out, &cfg.file.output_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => cfg.resolve(o),
        (None, None) => PathBuf::from("rvlab-out").join(command),
    }
}

fn run(cli: Cli) -> Result<(Outcome, u8), CliError> {
    let (name, common, mut cfg) = match &cli.command {
        Command::Selftest { out } => {
            let dir = out.clone().unwrap_or_else(|| PathBuf::from("rvlab-out").join("selftest"));
            return commands::selftest::run_selftest(&dir);
        }
        Command::RicciFlow { common, .. } => ("ricci-flow", common, load(common)?),
        Command::Wvol { common, .. } => ("wvol", common, load(common)?),
        Command::BeltramiSolve { common } => ("beltrami-solve", common, load(common)?),
        Command::Schwarzian { common } => ("schwarzian", common, load(common)?),
        Command::HessianLab { common, .. } => ("hessian-lab", common, load(common)?),
        Command::CorrectedVr { common, .. } => ("corrected-vr", common, load(common)?),
        Command::CuspDecay { common, .. } => ("cusp-decay", common, load(common)?),
    };
    let f = &mut cfg.file;
    match &cli.command {
        Command::RicciFlow { mesh, tol, max_steps, dt, max_halvings, .. } => {
            let r = &mut f.ricci_flow;
            if let Some(m) = mesh {
                r.surface.mesh = Some(absolute(m));
            }
            r.flow.tol = tol.unwrap_or(r.flow.tol);
            r.flow.max_steps = max_steps.unwrap_or(r.flow.max_steps);
            r.flow.dt = dt.unwrap_or(r.flow.dt);
            r.flow.max_halvings = max_halvings.unwrap_or(r.flow.max_halvings);
        }
        Command::Wvol { mesh: Some(m), .. } => f.wvol.surface.mesh = Some(absolute(m)),
        Command::HessianLab { direction, basis_size, grid_size, .. } => {
            let h = &mut f.hessian_lab;
            h.direction = direction.unwrap_or(h.direction);
            h.basis_size = basis_size.unwrap_or(h.basis_size);
            h.grid_size = grid_size.unwrap_or(h.grid_size);
        }
        Command::CorrectedVr { gluing: Some(g), .. } => f.corrected_vr.gluing = Some(absolute(g)),
        Command::CuspDecay { family: Some(fam), .. } => f.cusp_decay.family = fam.clone(),
        _ => {}
    }
    let out = out_dir(common, &cfg, name);
    let o = dispatch(name, &cfg, &out)?;
    let code = if o.pass { 0 } else { 1 };
    Ok((o, code))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| std::env::var("RVLAB_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let command = std::env::args().nth(1).unwrap_or_default();
    match run(cli) {
        Ok((o, code)) => {
            let verdict = if code == 0 { "PASS" } else { "FAIL" };
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{verdict} {}", o.summary);
            let _ = writeln!(out, "config hash {}", o.config_hash);
            for p in &o.written {
                let _ = writeln!(out, "wrote {}", p.display());
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {command}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
