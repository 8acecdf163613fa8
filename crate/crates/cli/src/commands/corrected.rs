use super::Outcome;
use crate::config::{config_hash, Loaded};
use crate::error::CliError;
use crate::output::Artifacts;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rvlab::corrected::{corrected_hessian, gluing_identity_check, GluingDescription, SkinningOperator};
use serde_json::json;
use std::path::Path;

fn random_symmetric(rng: &mut ChaCha8Rng, eigenvalues: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = eigenvalues.len();
    let q = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
    let m = &q * DMatrix::from_diagonal(&DVector::from_column_slice(eigenvalues)) * q.transpose();
    (m, q)
}

pub fn run_corrected_vr(cfg: &Loaded, out: &Path) -> Result<Outcome, CliError> {
    let c = &cfg.file.corrected_vr;
    let seed = cfg.file.seed;
    let inputs = cfg.inputs(&[("gluing", c.gluing.as_ref())])?;
    let hash = config_hash("corrected-vr", seed, c, &inputs);
    if c.dim == 0 {
        return Err(CliError::Config("dim must be positive".into()));
    }

    let gluing = match inputs.get("gluing") {
        Some((path, bytes)) => {
            let text = std::str::from_utf8(bytes).map_err(|_| CliError::Config(format!("{} is not UTF-8", path.display())))?;
            let g = GluingDescription::from_json(text)?;
            Some(gluing_identity_check(&g, c.tol)?)
        }
        None => None,
    };

    let given = match &c.skinning {
        Some(rows) => {
            let n = rows.len();
            if n == 0 || rows.iter().any(|r| r.len() != n) {
                return Err(CliError::Config("skinning matrix must be square and non-empty".into()));
            }
            let op = SkinningOperator::new(DMatrix::from_row_iterator(n, n, rows.iter().flatten().copied()))?;
            let spectrum = op.symmetric_spectrum();
            let contraction = spectrum.iter().all(|l| l.abs() < 1.0);
            let eig = nalgebra::SymmetricEigen::new(op.symmetric_part());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut min = f64::INFINITY;
            let probes = eig.eigenvectors.column_iter().map(|v| v.into_owned()).chain((0..c.vectors).map(|_| DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))));
            for v in probes {
                min = min.min(corrected_hessian(&op, &v)?.symmetrized / v.norm_squared());
            }
            Some(json!({
                "spectrum": spectrum,
                "symmetric": op.is_symmetric(1e-12),
                "contraction": contraction,
                "min_normalized_hessian": min,
                "positive": min > 0.0,
                "consistent": (min > 0.0) == contraction,
            }))
        }
        None => None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let (mut positive, mut planted_detected, mut min_ratio) = (0usize, 0usize, f64::INFINITY);
    for _ in 0..c.operators {
        let mut ev: Vec<f64> = (0..c.dim).map(|_| rng.gen_range(-0.999..0.999)).collect();
        let (m, q) = random_symmetric(&mut rng, &ev);
        let op = SkinningOperator::new(m)?;
        for _ in 0..c.vectors {
            let v = DVector::from_fn(c.dim, |_, _| rng.gen_range(-1.0..1.0));
            let h = corrected_hessian(&op, &v)?.symmetrized;
            min_ratio = min_ratio.min(h / v.norm_squared());
            if h > 0.0 {
                positive += 1;
            }
        }
        ev[0] = c.planted_eigenvalue;
        let planted = SkinningOperator::new(&q * DMatrix::from_diagonal(&DVector::from_vec(ev)) * q.transpose())?;
        let h = corrected_hessian(&planted, &q.column(0).into_owned())?.symmetrized;
        if (h <= 0.0) == (c.planted_eigenvalue.abs() >= 1.0) {
            planted_detected += 1;
        }
    }
    let trials = c.operators * c.vectors;

    let pass = gluing.as_ref().map_or(true, |g| g.pass)
        && given.as_ref().map_or(true, |g| g["consistent"] == json!(true))
        && positive == trials
        && planted_detected == c.operators;
    let tol = json!({ "gluing": c.tol });
    let mut a = Artifacts::new(out, "corrected-vr", hash.clone(), tol)?;
    let summary = json!({
        "gluing": gluing,
        "skinning": given,
        "random_contractions": {
            "dim": c.dim,
            "operators": c.operators,
            "vectors_per_operator": c.vectors,
            "positive": positive,
            "min_normalized_hessian": min_ratio,
            "planted_eigenvalue": c.planted_eigenvalue,
            "planted_detected": planted_detected,
        },
    });
    a.json("corrected-vr.json", pass, &summary)?;
    let glue = gluing.as_ref().map_or(String::new(), |g| format!("gluing residual {:.1e}, ", g.residual));
    Ok(Outcome {
        pass,
        summary: format!("{glue}corrected Hessian positive {positive}/{trials}, planted eigenvalue detected {planted_detected}/{}", c.operators),
        config_hash: hash,
        written: a.written,
    })
}
