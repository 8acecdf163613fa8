use super::surface::{w_segment, DiscreteMetricSurface, Geometry};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowOptions {
    /// Largest and initial time step.
    pub dt: f64,
    /// Stop once `max|K − K̄|` falls below this.
    pub tol: f64,
    pub max_steps: usize,
    /// Consecutive halvings before giving up.
    pub max_halvings: usize,
    /// A step is rejected when `W` drops by more than this.
    pub w_slack: f64,
    /// Gauss–Legendre order for `ΔW` along each step.
    pub quadrature_order: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { dt: 1e-4, tol: 1e-4, max_steps: 200_000, max_halvings: 10, w_slack: 1e-10, quadrature_order: 4 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FlowRow {
    pub step: usize,
    pub t: f64,
    /// `W − W(start)`.
    pub w: f64,
    pub max_dev: f64,
    pub area: f64,
    /// `Σ Kᵢ daᵢ − 2πχ`.
    pub gauss_bonnet_error: f64,
    /// Measured `ΔW` of the step ending here and `¼(ΣK²da − (2πχ)²/A)·Δt` at its start.
    pub dw: f64,
    pub dw_predicted: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    MaxSteps,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowTrace {
    pub rows: Vec<FlowRow>,
    pub termination: Termination,
    pub rejected_steps: usize,
    #[serde(skip)]
    pub final_phi: Vec<f64>,
}

impl FlowTrace {
    pub fn accepted_steps(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    /// Largest drop of `W` between consecutive rows (0 when monotone).
    pub fn worst_decrease(&self) -> f64 {
        self.rows.windows(2).map(|w| (w[0].w - w[1].w).max(0.0)).fold(0.0, f64::max)
    }

    /// Largest `|ΔW − predicted|/predicted` over the accepted steps.
    pub fn worst_rate_mismatch(&self) -> f64 {
        self.rows[1..]
            .iter()
            .filter(|r| r.dw_predicted > 0.0)
            .map(|r| ((r.dw - r.dw_predicted) / r.dw_predicted).abs())
            .fold(0.0, f64::max)
    }

    pub fn worst_gauss_bonnet(&self) -> f64 {
        self.rows.iter().map(|r| r.gauss_bonnet_error.abs()).fold(0.0, f64::max)
    }

    pub fn final_deviation(&self) -> f64 {
        self.rows.last().map(|r| r.max_dev).unwrap_or(f64::INFINITY)
    }
}

fn row(step: usize, t: f64, w: f64, g: &Geometry, chi: f64, dw: f64, dw_predicted: f64) -> FlowRow {
    FlowRow {
        step,
        t,
        w,
        max_dev: g.max_deviation(),
        area: g.area,
        gauss_bonnet_error: g.total_curvature() - 2.0 * std::f64::consts::PI * chi,
        dw,
        dw_predicted,
    }
}

/// Area-normalized flow `dφᵢ/dt = −(Kᵢ − K̄)` by explicit Euler steps, each followed by the
/// uniform shift that restores the initial area. Steps that lower `W` or degenerate a
/// triangle are retried with half the step.
pub fn ricci_flow(surface: &DiscreteMetricSurface, options: &FlowOptions) -> Result<FlowTrace> {
    let chi = surface.euler_characteristic() as f64;
    if chi >= 0.0 {
        return Err(Error::Structural("the normalized flow needs negative euler characteristic".into()));
    }
    let mut s = surface.clone();
    let mut g = s.geometry()?;
    let a0 = g.area;
    let mut rows = vec![row(0, 0.0, 0.0, &g, chi, 0.0, 0.0)];
    let (mut t, mut w) = (0.0, 0.0);
    let mut dt = options.dt;
    let mut rejected = 0;
    let mut termination = Termination::MaxSteps;
    for step in 1..=options.max_steps {
        if g.max_deviation() < options.tol {
            termination = Termination::Converged;
            break;
        }
        let kbar = g.mean_curvature();
        let predicted_rate = 0.25 * (g.k.iter().zip(&g.da).map(|(k, a)| k * k * a).sum::<f64>() - (2.0 * std::f64::consts::PI * chi).powi(2) / g.area);
        let mut halvings = 0;
        loop {
            let attempt = (|| -> Result<(DiscreteMetricSurface, Geometry, f64)> {
                let euler: Vec<f64> = s.phi.iter().zip(&g.k).map(|(p, k)| p - dt * (k - kbar)).collect();
                let area = s.with_phi(euler.clone()).area()?;
                let c = 0.25 * (a0 / area).ln();
                let next: Vec<f64> = euler.iter().map(|p| p + c).collect();
                let dw = w_segment(&s, &next, options.quadrature_order, 1)?;
                let ns = s.with_phi(next);
                let ng = ns.geometry()?;
                Ok((ns, ng, dw))
            })();
            match attempt {
                Ok((ns, ng, dw)) if dw >= -options.w_slack => {
                    t += dt;
                    w += dw;
                    s = ns;
                    g = ng;
                    rows.push(row(step, t, w, &g, chi, dw, predicted_rate * dt));
                    dt = (2.0 * dt).min(options.dt);
                    break;
                }
                Ok(_) | Err(Error::Metric(_)) | Err(Error::Mesh(_)) | Err(Error::Path(_)) => {
                    rejected += 1;
                    halvings += 1;
                    if halvings >= options.max_halvings {
                        return Err(Error::Stiffness(halvings));
                    }
                    dt *= 0.5;
                }
                Err(e) => return Err(e),
            }
        }
    }
    if termination == Termination::MaxSteps && g.max_deviation() < options.tol {
        termination = Termination::Converged;
    }
    Ok(FlowTrace { rows, termination, rejected_steps: rejected, final_phi: s.phi })
}
