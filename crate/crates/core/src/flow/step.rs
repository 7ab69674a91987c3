use nalgebra::DVector;

use super::config::{DtPolicy, FlowConfig, Integrator};
use crate::error::{Error, Result};
use crate::submanifold::{Geometry, ImmersedPatch};

/// A patch together with its derived geometry; only spacelike states exist.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub patch: ImmersedPatch,
    pub geometry: Geometry,
}

impl FlowState {
    pub fn new(patch: ImmersedPatch) -> Result<Self> {
        let geometry = patch.geometry()?;
        Ok(Self { patch, geometry })
    }

    fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.patch.len()).filter(|&p| self.geometry.interior[p])
    }

    pub fn sup_a2(&self) -> f64 {
        self.interior().map(|p| self.geometry.curvature[p].a2).fold(0.0, f64::max)
    }

    pub fn sup_h2(&self) -> f64 {
        self.interior().map(|p| self.geometry.curvature[p].h2).fold(0.0, f64::max)
    }

    pub fn sup_tilt(&self) -> f64 {
        self.interior().map(|p| self.geometry.frames[p].tilt).fold(0.0, f64::max)
    }

    pub fn min_metric_eig(&self) -> f64 {
        self.interior()
            .map(|p| self.geometry.frames[p].min_eig)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn area(&self) -> f64 {
        self.patch.area(&self.geometry.frames)
    }

    /// Mean curvature vector on interior nodes, zero on the frozen margin.
    pub fn velocity(&self) -> Vec<DVector<f64>> {
        (0..self.patch.len())
            .map(|p| {
                if self.geometry.interior[p] {
                    self.geometry.curvature[p].h_vec.clone()
                } else {
                    DVector::zeros(self.patch.ambient.dim())
                }
            })
            .collect()
    }

    /// `c_cfl h_min^2 / (1 + sup |A|^2_+)`.
    pub fn cfl_dt(&self, c_cfl: f64) -> f64 {
        let h = self.patch.grid.spacing.iter().copied().fold(f64::INFINITY, f64::min);
        c_cfl * h * h / (1.0 + self.sup_a2())
    }

    /// Step requested by the configured policy before any rejection.
    pub fn proposed_dt(&self, cfg: &FlowConfig) -> f64 {
        match cfg.dt_policy {
            DtPolicy::Fixed => cfg.dt,
            DtPolicy::Cfl => self.cfl_dt(cfg.c_cfl).min(cfg.dt),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: FlowState,
    pub dt: f64,
    pub rejections: usize,
}

fn advance(state: &FlowState, dt: f64, velocity: &[DVector<f64>], floor: f64) -> Result<FlowState> {
    let ambient = &state.patch.ambient;
    let f: Vec<DVector<f64>> = state
        .patch
        .f
        .iter()
        .zip(velocity)
        .map(|(x, v)| x + v * dt)
        .collect();
    for x in &f {
        ambient.check_domain(x)?;
    }
    let next = FlowState::new(state.patch.with_positions(f))?;
    if let Some((node, fr)) = next
        .geometry
        .frames
        .iter()
        .enumerate()
        .find(|(_, fr)| fr.min_eig <= floor)
    {
        return Err(Error::NotSpacelike {
            node,
            min_eig: fr.min_eig,
        });
    }
    Ok(next)
}

fn try_step(state: &FlowState, dt: f64, cfg: &FlowConfig) -> Result<FlowState> {
    let floor = cfg.min_eig_floor;
    match cfg.integrator {
        Integrator::Euler => advance(state, dt, &state.velocity(), floor),
        Integrator::Rk2 => {
            let mid = advance(state, 0.5 * dt, &state.velocity(), floor)?;
            advance(state, dt, &mid.velocity(), floor)
        }
    }
}

fn recoverable(e: &Error) -> bool {
    matches!(
        e,
        Error::NotSpacelike { .. } | Error::DegenerateNormal { .. } | Error::OutsideDomain { .. }
    )
}

/// One step of `df/ds = H` on the interior nodes. Steps that leave the
/// spacelike region (or the chart) are retried with half the step, at most
/// `cfg.max_retries` times.
pub fn step(state: &FlowState, dt: f64, cfg: &FlowConfig, s: f64) -> Result<StepOutcome> {
    let mut dt = dt;
    let mut last = None;
    for rejections in 0..=cfg.max_retries {
        match try_step(state, dt, cfg) {
            Ok(next) => {
                return Ok(StepOutcome {
                    state: next,
                    dt,
                    rejections,
                })
            }
            Err(e) if recoverable(&e) => last = Some(e),
            Err(e) => return Err(e),
        }
        dt *= 0.5;
    }
    Err(Error::Halted {
        s,
        retries: cfg.max_retries,
        reason: last.map(|e| e.to_string()).unwrap_or_default(),
    })
}
