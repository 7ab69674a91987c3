use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtPolicy {
    /// Use `dt` as given (still halved on rejection).
    Fixed,
    /// `dt = c_cfl h_min^2 / (1 + sup |A|^2_+)`, recomputed every step.
    Cfl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Euler,
    /// Explicit midpoint.
    Rk2,
}

/// Which columns of the monitor CSV are filled. With everything off no rows
/// are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorToggles {
    /// `sup_v, min_g_eig, sup_H2, sup_A2, area`.
    pub basic: bool,
    pub gradient: bool,
    pub uflow: bool,
    pub curvature: bool,
    pub area: bool,
}

impl Default for MonitorToggles {
    fn default() -> Self {
        Self::all()
    }
}

impl MonitorToggles {
    pub fn all() -> Self {
        Self {
            basic: true,
            gradient: true,
            uflow: true,
            curvature: true,
            area: true,
        }
    }

    pub fn none() -> Self {
        Self {
            basic: false,
            gradient: false,
            uflow: false,
            curvature: false,
            area: false,
        }
    }

    pub fn any(&self) -> bool {
        self.basic || self.gradient || self.uflow || self.curvature || self.area
    }
}

/// `{0}` together with `points` geometric values in `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for KGrid {
    fn default() -> Self {
        Self {
            min: 1e-2,
            max: 1e3,
            points: 61,
        }
    }
}

impl KGrid {
    pub fn values(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        if self.points == 1 {
            out.push(self.min);
        } else {
            let ratio = (self.max / self.min).ln() / (self.points - 1) as f64;
            out.extend((0..self.points).map(|k| self.min * (ratio * k as f64).exp()));
            *out.last_mut().expect("nonempty") = self.max;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub dt_policy: DtPolicy,
    /// Step for the fixed policy; an upper cap for the CFL policy.
    pub dt: f64,
    pub c_cfl: f64,
    pub integrator: Integrator,
    pub max_steps: usize,
    pub s_end: Option<f64>,
    /// Keep every k-th state (0 keeps only the initial one).
    pub snapshot_every: usize,
    pub max_retries: usize,
    /// A step is rejected when the smallest induced-metric eigenvalue falls
    /// to this value or below.
    pub min_eig_floor: f64,
    pub monitors: MonitorToggles,
    pub k_grid: KGrid,
    /// Sign in `dA/ds = area_sign * int G(H, H)`; see `calibrate_area_sign`.
    pub area_sign: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dt_policy: DtPolicy::Cfl,
            dt: 1.0,
            c_cfl: 0.2,
            integrator: Integrator::Euler,
            max_steps: 100,
            s_end: None,
            snapshot_every: 0,
            max_retries: 10,
            min_eig_floor: 0.0,
            monitors: MonitorToggles::all(),
            k_grid: KGrid::default(),
            area_sign: -1.0,
        }
    }
}

impl FlowConfig {
    pub fn fixed(dt: f64, max_steps: usize) -> Self {
        Self {
            dt_policy: DtPolicy::Fixed,
            dt,
            max_steps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive and finite, got {}", self.dt));
        }
        if !(self.c_cfl > 0.0 && self.c_cfl <= 1.0) {
            return bad(format!("c_cfl must lie in (0, 1], got {}", self.c_cfl));
        }
        if let Some(s) = self.s_end {
            if !(s > 0.0) {
                return bad(format!("s_end must be positive, got {s}"));
            }
        }
        if self.area_sign != 1.0 && self.area_sign != -1.0 {
            return bad(format!("area_sign must be +1 or -1, got {}", self.area_sign));
        }
        let k = &self.k_grid;
        if !(k.min > 0.0 && k.max >= k.min && k.max.is_finite()) || k.points == 0 {
            return bad(format!("K grid needs 0 < min <= max and >= 1 point, got {k:?}"));
        }
        if !(self.min_eig_floor >= 0.0) {
            return bad("min_eig_floor must be non-negative".into());
        }
        Ok(())
    }
}
