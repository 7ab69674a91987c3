use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::FlowConfig;
use super::monitor::{fit_bound, BoundShapeReport, Diagnostics, GradientMonitor, StepResiduals};
use super::step::{step, FlowState};
use crate::error::{Error, Result};
use crate::submanifold::{write_snapshot, ImmersedPatch};

pub const MONITOR_HEADER: [&str; 12] = [
    "step",
    "s",
    "dt",
    "sup_v",
    "min_g_eig",
    "sup_H2",
    "sup_A2",
    "area",
    "K_min",
    "res_uflow",
    "res_H2",
    "res_area",
];

/// One row per accepted step; disabled monitors are `None`. `k_min` is
/// `Some(None)` when the search grid is exhausted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorRow {
    pub step: usize,
    pub s: f64,
    pub dt: f64,
    pub sup_v: Option<f64>,
    pub min_g_eig: Option<f64>,
    pub sup_h2: Option<f64>,
    pub sup_a2: Option<f64>,
    pub area: Option<f64>,
    pub k_min: Option<Option<f64>>,
    pub res_uflow: Option<f64>,
    pub res_h2: Option<f64>,
    pub res_area: Option<f64>,
}

impl MonitorRow {
    fn fields(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        vec![
            self.step.to_string(),
            self.s.to_string(),
            self.dt.to_string(),
            opt(self.sup_v),
            opt(self.min_g_eig),
            opt(self.sup_h2),
            opt(self.sup_a2),
            opt(self.area),
            match self.k_min {
                None => String::new(),
                Some(None) => "inf".into(),
                Some(Some(k)) => k.to_string(),
            },
            opt(self.res_uflow),
            opt(self.res_h2),
            opt(self.res_area),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub s: f64,
    pub patch: ImmersedPatch,
}

#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    /// Initial state, then every `snapshot_every`-th step.
    pub snapshots: Vec<Snapshot>,
    pub rows: Vec<MonitorRow>,
    /// Last accepted state.
    pub last: FlowState,
    pub s: f64,
    pub steps: usize,
    pub rejections: usize,
    /// Residuals of the last accepted step.
    pub last_residuals: Option<StepResiduals>,
    /// Smallest `|H|^2_+` and `|A|^2_+` seen at any node of any state.
    pub min_h2: f64,
    pub min_a2: f64,
    /// Set when the run stopped on a step that could not be accepted.
    pub halt: Option<String>,
}

impl FlowTrajectory {
    /// Fits of `sup |H|^2_+` and `sup |A|^2_+` against `C (1 + 1/s)`.
    pub fn bound_shape(&self) -> BoundShapeReport {
        let series = |pick: fn(&MonitorRow) -> Option<f64>| {
            self.rows
                .iter()
                .filter_map(|r| pick(r).map(|y| (r.step, r.s, y)))
                .collect::<Vec<_>>()
        };
        BoundShapeReport {
            h2: fit_bound(&series(|r| r.sup_h2)),
            a2: fit_bound(&series(|r| r.sup_a2)),
        }
    }

    pub fn write_monitor_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(MONITOR_HEADER)?;
        for row in &self.rows {
            w.write_record(row.fields())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `snapshot_<step>.csv` for every kept state; returns the paths.
    pub fn write_snapshots(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut paths = Vec::new();
        for snap in &self.snapshots {
            let geom = snap.patch.geometry()?;
            let path = dir.join(format!("snapshot_{:06}.csv", snap.step));
            let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
            write_snapshot(file, &snap.patch, &geom, snap.s)?;
            paths.push(path);
        }
        Ok(paths)
    }
}

/// Integrates from `initial` until `max_steps`, `s_end`, or a halt. A halt
/// is reported in the trajectory, which keeps the last valid state; only
/// configuration and non-recoverable numerical errors are returned as `Err`.
pub fn run(cfg: &FlowConfig, initial: ImmersedPatch) -> Result<FlowTrajectory> {
    cfg.validate()?;
    let toggles = cfg.monitors;
    let state = FlowState::new(initial)?;
    let mut gradient = GradientMonitor::new(&state, cfg.k_grid.values());
    let mut diag = Diagnostics::new(&state, &toggles);
    let mut traj = FlowTrajectory {
        snapshots: vec![Snapshot {
            step: 0,
            s: 0.0,
            patch: state.patch.clone(),
        }],
        rows: Vec::new(),
        min_h2: diag.min_h2_metric,
        min_a2: diag.min_a2_metric,
        last: state,
        s: 0.0,
        steps: 0,
        rejections: 0,
        last_residuals: None,
        halt: None,
    };

    for k in 1..=cfg.max_steps {
        let mut dt = traj.last.proposed_dt(cfg);
        if let Some(end) = cfg.s_end {
            let left = end - traj.s;
            if left <= 1e-12 * end {
                break;
            }
            dt = dt.min(left);
        }
        let out = match step(&traj.last, dt, cfg, traj.s) {
            Ok(out) => out,
            Err(e @ Error::Halted { .. }) => {
                traj.halt = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        let next_diag = Diagnostics::new(&out.state, &toggles);
        let res = StepResiduals::between(&diag, &next_diag, &out.state.geometry.interior, out.dt, cfg.area_sign);
        traj.s += out.dt;
        traj.steps = k;
        traj.rejections += out.rejections;
        traj.min_h2 = traj.min_h2.min(next_diag.min_h2_metric);
        traj.min_a2 = traj.min_a2.min(next_diag.min_a2_metric);
        let st = &out.state;
        let k_min = gradient.observe(st);
        if toggles.any() {
            let basic = toggles.basic;
            traj.rows.push(MonitorRow {
                step: k,
                s: traj.s,
                dt: out.dt,
                sup_v: basic.then(|| st.sup_tilt()),
                min_g_eig: basic.then(|| st.min_metric_eig()),
                sup_h2: basic.then(|| st.sup_h2()),
                sup_a2: basic.then(|| st.sup_a2()),
                area: basic.then_some(next_diag.area),
                k_min: toggles.gradient.then_some(k_min),
                res_uflow: res.uflow_max(),
                res_h2: res.h2_max(),
                res_area: toggles.area.then_some(res.area.abs()),
            });
        }
        if cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0 {
            traj.snapshots.push(Snapshot {
                step: k,
                s: traj.s,
                patch: st.patch.clone(),
            });
        }
        traj.last = out.state;
        traj.last_residuals = Some(res);
        diag = next_diag;
    }
    Ok(traj)
}
