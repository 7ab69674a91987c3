//! Runtime monitors: consistency residuals of the evolution identities, the
//! gradient-estimate constant and the curvature bound shape.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{FlowConfig, MonitorToggles};
use super::step::{step, FlowState};
use crate::error::Result;
use crate::submanifold::height_field;

/// Per-state fields entering the residual monitors.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub heights: Vec<DVector<f64>>,
    /// `Lap u - g^ij (D dt)_ij`, interior nodes only.
    pub uflow_rhs: Option<Vec<DVector<f64>>>,
    pub h2: Vec<f64>,
    /// `Lap |H|^2_+ - 2 |DH|^2_+ - 2 |H.A|^2_+`, flat ambients only.
    pub h2_rhs: Option<Vec<f64>>,
    pub area: f64,
    /// `int G(H, H) dmu` over the interior.
    pub gh_integral: f64,
    /// Smallest `-G(H, H)` and `-sum_ij G(II_ij, II_ij)` over the interior,
    /// evaluated with the ambient metric rather than in the normal frame.
    pub min_h2_metric: f64,
    pub min_a2_metric: f64,
}

impl Diagnostics {
    pub fn new(state: &FlowState, toggles: &MonitorToggles) -> Self {
        let patch = &state.patch;
        let geom = &state.geometry;
        let heights = height_field(geom);
        let uflow_rhs = toggles.uflow.then(|| {
            let lap = patch.laplacian(&geom.frames, &heights, &patch.height_shifts());
            lap.into_iter()
                .enumerate()
                .map(|(p, l)| {
                    if geom.interior[p] {
                        l - &geom.frames[p].hess_t_trace
                    } else {
                        l
                    }
                })
                .collect()
        });
        let h2: Vec<f64> = geom.curvature.iter().map(|c| c.h2).collect();
        let h2_rhs = (toggles.curvature && patch.ambient.is_flat()).then(|| h2_evolution_rhs(state, &h2));

        let vol = patch.grid.cell_volume();
        let mut gh_integral = 0.0;
        let mut min_h2_metric = f64::INFINITY;
        let mut min_a2_metric = f64::INFINITY;
        for p in (0..patch.len()).filter(|&p| geom.interior[p]) {
            let g = patch.ambient.metric(&patch.f[p]);
            let fr = &geom.frames[p];
            let cv = &geom.curvature[p];
            let ghh = cv.h_vec.dot(&(&g * &cv.h_vec));
            gh_integral += ghh * fr.sqrt_det * vol;
            min_h2_metric = min_h2_metric.min(-ghh);
            let n = fr.tau.len();
            let mut a2 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let mut ii = DVector::zeros(cv.h_vec.len());
                    for (al, blk) in cv.a.iter().enumerate() {
                        ii.axpy(blk[(i, j)], &fr.nu[al], 1.0);
                    }
                    a2 -= ii.dot(&(&g * &ii));
                }
            }
            min_a2_metric = min_a2_metric.min(a2);
        }
        Self {
            heights,
            uflow_rhs,
            h2,
            h2_rhs,
            area: state.area(),
            gh_integral,
            min_h2_metric,
            min_a2_metric,
        }
    }
}

/// Normal-bundle derivative `(D_i H)_b = tau_i(H_b) - sum_a H_a C_iab` at a node.
fn normal_gradient(state: &FlowState, h_fields: &[DVector<f64>], p: usize) -> Vec<DVector<f64>> {
    let grid = &state.patch.grid;
    let fr = &state.geometry.frames[p];
    let cv = &state.geometry.curvature[p];
    let n = grid.dim();
    let dh: Vec<DVector<f64>> = (0..n).map(|k| grid.d1(h_fields, &[], p, k)).collect();
    (0..n)
        .map(|i| {
            let mut along = DVector::zeros(cv.h.len());
            for k in 0..n {
                along.axpy(fr.e[(i, k)], &dh[k], 1.0);
            }
            along - cv.c[i].transpose() * &cv.h
        })
        .collect()
}

fn h2_evolution_rhs(state: &FlowState, h2: &[f64]) -> Vec<f64> {
    let patch = &state.patch;
    let geom = &state.geometry;
    let h_fields: Vec<DVector<f64>> = geom.curvature.iter().map(|c| c.h.clone()).collect();
    let scalars: Vec<DVector<f64>> = h2.iter().map(|&x| DVector::from_element(1, x)).collect();
    let lap = patch.laplacian(&geom.frames, &scalars, &[]);
    (0..patch.len())
        .into_par_iter()
        .map(|p| {
            if !geom.interior[p] {
                return 0.0;
            }
            let grad2: f64 = normal_gradient(state, &h_fields, p).iter().map(|v| v.norm_squared()).sum();
            lap[p][0] - 2.0 * grad2 - 2.0 * geom.curvature[p].ha2
        })
        .collect()
}

/// Signed per-node residuals of one accepted step. Right-hand sides are
/// averaged over both ends of the step, so each residual is `O(dt + h^2)`.
#[derive(Debug, Clone)]
pub struct StepResiduals {
    /// `(u(s+dt) - u(s))/dt - mean(Lap u - g^ij (D dt)_ij)`.
    pub uflow: Option<Vec<DVector<f64>>>,
    /// `(|H|^2(s+dt) - |H|^2(s))/dt - mean(Lap |H|^2 - 2|DH|^2 - 2|H.A|^2)`.
    pub h2: Option<Vec<f64>>,
    /// `(A(s+dt) - A(s))/dt - area_sign * mean(int G(H, H))`.
    pub area: f64,
}

impl StepResiduals {
    pub fn between(prev: &Diagnostics, next: &Diagnostics, interior: &[bool], dt: f64, area_sign: f64) -> Self {
        let uflow = match (&prev.uflow_rhs, &next.uflow_rhs) {
            (Some(r0), Some(r1)) => Some(
                (0..interior.len())
                    .map(|p| {
                        if !interior[p] {
                            return DVector::zeros(r0[p].len());
                        }
                        (&next.heights[p] - &prev.heights[p]) / dt - (&r0[p] + &r1[p]) * 0.5
                    })
                    .collect(),
            ),
            _ => None,
        };
        let h2 = match (&prev.h2_rhs, &next.h2_rhs) {
            (Some(r0), Some(r1)) => Some(
                (0..interior.len())
                    .map(|p| {
                        if !interior[p] {
                            return 0.0;
                        }
                        (next.h2[p] - prev.h2[p]) / dt - 0.5 * (r0[p] + r1[p])
                    })
                    .collect(),
            ),
            _ => None,
        };
        let area = (next.area - prev.area) / dt - area_sign * 0.5 * (prev.gh_integral + next.gh_integral);
        Self { uflow, h2, area }
    }

    pub fn uflow_max(&self) -> Option<f64> {
        self.uflow
            .as_ref()
            .map(|r| r.iter().map(|v| v.amax()).fold(0.0, f64::max))
    }

    pub fn h2_max(&self) -> Option<f64> {
        self.h2.as_ref().map(|r| r.iter().map(|x| x.abs()).fold(0.0, f64::max))
    }
}

/// Smallest `K` on a search grid with
/// `v(p,s) <= (m + sup_0 v) exp(K (U - u(p,s)))` at every interior node,
/// where `u = sum_a u_a` and `U` is the running maximum of `u` over all
/// nodes and earlier times.
#[derive(Debug, Clone)]
pub struct GradientMonitor {
    pub bound: f64,
    pub u_max: f64,
    grid: Vec<f64>,
}

impl GradientMonitor {
    pub fn new(initial: &FlowState, k_grid: Vec<f64>) -> Self {
        let m = initial.patch.ambient.signature().m as f64;
        let mut out = Self {
            bound: m + initial.sup_tilt(),
            u_max: f64::NEG_INFINITY,
            grid: k_grid,
        };
        out.absorb(initial);
        out
    }

    fn absorb(&mut self, state: &FlowState) {
        for (p, fr) in state.geometry.frames.iter().enumerate() {
            if state.geometry.interior[p] {
                self.u_max = self.u_max.max(fr.heights.sum());
            }
        }
    }

    /// `None` when no grid value suffices ("unbounded at resolution").
    pub fn observe(&mut self, state: &FlowState) -> Option<f64> {
        self.absorb(state);
        let needs: Vec<(f64, f64)> = state
            .geometry
            .frames
            .iter()
            .enumerate()
            .filter(|(p, fr)| state.geometry.interior[*p] && fr.tilt > self.bound)
            .map(|(_, fr)| (fr.tilt, self.u_max - fr.heights.sum()))
            .collect();
        self.grid.iter().copied().find(|&k| {
            needs
                .iter()
                .all(|&(v, gap)| v <= self.bound * (k * gap).exp())
        })
    }
}

/// Least-squares fit of `y(s) ~ C (1 + 1/s)` over `s > 0`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BoundFit {
    pub c: f64,
    /// `max (y - C phi) / (C phi)`; zero when `C = 0`.
    pub max_rel_excess: f64,
    pub witness_step: Option<usize>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BoundShapeReport {
    pub h2: BoundFit,
    pub a2: BoundFit,
}

pub fn fit_bound(samples: &[(usize, f64, f64)]) -> BoundFit {
    let phi = |s: f64| 1.0 + 1.0 / s;
    let pts: Vec<_> = samples.iter().filter(|(_, s, _)| *s > 0.0).collect();
    let num: f64 = pts.iter().map(|(_, s, y)| y * phi(*s)).sum();
    let den: f64 = pts.iter().map(|(_, s, _)| phi(*s).powi(2)).sum();
    let c = if den > 0.0 { num / den } else { 0.0 };
    let mut fit = BoundFit {
        c,
        max_rel_excess: 0.0,
        witness_step: None,
    };
    if c > 0.0 {
        for (step, s, y) in pts {
            let excess = (y - c * phi(*s)) / (c * phi(*s));
            if fit.witness_step.is_none() || excess > fit.max_rel_excess {
                fit.max_rel_excess = excess;
                fit.witness_step = Some(*step);
            }
        }
    }
    fit
}

/// Determines the sign `e` in `dA/ds = e int G(H, H) dmu` from one forward
/// difference of the area. Returns `None` when `int G(H, H)` vanishes.
pub fn calibrate_area_sign(initial: &FlowState, cfg: &FlowConfig) -> Result<Option<f64>> {
    let toggles = MonitorToggles::none();
    let d0 = Diagnostics::new(initial, &toggles);
    if d0.gh_integral.abs() <= 1e-12 * d0.area {
        return Ok(None);
    }
    let out = step(initial, initial.proposed_dt(cfg), cfg, 0.0)?;
    let d1 = Diagnostics::new(&out.state, &toggles);
    let rate = (d1.area - d0.area) / out.dt;
    Ok(Some((rate / d0.gh_integral).signum()))
}
