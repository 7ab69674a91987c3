use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use super::{closed_form_mean_curvature, RadialFunction, RadialProfile};
use crate::ambient::NeutralTangentBundle;
use crate::error::Result;
use crate::submanifold::{init, Grid};

/// Spherical-parameter grid `(R, theta, phi)` with spacing `h` in every
/// direction: `R` in `[r_min, r_max]` and an angular window of half-width
/// about `half_width` around the equator point `theta = pi/2, phi = 0`.
pub fn shell_grid(r_min: f64, r_max: f64, half_width: f64, h: f64) -> Result<Grid> {
    let nr = ((r_max - r_min) / h).round() as usize + 1;
    let k = (half_width / h).ceil() as usize;
    let w = k as f64 * h;
    Grid::bounded(
        &[r_min, FRAC_PI_2 - w, -w],
        &[r_min + (nr - 1) as f64 * h, FRAC_PI_2 + w, w],
        &[nr, 2 * k + 1, 2 * k + 1],
    )
}

#[derive(Debug, Clone)]
pub struct CrossCheckReport {
    pub h: f64,
    pub nodes_compared: usize,
    pub degenerate_nodes: usize,
    /// Max over nodes of the chart-component distance.
    pub max_abs_deviation: f64,
    /// Max over nodes of distance divided by the closed-form magnitude.
    pub max_rel_deviation: f64,
    /// Max `|G(H, tau_i)|` of the generic mean curvature vector.
    pub max_tangential: f64,
    /// Max sine of the angle between the generic vector and `d_R - H' d_Rdot`.
    pub max_direction_error: f64,
}

/// Compares the mean curvature vector of the generic pipeline on a shell
/// patch with the closed form evaluated on a profile of matching spacing.
pub fn cross_check_against_generic(
    f: &RadialFunction,
    r_min: f64,
    r_max: f64,
    half_width: f64,
    h: f64,
) -> Result<CrossCheckReport> {
    let grid = shell_grid(r_min, r_max, half_width, h)?;
    let nr = grid.shape[0];
    let profile = RadialProfile::sample(f, grid.origin[0], grid.origin[0] + (nr - 1) as f64 * h, nr)?;
    let closed = closed_form_mean_curvature(&profile);
    let ambient = Arc::new(NeutralTangentBundle::new(3)?);
    let patch = init::radial_shell(ambient.clone(), grid, f)?;
    let geom = patch.geometry()?;

    let mut report = CrossCheckReport {
        h,
        nodes_compared: 0,
        degenerate_nodes: 0,
        max_abs_deviation: 0.0,
        max_rel_deviation: 0.0,
        max_tangential: 0.0,
        max_direction_error: 0.0,
    };
    let g = crate::ambient::Ambient::metric(ambient.as_ref(), &patch.f[0]);
    for p in 0..patch.len() {
        if !geom.interior[p] {
            continue;
        }
        let q = patch.grid.param(p);
        let ir = patch.grid.multi_index(p)[0];
        let Some((c, slope)) = closed[ir] else {
            report.degenerate_nodes += 1;
            continue;
        };
        let dir = init::spherical_to_cartesian(1.0, q[1], q[2]);
        let hvec = &geom.curvature[p].h_vec;
        let mut dist2 = 0.0;
        let mut ref2 = 0.0;
        let mut along = 0.0;
        let mut dir_norm2 = 0.0;
        for k in 0..3 {
            let want = [c * dir[k], c * slope * dir[k]];
            let unit = [dir[k], slope * dir[k]];
            for (s, &w) in want.iter().enumerate() {
                let got = hvec[k + 3 * s];
                dist2 += (got - w).powi(2);
                ref2 += w * w;
                along += got * unit[s];
                dir_norm2 += unit[s] * unit[s];
            }
        }
        report.nodes_compared += 1;
        let dist = dist2.sqrt();
        report.max_abs_deviation = report.max_abs_deviation.max(dist);
        if ref2 > 0.0 {
            report.max_rel_deviation = report.max_rel_deviation.max(dist / ref2.sqrt());
        }
        let hn2 = hvec.norm_squared();
        if hn2 > 0.0 {
            let cos2 = along * along / (hn2 * dir_norm2);
            report.max_direction_error = report.max_direction_error.max((1.0 - cos2).max(0.0).sqrt());
        }
        for t in &geom.frames[p].tau {
            report.max_tangential = report.max_tangential.max(hvec.dot(&(&g * t)).abs());
        }
    }
    Ok(report)
}
