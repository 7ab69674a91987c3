//! Pointwise identities linking heights, tilt and mean curvature.

use nalgebra::DVector;

use super::patch::{Geometry, ImmersedPatch};

/// Per-node residual, zero outside the interior.
#[derive(Debug, Clone)]
pub struct ResidualField {
    pub values: Vec<f64>,
}

impl ResidualField {
    pub fn max(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &x| m.max(x))
    }
}

pub fn height_field(geom: &Geometry) -> Vec<DVector<f64>> {
    geom.frames.iter().map(|fr| fr.heights.clone()).collect()
}

/// `|<du_a, du_b>_g - psi_a^-1 psi_b^-1 (sum_c V_ca V_cb - delta_ab)|`,
/// maximized over `a, b`.
pub fn check_slice_identity(patch: &ImmersedPatch, geom: &Geometry) -> ResidualField {
    let u = height_field(geom);
    let shifts = patch.height_shifts();
    let n = patch.grid.dim();
    let values = (0..patch.len())
        .map(|p| {
            if !geom.interior[p] {
                return 0.0;
            }
            let fr = &geom.frames[p];
            let m = fr.psi.len();
            let du: Vec<DVector<f64>> = (0..n).map(|i| patch.grid.d1(&u, &shifts, p, i)).collect();
            let vtv = fr.v_block.transpose() * &fr.v_block;
            let mut worst: f64 = 0.0;
            for a in 0..m {
                for b in 0..m {
                    let mut lhs = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            lhs += fr.metric_inv[(i, j)] * du[i][a] * du[j][b];
                        }
                    }
                    let delta = if a == b { 1.0 } else { 0.0 };
                    let rhs = (vtv[(a, b)] - delta) / (fr.psi[a] * fr.psi[b]);
                    worst = worst.max((lhs - rhs).abs());
                }
            }
            worst
        })
        .collect();
    ResidualField { values }
}

/// `|Lap u_c - psi_c^-1 sum_a V_ac H_a - g^ij (D dt_c)_ij|`, maximized over `c`.
///
/// With normal indices raised by `-delta` this is the identity
/// `Lap u_c = -psi_c^-1 V_ac H^a + g^ij (D dt_c)_ij`.
pub fn check_laplacian_identity(patch: &ImmersedPatch, geom: &Geometry) -> ResidualField {
    let u = height_field(geom);
    let lap = patch.laplacian(&geom.frames, &u, &patch.height_shifts());
    let values = (0..patch.len())
        .map(|p| {
            if !geom.interior[p] {
                return 0.0;
            }
            let fr = &geom.frames[p];
            let h = &geom.curvature[p].h;
            (0..fr.psi.len())
                .map(|c| {
                    let vh: f64 = (0..h.len()).map(|a| fr.v_block[(a, c)] * h[a]).sum();
                    (lap[p][c] - vh / fr.psi[c] - fr.hess_t_trace[c]).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    ResidualField { values }
}
