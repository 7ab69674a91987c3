//! Initial-data families.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::grid::{Grid, Topology};
use super::patch::ImmersedPatch;
use crate::ambient::{background_frame, Ambient};
use crate::error::{Error, Result};
use crate::linalg::{FramePair, PseudoOrthogonalMatrix};
use crate::radial::RadialFunction;

/// Graph over the first `n` chart coordinates:
/// `f(x) = (base[..n] + x, base[n..] + height(x))`.
///
/// For periodic grids the shift along each axis is read off from `height`
/// over one period, so `height` must be periodic up to an affine part.
pub fn graph<F>(ambient: Arc<dyn Ambient>, grid: Grid, base: &[f64], height: F) -> Result<ImmersedPatch>
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    let sig = ambient.signature();
    let (n, m) = (sig.n, sig.m);
    if base.len() != n + m {
        return Err(Error::Dimension(format!("graph base point needs {} coordinates", n + m)));
    }
    let point = |x: &[f64]| {
        let h = height(x);
        DVector::from_fn(n + m, |k, _| if k < n { base[k] + x[k] } else { base[k] + h[k - n] })
    };
    let f = (0..grid.len()).map(|p| point(&grid.param(p))).collect();
    let shifts = match grid.topology {
        Topology::Periodic => {
            let x0 = grid.origin.clone();
            (0..n)
                .map(|i| {
                    let mut x1 = x0.clone();
                    x1[i] += grid.spacing[i] * grid.shape[i] as f64;
                    point(&x1) - point(&x0)
                })
                .collect()
        }
        Topology::Bounded => Vec::new(),
    };
    ImmersedPatch::new(grid, f, shifts, ambient)
}

/// `y = offset + slope x` with `slope` of shape `m x n`.
pub fn affine_graph(ambient: Arc<dyn Ambient>, grid: Grid, slope: &DMatrix<f64>, offset: &[f64]) -> Result<ImmersedPatch> {
    let sig = ambient.signature();
    if slope.shape() != (sig.m, sig.n) || offset.len() != sig.m {
        return Err(Error::Dimension(format!("affine graph needs an {}x{} slope", sig.m, sig.n)));
    }
    let mut base = vec![0.0; sig.n];
    base.extend_from_slice(offset);
    let slope = slope.clone();
    graph(ambient, grid, &base, move |x| &slope * DVector::from_row_slice(x))
}

/// `y_a = slope_a . x + amp_a prod_i sin(wave x_i + a pi/4)` around `base`.
pub fn sine_graph(
    ambient: Arc<dyn Ambient>,
    grid: Grid,
    base: &[f64],
    amplitude: &[f64],
    wave: f64,
    slope: &DMatrix<f64>,
) -> Result<ImmersedPatch> {
    let sig = ambient.signature();
    if amplitude.len() != sig.m || slope.shape() != (sig.m, sig.n) {
        return Err(Error::Dimension(format!(
            "sine graph needs {} amplitudes and an {}x{} slope",
            sig.m, sig.m, sig.n
        )));
    }
    let amplitude = amplitude.to_vec();
    let slope = slope.clone();
    graph(ambient, grid, base, move |x| {
        let lin = &slope * DVector::from_row_slice(x);
        DVector::from_fn(amplitude.len(), |a, _| {
            let phase = a as f64 * std::f64::consts::FRAC_PI_4;
            lin[a] + amplitude[a] * x.iter().map(|&xi| (wave * xi + phase).sin()).product::<f64>()
        })
    })
}

/// The plane through the origin spanned by the tangent vectors of a boosted
/// frame, `f(x) = sum_i x_i tau_i`, in a flat ambient.
pub fn boosted_plane(ambient: Arc<dyn Ambient>, grid: Grid, rapidities: &[f64]) -> Result<ImmersedPatch> {
    let sig = ambient.signature();
    let origin = DVector::zeros(sig.dim());
    let bg = background_frame(ambient.as_ref(), &origin)?;
    let mat = PseudoOrthogonalMatrix::boost(sig, rapidities)?;
    let fp = FramePair::from_background(sig, origin.clone(), ambient.metric(&origin), bg, &mat)?;
    let tau = fp.tau().to_vec();
    let at = |x: &[f64]| {
        let mut p = DVector::zeros(sig.dim());
        for (i, t) in tau.iter().enumerate() {
            p.axpy(x[i], t, 1.0);
        }
        p
    };
    let f = (0..grid.len()).map(|p| at(&grid.param(p))).collect();
    let shifts = match grid.topology {
        Topology::Periodic => (0..sig.n)
            .map(|i| &tau[i] * (grid.spacing[i] * grid.shape[i] as f64))
            .collect(),
        Topology::Bounded => Vec::new(),
    };
    ImmersedPatch::new(grid, f, shifts, ambient)
}

/// Chart point `(p, H(|p|) p/|p|)` of a radial section of the neutral
/// tangent bundle.
pub fn radial_point(p: &[f64], profile: &RadialFunction) -> DVector<f64> {
    let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    let s = profile.value(r) / r;
    let n = p.len();
    DVector::from_fn(2 * n, |k, _| if k < n { p[k] } else { s * p[k - n] })
}

/// Radial section over a bounded Cartesian box (which must avoid the origin).
pub fn radial_cube(ambient: Arc<dyn Ambient>, grid: Grid, profile: &RadialFunction) -> Result<ImmersedPatch> {
    check_neutral(ambient.as_ref(), &grid)?;
    let f = (0..grid.len()).map(|p| radial_point(&grid.param(p), profile)).collect();
    ImmersedPatch::new(grid, f, Vec::new(), ambient)
}

/// Radial section over a bounded grid in spherical parameters `(R, theta, phi)`.
pub fn radial_shell(ambient: Arc<dyn Ambient>, grid: Grid, profile: &RadialFunction) -> Result<ImmersedPatch> {
    check_neutral(ambient.as_ref(), &grid)?;
    if grid.dim() != 3 {
        return Err(Error::Dimension("spherical shell needs a 3-dimensional grid".into()));
    }
    let f = (0..grid.len())
        .map(|p| {
            let q = grid.param(p);
            radial_point(&spherical_to_cartesian(q[0], q[1], q[2]), profile)
        })
        .collect();
    ImmersedPatch::new(grid, f, Vec::new(), ambient)
}

pub fn spherical_to_cartesian(r: f64, theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [r * st * cp, r * st * sp, r * ct]
}

fn check_neutral(ambient: &dyn Ambient, grid: &Grid) -> Result<()> {
    let sig = ambient.signature();
    if sig.n != sig.m || sig.n != grid.dim() {
        return Err(Error::Dimension(format!(
            "radial sections need a neutral ambient matching the grid, got {sig}"
        )));
    }
    if grid.topology != Topology::Bounded {
        return Err(Error::Config("radial sections live on bounded grids".into()));
    }
    Ok(())
}
