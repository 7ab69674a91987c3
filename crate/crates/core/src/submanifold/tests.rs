use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::*;
use crate::ambient::{Ambient, FlatPseudoEuclidean, NeutralTangentBundle};
use crate::linalg::frame_norm_bounds;
use crate::radial::RadialFunction;

fn flat(n: usize, m: usize) -> Arc<dyn Ambient> {
    Arc::new(FlatPseudoEuclidean::new(n, m).unwrap())
}

#[test]
fn flat_graph_is_untilted() {
    let grid = Grid::periodic(2, 8, 2.0 * PI).unwrap();
    let patch = init::affine_graph(flat(2, 1), grid, &DMatrix::zeros(1, 2), &[0.7]).unwrap();
    let geom = patch.geometry().unwrap();
    for (fr, cv) in geom.frames.iter().zip(&geom.curvature) {
        assert!((&fr.metric - DMatrix::<f64>::identity(2, 2)).amax() < 1e-14);
        assert!((fr.tilt - 1.0).abs() < 1e-15);
        assert!((fr.heights[0] - 0.7).abs() < 1e-15);
        assert_eq!(fr.nu[0], DVector::from_row_slice(&[0.0, 0.0, 1.0]));
        assert!(cv.h2 < 1e-28 && cv.a2 < 1e-28);
    }
    assert!(check_slice_identity(&patch, &geom).max() < 1e-12);
    assert!(check_laplacian_identity(&patch, &geom).max() < 1e-12);
}

#[test]
fn tilted_graph_in_signature_2_1() {
    let grid = Grid::periodic(2, 8, 2.0 * PI).unwrap();
    let slope = DMatrix::from_row_slice(1, 2, &[0.6, 0.0]);
    let patch = init::affine_graph(flat(2, 1), grid, &slope, &[0.0]).unwrap();
    let geom = patch.geometry().unwrap();
    for fr in &geom.frames {
        assert!((fr.metric[(0, 0)] - 0.64).abs() < 1e-14);
        assert!((fr.metric[(1, 1)] - 1.0).abs() < 1e-14);
        assert!((fr.tilt - 1.25).abs() < 1e-12);
    }
    for cv in &geom.curvature {
        assert!(cv.a2 < 1e-24);
    }
    // |du|^2 = v^2 - 1 = 0.5625 on both sides.
    assert!(check_slice_identity(&patch, &geom).max() < 1e-12);
}

#[test]
fn boosted_plane_tilt() {
    let (a, b) = (0.4f64, 0.9f64);
    let grid = Grid::periodic(2, 6, 1.0).unwrap();
    let patch = init::boosted_plane(flat(2, 2), grid, &[a, b]).unwrap();
    let geom = patch.geometry().unwrap();
    let want = (a.cosh().powi(2) + b.cosh().powi(2)).sqrt();
    for fr in &geom.frames {
        assert!((fr.tilt - want).abs() < 1e-12);
    }
}

/// Spacelike graph `y = u(x)` in flat signature (n,1): `H = g^ij u_ij / w`
/// with `g_ij = delta_ij - u_i u_j` and `w = sqrt(1 - |Du|^2)`.
fn graph_mean_curvature(du: [f64; 2], ddu: [[f64; 2]; 2]) -> f64 {
    let g = DMatrix::from_fn(2, 2, |i, j| if i == j { 1.0 } else { 0.0 } - du[i] * du[j]);
    let gi = g.try_inverse().unwrap();
    let w = (1.0 - du[0] * du[0] - du[1] * du[1]).sqrt();
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += gi[(i, j)] * ddu[i][j];
        }
    }
    s / w
}

#[test]
fn hypersurface_mean_curvature_converges() {
    let eps = 0.2;
    let mut errs = Vec::new();
    for nodes in [16, 32, 64] {
        let grid = Grid::periodic(2, nodes, 2.0 * PI).unwrap();
        let patch = init::sine_graph(flat(2, 1), grid, &[0.0; 3], &[eps], 1.0, &DMatrix::zeros(1, 2)).unwrap();
        let geom = patch.geometry().unwrap();
        let mut err: f64 = 0.0;
        for p in 0..patch.len() {
            let x = patch.grid.param(p);
            let (s0, c0) = x[0].sin_cos();
            let (s1, c1) = x[1].sin_cos();
            let du = [eps * c0 * s1, eps * s0 * c1];
            let ddu = [[-eps * s0 * s1, eps * c0 * c1], [eps * c0 * c1, -eps * s0 * s1]];
            let want = graph_mean_curvature(du, ddu);
            err = err.max((geom.curvature[p].h[0] - want).abs());
            assert!(geom.curvature[p].asym < 1e-2);
        }
        errs.push(err);
    }
    for w in errs.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.8, "errors {errs:?}");
    }
}

#[test]
fn frame_norm_bounds_hold_on_tilted_data() {
    let grid = Grid::periodic(2, 12, 2.0 * PI).unwrap();
    let slope = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, -0.2, 0.4]);
    let patch = init::sine_graph(flat(2, 2), grid, &[0.0; 4], &[0.2, 0.1], 1.0, &slope).unwrap();
    let geom = patch.geometry().unwrap();
    for (p, fr) in geom.frames.iter().enumerate() {
        let fp = patch.frame_pair(p, fr).unwrap();
        fp.validate(1e-10).unwrap();
        assert!(frame_norm_bounds(&fp).bounds_hold);
        assert!(fr.tilt >= 2f64.sqrt() - 1e-12);
    }
}

#[test]
fn linear_radial_section_is_minimal() {
    let ambient: Arc<dyn Ambient> = Arc::new(NeutralTangentBundle::new(3).unwrap());
    let grid = Grid::bounded(&[0.5, 0.4, 0.3], &[1.0, 0.9, 0.8], &[7, 7, 7]).unwrap();
    let patch = init::radial_cube(ambient, grid, &RadialFunction::Linear { a: 1.5 }).unwrap();
    let geom = patch.geometry().unwrap();
    for cv in &geom.curvature {
        assert!(cv.h_vec.amax() < 1e-10);
    }
}

#[test]
fn radial_induced_metric_eigenvalues() {
    // Pullback of G by p -> (p, H(|p|) p/|p|): eigenvalues 2H' and 2H/R (twice).
    let ambient: Arc<dyn Ambient> = Arc::new(NeutralTangentBundle::new(3).unwrap());
    let f = RadialFunction::PlusCubic { c: 0.1 };
    let lo = [0.8, 0.5, 0.4];
    let grid = Grid::bounded(&lo, &[0.8 + 4e-3, 0.5 + 4e-3, 0.4 + 4e-3], &[5, 5, 5]).unwrap();
    let patch = init::radial_cube(ambient, grid, &f).unwrap();
    let gs = patch.induced_metric().unwrap();
    let centre = patch.grid.index(&[2, 2, 2]);
    let q = patch.grid.param(centre);
    let r = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut eig: Vec<f64> = gs[centre].symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut want = [2.0 * f.d1(r), 2.0 * f.value(r) / r, 2.0 * f.value(r) / r];
    want.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (a, b) in eig.iter().zip(&want) {
        assert!((a - b).abs() < 1e-5, "{eig:?} vs {want:?}");
    }
}

#[test]
fn non_spacelike_patch_is_flagged() {
    let grid = Grid::periodic(2, 8, 2.0 * PI).unwrap();
    let slope = DMatrix::from_row_slice(1, 2, &[1.2, 0.0]);
    let patch = init::affine_graph(flat(2, 1), grid, &slope, &[0.0]).unwrap();
    assert!(matches!(patch.geometry(), Err(crate::Error::NotSpacelike { .. })));
}

#[test]
fn snapshot_has_header_and_rows() {
    let grid = Grid::periodic(2, 4, 1.0).unwrap();
    let patch = init::affine_graph(flat(2, 1), grid, &DMatrix::zeros(1, 2), &[0.0]).unwrap();
    let geom = patch.geometry().unwrap();
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &patch, &geom, 0.5).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with('#')).count(), 5);
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 16);
    assert!(text.contains("node,x0,x1,x2,g_eig0,g_eig1,v,H2,A2"));
}
