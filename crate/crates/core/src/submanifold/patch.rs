use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::grid::Grid;
use crate::ambient::{covariant_time_hessians, multitime_frame, Ambient};
use crate::error::{Error, Result};
use crate::linalg::{tilt, FramePair, PseudoOrthogonalMatrix};

/// Condition number of the projected timelike Gram matrix beyond which a
/// node is rejected rather than regularized.
pub const MAX_NORMAL_CONDITION: f64 = 1e8;

/// A discretized immersion: one chart point per grid node.
#[derive(Clone)]
pub struct ImmersedPatch {
    pub grid: Grid,
    /// Chart coordinates of each node.
    pub f: Vec<DVector<f64>>,
    /// Chart displacement picked up when a periodic stencil wraps once along
    /// each axis. Empty for bounded grids.
    pub shifts: Vec<DVector<f64>>,
    pub ambient: Arc<dyn Ambient>,
}

impl std::fmt::Debug for ImmersedPatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ImmersedPatch")
            .field("grid", &self.grid)
            .field("ambient", &self.ambient.name())
            .finish()
    }
}

/// Geometry at one node. Tangent quantities use the orthonormal frame
/// `tau_i = E_ik d_k f` with `E` lower triangular (Gram-Schmidt in axis order).
#[derive(Debug, Clone)]
pub struct NodeFrame {
    /// `d_i f` as chart vectors.
    pub df: Vec<DVector<f64>>,
    pub metric: DMatrix<f64>,
    pub metric_inv: DMatrix<f64>,
    pub sqrt_det: f64,
    pub min_eig: f64,
    pub e: DMatrix<f64>,
    pub tau: Vec<DVector<f64>>,
    pub nu: Vec<DVector<f64>>,
    /// Background timelike frame `T_a` at the node.
    pub t_frame: Vec<DVector<f64>>,
    pub psi: Vec<f64>,
    /// `V_ab = -G(nu_a, T_b)`.
    pub v_block: DMatrix<f64>,
    pub tilt: f64,
    /// Heights `u_a = t_a(f)`.
    pub heights: DVector<f64>,
    /// `g^ij (D dt_a)(d_i f, d_j f)`.
    pub hess_t_trace: DVector<f64>,
}

/// Extrinsic quantities at one node, in the orthonormal frames.
#[derive(Debug, Clone)]
pub struct NodeCurvature {
    /// `a[alpha][(i, j)] = G(D_{tau_i} nu_alpha, tau_j)`.
    pub a: Vec<DMatrix<f64>>,
    /// `c[i][(alpha, beta)] = G(D_{tau_i} nu_alpha, nu_beta)`.
    pub c: Vec<DMatrix<f64>>,
    /// `H_alpha = sum_i A_ii alpha`.
    pub h: DVector<f64>,
    /// Mean curvature vector `sum_alpha H_alpha nu_alpha` in chart components.
    pub h_vec: DVector<f64>,
    /// `|H|^2_+ = sum_alpha H_alpha^2`.
    pub h2: f64,
    /// `|A|^2_+ = sum A_ij alpha^2`.
    pub a2: f64,
    /// `sum_ij (sum_alpha H_alpha A_ij alpha)^2`.
    pub ha2: f64,
    /// Largest `|A_ij alpha - A_ji alpha|`.
    pub asym: f64,
}

#[derive(Debug, Clone)]
pub struct Geometry {
    pub frames: Vec<NodeFrame>,
    pub curvature: Vec<NodeCurvature>,
    pub interior: Vec<bool>,
}

impl ImmersedPatch {
    pub fn new(
        grid: Grid,
        f: Vec<DVector<f64>>,
        shifts: Vec<DVector<f64>>,
        ambient: Arc<dyn Ambient>,
    ) -> Result<Self> {
        let d = ambient.dim();
        if ambient.signature().n != grid.dim() {
            return Err(Error::Dimension(format!(
                "grid of dimension {} in ambient of signature {}",
                grid.dim(),
                ambient.signature()
            )));
        }
        if f.len() != grid.len() || f.iter().any(|p| p.len() != d) {
            return Err(Error::Dimension(format!(
                "need {} points of dimension {d}",
                grid.len()
            )));
        }
        let periodic = grid.topology == super::Topology::Periodic;
        if periodic && (shifts.len() != grid.dim() || shifts.iter().any(|s| s.len() != d)) {
            return Err(Error::Dimension("periodic patch needs one shift per axis".into()));
        }
        for p in &f {
            ambient.check_domain(p)?;
        }
        Ok(Self {
            grid,
            f,
            shifts: if periodic { shifts } else { Vec::new() },
            ambient,
        })
    }

    pub fn with_positions(&self, f: Vec<DVector<f64>>) -> Self {
        Self {
            grid: self.grid.clone(),
            f,
            shifts: self.shifts.clone(),
            ambient: self.ambient.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Shifts of the height functions, valid for time functions that are
    /// affine in the chart (all catalog spaces).
    pub fn height_shifts(&self) -> Vec<DVector<f64>> {
        if self.shifts.is_empty() {
            return Vec::new();
        }
        let dt = self.ambient.time_gradients(&self.f[0]);
        self.shifts.iter().map(|s| &dt * s).collect()
    }

    /// Induced metric `g_ij = G(d_i f, d_j f)` at every node.
    pub fn induced_metric(&self) -> Result<Vec<DMatrix<f64>>> {
        (0..self.len())
            .into_par_iter()
            .map(|p| {
                let df = self.tangents(p);
                let g = self.ambient.metric(&self.f[p]);
                let gij = gram(&g, &df);
                let min_eig = gij.symmetric_eigenvalues().min();
                if min_eig <= 0.0 {
                    return Err(Error::NotSpacelike { node: p, min_eig });
                }
                Ok(gij)
            })
            .collect()
    }

    fn tangents(&self, p: usize) -> Vec<DVector<f64>> {
        (0..self.grid.dim())
            .map(|i| self.grid.d1(&self.f, &self.shifts, p, i))
            .collect()
    }

    /// Frames, heights and tilt at one node.
    pub fn node_frame(&self, p: usize) -> Result<NodeFrame> {
        let n = self.grid.dim();
        let x = &self.f[p];
        let g = self.ambient.metric(x);
        let ip = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(&g * b));
        let df = self.tangents(p);
        let metric = gram(&g, &df);
        let min_eig = metric.symmetric_eigenvalues().min();
        let chol = match metric.clone().cholesky() {
            Some(c) if min_eig > 0.0 => c,
            _ => return Err(Error::NotSpacelike { node: p, min_eig }),
        };
        let l = chol.l();
        let e = l
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .expect("Cholesky factor is invertible");
        let tau = combine(&e, &df);
        let metric_inv = chol.inverse();
        let sqrt_det = l.diagonal().product();

        let mt = multitime_frame(self.ambient.as_ref(), x)?;
        let m = mt.t.len();
        // Project T_a off the tangent space; G(tau_i, tau_i) = 1.
        let projected: Vec<DVector<f64>> = mt
            .t
            .iter()
            .map(|t| {
                let mut w = t.clone();
                for _ in 0..2 {
                    for ti in &tau {
                        let c = ip(&w, ti);
                        w.axpy(-c, ti, 1.0);
                    }
                }
                w
            })
            .collect();
        let ngram = DMatrix::from_fn(m, m, |a, b| -ip(&projected[a], &projected[b]));
        let eigs = ngram.symmetric_eigenvalues();
        let (lo, hi) = (eigs.min(), eigs.max());
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if condition > MAX_NORMAL_CONDITION {
            return Err(Error::DegenerateNormal { node: p, condition });
        }
        let nchol = ngram.cholesky().ok_or(Error::DegenerateNormal { node: p, condition })?;
        let fmat = nchol
            .l()
            .solve_lower_triangular(&DMatrix::identity(m, m))
            .expect("Cholesky factor is invertible");
        let nu = combine(&fmat, &projected);
        let v_block = DMatrix::from_fn(m, m, |a, b| -ip(&nu[a], &mt.t[b]));
        let hess = covariant_time_hessians(self.ambient.as_ref(), x);
        let hess_t_trace = DVector::from_fn(m, |a, _| tau.iter().map(|t| t.dot(&(&hess[a] * t))).sum());
        Ok(NodeFrame {
            tilt: tilt(&v_block),
            heights: self.ambient.time_functions(x),
            df,
            metric,
            metric_inv,
            sqrt_det,
            min_eig,
            e,
            tau,
            nu,
            t_frame: mt.t,
            psi: mt.psi,
            v_block,
            hess_t_trace,
        })
    }

    pub fn frames(&self) -> Result<Vec<NodeFrame>> {
        (0..self.len()).into_par_iter().map(|p| self.node_frame(p)).collect()
    }

    /// Full derived geometry. Fails on the first non-spacelike or
    /// normal-degenerate node.
    pub fn geometry(&self) -> Result<Geometry> {
        let frames = self.frames()?;
        let nu_fields: Vec<Vec<DVector<f64>>> = {
            let m = self.ambient.signature().m;
            (0..m)
                .map(|a| frames.iter().map(|fr| fr.nu[a].clone()).collect())
                .collect()
        };
        let curvature = (0..self.len())
            .into_par_iter()
            .map(|p| self.node_curvature(p, &frames[p], &nu_fields))
            .collect();
        Ok(Geometry {
            frames,
            curvature,
            interior: self.grid.interior_mask(),
        })
    }

    fn node_curvature(&self, p: usize, fr: &NodeFrame, nu_fields: &[Vec<DVector<f64>>]) -> NodeCurvature {
        let n = self.grid.dim();
        let m = nu_fields.len();
        let x = &self.f[p];
        let g = self.ambient.metric(x);
        let gam = self.ambient.christoffel(x);
        let ip = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(&g * b));
        // dnu[a][k] = D_{d_k f} nu_a
        let dnu: Vec<Vec<DVector<f64>>> = (0..m)
            .map(|a| {
                (0..n)
                    .map(|k| self.grid.d1(&nu_fields[a], &[], p, k) + gam.contract(&fr.df[k], &fr.nu[a]))
                    .collect()
            })
            .collect();
        // D_{tau_i} nu_a = E_ik D_{d_k f} nu_a
        let along_tau: Vec<Vec<DVector<f64>>> = dnu.iter().map(|d| combine(&fr.e, d)).collect();
        let a: Vec<DMatrix<f64>> = (0..m)
            .map(|al| DMatrix::from_fn(n, n, |i, j| ip(&along_tau[al][i], &fr.tau[j])))
            .collect();
        let c: Vec<DMatrix<f64>> = (0..n)
            .map(|i| DMatrix::from_fn(m, m, |al, be| ip(&along_tau[al][i], &fr.nu[be])))
            .collect();
        let h = DVector::from_fn(m, |al, _| a[al].trace());
        let mut h_vec = DVector::zeros(x.len());
        for al in 0..m {
            h_vec.axpy(h[al], &fr.nu[al], 1.0);
        }
        let h2 = h.norm_squared();
        let a2 = a.iter().map(|blk| blk.norm_squared()).sum();
        let mut ha = DMatrix::zeros(n, n);
        for al in 0..m {
            ha += &a[al] * h[al];
        }
        let asym = a
            .iter()
            .map(|blk| (blk - blk.transpose()).amax())
            .fold(0.0, f64::max);
        NodeCurvature {
            a,
            c,
            h,
            h_vec,
            h2,
            a2,
            ha2: ha.norm_squared(),
            asym,
        }
    }

    /// Discrete Laplace-Beltrami of a node field (one vector per node), in
    /// divergence form with `sqrt(g) g^ij` averaged to half nodes. Only
    /// interior nodes are filled; others are zero.
    pub fn laplacian(&self, frames: &[NodeFrame], values: &[DVector<f64>], shifts: &[DVector<f64>]) -> Vec<DVector<f64>> {
        let grid = &self.grid;
        let n = grid.dim();
        let k = values[0].len();
        let grads: Vec<Vec<DVector<f64>>> = (0..values.len())
            .into_par_iter()
            .map(|p| (0..n).map(|j| grid.d1(values, shifts, p, j)).collect())
            .collect();
        let weight = |p: usize, i: usize, j: usize| frames[p].sqrt_det * frames[p].metric_inv[(i, j)];
        (0..values.len())
            .into_par_iter()
            .map(|p| {
                if !grid.is_interior(p) {
                    return DVector::zeros(k);
                }
                let mut div = DVector::zeros(k);
                for i in 0..n {
                    let h = grid.spacing[i];
                    let flux = |dir: isize| -> DVector<f64> {
                        let (q, w) = grid.neighbor(p, i, dir).expect("interior stencil");
                        let mut wq = values[q].clone();
                        if w != 0 && !shifts.is_empty() {
                            wq += &shifts[i] * w as f64;
                        }
                        let (inner, outer) = if dir > 0 { (&values[p], &wq) } else { (&wq, &values[p]) };
                        let mut fl = (outer - inner) / h * (0.5 * (weight(p, i, i) + weight(q, i, i)));
                        for j in 0..n {
                            if j != i {
                                let wgt = 0.5 * (weight(p, i, j) + weight(q, i, j));
                                fl += (&grads[p][j] + &grads[q][j]) * (0.5 * wgt);
                            }
                        }
                        fl
                    };
                    div += (flux(1) - flux(-1)) / h;
                }
                div / frames[p].sqrt_det
            })
            .collect()
    }

    /// Total area `sum sqrt(det g) dV` over the interior nodes.
    pub fn area(&self, frames: &[NodeFrame]) -> f64 {
        let vol = self.grid.cell_volume();
        frames
            .iter()
            .enumerate()
            .filter(|(p, _)| self.grid.is_interior(*p))
            .map(|(_, fr)| fr.sqrt_det * vol)
            .sum()
    }

    /// Background/adapted frame pair at a node for the frame-norm estimates.
    pub fn frame_pair(&self, p: usize, fr: &NodeFrame) -> Result<FramePair> {
        let x = &self.f[p];
        let bg = crate::ambient::background_frame(self.ambient.as_ref(), x)?;
        let mut adapted = fr.tau.clone();
        adapted.extend(fr.nu.iter().cloned());
        FramePair::new(self.ambient.signature(), x.clone(), self.ambient.metric(x), bg, adapted)
    }

    /// The O(n,m) element relating the background frame to the adapted one.
    pub fn frame_matrix(&self, p: usize, fr: &NodeFrame) -> Result<PseudoOrthogonalMatrix> {
        Ok(self.frame_pair(p, fr)?.blocks())
    }
}

fn gram(g: &DMatrix<f64>, vs: &[DVector<f64>]) -> DMatrix<f64> {
    let k = vs.len();
    let gv: Vec<DVector<f64>> = vs.iter().map(|v| g * v).collect();
    let mut out = DMatrix::from_fn(k, k, |i, j| vs[i].dot(&gv[j]));
    out = (&out + out.transpose()) * 0.5;
    out
}

/// `out_i = sum_k coeffs[(i, k)] vs[k]`.
fn combine(coeffs: &DMatrix<f64>, vs: &[DVector<f64>]) -> Vec<DVector<f64>> {
    (0..coeffs.nrows())
        .map(|i| {
            let mut w = DVector::zeros(vs[0].len());
            for (k, v) in vs.iter().enumerate() {
                if coeffs[(i, k)] != 0.0 {
                    w.axpy(coeffs[(i, k)], v, 1.0);
                }
            }
            w
        })
        .collect()
}
