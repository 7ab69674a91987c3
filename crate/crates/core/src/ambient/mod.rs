//! Ambient manifolds with a signature-(n,m) metric in a single global chart.
//!
//! Curvature is stored fully lowered as `Rbar[a][b][c][d] = G(Rbar(d_a, d_b) d_c, d_d)`
//! with `Rbar(X,Y)Z = -D_X D_Y Z + D_Y D_X Z + D_[X,Y] Z`, i.e. the negative
//! of the usual Riemann operator. With this sign a round sphere of radius r
//! has `Rbar(X,Y,X,Y) = 1/r^2` for orthonormal X, Y.

mod catalog;
mod tcc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::Signature;

pub use catalog::{AmbientSpec, Factor, FlatPseudoEuclidean, NeutralTangentBundle, ProductMetric};
pub use tcc::{tcc_estimate, Region, TccEstimate, TccWitness, DEFAULT_MAX_RAPIDITY};

/// Default finite-difference step in chart units.
pub const H_AMB: f64 = 1e-4;

/// `Gamma^c_{ab}` stored at `[(c * d + a) * d + b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    #[inline]
    pub fn get(&self, c: usize, a: usize, b: usize) -> f64 {
        self.data[(c * self.dim + a) * self.dim + b]
    }

    #[inline]
    pub fn set(&mut self, c: usize, a: usize, b: usize, val: f64) {
        let d = self.dim;
        self.data[(c * d + a) * d + b] = val;
    }

    /// `Gamma(u, w)^c = Gamma^c_{ab} u^a w^b`.
    pub fn contract(&self, u: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        DVector::from_fn(d, |c, _| {
            let mut s = 0.0;
            for a in 0..d {
                if u[a] == 0.0 {
                    continue;
                }
                for b in 0..d {
                    s += self.get(c, a, b) * u[a] * w[b];
                }
            }
            s
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Lowered curvature `Rbar_{abcd}` stored at `[((a * d + b) * d + c) * d + e]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curvature {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Curvature {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim.pow(4)],
        }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, e: usize) -> f64 {
        let d = self.dim;
        self.data[((a * d + b) * d + c) * d + e]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, e: usize, val: f64) {
        let d = self.dim;
        self.data[((a * d + b) * d + c) * d + e] = val;
    }

    /// `G(Rbar(x, y) z, w)`.
    pub fn eval(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>, w: &DVector<f64>) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for a in 0..d {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..d {
                let xy = x[a] * y[b];
                if xy == 0.0 {
                    continue;
                }
                for c in 0..d {
                    let xyz = xy * z[c];
                    if xyz == 0.0 {
                        continue;
                    }
                    for e in 0..d {
                        s += self.get(a, b, c, e) * xyz * w[e];
                    }
                }
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest violation of the antisymmetries, pair symmetry and the first
    /// Bianchi identity.
    pub fn symmetry_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        let r = self.get(a, b, c, e);
                        worst = worst
                            .max((r + self.get(b, a, c, e)).abs())
                            .max((r + self.get(a, b, e, c)).abs())
                            .max((r - self.get(c, e, a, b)).abs())
                            .max((r + self.get(b, c, a, e) + self.get(c, a, b, e)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Frame `T_a = -psi_a grad t_a` built from the time functions.
#[derive(Debug, Clone)]
pub struct MultitimeFrame {
    pub t: Vec<DVector<f64>>,
    pub psi: Vec<f64>,
}

/// A pseudo-Riemannian manifold in one chart, with `m` time functions whose
/// gradients are timelike and mutually orthogonal.
///
/// Only `metric`, the time functions and their gradients are required;
/// connection and curvature default to central differences.
pub trait Ambient: Send + Sync {
    fn name(&self) -> String;

    fn signature(&self) -> Signature;

    fn dim(&self) -> usize {
        self.signature().dim()
    }

    /// Rejects points outside the chart.
    fn check_domain(&self, _x: &DVector<f64>) -> Result<()> {
        Ok(())
    }

    fn metric(&self, x: &DVector<f64>) -> DMatrix<f64>;

    /// True only when the curvature vanishes identically.
    fn is_flat(&self) -> bool {
        false
    }

    fn christoffel(&self, x: &DVector<f64>) -> Christoffel {
        christoffel_fd(self, x, H_AMB)
    }

    fn curvature(&self, x: &DVector<f64>) -> Curvature {
        curvature_fd(self, x, 10.0 * H_AMB)
    }

    /// Values `t_a(x)`.
    fn time_functions(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Row `a` holds the partial derivatives of `t_a`.
    fn time_gradients(&self, x: &DVector<f64>) -> DMatrix<f64>;

    /// Partial second derivatives of each `t_a`.
    fn time_hessians(&self, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let d = self.dim();
        let m = self.signature().m;
        let h = H_AMB;
        let mut out = vec![DMatrix::zeros(d, d); m];
        for k in 0..d {
            let (xp, xm) = shifted(x, k, h);
            let diff = (self.time_gradients(&xp) - self.time_gradients(&xm)) / (2.0 * h);
            for (a, hess) in out.iter_mut().enumerate() {
                for j in 0..d {
                    hess[(k, j)] = diff[(a, j)];
                }
            }
        }
        for hess in &mut out {
            *hess = (&*hess + hess.transpose()) * 0.5;
        }
        out
    }
}

impl std::fmt::Debug for dyn Ambient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}", self.name(), self.signature())
    }
}

fn shifted(x: &DVector<f64>, k: usize, h: f64) -> (DVector<f64>, DVector<f64>) {
    let mut xp = x.clone();
    let mut xm = x.clone();
    xp[k] += h;
    xm[k] -= h;
    (xp, xm)
}

/// Levi-Civita symbols from central differences of the metric.
pub fn christoffel_fd<A: Ambient + ?Sized>(space: &A, x: &DVector<f64>, h: f64) -> Christoffel {
    let d = space.dim();
    let dg: Vec<DMatrix<f64>> = (0..d)
        .map(|k| {
            let (xp, xm) = shifted(x, k, h);
            (space.metric(&xp) - space.metric(&xm)) / (2.0 * h)
        })
        .collect();
    let ginv = space
        .metric(x)
        .try_inverse()
        .expect("metric is nondegenerate");
    let mut out = Christoffel::zeros(d);
    for c in 0..d {
        for a in 0..d {
            for b in a..d {
                let mut s = 0.0;
                for e in 0..d {
                    s += ginv[(c, e)] * (dg[a][(e, b)] + dg[b][(e, a)] - dg[e][(a, b)]);
                }
                out.set(c, a, b, 0.5 * s);
                out.set(c, b, a, 0.5 * s);
            }
        }
    }
    out
}

/// Lowered curvature from central differences of the Christoffel symbols
/// returned by `space.christoffel`.
pub fn curvature_fd<A: Ambient + ?Sized>(space: &A, x: &DVector<f64>, h: f64) -> Curvature {
    let d = space.dim();
    let gam = space.christoffel(x);
    let dgam: Vec<Christoffel> = (0..d)
        .map(|k| {
            let (xp, xm) = shifted(x, k, h);
            let (p, m) = (space.christoffel(&xp), space.christoffel(&xm));
            Christoffel {
                dim: d,
                data: p
                    .data
                    .iter()
                    .zip(&m.data)
                    .map(|(a, b)| (a - b) / (2.0 * h))
                    .collect(),
            }
        })
        .collect();
    // R^a_{bce} = d_c Gamma^a_{eb} - d_e Gamma^a_{cb} + Gamma^a_{cf} Gamma^f_{eb} - Gamma^a_{ef} Gamma^f_{cb}
    let mut riem = vec![0.0; d.pow(4)];
    let idx = |a: usize, b: usize, c: usize, e: usize| ((a * d + b) * d + c) * d + e;
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let mut s = dgam[c].get(a, e, b) - dgam[e].get(a, c, b);
                    for f in 0..d {
                        s += gam.get(a, c, f) * gam.get(f, e, b) - gam.get(a, e, f) * gam.get(f, c, b);
                    }
                    riem[idx(a, b, c, e)] = s;
                }
            }
        }
    }
    // Rbar_{abce} = -G_{ef} R^f_{cab}
    let g = space.metric(x);
    let mut out = Curvature::zeros(d);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let mut s = 0.0;
                    for f in 0..d {
                        s += g[(e, f)] * riem[idx(f, c, a, b)];
                    }
                    out.set(a, b, c, e, -s);
                }
            }
        }
    }
    out
}

/// `T_a = -psi_a grad t_a` with `psi_a^-2 = -G(grad t_a, grad t_a)`.
pub fn multitime_frame<A: Ambient + ?Sized>(space: &A, x: &DVector<f64>) -> Result<MultitimeFrame> {
    let g = space.metric(x);
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Invariant("degenerate metric".into()))?;
    let dt = space.time_gradients(x);
    let m = space.signature().m;
    let mut t = Vec::with_capacity(m);
    let mut psi = Vec::with_capacity(m);
    for a in 0..m {
        let grad = &ginv * dt.row(a).transpose();
        let nsq = grad.dot(&(&g * &grad));
        if !(nsq < 0.0) {
            return Err(Error::Invariant(format!(
                "gradient of time function {a} is not timelike at {:?} (G = {nsq:e})",
                x.as_slice()
            )));
        }
        let p = (-nsq).powf(-0.5);
        t.push(-p * grad);
        psi.push(p);
    }
    for a in 0..m {
        for b in 0..a {
            let overlap = t[a].dot(&(&g * &t[b]));
            if overlap.abs() > 1e-8 {
                return Err(Error::Invariant(format!(
                    "time gradients {b} and {a} are not orthogonal (G = {overlap:e})"
                )));
            }
        }
    }
    Ok(MultitimeFrame { t, psi })
}

/// G-orthonormal background frame `{e_i, T_a}`: the multitime frame plus
/// spacelike vectors from coordinate directions projected off the T-span.
pub fn background_frame<A: Ambient + ?Sized>(space: &A, x: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    let sig = space.signature();
    let g = space.metric(x);
    let mt = multitime_frame(space, x)?;
    let ip = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(&g * b));
    let mut es: Vec<DVector<f64>> = Vec::with_capacity(sig.n);
    for k in 0..sig.dim() {
        if es.len() == sig.n {
            break;
        }
        let mut v = DVector::zeros(sig.dim());
        v[k] = 1.0;
        for _ in 0..2 {
            for t in &mt.t {
                let c = ip(&v, t);
                v.axpy(c, t, 1.0);
            }
            for e in &es {
                let c = ip(&v, e);
                v.axpy(-c, e, 1.0);
            }
        }
        let nsq = ip(&v, &v);
        if nsq > 1e-6 {
            es.push(v / nsq.sqrt());
        }
    }
    if es.len() < sig.n {
        return Err(Error::Invariant("could not complete a spacelike background frame".into()));
    }
    es.extend(mt.t);
    Ok(es)
}

/// `(D dt_a)_{ij} = d_i d_j t_a - Gamma^c_{ij} d_c t_a`.
pub fn covariant_time_hessians<A: Ambient + ?Sized>(space: &A, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
    let d = space.dim();
    let gam = space.christoffel(x);
    let dt = space.time_gradients(x);
    space
        .time_hessians(x)
        .into_iter()
        .enumerate()
        .map(|(a, mut h)| {
            for i in 0..d {
                for j in 0..d {
                    let mut s = 0.0;
                    for c in 0..d {
                        s += gam.get(c, i, j) * dt[(a, c)];
                    }
                    h[(i, j)] -= s;
                }
            }
            h
        })
        .collect()
}

#[cfg(test)]
mod tests;
