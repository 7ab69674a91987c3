use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Ambient, Christoffel, Curvature};
use crate::error::{Error, Result};
use crate::linalg::Signature;

/// `R^{n+m}` (or its quotient torus) with `diag(I_n, -I_m)`; time functions
/// are the last `m` coordinates.
#[derive(Debug, Clone, Copy)]
pub struct FlatPseudoEuclidean {
    sig: Signature,
}

impl FlatPseudoEuclidean {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        Ok(Self {
            sig: Signature::new(n, m)?,
        })
    }
}

impl Ambient for FlatPseudoEuclidean {
    fn name(&self) -> String {
        format!("flat{}", self.sig)
    }
    fn signature(&self) -> Signature {
        self.sig
    }
    fn metric(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.sig.eta()
    }
    fn is_flat(&self) -> bool {
        true
    }
    fn christoffel(&self, _x: &DVector<f64>) -> Christoffel {
        Christoffel::zeros(self.sig.dim())
    }
    fn curvature(&self, _x: &DVector<f64>) -> Curvature {
        Curvature::zeros(self.sig.dim())
    }
    fn time_functions(&self, x: &DVector<f64>) -> DVector<f64> {
        x.rows(self.sig.n, self.sig.m).into_owned()
    }
    fn time_gradients(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        let (n, m) = (self.sig.n, self.sig.m);
        DMatrix::from_fn(m, n + m, |a, j| if j == n + a { 1.0 } else { 0.0 })
    }
    fn time_hessians(&self, _x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let d = self.sig.dim();
        vec![DMatrix::zeros(d, d); self.sig.m]
    }
}

/// Tangent bundle of flat `R^n` in coordinates `(x, xdot)` with the neutral
/// metric `G(d_x^i, d_xdot^j) = delta_ij`, all other components zero, i.e.
/// `ds^2 = 2 sum dx^i dxdot^i`. The time functions are
/// `t_i = (xdot^i - x^i)/sqrt 2`, so that `psi = 1` and `xdot` increases along `T`.
#[derive(Debug, Clone, Copy)]
pub struct NeutralTangentBundle {
    n: usize,
}

impl NeutralTangentBundle {
    pub fn new(n: usize) -> Result<Self> {
        Signature::new(n, n)?;
        Ok(Self { n })
    }
}

impl Ambient for NeutralTangentBundle {
    fn name(&self) -> String {
        format!("neutral({})", self.n)
    }
    fn signature(&self) -> Signature {
        Signature { n: self.n, m: self.n }
    }
    fn metric(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(2 * n, 2 * n, |i, j| if i.abs_diff(j) == n { 1.0 } else { 0.0 })
    }
    fn is_flat(&self) -> bool {
        true
    }
    fn christoffel(&self, _x: &DVector<f64>) -> Christoffel {
        Christoffel::zeros(2 * self.n)
    }
    fn curvature(&self, _x: &DVector<f64>) -> Curvature {
        Curvature::zeros(2 * self.n)
    }
    fn time_functions(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(n, |a, _| (x[n + a] - x[a]) * FRAC_1_SQRT_2)
    }
    fn time_gradients(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, 2 * n, |a, j| {
            if j == a {
                -FRAC_1_SQRT_2
            } else if j == n + a {
                FRAC_1_SQRT_2
            } else {
                0.0
            }
        })
    }
    fn time_hessians(&self, _x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        vec![DMatrix::zeros(2 * self.n, 2 * self.n); self.n]
    }
}

/// A Riemannian factor of a product metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor {
    /// Round 2-sphere of the given radius in coordinates `(theta, phi)`.
    Sphere { radius: f64 },
    /// Flat `R^dim` or a flat torus lifted to its universal cover.
    Flat { dim: usize },
}

impl Factor {
    pub fn dim(&self) -> usize {
        match self {
            Factor::Sphere { .. } => 2,
            Factor::Flat { dim } => *dim,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Factor::Sphere { radius } if !(radius > 0.0) => {
                Err(Error::Config(format!("sphere radius must be positive, got {radius}")))
            }
            Factor::Flat { dim: 0 } => Err(Error::Config("flat factor needs dim >= 1".into())),
            _ => Ok(()),
        }
    }

    fn metric(&self, y: &[f64]) -> DMatrix<f64> {
        match *self {
            Factor::Sphere { radius } => {
                let r2 = radius * radius;
                DMatrix::from_diagonal(&DVector::from_vec(vec![r2, r2 * y[0].sin().powi(2)]))
            }
            Factor::Flat { dim } => DMatrix::identity(dim, dim),
        }
    }

    /// Nonzero `Gamma^c_{ab}` as `(c, a, b, value)`.
    fn christoffel(&self, y: &[f64]) -> Vec<(usize, usize, usize, f64)> {
        match self {
            Factor::Sphere { .. } => {
                let (s, c) = y[0].sin_cos();
                vec![(0, 1, 1, -s * c), (1, 0, 1, c / s), (1, 1, 0, c / s)]
            }
            Factor::Flat { .. } => Vec::new(),
        }
    }

    fn sectional(&self) -> f64 {
        match self {
            Factor::Sphere { radius } => 1.0 / (radius * radius),
            Factor::Flat { .. } => 0.0,
        }
    }

    fn in_domain(&self, y: &[f64]) -> bool {
        match self {
            Factor::Sphere { .. } => y[0] > 1e-6 && y[0] < std::f64::consts::PI - 1e-6,
            Factor::Flat { .. } => true,
        }
    }

    fn label(&self) -> String {
        match self {
            Factor::Sphere { radius } => format!("S2({radius})"),
            Factor::Flat { dim } => format!("R{dim}"),
        }
    }
}

/// `G = g1 - g2` on `M1 x M2`. The time functions are the coordinates of the
/// second factor.
#[derive(Debug, Clone, Copy)]
pub struct ProductMetric {
    pub first: Factor,
    pub second: Factor,
}

impl ProductMetric {
    pub fn new(first: Factor, second: Factor) -> Result<Self> {
        first.validate()?;
        second.validate()?;
        Ok(Self { first, second })
    }

    fn split<'a>(&self, x: &'a DVector<f64>) -> (&'a [f64], &'a [f64]) {
        x.as_slice().split_at(self.first.dim())
    }
}

impl Ambient for ProductMetric {
    fn name(&self) -> String {
        format!("{} x -{}", self.first.label(), self.second.label())
    }
    fn signature(&self) -> Signature {
        Signature {
            n: self.first.dim(),
            m: self.second.dim(),
        }
    }
    fn check_domain(&self, x: &DVector<f64>) -> Result<()> {
        let (a, b) = self.split(x);
        if self.first.in_domain(a) && self.second.in_domain(b) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                space: self.name(),
                detail: format!("{:?}", x.as_slice()),
            })
        }
    }
    fn metric(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let (a, b) = self.split(x);
        let n = self.first.dim();
        let d = self.dim();
        let mut g = DMatrix::zeros(d, d);
        g.view_mut((0, 0), (n, n)).copy_from(&self.first.metric(a));
        g.view_mut((n, n), (d - n, d - n))
            .copy_from(&(-self.second.metric(b)));
        g
    }
    fn is_flat(&self) -> bool {
        self.first.sectional() == 0.0 && self.second.sectional() == 0.0
    }
    fn christoffel(&self, x: &DVector<f64>) -> Christoffel {
        let (a, b) = self.split(x);
        let n = self.first.dim();
        let mut out = Christoffel::zeros(self.dim());
        for (c, i, j, v) in self.first.christoffel(a) {
            out.set(c, i, j, v);
        }
        for (c, i, j, v) in self.second.christoffel(b) {
            out.set(n + c, n + i, n + j, v);
        }
        out
    }
    fn curvature(&self, x: &DVector<f64>) -> Curvature {
        let (a, b) = self.split(x);
        let n = self.first.dim();
        let mut out = Curvature::zeros(self.dim());
        // Factor with G = s g of constant curvature k:
        // Rbar_{abcd} = -s k (g_bc g_ad - g_ac g_bd).
        for (factor, y, off, s) in [(&self.first, a, 0, 1.0), (&self.second, b, n, -1.0)] {
            let k = factor.sectional();
            if k == 0.0 {
                continue;
            }
            let g = factor.metric(y);
            let fd = factor.dim();
            for i in 0..fd {
                for j in 0..fd {
                    for p in 0..fd {
                        for q in 0..fd {
                            let v = -s * k * (g[(j, p)] * g[(i, q)] - g[(i, p)] * g[(j, q)]);
                            if v != 0.0 {
                                out.set(off + i, off + j, off + p, off + q, v);
                            }
                        }
                    }
                }
            }
        }
        out
    }
    fn time_functions(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.first.dim();
        x.rows(n, self.second.dim()).into_owned()
    }
    fn time_gradients(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.first.dim();
        let m = self.second.dim();
        DMatrix::from_fn(m, n + m, |a, j| if j == n + a { 1.0 } else { 0.0 })
    }
    fn time_hessians(&self, _x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let d = self.dim();
        vec![DMatrix::zeros(d, d); self.second.dim()]
    }
}

/// Serializable description of a catalog space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AmbientSpec {
    Flat { n: usize, m: usize },
    Neutral { n: usize },
    Product { first: Factor, second: Factor },
}

impl AmbientSpec {
    pub fn build(&self) -> Result<Box<dyn Ambient>> {
        Ok(match *self {
            AmbientSpec::Flat { n, m } => Box::new(FlatPseudoEuclidean::new(n, m)?),
            AmbientSpec::Neutral { n } => Box::new(NeutralTangentBundle::new(n)?),
            AmbientSpec::Product { first, second } => Box::new(ProductMetric::new(first, second)?),
        })
    }
}
