use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Metric signature: `n` positive (spacelike) and `m` negative (timelike) directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub n: usize,
    pub m: usize,
}

impl Signature {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Dimension(format!(
                "signature ({n},{m}) needs n >= 1 and m >= 1"
            )));
        }
        Ok(Self { n, m })
    }

    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    pub fn min_dim(&self) -> usize {
        self.n.min(self.m)
    }

    /// Roles of the two blocks swapped.
    pub fn mirrored(&self) -> Self {
        Self {
            n: self.m,
            m: self.n,
        }
    }

    /// diag(I_n, -I_m).
    pub fn eta(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_fn(self.dim(), |i, _| {
            if i < self.n {
                1.0
            } else {
                -1.0
            }
        }))
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.n, self.m)
    }
}

/// Inner product `u^T G w`.
pub fn inner(g: &DMatrix<f64>, u: &DVector<f64>, w: &DVector<f64>) -> f64 {
    let mut s = 0.0;
    for a in 0..u.len() {
        if u[a] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for b in 0..w.len() {
            row += g[(a, b)] * w[b];
        }
        s += u[a] * row;
    }
    s
}

/// Count of (positive, negative, near-zero) eigenvalues of a symmetric matrix.
pub fn inertia(sym: &DMatrix<f64>, zero_tol: f64) -> (usize, usize, usize) {
    let eig = sym.clone().symmetric_eigenvalues();
    let mut pos = 0;
    let mut neg = 0;
    let mut zero = 0;
    for &l in eig.iter() {
        if l > zero_tol {
            pos += 1;
        } else if l < -zero_tol {
            neg += 1;
        } else {
            zero += 1;
        }
    }
    (pos, neg, zero)
}
