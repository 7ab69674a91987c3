use nalgebra::{DMatrix, DVector};

use super::signature::Signature;
use crate::error::{Error, Result};

/// Default tolerance for O(n,m) membership.
pub const ONM_TOL: f64 = 1e-9;

/// An element of O(n,m) stored by blocks.
///
/// With background frame `{e_i, T_b}` and adapted frame `{tau_i, nu_a}`:
/// `X_ij = G(tau_i, e_j)`, `W_ib = G(tau_i, T_b)`, `U_aj = -G(nu_a, e_j)`,
/// `V_ab = -G(nu_a, T_b)`, and the assembled matrix is `(X, W; -U, -V)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoOrthogonalMatrix {
    pub sig: Signature,
    pub x: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

impl PseudoOrthogonalMatrix {
    pub fn from_blocks(
        sig: Signature,
        x: DMatrix<f64>,
        w: DMatrix<f64>,
        u: DMatrix<f64>,
        v: DMatrix<f64>,
    ) -> Result<Self> {
        let (n, m) = (sig.n, sig.m);
        let shapes = [
            ("X", x.shape(), (n, n)),
            ("W", w.shape(), (n, m)),
            ("U", u.shape(), (m, n)),
            ("V", v.shape(), (m, m)),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(Error::Dimension(format!(
                    "block {name} is {}x{}, expected {}x{} for signature {sig}",
                    got.0, got.1, want.0, want.1
                )));
            }
        }
        Ok(Self { sig, x, w, u, v })
    }

    /// Splits an assembled `(n+m)x(n+m)` matrix `(X, W; -U, -V)`.
    pub fn from_assembled(sig: Signature, full: &DMatrix<f64>) -> Result<Self> {
        let d = sig.dim();
        if full.shape() != (d, d) {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, expected {d}x{d}",
                full.nrows(),
                full.ncols()
            )));
        }
        let (n, m) = (sig.n, sig.m);
        Ok(Self {
            sig,
            x: full.view((0, 0), (n, n)).into_owned(),
            w: full.view((0, n), (n, m)).into_owned(),
            u: -full.view((n, 0), (m, n)).into_owned(),
            v: -full.view((n, n), (m, m)).into_owned(),
        })
    }

    /// The untilted element: X = I, V = I, U = W = 0.
    pub fn identity(sig: Signature) -> Self {
        let (n, m) = (sig.n, sig.m);
        Self {
            sig,
            x: DMatrix::identity(n, n),
            w: DMatrix::zeros(n, m),
            u: DMatrix::zeros(m, n),
            v: DMatrix::identity(m, m),
        }
    }

    /// Standard boost with one rapidity per pair of directions. The last
    /// `min(n,m)` spacelike directions are paired with the last `min(n,m)`
    /// timelike directions.
    pub fn boost(sig: Signature, rapidities: &[f64]) -> Result<Self> {
        let k = sig.min_dim();
        if rapidities.len() != k {
            return Err(Error::Dimension(format!(
                "boost in signature {sig} takes {k} rapidities, got {}",
                rapidities.len()
            )));
        }
        let mut out = Self::identity(sig);
        let (n, m) = (sig.n, sig.m);
        for (j, &th) in rapidities.iter().enumerate() {
            let i = n - k + j;
            let a = m - k + j;
            out.x[(i, i)] = th.cosh();
            out.v[(a, a)] = th.cosh();
            out.w[(i, a)] = th.sinh();
            out.u[(a, i)] = th.sinh();
        }
        Ok(out)
    }

    pub fn assemble(&self) -> DMatrix<f64> {
        let (n, m) = (self.sig.n, self.sig.m);
        let mut full = DMatrix::zeros(n + m, n + m);
        full.view_mut((0, 0), (n, n)).copy_from(&self.x);
        full.view_mut((0, n), (n, m)).copy_from(&self.w);
        full.view_mut((n, 0), (m, n)).copy_from(&(-&self.u));
        full.view_mut((n, n), (m, m)).copy_from(&(-&self.v));
        full
    }

    /// Same element seen with the roles of the spacelike and timelike blocks
    /// exchanged: `(X, W, U, V) -> (V, U, W, X)` in signature `(m, n)`.
    pub fn mirrored(&self) -> Self {
        Self {
            sig: self.sig.mirrored(),
            x: self.v.clone(),
            w: self.u.clone(),
            u: self.w.clone(),
            v: self.x.clone(),
        }
    }

    /// Left action of rotations of the adapted frame (`p` on tangents,
    /// `q` on normals) and right action of rotations of the background
    /// frame (`s` on `e_i`, `r` on `T_b`).
    pub fn rotated(
        &self,
        p: &DMatrix<f64>,
        q: &DMatrix<f64>,
        s: &DMatrix<f64>,
        r: &DMatrix<f64>,
    ) -> Self {
        Self {
            sig: self.sig,
            x: p * &self.x * s,
            w: p * &self.w * r,
            u: q * &self.u * s,
            v: q * &self.v * r,
        }
    }

    /// Max-abs deviation from the three block identities
    /// `X^T X = I + U^T U`, `V^T V = I + W^T W`, `U^T V = X^T W`.
    pub fn onm_deviation(&self) -> f64 {
        let (n, m) = (self.sig.n, self.sig.m);
        let e1 = self.x.transpose() * &self.x
            - DMatrix::<f64>::identity(n, n)
            - self.u.transpose() * &self.u;
        let e2 = self.v.transpose() * &self.v
            - DMatrix::<f64>::identity(m, m)
            - self.w.transpose() * &self.w;
        let e3 = self.u.transpose() * &self.v - self.x.transpose() * &self.w;
        e1.amax().max(e2.amax()).max(e3.amax())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.assemble() - other.assemble()).amax()
    }

    pub fn tilt(&self) -> f64 {
        tilt(&self.v)
    }
}

/// True iff all three O(n,m) block identities hold within `tol`.
pub fn check_onm(mat: &PseudoOrthogonalMatrix, tol: f64) -> bool {
    mat.onm_deviation() <= tol
}

/// Tilt `v = sqrt(sum V_ab^2)`. Raising or lowering normal indices only
/// flips signs, so the squared sum is convention independent.
pub fn tilt(v_block: &DMatrix<f64>) -> f64 {
    v_block.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Column vector helper.
pub(crate) fn col(m: &DMatrix<f64>, j: usize) -> DVector<f64> {
    m.column(j).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m11(x: f64, w: f64, u: f64, v: f64) -> PseudoOrthogonalMatrix {
        let s = Signature::new(1, 1).unwrap();
        PseudoOrthogonalMatrix::from_blocks(
            s,
            DMatrix::from_element(1, 1, x),
            DMatrix::from_element(1, 1, w),
            DMatrix::from_element(1, 1, u),
            DMatrix::from_element(1, 1, v),
        )
        .unwrap()
    }

    #[test]
    fn identity_is_member() {
        let s = Signature::new(3, 2).unwrap();
        assert!(check_onm(&PseudoOrthogonalMatrix::identity(s), 1e-14));
    }

    #[test]
    fn hyperbolic_pair() {
        assert!(check_onm(&m11(1.25, 0.75, 0.75, 1.25), 1e-12));
    }

    #[test]
    fn broken_v_block_rejected() {
        let bad = m11(1.25, 0.75, 0.75, 1.0);
        // V^T V - I - W^T W = 1 - 1 - 0.5625
        assert!((bad.onm_deviation() - 0.5625).abs() < 1e-15);
        assert!(!check_onm(&bad, ONM_TOL));
    }

    #[test]
    fn shape_mismatch_is_error() {
        let s = Signature::new(2, 1).unwrap();
        let r = PseudoOrthogonalMatrix::from_blocks(
            s,
            DMatrix::identity(2, 2),
            DMatrix::zeros(1, 2),
            DMatrix::zeros(1, 2),
            DMatrix::identity(1, 1),
        );
        assert!(matches!(r, Err(Error::Dimension(_))));
        assert!(Signature::new(0, 2).is_err());
    }

    #[test]
    fn assembled_matrix_preserves_eta() {
        let s = Signature::new(3, 2).unwrap();
        let b = PseudoOrthogonalMatrix::boost(s, &[0.3, 0.7]).unwrap();
        let m = b.assemble();
        let eta = s.eta();
        let d = (m.transpose() * &eta * &m - &eta).amax();
        assert!(d < 1e-14);
        let back = PseudoOrthogonalMatrix::from_assembled(s, &m).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn mirror_preserves_membership() {
        let s = Signature::new(1, 3).unwrap();
        let b = PseudoOrthogonalMatrix::boost(s, &[1.1]).unwrap();
        assert!(check_onm(&b, 1e-13));
        assert!(check_onm(&b.mirrored(), 1e-13));
        assert_eq!(b.mirrored().mirrored(), b);
    }

    #[test]
    fn tilt_values() {
        let s = Signature::new(4, 3).unwrap();
        assert!((PseudoOrthogonalMatrix::identity(s).tilt() - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(m11(1.25, 0.75, 0.75, 1.25).tilt(), 1.25);
        let v = DMatrix::from_element(1, 1, 1.0 / (1.0f64 - 0.36).sqrt());
        assert!((tilt(&v) - 1.25).abs() < 1e-15);
    }
}
