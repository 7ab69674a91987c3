use nalgebra::{DMatrix, DVector};

use super::onm::PseudoOrthogonalMatrix;
use super::signature::{inner, Signature};
use crate::error::{Error, Result};

/// A background frame `{e_i, T_b}` and an adapted frame `{tau_i, nu_a}` at a
/// point, both given by chart components, with the metric at that point.
#[derive(Debug, Clone)]
pub struct FramePair {
    pub sig: Signature,
    pub point: DVector<f64>,
    pub metric: DMatrix<f64>,
    /// `e_1..e_n, T_1..T_m`.
    pub background: Vec<DVector<f64>>,
    /// `tau_1..tau_n, nu_1..nu_m`.
    pub adapted: Vec<DVector<f64>>,
}

impl FramePair {
    pub fn new(
        sig: Signature,
        point: DVector<f64>,
        metric: DMatrix<f64>,
        background: Vec<DVector<f64>>,
        adapted: Vec<DVector<f64>>,
    ) -> Result<Self> {
        let d = sig.dim();
        let ok = metric.shape() == (d, d)
            && point.len() == d
            && background.len() == d
            && adapted.len() == d
            && background.iter().chain(adapted.iter()).all(|v| v.len() == d);
        if !ok {
            return Err(Error::Dimension(format!(
                "frame pair needs {d} vectors of length {d} and a {d}x{d} metric"
            )));
        }
        Ok(Self {
            sig,
            point,
            metric,
            background,
            adapted,
        })
    }

    /// Builds the adapted frame from a background frame and an O(n,m) element:
    /// `tau_i = X_ij e_j - W_ib T_b`, `nu_a = -U_aj e_j + V_ab T_b`.
    pub fn from_background(
        sig: Signature,
        point: DVector<f64>,
        metric: DMatrix<f64>,
        background: Vec<DVector<f64>>,
        mat: &PseudoOrthogonalMatrix,
    ) -> Result<Self> {
        let (n, m) = (sig.n, sig.m);
        let d = sig.dim();
        let mut adapted = Vec::with_capacity(d);
        for i in 0..n {
            let mut t = DVector::zeros(d);
            for j in 0..n {
                t.axpy(mat.x[(i, j)], &background[j], 1.0);
            }
            for b in 0..m {
                t.axpy(-mat.w[(i, b)], &background[n + b], 1.0);
            }
            adapted.push(t);
        }
        for a in 0..m {
            let mut t = DVector::zeros(d);
            for j in 0..n {
                t.axpy(-mat.u[(a, j)], &background[j], 1.0);
            }
            for b in 0..m {
                t.axpy(mat.v[(a, b)], &background[n + b], 1.0);
            }
            adapted.push(t);
        }
        Self::new(sig, point, metric, background, adapted)
    }

    pub fn tau(&self) -> &[DVector<f64>] {
        &self.adapted[..self.sig.n]
    }

    pub fn nu(&self) -> &[DVector<f64>] {
        &self.adapted[self.sig.n..]
    }

    pub fn g(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        inner(&self.metric, a, b)
    }

    /// The relating O(n,m) element, read off from inner products.
    pub fn blocks(&self) -> PseudoOrthogonalMatrix {
        let (n, m) = (self.sig.n, self.sig.m);
        let bg = &self.background;
        let ad = &self.adapted;
        PseudoOrthogonalMatrix {
            sig: self.sig,
            x: DMatrix::from_fn(n, n, |i, j| self.g(&ad[i], &bg[j])),
            w: DMatrix::from_fn(n, m, |i, b| self.g(&ad[i], &bg[n + b])),
            u: DMatrix::from_fn(m, n, |a, j| -self.g(&ad[n + a], &bg[j])),
            v: DMatrix::from_fn(m, m, |a, b| -self.g(&ad[n + a], &bg[n + b])),
        }
    }

    /// Max deviation of the Gram matrices of both frames from `diag(I, -I)`.
    pub fn orthonormality_defect(&self) -> f64 {
        let eta = self.sig.eta();
        let d = self.sig.dim();
        let mut worst: f64 = 0.0;
        for frame in [&self.background, &self.adapted] {
            for a in 0..d {
                for b in 0..d {
                    worst = worst.max((self.g(&frame[a], &frame[b]) - eta[(a, b)]).abs());
                }
            }
        }
        worst
    }

    /// Both frames orthonormal within `tol` and the tangent Gram matrix
    /// positive definite.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let defect = self.orthonormality_defect();
        if defect > tol {
            return Err(Error::Invariant(format!(
                "frames not G-orthonormal: defect {defect:.3e}"
            )));
        }
        let n = self.sig.n;
        let gram = DMatrix::from_fn(n, n, |i, j| self.g(&self.tau()[i], &self.tau()[j]));
        let min_eig = gram.symmetric_eigenvalues().min();
        if min_eig <= 0.0 {
            return Err(Error::Invariant(format!(
                "tangent span not spacelike (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(())
    }
}

/// Components of a covariant tensor of rank `rank` in chart coordinates,
/// flattened in row-major index order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub dim: usize,
    pub rank: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(dim: usize, rank: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim.pow(rank as u32) {
            return Err(Error::Dimension(format!(
                "rank-{rank} tensor in dimension {dim} needs {} components, got {}",
                dim.pow(rank as u32),
                data.len()
            )));
        }
        Ok(Self { dim, rank, data })
    }

    pub fn zeros(dim: usize, rank: usize) -> Self {
        Self {
            dim,
            rank,
            data: vec![0.0; dim.pow(rank as u32)],
        }
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let d = m.nrows();
        Self {
            dim: d,
            rank: 2,
            data: (0..d * d).map(|k| m[(k / d, k % d)]).collect(),
        }
    }

    pub fn from_covector(c: &DVector<f64>) -> Self {
        Self {
            dim: c.len(),
            rank: 1,
            data: c.iter().copied().collect(),
        }
    }

    /// `B(v_1, ..., v_rank)`.
    pub fn eval(&self, vectors: &[&DVector<f64>]) -> f64 {
        debug_assert_eq!(vectors.len(), self.rank);
        if self.rank == 0 {
            return self.data[0];
        }
        let d = self.dim;
        let mut total = 0.0;
        let mut idx = vec![0usize; self.rank];
        for (flat, &val) in self.data.iter().enumerate() {
            if val == 0.0 {
                continue;
            }
            let mut rem = flat;
            for k in (0..self.rank).rev() {
                idx[k] = rem % d;
                rem /= d;
            }
            let mut prod = val;
            for (k, &i) in idx.iter().enumerate() {
                prod *= vectors[k][i];
                if prod == 0.0 {
                    break;
                }
            }
            total += prod;
        }
        total
    }
}

/// Frame-dependent positive norm: the sum of squares of all evaluations on
/// spacelike background vectors plus the sum of squares of all evaluations on
/// timelike background vectors. Mixed evaluations do not enter. This is not
/// the Hilbert-Schmidt norm and changes under boosts of the background frame.
pub fn tensor_norm_sq(b: &Tensor, background: &[DVector<f64>], sig: Signature) -> Result<f64> {
    if background.len() != sig.dim() || b.dim != sig.dim() {
        return Err(Error::Dimension(format!(
            "tensor of dimension {} against a frame of {} vectors in signature {sig}",
            b.dim,
            background.len()
        )));
    }
    let (n, m) = (sig.n, sig.m);
    let mut total = 0.0;
    for (offset, count) in [(0, n), (n, m)] {
        let mut idx = vec![0usize; b.rank];
        loop {
            let vecs: Vec<&DVector<f64>> = idx.iter().map(|&i| &background[offset + i]).collect();
            total += b.eval(&vecs).powi(2);
            // odometer
            let mut k = 0;
            while k < b.rank {
                idx[k] += 1;
                if idx[k] < count {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == b.rank {
                break;
            }
        }
    }
    Ok(total)
}

/// `||B||_k^2 = sum_j ||D^j B||^2` where `derivatives[j]` holds the `j`-th
/// covariant derivative supplied by the caller.
pub fn tensor_norm_k_sq(
    derivatives: &[Tensor],
    background: &[DVector<f64>],
    sig: Signature,
) -> Result<f64> {
    derivatives
        .iter()
        .map(|t| tensor_norm_sq(t, background, sig))
        .sum()
}

/// Lowers a vector with the metric.
pub fn lower(metric: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    metric * v
}

#[derive(Debug, Clone)]
pub struct FrameNormBounds {
    pub tau_norms: Vec<f64>,
    pub nu_norms: Vec<f64>,
    pub v: f64,
    pub bounds_hold: bool,
}

/// Norms of the adapted vectors against the a-priori bounds
/// `||tau_i||^2 <= n(n+2) v^2` and `||nu_a||^2 <= 2 m v^2`.
pub fn frame_norm_bounds(fp: &FramePair) -> FrameNormBounds {
    let (n, m) = (fp.sig.n, fp.sig.m);
    let norm_sq = |vec: &DVector<f64>| {
        let t = Tensor::from_covector(&lower(&fp.metric, vec));
        tensor_norm_sq(&t, &fp.background, fp.sig).expect("shapes checked at construction")
    };
    let tau_norms: Vec<f64> = fp.tau().iter().map(norm_sq).collect();
    let nu_norms: Vec<f64> = fp.nu().iter().map(norm_sq).collect();
    let v = fp.blocks().tilt();
    let tau_bound = (n * (n + 2)) as f64 * v * v;
    let nu_bound = (2 * m) as f64 * v * v;
    let bounds_hold =
        tau_norms.iter().all(|&t| t <= tau_bound) && nu_norms.iter().all(|&t| t <= nu_bound);
    FrameNormBounds {
        tau_norms,
        nu_norms,
        v,
        bounds_hold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard_frame(d: usize) -> Vec<DVector<f64>> {
        (0..d)
            .map(|i| {
                let mut e = DVector::zeros(d);
                e[i] = 1.0;
                e
            })
            .collect()
    }

    #[test]
    fn metric_norm_in_signature_2_1() {
        let s = Signature::new(2, 1).unwrap();
        let g = Tensor::from_matrix(&s.eta());
        let n = tensor_norm_sq(&g, &standard_frame(3), s).unwrap();
        assert_eq!(n, 3.0);
    }

    #[test]
    fn zero_and_unit_covector() {
        let s = Signature::new(2, 1).unwrap();
        let frame = standard_frame(3);
        assert_eq!(tensor_norm_sq(&Tensor::zeros(3, 2), &frame, s).unwrap(), 0.0);
        let e1 = Tensor::from_covector(&DVector::from_vec(vec![1.0, 0.0, 0.0]));
        assert_eq!(tensor_norm_sq(&e1, &frame, s).unwrap(), 1.0);
    }

    #[test]
    fn norm_is_boost_dependent() {
        let s = Signature::new(1, 1).unwrap();
        let eta = s.eta();
        let th: f64 = 0.8;
        let boosted = vec![
            DVector::from_vec(vec![th.cosh(), th.sinh()]),
            DVector::from_vec(vec![th.sinh(), th.cosh()]),
        ];
        let c = Tensor::from_covector(&DVector::from_vec(vec![1.0, 0.0]));
        let a = tensor_norm_sq(&c, &standard_frame(2), s).unwrap();
        let b = tensor_norm_sq(&c, &boosted, s).unwrap();
        assert_eq!(a, 1.0);
        assert!((b - (th.cosh().powi(2) + th.sinh().powi(2))).abs() < 1e-14);
        let _ = eta;
    }

    #[test]
    fn rank_mismatch_is_error() {
        assert!(Tensor::new(3, 2, vec![0.0; 8]).is_err());
        let s = Signature::new(2, 1).unwrap();
        assert!(tensor_norm_sq(&Tensor::zeros(4, 1), &standard_frame(3), s).is_err());
    }

    #[test]
    fn untilted_frame_bounds() {
        let s = Signature::new(3, 2).unwrap();
        let fp = FramePair::from_background(
            s,
            DVector::zeros(5),
            s.eta(),
            standard_frame(5),
            &PseudoOrthogonalMatrix::identity(s),
        )
        .unwrap();
        let b = frame_norm_bounds(&fp);
        assert!(b.tau_norms.iter().chain(b.nu_norms.iter()).all(|&x| x == 1.0));
        assert!((b.v - 2f64.sqrt()).abs() < 1e-15);
        assert!(b.bounds_hold);
    }

    #[test]
    fn boost_ln2_bounds() {
        let s = Signature::new(1, 1).unwrap();
        let mat = PseudoOrthogonalMatrix::boost(s, &[2f64.ln()]).unwrap();
        let fp = FramePair::from_background(s, DVector::zeros(2), s.eta(), standard_frame(2), &mat)
            .unwrap();
        fp.validate(1e-14).unwrap();
        let b = frame_norm_bounds(&fp);
        // cosh(ln 2) = 1.25, sinh(ln 2) = 0.75
        assert!((b.tau_norms[0] - 2.125).abs() < 1e-14);
        assert!((b.v - 1.25).abs() < 1e-14);
        assert!(b.tau_norms[0] <= 4.6875 && b.bounds_hold);
    }

    #[test]
    fn blocks_round_trip_through_frames() {
        let s = Signature::new(2, 2).unwrap();
        let mat = PseudoOrthogonalMatrix::boost(s, &[0.4, 1.3]).unwrap();
        let fp = FramePair::from_background(s, DVector::zeros(4), s.eta(), standard_frame(4), &mat)
            .unwrap();
        assert!(fp.blocks().max_abs_diff(&mat) < 1e-14);
    }
}
