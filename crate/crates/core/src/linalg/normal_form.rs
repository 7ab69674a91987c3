//! Canonical form of an O(n,m) element under independent rotations of the
//! tangent, normal, background-spacelike and background-timelike frames.
//!
//! For `n >= m` the canonical blocks are
//!
//! ```text
//! X = diag(I_{n-m}, D1)      W = (0 ; S D4 A^T)
//! U = (0 | A D3)             V = D2
//! ```
//!
//! with `D1^2 = I + D3^2`, `D2^2 = I + D4^2`, `A` orthogonal and `S` a
//! diagonal matrix of signs. For `n < m` the same construction is applied to
//! the mirrored element (roles of the two blocks exchanged) and mapped back.

use nalgebra::{DMatrix, DVector};

use super::onm::{col, PseudoOrthogonalMatrix, ONM_TOL};
use super::signature::Signature;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub sig: Signature,
    /// Left rotation of the tangent vectors (n x n).
    pub r_tan: DMatrix<f64>,
    /// Left rotation of the normal vectors (m x m).
    pub r_nor: DMatrix<f64>,
    /// Right rotation of the background spacelike vectors (n x n).
    pub s_tan: DMatrix<f64>,
    /// Right rotation of the background timelike vectors (m x m).
    pub s_nor: DMatrix<f64>,
    /// Diagonal of the X block beyond the identity part.
    pub d1: DVector<f64>,
    /// Diagonal of the V block beyond the identity part.
    pub d2: DVector<f64>,
    /// Magnitudes in the U block.
    pub d3: DVector<f64>,
    /// Magnitudes in the W block.
    pub d4: DVector<f64>,
    pub a_block: DMatrix<f64>,
    pub sign_choices: Vec<f64>,
    /// True when built through the mirrored construction (`n < m`).
    pub mirrored: bool,
}

/// Decomposes `mat` with the default membership tolerance.
pub fn onm_normal_form(mat: &PseudoOrthogonalMatrix) -> Result<NormalForm> {
    onm_normal_form_tol(mat, ONM_TOL)
}

pub fn onm_normal_form_tol(mat: &PseudoOrthogonalMatrix, tol: f64) -> Result<NormalForm> {
    let dev = mat.onm_deviation();
    if dev > tol {
        return Err(Error::NotPseudoOrthogonal {
            n: mat.sig.n,
            m: mat.sig.m,
            deviation: dev,
            tol,
        });
    }
    if mat.sig.n >= mat.sig.m {
        Ok(decompose_wide(mat))
    } else {
        let t = decompose_wide(&mat.mirrored());
        // In the mirrored element tangents <-> normals and e <-> T.
        Ok(NormalForm {
            sig: mat.sig,
            r_tan: t.r_nor,
            r_nor: t.r_tan,
            s_tan: t.s_nor,
            s_nor: t.s_tan,
            d1: t.d2,
            d2: t.d1,
            d3: t.d4,
            d4: t.d3,
            a_block: t.a_block,
            sign_choices: t.sign_choices,
            mirrored: true,
        })
    }
}

/// Reassembles the original element from its normal form.
pub fn reconstruct(nf: &NormalForm) -> PseudoOrthogonalMatrix {
    nf.canonical().rotated(
        &nf.r_tan.transpose(),
        &nf.r_nor.transpose(),
        &nf.s_tan.transpose(),
        &nf.s_nor.transpose(),
    )
}

impl NormalForm {
    /// The canonical block form `R M S`.
    pub fn canonical(&self) -> PseudoOrthogonalMatrix {
        if !self.mirrored {
            return canonical_wide(
                self.sig,
                &self.d1,
                &self.d2,
                &self.d3,
                &self.d4,
                &self.a_block,
                &self.sign_choices,
            );
        }
        let t = canonical_wide(
            self.sig.mirrored(),
            &self.d2,
            &self.d1,
            &self.d4,
            &self.d3,
            &self.a_block,
            &self.sign_choices,
        );
        t.mirrored()
    }

    /// Max violation of `D1^2 = I + D3^2` and `D2^2 = I + D4^2`.
    pub fn pythagorean_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.d1.len() {
            worst = worst.max((self.d1[i].powi(2) - 1.0 - self.d3[i].powi(2)).abs());
            worst = worst.max((self.d2[i].powi(2) - 1.0 - self.d4[i].powi(2)).abs());
        }
        worst
    }

    /// `|tr D1^2 - tr D2^2|`.
    pub fn trace_defect(&self) -> f64 {
        (self.d1.norm_squared() - self.d2.norm_squared()).abs()
    }

    pub fn invariants_hold(&self, tol: f64) -> bool {
        self.pythagorean_defect() <= tol
            && self.trace_defect() <= tol
            && self.d1.iter().chain(self.d2.iter()).all(|&d| d >= 1.0 - tol)
            && self.d3.iter().chain(self.d4.iter()).all(|&d| d >= 0.0)
    }
}

fn canonical_wide(
    sig: Signature,
    d1: &DVector<f64>,
    d2: &DVector<f64>,
    d3: &DVector<f64>,
    d4: &DVector<f64>,
    a: &DMatrix<f64>,
    signs: &[f64],
) -> PseudoOrthogonalMatrix {
    let (n, m) = (sig.n, sig.m);
    let off = n - m;
    let mut x = DMatrix::identity(n, n);
    for i in 0..m {
        x[(off + i, off + i)] = d1[i];
    }
    let mut u = DMatrix::zeros(m, n);
    let ad3 = a * DMatrix::from_diagonal(d3);
    u.view_mut((0, off), (m, m)).copy_from(&ad3);
    let v = DMatrix::from_diagonal(d2);
    let s = DMatrix::from_diagonal(&DVector::from_row_slice(signs));
    let w1 = s * DMatrix::from_diagonal(d4) * a.transpose();
    let mut w = DMatrix::zeros(n, m);
    w.view_mut((off, 0), (m, m)).copy_from(&w1);
    PseudoOrthogonalMatrix { sig, x, w, u, v }
}

/// Singular triplets sorted by decreasing singular value, ties broken by the
/// original index. An exactly zero matrix maps to the trailing coordinate
/// directions, so the untilted element decomposes with identity rotations.
struct OrderedSvd {
    /// `rows x k`, orthonormal.
    left: DMatrix<f64>,
    values: DVector<f64>,
    /// `cols x k`, orthonormal.
    right: DMatrix<f64>,
}

/// SVD of a wide (`rows <= cols`) matrix by one-sided Jacobi rotations on its
/// transpose. Unlike bidiagonalization this keeps tiny singular values and
/// their vectors accurate to working precision, which matters for nearly
/// untilted elements.
fn ordered_svd(mat: &DMatrix<f64>) -> OrderedSvd {
    let (rows, cols) = mat.shape();
    debug_assert!(rows <= cols);
    let k = rows;
    if mat.iter().all(|&x| x == 0.0) {
        return OrderedSvd {
            left: DMatrix::identity(rows, rows),
            values: DVector::zeros(k),
            right: DMatrix::identity(cols, cols).columns(cols - k, k).into_owned(),
        };
    }
    // B = mat^T (cols x k); find orthogonal J with B J having orthogonal
    // columns. Then mat = J diag(s) Q^T with Q the normalized columns.
    let mut b = mat.transpose();
    let mut j = DMatrix::<f64>::identity(k, k);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = b.column(p).norm_squared();
                let beta = b.column(q).norm_squared();
                let gamma = b.column(p).dot(&b.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mtx in [&mut b, &mut j] {
                    for r in 0..mtx.nrows() {
                        let (x, y) = (mtx[(r, p)], mtx[(r, q)]);
                        mtx[(r, p)] = c * x - s * y;
                        mtx[(r, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..k).map(|c| b.column(c).norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap().then(x.cmp(&y)));
    let values = DVector::from_iterator(k, order.iter().map(|&i| norms[i]));
    let left = DMatrix::from_columns(&order.iter().map(|&i| col(&j, i)).collect::<Vec<_>>());
    let nonzero: Vec<DVector<f64>> = order
        .iter()
        .filter(|&&i| norms[i] > 0.0)
        .map(|&i| col(&b, i) / norms[i])
        .collect();
    let mut right_cols = nonzero.clone();
    if right_cols.len() < k {
        let partial = DMatrix::from_columns(&nonzero);
        let extra = complete_basis(&partial);
        // Trailing directions of the complement, so zero blocks stay put.
        let need = k - right_cols.len();
        let start = extra.ncols() - need;
        right_cols.extend((start..extra.ncols()).map(|c| col(&extra, c)));
    }
    OrderedSvd {
        left,
        values,
        right: DMatrix::from_columns(&right_cols),
    }
}

/// Orthonormal basis of the complement of the column span of `basis`,
/// built by Gram-Schmidt against the standard vectors in index order.
fn complete_basis(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let (dim, k) = basis.shape();
    let mut accepted: Vec<DVector<f64>> = (0..k).map(|j| col(basis, j)).collect();
    let mut extra = Vec::new();
    while accepted.len() < dim {
        // Standard vector with the largest residual; ties go to the lower index.
        let mut best: Option<(DVector<f64>, f64)> = None;
        for c in 0..dim {
            let mut r = DVector::zeros(dim);
            r[c] = 1.0;
            for _ in 0..2 {
                for q in &accepted {
                    let proj = q.dot(&r);
                    r.axpy(-proj, q, 1.0);
                }
            }
            let nr = r.norm();
            if best.as_ref().is_none_or(|b| nr > b.1 + 1e-12) {
                best = Some((r, nr));
            }
        }
        let (r, nr) = best.expect("complement exists");
        let q = r / nr;
        accepted.push(q.clone());
        extra.push(q);
    }
    if extra.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&extra)
    }
}

fn normalized_columns(mat: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let k = mat.ncols();
    let norms = DVector::from_iterator(k, (0..k).map(|j| mat.column(j).norm()));
    let mut out = mat.clone();
    for j in 0..k {
        out.column_mut(j).scale_mut(1.0 / norms[j]);
    }
    (out, norms)
}

fn decompose_wide(mat: &PseudoOrthogonalMatrix) -> NormalForm {
    let sig = mat.sig;
    let (n, m) = (sig.n, sig.m);
    debug_assert!(n >= m);

    // Right singular vectors of U diagonalize X^T X = I + U^T U. The SVD of
    // U keeps small tilts accurate where the eigenvalues of X^T X cluster at 1.
    let usvd = ordered_svd(&mat.u);
    let complement = complete_basis(&usvd.right);
    let mut s_tan = DMatrix::zeros(n, n);
    s_tan.view_mut((0, 0), (n, n - m)).copy_from(&complement);
    s_tan.view_mut((0, n - m), (n, m)).copy_from(&usvd.right);

    // X S has orthogonal columns; normalizing them gives the left rotation.
    let (p_cols, _) = normalized_columns(&(&mat.x * &s_tan));
    let r_tan = p_cols.transpose();
    let d3 = usvd.values.clone();
    let d1 = d3.map(|a| (1.0 + a * a).sqrt());

    // V V^T = I + U U^T, so the left singular vectors of U also diagonalize
    // V V^T. Deriving the timelike rotations from them keeps both sides in
    // one basis even when singular values cluster.
    let (s_cols, _) = normalized_columns(&(mat.v.transpose() * &usvd.left));
    let s_nor = s_cols;
    let (q_cols, d2) = normalized_columns(&(&mat.v * &s_nor));
    let r_nor = q_cols.transpose();

    // U_c = R_nor U S_tan = (0 | A D3) with A = R_nor * (left vectors of U).
    let a_block = &r_nor * &usvd.left;

    // W_c = R_tan W S_nor = (0 ; W1) with W1 A diagonal up to round-off.
    let w_c = &r_tan * &mat.w * &s_nor;
    let w1 = w_c.view((n - m, 0), (m, m)).into_owned();
    let w1a = &w1 * &a_block;
    let mut d4 = DVector::zeros(m);
    let mut sign_choices = vec![1.0; m];
    for i in 0..m {
        d4[i] = w1a[(i, i)].abs();
        if w1a[(i, i)] < 0.0 {
            sign_choices[i] = -1.0;
        }
    }

    NormalForm {
        sig,
        r_tan,
        r_nor,
        s_tan,
        s_nor,
        d1,
        d2,
        d3,
        d4,
        a_block,
        sign_choices,
        mirrored: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_onm, random_rotation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn is_identity(m: &DMatrix<f64>) -> bool {
        (m - DMatrix::<f64>::identity(m.nrows(), m.ncols())).amax() == 0.0
    }

    #[test]
    fn identity_decomposes_trivially() {
        for (n, m) in [(3, 2), (2, 2), (1, 3)] {
            let s = Signature::new(n, m).unwrap();
            let nf = onm_normal_form(&PseudoOrthogonalMatrix::identity(s)).unwrap();
            assert!(is_identity(&nf.r_tan) && is_identity(&nf.r_nor));
            assert!(is_identity(&nf.s_tan) && is_identity(&nf.s_nor));
            assert!(nf.d1.iter().chain(nf.d2.iter()).all(|&d| d == 1.0));
            assert!(nf.d3.iter().chain(nf.d4.iter()).all(|&d| d == 0.0));
            assert_eq!(reconstruct(&nf), PseudoOrthogonalMatrix::identity(s));
        }
    }

    #[test]
    fn one_by_one_boost() {
        let s = Signature::new(1, 1).unwrap();
        let b = PseudoOrthogonalMatrix::from_blocks(
            s,
            DMatrix::from_element(1, 1, 1.25),
            DMatrix::from_element(1, 1, 0.75),
            DMatrix::from_element(1, 1, 0.75),
            DMatrix::from_element(1, 1, 1.25),
        )
        .unwrap();
        let nf = onm_normal_form(&b).unwrap();
        assert!((nf.d1[0] - 1.25).abs() < 1e-15);
        assert!((nf.d2[0] - 1.25).abs() < 1e-15);
        assert!((nf.d3[0] - 0.75).abs() < 1e-15);
        assert!((nf.d4[0] - 0.75).abs() < 1e-15);
        assert!((nf.a_block[(0, 0)].abs() - 1.0).abs() < 1e-15);
        assert!(reconstruct(&nf).max_abs_diff(&b) <= 1e-12);
    }

    #[test]
    fn recovers_known_rapidities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = Signature::new(3, 2).unwrap();
        let boost = PseudoOrthogonalMatrix::boost(s, &[0.3, 0.7]).unwrap();
        let mat = boost.rotated(
            &random_rotation(&mut rng, 3),
            &random_rotation(&mut rng, 2),
            &random_rotation(&mut rng, 3),
            &random_rotation(&mut rng, 2),
        );
        let nf = onm_normal_form(&mat).unwrap();
        // Sorted descending.
        assert!((nf.d1[0] - 0.7f64.cosh()).abs() < 1e-12);
        assert!((nf.d1[1] - 0.3f64.cosh()).abs() < 1e-12);
        assert!((nf.d2[0] - 0.7f64.cosh()).abs() < 1e-12);
        assert!(nf.invariants_hold(1e-12));
    }

    #[test]
    fn no_tilt_gives_block_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = Signature::new(3, 2).unwrap();
        let mut nf = onm_normal_form(&PseudoOrthogonalMatrix::identity(s)).unwrap();
        nf.r_tan = random_rotation(&mut rng, 3);
        nf.s_nor = random_rotation(&mut rng, 2);
        let m = reconstruct(&nf);
        assert_eq!(m.u.amax(), 0.0);
        assert_eq!(m.w.amax(), 0.0);
        let xtx = m.x.transpose() * &m.x;
        assert!((xtx - DMatrix::<f64>::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn rejects_non_members() {
        let s = Signature::new(1, 1).unwrap();
        let bad = PseudoOrthogonalMatrix::from_blocks(
            s,
            DMatrix::from_element(1, 1, 1.25),
            DMatrix::from_element(1, 1, 0.75),
            DMatrix::from_element(1, 1, 0.75),
            DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap();
        assert!(matches!(
            onm_normal_form(&bad),
            Err(Error::NotPseudoOrthogonal { .. })
        ));
    }

    #[test]
    fn degenerate_rapidities_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for rap in [[0.0, 0.0, 0.0], [0.5, 0.5, 0.5], [1e-9, 0.0, 1.5], [2.0, 2.0, 1e-6]] {
            let s = Signature::new(4, 3).unwrap();
            let mat = PseudoOrthogonalMatrix::boost(s, &rap).unwrap().rotated(
                &random_rotation(&mut rng, 4),
                &random_rotation(&mut rng, 3),
                &random_rotation(&mut rng, 4),
                &random_rotation(&mut rng, 3),
            );
            let nf = onm_normal_form(&mat).unwrap();
            let err = reconstruct(&nf).max_abs_diff(&mat);
            assert!(err < 1e-12, "rapidities {rap:?}: error {err:e}");
        }
    }

    #[test]
    fn canonical_form_matches_rotated_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (n, m) in [(5, 3), (2, 3), (1, 2), (4, 1)] {
            let s = Signature::new(n, m).unwrap();
            let mat = random_onm(&mut rng, s, 2.0);
            let nf = onm_normal_form(&mat).unwrap();
            let rotated = mat.rotated(&nf.r_tan, &nf.r_nor, &nf.s_tan, &nf.s_nor);
            assert!(rotated.max_abs_diff(&nf.canonical()) < 1e-11);
        }
    }
}
