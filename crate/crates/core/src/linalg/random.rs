//! Random sampling of rotations and pseudo-orthogonal matrices.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::onm::PseudoOrthogonalMatrix;
use super::signature::Signature;

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed element of O(k) (QR of a Gaussian matrix with the
/// diagonal of R made positive).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R, k: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, k, k).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `diag(P1, Q1) * boost(theta) * diag(P2, Q2)` with rapidities drawn
/// uniformly from `[0, max_rapidity]`.
pub fn random_onm<R: Rng + ?Sized>(
    rng: &mut R,
    sig: Signature,
    max_rapidity: f64,
) -> PseudoOrthogonalMatrix {
    let k = sig.min_dim();
    let rap: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * max_rapidity).collect();
    let boost = PseudoOrthogonalMatrix::boost(sig, &rap).expect("rapidity count matches");
    let p1 = random_rotation(rng, sig.n);
    let q1 = random_rotation(rng, sig.m);
    let p2 = random_rotation(rng, sig.n);
    let q2 = random_rotation(rng, sig.m);
    boost.rotated(&p1, &q1, &p2, &q2)
}
