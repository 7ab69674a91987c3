//! Sampled estimate of the timelike-curvature constant.
//!
//! For a spacelike n-plane with orthonormal basis `tau_i` and a unit timelike
//! `X` orthogonal to it, the condition `sum_i G(Rbar(X,tau_i)X,tau_i) >= k G(X,X)`
//! is equivalent (since `G(X,X) < 0`) to `k >= ratio` with
//! `ratio = sum_i G(Rbar(X,tau_i)X,tau_i) / G(X,X)`. The smallest admissible
//! `k` over the sampled configurations is therefore the supremum of `ratio`.
//!
//! On curved product spaces the ratio grows without bound as planes tilt
//! toward the null cone, so configurations are drawn from a family of
//! bounded tilt: the background frame at a point is acted on by random block
//! rotations and boosts whose rapidities do not exceed `max_rapidity`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{background_frame, Ambient};
use crate::error::{Error, Result};
use crate::linalg::random::{random_onm, random_rotation};
use crate::linalg::FramePair;

pub const DEFAULT_MAX_RAPIDITY: f64 = 1.0;

/// Axis-aligned box in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl Region {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(a, b)| a > b) {
            return Err(Error::Config("region bounds must have equal length and lower <= upper".into()));
        }
        Ok(Self {
            lower: DVector::from_vec(lower),
            upper: DVector::from_vec(upper),
        })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        DVector::from_fn(self.lower.len(), |i, _| {
            self.lower[i] + rng.random::<f64>() * (self.upper[i] - self.lower[i])
        })
    }
}

#[derive(Debug, Clone)]
pub struct TccWitness {
    pub point: DVector<f64>,
    pub plane: Vec<DVector<f64>>,
    pub x: DVector<f64>,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct TccEstimate {
    pub k_est: f64,
    pub n_samples: usize,
    pub witness: TccWitness,
}

/// Supremum of the curvature ratio over `n_samples` random configurations.
pub fn tcc_estimate<A: Ambient + ?Sized>(
    space: &A,
    region: &Region,
    n_samples: usize,
    max_rapidity: f64,
    seed: u64,
) -> Result<TccEstimate> {
    let sig = space.signature();
    if n_samples == 0 {
        return Err(Error::Config("tcc estimate needs at least one sample".into()));
    }
    if region.lower.len() != sig.dim() {
        return Err(Error::Dimension(format!(
            "region has dimension {}, space has {}",
            region.lower.len(),
            sig.dim()
        )));
    }
    space.check_domain(&region.lower)?;
    space.check_domain(&region.upper)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<TccWitness> = None;
    for _ in 0..n_samples {
        let p = region.sample(&mut rng);
        let metric = space.metric(&p);
        let bg = background_frame(space, &p)?;
        let mat = random_onm(&mut rng, sig, max_rapidity);
        let fp = FramePair::from_background(sig, p.clone(), metric, bg, &mat)?;
        // Random unit vector in the normal span.
        let q = random_rotation(&mut rng, sig.m);
        let mut x = DVector::zeros(sig.dim());
        for (a, nu) in fp.nu().iter().enumerate() {
            x.axpy(q[(0, a)], nu, 1.0);
        }
        let rbar = space.curvature(&p);
        let gxx = fp.g(&x, &x);
        let num: f64 = fp.tau().iter().map(|t| rbar.eval(&x, t, &x, t)).sum();
        let ratio = num / gxx + 0.0;
        if best.as_ref().is_none_or(|b| ratio > b.ratio) {
            best = Some(TccWitness {
                point: p,
                plane: fp.tau().to_vec(),
                x,
                ratio,
            });
        }
    }
    let witness = best.expect("at least one sample");
    Ok(TccEstimate {
        k_est: witness.ratio,
        n_samples,
        witness,
    })
}
