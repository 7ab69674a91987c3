use rayon::prelude::*;

use super::{flow_rhs, RadialFunction};
use crate::error::{Error, Result};

/// Uniform samples `H_k = H(R_k)` with Dirichlet values at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub h: Vec<f64>,
    pub spacing: f64,
}

impl RadialProfile {
    pub fn sample(f: &RadialFunction, r_min: f64, r_max: f64, nodes: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min) || nodes < 3 {
            return Err(Error::Config(format!(
                "radial profile needs 0 < r_min < r_max and >= 3 nodes, got [{r_min}, {r_max}] with {nodes}"
            )));
        }
        let spacing = (r_max - r_min) / (nodes - 1) as f64;
        let r: Vec<f64> = (0..nodes).map(|k| r_min + k as f64 * spacing).collect();
        let h = r.iter().map(|&x| f.value(x)).collect();
        Ok(Self { r, h, spacing })
    }

    pub fn from_values(r: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if r.len() != h.len() || r.len() < 3 || r[0] <= 0.0 {
            return Err(Error::Config("profile needs >= 3 matching (R, H) pairs with R > 0".into()));
        }
        let spacing = (r[r.len() - 1] - r[0]) / (r.len() - 1) as f64;
        let uniform = r
            .windows(2)
            .all(|w| ((w[1] - w[0]) - spacing).abs() <= 1e-9 * spacing.abs().max(1.0));
        if !(spacing > 0.0) || !uniform {
            return Err(Error::Config("profile radii must be uniformly spaced and increasing".into()));
        }
        Ok(Self { r, h, spacing })
    }

    /// Central-difference `(H', H'')` at an interior node.
    pub fn derivatives(&self, i: usize) -> (f64, f64) {
        let dh = self.spacing;
        let (hm, h0, hp) = (self.h[i - 1], self.h[i], self.h[i + 1]);
        ((hp - hm) / (2.0 * dh), (hp - 2.0 * h0 + hm) / (dh * dh))
    }

    /// Smallest `H` and smallest discrete `H'` over the interior nodes.
    pub fn window_margins(&self) -> (f64, f64) {
        let k = self.r.len();
        let mut min_h = f64::INFINITY;
        let mut min_h1 = f64::INFINITY;
        for i in 1..k - 1 {
            min_h = min_h.min(self.h[i]);
            min_h1 = min_h1.min(self.derivatives(i).0);
        }
        (min_h, min_h1)
    }

    pub fn in_window(&self) -> bool {
        let (a, b) = self.window_margins();
        a > 0.0 && b > 0.0
    }

    /// Largest stable explicit step `c h^2 inf(2 R H H') / sup(R H)`.
    pub fn cfl_limit(&self, c_cfl: f64) -> f64 {
        let k = self.r.len();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 1..k - 1 {
            let (h1, _) = self.derivatives(i);
            lo = lo.min(2.0 * self.r[i] * self.h[i] * h1);
            hi = hi.max(self.r[i] * self.h[i]);
        }
        c_cfl * self.spacing * self.spacing * lo / hi
    }

    pub fn max_deviation(&self, reference: &RadialFunction) -> f64 {
        self.r
            .iter()
            .zip(&self.h)
            .map(|(&r, &h)| (h - reference.value(r)).abs())
            .fold(0.0, f64::max)
    }
}

/// Outcome of one accepted step.
#[derive(Debug, Clone)]
pub struct RadialStep {
    pub profile: RadialProfile,
    pub dt: f64,
    pub rejections: usize,
}

const MAX_RETRIES: usize = 10;

/// One forward-Euler step of the radial flow with Dirichlet ends. The step
/// is rejected and `dt` halved (at most ten times) when `dt` exceeds the
/// diffusion CFL limit or the result leaves the spacelike window.
pub fn radial_flow_step(profile: &RadialProfile, dt: f64, c_cfl: f64, s: f64) -> Result<RadialStep> {
    if !profile.in_window() {
        return Err(Error::Invariant("radial profile outside the spacelike window".into()));
    }
    let k = profile.r.len();
    let rhs: Vec<f64> = (0..k)
        .into_par_iter()
        .map(|i| {
            if i == 0 || i + 1 == k {
                return Ok(0.0);
            }
            let (h1, h2) = profile.derivatives(i);
            flow_rhs(profile.r[i], profile.h[i], h1, h2)
                .ok_or_else(|| Error::Invariant(format!("degenerate radial node {i}")))
        })
        .collect::<Result<_>>()?;
    let limit = profile.cfl_limit(c_cfl);
    let mut dt = dt;
    for rejections in 0..=MAX_RETRIES {
        if dt <= limit {
            let h: Vec<f64> = profile.h.iter().zip(&rhs).map(|(h, r)| h + dt * r).collect();
            let next = RadialProfile {
                r: profile.r.clone(),
                h,
                spacing: profile.spacing,
            };
            if next.in_window() {
                return Ok(RadialStep {
                    profile: next,
                    dt,
                    rejections,
                });
            }
        }
        dt *= 0.5;
    }
    Err(Error::Halted {
        s,
        retries: MAX_RETRIES,
        reason: "radial step violates the CFL limit or the spacelike window".into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialMonitorRow {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub sup_dev: f64,
    pub min_h: f64,
    pub min_h_prime: f64,
}

#[derive(Debug, Clone)]
pub struct RadialRun {
    pub profiles: Vec<RadialProfile>,
    pub monitor: Vec<RadialMonitorRow>,
}

/// Runs `steps` steps with the requested `dt` (or the CFL limit when `None`).
pub fn radial_run(
    initial: RadialProfile,
    steps: usize,
    dt: Option<f64>,
    c_cfl: f64,
    reference: &RadialFunction,
) -> Result<RadialRun> {
    let row = |step, t, dt, p: &RadialProfile| {
        let (min_h, min_h_prime) = p.window_margins();
        RadialMonitorRow {
            step,
            t,
            dt,
            sup_dev: p.max_deviation(reference),
            min_h,
            min_h_prime,
        }
    };
    let mut monitor = vec![row(0, 0.0, 0.0, &initial)];
    let mut profiles = vec![initial];
    let mut t = 0.0;
    for step in 1..=steps {
        let cur = profiles.last().expect("nonempty");
        let want = dt.unwrap_or_else(|| cur.cfl_limit(c_cfl));
        let out = radial_flow_step(cur, want, c_cfl, t)?;
        t += out.dt;
        monitor.push(row(step, t, out.dt, &out.profile));
        profiles.push(out.profile);
    }
    Ok(RadialRun { profiles, monitor })
}
