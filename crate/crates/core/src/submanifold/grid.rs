use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// n-torus; each axis closes up after `shape[i]` nodes, with values
    /// offset by a per-axis shift vector when a stencil wraps.
    Periodic,
    /// Box with one-sided stencils at the margins; pointwise quantities are
    /// trusted only on nodes at least two steps from every face.
    Bounded,
}

/// Margin (in nodes) excluded from the interior of a bounded grid.
pub const MARGIN: usize = 2;

/// Tensor-product grid in parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub topology: Topology,
    pub shape: Vec<usize>,
    pub spacing: Vec<f64>,
    pub origin: Vec<f64>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(topology: Topology, shape: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>) -> Result<Self> {
        let n = shape.len();
        if n == 0 || spacing.len() != n || origin.len() != n {
            return Err(Error::Dimension(format!(
                "grid needs matching shape/spacing/origin lengths, got {}/{}/{}",
                n,
                spacing.len(),
                origin.len()
            )));
        }
        let min_nodes = match topology {
            Topology::Periodic => 3,
            Topology::Bounded => 2 * MARGIN + 1,
        };
        if shape.iter().any(|&s| s < min_nodes) || spacing.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Config(format!(
                "grid axes need at least {min_nodes} nodes and positive spacing"
            )));
        }
        let mut strides = vec![1; n];
        for i in (0..n - 1).rev() {
            strides[i] = strides[i + 1] * shape[i + 1];
        }
        Ok(Self {
            topology,
            shape,
            spacing,
            origin,
            strides,
        })
    }

    /// Periodic grid with `nodes` points per axis covering `[0, period)`.
    pub fn periodic(n: usize, nodes: usize, period: f64) -> Result<Self> {
        Self::new(
            Topology::Periodic,
            vec![nodes; n],
            vec![period / nodes as f64; n],
            vec![0.0; n],
        )
    }

    /// Bounded grid with `nodes` points per axis on `[lo, hi]`.
    pub fn bounded(lo: &[f64], hi: &[f64], nodes: &[usize]) -> Result<Self> {
        let spacing = lo
            .iter()
            .zip(hi)
            .zip(nodes)
            .map(|((a, b), &k)| (b - a) / (k.max(2) - 1) as f64)
            .collect();
        Self::new(Topology::Bounded, nodes.to_vec(), spacing, lo.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        self.strides
            .iter()
            .zip(&self.shape)
            .map(|(&s, &n)| (idx / s) % n)
            .collect()
    }

    pub fn index(&self, k: &[usize]) -> usize {
        k.iter().zip(&self.strides).map(|(a, b)| a * b).sum()
    }

    /// Parameter coordinates of a node.
    pub fn param(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .enumerate()
            .map(|(i, &k)| self.origin[i] + k as f64 * self.spacing[i])
            .collect()
    }

    /// Product of the spacings: the parameter volume of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        match self.topology {
            Topology::Periodic => true,
            Topology::Bounded => self
                .multi_index(idx)
                .iter()
                .zip(&self.shape)
                .all(|(&k, &n)| k >= MARGIN && k + MARGIN < n),
        }
    }

    pub fn interior_mask(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.is_interior(i)).collect()
    }

    /// Node `offset` steps along `axis`, with the number of wraps (periodic)
    /// or `None` when it leaves a bounded grid.
    pub fn neighbor(&self, idx: usize, axis: usize, offset: isize) -> Option<(usize, isize)> {
        let n = self.shape[axis] as isize;
        let k = ((idx / self.strides[axis]) % self.shape[axis]) as isize;
        let target = k + offset;
        let (k2, wraps) = match self.topology {
            Topology::Periodic => (target.rem_euclid(n), target.div_euclid(n)),
            Topology::Bounded => {
                if target < 0 || target >= n {
                    return None;
                }
                (target, 0)
            }
        };
        let base = idx as isize - k * self.strides[axis] as isize;
        Some(((base + k2 * self.strides[axis] as isize) as usize, wraps))
    }

    fn value(
        &self,
        values: &[DVector<f64>],
        shifts: &[DVector<f64>],
        idx: usize,
        axis: usize,
        offset: isize,
    ) -> DVector<f64> {
        let (j, w) = self.neighbor(idx, axis, offset).expect("stencil inside grid");
        if w == 0 || shifts.is_empty() {
            values[j].clone()
        } else {
            &values[j] + &shifts[axis] * w as f64
        }
    }

    /// Position of `idx` along `axis` relative to the faces: `0` at the low
    /// face of a bounded grid, `1` at the high face, `2` otherwise.
    fn face(&self, idx: usize, axis: usize) -> u8 {
        if self.topology == Topology::Periodic {
            return 2;
        }
        let k = (idx / self.strides[axis]) % self.shape[axis];
        if k == 0 {
            0
        } else if k + 1 == self.shape[axis] {
            1
        } else {
            2
        }
    }

    /// Second-order first derivative along `axis` (central, one-sided at
    /// bounded faces). `shifts` may be empty for fields that do not shift.
    pub fn d1(&self, values: &[DVector<f64>], shifts: &[DVector<f64>], idx: usize, axis: usize) -> DVector<f64> {
        let h = self.spacing[axis];
        let at = |o| self.value(values, shifts, idx, axis, o);
        match self.face(idx, axis) {
            0 => (at(0) * -3.0 + at(1) * 4.0 - at(2)) / (2.0 * h),
            1 => (at(0) * 3.0 - at(-1) * 4.0 + at(-2)) / (2.0 * h),
            _ => (at(1) - at(-1)) / (2.0 * h),
        }
    }

    /// Second-order pure second derivative along `axis`.
    pub fn d2(&self, values: &[DVector<f64>], shifts: &[DVector<f64>], idx: usize, axis: usize) -> DVector<f64> {
        let h2 = self.spacing[axis].powi(2);
        let at = |o| self.value(values, shifts, idx, axis, o);
        match self.face(idx, axis) {
            0 => (at(0) * 2.0 - at(1) * 5.0 + at(2) * 4.0 - at(3)) / h2,
            1 => (at(0) * 2.0 - at(-1) * 5.0 + at(-2) * 4.0 - at(-3)) / h2,
            _ => (at(1) - at(0) * 2.0 + at(-1)) / h2,
        }
    }
}
