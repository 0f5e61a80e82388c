use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Uniform sampling of the box `[-L, L)^dim` with `M` points per axis.
///
/// Node `j` sits at `-L + j h`, so the origin is node `M/2` on every axis and
/// mirror planes through nodes or cell faces map the lattice onto itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub half_length: f64,
    pub points_per_axis: usize,
}

impl Grid {
    pub fn new(dim: usize, half_length: f64, points_per_axis: usize) -> Result<Self> {
        let grid = Self {
            dim,
            half_length,
            points_per_axis,
        };
        grid.check()?;
        Ok(grid)
    }

    pub fn check(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(CoreError::InvalidGrid(format!("dim {} not in 1..=3", self.dim)));
        }
        if self.points_per_axis < 16 || !self.points_per_axis.is_power_of_two() {
            return Err(CoreError::InvalidGrid(format!(
                "points per axis {} must be a power of two >= 16",
                self.points_per_axis
            )));
        }
        if !(self.half_length > 0.0 && self.half_length.is_finite()) {
            return Err(CoreError::InvalidGrid(format!(
                "half length {} must be positive",
                self.half_length
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.points_per_axis as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coordinate(&self, index: usize) -> f64 {
        -self.half_length + index as f64 * self.spacing()
    }

    pub fn axis_coordinates(&self) -> Vec<f64> {
        (0..self.points_per_axis).map(|i| self.coordinate(i)).collect()
    }

    /// Index of the node at the origin along each axis.
    pub fn center_index(&self) -> usize {
        self.points_per_axis / 2
    }

    /// Row-major multi-index (last axis fastest); unused axes are zero.
    pub fn unravel(&self, flat: usize) -> [usize; 3] {
        let m = self.points_per_axis;
        let mut idx = [0usize; 3];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            idx[axis] = rest % m;
            rest /= m;
        }
        idx
    }

    pub fn ravel(&self, idx: [usize; 3]) -> usize {
        let m = self.points_per_axis;
        (0..self.dim).fold(0, |acc, axis| acc * m + idx[axis])
    }

    /// Physical position of a flat index; unused coordinates are zero.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = self.coordinate(idx[axis]);
        }
        x
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let m = self.points_per_axis as isize;
        let dk = std::f64::consts::PI / self.half_length;
        (0..m)
            .map(|i| if i < m / 2 { i } else { i - m })
            .map(|i| i as f64 * dk)
            .collect()
    }

    /// Squared wavenumber magnitude for every flat index.
    pub fn wavenumber_sq(&self) -> Vec<f64> {
        let k: Vec<f64> = self.wavenumbers().iter().map(|k| k * k).collect();
        (0..self.len())
            .map(|flat| {
                let idx = self.unravel(flat);
                (0..self.dim).map(|a| k[idx[a]]).sum()
            })
            .collect()
    }

    /// Same box with a different resolution.
    pub fn with_points(&self, points_per_axis: usize) -> Result<Self> {
        Self::new(self.dim, self.half_length, points_per_axis)
    }
}
