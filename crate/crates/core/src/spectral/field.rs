use num_complex::Complex64;

use super::Grid;
use crate::error::{CoreError, Result};

/// Complex samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CoreError::InvalidGrid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::InvalidParameter(format!(
                "non-finite field value at index {i}"
            )));
        }
        Ok(Self { grid, values })
    }

    /// Internal constructor for values known to be finite and correctly sized.
    pub(crate) fn from_parts(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::from_parts(grid, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self::from_parts(grid, values)
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Radial Gaussian `exp(-|x|²/(2 width²))` rescaled to the given mass.
    pub fn gaussian(grid: Grid, width: f64, mass: f64) -> Self {
        Self::from_real_fn(grid, |x| {
            let r2 = x.iter().map(|v| v * v).sum::<f64>();
            (-0.5 * r2 / (width * width)).exp()
        })
        .with_mass(mass)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `∫|u|²` by the midpoint rule.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    /// `‖u‖_t = (∫|u|^t)^{1/t}`.
    pub fn lp_norm(&self, t: f64) -> Result<f64> {
        Ok(self.lp_integral(t)?.powf(1.0 / t))
    }

    /// `∫|u|^t`.
    pub fn lp_integral(&self, t: f64) -> Result<f64> {
        if !(t >= 1.0) {
            return Err(CoreError::BadNormExponent(t));
        }
        Ok(self.values.iter().map(|v| v.norm().powf(t)).sum::<f64>() * self.grid.cell_volume())
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn modulus_field(&self) -> Field {
        Field::from_parts(
            self.grid,
            self.values.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect(),
        )
    }

    /// Real part of the `L²` inner product `Re ∫ conj(u) v`.
    pub fn inner_re(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum::<f64>()
            * self.grid.cell_volume()
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field::from_parts(self.grid, self.values.iter().map(|v| v * c).collect())
    }

    /// `self + c·other`
    pub fn add_scaled(&self, other: &Field, c: f64) -> Field {
        Field::from_parts(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b * c)
                .collect(),
        )
    }

    /// Rescale to the given mass; the zero field is returned unchanged.
    pub fn with_mass(&self, mass: f64) -> Field {
        let m = self.mass();
        if m > 0.0 {
            self.scaled((mass / m).sqrt())
        } else {
            self.clone()
        }
    }

    /// `‖u - v‖₂`
    pub fn distance(&self, other: &Field) -> f64 {
        (self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * self.grid.cell_volume())
        .sqrt()
    }

    /// Returns the index of the first value that is not a real nonnegative number.
    pub fn first_non_density(&self) -> Option<usize> {
        let scale = self.max_modulus().max(f64::MIN_POSITIVE);
        self.values
            .iter()
            .position(|v| v.im.abs() > 1e-14 * scale || v.re < 0.0)
    }

    pub fn require_density(&self) -> Result<()> {
        match self.first_non_density() {
            Some(index) => Err(CoreError::NotNonnegativeReal { index }),
            None => Ok(()),
        }
    }

    /// Largest modulus on the outermost shell of cells relative to the global maximum.
    pub fn boundary_ratio(&self) -> f64 {
        let m = self.grid.points_per_axis;
        let max = self.max_modulus();
        if max == 0.0 {
            return 0.0;
        }
        let mut edge = 0.0f64;
        for (flat, v) in self.values.iter().enumerate() {
            let idx = self.grid.unravel(flat);
            if (0..self.grid.dim).any(|a| idx[a] == 0 || idx[a] == m - 1) {
                edge = edge.max(v.norm());
            }
        }
        edge / max
    }

    /// Integer translation by whole cells with periodic wrap.
    pub fn shifted(&self, cells: [isize; 3]) -> Field {
        let m = self.grid.points_per_axis as isize;
        let mut out = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for (flat, v) in self.values.iter().enumerate() {
            let idx = self.grid.unravel(flat);
            let mut dst = [0usize; 3];
            for a in 0..self.grid.dim {
                dst[a] = (idx[a] as isize + cells[a]).rem_euclid(m) as usize;
            }
            out[self.grid.ravel(dst)] = *v;
        }
        Field::from_parts(self.grid, out)
    }
}
