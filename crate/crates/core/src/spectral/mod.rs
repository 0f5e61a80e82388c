//! Uniform-grid fields with spectral calculus, free-space Riesz convolution and
//! the mass-preserving dilation `(s⋆u)(x) = e^{Ns/2} u(e^s x)`.

mod dilate;
mod dump;
mod fft;
mod field;
mod grid;
mod riesz;

use num_complex::Complex64;

pub use dilate::{dilate, DEFAULT_S_MAX};
pub use dump::{read_field_dump, write_field_dump, write_radial_csv};
pub use fft::FftNd;
pub use field::Field;
pub use grid::Grid;
pub use riesz::{cell_integral_factor, riesz_convolve, Convolution, RieszKernel, SingularCell, BOUNDARY_WARNING_RATIO};

/// Transform plan and wavenumber table for one grid.
///
/// Cheap to clone; clones share the FFT plans.
#[derive(Debug, Clone)]
pub struct Spectral {
    grid: Grid,
    fft: FftNd,
    k2: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        Self {
            fft: FftNd::new(grid.points_per_axis, grid.dim),
            k2: grid.wavenumber_sq(),
            grid,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn fft(&self) -> &FftNd {
        &self.fft
    }

    fn spectrum(&self, u: &Field) -> Vec<Complex64> {
        assert_eq!(u.grid(), &self.grid, "field grid does not match the spectral context");
        let mut buf = u.values().to_vec();
        self.fft.forward(&mut buf);
        buf
    }

    /// `∫|∇u|²` as `Σ|k|²|û(k)|²`, normalized so that `Σ|û|²` reproduces the
    /// midpoint mass (Parseval).
    pub fn grad_sq(&self, u: &Field) -> f64 {
        let spec = self.spectrum(u);
        let weight = self.grid.cell_volume() / self.grid.len() as f64;
        spec.iter()
            .zip(&self.k2)
            .map(|(c, k2)| k2 * c.norm_sqr())
            .sum::<f64>()
            * weight
    }

    /// Spectral Laplacian (multiplier `-|k|²`).
    pub fn laplacian(&self, u: &Field) -> Field {
        self.apply_multiplier(u, |k2| -k2)
    }

    /// Applies a radial Fourier multiplier `m(|k|²)`.
    pub fn apply_multiplier(&self, u: &Field, m: impl Fn(f64) -> f64) -> Field {
        let mut spec = self.spectrum(u);
        for (c, &k2) in spec.iter_mut().zip(&self.k2) {
            *c *= m(k2);
        }
        self.fft.inverse(&mut spec);
        Field::from_parts(self.grid, spec)
    }

    /// `‖u‖²_{H¹} = ∫|∇u|² + ∫|u|²`
    pub fn h1_norm_sq(&self, u: &Field) -> f64 {
        self.grad_sq(u) + u.mass()
    }
}
