use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FftNd, Field, Grid};
use crate::constants::riesz_constant;
use crate::error::{CoreError, Result};
use crate::special::{epstein_zeta, gauss_legendre};

/// Boundary-shell ratio above which a convolution result carries a warning.
pub const BOUNDARY_WARNING_RATIO: f64 = 1e-8;

/// Quadrature weight used for the kernel's singular cell at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularCell {
    /// Lattice-sum corrections `-h^α Z_N(N-α)ρ - h^{α+2} Z_N(N-α-2)Δρ/(2N)`
    /// (Epstein zeta of `ℤ^N`); error `O(h^{α+4})` for smooth data.
    #[default]
    ZetaCorrected,
    /// Only the leading correction `-h^α Z_N(N-α)`; error `O(h^{α+2})`.
    ZetaLeading,
    /// Exact integral of `|x|^{α-N}` over the cell `[-h/2, h/2]^N`.
    CellAverage,
}

/// `∫_{[-1/2,1/2]^N} |x|^{α-N} dx`; the cell integral for spacing `h` is this times `h^α`.
///
/// The cube splits into `2N` pyramids with apex at the origin; integrating the
/// radial direction exactly leaves a smooth integral over one face.
pub fn cell_integral_factor(dim: usize, alpha: f64) -> f64 {
    let e = alpha - dim as f64;
    match dim {
        1 => 2.0 * 0.5f64.powf(alpha) / alpha,
        2 | 3 => {
            let (x, w) = gauss_legendre(48);
            let face = if dim == 2 {
                x.iter()
                    .zip(&w)
                    .map(|(t, wt)| {
                        let y = 0.5 * t;
                        0.5 * wt * (0.25 + y * y).powf(0.5 * e)
                    })
                    .sum::<f64>()
            } else {
                let mut acc = 0.0;
                for (s, ws) in x.iter().zip(&w) {
                    for (t, wt) in x.iter().zip(&w) {
                        let (y1, y2) = (0.5 * s, 0.5 * t);
                        acc += 0.25 * ws * wt * (0.25 + y1 * y1 + y2 * y2).powf(0.5 * e);
                    }
                }
                acc
            };
            2.0 * dim as f64 * 0.5 / alpha * face
        }
        _ => f64::NAN,
    }
}

/// Output of [`riesz_convolve`]: the potential plus an optional boundary diagnostic.
#[derive(Debug, Clone)]
pub struct Convolution {
    pub potential: Field,
    /// Boundary-shell to maximum ratio of the input when it exceeds the warning threshold.
    pub boundary_warning: Option<f64>,
}

/// Free-space discrete convolution with `A_α(N)|x|^{α-N}` on a fixed grid.
///
/// The kernel spectrum on the `(2M)^N` padded lattice is computed once.
#[derive(Debug, Clone)]
pub struct RieszKernel {
    grid: Grid,
    alpha: f64,
    singular: SingularCell,
    padded: FftNd,
    spectrum: Vec<Complex64>,
}

impl RieszKernel {
    pub fn new(grid: Grid, alpha: f64, singular: SingularCell) -> Result<Self> {
        grid.check()?;
        let dim = grid.dim;
        if !(alpha > 0.0 && alpha < dim as f64) {
            return Err(CoreError::AlphaOutOfRange { alpha, dim });
        }
        let a = riesz_constant(dim, alpha)?;
        let h = grid.spacing();
        let m = grid.points_per_axis;
        let n = 2 * m;
        let padded = FftNd::new(n, dim);
        let e = alpha - dim as f64;
        let origin = match singular {
            SingularCell::ZetaCorrected | SingularCell::ZetaLeading => {
                -a * h.powf(alpha) * epstein_zeta(dim, dim as f64 - alpha)
            }
            SingularCell::CellAverage => a * h.powf(alpha) * cell_integral_factor(dim, alpha),
        };
        let scale = a * h.powf(alpha);
        let offset = |i: usize| -> f64 {
            let i = i as isize;
            let n = n as isize;
            (if i < n / 2 { i } else { i - n }) as f64
        };
        let mut kernel = vec![Complex64::new(0.0, 0.0); padded.len()];
        for (flat, k) in kernel.iter_mut().enumerate() {
            let mut rest = flat;
            let mut r2 = 0.0;
            for _ in 0..dim {
                let o = offset(rest % n);
                r2 += o * o;
                rest /= n;
            }
            k.re = if r2 == 0.0 { origin } else { scale * r2.powf(0.5 * e) };
        }
        padded.forward(&mut kernel);
        if singular == SingularCell::ZetaCorrected {
            // second correction acts as a multiple of the Laplacian: -|k|² in Fourier space
            let c = -a * h.powf(alpha + 2.0) * epstein_zeta(dim, dim as f64 - alpha - 2.0)
                / (2.0 * dim as f64);
            let dk = 2.0 * std::f64::consts::PI / (n as f64 * h);
            for (flat, k) in kernel.iter_mut().enumerate() {
                let mut rest = flat;
                let mut k2 = 0.0;
                for _ in 0..dim {
                    let o = offset(rest % n) * dk;
                    k2 += o * o;
                    rest /= n;
                }
                k.re -= c * k2;
            }
        }
        Ok(Self {
            grid,
            alpha,
            singular,
            padded,
            spectrum: kernel,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn singular_cell(&self) -> SingularCell {
        self.singular
    }

    /// Convolves real samples; no sign check.
    pub fn apply_real(&self, density: &[f64]) -> Vec<f64> {
        assert_eq!(density.len(), self.grid.len(), "density length does not match grid");
        let m = self.grid.points_per_axis;
        let n = 2 * m;
        let dim = self.grid.dim;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.padded.len()];
        let embed = |flat: usize| -> usize {
            let idx = self.grid.unravel(flat);
            (0..dim).fold(0, |acc, a| acc * n + idx[a])
        };
        for (flat, &d) in density.iter().enumerate() {
            buf[embed(flat)].re = d;
        }
        self.padded.forward(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.spectrum) {
            *b *= k;
        }
        self.padded.inverse(&mut buf);
        (0..self.grid.len()).map(|flat| buf[embed(flat)].re).collect()
    }

    /// Checked convolution of a real nonnegative density field.
    pub fn convolve(&self, density: &Field) -> Result<Convolution> {
        if density.grid() != &self.grid {
            return Err(CoreError::InvalidGrid("density grid differs from kernel grid".into()));
        }
        density.require_density()?;
        let ratio = density.boundary_ratio();
        let re: Vec<f64> = density.values().iter().map(|v| v.re).collect();
        let out = self.apply_real(&re);
        Ok(Convolution {
            potential: Field::from_parts(
                self.grid,
                out.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
            ),
            boundary_warning: (ratio > BOUNDARY_WARNING_RATIO).then_some(ratio),
        })
    }
}

/// One-shot `I_α ∗ density` with the default singular-cell weight.
pub fn riesz_convolve(density: &Field, alpha: f64) -> Result<Convolution> {
    RieszKernel::new(*density.grid(), alpha, SingularCell::default())?.convolve(density)
}
