use num_complex::Complex64;
use rayon::prelude::*;

use super::{Field, Grid};
use crate::error::{CoreError, Result};

pub const DEFAULT_S_MAX: f64 = 3.0;

/// Periodic sinc for `2M` nodes of spacing `h` (period `4L`).
fn padded_sinc(t: f64, h: f64, nodes: usize) -> f64 {
    let period = nodes as f64 * h;
    let den = nodes as f64 * (std::f64::consts::PI * t / period).tan();
    if den.abs() < 1e-300 || (t / h).abs() < 1e-13 {
        return 1.0;
    }
    (std::f64::consts::PI * t / h).sin() / den
}

/// Interpolation matrix `D[i][j]` with `u(e^s x_i) ≈ Σ_j D[i][j] u_j`, row-major.
fn interpolation_matrix(grid: &Grid, s: f64) -> Vec<f64> {
    let m = grid.points_per_axis;
    let h = grid.spacing();
    let l = grid.half_length;
    let x = grid.axis_coordinates();
    let factor = s.exp();
    let mut mat = vec![0.0; m * m];
    for (i, row) in mat.chunks_mut(m).enumerate() {
        let y = factor * x[i];
        if y.abs() >= 2.0 * l {
            continue;
        }
        for (j, d) in row.iter_mut().enumerate() {
            *d = padded_sinc(y - x[j], h, 2 * m);
        }
    }
    mat
}

/// Applies an `M×M` matrix along every axis of the field.
fn apply_separable(grid: &Grid, values: &mut [Complex64], mat: &[f64]) {
    let m = grid.points_per_axis;
    let dim = grid.dim;
    let zero = Complex64::new(0.0, 0.0);
    for axis in 0..dim {
        let stride = m.pow((dim - 1 - axis) as u32);
        let block = m * stride;
        values.par_chunks_mut(block).for_each_init(
            || (vec![zero; m], vec![zero; m]),
            |(line, out), blk| {
                for i in 0..stride {
                    for (k, v) in line.iter_mut().enumerate() {
                        *v = blk[k * stride + i];
                    }
                    for (r, o) in out.iter_mut().enumerate() {
                        let row = &mat[r * m..(r + 1) * m];
                        *o = row.iter().zip(line.iter()).map(|(d, v)| v * *d).sum();
                    }
                    for (k, v) in out.iter().enumerate() {
                        blk[k * stride + i] = *v;
                    }
                }
            },
        );
    }
}

/// `(s⋆u)(x) = e^{Ns/2} u(e^s x)` by band-limited resampling, renormalized to
/// the input mass.
pub fn dilate(u: &Field, s: f64, s_max: f64) -> Result<Field> {
    if !s.is_finite() || s.abs() > s_max {
        return Err(CoreError::DilationTooLarge { s: s.abs(), s_max });
    }
    if s == 0.0 {
        return Ok(u.clone());
    }
    let grid = *u.grid();
    let mat = interpolation_matrix(&grid, s);
    let mut values = u.values().to_vec();
    apply_separable(&grid, &mut values, &mat);
    let amp = (grid.dim as f64 * s / 2.0).exp();
    values.iter_mut().for_each(|v| *v *= amp);
    let out = Field::from_parts(grid, values);
    Ok(out.with_mass(u.mass()))
}
