//! Schwartz rearrangement, aligned polarization and symmetry diagnostics.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::functionals::Model;
use crate::spectral::{Field, Grid};

/// Closed half-space `{x : x·normal ≤ offset}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Grid data of an aligned mirror: the axis and `2c/h` for the plane `x_axis = c`.
#[derive(Debug, Clone, Copy)]
struct Mirror {
    axis: usize,
    sign: f64,
    twice_plane_cells: i64,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() < 1e-12) || !offset.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "half-space normal must be a unit vector (norm {norm})"
            )));
        }
        Ok(Self { normal, offset })
    }

    /// `H = {x_axis ≤ c}` (`upper = false`) or `{x_axis ≥ c}` (`upper = true`).
    pub fn axis(dim: usize, axis: usize, c: f64, upper: bool) -> Self {
        let mut normal = vec![0.0; dim];
        let sign = if upper { -1.0 } else { 1.0 };
        normal[axis] = sign;
        Self {
            normal,
            offset: sign * c,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.normal.iter().zip(x).map(|(n, x)| n * x).sum::<f64>() <= self.offset
    }

    /// `σ_H(x) = x - 2(x·n - offset)n`
    pub fn reflect(&self, x: &[f64]) -> Vec<f64> {
        let d = self.normal.iter().zip(x).map(|(n, x)| n * x).sum::<f64>() - self.offset;
        x.iter().zip(&self.normal).map(|(x, n)| x - 2.0 * d * n).collect()
    }

    fn mirror(&self, grid: &Grid) -> Result<Mirror> {
        if self.normal.len() != grid.dim {
            return Err(CoreError::UnalignedHalfSpace(format!(
                "normal has {} components on a {}-dimensional grid",
                self.normal.len(),
                grid.dim
            )));
        }
        let axes: Vec<usize> = (0..grid.dim).filter(|&i| self.normal[i] != 0.0).collect();
        if axes.len() != 1 || (self.normal[axes[0]].abs() - 1.0).abs() > 1e-12 {
            return Err(CoreError::UnalignedHalfSpace(format!(
                "normal {:?} is not a coordinate axis",
                self.normal
            )));
        }
        let axis = axes[0];
        let sign = self.normal[axis].signum();
        let c = sign * self.offset;
        let cells = 2.0 * c / grid.spacing();
        if (cells - cells.round()).abs() > 1e-9 * (1.0 + cells.abs()) {
            return Err(CoreError::UnalignedHalfSpace(format!(
                "plane x_{axis} = {c} is not on a node or cell face (h = {})",
                grid.spacing()
            )));
        }
        Ok(Mirror {
            axis,
            sign,
            twice_plane_cells: cells.round() as i64,
        })
    }
}

/// Mirror image of every cell, `None` when the image falls outside the box.
fn reflection_indices(grid: &Grid, mirror: &Mirror) -> Vec<Option<usize>> {
    let m = grid.points_per_axis as i64;
    (0..grid.len())
        .map(|flat| {
            let mut idx = grid.unravel(flat);
            let j = mirror.twice_plane_cells + m - idx[mirror.axis] as i64;
            (0..m).contains(&j).then(|| {
                idx[mirror.axis] = j as usize;
                grid.ravel(idx)
            })
        })
        .collect()
}

/// `u ∘ σ_H` for an aligned half-space, zero where `σ_H x` leaves the box.
pub fn reflect_field(u: &Field, h: &HalfSpace) -> Result<Field> {
    let grid = *u.grid();
    let images = reflection_indices(&grid, &h.mirror(&grid)?);
    Ok(Field::from_parts(
        grid,
        images
            .iter()
            .map(|j| j.map_or(Complex64::new(0.0, 0.0), |j| u.values()[j]))
            .collect(),
    ))
}

/// `u^H(x) = max{u(x), u(σx)}` on `H`, `min{…}` off `H`.
///
/// Cells whose mirror image leaves the box keep their value, so `u^H` stays
/// equimeasurable with `u`.
pub fn polarize(u: &Field, h: &HalfSpace) -> Result<Field> {
    u.require_density()?;
    let grid = *u.grid();
    let mirror = h.mirror(&grid)?;
    let images = reflection_indices(&grid, &mirror);
    let m = grid.points_per_axis as i64;
    let values = (0..grid.len())
        .map(|flat| {
            let a = u.values()[flat].re;
            let Some(partner) = images[flat] else {
                return Complex64::new(a, 0.0);
            };
            // signed distance to the plane in units of h/2
            let side = (2 * grid.unravel(flat)[mirror.axis] as i64 - m - mirror.twice_plane_cells) as f64
                * mirror.sign;
            let b = u.values()[partner].re;
            Complex64::new(if side <= 0.0 { a.max(b) } else { a.min(b) }, 0.0)
        })
        .collect();
    Ok(Field::from_parts(grid, values))
}

/// Cells ordered by distance from the origin node, ties broken by index.
fn cells_by_radius(grid: &Grid) -> Vec<usize> {
    let mut order: Vec<(f64, usize)> = (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            (x[0] * x[0] + x[1] * x[1] + x[2] * x[2], i)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order.into_iter().map(|(_, i)| i).collect()
}

/// Symmetric-decreasing rearrangement about the origin by rank assignment.
pub fn schwartz_rearrange(u: &Field) -> Result<Field> {
    u.require_density()?;
    let grid = *u.grid();
    let mut vals: Vec<f64> = u.values().iter().map(|v| v.re).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (rank, cell) in cells_by_radius(&grid).into_iter().enumerate() {
        out[cell] = Complex64::new(vals[rank], 0.0);
    }
    Ok(Field::from_parts(grid, out))
}

/// Weighted pool-adjacent-violators fit, non-increasing in index order.
fn isotonic_decreasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v * w, w, 1));
        while blocks.len() > 1 {
            let n = blocks.len();
            let (s1, w1, _) = blocks[n - 2];
            let (s2, w2, _) = blocks[n - 1];
            if s1 / w1 >= s2 / w2 {
                break;
            }
            let (_, _, c2) = blocks.pop().unwrap();
            let last = blocks.last_mut().unwrap();
            last.0 += s2;
            last.1 += w2;
            last.2 += c2;
        }
    }
    blocks
        .into_iter()
        .flat_map(|(s, w, c)| std::iter::repeat_n(s / w, c))
        .collect()
}

/// `|u|²`-weighted centroid.
pub fn centroid(u: &Field) -> Result<Vec<f64>> {
    let grid = u.grid();
    let mut c = vec![0.0; grid.dim];
    let mut total = 0.0;
    for (i, v) in u.values().iter().enumerate() {
        let w = v.norm_sqr();
        let x = grid.point(i);
        for (ck, xk) in c.iter_mut().zip(x) {
            *ck += w * xk;
        }
        total += w;
    }
    if total == 0.0 {
        return Err(CoreError::ZeroField("centroid"));
    }
    c.iter_mut().for_each(|v| *v /= total);
    Ok(c)
}

/// Relative `L²` distance between `|u|` and its best radially non-increasing fit about `center`.
pub fn radial_deviation(u: &Field, center: &[f64]) -> f64 {
    let grid = u.grid();
    let modulus = u.modulus();
    let mut cells: Vec<(f64, f64)> = (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            let r2 = (0..grid.dim).map(|k| (x[k] - center[k]).powi(2)).sum::<f64>();
            (r2.sqrt(), modulus[i])
        })
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    // groups of equal radius
    let mut means = Vec::new();
    let mut counts = Vec::new();
    let mut members = Vec::new();
    let mut start = 0;
    while start < cells.len() {
        let r0 = cells[start].0;
        let mut end = start + 1;
        while end < cells.len() && (cells[end].0 - r0).abs() <= 1e-9 * r0.max(grid.spacing()) {
            end += 1;
        }
        let slice = &cells[start..end];
        means.push(slice.iter().map(|c| c.1).sum::<f64>() / slice.len() as f64);
        counts.push(slice.len() as f64);
        members.push((start, end));
        start = end;
    }
    let fit = isotonic_decreasing(&means, &counts);
    let mut err = 0.0;
    let mut norm = 0.0;
    for ((s, e), f) in members.iter().zip(&fit) {
        for c in &cells[*s..*e] {
            err += (c.1 - f).powi(2);
            norm += c.1 * c.1;
        }
    }
    if norm == 0.0 {
        0.0
    } else {
        (err / norm).sqrt()
    }
}

/// `1 - |Σ w e^{iθ}|/Σ w` with `w = |u|²` over `{|u| > 1e-6 max|u|}`, and the mean phase.
pub fn phase_statistics(u: &Field) -> (f64, f64) {
    let cut = 1e-6 * u.max_modulus();
    let mut z = Complex64::new(0.0, 0.0);
    let mut total = 0.0;
    for v in u.values() {
        let m = v.norm();
        if m > cut && m > 0.0 {
            z += v * m;
            total += m * m;
        }
    }
    if total == 0.0 {
        return (0.0, 0.0);
    }
    ((1.0 - z.norm() / total).max(0.0), z.arg())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub center: Vec<f64>,
    pub radial_deviation: f64,
    /// `E(|u|*) - E(|u|)`
    pub rearrangement_gap: f64,
    /// Gap divided by `|E(|u|)|`.
    pub rearrangement_gap_relative: f64,
    pub phase_deviation: f64,
    pub theta: f64,
    /// Largest `min(‖u^H-u‖, ‖u^H-u∘σ_H‖)/‖u‖` over the sampled aligned half-spaces.
    pub polarization_dichotomy: f64,
    pub half_spaces_tested: usize,
}

/// `count` seeded aligned half-spaces with planes at `|x_k| ≤ L/4`, so that mirror
/// images of the central half of the box stay inside it.
pub fn aligned_half_spaces(grid: &Grid, count: usize, seed: u64) -> Vec<HalfSpace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = grid.points_per_axis as i64 / 4;
    (0..count)
        .map(|_| {
            let axis = rng.gen_range(0..grid.dim);
            let k = rng.gen_range(-reach..=reach);
            let c = k as f64 * 0.5 * grid.spacing();
            HalfSpace::axis(grid.dim, axis, c, rng.gen_bool(0.5))
        })
        .collect()
}

/// `min(‖u^H-u‖, ‖u^H-u∘σ_H‖)/‖u‖`
pub fn dichotomy_defect(u: &Field, h: &HalfSpace) -> Result<f64> {
    let pu = polarize(u, h)?;
    let ru = reflect_field(u, h)?;
    let norm = u.mass().sqrt();
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok(pu.distance(u).min(pu.distance(&ru)) / norm)
}

pub fn symmetry_report(model: &Model, u: &Field) -> Result<SymmetryReport> {
    if !(u.mass() > 0.0) {
        return Err(CoreError::ZeroField("symmetry report"));
    }
    let center = centroid(u)?;
    let modulus = u.modulus_field();
    let star = schwartz_rearrange(&modulus)?;
    let e_mod = model.energy(&modulus)?.energy;
    let e_star = model.energy(&star)?.energy;
    let gap = e_star - e_mod;
    let (phase_deviation, theta) = phase_statistics(u);
    let spaces = aligned_half_spaces(u.grid(), 10, 0);
    let mut worst = 0.0f64;
    for h in &spaces {
        worst = worst.max(dichotomy_defect(&modulus, h)?);
    }
    Ok(SymmetryReport {
        radial_deviation: radial_deviation(u, &center),
        center,
        rearrangement_gap: gap,
        rearrangement_gap_relative: gap / e_mod.abs().max(f64::MIN_POSITIVE),
        phase_deviation,
        theta,
        polarization_dichotomy: worst,
        half_spaces_tested: spaces.len(),
    })
}
