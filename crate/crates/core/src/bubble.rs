//! Cut-off Aubin–Talenti bubbles and the strict upper bound on the critical level.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{critical_level, riesz_constant, sobolev_constants};
use crate::error::{CoreError, Result};
use crate::functionals::{Fiber, FiberMax};
use crate::params::ProblemParams;
use crate::special::composite_rule;
use crate::spectral::{Field, Grid};

const DIM: usize = 3;
const ORDER: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleSpec {
    pub epsilon: f64,
    pub cutoff_inner: f64,
    pub cutoff_outer: f64,
    /// Target `L²` norm `a` of the normalized bubble.
    pub mass_target: f64,
}

impl BubbleSpec {
    pub fn new(epsilon: f64, mass_target: f64) -> Result<Self> {
        let spec = Self {
            epsilon,
            cutoff_inner: 1.0,
            cutoff_outer: 2.0,
            mass_target,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 0.5 * self.cutoff_inner) {
            return Err(CoreError::Bubble(format!(
                "epsilon {} must lie in (0, cutoff_inner/2]",
                self.epsilon
            )));
        }
        if !(self.cutoff_inner > 0.0 && self.cutoff_inner < self.cutoff_outer && self.cutoff_outer.is_finite()) {
            return Err(CoreError::Bubble("need 0 < cutoff_inner < cutoff_outer".into()));
        }
        if !(self.mass_target > 0.0) {
            return Err(CoreError::Bubble("mass_target must be positive".into()));
        }
        Ok(())
    }

    /// `φ(r)` and `φ'(r)`: 1 inside, 0 outside, C¹ cubic blend between.
    pub fn cutoff(&self, r: f64) -> (f64, f64) {
        let (r1, r2) = (self.cutoff_inner, self.cutoff_outer);
        if r <= r1 {
            (1.0, 0.0)
        } else if r >= r2 {
            (0.0, 0.0)
        } else {
            let w = r2 - r1;
            let t = (r - r1) / w;
            (1.0 - 3.0 * t * t + 2.0 * t * t * t, 6.0 * t * (t - 1.0) / w)
        }
    }

    /// `U_ε(r) = (3ε²)^{1/4} (ε²+r²)^{-1/2}` and its derivative.
    pub fn talenti(&self, r: f64) -> (f64, f64) {
        let e2 = self.epsilon * self.epsilon;
        let c = (3.0 * e2).powf(0.25);
        let base = e2 + r * r;
        (c / base.sqrt(), -c * r / (base * base.sqrt()))
    }

    /// `u_ε = φU_ε` and its radial derivative.
    pub fn profile(&self, r: f64) -> (f64, f64) {
        let (phi, dphi) = self.cutoff(r);
        let (u, du) = self.talenti(r);
        (phi * u, dphi * u + phi * du)
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.dim != DIM {
            return Err(CoreError::Bubble(format!("bubbles need a 3-dimensional grid (got {})", grid.dim)));
        }
        let h = grid.spacing();
        if 2.0 * self.epsilon < 4.0 * h {
            return Err(CoreError::Bubble(format!(
                "core width 2ε = {} is narrower than 4h = {}",
                2.0 * self.epsilon,
                4.0 * h
            )));
        }
        Ok(())
    }
}

/// Samples `u_ε = φU_ε` on a 3D grid.
pub fn bubble(spec: &BubbleSpec, grid: Grid) -> Result<Field> {
    spec.check()?;
    spec.check_grid(&grid)?;
    if spec.cutoff_outer >= grid.half_length {
        return Err(CoreError::Bubble("cutoff support exceeds the box".into()));
    }
    Ok(Field::from_real_fn(grid, |x| {
        spec.profile((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()).0
    }))
}

/// `v_ε(x) = λ^{1/2} u_ε(λx)` with `λ = ‖u_ε‖₂/a`, sampled and renormalized to mass `a²`.
pub fn normalized_bubble(spec: &BubbleSpec, grid: Grid) -> Result<Field> {
    let u = bubble(spec, grid)?;
    let lambda = u.mass().sqrt() / spec.mass_target;
    if spec.cutoff_outer / lambda >= grid.half_length {
        return Err(CoreError::Bubble(format!(
            "rescaled support radius {} exceeds the box",
            spec.cutoff_outer / lambda
        )));
    }
    let v = Field::from_real_fn(grid, |x| {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        lambda.sqrt() * spec.profile(lambda * r).0
    });
    Ok(v.with_mass(spec.mass_target * spec.mass_target))
}

/// Integrals of `u_ε` over `ℝ³` by radial quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleIntegrals {
    pub mass: f64,
    pub kinetic: f64,
    /// `∫(I_α∗|u|^p)|u|^p`
    pub nonlocal: f64,
    /// `∫|u|^q`
    pub local: f64,
}

impl BubbleIntegrals {
    /// Integrals of `v_ε`: `∫|v|^t = λ^{t/2-3}∫|u|^t`, kinetic and the critical
    /// nonlocal term are invariant.
    pub fn normalized(&self, a: f64, q: f64) -> Self {
        let lambda = self.mass.sqrt() / a;
        Self {
            mass: a * a,
            kinetic: self.kinetic,
            nonlocal: self.nonlocal,
            local: lambda.powf(0.5 * q - 3.0) * self.local,
        }
    }
}

/// Panel breaks for a radial profile with a core of width `ε` and support `[0, outer]`.
fn radial_breaks(epsilon: f64, inner: f64, outer: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut r = epsilon / 64.0;
    while r < inner {
        breaks.push(r);
        r *= 2.0;
    }
    breaks.push(inner);
    if outer.is_finite() {
        for k in 1..=4 {
            breaks.push(inner + (outer - inner) * k as f64 / 4.0);
        }
    }
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * a.abs().max(1.0));
    breaks
}

/// `F(t)` with `F' = t^{α-2}`: the angular integral of `|x-y|^{α-3}` over two spheres
/// is `8π²(F(r+s) - F(|r-s|))/(rs)`.
fn angular_primitive(alpha: f64, t: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-12 {
        t.ln()
    } else {
        t.powf(alpha - 1.0) / (alpha - 1.0)
    }
}

/// Radial integrals of a profile `f` (with derivative) supported in `[0, outer]`.
///
/// The Riesz term uses the exact angular kernel; each inner integral puts a
/// panel break at the diagonal `s = r`, graded geometrically when `α ≤ 1`.
pub fn radial_integrals(
    f: impl Fn(f64) -> (f64, f64) + Sync,
    breaks: &[f64],
    alpha: f64,
    p: f64,
    q: f64,
) -> Result<BubbleIntegrals> {
    let a = riesz_constant(DIM, alpha)?;
    let four_pi = 4.0 * std::f64::consts::PI;
    let (r, w) = composite_rule(breaks, ORDER);
    let mut mass = 0.0;
    let mut kinetic = 0.0;
    let mut local = 0.0;
    for (ri, wi) in r.iter().zip(&w) {
        let (u, du) = f(*ri);
        let jac = four_pi * wi * ri * ri;
        mass += jac * u * u;
        kinetic += jac * du * du;
        local += jac * u.abs().powf(q);
    }
    let end = *breaks.last().unwrap();
    let density = |s: f64| f(s).0.abs().powf(p);
    let nonlocal: f64 = r
        .par_iter()
        .zip(&w)
        .map(|(&ri, &wi)| {
            let rho_r = density(ri);
            if rho_r == 0.0 {
                return 0.0;
            }
            let mut inner: Vec<f64> = breaks.to_vec();
            inner.push(ri);
            if alpha <= 1.0 {
                for k in 1..=40 {
                    let d = ri * 0.5f64.powi(k);
                    inner.push(ri - d);
                    if ri + d < end {
                        inner.push(ri + d);
                    }
                }
            }
            inner.sort_by(f64::total_cmp);
            inner.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * x.abs().max(1e-300));
            let (s, ws) = composite_rule(&inner, ORDER);
            let potential: f64 = s
                .iter()
                .zip(&ws)
                .map(|(&sj, &wj)| {
                    let kern = angular_primitive(alpha, ri + sj) - angular_primitive(alpha, (ri - sj).abs());
                    wj * density(sj) * sj * sj * kern / (ri * sj)
                })
                .sum();
            wi * rho_r * ri * ri * potential
        })
        .sum();
    let nonlocal = a * 8.0 * std::f64::consts::PI.powi(2) * nonlocal;
    Ok(BubbleIntegrals {
        mass,
        kinetic,
        nonlocal,
        local,
    })
}

/// Radial integrals of `u_ε = φU_ε`.
pub fn bubble_integrals(spec: &BubbleSpec, alpha: f64, p: f64, q: f64) -> Result<BubbleIntegrals> {
    spec.check()?;
    let breaks = radial_breaks(spec.epsilon, spec.cutoff_inner, spec.cutoff_outer);
    radial_integrals(|r| spec.profile(r), &breaks, alpha, p, q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub epsilon: f64,
    /// `max_s Ψ_{v_ε}(s)`
    pub max_psi: f64,
    pub s_max: f64,
    pub level: f64,
    /// `max_psi - level`
    pub margin: f64,
    pub integrals: BubbleIntegrals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub level: f64,
    pub s_alpha: f64,
    /// A row passes when its margin is below `-tolerance`.
    pub tolerance: f64,
    pub rows: Vec<GapRow>,
    pub passed: bool,
}

/// Relative tolerance on the margin, in units of the level.
pub const GAP_TOLERANCE: f64 = 1e-3;

/// Fiber maxima of `v_ε` against `(2+α)/(2(N+α)) S_α^{(N+α)/(2+α)}`.
pub fn critical_gap_check(params: &ProblemParams, eps_list: &[f64]) -> Result<GapReport> {
    params.check()?;
    if params.dim != DIM {
        return Err(CoreError::Bubble(format!("the gap check needs N = 3 (got {})", params.dim)));
    }
    let p_bar = (DIM as f64 + params.alpha) / (DIM as f64 - 2.0);
    if (params.p - p_bar).abs() > 1e-9 * p_bar {
        return Err(CoreError::Bubble(format!(
            "the gap check needs p = p̄ = {p_bar} (got {})",
            params.p
        )));
    }
    let sc = sobolev_constants(DIM, params.alpha)?;
    let level = critical_level(DIM, params.alpha, sc.s_alpha);
    let rows = eps_list
        .par_iter()
        .map(|&epsilon| -> Result<GapRow> {
            let spec = BubbleSpec::new(epsilon, params.a)?;
            let integrals = bubble_integrals(&spec, params.alpha, params.p, params.q)?;
            let v = integrals.normalized(params.a, params.q);
            let fiber = Fiber::from_integrals(params, v.kinetic, v.nonlocal, v.local);
            let FiberMax { s, value } = fiber.maximize(0.5)?;
            Ok(GapRow {
                epsilon,
                max_psi: value,
                s_max: s,
                level,
                margin: value - level,
                integrals,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tolerance = GAP_TOLERANCE * level;
    let passed = rows.iter().any(|r| r.margin < -tolerance);
    Ok(GapReport {
        level,
        s_alpha: sc.s_alpha,
        tolerance,
        rows,
        passed,
    })
}
