//! Projection onto the Pohožaev manifold and minimization of `E` on it.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::functionals::{EnergyBreakdown, Model, Residuals};
use crate::spectral::{dilate, Field, Grid, DEFAULT_S_MAX};
use crate::symmetry::{symmetry_report, SymmetryReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Initial (and maximal) line-search step.
    pub step0: f64,
    /// Step reduction factor per rejected trial.
    pub backtrack: f64,
    /// Tolerance on the gradient tangent to `𝒫 ∩ S_a`, relative to `‖u‖_{H¹}`.
    pub grad_tol: f64,
    /// Tolerance on `|P|/kinetic`.
    pub pohozaev_tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Initial half-width of the fiber root bracket.
    pub s_bracket: f64,
    pub s_max: f64,
    /// Consecutive rejected trials before the step cap is halved (once) or the run stops.
    pub max_failures: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step0: 1.0,
            backtrack: 0.5,
            grad_tol: 1e-6,
            pohozaev_tol: 1e-8,
            max_iters: 3000,
            seed: 0,
            s_bracket: 0.5,
            s_max: DEFAULT_S_MAX,
            max_failures: 30,
        }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<()> {
        let positive = [
            ("step0", self.step0),
            ("grad_tol", self.grad_tol),
            ("pohozaev_tol", self.pohozaev_tol),
            ("s_bracket", self.s_bracket),
            ("s_max", self.s_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CoreError::InvalidParameter(format!("{name} = {v} must be > 0")));
            }
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "backtrack = {} must lie in (0, 1)",
                self.backtrack
            )));
        }
        if self.max_iters == 0 || self.max_failures == 0 {
            return Err(CoreError::InvalidParameter(
                "max_iters and max_failures must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Named starting fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Initializer {
    /// Centered radial Gaussian; width defaults to `L/6`.
    Gaussian {
        #[serde(default)]
        width: Option<f64>,
    },
    /// Two Gaussians on the first axis at `±separation/2 + shift`, the second scaled by `weight`.
    TwoBump {
        separation: f64,
        width: f64,
        #[serde(default = "one")]
        weight: f64,
        #[serde(default)]
        shift: f64,
    },
    /// `count` Gaussians with seeded random centers, widths and amplitudes.
    RandomBumps { count: usize },
}

fn one() -> f64 {
    1.0
}

impl Default for Initializer {
    fn default() -> Self {
        Initializer::Gaussian { width: None }
    }
}

fn bump(x: [f64; 3], c: [f64; 3], width: f64) -> f64 {
    let r2 = (0..3).map(|i| (x[i] - c[i]).powi(2)).sum::<f64>();
    (-0.5 * r2 / (width * width)).exp()
}

impl Initializer {
    /// Builds the field with mass `a²`.
    pub fn build(&self, grid: Grid, a: f64, seed: u64) -> Result<Field> {
        let mass = a * a;
        let u = match *self {
            Initializer::Gaussian { width } => {
                Field::gaussian(grid, width.unwrap_or(grid.half_length / 6.0), mass)
            }
            Initializer::TwoBump {
                separation,
                width,
                weight,
                shift,
            } => {
                let c1 = [shift - 0.5 * separation, 0.0, 0.0];
                let c2 = [shift + 0.5 * separation, 0.0, 0.0];
                Field::from_real_fn(grid, |x| bump(x, c1, width) + weight * bump(x, c2, width))
                    .with_mass(mass)
            }
            Initializer::RandomBumps { count } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let l = grid.half_length;
                let bumps: Vec<([f64; 3], f64, f64)> = (0..count.max(1))
                    .map(|_| {
                        let mut c = [0.0; 3];
                        for ci in c.iter_mut().take(grid.dim) {
                            *ci = rng.gen_range(-0.2 * l..0.2 * l);
                        }
                        (c, rng.gen_range(0.08 * l..0.18 * l), rng.gen_range(0.3..1.0))
                    })
                    .collect();
                Field::from_real_fn(grid, |x| {
                    bumps.iter().map(|(c, w, amp)| amp * bump(x, *c, *w)).sum()
                })
                .with_mass(mass)
            }
        };
        if !(u.mass() > 0.0) {
            return Err(CoreError::ZeroField("initial field"));
        }
        Ok(u)
    }
}

/// `s_u`, the unique root of `s ↦ P(s⋆u)`, from the analytic fiber of `u`.
pub fn fiber_project(model: &Model, u: &Field, s_bracket: f64) -> Result<f64> {
    model.fiber(u)?.root(s_bracket)
}

/// A field on `𝒫 ∩ S_a` with its integrals.
#[derive(Debug, Clone)]
pub struct Projected {
    pub field: Field,
    pub breakdown: EnergyBreakdown,
    /// Accumulated dilation parameter.
    pub s_total: f64,
}

/// Renormalizes to mass `a²` and dilates onto `𝒫`. Grid dilation is only
/// approximately exact, so the last digits are fixed by Newton steps along the
/// mass-tangent part of `P'(u)`.
pub fn project_to_manifold(model: &Model, u: &Field, config: &SolverConfig) -> Result<Projected> {
    let a2 = model.params().a.powi(2);
    let mut field = u.with_mass(a2);
    let mut s_total = 0.0;
    for _ in 0..30 {
        let b = model.energy(&field)?;
        if !(b.kinetic > 0.0) {
            return Err(CoreError::ZeroField("projection"));
        }
        if b.pohozaev.abs() <= 1e-6 * b.kinetic {
            break;
        }
        let s = crate::functionals::Fiber::new(model.params(), &b)
            .root(config.s_bracket)?
            .clamp(-config.s_max, config.s_max);
        field = dilate(&field, s, config.s_max)?.with_mass(a2);
        s_total += s;
        if s.abs() < 1e-13 {
            break;
        }
    }
    for _ in 0..20 {
        let ev = model.evaluate(&field)?;
        let b = ev.breakdown;
        if b.pohozaev.abs() <= 1e-13 * b.kinetic {
            return Ok(Projected {
                field,
                breakdown: b,
                s_total,
            });
        }
        let pg = &ev.pohozaev_gradient;
        let w = smoothed_tangent(model, &field, pg, b.kinetic / b.mass);
        let slope = pg.inner_re(&w);
        if !(slope.abs() > 0.0) {
            break;
        }
        field = field.add_scaled(&w, -b.pohozaev / slope).with_mass(a2);
    }
    let breakdown = model.energy(&field)?;
    if breakdown.pohozaev.abs() > 1e-9 * breakdown.kinetic {
        return Err(CoreError::FiberProjection(format!(
            "projection did not settle on the manifold (|P|/T = {:e})",
            breakdown.pohozaev.abs() / breakdown.kinetic
        )));
    }
    Ok(Projected {
        field,
        breakdown,
        s_total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub energy: f64,
    /// `|P(u)|`
    pub pohozaev: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub field: Option<Field>,
    /// Final energy: an upper-bound estimate of the manifold level.
    pub c_po: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Why the iteration stopped.
    pub stop_reason: String,
    pub residuals: Residuals,
    pub grad_norm: f64,
    pub breakdown: EnergyBreakdown,
    /// Energy recomputed through the manifold form without the kinetic term.
    pub manifold_form_energy: f64,
    pub boundary_ratio: f64,
    pub history: Vec<HistoryEntry>,
    pub symmetry: Option<SymmetryReport>,
}

impl SolveReport {
    pub fn field(&self) -> &Field {
        self.field.as_ref().expect("report carries its field")
    }
}

/// Gradient of `E` on `𝒫 ∩ S_a`, normalized by `‖u‖_{H¹}`.
fn manifold_gradient_norm(u: &Field, g: &Field, pgrad: &Field, h1: f64) -> f64 {
    let m = u.mass();
    let w = pgrad.add_scaled(u, -pgrad.inner_re(u) / m);
    let ww = w.inner_re(&w);
    let gt = if ww > 0.0 { g.add_scaled(&w, -g.inner_re(&w) / ww) } else { g.clone() };
    gt.mass().sqrt() / h1
}

/// `(β-Δ)^{-1}f - c(β-Δ)^{-1}u` with `c` chosen so the result is `L²`-orthogonal to `u`.
fn smoothed_tangent(model: &Model, u: &Field, f: &Field, beta: f64) -> Field {
    let sp = model.spectral();
    let pf = sp.apply_multiplier(f, |k2| 1.0 / (beta + k2));
    let pu = sp.apply_multiplier(u, |k2| 1.0 / (beta + k2));
    let c = u.inner_re(&pf) / u.inner_re(&pu);
    pf.add_scaled(&pu, -c)
}

/// Preconditioned gradient, tangent to the mass sphere and to first order to `𝒫`.
fn descent_direction(model: &Model, u: &Field, grad: &Field, pgrad: &Field, beta: f64) -> Field {
    let d = smoothed_tangent(model, u, grad, beta);
    let w = smoothed_tangent(model, u, pgrad, beta);
    let slope = pgrad.inner_re(&w);
    if slope.abs() > 0.0 {
        d.add_scaled(&w, -pgrad.inner_re(&d) / slope)
    } else {
        d
    }
}

/// Minimizes `E` over `𝒫 ∩ S_a` starting from a named initializer.
pub fn minimize_on_pohozaev(model: &Model, init: &Initializer, config: &SolverConfig) -> Result<SolveReport> {
    config.check()?;
    let u0 = init.build(*model.grid(), model.params().a, config.seed)?;
    minimize_from(model, &u0, config)
}

/// Minimizes `E` over `𝒫 ∩ S_a` from an explicit starting field.
pub fn minimize_from(model: &Model, init: &Field, config: &SolverConfig) -> Result<SolveReport> {
    config.check()?;
    if !(init.mass() > 0.0) {
        return Err(CoreError::ZeroField("initial field"));
    }
    let mut current = project_to_manifold(model, init, config)?;
    let mut history = Vec::new();
    let mut cap = config.step0;
    let mut tau = config.step0;
    let mut halved = false;
    let mut converged = false;
    let mut stop_reason = String::from("iteration budget exhausted");
    let mut iterations = 0;
    let mut grad_norm;
    loop {
        let u = &current.field;
        let ev = model.evaluate(u)?;
        let b = ev.breakdown;
        let lambda = b.multiplier(model.params())?;
        let g = ev.gradient.add_scaled(u, -lambda);
        let h1 = (b.kinetic + b.mass).sqrt();
        grad_norm = manifold_gradient_norm(u, &g, &ev.pohozaev_gradient, h1);
        history.push(HistoryEntry {
            iteration: iterations,
            energy: b.energy,
            pohozaev: b.pohozaev.abs(),
            grad_norm,
            step: tau,
        });
        if grad_norm < config.grad_tol && b.pohozaev.abs() < config.pohozaev_tol * b.kinetic {
            converged = true;
            stop_reason = "tolerances met".into();
            break;
        }
        if iterations >= config.max_iters {
            break;
        }
        iterations += 1;
        let beta = b.kinetic / b.mass;
        let d = descent_direction(model, u, &g, &ev.pohozaev_gradient, beta);
        let mut failures = 0;
        let accepted = loop {
            let trial = u.add_scaled(&d, -tau);
            match project_to_manifold(model, &trial, config) {
                Ok(p) if p.breakdown.energy < b.energy => break Some(p),
                _ => {}
            }
            tau *= config.backtrack;
            failures += 1;
            if failures >= config.max_failures {
                if halved {
                    break None;
                }
                halved = true;
                cap *= 0.5;
                tau = cap;
                failures = 0;
            }
        };
        match accepted {
            Some(p) => {
                current = p;
                tau = (tau * 2.0).min(cap);
            }
            None => {
                stop_reason = "line search stalled".into();
                break;
            }
        }
    }
    let u = &current.field;
    let ev = model.evaluate(u)?;
    let residuals = model.residuals_from(u, &ev)?;
    let b = ev.breakdown;
    let symmetry = symmetry_report(model, u).ok();
    Ok(SolveReport {
        c_po: b.energy,
        lambda: b.multiplier(model.params())?,
        iterations,
        converged,
        stop_reason,
        residuals,
        grad_norm,
        breakdown: b,
        manifold_form_energy: b.energy_on_manifold(model.params()),
        boundary_ratio: u.boundary_ratio(),
        history,
        symmetry,
        field: Some(current.field),
    })
}

/// Samples centered Gaussians with kinetic energy below `k` and reports whether all
/// have `E < level` and `P > 0`.
pub fn small_gradient_check(model: &Model, level: f64, k: f64, samples: usize) -> Result<bool> {
    let grid = *model.grid();
    let a2 = model.params().a.powi(2);
    let base = Field::gaussian(grid, 1.0, a2);
    let t1 = model.spectral().grad_sq(&base);
    let mut ok = true;
    for i in 0..samples {
        // kinetic of a Gaussian scales like width^{-2}
        let target = k * (i as f64 + 1.0) / (samples as f64 + 1.0);
        let width = (t1 / target).sqrt();
        let w = Field::gaussian(grid, width, a2);
        let b = model.energy(&w)?;
        if b.kinetic >= k {
            continue;
        }
        ok &= b.energy < level && b.pohozaev > 0.0;
    }
    Ok(ok)
}

/// Phase-boosted copy `u(x)e^{iθx₁}`.
pub fn boost(u: &Field, theta: f64) -> Field {
    let grid = *u.grid();
    let values = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| v * Complex64::from_polar(1.0, theta * grid.point(i)[0]))
        .collect();
    Field::from_parts(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ProblemParams;

    fn model1(m: usize) -> Model {
        let params = ProblemParams::new(1, 0.5, 4.0, 6.5, 1.0, 1.0).unwrap();
        Model::new(params, Grid::new(1, 0.3, m).unwrap()).unwrap()
    }

    #[test]
    fn projection_lands_on_manifold() {
        let model = model1(256);
        let cfg = SolverConfig::default();
        let u = Field::gaussian(*model.grid(), 0.05, 1.0);
        let p = project_to_manifold(&model, &u, &cfg).unwrap();
        assert!(p.breakdown.pohozaev.abs() < 1e-9 * p.breakdown.kinetic);
        assert!((p.field.mass() - 1.0).abs() < 1e-12);
        // projecting again is a no-op
        let s = fiber_project(&model, &p.field, 0.5).unwrap();
        assert!(s.abs() < 1e-8, "s = {s}");
        let fiber = model.fiber(&p.field).unwrap();
        assert!(fiber.value(0.0) >= fiber.value(0.1) && fiber.value(0.0) >= fiber.value(-0.1));
        assert!(fiber.value(0.0) > 0.0);
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            backtrack: 1.5,
            ..SolverConfig::default()
        };
        assert!(bad.check().is_err());
        let bad = SolverConfig {
            max_iters: 0,
            ..SolverConfig::default()
        };
        assert!(bad.check().is_err());
    }

    #[test]
    fn one_dim_solve_converges() {
        let model = model1(512);
        let report = minimize_on_pohozaev(&model, &Initializer::default(), &SolverConfig::default()).unwrap();
        assert!(report.converged, "{} {:?}", report.stop_reason, report.residuals);
        assert!(report.lambda < 0.0);
        assert!(report.c_po > 0.0);
        assert!(report.residuals.pde < 1e-4, "{:?}", report.residuals);
        // energies decrease along the history
        for w in report.history.windows(2) {
            assert!(w[1].energy < w[0].energy);
        }
        let b = report.breakdown;
        assert!((report.manifold_form_energy - b.energy).abs() < 1e-6 * b.energy.abs());
    }

    #[test]
    fn two_bump_starts_agree() {
        let model = model1(512);
        let cfg = SolverConfig::default();
        let sym = minimize_on_pohozaev(
            &model,
            &Initializer::TwoBump { separation: 0.06, width: 0.025, weight: 1.0, shift: 0.0 },
            &cfg,
        )
        .unwrap();
        let off = minimize_on_pohozaev(
            &model,
            &Initializer::TwoBump { separation: 0.07, width: 0.02, weight: 0.6, shift: 0.02 },
            &cfg,
        )
        .unwrap();
        assert!(((sym.c_po - off.c_po) / sym.c_po).abs() < 1e-3, "{} vs {}", sym.c_po, off.c_po);
    }
}
