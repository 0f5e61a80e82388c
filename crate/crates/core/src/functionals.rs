//! Energy, Pohožaev functional, fiber map, first variation and residuals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::params::{CriticalExponents, ProblemParams};
use crate::spectral::{Field, Grid, RieszKernel, SingularCell, Spectral};

/// The integrals making up `E`, `P` and the fiber map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// `∫|∇u|²`
    pub kinetic: f64,
    /// `∫(I_α∗|u|^p)|u|^p`
    pub nonlocal: f64,
    /// `∫|u|^q`
    pub local: f64,
    /// `∫|u|²`
    pub mass: f64,
    pub energy: f64,
    pub pohozaev: f64,
}

impl EnergyBreakdown {
    pub fn from_integrals(params: &ProblemParams, kinetic: f64, nonlocal: f64, local: f64, mass: f64) -> Self {
        let ex = params.exponents();
        Self {
            kinetic,
            nonlocal,
            local,
            mass,
            energy: energy_of(params, kinetic, nonlocal, local),
            pohozaev: pohozaev_of(params, &ex, kinetic, nonlocal, local),
        }
    }

    /// `λ = (kinetic - κ nonlocal - μ local) / mass`
    pub fn multiplier(&self, params: &ProblemParams) -> Result<f64> {
        if !(self.mass > 0.0) {
            return Err(CoreError::ZeroField("Lagrange multiplier"));
        }
        Ok((self.kinetic - params.kappa * self.nonlocal - params.mu * self.local) / self.mass)
    }

    /// Energy on 𝒫 written without the kinetic term:
    /// `(η_p/2 - 1/(2p))κ nonlocal + (γ_q/2 - 1/q)μ local`.
    pub fn energy_on_manifold(&self, params: &ProblemParams) -> f64 {
        let ex = params.exponents();
        (ex.eta_p / 2.0 - 1.0 / (2.0 * params.p)) * params.kappa * self.nonlocal
            + (ex.gamma_q / 2.0 - 1.0 / params.q) * params.mu * self.local
    }

    /// Relative defect in `(N-2)/2 T = Nλ/2 m + (N+α)/(2p) κV + μN/q W`,
    /// measured against the largest term.
    pub fn pohozaev_identity_residual(&self, params: &ProblemParams) -> Result<f64> {
        let lambda = self.multiplier(params)?;
        let n = params.dim as f64;
        let terms = [
            (n - 2.0) / 2.0 * self.kinetic,
            n * lambda / 2.0 * self.mass,
            (n + params.alpha) / (2.0 * params.p) * params.kappa * self.nonlocal,
            params.mu * n / params.q * self.local,
        ];
        let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        if scale == 0.0 {
            return Ok(0.0);
        }
        Ok((terms[0] - terms[1] - terms[2] - terms[3]).abs() / scale)
    }
}

fn energy_of(params: &ProblemParams, kinetic: f64, nonlocal: f64, local: f64) -> f64 {
    0.5 * kinetic - params.kappa * nonlocal / (2.0 * params.p) - params.mu * local / params.q
}

fn pohozaev_of(params: &ProblemParams, ex: &CriticalExponents, kinetic: f64, nonlocal: f64, local: f64) -> f64 {
    kinetic - params.kappa * ex.eta_p * nonlocal - params.mu * ex.gamma_q * local
}

/// Residual diagnostics of a candidate solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `‖E'(u) - λu‖₂ / ‖u‖_{H¹}`
    pub pde: f64,
    /// `|P(u)| / kinetic`
    pub pohozaev: f64,
    pub pohozaev_identity: f64,
}

/// Discretized functionals for one parameter set on one grid.
#[derive(Debug, Clone)]
pub struct Model {
    params: ProblemParams,
    exponents: CriticalExponents,
    spectral: Spectral,
    kernel: RieszKernel,
}

/// Breakdown, first variation and Riesz potential of one field.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub breakdown: EnergyBreakdown,
    /// `E'(u) = -Δu - κ(I_α∗|u|^p)|u|^{p-2}u - μ|u|^{q-2}u`
    pub gradient: Field,
    /// `P'(u) = -2Δu - 2pκη_p(I_α∗|u|^p)|u|^{p-2}u - μγ_q q|u|^{q-2}u`
    pub pohozaev_gradient: Field,
}

fn signed_power(v: Complex64, e: f64) -> Complex64 {
    let m = v.norm();
    if m == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        v * m.powf(e)
    }
}

impl Model {
    pub fn new(params: ProblemParams, grid: Grid) -> Result<Self> {
        Self::with_singular_cell(params, grid, SingularCell::default())
    }

    pub fn with_singular_cell(params: ProblemParams, grid: Grid, singular: SingularCell) -> Result<Self> {
        params.check()?;
        grid.check()?;
        if grid.dim != params.dim {
            return Err(CoreError::InvalidGrid(format!(
                "grid dimension {} differs from N = {}",
                grid.dim, params.dim
            )));
        }
        Ok(Self {
            exponents: params.exponents(),
            kernel: RieszKernel::new(grid, params.alpha, singular)?,
            spectral: Spectral::new(grid),
            params,
        })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn exponents(&self) -> &CriticalExponents {
        &self.exponents
    }

    pub fn grid(&self) -> &Grid {
        self.spectral.grid()
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn kernel(&self) -> &RieszKernel {
        &self.kernel
    }

    /// Same model with a different `μ`.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        let params = self.params.with_mu(mu)?;
        Ok(Self {
            params,
            exponents: params.exponents(),
            ..self.clone()
        })
    }

    fn density_and_potential(&self, u: &Field) -> (Vec<f64>, Vec<f64>) {
        let rho: Vec<f64> = u.values().iter().map(|v| v.norm().powf(self.params.p)).collect();
        let phi = if self.params.kappa == 0.0 {
            vec![0.0; rho.len()]
        } else {
            self.kernel.apply_real(&rho)
        };
        (rho, phi)
    }

    fn check_grid(&self, u: &Field) -> Result<()> {
        if u.grid() != self.grid() {
            return Err(CoreError::InvalidGrid("field grid differs from model grid".into()));
        }
        Ok(())
    }

    pub fn energy(&self, u: &Field) -> Result<EnergyBreakdown> {
        self.check_grid(u)?;
        let (rho, phi) = self.density_and_potential(u);
        Ok(self.breakdown_from(u, &rho, &phi))
    }

    fn breakdown_from(&self, u: &Field, rho: &[f64], phi: &[f64]) -> EnergyBreakdown {
        let dv = self.grid().cell_volume();
        let nonlocal = rho.iter().zip(phi).map(|(a, b)| a * b).sum::<f64>() * dv;
        let local = u
            .values()
            .iter()
            .map(|v| v.norm().powf(self.params.q))
            .sum::<f64>()
            * dv;
        EnergyBreakdown::from_integrals(
            &self.params,
            self.spectral.grad_sq(u),
            nonlocal,
            local,
            u.mass(),
        )
    }

    pub fn evaluate(&self, u: &Field) -> Result<Evaluation> {
        self.check_grid(u)?;
        let (rho, phi) = self.density_and_potential(u);
        let breakdown = self.breakdown_from(u, &rho, &phi);
        let lap = self.spectral.laplacian(u).into_values();
        let (p, q, kappa, mu) = (self.params.p, self.params.q, self.params.kappa, self.params.mu);
        let (eta_p, gamma_q) = (self.exponents.eta_p, self.exponents.gamma_q);
        let mut grad = Vec::with_capacity(lap.len());
        let mut pgrad = Vec::with_capacity(lap.len());
        for ((l, v), f) in lap.iter().zip(u.values()).zip(&phi) {
            let nl = kappa * f * signed_power(*v, p - 2.0);
            let lo = mu * signed_power(*v, q - 2.0);
            grad.push(-*l - nl - lo);
            pgrad.push(-2.0 * *l - 2.0 * p * eta_p * nl - q * gamma_q * lo);
        }
        Ok(Evaluation {
            breakdown,
            gradient: Field::from_parts(*self.grid(), grad),
            pohozaev_gradient: Field::from_parts(*self.grid(), pgrad),
        })
    }

    pub fn euler_lagrange_gradient(&self, u: &Field) -> Result<Field> {
        Ok(self.evaluate(u)?.gradient)
    }

    pub fn multiplier(&self, u: &Field) -> Result<f64> {
        self.energy(u)?.multiplier(&self.params)
    }

    pub fn residuals(&self, u: &Field) -> Result<Residuals> {
        let ev = self.evaluate(u)?;
        self.residuals_from(u, &ev)
    }

    pub fn residuals_from(&self, u: &Field, ev: &Evaluation) -> Result<Residuals> {
        let b = &ev.breakdown;
        let lambda = b.multiplier(&self.params)?;
        let h1 = (b.kinetic + b.mass).sqrt();
        let pde = ev.gradient.add_scaled(u, -lambda).mass().sqrt() / h1;
        Ok(Residuals {
            pde,
            pohozaev: if b.kinetic > 0.0 { b.pohozaev.abs() / b.kinetic } else { 0.0 },
            pohozaev_identity: b.pohozaev_identity_residual(&self.params)?,
        })
    }

    pub fn fiber(&self, u: &Field) -> Result<Fiber> {
        Ok(Fiber::new(&self.params, &self.energy(u)?))
    }
}

/// `Ψ_u(s) = E(s⋆u)` in closed form from the base integrals of `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fiber {
    pub kinetic: f64,
    /// `κ ∫(I_α∗|u|^p)|u|^p`
    pub nonlocal: f64,
    /// `μ ∫|u|^q`
    pub local: f64,
    pub p: f64,
    pub q: f64,
    pub eta_p: f64,
    pub gamma_q: f64,
    /// `Np - N - α`
    pub nonlocal_rate: f64,
    /// `Nq/2 - N`
    pub local_rate: f64,
}

/// Fiber root and level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberMax {
    pub s: f64,
    pub value: f64,
}

impl Fiber {
    pub fn new(params: &ProblemParams, b: &EnergyBreakdown) -> Self {
        Self::from_integrals(params, b.kinetic, b.nonlocal, b.local)
    }

    pub fn from_integrals(params: &ProblemParams, kinetic: f64, nonlocal: f64, local: f64) -> Self {
        let ex = params.exponents();
        Self {
            kinetic,
            nonlocal: params.kappa * nonlocal,
            local: params.mu * local,
            p: params.p,
            q: params.q,
            eta_p: ex.eta_p,
            gamma_q: ex.gamma_q,
            nonlocal_rate: params.nonlocal_rate(),
            local_rate: params.local_rate(),
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        0.5 * (2.0 * s).exp() * self.kinetic
            - self.nonlocal / (2.0 * self.p) * (self.nonlocal_rate * s).exp()
            - self.local / self.q * (self.local_rate * s).exp()
    }

    /// `P(s⋆u) = Ψ_u'(s)`
    pub fn pohozaev(&self, s: f64) -> f64 {
        (2.0 * s).exp() * self.reduced(s)
    }

    /// `g_u(s) = e^{-2s} P(s⋆u)`, strictly decreasing in the existence regime.
    pub fn reduced(&self, s: f64) -> f64 {
        self.kinetic
            - self.eta_p * self.nonlocal * ((self.nonlocal_rate - 2.0) * s).exp()
            - self.gamma_q * self.local * ((self.local_rate - 2.0) * s).exp()
    }

    /// Kinetic energy of `s⋆u`.
    pub fn kinetic_at(&self, s: f64) -> f64 {
        (2.0 * s).exp() * self.kinetic
    }

    /// Unique root of `s ↦ P(s⋆u)`, located to `|P| ≤ 1e-12·kinetic`.
    pub fn root(&self, bracket: f64) -> Result<f64> {
        if !(self.kinetic > 0.0) {
            return Err(CoreError::ZeroField("fiber root"));
        }
        let decreasing = self.nonlocal_rate >= 2.0 && self.local_rate >= 2.0;
        let strict = (self.nonlocal_rate > 2.0 && self.nonlocal > 0.0)
            || (self.local_rate > 2.0 && self.local > 0.0);
        if !(decreasing && strict) {
            return Err(CoreError::FiberProjection(format!(
                "g_u is not strictly decreasing (rates {}, {})",
                self.nonlocal_rate, self.local_rate
            )));
        }
        let g = |s: f64| self.reduced(s);
        let g0 = g(0.0);
        if g0 == 0.0 {
            return Ok(0.0);
        }
        let tol = 1e-12 * self.kinetic;
        let mut width = bracket.max(1e-3);
        let (mut lo, mut hi);
        if g0 > 0.0 {
            lo = 0.0;
            hi = width;
            while g(hi) > 0.0 {
                lo = hi;
                width *= 2.0;
                hi = width;
                if hi > 200.0 {
                    return Err(CoreError::FiberProjection("no sign change for s > 0".into()));
                }
            }
        } else {
            hi = 0.0;
            lo = -width;
            while g(lo) <= 0.0 {
                hi = lo;
                width *= 2.0;
                lo = -width;
                if lo < -200.0 {
                    return Err(CoreError::FiberProjection(
                        "no sign change for s < 0: the fiber has no critical point".into(),
                    ));
                }
            }
        }
        // Illinois false position with bisection safeguard.
        let (mut glo, mut ghi) = (g(lo), g(hi));
        let mut side = 0i8;
        let mut s = 0.5 * (lo + hi);
        for _ in 0..400 {
            let mut cand = hi - ghi * (hi - lo) / (ghi - glo);
            if !(cand > lo && cand < hi) {
                cand = 0.5 * (lo + hi);
            }
            s = cand;
            let gs = g(s);
            if gs.abs() * (2.0 * s).exp() <= tol * (2.0 * s).exp() || hi - lo <= 4.0 * f64::EPSILON * (1.0 + s.abs()) {
                return Ok(s);
            }
            if gs > 0.0 {
                lo = s;
                glo = gs;
                if side == 1 {
                    ghi *= 0.5;
                }
                side = 1;
            } else {
                hi = s;
                ghi = gs;
                if side == -1 {
                    glo *= 0.5;
                }
                side = -1;
            }
        }
        Ok(s)
    }

    /// `max_s Ψ_u(s)` through the root of the derivative.
    pub fn maximize(&self, bracket: f64) -> Result<FiberMax> {
        let s = self.root(bracket)?;
        Ok(FiberMax { s, value: self.value(s) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params3() -> ProblemParams {
        ProblemParams::new(3, 2.0, 3.0, 4.0, 1.0, 1.0).unwrap()
    }

    fn params1() -> ProblemParams {
        ProblemParams::new(1, 0.5, 4.0, 6.5, 1.0, 1.0).unwrap()
    }

    fn random_field(grid: Grid, rng: &mut ChaCha8Rng) -> Field {
        let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Field::from_fn(grid, |x| {
            let r2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2);
            Complex64::new(1.0 + 0.3 * c[3], 0.4 * c[4]) * (-(1.0 + 0.3 * c[5].abs()) * r2).exp()
                + 0.3 * (-(x[0] + 1.0).powi(2) - x[1] * x[1] - x[2] * x[2]).exp()
        })
    }

    #[test]
    fn zero_field_breakdown() {
        let g = Grid::new(1, 8.0, 64).unwrap();
        let m = Model::new(params1(), g).unwrap();
        let b = m.energy(&Field::zeros(g)).unwrap();
        assert_eq!((b.kinetic, b.nonlocal, b.local, b.energy, b.pohozaev), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert!(m.euler_lagrange_gradient(&Field::zeros(g)).unwrap().max_modulus() == 0.0);
        assert!(matches!(m.multiplier(&Field::zeros(g)), Err(CoreError::ZeroField(_))));
    }

    /// `u(x) = c·sech^{1/2}(2kx)` solves `-u'' = λu + μ|u|^4 u` with
    /// `λ = -k²`, `c⁴ = 3k²/μ` (1D quintic soliton family).
    fn quintic_soliton(grid: Grid, k: f64, mu: f64) -> Field {
        let c = (3.0 * k * k / mu).powf(0.25);
        Field::from_real_fn(grid, |x| c / (2.0 * k * x[0]).cosh().sqrt())
    }

    #[test]
    fn soliton_energy_multiplier_and_residuals() {
        let (k, mu) = (0.7, 0.8);
        let params = ProblemParams::new(1, 0.5, 4.0, 6.0, mu, 1.0)
            .unwrap()
            .with_kappa(0.0)
            .unwrap();
        let g = Grid::new(1, 24.0, 256).unwrap();
        let model = Model::new(params, g).unwrap();
        let u = quintic_soliton(g, k, mu);
        let b = model.energy(&u).unwrap();
        // ∫sech(2kx) = π/(2k), ∫ sech(2kx)^3 = π/(4k), ∫ (d/dx sech^{1/2})² = k π/4·...
        let c2 = (3.0 * k * k / mu).sqrt();
        let pi = std::f64::consts::PI;
        let mass = c2 * pi / (2.0 * k);
        let kinetic = c2 * k * pi / 4.0;
        let local = c2.powi(3) * pi / (4.0 * k);
        assert_relative_eq!(b.mass, mass, max_relative = 1e-8);
        assert_relative_eq!(b.kinetic, kinetic, max_relative = 1e-8);
        assert_relative_eq!(b.local, local, max_relative = 1e-8);
        let e_exact = 0.5 * kinetic - mu * local / 6.0;
        assert!((b.energy - e_exact).abs() < 1e-6);
        assert!((model.multiplier(&u).unwrap() + k * k).abs() < 1e-6);
        let r = model.residuals(&u).unwrap();
        assert!(r.pde < 1e-6, "{r:?}");
        assert!(r.pohozaev_identity < 1e-6, "{r:?}");
    }

    #[test]
    fn random_field_is_not_a_solution() {
        let g = Grid::new(1, 10.0, 128).unwrap();
        let model = Model::new(params1(), g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = model.residuals(&random_field(g, &mut rng)).unwrap();
        assert!(r.pde > 1e-2, "{r:?}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (params, grid) in [
            (params1(), Grid::new(1, 10.0, 128).unwrap()),
            (params3(), Grid::new(3, 6.0, 16).unwrap()),
        ] {
            let model = Model::new(params, grid).unwrap();
            for _ in 0..3 {
                let u = random_field(grid, &mut rng);
                let v = random_field(grid, &mut rng);
                let d = 1e-5;
                let ep = model.energy(&u.add_scaled(&v, d)).unwrap().energy;
                let em = model.energy(&u.add_scaled(&v, -d)).unwrap().energy;
                let fd = (ep - em) / (2.0 * d);
                let an = model.euler_lagrange_gradient(&u).unwrap().inner_re(&v);
                assert!(((fd - an) / an).abs() < 1e-6, "fd {fd} analytic {an}");
            }
        }
    }

    #[test]
    fn pohozaev_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let grid = Grid::new(1, 10.0, 128).unwrap();
        let model = Model::new(params1(), grid).unwrap();
        let u = random_field(grid, &mut rng);
        let v = random_field(grid, &mut rng);
        let d = 1e-5;
        let pp = model.energy(&u.add_scaled(&v, d)).unwrap().pohozaev;
        let pm = model.energy(&u.add_scaled(&v, -d)).unwrap().pohozaev;
        let fd = (pp - pm) / (2.0 * d);
        let an = model.evaluate(&u).unwrap().pohozaev_gradient.inner_re(&v);
        assert!(((fd - an) / an).abs() < 1e-6, "fd {fd} analytic {an}");
    }

    #[test]
    fn real_input_gives_real_gradient() {
        let g = Grid::new(1, 10.0, 64).unwrap();
        let model = Model::new(params1(), g).unwrap();
        let u = Field::gaussian(g, 1.0, 1.0);
        let grad = model.euler_lagrange_gradient(&u).unwrap();
        assert!(grad.values().iter().all(|v| v.im.abs() < 1e-13));
    }

    #[test]
    fn fiber_agrees_with_dilation() {
        let g = Grid::new(1, 20.0, 512).unwrap();
        let model = Model::new(params1(), g).unwrap();
        let u = Field::gaussian(g, 1.5, 1.0);
        let fiber = model.fiber(&u).unwrap();
        let b = model.energy(&u).unwrap();
        assert_eq!(fiber.value(0.0), b.energy);
        assert_relative_eq!(fiber.pohozaev(0.0), b.pohozaev, max_relative = 1e-14);
        for s in [-1.0, -0.5, 0.5, 1.0] {
            let dil = crate::spectral::dilate(&u, s, 3.0).unwrap();
            let direct = model.energy(&dil).unwrap().energy;
            let scale = fiber.kinetic_at(s);
            assert!((fiber.value(s) - direct).abs() < 1e-3 * scale, "s {s}: {} vs {direct}", fiber.value(s));
        }
    }

    #[test]
    fn fiber_derivative_is_pohozaev() {
        let fiber = Fiber::from_integrals(&params3(), 1.3, 0.7, 0.4);
        for s in [-0.7, 0.0, 0.4] {
            let mut errs = Vec::new();
            for d in [1e-2, 5e-3] {
                let fd = (fiber.value(s + d) - fiber.value(s - d)) / (2.0 * d);
                errs.push((fd - fiber.pohozaev(s)).abs());
            }
            let order = (errs[0] / errs[1]).log2();
            assert!(order > 1.9, "order {order}");
        }
    }

    #[test]
    fn root_with_mu_zero_is_closed_form() {
        let params = params3();
        let (t, v) = (2.0, 0.9);
        let fiber = Fiber::from_integrals(&params, t, v, 0.0);
        let ex = params.exponents();
        let exact = (t / (ex.eta_p * v)).ln() / (params.nonlocal_rate() - 2.0);
        assert_relative_eq!(fiber.root(0.5).unwrap(), exact, max_relative = 1e-12);
    }

    #[test]
    fn root_at_manifold_point_is_zero() {
        let params = params3();
        let ex = params.exponents();
        // choose kinetic so that P = 0 exactly
        let (v, w) = (0.8, 0.3);
        let t = ex.eta_p * v + params.mu * ex.gamma_q * w;
        let fiber = Fiber::from_integrals(&params, t, v, w);
        assert!(fiber.root(0.5).unwrap().abs() < 1e-12);
    }

    #[test]
    fn critical_local_exponent_without_root_is_rejected() {
        // q = q* and μγW ≥ T: g_u < 0 everywhere
        let params = ProblemParams::new(1, 0.5, 4.0, 6.0, 1.0, 1.0).unwrap();
        let ex = params.exponents();
        let fiber = Fiber::from_integrals(&params, 1.0, 0.5, 1.2 / ex.gamma_q);
        assert!(matches!(fiber.root(0.5), Err(CoreError::FiberProjection(_))));
    }

    proptest! {
        #[test]
        fn breakdown_is_recomputable(t in 0.0f64..10.0, v in 0.0f64..10.0, w in 0.0f64..10.0, m in 0.1f64..5.0) {
            let params = params3();
            let ex = params.exponents();
            let b = EnergyBreakdown::from_integrals(&params, t, v, w, m);
            prop_assert_eq!(b.energy, 0.5 * t - v / (2.0 * params.p) - params.mu * w / params.q);
            prop_assert_eq!(b.pohozaev, t - ex.eta_p * v - params.mu * ex.gamma_q * w);
        }

        #[test]
        fn energy_on_manifold_matches(v in 0.01f64..10.0, w in 0.01f64..10.0) {
            let params = params3();
            let ex = params.exponents();
            let t = ex.eta_p * v + params.mu * ex.gamma_q * w;
            let b = EnergyBreakdown::from_integrals(&params, t, v, w, 1.0);
            prop_assert!((b.energy - b.energy_on_manifold(&params)).abs() <= 1e-12 * (1.0 + t));
            // λa² = (η_p - 1)V + μ(γ_q - 1)W < 0 on 𝒫
            let lambda = b.multiplier(&params).unwrap();
            prop_assert!((lambda - ((ex.eta_p - 1.0) * v + params.mu * (ex.gamma_q - 1.0) * w)).abs() <= 1e-12 * (1.0 + t));
            prop_assert!(lambda < 0.0);
        }

        #[test]
        fn fiber_root_is_strict_positive_max(t in 0.1f64..10.0, v in 0.01f64..10.0, w in 0.0f64..10.0) {
            let params = params3();
            let fiber = Fiber::from_integrals(&params, t, v, w);
            let s = fiber.root(0.5).unwrap();
            prop_assert!(fiber.pohozaev(s).abs() <= 1e-11 * fiber.kinetic_at(s));
            let top = fiber.value(s);
            prop_assert!(top > 0.0);
            prop_assert!(top >= fiber.value(s + 0.1) && top >= fiber.value(s - 0.1));
            // sign contract: P(u) ≤ 0 ⟺ s_u ≤ 0
            prop_assert_eq!(fiber.pohozaev(0.0) <= 0.0, s <= 0.0);
            prop_assert!(fiber.value(5.0) < fiber.value(0.0));
        }

        #[test]
        fn energy_decreases_in_mu(mu1 in 0.1f64..2.0, dmu in 0.01f64..1.0) {
            let g = Grid::new(1, 8.0, 64).unwrap();
            let u = Field::gaussian(g, 1.0, 1.0);
            let base = params1().with_mu(mu1).unwrap();
            let e1 = Model::new(base, g).unwrap().energy(&u).unwrap().energy;
            let e2 = Model::new(base.with_mu(mu1 + dmu).unwrap(), g).unwrap().energy(&u).unwrap().energy;
            prop_assert!(e2 < e1);
        }
    }
}
