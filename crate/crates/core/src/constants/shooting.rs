use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::special::unit_sphere_area;

/// Integration controls for the radial ODE `Q'' + (N-1)/ρ Q' - Q + |Q|^{r-2}Q = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    pub step: f64,
    pub radius: f64,
    pub max_bisections: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            step: 1e-3,
            radius: 30.0,
            max_bisections: 200,
        }
    }
}

/// Sampled radial profile with cubic Hermite interpolation and an exponential tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub dim: usize,
    pub step: f64,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl RadialProfile {
    pub fn end(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    pub fn eval(&self, rho: f64) -> f64 {
        let rho = rho.abs();
        let last = self.values.len() - 1;
        let end = self.end();
        if rho >= end {
            let decay = (-(rho - end)).exp();
            let geometric = if self.dim > 1 && end > 0.0 {
                (end / rho).powf(0.5 * (self.dim as f64 - 1.0))
            } else {
                1.0
            };
            return self.values[last] * decay * geometric;
        }
        let x = rho / self.step;
        let i = (x.floor() as usize).min(last - 1);
        let t = x - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1
    }
}

/// Radial ground state of `-ΔQ + Q = |Q|^{r-2}Q` with its integrals over `ℝ^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateProfile {
    pub dim: usize,
    pub r: f64,
    pub center_value: f64,
    /// `∫Q²`
    pub mass: f64,
    /// `∫|∇Q|²`
    pub kinetic: f64,
    /// `∫Q^r`
    pub power: f64,
    /// Relative mismatch in the virial ratio `kinetic/mass = N(r-2)/(2N-(N-2)r)`.
    pub error_estimate: f64,
    pub profile: RadialProfile,
}

#[derive(Clone, Copy)]
struct State {
    q: f64,
    dq: f64,
    mass: f64,
    kin: f64,
    pow: f64,
}

enum Outcome {
    /// Turned upward: center value too small.
    Under,
    /// Crossed zero: center value too large.
    Over,
}

struct Trajectory {
    outcome: Outcome,
    states: Vec<State>,
}

fn rhs(dim: usize, r: f64, rho: f64, s: &State) -> State {
    let nl = s.q.abs().powf(r - 2.0) * s.q;
    let w = rho.powi(dim as i32 - 1);
    let ddq = if rho == 0.0 {
        (s.q - nl) / dim as f64
    } else {
        s.q - nl - (dim as f64 - 1.0) / rho * s.dq
    };
    State {
        q: s.dq,
        dq: ddq,
        mass: w * s.q * s.q,
        kin: w * s.dq * s.dq,
        pow: w * s.q.abs().powf(r),
    }
}

fn axpy(s: &State, k: &State, h: f64) -> State {
    State {
        q: s.q + h * k.q,
        dq: s.dq + h * k.dq,
        mass: s.mass + h * k.mass,
        kin: s.kin + h * k.kin,
        pow: s.pow + h * k.pow,
    }
}

fn integrate(dim: usize, r: f64, q0: f64, opts: &ShootingOptions, keep: bool) -> Trajectory {
    let h = opts.step;
    let steps = (opts.radius / h).round() as usize;
    let mut s = State {
        q: q0,
        dq: 0.0,
        mass: 0.0,
        kin: 0.0,
        pow: 0.0,
    };
    let mut states = Vec::with_capacity(if keep { steps + 1 } else { 0 });
    if keep {
        states.push(s);
    }
    for i in 0..steps {
        let rho = i as f64 * h;
        let k1 = rhs(dim, r, rho, &s);
        let k2 = rhs(dim, r, rho + 0.5 * h, &axpy(&s, &k1, 0.5 * h));
        let k3 = rhs(dim, r, rho + 0.5 * h, &axpy(&s, &k2, 0.5 * h));
        let k4 = rhs(dim, r, rho + h, &axpy(&s, &k3, h));
        let next = State {
            q: s.q + h / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
            dq: s.dq + h / 6.0 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq),
            mass: s.mass + h / 6.0 * (k1.mass + 2.0 * k2.mass + 2.0 * k3.mass + k4.mass),
            kin: s.kin + h / 6.0 * (k1.kin + 2.0 * k2.kin + 2.0 * k3.kin + k4.kin),
            pow: s.pow + h / 6.0 * (k1.pow + 2.0 * k2.pow + 2.0 * k3.pow + k4.pow),
        };
        if next.q < 0.0 {
            return Trajectory {
                outcome: Outcome::Over,
                states,
            };
        }
        if next.dq > 0.0 && i > 0 {
            return Trajectory {
                outcome: Outcome::Under,
                states,
            };
        }
        s = next;
        if keep {
            states.push(s);
        }
    }
    let outcome = if s.q + s.dq > 0.0 {
        Outcome::Under
    } else {
        Outcome::Over
    };
    Trajectory { outcome, states }
}

/// Shooting on `Q(0)` for the positive radial ground state.
pub fn shoot_ground_state(dim: usize, r: f64, opts: &ShootingOptions) -> Result<GroundStateProfile> {
    if dim == 0 {
        return Err(CoreError::InvalidParameter("dimension must be positive".into()));
    }
    let n = dim as f64;
    let upper_ok = dim <= 2 || r < 2.0 * n / (n - 2.0);
    if !(r > 2.0 && upper_ok) {
        return Err(CoreError::InvalidParameter(format!(
            "exponent r = {r} outside (2, 2*) for N = {dim}"
        )));
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    while matches!(integrate(dim, r, hi, opts, false).outcome, Outcome::Under) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e8 {
            return Err(CoreError::Shooting(format!(
                "no overshooting center value below {hi:e} (N = {dim}, r = {r})"
            )));
        }
    }
    let mut iters = 0;
    while hi - lo > 4.0 * f64::EPSILON * hi {
        iters += 1;
        if iters > opts.max_bisections {
            return Err(CoreError::Shooting(format!(
                "bisection did not settle within {} steps",
                opts.max_bisections
            )));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match integrate(dim, r, mid, opts, false).outcome {
            Outcome::Under => lo = mid,
            Outcome::Over => hi = mid,
        }
    }
    let traj = integrate(dim, r, lo, opts, true);
    let last = *traj
        .states
        .last()
        .ok_or_else(|| CoreError::Shooting("empty trajectory".into()))?;
    // ℝ^1 integrals run over both half-lines.
    let area = if dim == 1 { 2.0 } else { unit_sphere_area(dim) };
    let mass = area * last.mass;
    let kinetic = area * last.kin;
    let power = area * last.pow;
    let virial = n * (r - 2.0) / (2.0 * n - (n - 2.0) * r);
    let error_estimate = (kinetic / mass / virial - 1.0).abs();
    let profile = RadialProfile {
        dim,
        step: opts.step,
        values: traj.states.iter().map(|s| s.q).collect(),
        slopes: traj.states.iter().map(|s| s.dq).collect(),
    };
    Ok(GroundStateProfile {
        dim,
        r,
        center_value: lo,
        mass,
        kinetic,
        power,
        error_estimate,
        profile,
    })
}

/// `C_{N,r}` together with `‖Q_r‖₂` and the underlying profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnConstant {
    pub c_gn: f64,
    pub q_norm: f64,
    pub error_estimate: f64,
    pub ground_state: GroundStateProfile,
}

/// `C^r = 2r/(2N+(2-N)r) · ((2N+(2-N)r)/(N(r-2)))^{N(r-2)/4} / ‖Q‖₂^{r-2}`.
pub fn gn_from_norm(dim: usize, r: f64, q_norm: f64) -> f64 {
    let n = dim as f64;
    let b = 2.0 * n + (2.0 - n) * r;
    let c_pow = 2.0 * r / b * (b / (n * (r - 2.0))).powf(n * (r - 2.0) / 4.0) / q_norm.powf(r - 2.0);
    c_pow.powf(1.0 / r)
}

pub fn gn_constant(dim: usize, r: f64) -> Result<GnConstant> {
    gn_constant_with(dim, r, &ShootingOptions::default())
}

pub fn gn_constant_with(dim: usize, r: f64, opts: &ShootingOptions) -> Result<GnConstant> {
    let gs = shoot_ground_state(dim, r, opts)?;
    let q_norm = gs.mass.sqrt();
    Ok(GnConstant {
        c_gn: gn_from_norm(dim, r, q_norm),
        q_norm,
        error_estimate: gs.error_estimate,
        ground_state: gs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn one_dim_quintic_soliton() {
        let gs = shoot_ground_state(1, 6.0, &ShootingOptions::default()).unwrap();
        assert_relative_eq!(gs.center_value, 3f64.powf(0.25), max_relative = 1e-10);
        assert_relative_eq!(gs.mass, 3f64.sqrt() * PI / 2.0, max_relative = 1e-9);
        assert_relative_eq!(gs.kinetic, 3f64.sqrt() * PI / 4.0, max_relative = 1e-9);
        assert_relative_eq!(gs.power, 3.0 * 3f64.sqrt() * PI / 4.0, max_relative = 1e-9);
        for x in [0.0f64, 0.37, 1.2, 4.0, 9.5] {
            let exact = 3f64.powf(0.25) / (2.0 * x).cosh().sqrt();
            assert!((gs.profile.eval(x) - exact).abs() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn one_dim_cubic_soliton() {
        // Q = √2 sech x, ‖Q‖² = 4
        let gs = shoot_ground_state(1, 4.0, &ShootingOptions::default()).unwrap();
        assert_relative_eq!(gs.center_value, 2f64.sqrt(), max_relative = 1e-10);
        assert_relative_eq!(gs.mass, 4.0, max_relative = 1e-9);
    }

    #[test]
    fn critical_identity() {
        for dim in 1..=3 {
            let q_star = 2.0 + 4.0 / dim as f64;
            let gn = gn_constant(dim, q_star).unwrap();
            let lhs = gn.c_gn.powf(q_star);
            let rhs = q_star / (2.0 * gn.q_norm.powf(4.0 / dim as f64));
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            assert!(gn.error_estimate < 1e-8, "dim {dim}: {}", gn.error_estimate);
        }
    }

    #[test]
    fn three_dim_virial_holds() {
        let gs = shoot_ground_state(3, 4.0, &ShootingOptions::default()).unwrap();
        // Nehari: kinetic + mass = power
        assert_relative_eq!(gs.kinetic + gs.mass, gs.power, max_relative = 1e-8);
        assert!(gs.error_estimate < 1e-8);
    }

    #[test]
    fn rejects_supercritical() {
        assert!(shoot_ground_state(3, 6.0, &ShootingOptions::default()).is_err());
        assert!(shoot_ground_state(2, 2.0, &ShootingOptions::default()).is_err());
    }
}
