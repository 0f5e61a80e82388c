//! Sharp constants: Riesz normalization, HLS, Gagliardo–Nirenberg, Sobolev.

mod choquard;
mod shooting;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::params::ProblemParams;
use crate::special::{gamma, gauss_legendre, unit_sphere_area};

pub use choquard::{cgn_from_norm, choquard_gn_constant, ChoquardGn, ChoquardGnOptions};
pub use shooting::{
    gn_constant, gn_constant_with, gn_from_norm, shoot_ground_state, GnConstant,
    GroundStateProfile, RadialProfile, ShootingOptions,
};

/// `A_α(N) = Γ((N-α)/2) / (Γ(α/2) π^{N/2} 2^α)`.
pub fn riesz_constant(dim: usize, alpha: f64) -> Result<f64> {
    let n = dim as f64;
    if !(alpha > 0.0 && alpha < n) {
        return Err(CoreError::AlphaOutOfRange { alpha, dim });
    }
    Ok(gamma((n - alpha) / 2.0)
        / (gamma(alpha / 2.0) * std::f64::consts::PI.powf(n / 2.0) * 2f64.powf(alpha)))
}

/// Diagonal HLS constant
/// `C_β(N) = π^{(N-β)/2} Γ(β/2)/Γ((N+β)/2) · (Γ(N/2)/Γ(N))^{-β/N}`
/// for `∫∫ f(x)f(y)|x-y|^{β-N} ≤ C_β(N) ‖f‖²_{2N/(N+β)}`.
pub fn hls_constant(dim: usize, beta: f64) -> Result<f64> {
    let n = dim as f64;
    if !(beta > 0.0 && beta < n) {
        return Err(CoreError::AlphaOutOfRange { alpha: beta, dim });
    }
    Ok(std::f64::consts::PI.powf((n - beta) / 2.0) * gamma(beta / 2.0)
        / gamma((n + beta) / 2.0)
        * (gamma(n / 2.0) / gamma(n)).powf(-beta / n))
}

/// `U₁(ρ) = (N(N-2))^{(N-2)/4} (1+ρ²)^{-(N-2)/2}` and its derivative.
pub fn talenti(dim: usize, rho: f64) -> (f64, f64) {
    let n = dim as f64;
    let c = (n * (n - 2.0)).powf((n - 2.0) / 4.0);
    let base = 1.0 + rho * rho;
    (c * base.powf(-(n - 2.0) / 2.0), -c * (n - 2.0) * rho * base.powf(-n / 2.0))
}

/// Rayleigh quotient `∫|∇U₁|² / (∫U₁^{2*})^{2/2*}` on `panels` Gauss panels of the
/// compactified radius `t = ρ/(1+ρ)`.
fn sobolev_quotient(dim: usize, panels: usize) -> f64 {
    let n = dim as f64;
    let two_star = 2.0 * n / (n - 2.0);
    let (z, w) = gauss_legendre(16);
    let (mut kin, mut pow) = (0.0, 0.0);
    for k in 0..panels {
        let (a, b) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
        for (zi, wi) in z.iter().zip(&w) {
            let t = 0.5 * (a + b) + 0.5 * (b - a) * zi;
            let rho = t / (1.0 - t);
            let jac = 0.5 * (b - a) * wi / ((1.0 - t) * (1.0 - t)) * rho.powf(n - 1.0);
            let (u, du) = talenti(dim, rho);
            kin += jac * du * du;
            pow += jac * u.powf(two_star);
        }
    }
    let area = unit_sphere_area(dim);
    area * kin / (area * pow).powf(2.0 / two_star)
}

/// Sobolev constant `S` and its nonlocal counterpart `S_α = S/(A_α C_α)^{1/p̄}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevConstants {
    pub s: f64,
    pub s_alpha: f64,
    pub error_estimate: f64,
}

pub fn sobolev_constants(dim: usize, alpha: f64) -> Result<SobolevConstants> {
    if dim < 3 {
        return Err(CoreError::InvalidParameter(format!(
            "Sobolev constants need N >= 3 (got {dim})"
        )));
    }
    let coarse = sobolev_quotient(dim, 256);
    let fine = sobolev_quotient(dim, 512);
    let n = dim as f64;
    let p_bar = (n + alpha) / (n - 2.0);
    let ac = riesz_constant(dim, alpha)? * hls_constant(dim, alpha)?;
    Ok(SobolevConstants {
        s: fine,
        s_alpha: fine / ac.powf(1.0 / p_bar),
        error_estimate: ((fine - coarse) / fine).abs(),
    })
}

/// `(2+α)/(2(N+α)) · S_α^{(N+α)/(2+α)}`, the level bounding the critical ground-state energy.
pub fn critical_level(dim: usize, alpha: f64, s_alpha: f64) -> f64 {
    let n = dim as f64;
    (2.0 + alpha) / (2.0 * (n + alpha)) * s_alpha.powf((n + alpha) / (2.0 + alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Shooting,
    GridSolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantValue {
    pub value: f64,
    pub provenance: Provenance,
    pub error_estimate: f64,
}

impl ConstantValue {
    fn closed(value: f64) -> Self {
        Self {
            value,
            provenance: Provenance::ClosedForm,
            error_estimate: 0.0,
        }
    }
}

/// Every constant that applies to a parameter set. Entries that are undefined
/// for the dimension (e.g. `S` for `N < 3`) or not requested are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpConstants {
    pub dim: usize,
    pub alpha: f64,
    pub a_alpha: Option<ConstantValue>,
    pub c_hls: Option<ConstantValue>,
    /// `C_{N,q}` at the local exponent `q`.
    pub c_gn: Option<ConstantValue>,
    /// `a*_N = ‖Q_{q*}‖₂`.
    pub a_star: Option<ConstantValue>,
    /// `C_{α,p}` at the Choquard exponent `p`.
    pub c_cgn: Option<ConstantValue>,
    /// `R_p = ‖W_p‖₂`.
    pub w_norm: Option<ConstantValue>,
    pub s: Option<ConstantValue>,
    pub s_alpha: Option<ConstantValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRequest {
    pub gagliardo_nirenberg: bool,
    pub choquard: Option<ChoquardGnOptions>,
}

impl Default for ConstantsRequest {
    fn default() -> Self {
        Self {
            gagliardo_nirenberg: true,
            choquard: None,
        }
    }
}

impl SharpConstants {
    pub fn compute(params: &ProblemParams, request: &ConstantsRequest) -> Result<Self> {
        params.check()?;
        let dim = params.dim;
        let alpha = params.alpha;
        let mut out = Self {
            dim,
            alpha,
            a_alpha: Some(ConstantValue::closed(riesz_constant(dim, alpha)?)),
            c_hls: Some(ConstantValue::closed(hls_constant(dim, alpha)?)),
            c_gn: None,
            a_star: None,
            c_cgn: None,
            w_norm: None,
            s: None,
            s_alpha: None,
        };
        if request.gagliardo_nirenberg {
            let q_star = 2.0 + 4.0 / dim as f64;
            let critical = gn_constant(dim, q_star)?;
            out.a_star = Some(ConstantValue {
                value: critical.q_norm,
                provenance: Provenance::Shooting,
                error_estimate: critical.error_estimate,
            });
            let at_q = if crate::params::nearly_equal(params.q, q_star) {
                critical
            } else {
                gn_constant(dim, params.q)?
            };
            out.c_gn = Some(ConstantValue {
                value: at_q.c_gn,
                provenance: Provenance::Shooting,
                error_estimate: at_q.error_estimate,
            });
        }
        if let Some(opts) = &request.choquard {
            let w = choquard_gn_constant(dim, alpha, params.p, opts)?;
            out.c_cgn = Some(ConstantValue {
                value: w.c_cgn,
                provenance: Provenance::GridSolve,
                error_estimate: w.error_estimate,
            });
            out.w_norm = Some(ConstantValue {
                value: w.w_norm,
                provenance: Provenance::GridSolve,
                error_estimate: w.error_estimate,
            });
        }
        if dim >= 3 {
            let sc = sobolev_constants(dim, alpha)?;
            let quad = |value| ConstantValue {
                value,
                provenance: Provenance::ClosedForm,
                error_estimate: sc.error_estimate,
            };
            out.s = Some(quad(sc.s));
            out.s_alpha = Some(quad(sc.s_alpha));
        }
        Ok(out)
    }

    /// Relative defect in `S_α (A_α C_α)^{1/p̄} = S`, when all entries are present.
    pub fn s_alpha_identity_defect(&self) -> Option<f64> {
        let n = self.dim as f64;
        let p_bar = (n + self.alpha) / (n - 2.0);
        let (a, c, s, sa) = (self.a_alpha?, self.c_hls?, self.s?, self.s_alpha?);
        Some((sa.value * (a.value * c.value).powf(1.0 / p_bar) / s.value - 1.0).abs())
    }

    pub fn all_positive(&self) -> bool {
        [
            self.a_alpha,
            self.c_hls,
            self.c_gn,
            self.a_star,
            self.c_cgn,
            self.w_norm,
            self.s,
            self.s_alpha,
        ]
        .iter()
        .flatten()
        .all(|c| c.value > 0.0)
    }
}
