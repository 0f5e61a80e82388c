//! Problem parameters, critical exponents and regime classification.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Relative tolerance used when deciding whether an exponent sits exactly on a
/// critical value (e.g. `q == q*`).
pub const EXPONENT_TOL: f64 = 1e-12;

/// Parameters of `-Δu = λu + κ(I_α * |u|^p)|u|^{p-2}u + μ|u|^{q-2}u`, `‖u‖₂² = a²`.
///
/// `kappa = 1` is the equation proper; `kappa = 0` drops the nonlocal term and is
/// used to test against closed-form NLS solitons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub dim: usize,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub mu: f64,
    pub a: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

fn default_kappa() -> f64 {
    1.0
}

impl ProblemParams {
    pub fn new(dim: usize, alpha: f64, p: f64, q: f64, mu: f64, a: f64) -> Result<Self> {
        let params = Self {
            dim,
            alpha,
            p,
            q,
            mu,
            a,
            kappa: 1.0,
        };
        params.check()?;
        Ok(params)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        self.kappa = kappa;
        self.check()?;
        Ok(self)
    }

    pub fn with_mu(mut self, mu: f64) -> Result<Self> {
        self.mu = mu;
        self.check()?;
        Ok(self)
    }

    /// Checks the type invariants (not the existence hypotheses).
    pub fn check(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(CoreError::InvalidParameter(format!(
                "dimension {} not in 1..=3",
                self.dim
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < self.dim as f64) {
            return Err(CoreError::AlphaOutOfRange {
                alpha: self.alpha,
                dim: self.dim,
            });
        }
        let positive = [("mu", self.mu), ("a", self.a)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CoreError::InvalidParameter(format!("{name} = {v} must be > 0")));
            }
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(CoreError::InvalidParameter(format!(
                "kappa = {} must be >= 0",
                self.kappa
            )));
        }
        if !(self.p > 1.0 && self.q > 2.0) || !self.p.is_finite() || !self.q.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "need p > 1 and q > 2 (got p = {}, q = {})",
                self.p, self.q
            )));
        }
        Ok(())
    }

    pub fn exponents(&self) -> CriticalExponents {
        derive_exponents(self)
    }

    /// Fiber growth rate of the nonlocal term, `Np - N - α`.
    pub fn nonlocal_rate(&self) -> f64 {
        let n = self.dim as f64;
        n * self.p - n - self.alpha
    }

    /// Fiber growth rate of the local term, `Nq/2 - N`.
    pub fn local_rate(&self) -> f64 {
        let n = self.dim as f64;
        0.5 * n * self.q - n
    }
}

/// An exponent that is infinite in low dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exponent {
    Finite(f64),
    Unbounded,
}

impl Exponent {
    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(v),
            Exponent::Unbounded => None,
        }
    }

    /// `x < self`
    pub fn exceeds(self, x: f64) -> bool {
        match self {
            Exponent::Finite(v) => x < v,
            Exponent::Unbounded => x.is_finite(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponents {
    /// HLS upper critical exponent `(N+α)/(N-2)`.
    pub p_bar: Exponent,
    /// HLS lower critical exponent `(N+α)/N`.
    pub p_lower: f64,
    /// L²-critical Choquard exponent `1 + (2+α)/N`.
    pub p_star: f64,
    /// L²-critical local exponent `2 + 4/N`.
    pub q_star: f64,
    /// Sobolev exponent `2N/(N-2)`.
    pub two_star: Exponent,
    pub eta_p: f64,
    pub gamma_q: f64,
}

pub fn derive_exponents(params: &ProblemParams) -> CriticalExponents {
    let n = params.dim as f64;
    let alpha = params.alpha;
    let (p_bar, two_star) = if params.dim >= 3 {
        (
            Exponent::Finite((n + alpha) / (n - 2.0)),
            Exponent::Finite(2.0 * n / (n - 2.0)),
        )
    } else {
        (Exponent::Unbounded, Exponent::Unbounded)
    };
    CriticalExponents {
        p_bar,
        p_lower: (n + alpha) / n,
        p_star: 1.0 + (2.0 + alpha) / n,
        q_star: 2.0 + 4.0 / n,
        two_star,
        eta_p: eta(params.dim, alpha, params.p),
        gamma_q: gamma_weight(params.dim, params.q),
    }
}

/// `η_p = N/2 - (N+α)/(2p)`
pub fn eta(dim: usize, alpha: f64, p: f64) -> f64 {
    let n = dim as f64;
    0.5 * n - (n + alpha) / (2.0 * p)
}

/// `γ_q = N/2 - N/q`
pub fn gamma_weight(dim: usize, q: f64) -> f64 {
    let n = dim as f64;
    0.5 * n - n / q
}

pub fn nearly_equal(x: f64, y: f64) -> bool {
    (x - y).abs() <= EXPONENT_TOL * x.abs().max(y.abs()).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Existence hypotheses hold.
    Existence,
    /// `q = q*` with `μ a^{4/N} >= (a*_N)^{4/N}`: the Pohožaev level is zero and not attained.
    Nonexistence,
    OutOfTheory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub satisfied: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub conditions: Vec<Condition>,
    /// `μ a^{4/N} / (a*_N)^{4/N}` when `q = q*`.
    pub threshold_ratio: Option<f64>,
    /// `p` equals the upper critical exponent.
    pub critical: bool,
}

impl RegimeReport {
    pub fn violated(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| !c.satisfied)
    }
}

/// `μ a^{4/N} / (a*_N)^{4/N}`
pub fn threshold_ratio(params: &ProblemParams, a_star: f64) -> f64 {
    let e = 4.0 / params.dim as f64;
    params.mu * params.a.powf(e) / a_star.powf(e)
}

/// Classifies `params` into existence, nonexistence or out-of-theory regimes.
/// `a_star` (critical GN mass) is required when `q = q*`.
pub fn validate_regime(params: &ProblemParams, a_star: Option<f64>) -> Result<RegimeReport> {
    params.check()?;
    let ex = params.exponents();
    let mut conditions = Vec::new();
    let mut push = |name: &str, satisfied: bool, detail: String| {
        conditions.push(Condition {
            name: name.to_string(),
            satisfied,
            detail,
        })
    };

    let p_above_star = params.p > ex.p_star && !nearly_equal(params.p, ex.p_star);
    push(
        "p* < p",
        p_above_star,
        format!("p* = {}, p = {}", ex.p_star, params.p),
    );
    let critical = matches!(ex.p_bar, Exponent::Finite(pb) if nearly_equal(params.p, pb));
    let p_below_bar = match ex.p_bar {
        Exponent::Finite(pb) => params.p < pb || critical,
        Exponent::Unbounded => true,
    };
    push(
        "p <= p_bar (N >= 3) or p < infinity",
        p_below_bar,
        format!("p_bar = {:?}, p = {}", ex.p_bar, params.p),
    );
    let q_is_star = nearly_equal(params.q, ex.q_star);
    let q_lower = params.q > ex.q_star || q_is_star;
    push("q* <= q", q_lower, format!("q* = {}, q = {}", ex.q_star, params.q));
    let q_upper = ex.two_star.exceeds(params.q);
    push(
        "q < 2*",
        q_upper,
        format!("2* = {:?}, q = {}", ex.two_star, params.q),
    );

    let mut ratio = None;
    if q_is_star {
        let a_star = a_star.ok_or(CoreError::ConstantRequired(
            "a_star (critical Gagliardo-Nirenberg mass) is needed when q = q*",
        ))?;
        let r = threshold_ratio(params, a_star);
        ratio = Some(r);
        push(
            "mu a^{4/N} < (a*)^{4/N}",
            r < 1.0,
            format!("ratio = {r}"),
        );
    }

    let base_ok = p_above_star && p_below_bar && q_lower && q_upper;
    let regime = match ratio {
        _ if !base_ok => Regime::OutOfTheory,
        Some(r) if r >= 1.0 => Regime::Nonexistence,
        _ => Regime::Existence,
    };
    Ok(RegimeReport {
        regime,
        conditions,
        threshold_ratio: ratio,
        critical,
    })
}
