//! Subcommand implementations. Each writes its files and returns an exit status.

use anyhow::{bail, Context, Result};
use choquard_core::bubble::{critical_gap_check, GapReport};
use choquard_core::constants::{
    critical_level, gn_constant, sobolev_constants, ChoquardGnOptions, ConstantsRequest, SharpConstants,
};
use choquard_core::functionals::Model;
use choquard_core::params::{nearly_equal, validate_regime, ProblemParams, Regime, RegimeReport};
use choquard_core::solver::{minimize_on_pohozaev, SolveReport};
use choquard_core::spectral::{write_field_dump, write_radial_csv, Grid};
use choquard_core::sweep::{sweep_threshold, SweepMethod, ThresholdRow};
use choquard_core::verify::{run_verify, symmetry_checks, Check};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{Cell, RunDir};
use crate::Status;

fn q_star(dim: usize) -> f64 {
    2.0 + 4.0 / dim as f64
}

/// `a*_N` when `q = q*`.
fn a_star_for(params: &ProblemParams) -> Result<Option<f64>> {
    if nearly_equal(params.q, q_star(params.dim)) {
        Ok(Some(gn_constant(params.dim, q_star(params.dim))?.q_norm))
    } else {
        Ok(None)
    }
}

#[derive(Debug, Serialize)]
pub struct ConstantsResult {
    pub constants: SharpConstants,
    /// Relative defect in `S_α (A_α C_α)^{1/p̄} = S` (N = 3 only).
    pub s_alpha_identity_defect: Option<f64>,
    pub s_alpha_identity_pass: Option<bool>,
    pub critical_level: Option<f64>,
}

pub fn constants(config: &RunConfig) -> Result<Status> {
    let params = config.params()?;
    let request = ConstantsRequest {
        gagliardo_nirenberg: true,
        choquard: config.constants.choquard.then(|| ChoquardGnOptions::for_dim(params.dim)),
    };
    let constants = SharpConstants::compute(&params, &request).context("computing sharp constants")?;
    let defect = constants.s_alpha_identity_defect();
    let level = constants.s_alpha.map(|s| critical_level(params.dim, params.alpha, s.value));
    let result = ConstantsResult {
        s_alpha_identity_pass: defect.map(|d| d < 1e-10),
        s_alpha_identity_defect: defect,
        critical_level: level,
        constants,
    };
    let dir = RunDir::create(config)?;
    dir.write_report("constants.json", "constants", config, &result)?;
    Ok(Status::Success)
}

#[derive(Debug, Serialize)]
pub struct SolveResult {
    pub regime: RegimeReport,
    pub report: Option<SolveReport>,
    /// `c_po` minus the critical level, when `p = p̄`.
    pub critical_margin: Option<CriticalMargin>,
}

#[derive(Debug, Serialize)]
pub struct CriticalMargin {
    pub level: f64,
    pub margin: f64,
}

pub fn solve(config: &RunConfig) -> Result<Status> {
    let params = config.params()?;
    let grid = config.grid()?;
    let regime = validate_regime(&params, a_star_for(&params)?)?;
    let dir = RunDir::create(config)?;
    if regime.regime != Regime::Existence {
        let result = SolveResult {
            regime,
            report: None,
            critical_margin: None,
        };
        dir.write_report("report.json", "solve", config, &result)?;
        return Ok(Status::Regime);
    }
    let model = Model::new(params, grid)?;
    let report = minimize_on_pohozaev(&model, &config.initializer, &config.solver).context("minimizing on the Pohožaev manifold")?;
    let critical_margin = if regime.critical {
        let sc = sobolev_constants(params.dim, params.alpha)?;
        let level = critical_level(params.dim, params.alpha, sc.s_alpha);
        Some(CriticalMargin {
            level,
            margin: report.c_po - level,
        })
    } else {
        None
    };
    write_solution_files(&dir, &report)?;
    let converged = report.converged;
    let result = SolveResult {
        regime,
        report: Some(report),
        critical_margin,
    };
    dir.write_report("report.json", "solve", config, &result)?;
    Ok(if converged { Status::Success } else { Status::NotConverged })
}

fn write_solution_files(dir: &RunDir, report: &SolveReport) -> Result<()> {
    let u = report.field();
    dir.write_with("field.bin", |w| write_field_dump(u, w))?;
    dir.write_with("radial.csv", |w| write_radial_csv(u, w))?;
    dir.write_csv(
        "history.csv",
        &["iteration", "energy", "pohozaev", "grad_norm", "step"],
        report.history.iter().map(|h| {
            vec![
                Cell::U(h.iteration as u64),
                Cell::F(h.energy),
                Cell::F(h.pohozaev),
                Cell::F(h.grad_norm),
                Cell::F(h.step),
            ]
        }),
    )?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SweepResult {
    pub a_star: f64,
    pub mu_threshold: f64,
    pub rows: Vec<ThresholdRow>,
    /// `c_po` is non-increasing in `μ`.
    pub monotone_in_mu: bool,
    pub resolution: Vec<ResolutionRow>,
}

#[derive(Debug, Serialize)]
pub struct ResolutionRow {
    pub mu: f64,
    pub points_per_axis: usize,
    pub c_po: f64,
    pub c_po_refined: f64,
    pub relative_change: f64,
}

pub fn sweep(config: &RunConfig) -> Result<Status> {
    let params = config.params()?;
    let grid = config.grid()?;
    let section = config.sweep.as_ref().context("config has no `sweep` section")?;
    let a_star = gn_constant(params.dim, q_star(params.dim))?.q_norm;
    let e = 4.0 / params.dim as f64;
    let mu_threshold = (a_star / params.a).powf(e);
    let mut mus: Vec<f64> = section.mu_factors.iter().map(|f| f * mu_threshold).collect();
    mus.extend(&section.mu_values);
    if mus.is_empty() {
        bail!("sweep needs mu_factors or mu_values");
    }
    let report = sweep_threshold(&params, grid, &mus, Some(a_star), &section.options)?;
    let monotone_in_mu = report.monotone_in_mu();
    let mut resolution = Vec::new();
    if section.resolution_check {
        let fine = Grid::new(grid.dim, grid.half_length, 2 * grid.points_per_axis)?;
        let minimized: Vec<f64> = report.rows.iter().filter(|r| r.method == SweepMethod::Minimized).map(|r| r.mu).collect();
        if !minimized.is_empty() {
            let refined = sweep_threshold(&params, fine, &minimized, Some(a_star), &section.options)?;
            for r in &refined.rows {
                let coarse = report.rows.iter().find(|c| c.mu == r.mu).expect("row present");
                resolution.push(ResolutionRow {
                    mu: r.mu,
                    points_per_axis: fine.points_per_axis,
                    c_po: coarse.c_po_estimate,
                    c_po_refined: r.c_po_estimate,
                    relative_change: ((r.c_po_estimate - coarse.c_po_estimate) / r.c_po_estimate).abs(),
                });
            }
        }
    }
    let all_converged = report.rows.iter().all(|r| r.converged);
    let dir = RunDir::create(config)?;
    dir.write_csv(
        "threshold.csv",
        &["mu", "ratio", "c_po", "attained", "method", "converged", "theta_c", "pde_residual"],
        report.rows.iter().map(|r| {
            vec![
                Cell::F(r.mu),
                Cell::F(r.ratio),
                Cell::F(r.c_po_estimate),
                Cell::B(r.attained),
                Cell::S(match r.method {
                    SweepMethod::Minimized => "minimized".into(),
                    SweepMethod::Witness => "witness".into(),
                }),
                Cell::B(r.converged),
                r.theta_c.into(),
                r.pde_residual.into(),
            ]
        }),
    )?;
    let result = SweepResult {
        a_star,
        mu_threshold,
        rows: report.rows,
        monotone_in_mu,
        resolution,
    };
    dir.write_report("threshold.json", "sweep", config, &result)?;
    Ok(if !monotone_in_mu {
        Status::VerificationFailed
    } else if !all_converged {
        Status::NotConverged
    } else {
        Status::Success
    })
}

pub fn gapcheck(config: &RunConfig) -> Result<Status> {
    let params = config.params()?;
    let section = config.gapcheck.as_ref().context("config has no `gapcheck` section")?;
    let report: GapReport = critical_gap_check(&params, &section.eps)?;
    let dir = RunDir::create(config)?;
    dir.write_csv(
        "gapcheck.csv",
        &["epsilon", "max_psi", "level", "margin"],
        report
            .rows
            .iter()
            .map(|r| vec![Cell::F(r.epsilon), Cell::F(r.max_psi), Cell::F(r.level), Cell::F(r.margin)]),
    )?;
    dir.write_report("gapcheck.json", "gapcheck", config, &report)?;
    Ok(if report.passed { Status::Success } else { Status::VerificationFailed })
}

#[derive(Debug, Serialize)]
pub struct VerifyResult {
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn verify(config: &RunConfig) -> Result<Status> {
    let mut checks = run_verify(&config.verify).checks;
    if let (Some(params), Some(grid)) = (config.params, config.grid) {
        checks.extend(ground_state_checks(config, params, grid));
    }
    let passed = checks.iter().all(|c| c.passed);
    let dir = RunDir::create(config)?;
    dir.write_report("verify.json", "verify", config, &VerifyResult { checks, passed })?;
    Ok(if passed { Status::Success } else { Status::VerificationFailed })
}

/// Certificates and symmetry diagnostics of the ground state for the configured problem.
fn ground_state_checks(config: &RunConfig, params: ProblemParams, grid: Grid) -> Vec<Check> {
    const G: &str = "ground_state";
    let run = || -> Result<SolveReport> {
        let model = Model::new(params, grid)?;
        Ok(minimize_on_pohozaev(&model, &config.initializer, &config.solver)?)
    };
    let report = match run() {
        Ok(r) => r,
        Err(e) => {
            return vec![Check {
                name: "solve".into(),
                group: G.into(),
                measured: f64::NAN,
                tolerance: f64::NAN,
                passed: false,
                detail: format!("error: {e:#}"),
            }]
        }
    };
    let mut out = vec![
        Check::below(G, "converged", if report.converged { 0.0 } else { 1.0 }, 0.5, report.stop_reason.clone()),
        Check::below(G, "pohozaev_relative", report.residuals.pohozaev, 1e-6, ""),
        Check::below(G, "pde_residual", report.residuals.pde, 1e-4, ""),
        Check::below(G, "pohozaev_identity", report.residuals.pohozaev_identity, 1e-4, ""),
        Check::below(G, "lambda_negative", report.lambda, 0.0, format!("lambda = {:.16e}", report.lambda)),
    ];
    match &report.symmetry {
        Some(s) => out.extend(symmetry_checks(s)),
        None => out.push(Check::below("symmetry", "report", f64::NAN, 0.0, "symmetry report unavailable")),
    }
    out
}
