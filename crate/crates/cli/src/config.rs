//! Run configuration: one flat JSON file per run, sections mirroring the core types.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use choquard_core::params::ProblemParams;
use choquard_core::solver::{Initializer, SolverConfig};
use choquard_core::spectral::Grid;
use choquard_core::sweep::SweepOptions;
use choquard_core::verify::VerifyOptions;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: Option<ProblemParams>,
    #[serde(default)]
    pub grid: Option<Grid>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub initializer: Initializer,
    #[serde(default)]
    pub constants: ConstantsSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub gapcheck: Option<GapSection>,
    #[serde(default)]
    pub verify: VerifyOptions,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: None,
            grid: None,
            solver: SolverConfig::default(),
            initializer: Initializer::default(),
            constants: ConstantsSection::default(),
            sweep: None,
            gapcheck: None,
            verify: VerifyOptions::default(),
            output_dir: default_output_dir(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsSection {
    /// Also solve for `W_p` and report `C_{α,p}` (grid solve).
    pub choquard: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// `μ` values as multiples of the threshold `(a*_N/a)^{4/N}`.
    #[serde(default)]
    pub mu_factors: Vec<f64>,
    /// Absolute `μ` values, appended after the factors.
    #[serde(default)]
    pub mu_values: Vec<f64>,
    #[serde(default)]
    pub options: SweepOptions,
    /// Repeat minimized rows on `2M` points per axis and report the relative change.
    #[serde(default)]
    pub resolution_check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapSection {
    pub eps: Vec<f64>,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Applies overrides, propagates the seed and checks nested invariants.
    pub fn resolve(mut self, overrides: &Overrides) -> Result<Self> {
        if let Some(out) = &overrides.out {
            self.output_dir = out.clone();
        }
        if let Some(seed) = overrides.seed {
            self.seed = seed;
        }
        self.solver.seed = self.seed;
        self.verify.seed = self.seed;
        if let Some(s) = &mut self.sweep {
            s.options.solver.seed = self.seed;
        }
        if let Some(p) = &self.params {
            p.check()?;
        }
        if let Some(g) = &self.grid {
            g.check()?;
            if let Some(p) = &self.params {
                if p.dim != g.dim {
                    bail!("grid dimension {} differs from params.dim {}", g.dim, p.dim);
                }
            }
        }
        self.solver.check()?;
        Ok(self)
    }

    pub fn params(&self) -> Result<ProblemParams> {
        self.params.context("config has no `params` section")
    }

    pub fn grid(&self) -> Result<Grid> {
        self.grid.context("config has no `grid` section")
    }
}
