//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use mincurv::catenoid::CatenoidProfile;
use mincurv::end_model::EndData;
use mincurv::metric::{AlphaSpec, CurvatureBounds, WarpSpec};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub metric: Option<MetricSpec>,
    #[serde(default)]
    pub ends: Vec<EndData>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub solver: Option<SolverSpec>,
    #[serde(default, rename = "C_schedule")]
    pub c_schedule: Vec<f64>,
    #[serde(default = "default_lift_step")]
    pub lift_step: f64,
    #[serde(default)]
    pub catenoid: Option<CatenoidSpec>,
    #[serde(default)]
    pub compare: Option<CompareSpec>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub checks: Checks,
}

fn default_lift_step() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub alpha: AlphaSpec,
    pub bounds: CurvatureBounds,
    /// Number of random sample points in the disc of radius `r_max`.
    #[serde(default = "default_metric_samples")]
    pub samples: usize,
    #[serde(default = "default_metric_r_max")]
    pub r_max: f64,
    #[serde(default = "default_metric_h")]
    pub h: f64,
    #[serde(default)]
    pub tol: Option<f64>,
}

fn default_metric_samples() -> usize {
    200
}

fn default_metric_r_max() -> f64 {
    0.6
}

fn default_metric_h() -> f64 {
    1e-3
}

/// Annulus `R <= |z| <= r_out` for every end, `n_r x n_theta` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_r: usize,
    pub n_theta: usize,
    pub r_out: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolverSpec {
    /// `xi = 0`, the flat benchmark.
    Flat,
    SinhGordon {
        #[serde(default = "default_k_m")]
        k_m: f64,
        bc_inner: BoundarySpec,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_max_iter")]
        max_iter: usize,
    },
}

fn default_k_m() -> f64 {
    -1.0
}

fn default_tol() -> f64 {
    1e-9
}

fn default_max_iter() -> usize {
    100
}

/// Inner Dirichlet data: a constant or a CSV file `(theta, xi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundarySpec {
    Value(f64),
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatenoidSpec {
    #[serde(rename = "A")]
    pub a: f64,
    pub k: f64,
    pub s_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    #[serde(rename = "G")]
    pub g: WarpSpec,
    pub k1: f64,
    pub k2: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(default = "default_compare_s_max")]
    pub s_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    1000
}

fn default_compare_s_max() -> f64 {
    5.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checks {
    #[serde(default)]
    pub formula: Vec<FormulaCheck>,
    /// Bound on `|defect|` of every Gauss-Bonnet report; defaults to 2% of `2 pi`.
    #[serde(default)]
    pub defect_tol: Option<f64>,
    #[serde(default)]
    pub boundary_decay: Option<DecayCheck>,
}

/// Total curvature of a surface of genus `genus` with `n` ends of degrees `ms`,
/// expected to equal `expect * 2 pi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaCheck {
    pub genus: u32,
    pub n: usize,
    pub ms: Vec<u32>,
    pub expect: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayCheck {
    pub final_below: f64,
}

impl ExperimentConfig {
    /// Parses and validates a config. Relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::ConfigInvalid {
            message: e.to_string(),
            line: e.line(),
            column: e.column(),
        })?;
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn resolve(&mut self, base: &Path) {
        if self.output_dir.is_relative() {
            self.output_dir = base.join(&self.output_dir);
        }
        if let Some(SolverSpec::SinhGordon { bc_inner: BoundarySpec::File(p), .. }) = &mut self.solver {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.c_schedule.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(HarnessError::config("C schedule entries must be positive"));
        }
        if self.c_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HarnessError::config("C schedule must be strictly increasing"));
        }
        if !(self.lift_step > 0.0) {
            return Err(HarnessError::config("lift_step must be positive"));
        }
        for e in &self.ends {
            e.validate().map_err(|err| HarnessError::config(err.to_string()))?;
        }
        if self.solver.is_some() != self.grid.is_some() {
            return Err(HarnessError::config("grid and solver must be given together"));
        }
        if self.solver.is_some() && self.ends.is_empty() {
            return Err(HarnessError::config("solver given without ends"));
        }
        if self.checks.boundary_decay.is_some() && (self.solver.is_none() || self.c_schedule.len() < 2) {
            return Err(HarnessError::config("boundary_decay needs a solver and at least two values of C"));
        }
        if let Some(g) = &self.grid {
            for e in &self.ends {
                if !(g.r_out > e.r) {
                    return Err(HarnessError::config(format!("grid r_out {} must exceed R = {}", g.r_out, e.r)));
                }
            }
        }
        if let Some(SolverSpec::SinhGordon { bc_inner: BoundarySpec::File(p), .. }) = &self.solver {
            if !p.is_file() {
                return Err(HarnessError::config(format!("bc_inner file {} does not exist", p.display())));
            }
        }
        if let Some(m) = &self.metric {
            if !(m.r_max > 0.0 && m.r_max < 1.0 && m.h > 0.0) {
                return Err(HarnessError::config("metric needs 0 < r_max < 1 and h > 0"));
            }
        }
        if let Some(c) = &self.catenoid {
            let p = CatenoidProfile::new(c.a, c.k).map_err(|e| HarnessError::config(e.to_string()))?;
            if !(c.s_max > p.r_neck) || c.samples < 2 {
                return Err(HarnessError::config("catenoid needs s_max beyond the neck and >= 2 samples"));
            }
        }
        for f in &self.checks.formula {
            if f.n != f.ms.len() {
                return Err(HarnessError::config(format!(
                    "formula check lists {} degrees for n = {}",
                    f.ms.len(),
                    f.n
                )));
            }
        }
        Ok(())
    }

    /// Canonical JSON used for the manifest hash.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
