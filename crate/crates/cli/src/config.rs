use std::path::{Path, PathBuf};

use lyapsize::dynamics::{CatalogId, SystemSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Size,
    Hausdorff,
    LyapAsymptotic,
    LyapSingularity,
    LyapIsolated,
    LyapDiscrete,
    Expansive,
    CwExpansive,
    Audit,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Size => "size",
            Mode::Hausdorff => "hausdorff",
            Mode::LyapAsymptotic => "lyap-asymptotic",
            Mode::LyapSingularity => "lyap-singularity",
            Mode::LyapIsolated => "lyap-isolated",
            Mode::LyapDiscrete => "lyap-discrete",
            Mode::Expansive => "expansive",
            Mode::CwExpansive => "cw-expansive",
            Mode::Audit => "audit",
        }
    }

    pub fn is_lyap(self) -> bool {
        matches!(self, Mode::LyapAsymptotic | Mode::LyapSingularity | Mode::LyapIsolated | Mode::LyapDiscrete)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub id: CatalogId,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MuConfig {
    pub depth: usize,
}

impl Default for MuConfig {
    fn default() -> Self {
        MuConfig { depth: 64 }
    }
}

/// `p` defaults to the system's rest point; `rho` is searched when absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeighborhoodConfig {
    #[serde(default)]
    pub p: Option<Vec<f64>>,
    pub r: f64,
    #[serde(default)]
    pub rho: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrateConfig {
    pub h: f64,
    #[serde(alias = "T_max")]
    pub t_max: f64,
    pub eps_stop: f64,
}

impl Default for IntegrateConfig {
    fn default() -> Self {
        IntegrateConfig { h: 0.01, t_max: 20.0, eps_stop: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditConfig {
    /// `None` uses `1e-9 + 2 * tail_bound`.
    pub tol: Option<f64>,
    pub horizon: f64,
    pub floor: f64,
    pub grid: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig { tol: None, horizon: 1000.0, floor: 1e-4, grid: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExpansiveConfig {
    pub delta: f64,
    pub horizon: u64,
    pub eps_chain: f64,
}

impl Default for ExpansiveConfig {
    fn default() -> Self {
        ExpansiveConfig { delta: 0.2, horizon: 64, eps_chain: 1e-3 }
    }
}

/// Explicit start points, or `count` random ones drawn from the seed. For pairs and
/// chains, random offsets have length in `[offset_min, offset_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub starts: Vec<Vec<f64>>,
    pub count: usize,
    pub offset_min: f64,
    pub offset_max: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { starts: Vec::new(), count: 0, offset_min: 1e-3, offset_max: 1e-2 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IoConfig {
    /// Point-set, sample or series CSV files, relative to the config file.
    pub inputs: Vec<PathBuf>,
    /// Mesh of each input point set; missing entries are 0.
    pub mesh: Vec<f64>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub system: Option<SystemConfig>,
    #[serde(default)]
    pub mu: MuConfig,
    #[serde(default)]
    pub neighborhood: Option<NeighborhoodConfig>,
    #[serde(default)]
    pub integrate: IntegrateConfig,
    #[serde(default)]
    pub audit: AuditConfig,
    #[serde(default)]
    pub expansive: ExpansiveConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub io: IoConfig,
}

fn missing(key: &str, mode: Mode) -> CliError {
    CliError::Config(format!("`{key}` is required for mode {}", mode.name()))
}

fn positive(key: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("`{key}` must be a positive number, got {v}")))
    }
}

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        RunConfig {
            mode,
            system: None,
            mu: MuConfig::default(),
            neighborhood: None,
            integrate: IntegrateConfig::default(),
            audit: AuditConfig::default(),
            expansive: ExpansiveConfig::default(),
            sampling: SamplingConfig::default(),
            seed: 0,
            io: IoConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Read a config; relative input paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in &mut cfg.io.inputs {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(out) = &mut cfg.io.out_dir {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(cfg)
    }

    /// Checks that the fields the mode needs are present and positive.
    pub fn validate(&self) -> Result<(), CliError> {
        let mode = self.mode;
        if self.mu.depth == 0 {
            return Err(CliError::Config("`mu.depth` must be at least 1".into()));
        }
        positive("integrate.h", self.integrate.h)?;
        positive("integrate.T_max", self.integrate.t_max)?;
        positive("integrate.eps_stop", self.integrate.eps_stop)?;
        positive("audit.horizon", self.audit.horizon)?;
        positive("audit.floor", self.audit.floor)?;
        positive("audit.grid", self.audit.grid)?;
        if let Some(tol) = self.audit.tol {
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(CliError::Config(format!("`audit.tol` must be nonnegative, got {tol}")));
            }
        }
        positive("expansive.delta", self.expansive.delta)?;
        positive("expansive.eps_chain", self.expansive.eps_chain)?;
        if self.expansive.horizon == 0 {
            return Err(CliError::Config("`expansive.horizon` must be at least 1".into()));
        }
        positive("sampling.offset_min", self.sampling.offset_min)?;
        positive("sampling.offset_max", self.sampling.offset_max)?;
        if self.sampling.offset_max < self.sampling.offset_min {
            return Err(CliError::Config("`sampling.offset_max` is below `sampling.offset_min`".into()));
        }
        if let Some(m) = self.io.mesh.iter().find(|m| !(**m >= 0.0)) {
            return Err(CliError::Config(format!("`io.mesh` entries must be nonnegative, got {m}")));
        }
        if let Some(nb) = &self.neighborhood {
            positive("neighborhood.r", nb.r)?;
            if let Some(rho) = nb.rho {
                positive("neighborhood.rho", rho)?;
            }
        }

        let inputs = |n: usize| {
            if self.io.inputs.len() < n {
                Err(CliError::Config(format!("mode {} needs {n} file(s) in `io.inputs`", mode.name())))
            } else {
                Ok(())
            }
        };
        match mode {
            Mode::Size | Mode::Audit => inputs(1)?,
            Mode::Hausdorff => inputs(2)?,
            _ => {}
        }
        if mode.is_lyap() || matches!(mode, Mode::Expansive | Mode::CwExpansive) {
            if self.system.is_none() {
                return Err(missing("system", mode));
            }
            if self.sampling.starts.is_empty() && self.sampling.count == 0 && !matches!(mode, Mode::Expansive | Mode::CwExpansive) {
                return Err(missing("sampling.starts` or `sampling.count", mode));
            }
        }
        if mode.is_lyap() && self.neighborhood.is_none() {
            return Err(missing("neighborhood", mode));
        }
        match mode {
            Mode::LyapIsolated => {
                inputs(1)?;
                if self.neighborhood.as_ref().and_then(|n| n.rho).is_none() {
                    return Err(missing("neighborhood.rho", mode));
                }
            }
            Mode::LyapDiscrete if self.neighborhood.as_ref().and_then(|n| n.rho).is_none() => {
                return Err(missing("neighborhood.rho", mode));
            }
            Mode::Expansive | Mode::CwExpansive if self.io.inputs.is_empty() && self.sampling.count == 0 => {
                return Err(missing("io.inputs` or `sampling.count", mode));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn build_system(&self) -> Result<SystemSpec<f64>, CliError> {
        let sc = self.system.as_ref().ok_or_else(|| missing("system", self.mode))?;
        Ok(SystemSpec::from_catalog(sc.id, &sc.params, self.integrate.h)?)
    }

    pub fn mesh(&self, i: usize) -> f64 {
        self.io.mesh.get(i).copied().unwrap_or(0.0)
    }
}
