//! Run configuration: a TOML file with one table per concern. Every field
//! has a default, and command-line flags are applied on top.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cksvar::{Dgp, FilterKind, ModelKind, ShockSize};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub model: ModelConfig,
    pub bootstrap: BootstrapConfig,
    pub irf: IrfConfig,
    pub idset: IdsetConfig,
    pub mc: McSettings,
    pub simulate: SimulateConfig,
    /// Output directory.
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// `400 ln(x_t / x_{t-1})`: annualized quarterly growth rate in percent.
    AnnualizedLogDiff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub path: Option<PathBuf>,
    /// Defaults to the first column of the file.
    pub date_column: Option<String>,
    /// Series to use; empty selects every non-date column.
    pub columns: Vec<String>,
    /// The series subject to the lower bound.
    pub constrained: Option<String>,
    pub bound: f64,
    /// Observations within this distance of the bound are treated as binding.
    pub bind_tol: f64,
    pub transforms: BTreeMap<String, Transform>,
    /// Average monthly rows into quarters before any transform.
    pub quarterly_average: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub lags: usize,
    pub kinds: Vec<ModelKind>,
    pub filter: FilterKind,
    pub particles: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    /// 0 disables the bootstrap; otherwise at least 99.
    pub replications: usize,
    /// Coverage of IRF bands.
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IrfConfig {
    pub horizon: usize,
    pub shock: ShockSize,
    pub draws: usize,
    /// 1-based impact period; defaults to the period after the sample.
    pub period: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdsetConfig {
    pub xi_grid: usize,
    pub sign_restrict: bool,
    /// Also compute the IRF of every member of the set.
    pub irf: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSettings {
    #[serde(with = "dgp_number")]
    pub dgp: Dgp,
    pub n_rep: usize,
    pub t_len: usize,
    pub burn_in: usize,
    /// Restricted models tested against CKSVAR; empty skips the LR experiment.
    pub tests: Vec<ModelKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// Built-in design; ignored when `params` is set.
    #[serde(with = "dgp_number")]
    pub dgp: Dgp,
    /// JSON file with structural parameters.
    pub params: Option<PathBuf>,
    pub t_len: usize,
    pub burn_in: usize,
    /// First quarter of the exported sample, e.g. `1960q1`; integer
    /// period labels when unset.
    pub start: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: DataConfig::default(),
            model: ModelConfig::default(),
            bootstrap: BootstrapConfig::default(),
            irf: IrfConfig::default(),
            idset: IdsetConfig::default(),
            mc: McSettings::default(),
            simulate: SimulateConfig::default(),
            out: PathBuf::from("out"),
        }
    }
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            path: None,
            date_column: None,
            columns: Vec::new(),
            constrained: None,
            bound: 0.0,
            bind_tol: 0.0,
            transforms: BTreeMap::new(),
            quarterly_average: false,
        }
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            lags: 1,
            kinds: vec![ModelKind::Cksvar],
            filter: FilterKind::Sis,
            particles: 1000,
            seed: 0,
        }
    }
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replications: 0,
            coverage: 0.9,
        }
    }
}

impl Default for IrfConfig {
    fn default() -> Self {
        Self {
            horizon: cksvar::irf::DEFAULT_HORIZON,
            shock: ShockSize::OneSd,
            draws: cksvar::irf::DEFAULT_DRAWS,
            period: None,
        }
    }
}

impl Default for IdsetConfig {
    fn default() -> Self {
        Self {
            xi_grid: cksvar::identify::DEFAULT_GRID,
            sign_restrict: false,
            irf: true,
        }
    }
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            dgp: Dgp::One,
            n_rep: 200,
            t_len: 250,
            burn_in: 0,
            tests: vec![ModelKind::Ksvar, ModelKind::Csvar],
        }
    }
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            dgp: Dgp::One,
            params: None,
            t_len: 250,
            burn_in: 0,
            start: None,
        }
    }
}

mod dgp_number {
    use cksvar::Dgp;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Dgp, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(match d {
            Dgp::One => 1,
            Dgp::Two => 2,
            Dgp::Three => 3,
        })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Dgp, D::Error> {
        match u8::deserialize(d)? {
            1 => Ok(Dgp::One),
            2 => Ok(Dgp::Two),
            3 => Ok(Dgp::Three),
            n => Err(serde::de::Error::custom(format!("dgp must be 1, 2 or 3, got {n}"))),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Checks settings shared by every command.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.model.lags == 0 {
            return bad("model.lags (--lags) must be at least 1".into());
        }
        if self.model.particles < 2 {
            return bad("model.particles (--particles) must be at least 2".into());
        }
        if self.model.kinds.is_empty() {
            return bad("model.kinds (--model) must name at least one model".into());
        }
        let b = &self.bootstrap;
        if b.replications != 0 && b.replications < 99 {
            return bad(format!(
                "bootstrap.replications (--bootstrap) must be 0 or at least 99, got {}",
                b.replications
            ));
        }
        if !(b.coverage > 0.0 && b.coverage < 1.0) {
            return bad(format!("bootstrap.coverage must lie in (0, 1), got {}", b.coverage));
        }
        if self.irf.draws == 0 {
            return bad("irf.draws must be at least 1".into());
        }
        if self.idset.xi_grid == 0 {
            return bad("idset.xi_grid (--xi-grid) must be at least 1".into());
        }
        if self.mc.n_rep == 0 || self.mc.t_len == 0 || self.simulate.t_len == 0 {
            return bad("replication counts and sample lengths must be at least 1".into());
        }
        if self.mc.tests.contains(&ModelKind::Cksvar) {
            return bad("mc.tests lists restricted models; CKSVAR is the alternative".into());
        }
        Ok(())
    }

    /// Checks the data settings needed by commands that read a CSV file.
    pub fn validate_data(&self) -> CliResult<()> {
        let d = &self.data;
        let bad = |m: String| Err(CliError::Config(m));
        if d.path.is_none() {
            return bad("no input data: set data.path or pass --data".into());
        }
        let Some(c) = &d.constrained else {
            return bad("exactly one constrained series is required: set data.constrained or pass --constrained".into());
        };
        if !d.columns.is_empty() {
            let n = d.columns.iter().filter(|x| *x == c).count();
            if n != 1 {
                return bad(format!("constrained series '{c}' must appear exactly once in data.columns"));
            }
            let mut seen = std::collections::BTreeSet::new();
            if let Some(dup) = d.columns.iter().find(|x| !seen.insert(*x)) {
                return bad(format!("column '{dup}' listed twice in data.columns"));
            }
        }
        if d.date_column.as_ref() == Some(c) {
            return bad("the constrained series cannot be the date column".into());
        }
        if !d.bound.is_finite() {
            return bad("data.bound (--bound) must be finite".into());
        }
        if !(d.bind_tol >= 0.0 && d.bind_tol.is_finite()) {
            return bad("data.bind_tol (--bind-tol) must be a non-negative number".into());
        }
        if d.transforms.contains_key(c) {
            return bad("the constrained series cannot be transformed".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }
}
