//! Run manifests: the resolved configuration, seeds, software versions and
//! hashes of every input and output, enough to repeat a run exactly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::{self, Command, Outputs, Seeds};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub command: Command,
    pub config_sha256: String,
    pub config: RunConfig,
    pub seeds: Seeds,
    pub inputs: Vec<FileHash>,
    /// Paths relative to the output directory.
    pub outputs: Vec<FileHash>,
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

/// Runs `command` and writes its manifest next to the outputs.
pub fn run(command: Command, cfg: &RunConfig) -> CliResult<Manifest> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    let mut out = Outputs::new(&cfg.out);
    match command {
        Command::Estimate => commands::estimate(cfg, &mut out)?,
        Command::Test => commands::test(cfg, &mut out)?,
        Command::Irf => commands::irf(cfg, &mut out)?,
        Command::Idset => commands::idset(cfg, &mut out)?,
        Command::Mc => commands::mc(cfg, &mut out)?,
        Command::Simulate => commands::simulate(cfg, &mut out)?,
    }
    let hash_all = |paths: Vec<(String, PathBuf)>| -> CliResult<Vec<FileHash>> {
        paths
            .into_iter()
            .map(|(name, p)| Ok(FileHash { sha256: sha256_file(&p)?, path: name }))
            .collect()
    };
    let inputs = hash_all(out.inputs.iter().map(|p| (p.display().to_string(), p.clone())).collect())?;
    let outputs = hash_all(out.files.iter().map(|f| (f.clone(), cfg.out.join(f))).collect())?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        core_version: cksvar::VERSION.to_string(),
        command,
        config_sha256: cfg.hash(),
        config: cfg.clone(),
        seeds: Seeds::from_base(cfg.model.seed),
        inputs,
        outputs,
    };
    let path = cfg.out.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("serializable manifest");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

pub fn load(path: &Path) -> CliResult<Manifest> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: not a run manifest: {e}", path.display())))
}

/// Repeats the run recorded in a manifest, optionally into another
/// directory, and checks every output against its recorded hash.
pub fn rerun(path: &Path, out: Option<PathBuf>) -> CliResult<Manifest> {
    let old = load(path)?;
    if old.config.hash() != old.config_sha256 {
        return Err(CliError::Mismatch("manifest config does not match its recorded hash".into()));
    }
    if old.version != env!("CARGO_PKG_VERSION") || old.core_version != cksvar::VERSION {
        log::warn!(
            "manifest written by {} {} (core {}); running {} (core {})",
            old.tool,
            old.version,
            old.core_version,
            env!("CARGO_PKG_VERSION"),
            cksvar::VERSION
        );
    }
    for f in &old.inputs {
        let now = sha256_file(Path::new(&f.path))?;
        if now != f.sha256 {
            return Err(CliError::Mismatch(format!("input {} changed since the recorded run", f.path)));
        }
    }
    let mut cfg = old.config.clone();
    if let Some(o) = out {
        cfg.out = o;
    }
    let new = run(old.command, &cfg)?;
    let differ: Vec<&str> = old
        .outputs
        .iter()
        .filter(|f| !new.outputs.contains(f))
        .map(|f| f.path.as_str())
        .collect();
    if !differ.is_empty() || new.outputs.len() != old.outputs.len() {
        return Err(CliError::Mismatch(format!("outputs differ from the recorded run: {}", differ.join(", "))));
    }
    Ok(new)
}
