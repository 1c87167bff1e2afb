use super::config::ExperimentConfig;
use crate::error::Result;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::{BufRead, Write};
use std::path::Path;

/// `git describe` of the source tree at build time.
pub fn build_id() -> &'static str {
    env!("POLYFIELD_BUILD_ID")
}

/// SHA-256 of the resolved configuration (canonical JSON) without the
/// output paths.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.output = Default::default();
    let json = serde_json::to_string(&c).expect("config serialises");
    let d = Sha256::digest(json.as_bytes());
    d.iter().map(|b| format!("{b:02x}")).collect()
}

/// One output line. `replica` is `None` for run summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub build_id: String,
    pub config_hash: String,
    pub seed: u64,
    pub stage: String,
    pub replica: Option<usize>,
    pub data: serde_json::Value,
}

impl RunRecord {
    pub fn new(cfg: &ExperimentConfig, stage: &str, replica: Option<usize>, data: serde_json::Value) -> Self {
        RunRecord {
            build_id: build_id().to_string(),
            config_hash: config_hash(cfg),
            seed: cfg.seed,
            stage: stage.to_string(),
            replica,
            data,
        }
    }
}

/// First record of every run: the resolved config with all defaults.
pub fn config_record(cfg: &ExperimentConfig) -> RunRecord {
    RunRecord::new(cfg, "config", None, serde_json::to_value(cfg).expect("config serialises"))
}

/// Config embedded by `config_record`, checked against its hash.
pub fn config_from_records(records: &[RunRecord]) -> Result<ExperimentConfig> {
    let r = records
        .iter()
        .find(|r| r.stage == "config")
        .ok_or_else(|| crate::Error::Config("no config record in input; pass --config".into()))?;
    let cfg: ExperimentConfig = serde_json::from_value(r.data.clone())?;
    if config_hash(&cfg) != r.config_hash {
        return Err(crate::Error::Config("embedded config does not match its hash".into()));
    }
    Ok(cfg)
}

pub fn to_jsonl(records: &[RunRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).expect("record serialises"));
        s.push('\n');
    }
    s
}

pub fn write_jsonl(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(to_jsonl(records).as_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<RunRecord>> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in f.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| crate::Error::Schema {
            location: format!("{}: line {}", path.display(), i + 1),
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
