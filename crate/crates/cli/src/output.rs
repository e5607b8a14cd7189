//! Run directories: deterministic names, embedded metadata and a manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use stirring::graph::{BLOCK_NORM, DISPLACEMENT_NORM};
use stirring::rng::RNG_NAME;

use crate::config::{Experiment, ExperimentConfig};
use crate::CliError;

pub fn version() -> String {
    format!("{} ({})", env!("CARGO_PKG_VERSION"), env!("STIRRING_GIT_DESCRIBE"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Embedded in every output file.
#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub seed: u64,
    pub rng: &'static str,
    pub block_norm: &'static str,
    pub displacement_norm: &'static str,
    pub k_max: Option<u64>,
    pub cap: Option<usize>,
    pub version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
}

impl Metadata {
    pub fn new(config: &ExperimentConfig) -> Metadata {
        let (k_max, cap) = match config.experiment {
            Experiment::Sweep { k_max, .. } => (Some(k_max), None),
            Experiment::Percolation { k_max, cap, .. } => (Some(k_max), Some(cap)),
            _ => (None, None),
        };
        Metadata {
            seed: config.seed,
            rng: RNG_NAME,
            block_norm: BLOCK_NORM,
            displacement_norm: DISPLACEMENT_NORM,
            k_max,
            cap,
            version: version(),
            config_hash: config_hash(config),
            config: config.clone(),
        }
    }
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    sha256_hex(serde_json::to_string(config).expect("serializable").as_bytes())
}

#[derive(Serialize)]
struct Header<'a> {
    metadata: &'a Metadata,
}

#[derive(Serialize)]
struct Artifact {
    name: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    metadata: &'a Metadata,
    artifacts: &'a [Artifact],
}

/// The output directory of one run.
pub struct RunDir {
    path: PathBuf,
    metadata: Metadata,
    artifacts: Vec<Artifact>,
}

impl RunDir {
    /// `<root>/<kind>-<first 16 hex digits of the config hash>`.
    pub fn create(root: &Path, config: &ExperimentConfig) -> Result<RunDir, CliError> {
        let metadata = Metadata::new(config);
        let kind = serde_json::to_value(&config.experiment).expect("serializable")["kind"]
            .as_str()
            .expect("tagged")
            .to_string();
        let path = root.join(format!("{kind}-{}", &metadata.config_hash[..16]));
        fs::create_dir_all(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(RunDir {
            path,
            metadata,
            artifacts: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn header_json(&self) -> String {
        serde_json::to_string(&Header {
            metadata: &self.metadata,
        })
        .expect("serializable")
    }

    fn write(&mut self, name: &str, bytes: Vec<u8>) -> Result<(), CliError> {
        let path = self.path.join(name);
        fs::write(&path, &bytes).map_err(|e| CliError::io(&path, e))?;
        self.artifacts.push(Artifact {
            name: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    /// CSV with a leading `# {"metadata": ...}` comment line.
    pub fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut buf = Vec::new();
        writeln!(buf, "# {}", self.header_json()).expect("in memory");
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let io = |e: csv::Error| CliError::Run(e.to_string());
            w.write_record(header).map_err(io)?;
            for r in rows {
                w.write_record(r).map_err(io)?;
            }
            w.flush().map_err(|e| CliError::Run(e.to_string()))?;
        }
        self.write(name, buf)
    }

    /// JSON lines with a leading `{"metadata": ...}` line.
    pub fn jsonl(&mut self, name: &str, lines: impl IntoIterator<Item = String>) -> Result<(), CliError> {
        let mut buf = self.header_json().into_bytes();
        buf.push(b'\n');
        for l in lines {
            buf.extend_from_slice(l.as_bytes());
            buf.push(b'\n');
        }
        self.write(name, buf)
    }

    /// A raw JSON-lines body (already serialized) behind the metadata line.
    pub fn jsonl_bytes(&mut self, name: &str, body: &[u8]) -> Result<(), CliError> {
        let mut buf = self.header_json().into_bytes();
        buf.push(b'\n');
        buf.extend_from_slice(body);
        self.write(name, buf)
    }

    /// Pretty JSON `{"metadata": ..., "result": ...}`.
    pub fn json(&mut self, name: &str, result: &impl Serialize) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Doc<'a, T> {
            metadata: &'a Metadata,
            result: &'a T,
        }
        let mut buf = serde_json::to_vec_pretty(&Doc {
            metadata: &self.metadata,
            result,
        })
        .map_err(|e| CliError::Run(e.to_string()))?;
        buf.push(b'\n');
        self.write(name, buf)
    }

    /// Writes `manifest.json` and returns the run directory.
    pub fn finish(self) -> Result<PathBuf, CliError> {
        let path = self.path.join("manifest.json");
        let mut buf = serde_json::to_vec_pretty(&Manifest {
            metadata: &self.metadata,
            artifacts: &self.artifacts,
        })
        .expect("serializable");
        buf.push(b'\n');
        fs::write(&path, buf).map_err(|e| CliError::io(&path, e))?;
        Ok(self.path)
    }
}
