//! Output files with a provenance header.
//!
//! CSV files start with `#`-prefixed comment lines naming the tool version,
//! the command, the SHA-256 of the config file and the seed. JSON files carry
//! the same data under a `provenance` key. Nothing time- or host-dependent is
//! written, so identical inputs give identical bytes.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(command: &'static str, config_sha256: String, seed: u64) -> Self {
        Provenance {
            tool: "ellipsorb",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_sha256,
            seed,
        }
    }

    fn header(&self) -> String {
        format!(
            "# {} {}\n# command: {}\n# config_sha256: {}\n# seed: {}\n",
            self.tool, self.version, self.command, self.config_sha256, self.seed
        )
    }
}

/// Writes the files of one command into its output directory.
pub struct Output {
    dir: PathBuf,
    provenance: Provenance,
}

impl Output {
    pub fn new(dir: &Path, provenance: Provenance) -> Self {
        Output {
            dir: dir.to_path_buf(),
            provenance,
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let path = self.path(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(file))
    }

    /// A CSV writer whose file already holds the provenance header.
    pub fn csv(&self, name: &str) -> Result<csv::Writer<BufWriter<File>>> {
        let mut w = self.create(name)?;
        w.write_all(self.provenance.header().as_bytes())?;
        Ok(csv::Writer::from_writer(w))
    }

    /// Pretty JSON with a `provenance` key added to the top-level object.
    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut v = serde_json::to_value(value)?;
        let prov = serde_json::to_value(&self.provenance)?;
        match &mut v {
            Value::Object(map) => {
                map.insert("provenance".into(), prov);
            }
            other => {
                v = json!({ "provenance": prov, "data": other.take() });
            }
        }
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, &v)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }
}
