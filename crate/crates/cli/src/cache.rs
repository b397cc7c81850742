//! Append-only JSON-lines result cache.
//!
//! One record per line: `{"key", "version", "result"}`. Writers append
//! under an exclusive file lock; readers take a shared lock and skip any
//! line that does not parse, including a torn trailing line.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use kloosterman_core::VERSION_TAG;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    key: String,
    version: String,
    result: Value,
}

#[derive(Debug, Clone)]
pub struct Cache {
    path: PathBuf,
    version: String,
}

impl Cache {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Cache {
            path: path.into(),
            version: VERSION_TAG.to_string(),
        }
    }

    /// A cache that only accepts records stamped with `version`.
    pub fn with_version(path: impl Into<PathBuf>, version: &str) -> Self {
        Cache {
            path: path.into(),
            version: version.to_string(),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// The latest record for `key` with a matching version tag. Corrupt
    /// lines are reported to `warn` and skipped.
    pub fn lookup(&self, key: &str, warn: &mut dyn Write) -> io::Result<Option<Value>> {
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e),
        };
        file.lock_shared()?;
        let mut found = None;
        for (lineno, line) in BufReader::new(&file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Record>(&line) {
                Ok(r) if r.key == key && r.version == self.version => found = Some(r.result),
                Ok(_) => {}
                Err(e) => {
                    let _ = writeln!(
                        warn,
                        "warning: skipping corrupt cache line {} in {}: {}",
                        lineno + 1,
                        self.path.display(),
                        e
                    );
                }
            }
        }
        file.unlock()?;
        Ok(found)
    }

    pub fn store(&self, key: &str, result: &Value) -> io::Result<()> {
        let record = Record {
            key: key.to_string(),
            version: self.version.clone(),
            result: result.clone(),
        };
        let mut line = serde_json::to_string(&record).map_err(io::Error::other)?;
        line.push('\n');
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        file.lock()?;
        let written = file.write_all(line.as_bytes()).and_then(|_| file.flush());
        file.unlock()?;
        written
    }
}
