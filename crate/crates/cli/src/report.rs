use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Everything that determines a report's content.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopwords_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus_hash: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> RunManifest {
        RunManifest {
            tool: "ideaflow",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            parameters: BTreeMap::new(),
            stopwords_hash: None,
            corpus_hash: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> RunManifest {
        self.parameters
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    body: &'a T,
}

pub fn json_report<T: Serialize>(manifest: &RunManifest, body: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(&Envelope { manifest, body }).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

/// CSV with the manifest as a leading `#` comment line.
pub fn csv_report<R: Serialize>(manifest: &RunManifest, rows: impl IntoIterator<Item = R>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(b"# manifest: ");
    out.extend_from_slice(&serde_json::to_vec(manifest).expect("manifest serializes"));
    out.push(b'\n');
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).expect("row serializes");
    }
    w.into_inner().expect("in-memory writer")
}

/// CSV with a header row given explicitly, for tables with dynamic columns.
pub fn csv_table(manifest: &RunManifest, header: &[String], rows: &[Vec<String>]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(b"# manifest: ");
    out.extend_from_slice(&serde_json::to_vec(manifest).expect("manifest serializes"));
    out.push(b'\n');
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).expect("header");
    for r in rows {
        w.write_record(r).expect("row");
    }
    w.into_inner().expect("in-memory writer")
}

/// Writes to `out` through a temporary file in the same directory and a
/// rename, or to stdout.
pub fn emit(out: Option<&Path>, bytes: &[u8], protected: Option<&Path>) -> Result<(), CliError> {
    let Some(path) = out else {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(bytes)
            .and_then(|_| stdout.flush())
            .map_err(|e| CliError::Io(format!("writing to stdout: {e}")));
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    if let Some(corpus) = protected {
        if let (Ok(a), Ok(b)) = (dir.canonicalize(), corpus.canonicalize()) {
            if a.starts_with(&b) {
                return Err(CliError::Validation(format!(
                    "refusing to write {} inside the corpus directory {}",
                    path.display(),
                    corpus.display()
                )));
            }
        }
    }
    let io = |e: std::io::Error| CliError::Io(format!("writing {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
