//! CSV emission with a provenance header: every artifact records the tool
//! version, a hash of the configuration text, and the seed that produced it.

use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn config_hash(config_text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config_text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// A CSV document with a leading provenance comment.
pub struct Csv {
    buffer: String,
}

impl Csv {
    pub fn new(command: &str, config_hash: &str, seed: u64, header: &str) -> Self {
        let mut buffer = String::new();
        buffer.push_str(&format!(
            "# cellfree v{TOOL_VERSION} command={command} config={config_hash} seed={seed}\n"
        ));
        buffer.push_str(header);
        buffer.push('\n');
        Csv { buffer }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buffer.push_str(&fields.join(","));
        self.buffer.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buffer
    }
}

/// Fixed-format float for byte-stable output.
pub fn fmt(x: f64) -> String {
    format!("{x:.10e}")
}

pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}
