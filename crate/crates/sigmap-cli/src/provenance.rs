//! Provenance records: every command writes the seed, a hash of the
//! effective config and the tool version, either as leading `#` comment
//! lines inside CSV outputs or as a `provenance.txt` next to binary ones.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::CliResult;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
}

impl Provenance {
    pub fn new(command: &str, seed: u64, config: &Config) -> Provenance {
        let digest = Sha256::digest(config.canonical().as_bytes());
        Provenance {
            command: command.to_string(),
            seed,
            config_sha256: hex::encode(digest),
        }
    }

    /// `#`-prefixed block for embedding at the top of CSV files.
    pub fn csv_header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# command={}", self.command);
        let _ = writeln!(s, "# seed={}", self.seed);
        let _ = writeln!(s, "# config_sha256={}", self.config_sha256);
        let _ = writeln!(s, "# version={VERSION}");
        s
    }

    /// Writes `provenance.txt` into the given output directory.
    pub fn write_sidecar(&self, dir: &Path) -> CliResult<()> {
        let body = format!(
            "command={}\nseed={}\nconfig_sha256={}\nversion={VERSION}\n",
            self.command, self.seed, self.config_sha256
        );
        std::fs::write(dir.join("provenance.txt"), body)?;
        Ok(())
    }
}
