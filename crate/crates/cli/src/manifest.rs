use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use pipeadc::report::write_file;

/// Plain-text record of the inputs behind a run.
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub config_source: String,
    pub seed: Option<u64>,
    pub output_dir: &'a Path,
    /// Files written by the run, relative to the output directory.
    pub artifacts: Vec<&'a str>,
    /// The resolved configuration as JSON, if the command used one.
    pub config_json: Option<String>,
}

impl RunManifest<'_> {
    pub fn render(&self) -> String {
        let ts = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or_default();
        let mut s = String::new();
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "config = {}", self.config_source);
        match self.seed {
            Some(seed) => {
                let _ = writeln!(s, "seed = {seed}");
            }
            None => s.push_str("seed = n/a\n"),
        }
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        let _ = writeln!(s, "timestamp_unix = {ts}");
        let _ = writeln!(s, "pipeadc_version = {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "artifacts = {}", self.artifacts.join(", "));
        if let Some(cfg) = &self.config_json {
            s.push_str("\n[resolved config]\n");
            s.push_str(cfg);
            s.push('\n');
        }
        s
    }

    pub fn write(&self) -> pipeadc::Result<()> {
        write_file(&self.output_dir.join("manifest.txt"), self.render().as_bytes())
    }
}
