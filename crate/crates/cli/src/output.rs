//! Atomic file output and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "NEEDLE_OUT_DIR";

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    parameters: serde_json::Value,
    output_paths: Vec<String>,
    tool_version: &'static str,
    wall_time: f64,
    warnings: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    skipped_points: Option<usize>,
}

/// Collects the files written by one command.
pub struct Run {
    dir: PathBuf,
    started: Instant,
    written: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub skipped_points: Option<usize>,
}

impl Run {
    /// `--out` if given, else `$NEEDLE_OUT_DIR`, else the working directory.
    pub fn new(out: Option<&Path>) -> Result<Self, CliError> {
        let dir = match out {
            Some(p) => p.to_path_buf(),
            None => std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from),
        };
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self { dir, started: Instant::now(), written: Vec::new(), warnings: Vec::new(), skipped_points: None })
    }

    /// Writes `contents` to `name` inside the output directory via a
    /// temporary file and a rename.
    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        write_atomic(&path, contents)?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes `<stem>_manifest.json` and returns its path.
    pub fn finish(self, command: &str, stem: &str, parameters: serde_json::Value) -> Result<PathBuf, CliError> {
        let manifest = Manifest {
            command,
            parameters,
            output_paths: self.written.iter().map(|p| p.display().to_string()).collect(),
            tool_version: env!("CARGO_PKG_VERSION"),
            wall_time: self.started.elapsed().as_secs_f64(),
            warnings: &self.warnings,
            skipped_points: self.skipped_points,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        let path = self.dir.join(format!("{stem}_manifest.json"));
        write_atomic(&path, &text)?;
        for p in &self.written {
            println!("{}", p.display());
        }
        println!("{}", path.display());
        Ok(path)
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}
