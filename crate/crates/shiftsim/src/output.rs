//! Output files: atomic writes, CSV tables and the `run.json` echo.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

/// Write `bytes` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = parent_dir(path);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json { path: path.to_path_buf(), source })?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// In-memory CSV table; floats print in Rust's shortest round-trip form,
/// which never depends on the locale.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header.iter().map(|s| s.as_ref()))?;
        Ok(Table { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn write(self, path: &Path) -> Result<()> {
        let bytes = self.writer.into_inner().map_err(|e| CliError::Validation(format!("csv: {e}")))?;
        write_atomic(path, &bytes)
    }
}

/// Where a command puts its files.
#[derive(Debug, Clone)]
pub struct OutPath {
    /// Directory receiving `run.json`.
    pub dir: PathBuf,
    /// Main output file for single-file commands.
    pub file: Option<PathBuf>,
}

impl OutPath {
    /// `out` is a directory to create.
    pub fn directory(out: &Path) -> Result<Self> {
        if out.is_file() {
            return Err(CliError::Validation(format!("--out {} is a file, expected a directory", out.display())));
        }
        std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        Ok(OutPath { dir: out.to_path_buf(), file: None })
    }

    /// `out` names a file, or an existing directory that receives
    /// `default_name`; `run.json` lands beside the file.
    pub fn file(out: &Path, default_name: &str) -> Result<Self> {
        let file = if out.is_dir() { out.join(default_name) } else { out.to_path_buf() };
        let dir = parent_dir(&file);
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(OutPath { dir, file: Some(file) })
    }

    pub fn join(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn main_file(&self) -> &Path {
        self.file.as_deref().expect("single-file output")
    }

    pub fn write_run(&self, run: &Value) -> Result<()> {
        write_json(&self.join("run.json"), run)
    }
}
