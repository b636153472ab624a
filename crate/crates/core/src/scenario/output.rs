//! One directory per run, with a manifest of what was written into it.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{Error, Result};

/// Output directory `<base>/<name>-<unix seconds>`. Files are recorded as
/// they are written; [`RunDir::finish`] writes `manifest.toml`.
#[derive(Debug)]
pub struct RunDir {
    path: PathBuf,
    created_unix: u64,
    command: String,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    created_unix: u64,
    files: &'a [String],
}

impl RunDir {
    pub fn create(base: &Path, name: &str, command: &str) -> Result<Self> {
        let created_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        fs::create_dir_all(base).map_err(|e| Error::io(base, e))?;
        let stem = format!("{name}-{command}-{created_unix}");
        let mut path = base.join(&stem);
        let mut k = 1;
        while path.exists() {
            path = base.join(format!("{stem}-{k}"));
            k += 1;
        }
        fs::create_dir(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Self {
            path,
            created_unix,
            command: command.to_string(),
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Path for a new file; the name is added to the manifest.
    pub fn file(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.path.join(name)
    }

    pub fn write_toml<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = toml::to_string(value)
            .map_err(|e| Error::config(format!("cannot serialize {name}: {e}")))?;
        let path = self.file(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.files.sort();
        let manifest = Manifest {
            command: &self.command,
            created_unix: self.created_unix,
            files: &self.files,
        };
        let text = toml::to_string(&manifest)
            .map_err(|e| Error::config(format!("cannot serialize manifest: {e}")))?;
        let path = self.path.join("manifest.toml");
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(self.path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_files() {
        let tmp = tempfile::tempdir().unwrap();
        let mut a = RunDir::create(tmp.path(), "fig3", "efficiency").unwrap();
        let b = RunDir::create(tmp.path(), "fig3", "efficiency").unwrap();
        assert_ne!(a.path(), b.path());
        std::fs::write(a.file("x.csv"), "t\n").unwrap();
        let dir = a.finish().unwrap();
        let m = std::fs::read_to_string(dir.join("manifest.toml")).unwrap();
        assert!(m.contains("x.csv") && m.contains("command = \"efficiency\""));
    }
}
