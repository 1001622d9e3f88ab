use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Files to write once a command has fully succeeded.
#[derive(Debug, Default)]
pub struct Pending(Vec<(PathBuf, String)>);

impl Pending {
    pub fn add(&mut self, path: Option<&Path>, mut text: String) {
        if let Some(path) = path {
            if !text.ends_with('\n') {
                text.push('\n');
            }
            self.0.push((path.to_path_buf(), text));
        }
    }

    /// Writes each file to a sibling temporary and renames it into place.
    pub fn commit(self) -> Result<()> {
        for (path, text) in self.0 {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)
                .with_context(|| format!("creating temporary file in {}", dir.display()))?;
            tmp.write_all(text.as_bytes())?;
            tmp.persist(&path)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}
