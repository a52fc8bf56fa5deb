//! CSV emission and atomic file writes.
//!
//! Every CSV starts with a `# multiband <schema> v1` line followed by a
//! column header whose names carry their units.

use std::io::Write;
use std::path::Path;

use multiband::scalar::DB_FLOOR;

use crate::error::{CliError, CliResult};

/// Writes `contents` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let fail = |e: std::io::Error| CliError::Data(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

/// CSV text under construction.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(schema: &str, columns: &[&str]) -> Self {
        let mut text = format!("# multiband {schema} v1\n");
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_atomic(path, &self.text)
    }
}

/// Fixed-format float with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `20 log10(x)` with the -200 dB floor, formatted.
pub fn db(x: f64) -> String {
    let v = if x > 0.0 { (20.0 * x.log10()).max(DB_FLOOR) } else { DB_FLOOR };
    format!("{v:.6}")
}
