//! File formats. Every writer goes through [`write_atomic`], and every text
//! format starts with a versioned header line.

mod field;
mod samples;
mod sdf;
mod stl;
mod trajectory;

pub use field::{format_field_text, parse_field_text, read_field, write_field, FieldEncoding, FieldFile};
pub use samples::{format_samples, parse_samples, read_samples, write_samples};
pub use sdf::{decode_sdf, encode_sdf, read_sdf, write_sdf};
pub use stl::{parse_stl, read_stl};
pub use trajectory::{format_trajectory, parse_trajectory, read_trajectory, write_trajectory, TrajectoryFile};

use std::io::Write;
use std::path::Path;

use crate::error::{Result, SimError};

/// Writes to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| SimError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| SimError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| SimError::io(path, e))?;
    tmp.persist(path).map_err(|e| SimError::io(path, e.error))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| SimError::io(path, e))
}

/// Shortest text that parses back to the same value.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub(crate) fn parse_f64(path: &Path, line: usize, token: &str, what: &str) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| SimError::parse(path, line, format!("{what}: `{token}` is not a number")))?;
    if !v.is_finite() {
        return Err(SimError::parse(path, line, format!("{what}: `{token}` is not finite")));
    }
    Ok(v)
}

/// Lines after the header that carry data: blank lines and `#` comments are
/// skipped. Yields 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Checks the first line against `# <magic> v<version>` and returns the
/// remaining `key=value` tokens of that line.
pub(crate) fn header<'t>(path: &Path, text: &'t str, magic: &str, version: u32) -> Result<Vec<(&'t str, &'t str)>> {
    let first = text
        .lines()
        .next()
        .ok_or_else(|| SimError::parse(path, 1, "empty file"))?;
    let mut tokens = first.split_whitespace();
    if tokens.next() != Some("#") || tokens.next() != Some(magic) {
        return Err(SimError::parse(path, 1, format!("expected header `# {magic} v{version}`")));
    }
    let v = tokens.next().unwrap_or("");
    if v != format!("v{version}") {
        return Err(SimError::parse(path, 1, format!("unsupported schema version `{v}`, expected v{version}")));
    }
    tokens
        .map(|t| {
            t.split_once('=')
                .ok_or_else(|| SimError::parse(path, 1, format!("malformed header field `{t}`")))
        })
        .collect()
}

pub(crate) fn header_value<'t>(path: &Path, fields: &[(&'t str, &'t str)], key: &str) -> Result<&'t str> {
    fields
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| SimError::parse(path, 1, format!("header is missing `{key}`")))
}
