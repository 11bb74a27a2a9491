//! On-disk formats: CSV tables, the coefficient cache and run manifests.
//!
//! Every file is rendered in memory and then written atomically (temporary
//! file in the target directory, then rename).

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::bogoliubov::{BogoliubovSet, Region};
use crate::config::FieldConfig;
use crate::error::{Error, Result};
use crate::modes::ModeTables;

pub const CACHE_FORMAT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
const CACHE_COLUMNS: &str = "region,i,I,re_alpha,im_alpha,re_beta,im_beta,fallback";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `contents` to `path` via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::domain(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents)?;
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_f64(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Renders a CSV document with a header row and LF line endings.
pub fn render_table(column_names: &[&str], rows: &[Vec<Cell>]) -> Result<String> {
    if column_names.is_empty() || column_names.iter().any(|c| c.is_empty()) {
        return Err(Error::domain("column names must be non-empty"));
    }
    if column_names.iter().any(|c| c.contains(',') || c.contains('\n')) {
        return Err(Error::domain("column names must not contain commas or newlines"));
    }
    let mut out = column_names.join(",");
    out.push('\n');
    for (k, row) in rows.iter().enumerate() {
        if row.len() != column_names.len() {
            return Err(Error::domain(format!(
                "row {k} has {} cells, expected {}",
                row.len(),
                column_names.len()
            )));
        }
        let cells: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Writes a table of mixed cells.
pub fn write_rows(path: &Path, column_names: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    write_atomic(path, render_table(column_names, rows)?.as_bytes())
}

/// Writes a numeric table in full precision.
pub fn write_table(path: &Path, column_names: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let cells: Vec<Vec<Cell>> = rows.iter().map(|r| r.iter().map(|&x| Cell::Float(x)).collect()).collect();
    write_rows(path, column_names, &cells)
}

/// Reads a numeric table written by [`write_table`] (integers are accepted too).
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, "empty file"))?
        .1;
    let columns: Vec<String> = header.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for (k, line) in lines {
        let row = line
            .split(',')
            .map(|c| c.parse::<f64>().map_err(|e| parse_error(path, k + 1, format!("{c:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != columns.len() {
            return Err(parse_error(path, k + 1, "row length differs from header"));
        }
        rows.push(row);
    }
    Ok((columns, rows))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn config_echo(config: &FieldConfig) -> Vec<(&'static str, String)> {
    vec![
        ("mass_times_R", format_f64(config.mass_times_r)),
        ("split_fraction", format_f64(config.split_fraction)),
        ("n_local", config.n_local.to_string()),
        ("n_global", config.n_global.to_string()),
        ("root_tol", format_f64(config.root_tol)),
        ("quad_tol", format_f64(config.quad_tol)),
        ("degeneracy_tol", format_f64(config.degeneracy_tol)),
    ]
}

/// Serializes a coefficient set (header plus CSV body) to a string.
pub fn render_cache(set: &BogoliubovSet) -> String {
    let (nl, ng) = (set.n_local(), set.n_global());
    let mut out = String::with_capacity(2 * nl * ng * 100 + 512);
    out.push_str("# dirac-cavity coefficient cache\n");
    let _ = writeln!(out, "# format_version={CACHE_FORMAT_VERSION}");
    for (k, v) in config_echo(&set.config) {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "# rows={}", 2 * nl * ng);
    out.push_str(CACHE_COLUMNS);
    out.push('\n');
    for region in [Region::Left, Region::Right] {
        let (a, b, f) = (set.alpha(region), set.beta(region), set.fallback(region));
        for i in 0..nl {
            for k in 0..ng {
                let (av, bv) = (a[[i, k]], b[[i, k]]);
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    region.label(),
                    i + 1,
                    k + 1,
                    format_f64(av.re),
                    format_f64(av.im),
                    format_f64(bv.re),
                    format_f64(bv.im),
                    f[[i, k]] as u8
                );
            }
        }
    }
    out
}

pub fn cache_store(path: &Path, set: &BogoliubovSet) -> Result<()> {
    write_atomic(path, render_cache(set).as_bytes())
}

/// Loads a cache written by [`cache_store`]; the header must echo `config`
/// exactly, otherwise [`Error::CacheInvalid`] is returned.
pub fn cache_load(path: &Path, config: &FieldConfig) -> Result<BogoliubovSet> {
    config.validate()?;
    let text = fs::read_to_string(path)?;
    let mut lines = text.split('\n').enumerate().peekable();
    let mut header = Vec::new();
    while let Some((_, line)) = lines.peek() {
        if let Some(rest) = line.strip_prefix('#') {
            header.push(rest.trim().to_string());
            lines.next();
        } else {
            break;
        }
    }
    let get = |key: &str| -> Option<&str> {
        header
            .iter()
            .find_map(|h| h.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
    };
    match get("format_version") {
        Some(v) if v == CACHE_FORMAT_VERSION.to_string() => {}
        Some(v) => {
            return Err(Error::CacheInvalid {
                path: path.to_path_buf(),
                reason: format!("format version {v}, expected {CACHE_FORMAT_VERSION}"),
            })
        }
        None => return Err(parse_error(path, 1, "missing format_version header")),
    }
    for (key, want) in config_echo(config) {
        match get(key) {
            Some(got) if got == want => {}
            Some(got) => {
                return Err(Error::CacheInvalid {
                    path: path.to_path_buf(),
                    reason: format!("{key} is {got}, requested {want}"),
                })
            }
            None => return Err(parse_error(path, 1, format!("missing {key} header"))),
        }
    }
    let rows: usize = get("rows")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_error(path, 1, "missing or malformed rows header"))?;
    let (nl, ng) = (config.n_local, config.n_global);
    if rows != 2 * nl * ng {
        return Err(parse_error(path, 1, format!("rows={rows} does not match {nl}x{ng} truncation")));
    }
    match lines.next() {
        Some((_, l)) if l == CACHE_COLUMNS => {}
        Some((k, _)) => return Err(parse_error(path, k + 1, "unexpected column header")),
        None => return Err(parse_error(path, header.len() + 1, "missing column header")),
    }

    let mut mats: Vec<Array2<Complex64>> = (0..4).map(|_| Array2::zeros((nl, ng))).collect();
    let mut flags: Vec<Array2<bool>> = (0..2).map(|_| Array2::from_elem((nl, ng), false)).collect();
    let mut seen = vec![false; 2 * nl * ng];
    let mut count = 0usize;
    for (k, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = k + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(parse_error(path, lineno, "expected 8 fields"));
        }
        let region = match f[0] {
            "left" => 0,
            "right" => 1,
            other => return Err(parse_error(path, lineno, format!("unknown region {other:?}"))),
        };
        let idx = |s: &str, n: usize| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(v) if v >= 1 && v <= n => Ok(v - 1),
                _ => Err(parse_error(path, lineno, format!("index {s:?} outside 1..={n}"))),
            }
        };
        let (i, big_i) = (idx(f[1], nl)?, idx(f[2], ng)?);
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| parse_error(path, lineno, format!("{s:?}: {e}")))
        };
        let a = Complex64::new(num(f[3])?, num(f[4])?);
        let b = Complex64::new(num(f[5])?, num(f[6])?);
        let fb = match f[7] {
            "0" => false,
            "1" => true,
            other => return Err(parse_error(path, lineno, format!("bad fallback flag {other:?}"))),
        };
        let slot = (region * nl + i) * ng + big_i;
        if std::mem::replace(&mut seen[slot], true) {
            return Err(parse_error(path, lineno, format!("duplicate row for ({}, {})", i + 1, big_i + 1)));
        }
        mats[2 * region][[i, big_i]] = a;
        mats[2 * region + 1][[i, big_i]] = b;
        flags[region][[i, big_i]] = fb;
        count += 1;
    }
    if count != rows {
        return Err(parse_error(path, text.lines().count(), format!("found {count} of {rows} rows")));
    }
    let tables = ModeTables::new(config)?;
    let mut mats = mats.into_iter();
    let mut flags = flags.into_iter();
    let m = [(); 4].map(|_| mats.next().unwrap());
    let f = [(); 2].map(|_| flags.next().unwrap());
    BogoliubovSet::from_parts(*config, tables, m, f)
}

/// Loads the cache when it matches `config`, otherwise builds the set and
/// stores it. Returns the set and whether it came from the cache.
pub fn load_or_build(path: &Path, config: &FieldConfig) -> Result<(BogoliubovSet, bool)> {
    match cache_load(path, config) {
        Ok(set) => Ok((set, true)),
        Err(Error::CacheInvalid { .. }) | Err(Error::Parse { .. }) => {
            let set = crate::bogoliubov::build_matrices(config)?;
            cache_store(path, &set)?;
            Ok((set, false))
        }
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::NotFound => {
            let set = crate::bogoliubov::build_matrices(config)?;
            cache_store(path, &set)?;
            Ok((set, false))
        }
        Err(e) => Err(e),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the manifest's directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Record of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub timestamp_unix: u64,
    pub config: serde_json::Value,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: serde_json::Value) -> Self {
        let timestamp_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool: "dirac-cavity".into(),
            version: TOOL_VERSION.into(),
            command: command.into(),
            timestamp_unix,
            config,
            files: Vec::new(),
        }
    }

    /// Hashes a file already written inside `dir` and records it.
    pub fn record(&mut self, dir: &Path, name: &str) -> Result<()> {
        let bytes = fs::read(dir.join(name))?;
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    /// Writes `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        self.write_as(dir, "manifest.json")
    }

    pub fn write_as(&self, dir: &Path, file_name: &str) -> Result<PathBuf> {
        let path = dir.join(file_name);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }

    /// Re-hashes every listed file and reports the first mismatch.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for f in &self.files {
            let bytes = fs::read(dir.join(&f.path))?;
            if sha256_hex(&bytes) != f.sha256 {
                return Err(Error::CacheInvalid {
                    path: dir.join(&f.path),
                    reason: "content hash differs from manifest".into(),
                });
            }
        }
        Ok(())
    }
}

/// Pretty JSON with a trailing newline, written atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.028757838e-300, f64::MAX, 5e-324, 0.0] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn table_shape_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let rows = vec![vec![0.1, 2.0], vec![1.0 / 3.0, -4.5e-7], vec![1e300, 5e-324]];
        write_table(&p, &["a", "b"], &rows).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(!text.contains('\r'));
        let (cols, back) = read_table(&p).unwrap();
        assert_eq!(cols, vec!["a", "b"]);
        for (r, b) in rows.iter().zip(&back) {
            for (x, y) in r.iter().zip(b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        write_table(&p, &["x"], &[]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "x\n");
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(render_table(&["a", "b"], &[vec![Cell::Float(1.0)]]).is_err());
        assert!(render_table(&[], &[]).is_err());
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let r = write_table(Path::new("/nonexistent-dir/x.csv"), &["a"], &[]);
        assert!(matches!(r, Err(Error::Io(_))));
    }
}
