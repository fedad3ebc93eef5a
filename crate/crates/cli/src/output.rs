use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fracground::Field;
use serde::Serialize;

pub const OUT_ENV: &str = "FRACGROUND_OUT";

/// FRACGROUND_OUT beats --out, which beats `out/<command>`.
pub fn resolve_dir(flag: Option<&Path>, command: &str) -> PathBuf {
    match std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        Some(dir) => PathBuf::from(dir),
        None => flag.map_or_else(|| Path::new("out").join(command), Path::to_path_buf),
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

/// JSON body tagged with the schema it follows.
#[derive(Serialize)]
pub struct Tagged<'a, T: Serialize> {
    pub schema: &'static str,
    #[serde(flatten)]
    pub body: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, schema: &'static str, body: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&Tagged { schema, body })?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_profile(path: &Path, field: &Field) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut w = BufWriter::new(file);
    field.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

/// 17 significant digits, as in the profile CSV.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}
