//! CSV and manifest writing.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

/// Run manifest stored next to each CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub run: String,
    pub seed: u64,
    pub csv: String,
    pub rows: usize,
    pub wall_time_s: f64,
    pub config: ExperimentConfig,
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_stem().unwrap_or_default().to_os_string();
    name.push(".manifest.toml");
    csv.with_file_name(name)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .with_context(|| format!("parsing {}", path.display()))
}

/// Writes `rows` to `dir/name.csv` plus its manifest; returns the CSV path.
pub fn emit<T: Serialize>(
    dir: &Path,
    name: &str,
    run: &str,
    cfg: &ExperimentConfig,
    rows: &[T],
    started: Instant,
) -> Result<PathBuf> {
    let csv_path = dir.join(format!("{name}.csv"));
    write_csv(&csv_path, rows)?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        run: run.to_string(),
        seed: cfg.seed,
        csv: format!("{name}.csv"),
        rows: rows.len(),
        wall_time_s: started.elapsed().as_secs_f64(),
        config: cfg.clone(),
    };
    let text = toml::to_string_pretty(&manifest)?;
    std::fs::write(manifest_path(&csv_path), text)?;
    Ok(csv_path)
}

pub fn read_manifest(csv: &Path) -> Result<Manifest> {
    let path = manifest_path(csv);
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
