//! Snapshot files: `(i, j, u)` CSV with a JSON sidecar, and a history index.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::{Field, ObstacleLattice, Site, Window};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub window: Window,
    pub time: f64,
    pub active_sites: usize,
    pub obstacle: Vec<Site>,
}

pub fn write_snapshot(state: &Field, lattice: &ObstacleLattice, csv_path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(csv_path)?;
    w.write_record(["i", "j", "u"])?;
    for (&(i, j), &u) in lattice.active_sites().iter().zip(&state.values) {
        w.write_record(&[i.to_string(), j.to_string(), format!("{u:.17e}")])?;
    }
    w.flush()?;
    let meta = SnapshotMeta {
        window: *lattice.window(),
        time: state.time,
        active_sites: lattice.n_active(),
        obstacle: lattice.obstacle().iter().copied().collect(),
    };
    let mut f = std::fs::File::create(csv_path.with_extension("json"))?;
    serde_json::to_writer_pretty(&mut f, &meta)?;
    writeln!(f)?;
    Ok(())
}

/// Reads a snapshot written by [`write_snapshot`] back into a field.
pub fn read_snapshot(lattice: &ObstacleLattice, csv_path: &Path) -> Result<Field> {
    let meta: SnapshotMeta = serde_json::from_reader(std::fs::File::open(csv_path.with_extension("json"))?)?;
    let mut values = vec![f64::NAN; lattice.n_active()];
    let mut r = csv::Reader::from_path(csv_path)?;
    for rec in r.deserialize() {
        let (i, j, u): (i64, i64, f64) = rec?;
        if let Some(k) = lattice.index((i, j)) {
            values[k] = u;
        }
    }
    Ok(Field { values, time: meta.time })
}

/// Writes numbered snapshots into a directory and keeps an index of times.
pub struct SnapshotSeries {
    dir: PathBuf,
    prefix: String,
    entries: Vec<(f64, String)>,
}

impl SnapshotSeries {
    pub fn new(dir: &Path, prefix: &str) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), prefix: prefix.to_string(), entries: Vec::new() })
    }

    pub fn push(&mut self, state: &Field, lattice: &ObstacleLattice) -> Result<()> {
        let name = format!("{}_{:05}.csv", self.prefix, self.entries.len());
        write_snapshot(state, lattice, &self.dir.join(&name))?;
        self.entries.push((state.time, name));
        Ok(())
    }

    /// Writes `<prefix>_index.csv` with columns `time, file`.
    pub fn finish(&self) -> Result<PathBuf> {
        let path = self.dir.join(format!("{}_index.csv", self.prefix));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["time", "file"])?;
        for (t, f) in &self.entries {
            w.write_record(&[format!("{t:.17e}"), f.clone()])?;
        }
        w.flush()?;
        Ok(path)
    }
}
