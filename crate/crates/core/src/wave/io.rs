//! Profile CSV: `#`-prefixed JSON header line, then columns `xi,phi,dphi`.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::WaveProfile;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileHeader {
    pub c: f64,
    pub eta_minus: f64,
    pub eta_plus: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    pub direction: (f64, f64),
    pub residual: f64,
}

impl From<&WaveProfile> for ProfileHeader {
    fn from(p: &WaveProfile) -> Self {
        Self {
            c: p.c,
            eta_minus: p.eta_minus,
            eta_plus: p.eta_plus,
            c_minus: p.c_minus,
            c_plus: p.c_plus,
            direction: p.sigma,
            residual: p.residual,
        }
    }
}

pub fn write_profile_csv(p: &WaveProfile, path: &Path) -> Result<()> {
    let mut f = File::create(path)?;
    writeln!(f, "# {}", serde_json::to_string(&ProfileHeader::from(p))?)?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(["xi", "phi", "dphi"])?;
    for k in 0..p.phi.len() {
        w.write_record(&[format!("{:e}", p.grid.xi(k)), format!("{:e}", p.phi[k]), format!("{:e}", p.dphi[k])])?;
    }
    w.flush()?;
    Ok(())
}

/// Header and `(ξ, Φ, Φ')` rows.
pub fn read_profile_csv(path: &Path) -> Result<(ProfileHeader, Vec<[f64; 3]>)> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let json = first
        .strip_prefix("# ")
        .ok_or_else(|| Error::Config(format!("{}: missing JSON header", path.display())))?;
    let header: ProfileHeader = serde_json::from_str(json.trim())?;
    let mut rows = Vec::new();
    for rec in csv::Reader::from_reader(reader).records() {
        let rec = rec?;
        let mut row = [0.0; 3];
        for (slot, field) in row.iter_mut().zip(rec.iter()) {
            *slot = field.parse().map_err(|_| Error::Config(format!("bad number {field:?}")))?;
        }
        rows.push(row);
    }
    Ok((header, rows))
}
