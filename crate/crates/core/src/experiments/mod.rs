//! Scenario runner: resolved configuration in, CSV/JSON artifacts and a
//! pass/fail summary out.

pub mod config;
mod dynamics;
pub mod report;
mod residuals;
mod waves;

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::{param, Config, Param};
pub use report::{Check, Manifest, Relation, Report};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    WaveScan,
    Spectral,
    Correctors,
    Residuals,
    Stability,
    Spreading,
    Obstacle,
    Comparison,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::WaveScan,
        Scenario::Spectral,
        Scenario::Correctors,
        Scenario::Residuals,
        Scenario::Stability,
        Scenario::Spreading,
        Scenario::Obstacle,
        Scenario::Comparison,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::WaveScan => "wave-scan",
            Scenario::Spectral => "spectral",
            Scenario::Correctors => "correctors",
            Scenario::Residuals => "residuals",
            Scenario::Stability => "stability",
            Scenario::Spreading => "spreading",
            Scenario::Obstacle => "obstacle",
            Scenario::Comparison => "comparison",
        }
    }

    pub fn schema(self) -> &'static [Param] {
        match self {
            Scenario::WaveScan => waves::WAVE_SCAN,
            Scenario::Spectral => waves::SPECTRAL,
            Scenario::Correctors => waves::CORRECTORS,
            Scenario::Residuals => residuals::RESIDUALS,
            Scenario::Stability => dynamics::STABILITY,
            Scenario::Spreading => dynamics::SPREADING,
            Scenario::Obstacle => dynamics::OBSTACLE,
            Scenario::Comparison => dynamics::COMPARISON,
        }
    }

    /// Default configuration rendered in the file format, with help text.
    pub fn template(self) -> String {
        let mut out = format!("# {} defaults\n", self.name());
        let mut section = None;
        for p in self.schema() {
            let (s, k) = p.key.split_once('.').unwrap_or(("", p.key));
            if section != Some(s) {
                out.push_str(&format!("\n[{s}]\n"));
                section = Some(s);
            }
            out.push_str(&format!("# {}\n{k} = {}\n", p.help, p.default));
        }
        out
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario {s:?}")))
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Runs `scenario` into `out`, writing `manifest.json`, `resolved.conf`,
/// the scenario artifacts and `summary.json`.
pub fn run(scenario: Scenario, config: &Config, out: &Path) -> Result<Report> {
    std::fs::create_dir_all(out)?;
    let seeds = seeds(scenario, config)?;
    Manifest::new(scenario.name(), config, seeds).write(out, config)?;
    let start = std::time::Instant::now();
    let mut report = match scenario {
        Scenario::WaveScan => waves::wave_scan(config, out),
        Scenario::Spectral => waves::spectral(config, out),
        Scenario::Correctors => waves::correctors(config, out),
        Scenario::Residuals => residuals::residuals(config, out),
        Scenario::Stability => dynamics::stability(config, out),
        Scenario::Spreading => dynamics::spreading(config, out),
        Scenario::Obstacle => dynamics::obstacle(config, out),
        Scenario::Comparison => dynamics::comparison(config, out),
    }
    .map_err(|e| Error::Scenario { scenario: scenario.name().to_string(), source: Box::new(e) })?;
    report.value("wall_seconds", start.elapsed().as_secs_f64());
    report.write(&out.join("summary.json"))?;
    Ok(report)
}

fn seeds(scenario: Scenario, config: &Config) -> Result<BTreeMap<String, u64>> {
    let mut out = BTreeMap::new();
    for p in scenario.schema() {
        if p.key.ends_with("seed") {
            out.insert(p.key.to_string(), config.u64(p.key)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert!("nope".parse::<Scenario>().is_err());
    }

    #[test]
    fn templates_parse_back_to_defaults() {
        for s in Scenario::ALL {
            let c = Config::resolve(s.schema(), Some(&s.template()), &[]).unwrap();
            assert_eq!(c, Config::defaults(s.schema()), "{s}");
        }
    }

    #[test]
    fn check_defaults_match_shared_tolerances() {
        use crate::tolerances as t;
        let cases: &[(Scenario, &str, f64)] = &[
            (Scenario::WaveScan, "checks.max_residual", t::PROFILE_RESIDUAL),
            (Scenario::WaveScan, "checks.speed_rel_tol", t::FRONT_SPEED_REL),
            (Scenario::WaveScan, "checks.symmetric_speed", t::SYMMETRIC_SPEED),
            (Scenario::WaveScan, "checks.max_exponent_defect", t::EXPONENT_DEFECT),
            (Scenario::Spectral, "checks.min_adjoint_order", t::ADJOINT_ORDER),
            (Scenario::Spectral, "checks.pairing_tol", t::ADJOINT_PAIRING),
            (Scenario::Spectral, "checks.melnikov_rel_tol", t::MELNIKOV_REL),
            (Scenario::Residuals, "checks.min_samples", t::MIN_RESIDUAL_SAMPLES as f64),
            (Scenario::Residuals, "checks.max_suite_seconds", t::SUITE_SECONDS),
            (Scenario::Comparison, "checks.tolerance", t::COMPARISON),
            (Scenario::Spreading, "checks.speed_fraction", t::SPREADING_FRACTION),
            (Scenario::Stability, "checks.max_final_deviation", t::FINAL_DEVIATION),
            (Scenario::Stability, "checks.max_phase_shift", t::PHASE_SHIFT),
            (Scenario::Obstacle, "checks.max_final_deviation", t::FINAL_DEVIATION),
            (Scenario::Obstacle, "checks.min_behind", 1.0 - t::INVADED),
        ];
        for &(s, key, want) in cases {
            let got = Config::defaults(s.schema()).f64(key).unwrap();
            assert!((got - want).abs() <= 1e-15 * want.abs(), "{s} {key}: {got} vs {want}");
        }
    }

    #[test]
    fn shipped_configs_are_the_defaults() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        for s in Scenario::ALL {
            let path = dir.join(format!("{}.conf", s.name()));
            let c = Config::from_file(s.schema(), &path, &[]).unwrap();
            assert_eq!(c, Config::defaults(s.schema()), "{s}");
        }
    }

    #[test]
    fn schemas_have_unique_keys() {
        for s in Scenario::ALL {
            let mut keys: Vec<_> = s.schema().iter().map(|p| p.key).collect();
            keys.sort_unstable();
            let n = keys.len();
            keys.dedup();
            assert_eq!(keys.len(), n, "{s}");
        }
    }
}
