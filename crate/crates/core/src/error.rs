use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("site {0:?} not in Λ")]
    SiteNotActive((i64, i64)),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid lattice: {0}")]
    Lattice(String),
    #[error("pinning suspected: c = {speed:.3e}, plateau fraction {plateau:.3}")]
    Pinning { speed: f64, plateau: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("kernel not simple at this resolution (σ₂/σ_max = {0:.3e})")]
    KernelNotSimple(f64),
    #[error("branch tracking lost at ω = {omega} (correlation {correlation:.3})")]
    BranchLost { omega: f64, correlation: f64 },
    #[error("non-finite value at site {site:?}, t = {time}")]
    NonFinite { site: (i64, i64), time: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{scenario}: {source}")]
    Scenario { scenario: String, source: Box<Error> },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
