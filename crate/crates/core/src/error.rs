use thiserror::Error;

/// Errors raised by the solvers and checks in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("perturbation too large, bistability may fail (|delta| = {delta} >= delta0 = {delta0})")]
    PerturbationTooLarge { delta: f64, delta0: f64 },

    #[error("time step {dt:e} violates the {bound} bound {limit:e}")]
    Cfl {
        dt: f64,
        limit: f64,
        bound: &'static str,
    },

    #[error("shooting for the wave speed did not converge: bracket [{lo}, {hi}] ({detail})")]
    WaveShooting { lo: f64, hi: f64, detail: String },

    #[error("interface dragged into boundary margin: marker {index} at ({x}, {y})")]
    InterfaceLeftDomain { index: usize, x: f64, y: f64 },

    #[error("interface self-intersection detected at t = {t}")]
    SelfIntersection { t: f64 },

    #[error("no developed layer: level set {level} is empty")]
    NoLayer { level: f64 },

    #[error("bound violated after step at t = {t}: value {value} outside [0, {upper}]")]
    BoundViolation { t: f64, value: f64, upper: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
