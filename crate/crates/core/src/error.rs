use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has zero norm")]
    ZeroField,

    #[error("all samples are masked")]
    EmptyField,

    #[error("malformed VXF data at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("truncated VXF payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-integer winding: resolved phase {total} rad is {excess:.3e} rad from the nearest multiple of 2π")]
    NonIntegerWinding { total: f64, excess: f64 },

    #[error("loop crosses masked samples ({fraction:.2}% masked) and no winding fallback applies")]
    MaskedLoop { fraction: f64 },

    #[error("loop sample at ({x}, {y}) lies outside the grid")]
    OutsideGrid { x: f64, y: f64 },

    #[error("quadrature did not converge: {0}")]
    NotConverged(String),

    #[error("radial profile is not normalized: ∫|η|²d³k = {0}")]
    Unnormalized(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Non-fatal conditions reported alongside a result.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Cone angle or waist outside the comfortable paraxial range.
    ParaxialValidity { theta_p: Option<f64>, w0: f64 },
    /// Bessel-Gaussian beam with p = 0 and m ≠ 0 carries unbounded transverse kinetic energy.
    DivergentKineticEnergy { m: i32 },
    /// Fraction of the slice norm found inside the guard band after a propagation step.
    BorderEnergy { step: usize, fraction: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::ParaxialValidity { theta_p: Some(t), w0 } => write!(
                f,
                "paraxial validity questionable (theta_p = {t:.4} rad, w0 = {w0} lambda0)"
            ),
            Warning::ParaxialValidity { theta_p: None, w0 } => {
                write!(f, "paraxial validity questionable (w0 = {w0} lambda0)")
            }
            Warning::DivergentKineticEnergy { m } => write!(
                f,
                "Bessel-Gaussian with p = 0 and m = {m}: transverse kinetic energy diverges on axis"
            ),
            Warning::BorderEnergy { step, fraction } => write!(
                f,
                "step {step}: {fraction:.3e} of the norm lies in the guard band (aliasing risk)"
            ),
        }
    }
}
