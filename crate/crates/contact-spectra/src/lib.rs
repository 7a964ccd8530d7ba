//! Numerical workbench for the spectral problem of a quantum particle coupled
//! to a harmonic oscillator through a zero-range (contact) interaction.
//!
//! The Hamiltonian acts on `L²(ℝ^d × ℝ^d)` for `d = 1, 2, 3`:
//!
//! ```text
//!     H = -½ Δ_x - ½ Δ_y + ½ ω² y² - (d ω / 2)  +  "α δ(x - y)"
//! ```
//!
//! where `x` is the free particle coordinate, `y` the oscillator coordinate,
//! and the zero-range coupling lives on the coincidence hyperplane `x = y`.
//! The oscillator zero-point energy is subtracted, so the free threshold sits
//! at zero and bound states appear at energies `-E < 0`.
//!
//! In one dimension the interaction is an honest form perturbation and the
//! bound-state condition reduces to a Birman–Schwinger equation
//! `q + α K^E q = 0` for a charge `q` living on the hyperplane, with `K^λ`
//! the restriction of the free resolvent kernel to the hyperplane.  In two
//! and three dimensions the restriction diverges on the diagonal and must be
//! renormalized: the charge operator becomes `Γ^λ = a^λ + Γ₀^λ` with a
//! multiplicative renormalized diagonal `a^λ(x)` and a positive "difference"
//! form built from the off-diagonal Green kernel.  Bound states of the full
//! Hamiltonian at `-E` correspond to eigenvalue branches crossing the
//! coupling: `1 + α μ_n(E) = 0` in 1D, `γ_n(E) = -α` in 2D/3D.
//!
//! The crate is organized bottom-up:
//!
//! * [`quadrature`] — Gauss–Legendre rules and graded rules for the
//!   ν-integral representation of the oscillator Green function
//! * [`special`] — scaled modified Bessel functions and small helpers
//! * [`kernels`] — pointwise evaluation of the heat/Green/charge kernels and
//!   the renormalized diagonals
//! * [`operators`] — grids, discretized charge operators, and the symmetric
//!   eigensolver
//! * [`spectra`] — secular solvers, bound states, eigenfunctions, densities,
//!   resolvent action
//! * [`verify`] — self-check routines producing machine-readable reports
//!
//! All numerical routines return [`Result`] and never panic on bad input.

pub mod kernels;
pub mod operators;
pub mod quadrature;
pub mod special;
pub mod spectra;
pub mod verify;

/// Errors produced by the numerical routines.
///
/// Every fallible function in the crate reports one of these variants rather
/// than panicking;  the CLI maps them onto exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter is outside the documented domain (wrong sign, NaN, empty
    /// grid, mismatched lengths, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A rule or scan would need more nodes/steps than the configured budget.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// A user-supplied or internal integrand produced NaN/∞.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// An iterative procedure (Newton, Jacobi sweeps, bisection) failed to
    /// reach its tolerance within the iteration cap.
    #[error("did not converge: {0}")]
    NoConvergence(String),

    /// The requested combination of parameters is recognised but not
    /// supported by this implementation.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand used throughout the crate.
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

/// Checks that a floating-point argument is finite, returning it on success.
pub(crate) fn require_finite(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {value}")))
    }
}

/// Checks that a floating-point argument is finite and strictly positive.
pub(crate) fn require_positive(name: &str, value: f64) -> Result<f64> {
    require_finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(format!("{name} must be > 0, got {value}")))
    }
}

/// Spatial dimension of the particle/oscillator pair. Only 1, 2, 3 occur.
pub fn check_dimension(d: u32) -> Result<u32> {
    match d {
        1 | 2 | 3 => Ok(d),
        _ => Err(Error::invalid(format!("dimension must be 1, 2 or 3, got {d}"))),
    }
}
