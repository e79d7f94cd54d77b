//! Covariance-level toolkit for deciding whether a two-oscillator Gaussian
//! probe was degraded by two independent classical stochastic fields (local
//! noise) or by a single shared field (common noise).
//!
//! The crate provides:
//!
//! - [`gaussian`]: two-mode covariance matrices and their scalar functionals
//!   (physicality, purity, energy, entanglement, standard form, Williamson
//!   and Bloch-Messiah decompositions);
//! - [`states`]: the probe families (squeezed thermal, single-mode-squeezed
//!   mixed with vacuum, and its standard form) plus random standard-form
//!   states at fixed purity;
//! - [`channels`]: Ornstein-Uhlenbeck noise integrals and the local/common
//!   Gaussian dynamical maps;
//! - [`discrimination`]: joint-homodyne strip discrimination and the
//!   quantum bound suite (fidelity bounds, Chernoff bound);
//! - [`fock`]: a truncated Fock-space oracle for cross-validating the
//!   Gaussian formulas;
//! - [`stochastic`]: Monte Carlo validation of the analytic channels by
//!   direct field-trajectory simulation;
//! - [`experiments`]: deterministic CSV experiment drivers backing the CLI.
//!
//! Conventions, fixed globally: quadrature ordering `(x1, p1, x2, p2)`,
//! `X = (a + a†)/√2`, `P = (a − a†)/(i√2)`, vacuum variance 1/2.

pub mod channels;
pub mod discrimination;
pub mod experiments;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod states;
pub mod stochastic;

pub use gaussian::CovarianceMatrix;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not symmetric: max |m_ij - m_ji| = {0:.3e}")]
    NotSymmetric(f64),
    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    BadShape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("covariance matrix is unphysical: smallest symplectic eigenvalue {nu_min} < 1/2")]
    Unphysical { nu_min: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("determinant must be positive, got {0:.6e}")]
    NonPositiveDeterminant(f64),
    #[error("singular local block in standard-form reduction (zero-variance quadrature)")]
    SingularLocalBlock,
    #[error(
        "quadrature did not converge: requested rel tol {requested:.1e}, achieved {achieved:.1e}"
    )]
    QuadratureNonConvergence { requested: f64, achieved: f64 },
    #[error("noise matrix is not positive semidefinite: min eigenvalue {0:.3e}")]
    NoiseNotPsd(f64),
    #[error("random-state sampling exhausted after {attempts} draws")]
    SamplingExhausted { attempts: usize },
    #[error(
        "Fock cutoff {cutoff} too small: trace deficit {deficit:.3e} exceeds {max_deficit:.1e}; \
         estimated required cutoff >= {suggested}"
    )]
    CutoffTooSmall {
        cutoff: usize,
        deficit: f64,
        max_deficit: f64,
        suggested: usize,
    },
    #[error("Fock cutoff mismatch: {0} vs {1}")]
    CutoffMismatch(usize, usize),
    #[error("density-matrix eigenvalue {0:.3e} is negative beyond tolerance")]
    NegativeEigenvalue(f64),
    #[error("decomposition failed: {0}")]
    Decomposition(String),
    #[error("linear algebra backend error: {0}")]
    Linalg(String),
    #[error(
        "Monte Carlo estimate too noisy: max standard error {se:.3e} exceeds requested \
         {requested:.3e}; increase trajectory count"
    )]
    InsufficientTrajectories { se: f64, requested: f64 },
    #[error("assertion failed: {0}")]
    AssertionFailed(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
