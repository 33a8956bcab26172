//! Error type shared by all modules.

use thiserror::Error;

/// Everything that can go wrong while building graphs or solving spectra.
///
/// Messages name the violated precondition or invariant so that CLI failure
/// output is self-explanatory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-positive length: bond {bond} has L = {value}")]
    NonPositiveLength { bond: usize, value: f64 },

    #[error("lambda >= 1 (tunneling excluded): bond {bond} has lambda = {value}")]
    TunnelingExcluded { bond: usize, value: f64 },

    #[error("non-positive density or tension: {what} = {value}")]
    NonPositiveStringParameter { what: &'static str, value: f64 },

    #[error("non-unitary scattering matrix at vertex {vertex}: max-norm deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    NonUnitaryScattering {
        vertex: String,
        deviation: f64,
        tolerance: f64,
    },

    #[error("dangling bond: vertex {vertex} referenced by a bond is not declared")]
    DanglingBond { vertex: String },

    #[error("k <= 0: the scattering matrix is defined for positive momenta only")]
    NonPositiveMomentum,

    #[error("graph exceeds expansion cap: 2*N_B = {directed} directed bonds > cap {cap}")]
    ExpansionCapExceeded { directed: usize, cap: usize },

    #[error("spectral determinant not reducible to real form: {reason} (residual {residual:.3e})")]
    NotReducible { reason: String, residual: f64 },

    #[error("polynomial is not regular: characteristic sum alpha = {alpha} >= 1")]
    NotRegular { alpha: f64 },

    #[error("no finite irregularity degree: some frequency ratio equals 1 while alpha >= 1")]
    NoFiniteDegree,

    #[error("cell contract violation at level {level}, cell {cell}: no sign change on [{lo:.12e}, {hi:.12e}] (f(lo) = {f_lo:.3e}, f(hi) = {f_hi:.3e})")]
    CellContract {
        level: u32,
        cell: i64,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("fixed-point iteration exceeded {max_iters} steps (alpha = {alpha}); regularity margin too thin")]
    FixedPointDiverged { max_iters: usize, alpha: f64 },

    #[error("orbit enumeration cap exceeded: estimated {estimate} closed walks > cap {cap}")]
    OrbitCapExceeded { estimate: u128, cap: u128 },

    #[error("orbit/matrix trace mismatch at l = {l}: |orbit sum - matrix trace| = {deviation:.3e} > 1e-9")]
    TraceMismatch { l: usize, deviation: f64 },

    #[error("eigenphase solver failure: Schur decomposition did not converge for a {dim}x{dim} matrix")]
    EigenphaseFailure { dim: usize },

    #[error("quadrature nonconvergence: {what}")]
    QuadratureFailure { what: String },

    #[error("expansion requires a regular graph (m = 0): found m = {m}")]
    ExpansionNeedsRegular { m: u32 },

    #[error("assumption violated for the energy expansion: {which}")]
    AssumptionViolated { which: String },

    #[error("Lagrange validity violation: |w| >= |(x - a)/phi(x)| at sample x = {x}")]
    LagrangeValidity { x: f64 },

    #[error("|r| >= 1: reflection coefficient must lie in (-1, 1), got {r}")]
    ReflectionOutOfRange { r: f64 },

    #[error("unsorted input: roots must be strictly increasing at index {index}")]
    UnsortedRoots { index: usize },

    #[error("negative s: spacing densities are defined for s >= 0")]
    NegativeSpacing,

    #[error("family construction failure at grid point ({p1}, {p2}): {reason}")]
    FamilyConstruction { p1: f64, p2: f64, reason: String },

    #[error("config parse error at line {line}: {reason}")]
    ConfigParse { line: usize, reason: String },

    #[error("config schema violation: {reason}")]
    ConfigSchema { reason: String },

    #[error("hierarchy window did not bracket the requested indices even after padding retries")]
    WindowExhausted,

    #[error("requested root range is empty or inverted: {lo}..{hi}")]
    BadRange { lo: i64, hi: i64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
