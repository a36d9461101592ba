use thiserror::Error;

use crate::series::Var;

/// Errors from the polynomial and series substrate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("variable mismatch: {0} vs {1}")]
    VarMismatch(Var, Var),
    #[error("gamma-series order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("cannot evaluate a term x^{0} at x = 0")]
    PoleAtZero(i32),
    #[error("jet expanded at {expected} cannot be evaluated at {got}")]
    JetPoint { expected: String, got: String },
    #[error("jet exhausted: too many derivatives for its length")]
    JetExhausted,
    #[error("not a decimal number: {0:?}")]
    Parse(String),
}

/// Errors from the iteration engine and its root finder.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AimError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("no root in [{lo}, {hi}]: delta({lo}) = {delta_lo}, delta({hi}) = {delta_hi}")]
    RootNotFound {
        lo: String,
        hi: String,
        delta_lo: String,
        delta_hi: String,
    },
    #[error("only {found} roots in the scan window, rank {rank} requested")]
    RankNotFound { rank: usize, found: usize },
    #[error("energy is not an eigenvalue at depth {depth}: residual {residual}")]
    NotAnEigenvalue { depth: usize, residual: String },
    #[error("no terminating polynomial of degree <= {max_degree} satisfies the generator")]
    NoPolynomialSolution { max_degree: usize },
}

/// Errors from the closed-form formulas.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error("Pochhammer ({sigma})_{n} crosses a pole at index {index}")]
    PochhammerPole { sigma: String, n: usize, index: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("argument outside the domain: {0}")]
    Domain(String),
}

/// Errors from the DKP model builders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("supercritical charge: alpha*Z = {gamma} >= J + 1/2 = {limit}")]
    Supercritical { gamma: String, limit: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Aim(#[from] AimError),
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Errors from the order-by-order perturbative solve.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerturbationError {
    #[error("expansion order {expansion} does not match problem order {problem}")]
    OrderMismatch { expansion: usize, problem: usize },
    #[error("order-0 root not found at depth {depth}: {source}")]
    OrderZero { depth: usize, source: AimError },
    #[error("order {order} is degenerate at depth {depth}: slope {slope}")]
    Degenerate { order: usize, depth: usize, slope: String },
    #[error(transparent)]
    Aim(#[from] AimError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors from the finite-difference oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("grid size {0} below the minimum of 200")]
    GridTooSmall(usize),
    #[error("invalid domain [{0}, {1}]")]
    InvalidDomain(f64, f64),
    #[error("requested {requested} eigenvalues from a {size}x{size} operator")]
    TooMany { requested: usize, size: usize },
    #[error("self-consistent iteration diverged at gamma = {gamma}; last iterates {trace:?}")]
    FixedPointDiverged { gamma: f64, trace: Vec<f64> },
    #[error("least-squares fit failed: {0}")]
    Fit(String),
    #[error("potential is not finite at r = {0}")]
    NonFinite(f64),
}
