//! Linear complementarity problems.
//!
//! `LCP(M, q)`: find `z >= 0` such that `w = M z + q >= 0` and `z . w = 0`.
//!
//! The production solver is [`solve_lemke`]; [`brute_force_solve`] enumerates
//! complementary bases and exists to cross-check it on small instances.

mod brute;
mod copositive;
mod lemke;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

pub use brute::{brute_force_solve, brute_force_solve_with, BRUTE_FORCE_CAP};
pub use copositive::{copositivity_certificate, CopositivityReport};
pub use lemke::solve_lemke;

#[derive(Debug, Error)]
pub enum LcpError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("problem data contains NaN or infinite entries")]
    NonFinite,
    #[error("problem size must be at least 1")]
    Empty,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("brute-force enumeration capped at n = {cap}, got n = {n}")]
    CapExceeded { n: usize, cap: usize },
    #[error("terminal basis failed verification (min_z = {:.3e}, min_w = {:.3e}, z.w = {:.3e})", .0.residuals.min_z, .0.residuals.min_w, .0.residuals.complementarity)]
    VerificationFailed(Box<FailureDump>),
}

/// A square LCP instance.
#[derive(Clone, Debug, PartialEq)]
pub struct LcpProblem<T: Real> {
    m: DMatrix<T>,
    q: DVector<T>,
}

impl<T: Real> LcpProblem<T> {
    pub fn new(m: DMatrix<T>, q: DVector<T>) -> Result<Self, LcpError> {
        if m.nrows() != m.ncols() {
            return Err(LcpError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if q.len() != m.nrows() {
            return Err(LcpError::DimensionMismatch {
                expected: m.nrows(),
                got: q.len(),
            });
        }
        if m.nrows() == 0 {
            return Err(LcpError::Empty);
        }
        if m.iter().chain(q.iter()).any(|x| !x.is_finite()) {
            return Err(LcpError::NonFinite);
        }
        Ok(Self { m, q })
    }

    /// Convenience constructor from row-major nested slices.
    pub fn from_rows(rows: &[&[f64]], q: &[f64]) -> Result<Self, LcpError> {
        let n = rows.len();
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LcpError::NotSquare { rows: n, cols: 0 });
        }
        let m = DMatrix::from_fn(n, cols, |i, j| T::lit(rows[i][j]));
        let q = DVector::from_iterator(q.len(), q.iter().map(|&x| T::lit(x)));
        Self::new(m, q)
    }

    /// The zero-size problem produced by an empty contact set. Its only
    /// solution is the empty vector.
    pub(crate) fn empty() -> Self {
        Self {
            m: DMatrix::zeros(0, 0),
            q: DVector::zeros(0),
        }
    }

    pub fn m(&self) -> &DMatrix<T> {
        &self.m
    }

    pub fn q(&self) -> &DVector<T> {
        &self.q
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// `w = M z + q`.
    pub fn slack(&self, z: &DVector<T>) -> DVector<T> {
        &self.m * z + &self.q
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LcpStatus {
    Solved,
    /// Lemke left along a secondary ray; the problem has no solution the
    /// method can reach (for copositive-plus data: no solution at all).
    RayTermination,
    PivotLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Residuals {
    pub min_z: f64,
    pub min_w: f64,
    /// `z . w`
    pub complementarity: f64,
    /// `|w - (M z + q)|_inf` for the reported pair.
    pub linear: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LcpSolution<T: Real> {
    pub z: DVector<T>,
    pub w: DVector<T>,
    pub status: LcpStatus,
    pub pivots: usize,
    pub residuals: Residuals,
}

impl<T: Real> LcpSolution<T> {
    pub fn is_solved(&self) -> bool {
        self.status == LcpStatus::Solved
    }
}

/// Tolerances and pivoting limits for [`solve_lemke`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub feas_tol: f64,
    pub comp_tol: f64,
    pub lin_tol: f64,
    pub pivot_tol: f64,
    /// `None` means `50 * n`.
    pub max_pivots: Option<usize>,
    pub lexicographic: bool,
    /// Rebuild the tableau from the original data after every pivot instead
    /// of relying on the running elimination updates.
    #[serde(default)]
    pub refactor: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::for_scalar::<f64>()
    }
}

impl SolverConfig {
    pub fn for_scalar<T: Real>() -> Self {
        Self {
            feas_tol: T::DEFAULT_TOL,
            comp_tol: T::DEFAULT_TOL,
            lin_tol: T::DEFAULT_TOL,
            pivot_tol: T::PIVOT_TOL,
            max_pivots: None,
            lexicographic: true,
            refactor: false,
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), LcpError> {
        let tols = [self.feas_tol, self.comp_tol, self.lin_tol, self.pivot_tol];
        if tols.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(LcpError::InvalidConfig(
                "tolerances must be finite and non-negative".into(),
            ));
        }
        if let Some(p) = self.max_pivots {
            if p < n.max(1) {
                return Err(LcpError::InvalidConfig(format!(
                    "max_pivots = {p} is below the problem size {n}"
                )));
            }
        }
        Ok(())
    }

    pub fn pivot_limit(&self, n: usize) -> usize {
        self.max_pivots.unwrap_or(50 * n.max(1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verification {
    pub valid: bool,
    pub residuals: Residuals,
}

/// Checks `z >= -eps_feas`, `w >= -eps_feas` and `|z . w| <= eps_comp` with
/// `w = M z + q` recomputed from the problem data.
pub fn verify_solution<T: Real>(
    problem: &LcpProblem<T>,
    z: &DVector<T>,
    config: &SolverConfig,
) -> Result<Verification, LcpError> {
    if z.len() != problem.n() {
        return Err(LcpError::DimensionMismatch {
            expected: problem.n(),
            got: z.len(),
        });
    }
    let w = problem.slack(z);
    let residuals = residuals_of(z, &w, &w);
    Ok(Verification {
        valid: residuals_ok(&residuals, config),
        residuals,
    })
}

pub(crate) fn residuals_ok(r: &Residuals, config: &SolverConfig) -> bool {
    r.min_z >= -config.feas_tol
        && r.min_w >= -config.feas_tol
        && r.complementarity.abs() <= config.comp_tol
        && r.linear <= config.lin_tol
}

/// `w_reported` is what the caller will hand out; `w_exact` is `M z + q`.
pub(crate) fn residuals_of<T: Real>(
    z: &DVector<T>,
    w_reported: &DVector<T>,
    w_exact: &DVector<T>,
) -> Residuals {
    let min = |v: &DVector<T>| {
        v.iter()
            .map(|x| x.to_f64_lossy())
            .fold(f64::INFINITY, f64::min)
    };
    let linear = w_reported
        .iter()
        .zip(w_exact.iter())
        .map(|(a, b)| (*a - *b).abs().to_f64_lossy())
        .fold(0.0, f64::max);
    Residuals {
        min_z: if z.is_empty() { 0.0 } else { min(z) },
        min_w: if w_reported.is_empty() { 0.0 } else { min(w_reported) },
        complementarity: z.dot(w_reported).to_f64_lossy(),
        linear,
    }
}

/// JSON-friendly snapshot of a problem and candidate answer, written when a
/// result cannot be certified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureDump {
    pub m: Vec<Vec<f64>>,
    pub q: Vec<f64>,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub residuals: Residuals,
}

impl FailureDump {
    pub fn new<T: Real>(problem: &LcpProblem<T>, z: &DVector<T>) -> Self {
        let w = problem.slack(z);
        let to_vec = |v: &DVector<T>| v.iter().map(|x| x.to_f64_lossy()).collect::<Vec<_>>();
        Self {
            m: problem
                .m()
                .row_iter()
                .map(|r| r.iter().map(|x| x.to_f64_lossy()).collect())
                .collect(),
            q: to_vec(problem.q()),
            z: to_vec(z),
            residuals: residuals_of(z, &w, &w),
            w: to_vec(&w),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dump serializes")
    }
}
