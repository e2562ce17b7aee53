//! Lemke's complementary pivoting method with an all-ones covering vector.
//!
//! The tableau stores `B^-1 [I | -M | -d | q]` for the current basis `B`.
//! Variable indices: `w_i = i`, `z_i = n + i`, artificial `z0 = 2n`.

use nalgebra::{DMatrix, DVector};

use super::{
    residuals_of, residuals_ok, FailureDump, LcpError, LcpProblem, LcpSolution, LcpStatus,
    SolverConfig,
};
use crate::scalar::Real;

struct Tableau<T: Real> {
    n: usize,
    data: DMatrix<T>,
    basis: Vec<usize>,
}

impl<T: Real> Tableau<T> {
    fn new(problem: &LcpProblem<T>) -> Self {
        let n = problem.n();
        let mut data = DMatrix::zeros(n, 2 * n + 2);
        for i in 0..n {
            data[(i, i)] = T::one();
            for j in 0..n {
                data[(i, n + j)] = -problem.m()[(i, j)];
            }
            data[(i, 2 * n)] = -T::one();
            data[(i, 2 * n + 1)] = problem.q()[i];
        }
        Self {
            n,
            data,
            basis: (0..n).collect(),
        }
    }

    fn z0(&self) -> usize {
        2 * self.n
    }

    fn rhs(&self, row: usize) -> T {
        self.data[(row, 2 * self.n + 1)]
    }

    fn complement(&self, var: usize) -> usize {
        if var < self.n {
            var + self.n
        } else {
            var - self.n
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.data[(row, col)];
        let cols = self.data.ncols();
        for j in 0..cols {
            self.data[(row, j)] /= p;
        }
        for i in 0..self.n {
            if i == row {
                continue;
            }
            let f = self.data[(i, col)];
            if f != T::zero() {
                for j in 0..cols {
                    let v = self.data[(row, j)];
                    self.data[(i, j)] -= f * v;
                }
                // exact zero in the pivot column keeps later ratio tests clean
                self.data[(i, col)] = T::zero();
            }
        }
        self.basis[row] = col;
    }

    /// Keeps the rows of `cands` whose key `num(row) / den(row)` is minimal,
    /// comparing with a relative tolerance.
    fn keep_min(&self, cands: &mut Vec<usize>, key: impl Fn(usize) -> T, tol: T) {
        let best = cands
            .iter()
            .map(|&r| key(r))
            .fold(None, |acc: Option<T>, k| match acc {
                Some(a) if a <= k => Some(a),
                _ => Some(k),
            });
        if let Some(best) = best {
            let slack = tol * (T::one() + best.abs());
            cands.retain(|&r| key(r) <= best + slack);
        }
    }

    /// Rows of `B^-1` sit in the `w` block because the original `w` columns
    /// form the identity.
    fn lex_refine(&self, cands: &mut Vec<usize>, col: usize, tol: T) {
        for j in 0..self.n {
            if cands.len() <= 1 {
                break;
            }
            self.keep_min(cands, |r| self.data[(r, j)] / self.data[(r, col)], tol);
        }
    }

    fn leaving_row(&self, col: usize, config: &SolverConfig) -> Option<usize> {
        let ptol = T::lit(config.pivot_tol);
        let mut cands: Vec<usize> = (0..self.n)
            .filter(|&r| self.data[(r, col)] > ptol)
            .collect();
        if cands.is_empty() {
            return None;
        }
        self.keep_min(&mut cands, |r| self.rhs(r) / self.data[(r, col)], ptol);
        if let Some(&r) = cands.iter().find(|&&r| self.basis[r] == self.z0()) {
            return Some(r);
        }
        if config.lexicographic {
            self.lex_refine(&mut cands, col, ptol);
        }
        cands.into_iter().min_by_key(|&r| self.basis[r])
    }

    /// Entering pivot for `z0`: the row attaining the most negative
    /// `q_i / d_i`, ties broken lexicographically on `(q_i, e_i) / d_i`.
    fn initial_row(&self, config: &SolverConfig) -> usize {
        let ptol = T::lit(config.pivot_tol);
        let mut cands: Vec<usize> = (0..self.n).collect();
        // column entries are -d_i = -1
        self.keep_min(&mut cands, |r| self.rhs(r), ptol);
        if config.lexicographic {
            for j in 0..self.n {
                if cands.len() <= 1 {
                    break;
                }
                self.keep_min(&mut cands, |r| self.data[(r, j)], ptol);
            }
        }
        cands[0]
    }

    fn extract_z(&self) -> DVector<T> {
        let mut z = DVector::zeros(self.n);
        for (row, &var) in self.basis.iter().enumerate() {
            if var >= self.n && var < 2 * self.n {
                z[var - self.n] = self.rhs(row);
            }
        }
        z
    }

    fn z0_value(&self) -> T {
        self.basis
            .iter()
            .position(|&v| v == self.z0())
            .map_or(T::zero(), |r| self.rhs(r))
    }

    fn basis_matrix(&self, problem: &LcpProblem<T>) -> DMatrix<T> {
        let n = self.n;
        let mut b = DMatrix::zeros(n, n);
        for (k, &var) in self.basis.iter().enumerate() {
            if var < n {
                b[(var, k)] = T::one();
            } else if var < 2 * n {
                for i in 0..n {
                    b[(i, k)] = -problem.m()[(i, var - n)];
                }
            } else {
                for i in 0..n {
                    b[(i, k)] = -T::one();
                }
            }
        }
        b
    }

    /// Rebuilds `B^-1 [I | -M | -d | q]` from the original data, discarding
    /// the error accumulated by the elimination updates. Keeps the updated
    /// tableau if the basis matrix cannot be factored.
    fn refactor(&mut self, problem: &LcpProblem<T>) {
        let fresh = Tableau::new(problem);
        let lu = self.basis_matrix(problem).lu();
        if let Some(data) = lu.solve(&fresh.data) {
            if data.iter().all(|x| x.is_finite()) {
                self.data = data;
                let n = self.n;
                // basic columns are unit vectors by construction
                for (row, &var) in self.basis.iter().enumerate() {
                    for i in 0..n {
                        self.data[(i, var)] = if i == row { T::one() } else { T::zero() };
                    }
                }
            }
        }
    }

    /// Re-solves the terminal basis against the original data to shed
    /// accumulated elimination error.
    fn refined_z(&self, problem: &LcpProblem<T>) -> Option<DVector<T>> {
        let n = self.n;
        let mut b = DMatrix::zeros(n, n);
        for (k, &var) in self.basis.iter().enumerate() {
            if var < n {
                b[(var, k)] = T::one();
            } else if var < 2 * n {
                for i in 0..n {
                    b[(i, k)] = -problem.m()[(i, var - n)];
                }
            } else {
                return None;
            }
        }
        let xb = b.lu().solve(problem.q())?;
        if xb.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let mut z = DVector::zeros(n);
        for (k, &var) in self.basis.iter().enumerate() {
            if var >= n {
                z[var - n] = xb[k];
            }
        }
        Some(z)
    }
}

/// Further attempts after an uncertified first run, as (pivot tolerance
/// factor, refactor every pivot).
const FALLBACKS: [(f64, bool); 4] = [(1e2, false), (1e4, false), (1.0, true), (1e6, true)];

/// Solves `LCP(M, q)` by Lemke's method.
///
/// Returns `Ok` with status `Solved` only for a certified answer. Secondary-ray
/// exits and pivot exhaustion are reported through the status, not as errors;
/// the returned `z` is then the last iterate.
///
/// Structurally degenerate data (duplicated rows, nearly coincident contacts)
/// can leave round-off sized entries that pass the pivot test, wrecking the
/// basis or ending on a spurious ray. When the first run is not certified it
/// is repeated with the settings in `FALLBACKS`; the first certified result
/// wins, otherwise the first run's outcome is returned.
pub fn solve_lemke<T: Real>(
    problem: &LcpProblem<T>,
    config: &SolverConfig,
) -> Result<LcpSolution<T>, LcpError> {
    config.validate(problem.n())?;
    let first = run_lemke(problem, config);
    if matches!(&first, Ok(s) if s.is_solved()) {
        return first;
    }
    for (factor, refactor) in FALLBACKS {
        if factor == 1.0 && refactor == config.refactor {
            continue;
        }
        let retry = SolverConfig {
            pivot_tol: config.pivot_tol * factor,
            refactor,
            ..config.clone()
        };
        if let Ok(s) = run_lemke(problem, &retry) {
            if s.is_solved() {
                return Ok(s);
            }
        }
    }
    first
}

fn run_lemke<T: Real>(
    problem: &LcpProblem<T>,
    config: &SolverConfig,
) -> Result<LcpSolution<T>, LcpError> {
    let n = problem.n();

    if problem.q().iter().all(|&x| x >= T::zero()) {
        let z = DVector::zeros(n);
        let w = problem.q().clone();
        let residuals = residuals_of(&z, &w, &w);
        return Ok(LcpSolution {
            z,
            w,
            status: LcpStatus::Solved,
            pivots: 0,
            residuals,
        });
    }

    let mut tab = Tableau::new(problem);
    let z0 = tab.z0();
    let limit = config.pivot_limit(n);

    let row = tab.initial_row(config);
    let mut leaving = tab.basis[row];
    tab.pivot(row, z0);
    let mut pivots = 1;

    let status = loop {
        let entering = tab.complement(leaving);
        let Some(row) = tab.leaving_row(entering, config) else {
            break LcpStatus::RayTermination;
        };
        if pivots >= limit {
            break LcpStatus::PivotLimit;
        }
        leaving = tab.basis[row];
        tab.pivot(row, entering);
        if config.refactor {
            tab.refactor(problem);
        }
        pivots += 1;
        if leaving == z0 {
            break LcpStatus::Solved;
        }
    };

    if status != LcpStatus::Solved {
        // a degenerate exit with z0 already at round-off level can still
        // carry a valid answer
        if tab.z0_value().to_f64_lossy() <= config.feas_tol {
            if let Some(s) = certify(problem, tab.extract_z(), &tab, config, pivots) {
                return Ok(s);
            }
        }
        let z = tab.extract_z();
        let w = problem.slack(&z);
        let mut residuals = residuals_of(&z, &w, &w);
        residuals.linear = tab.z0_value().to_f64_lossy();
        return Ok(LcpSolution {
            z,
            w,
            status,
            pivots,
            residuals,
        });
    }

    let tableau_z = tab.extract_z();
    let mut first: Option<DVector<T>> = None;
    for candidate in [tab.refined_z(problem), Some(tableau_z)].into_iter().flatten() {
        if let Some(s) = certify(problem, candidate.clone(), &tab, config, pivots) {
            return Ok(s);
        }
        first.get_or_insert_with(|| clean(candidate, config));
    }
    let z = first.expect("at least the tableau iterate exists");
    Err(LcpError::VerificationFailed(Box::new(FailureDump::new(
        problem, &z,
    ))))
}

fn certify<T: Real>(
    problem: &LcpProblem<T>,
    candidate: DVector<T>,
    tab: &Tableau<T>,
    config: &SolverConfig,
    pivots: usize,
) -> Option<LcpSolution<T>> {
    let z = clean(candidate, config);
    let w = clean_slack(problem, &z, tab, config);
    let exact = problem.slack(&z);
    let r = residuals_of(&z, &w, &exact);
    residuals_ok(&r, config).then_some(LcpSolution {
        z,
        w,
        status: LcpStatus::Solved,
        pivots,
        residuals: r,
    })
}

/// Clamps tiny negative round-off to zero.
fn clean<T: Real>(mut z: DVector<T>, config: &SolverConfig) -> DVector<T> {
    let tol = T::lit(config.feas_tol);
    for x in z.iter_mut() {
        if *x < T::zero() && *x >= -tol {
            *x = T::zero();
        }
    }
    z
}

/// `w = M z + q`, with the basic-`z` entries (whose `w` is nonbasic, hence
/// exactly zero in the pivoting solution) snapped to zero when they agree to
/// tolerance.
fn clean_slack<T: Real>(
    problem: &LcpProblem<T>,
    z: &DVector<T>,
    tab: &Tableau<T>,
    config: &SolverConfig,
) -> DVector<T> {
    let n = problem.n();
    let mut w = problem.slack(z);
    let tol = T::lit(config.lin_tol);
    for &var in &tab.basis {
        if var >= n && var < 2 * n {
            let i = var - n;
            if w[i].abs() <= tol {
                w[i] = T::zero();
            }
        }
    }
    for x in w.iter_mut() {
        if *x < T::zero() && *x >= -T::lit(config.feas_tol) {
            *x = T::zero();
        }
    }
    w
}
