use nalgebra::{DMatrix, DVector};

use super::{residuals_of, LcpError, LcpProblem, LcpSolution, LcpStatus};
use crate::scalar::Real;

/// Largest `n` accepted by [`brute_force_solve`] (4096 bases).
pub const BRUTE_FORCE_CAP: usize = 12;

/// Enumerates all `2^n` complementary bases and returns every basic solution
/// with `z >= 0` and `w >= 0`. An empty result means no basic solution exists.
pub fn brute_force_solve<T: Real>(problem: &LcpProblem<T>) -> Result<Vec<LcpSolution<T>>, LcpError> {
    brute_force_solve_with(problem, BRUTE_FORCE_CAP, T::lit(T::DEFAULT_TOL))
}

pub fn brute_force_solve_with<T: Real>(
    problem: &LcpProblem<T>,
    cap: usize,
    tol: T,
) -> Result<Vec<LcpSolution<T>>, LcpError> {
    let n = problem.n();
    if n > cap {
        return Err(LcpError::CapExceeded { n, cap });
    }
    let m = problem.m();
    let q = problem.q();
    let scale = T::one() + q.amax() + m.amax();
    let mut found: Vec<LcpSolution<T>> = Vec::new();

    for mask in 0u32..(1u32 << n) {
        let basic: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mut z = DVector::zeros(n);
        if !basic.is_empty() {
            let k = basic.len();
            let sub = DMatrix::from_fn(k, k, |a, b| m[(basic[a], basic[b])]);
            let rhs = DVector::from_fn(k, |a, _| -q[basic[a]]);
            let Some(zs) = sub.lu().solve(&rhs) else {
                continue;
            };
            if zs.iter().any(|x| !x.is_finite()) {
                continue;
            }
            for (a, &i) in basic.iter().enumerate() {
                z[i] = zs[a];
            }
        }
        let w = problem.slack(&z);
        let feasible = z.iter().all(|&x| x >= -tol)
            && w.iter().all(|&x| x >= -tol)
            && basic.iter().all(|&i| w[i].abs() <= tol * scale);
        if !feasible {
            continue;
        }
        if found.iter().any(|s| (&s.z - &z).amax() <= tol * scale) {
            continue;
        }
        let residuals = residuals_of(&z, &w, &w);
        found.push(LcpSolution {
            z,
            w,
            status: LcpStatus::Solved,
            pivots: 0,
            residuals,
        });
    }
    Ok(found)
}
