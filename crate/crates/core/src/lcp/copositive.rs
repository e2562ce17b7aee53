use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct CopositivityReport<T: Real> {
    /// No witness found. Sampling evidence only.
    pub passed: bool,
    /// `x >= 0` on the unit simplex with `x^T M x < -eps`; a proof of
    /// non-copositivity.
    pub witness: Option<DVector<T>>,
    /// Smallest quadratic form value seen.
    pub min_value: T,
    pub samples: usize,
}

/// Randomized copositivity test: simplex vertices and edge midpoints first,
/// then `trials` random points on the simplex (half of them on random faces).
pub fn copositivity_certificate<T: Real>(m: &DMatrix<T>, trials: usize, seed: u64) -> CopositivityReport<T> {
    assert_eq!(m.nrows(), m.ncols(), "copositivity needs a square matrix");
    let n = m.nrows();
    let eps = T::lit(T::DEFAULT_TOL) * (T::one() + m.amax());
    let mut report = CopositivityReport {
        passed: true,
        witness: None,
        min_value: T::max_value().unwrap_or_else(T::one),
        samples: 0,
    };
    if n == 0 {
        report.min_value = T::zero();
        return report;
    }

    let check = |x: DVector<T>, report: &mut CopositivityReport<T>| -> bool {
        let v = x.dot(&(m * &x));
        report.samples += 1;
        if v < report.min_value {
            report.min_value = v;
        }
        if v < -eps {
            report.passed = false;
            report.witness = Some(x);
            return true;
        }
        false
    };

    for i in 0..n {
        let mut x = DVector::zeros(n);
        x[i] = T::one();
        if check(x, &mut report) {
            return report;
        }
    }
    let half = T::lit(0.5);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut x = DVector::zeros(n);
            x[i] = half;
            x[j] = half;
            if check(x, &mut report) {
                return report;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let mut x = DVector::zeros(n);
        let face = t % 2 == 1 && n > 2;
        let support = if face { rng.random_range(2..=n) } else { n };
        let mut idx: Vec<usize> = (0..n).collect();
        for k in 0..support {
            let pick = rng.random_range(k..n);
            idx.swap(k, pick);
        }
        let mut total = 0.0;
        for &i in &idx[..support] {
            // exponential draws normalized to the simplex are uniform on it
            let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            let e = -u.ln();
            x[i] = T::lit(e);
            total += e;
        }
        x /= T::lit(total);
        if check(x, &mut report) {
            return report;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_passes() {
        let r = copositivity_certificate(&DMatrix::<f64>::identity(2, 2), 1000, 1);
        assert!(r.passed);
        assert!(r.witness.is_none());
        assert_eq!(r.samples, 2 + 1 + 1000);
    }

    #[test]
    fn negative_scalar_fails_on_vertex() {
        let r = copositivity_certificate(&DMatrix::<f64>::from_element(1, 1, -1.0), 10, 1);
        assert!(!r.passed);
        assert_eq!(r.witness.unwrap().as_slice(), &[1.0]);
    }

    #[test]
    fn copositive_but_indefinite_passes() {
        // [[0,1],[1,0]] is copositive, not PSD
        let m = DMatrix::<f64>::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(copositivity_certificate(&m, 500, 3).passed);
    }

    #[test]
    fn interior_witness_found() {
        // diagonal positive, off-diagonal strongly negative: vertices pass,
        // the midpoint fails
        let m = DMatrix::<f64>::from_row_slice(2, 2, &[1.0, -3.0, -3.0, 1.0]);
        let r = copositivity_certificate(&m, 100, 3);
        assert!(!r.passed);
        let x = r.witness.unwrap();
        assert!(x.dot(&(&m * &x)) < 0.0);
    }

    #[test]
    fn same_seed_same_report() {
        let m = DMatrix::<f64>::from_row_slice(3, 3, &[1.0, 0.2, -0.1, 0.2, 2.0, 0.3, -0.1, 0.3, 1.5]);
        assert_eq!(
            copositivity_certificate(&m, 200, 9),
            copositivity_certificate(&m, 200, 9)
        );
    }
}
