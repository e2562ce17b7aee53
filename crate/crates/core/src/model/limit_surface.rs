use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix3, Vector3};

use super::{min_eigenvalue, ModelError};
use crate::geometry::body_twist_transform;
use crate::scalar::Real;

/// Convex limit-surface function `H` over body-axis friction wrenches.
pub trait GeneralLimitSurface<T: Real>: Send + Sync {
    fn value(&self, f: &Vector3<T>) -> T;
    fn gradient(&self, f: &Vector3<T>) -> Vector3<T>;
    fn hessian(&self, f: &Vector3<T>) -> Matrix3<T>;
}

/// `H(F) = (F^T Q F)^p`. `p = 1` is the ellipsoid; `p = 2` the quartic used
/// to exercise the relinearization loop.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerOfQuadratic<T: Real> {
    pub q: Matrix3<T>,
    pub power: i32,
}

impl<T: Real> GeneralLimitSurface<T> for PowerOfQuadratic<T> {
    fn value(&self, f: &Vector3<T>) -> T {
        f.dot(&(self.q * f)).powi(self.power)
    }

    fn gradient(&self, f: &Vector3<T>) -> Vector3<T> {
        let s = f.dot(&(self.q * f));
        let p = T::lit(self.power as f64);
        (self.q * f) * (T::lit(2.0) * p * s.powi(self.power - 1))
    }

    fn hessian(&self, f: &Vector3<T>) -> Matrix3<T> {
        let s = f.dot(&(self.q * f));
        let p = T::lit(self.power as f64);
        let qf = self.q * f;
        let two = T::lit(2.0);
        let mut h = self.q * (two * p * s.powi(self.power - 1));
        if self.power > 1 {
            h += qf * qf.transpose() * (T::lit(4.0) * p * (p - T::one()) * s.powi(self.power - 2));
        }
        h
    }
}

#[derive(Clone)]
pub enum LimitSurface<T: Real> {
    /// `H(F) = F^T A_tilde F`.
    Ellipsoid(Matrix3<T>),
    General(Arc<dyn GeneralLimitSurface<T>>),
}

impl<T: Real> fmt::Debug for LimitSurface<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitSurface::Ellipsoid(a) => f.debug_tuple("Ellipsoid").field(a).finish(),
            LimitSurface::General(_) => f.write_str("General(..)"),
        }
    }
}

impl<T: Real> LimitSurface<T> {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            LimitSurface::Ellipsoid(a) => {
                check_pd(a, "limit-surface matrix")?;
            }
            LimitSurface::General(h) => {
                if h.value(&Vector3::zeros()).abs() > T::lit(1e-12) {
                    return Err(ModelError::NotPositiveDefinite("H(0) must be 0"));
                }
                let probes = [
                    Vector3::new(T::one(), T::zero(), T::zero()),
                    Vector3::new(T::zero(), T::one(), T::zero()),
                    Vector3::new(T::zero(), T::zero(), T::one()),
                    Vector3::new(T::one(), T::one(), T::one()),
                    Vector3::new(T::lit(-0.3), T::lit(0.7), T::lit(0.2)),
                ];
                for p in &probes {
                    check_pd(&h.hessian(p), "limit-surface Hessian")?;
                }
            }
        }
        Ok(())
    }

    /// Body-frame matrix `A_tilde` for the linearization wrench `f_body`.
    ///
    /// For general surfaces the wrench is first scaled onto the level set
    /// `H = 1` (only its direction is meaningful because the LCP solves for
    /// `k F`), then `A_tilde = Hess H / 2`, which equals `A_tilde` exactly for
    /// an ellipsoid.
    pub fn body_matrix(&self, f_body: Option<&Vector3<T>>) -> Result<Matrix3<T>, ModelError> {
        match self {
            LimitSurface::Ellipsoid(a) => {
                check_pd(a, "limit-surface matrix")?;
                Ok(*a)
            }
            LimitSurface::General(h) => {
                let probe = Vector3::new(T::one(), T::zero(), T::zero());
                let f = f_body.copied().unwrap_or(probe);
                let f = onto_unit_level(h.as_ref(), &f).unwrap_or(probe);
                let a = h.hessian(&f) * T::lit(0.5);
                check_pd(&a, "limit-surface Hessian")?;
                Ok(a)
            }
        }
    }
}

/// Scales `f` along its ray so that `H(s f) = 1`.
fn onto_unit_level<T: Real>(h: &dyn GeneralLimitSurface<T>, f: &Vector3<T>) -> Option<Vector3<T>> {
    if f.norm() <= T::lit(1e-300_f64.max(f64::MIN_POSITIVE)) {
        return None;
    }
    let one = T::one();
    let (mut lo, mut hi) = (T::zero(), one / f.norm());
    let mut guard = 0;
    while h.value(&(f * hi)) < one {
        hi *= T::lit(2.0);
        guard += 1;
        if guard > 200 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if h.value(&(f * mid)) < one {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::default_epsilon() * hi {
            break;
        }
    }
    Some(f * hi)
}

fn check_pd<T: Real>(a: &Matrix3<T>, what: &'static str) -> Result<(), ModelError> {
    let d = DMatrix::from_iterator(3, 3, a.iter().copied());
    if min_eigenvalue(&d)? <= T::zero() || a.iter().any(|x| !x.is_finite()) {
        return Err(ModelError::NotPositiveDefinite(what));
    }
    Ok(())
}

/// World-frame force-motion matrix `A = T(theta) A_tilde T(theta)^T`.
pub fn force_motion_matrix<T: Real>(
    ls: &LimitSurface<T>,
    theta: T,
    f_body: Option<&Vector3<T>>,
) -> Result<Matrix3<T>, ModelError> {
    let a_tilde = ls.body_matrix(f_body)?;
    let t = body_twist_transform(theta).0;
    Ok(t * a_tilde * t.transpose())
}
