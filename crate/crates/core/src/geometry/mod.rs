//! Planar rigid bodies, gap functions and contact Jacobians.

mod contact;
mod distance;

use nalgebra::{Matrix3, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

pub use contact::{
    contact_candidates, contact_jacobians, BodyRef, Contact, ContactFrame, ContactSet, Feature, FingerBody,
    StaticBody, World,
};
pub use distance::{closest_feature, signed_distance_pair, PairDistance};

/// Penetration accepted when assembling contact problems, in meters.
pub const PENETRATION_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("unsupported contact pair: {0}")]
    UnsupportedPair(&'static str),
    #[error("degenerate contact: coincident witness points with no usable normal")]
    DegenerateContact,
    #[error("manipulator configuration has length {got}, expected {expected}")]
    ConfigDimension { expected: usize, got: usize },
}

/// Planar pose `(x, y, theta)`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct Pose2<T: Real> {
    pub x: T,
    pub y: T,
    pub theta: T,
}

impl<T: Real> Pose2<T> {
    pub fn new(x: T, y: T, theta: T) -> Self {
        Self { x, y, theta }
    }

    pub fn identity() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn position(&self) -> Vector2<T> {
        Vector2::new(self.x, self.y)
    }

    pub fn rotate(&self, v: &Vector2<T>) -> Vector2<T> {
        let (s, c) = self.theta.sin_cos();
        Vector2::new(c * v.x - s * v.y, s * v.x + c * v.y)
    }

    pub fn apply(&self, local: &Vector2<T>) -> Vector2<T> {
        self.rotate(local) + self.position()
    }

    pub fn inverse_apply(&self, world: &Vector2<T>) -> Vector2<T> {
        let d = world - self.position();
        let (s, c) = self.theta.sin_cos();
        Vector2::new(c * d.x + s * d.y, -s * d.x + c * d.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    pub fn to_array(&self) -> [T; 3] {
        [self.x, self.y, self.theta]
    }

    pub fn from_slice(s: &[T]) -> Self {
        Self::new(s[0], s[1], s[2])
    }

    pub fn cast<U: Real>(&self) -> Pose2<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        Pose2::new(c(self.x), c(self.y), c(self.theta))
    }
}

/// Body shape in its own frame. Half-planes are only valid as static bodies;
/// their solid side is `{p : normal . p <= 0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
#[serde(bound = "T: Real")]
pub enum Shape<T: Real> {
    Disk { radius: T },
    Polygon { vertices: Vec<[T; 2]> },
    Point,
    HalfPlane { normal: [T; 2] },
}

impl<T: Real> Shape<T> {
    pub fn cast<U: Real>(&self) -> Shape<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        match self {
            Shape::Disk { radius } => Shape::Disk { radius: c(*radius) },
            Shape::Polygon { vertices } => Shape::Polygon {
                vertices: vertices.iter().map(|v| [c(v[0]), c(v[1])]).collect(),
            },
            Shape::Point => Shape::Point,
            Shape::HalfPlane { normal } => Shape::HalfPlane {
                normal: [c(normal[0]), c(normal[1])],
            },
        }
    }

    /// Axis-aligned square of side `side` centred on the body origin.
    pub fn square(side: T) -> Self {
        Self::rectangle(side, side)
    }

    pub fn rectangle(width: T, height: T) -> Self {
        let hw = width / T::lit(2.0);
        let hh = height / T::lit(2.0);
        Shape::Polygon {
            vertices: vec![[-hw, -hh], [hw, -hh], [hw, hh], [-hw, hh]],
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        match self {
            Shape::Disk { radius } => {
                if !(radius.is_finite() && *radius > T::zero()) {
                    return Err(GeometryError::InvalidShape("disk radius must be positive".into()));
                }
            }
            Shape::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(GeometryError::InvalidShape("polygon needs at least 3 vertices".into()));
                }
                if vertices.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(GeometryError::InvalidShape("non-finite polygon vertex".into()));
                }
                let n = vertices.len();
                for i in 0..n {
                    let a = vec2(vertices[i]);
                    let b = vec2(vertices[(i + 1) % n]);
                    let c = vec2(vertices[(i + 2) % n]);
                    if cross(&(b - a), &(c - b)) <= T::zero() {
                        return Err(GeometryError::InvalidShape(
                            "polygon must be strictly convex and counterclockwise".into(),
                        ));
                    }
                }
            }
            Shape::Point => {}
            Shape::HalfPlane { normal } => {
                let n = vec2(*normal);
                if !(n.norm() - T::one()).abs().le(&T::lit(1e-9)) {
                    return Err(GeometryError::InvalidShape("half-plane normal must be unit length".into()));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn local_vertices(&self) -> Vec<Vector2<T>> {
        match self {
            Shape::Polygon { vertices } => vertices.iter().map(|v| vec2(*v)).collect(),
            _ => Vec::new(),
        }
    }

    /// Radius of the round part: disk radius, zero for points.
    pub(crate) fn round_radius(&self) -> Option<T> {
        match self {
            Shape::Disk { radius } => Some(*radius),
            Shape::Point => Some(T::zero()),
            _ => None,
        }
    }
}

/// `v_O = T(theta) * [v_xb, v_yb, theta_dot]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwistTransform<T: Real>(pub Matrix3<T>);

pub fn body_twist_transform<T: Real>(theta: T) -> TwistTransform<T> {
    let (s, c) = theta.sin_cos();
    TwistTransform(Matrix3::new(
        c,
        -s,
        T::zero(),
        s,
        c,
        T::zero(),
        T::zero(),
        T::zero(),
        T::one(),
    ))
}

pub(crate) fn vec2<T: Real>(a: [T; 2]) -> Vector2<T> {
    Vector2::new(a[0], a[1])
}

/// z-component of the planar cross product.
pub(crate) fn cross<T: Real>(a: &Vector2<T>, b: &Vector2<T>) -> T {
    a.x * b.y - a.y * b.x
}

/// Counterclockwise quarter turn.
pub(crate) fn perp<T: Real>(a: &Vector2<T>) -> Vector2<T> {
    Vector2::new(-a.y, a.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn twist_transform_identity_and_quarter_turn() {
        assert_eq!(body_twist_transform(0.0_f64).0, Matrix3::identity());
        let t = body_twist_transform(FRAC_PI_2).0;
        let expect = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_abs_diff_eq!(t, expect, epsilon = 1e-15);
    }

    #[test]
    fn twist_transform_unit_determinant() {
        for k in 0..20 {
            let th = -3.0 + 0.37 * k as f64;
            assert_abs_diff_eq!(body_twist_transform(th).0.determinant(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn polygon_validation() {
        assert!(Shape::<f64>::square(0.4).validate().is_ok());
        let cw = Shape::Polygon {
            vertices: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]],
        };
        assert!(cw.validate().is_err());
        let collinear = Shape::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 1.0]],
        };
        assert!(collinear.validate().is_err());
        let two = Shape::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0]],
        };
        assert!(two.validate().is_err());
        assert!(Shape::Disk { radius: 0.0 }.validate().is_err());
        assert!(Shape::HalfPlane { normal: [0.0, 2.0] }.validate().is_err());
    }

    #[test]
    fn pose_round_trip() {
        let p = Pose2::new(0.3, -1.2, 0.7);
        let local = Vector2::new(0.5, 0.25);
        assert_abs_diff_eq!(p.inverse_apply(&p.apply(&local)), local, epsilon = 1e-14);
    }

    #[test]
    fn shape_json_tags() {
        let s: Shape<f64> = serde_json::from_str(r#"{"type":"disk","radius":1.0}"#).unwrap();
        assert_eq!(s, Shape::Disk { radius: 1.0 });
        assert!(serde_json::from_str::<Shape<f64>>(r#"{"type":"disk","radius":1.0,"x":2}"#).is_err());
    }
}
