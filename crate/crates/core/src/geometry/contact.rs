//! Contact features, contact frames and the stacked contact Jacobians.

use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};

use super::distance::{closest_feature, edge_normal, sat_axis};
use super::{cross, perp, GeometryError, Pose2, Shape};
use crate::scalar::Real;

/// Pair of material features whose gap defines one contact. Coordinates are
/// in the owning body's frame so the gap can be re-evaluated at any pose.
///
/// `A` is the manipulated object (or the first shape of a distance query),
/// `B` the finger, static body or second shape.
#[derive(Clone, Debug, PartialEq)]
pub enum Feature<T: Real> {
    /// Round point (disk centre or vertex, `radius` 0) on `A` against a face of `B`.
    PointOnA {
        point: Vector2<T>,
        radius: T,
        face_point: Vector2<T>,
        face_normal: Vector2<T>,
    },
    /// Face of `A` against a round point on `B`.
    PointOnB {
        point: Vector2<T>,
        radius: T,
        face_point: Vector2<T>,
        face_normal: Vector2<T>,
    },
    PointPoint {
        a: Vector2<T>,
        a_radius: T,
        b: Vector2<T>,
        b_radius: T,
    },
}

/// Gap, unit normal (pointing from `B` into `A`), tangent and witness points of
/// one contact at a given configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactFrame<T: Real> {
    pub phi: T,
    pub normal: Vector2<T>,
    pub tangent: Vector2<T>,
    pub witness_object: Vector2<T>,
    pub witness_other: Vector2<T>,
}

impl<T: Real> Feature<T> {
    pub fn swapped(self) -> Self {
        match self {
            Feature::PointOnA {
                point,
                radius,
                face_point,
                face_normal,
            } => Feature::PointOnB {
                point,
                radius,
                face_point,
                face_normal,
            },
            Feature::PointOnB {
                point,
                radius,
                face_point,
                face_normal,
            } => Feature::PointOnA {
                point,
                radius,
                face_point,
                face_normal,
            },
            Feature::PointPoint {
                a,
                a_radius,
                b,
                b_radius,
            } => Feature::PointPoint {
                a: b,
                a_radius: b_radius,
                b: a,
                b_radius: a_radius,
            },
        }
    }

    pub fn evaluate(&self, pose_a: &Pose2<T>, pose_b: &Pose2<T>) -> Result<ContactFrame<T>, GeometryError> {
        let frame = |phi: T, normal: Vector2<T>, wa: Vector2<T>, wb: Vector2<T>| ContactFrame {
            phi,
            normal,
            tangent: perp(&normal),
            witness_object: wa,
            witness_other: wb,
        };
        match self {
            Feature::PointOnA {
                point,
                radius,
                face_point,
                face_normal,
            } => {
                let p = pose_a.apply(point);
                let a = pose_b.apply(face_point);
                let n = pose_b.rotate(face_normal);
                let d = n.dot(&(p - a));
                Ok(frame(d - *radius, n, p - n * *radius, p - n * d))
            }
            Feature::PointOnB {
                point,
                radius,
                face_point,
                face_normal,
            } => {
                let p = pose_b.apply(point);
                let a = pose_a.apply(face_point);
                let n_out = pose_a.rotate(face_normal);
                let d = n_out.dot(&(p - a));
                Ok(frame(d - *radius, -n_out, p - n_out * d, p - n_out * *radius))
            }
            Feature::PointPoint {
                a,
                a_radius,
                b,
                b_radius,
            } => {
                let pa = pose_a.apply(a);
                let pb = pose_b.apply(b);
                let diff = pa - pb;
                let dist = diff.norm();
                let n = if dist > T::lit(1e-12) {
                    diff / dist
                } else {
                    let centroids = pose_a.position() - pose_b.position();
                    if centroids.norm() <= T::lit(1e-12) {
                        return Err(GeometryError::DegenerateContact);
                    }
                    centroids.normalize()
                };
                let phi = n.dot(&diff) - *a_radius - *b_radius;
                Ok(frame(phi, n, pa - n * *a_radius, pb + n * *b_radius))
            }
        }
    }
}

/// Which body the object touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyRef {
    Finger(usize),
    Static(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FingerBody<T: Real> {
    pub shape: Shape<T>,
    /// Friction coefficient against the object.
    pub mu: T,
}

impl<T: Real> FingerBody<T> {
    /// Round fingers are position-controlled in `(x, y)`; polygonal fingers
    /// carry an orientation as well.
    pub fn dof(&self) -> usize {
        match self.shape {
            Shape::Polygon { .. } => 3,
            _ => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StaticBody<T: Real> {
    pub shape: Shape<T>,
    pub pose: Pose2<T>,
    pub mu: T,
}

/// Object, fingers and fixed environment geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct World<T: Real> {
    pub object: Shape<T>,
    pub fingers: Vec<FingerBody<T>>,
    pub statics: Vec<StaticBody<T>>,
}

impl<T: Real> World<T> {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if matches!(self.object, Shape::HalfPlane { .. }) {
            return Err(GeometryError::InvalidShape("the object cannot be a half-plane".into()));
        }
        self.object.validate()?;
        for f in &self.fingers {
            if matches!(f.shape, Shape::HalfPlane { .. }) {
                return Err(GeometryError::InvalidShape("fingers cannot be half-planes".into()));
            }
            f.shape.validate()?;
            if !(f.mu >= T::zero()) {
                return Err(GeometryError::InvalidShape("friction coefficients must be >= 0".into()));
            }
        }
        for s in &self.statics {
            s.shape.validate()?;
            if !(s.mu >= T::zero()) {
                return Err(GeometryError::InvalidShape("friction coefficients must be >= 0".into()));
            }
        }
        Ok(())
    }

    /// Total manipulator coordinate count `m`.
    pub fn manipulator_dim(&self) -> usize {
        self.fingers.iter().map(FingerBody::dof).sum()
    }

    pub fn finger_offsets(&self) -> Vec<usize> {
        self.fingers
            .iter()
            .scan(0, |acc, f| {
                let o = *acc;
                *acc += f.dof();
                Some(o)
            })
            .collect()
    }

    fn check_config(&self, q_m: &DVector<T>) -> Result<(), GeometryError> {
        let m = self.manipulator_dim();
        if q_m.len() != m {
            return Err(GeometryError::ConfigDimension {
                expected: m,
                got: q_m.len(),
            });
        }
        Ok(())
    }

    pub fn finger_pose(&self, i: usize, q_m: &DVector<T>) -> Pose2<T> {
        let o = self.finger_offsets()[i];
        let theta = if self.fingers[i].dof() == 3 { q_m[o + 2] } else { T::zero() };
        Pose2::new(q_m[o], q_m[o + 1], theta)
    }

    pub fn body_pose(&self, body: BodyRef, q_m: &DVector<T>) -> Pose2<T> {
        match body {
            BodyRef::Finger(i) => self.finger_pose(i, q_m),
            BodyRef::Static(j) => self.statics[j].pose,
        }
    }

    pub fn body_shape(&self, body: BodyRef) -> &Shape<T> {
        match body {
            BodyRef::Finger(i) => &self.fingers[i].shape,
            BodyRef::Static(j) => &self.statics[j].shape,
        }
    }

    pub fn body_mu(&self, body: BodyRef) -> T {
        match body {
            BodyRef::Finger(i) => self.fingers[i].mu,
            BodyRef::Static(j) => self.statics[j].mu,
        }
    }

    pub fn bodies(&self) -> impl Iterator<Item = BodyRef> + '_ {
        (0..self.fingers.len())
            .map(BodyRef::Finger)
            .chain((0..self.statics.len()).map(BodyRef::Static))
    }

    /// True signed distance between the object and every other body.
    pub fn pair_gaps(&self, object_pose: &Pose2<T>, q_m: &DVector<T>) -> Result<Vec<(BodyRef, T)>, GeometryError> {
        self.check_config(q_m)?;
        self.bodies()
            .map(|b| {
                let d = super::signed_distance_pair(&self.object, object_pose, self.body_shape(b), &self.body_pose(b, q_m))?;
                Ok((b, d.phi))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Contact<T: Real> {
    pub other: BodyRef,
    pub feature: Feature<T>,
    pub mu: T,
    pub frame: ContactFrame<T>,
}

/// Active contacts with their stacked gap vector and Jacobians.
///
/// Tangential rows come in opposing pairs: row `2i` is `+t`, row `2i + 1`
/// is `-t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactSet<T: Real> {
    pub contacts: Vec<Contact<T>>,
    pub phi: DVector<T>,
    pub mu: DMatrix<T>,
    pub n_o: DMatrix<T>,
    pub n_m: DMatrix<T>,
    pub t_o: DMatrix<T>,
    pub t_m: DMatrix<T>,
    pub e: DMatrix<T>,
}

impl<T: Real> ContactSet<T> {
    pub fn len(&self) -> usize {
        self.contacts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contacts.is_empty()
    }

    pub fn manipulator_dim(&self) -> usize {
        self.n_m.ncols()
    }

    pub fn min_gap(&self) -> Option<T> {
        self.phi.iter().copied().reduce(|a, b| if b < a { b } else { a })
    }

    /// `J_O = [N_O; T_O]`.
    pub fn j_o(&self) -> DMatrix<T> {
        stack(&self.n_o, &self.t_o)
    }

    /// `J_M = [N_M; T_M]`.
    pub fn j_m(&self) -> DMatrix<T> {
        stack(&self.n_m, &self.t_m)
    }
}

fn stack<T: Real>(top: &DMatrix<T>, bottom: &DMatrix<T>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.rows_mut(0, top.nrows()).copy_from(top);
    out.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    out
}

/// Contacts between the object and every finger and static body whose gap is
/// at most `activation_distance`.
pub fn contact_candidates<T: Real>(
    world: &World<T>,
    object_pose: &Pose2<T>,
    q_m: &DVector<T>,
    activation_distance: T,
) -> Result<ContactSet<T>, GeometryError> {
    world.check_config(q_m)?;
    let mut contacts = Vec::new();
    for body in world.bodies() {
        let pose = world.body_pose(body, q_m);
        let shape = world.body_shape(body);
        for feature in manifold(&world.object, object_pose, shape, &pose, activation_distance)? {
            let frame = feature.evaluate(object_pose, &pose)?;
            if frame.phi <= activation_distance {
                contacts.push(Contact {
                    other: body,
                    feature,
                    mu: world.body_mu(body),
                    frame,
                });
            }
        }
    }
    contact_jacobians(contacts, world, object_pose, q_m)
}

/// Contact features for one object/body pair. Polygon faces against polygons
/// or half-planes produce up to two points; all other pairs one.
fn manifold<T: Real>(
    object: &Shape<T>,
    pose_o: &Pose2<T>,
    other: &Shape<T>,
    pose_x: &Pose2<T>,
    activation: T,
) -> Result<Vec<Feature<T>>, GeometryError> {
    match (object, other) {
        (Shape::Polygon { .. }, Shape::HalfPlane { normal }) => {
            let n_local = Vector2::new(normal[0], normal[1]);
            let n = pose_x.rotate(&n_local);
            let origin = pose_x.position();
            Ok(object
                .local_vertices()
                .into_iter()
                .filter(|v| n.dot(&(pose_o.apply(v) - origin)) <= activation)
                .map(|v| Feature::PointOnA {
                    point: v,
                    radius: T::zero(),
                    face_point: Vector2::zeros(),
                    face_normal: n_local,
                })
                .collect())
        }
        (Shape::Polygon { .. }, Shape::Polygon { .. }) => {
            let clipped = clip_manifold(object, pose_o, other, pose_x, activation);
            if !clipped.is_empty() {
                return Ok(clipped);
            }
            let f = closest_feature(object, pose_o, other, pose_x)?;
            Ok(vec![f])
        }
        _ => Ok(vec![closest_feature(object, pose_o, other, pose_x)?]),
    }
}

/// Reference-face / incident-edge clipping.
fn clip_manifold<T: Real>(
    a: &Shape<T>,
    pose_a: &Pose2<T>,
    b: &Shape<T>,
    pose_b: &Pose2<T>,
    activation: T,
) -> Vec<Feature<T>> {
    let la = a.local_vertices();
    let lb = b.local_vertices();
    let va: Vec<_> = la.iter().map(|v| pose_a.apply(v)).collect();
    let vb: Vec<_> = lb.iter().map(|v| pose_b.apply(v)).collect();
    let (sep, ref_a, i, _) = sat_axis(&va, &vb);
    if sep > activation {
        return Vec::new();
    }
    let (vr, lr, vi, pose_i) = if ref_a {
        (&va, &la, &vb, pose_b)
    } else {
        (&vb, &lb, &va, pose_a)
    };
    let n = edge_normal(vr, i);
    let k = (0..vi.len())
        .min_by(|&x, &y| {
            let dx = edge_normal(vi, x).dot(&n);
            let dy = edge_normal(vi, y).dot(&n);
            dx.partial_cmp(&dy).unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("polygon has edges");
    let r1 = vr[i];
    let r2 = vr[(i + 1) % vr.len()];
    let u = (r2 - r1).normalize();
    let mut seg = [vi[k], vi[(k + 1) % vi.len()]];
    // keep u.(p - r1) >= 0 and u.(r2 - p) >= 0
    for (origin, dir) in [(r1, u), (r2, -u)] {
        let d0 = dir.dot(&(seg[0] - origin));
        let d1 = dir.dot(&(seg[1] - origin));
        if d0 < T::zero() && d1 < T::zero() {
            return Vec::new();
        }
        if d0 < T::zero() {
            seg[0] = seg[0] + (seg[1] - seg[0]) * (d0 / (d0 - d1));
        } else if d1 < T::zero() {
            seg[1] = seg[1] + (seg[0] - seg[1]) * (d1 / (d1 - d0));
        }
    }
    let mut points: Vec<Vector2<T>> = vec![seg[0]];
    if (seg[1] - seg[0]).norm() > T::lit(1e-9) {
        points.push(seg[1]);
    }
    let face_point = lr[i];
    let face_normal = edge_normal(lr, i);
    points
        .into_iter()
        .filter(|c| n.dot(&(c - r1)) <= activation)
        .map(|c| {
            let point = pose_i.inverse_apply(&c);
            if ref_a {
                Feature::PointOnB {
                    point,
                    radius: T::zero(),
                    face_point,
                    face_normal,
                }
            } else {
                Feature::PointOnA {
                    point,
                    radius: T::zero(),
                    face_point,
                    face_normal,
                }
            }
        })
        .collect()
}

/// Re-evaluates every contact at `(object_pose, q_m)` and assembles the gap
/// vector and Jacobians.
///
/// For a contact with unit normal `n` (into the object), tangent `t = rot90(n)`,
/// object lever arm `r` and finger lever arm `s`:
/// `N_O = [n, r x n]`, `T_O = +-[t, r x t]`, `N_M = -[n, s x n]`,
/// `T_M = -+[t, s x t]` (rotation column only for 3-dof fingers).
pub fn contact_jacobians<T: Real>(
    contacts: Vec<Contact<T>>,
    world: &World<T>,
    object_pose: &Pose2<T>,
    q_m: &DVector<T>,
) -> Result<ContactSet<T>, GeometryError> {
    world.check_config(q_m)?;
    let k = contacts.len();
    let m = world.manipulator_dim();
    let offsets = world.finger_offsets();
    let mut set = ContactSet {
        contacts,
        phi: DVector::zeros(k),
        mu: DMatrix::zeros(k, k),
        n_o: DMatrix::zeros(k, 3),
        n_m: DMatrix::zeros(k, m),
        t_o: DMatrix::zeros(2 * k, 3),
        t_m: DMatrix::zeros(2 * k, m),
        e: DMatrix::zeros(2 * k, k),
    };
    let com = object_pose.position();
    for i in 0..k {
        let other = set.contacts[i].other;
        let other_pose = world.body_pose(other, q_m);
        let frame = set.contacts[i].feature.evaluate(object_pose, &other_pose)?;
        set.contacts[i].frame = frame;
        let n = frame.normal;
        let t = frame.tangent;
        let r = frame.witness_object - com;

        set.phi[i] = frame.phi;
        set.mu[(i, i)] = set.contacts[i].mu;
        set.e[(2 * i, i)] = T::one();
        set.e[(2 * i + 1, i)] = T::one();

        let n_row = [n.x, n.y, cross(&r, &n)];
        let t_row = [t.x, t.y, cross(&r, &t)];
        for c in 0..3 {
            set.n_o[(i, c)] = n_row[c];
            set.t_o[(2 * i, c)] = t_row[c];
            set.t_o[(2 * i + 1, c)] = -t_row[c];
        }

        if let BodyRef::Finger(f) = other {
            let o = offsets[f];
            let s = frame.witness_other - other_pose.position();
            set.n_m[(i, o)] = -n.x;
            set.n_m[(i, o + 1)] = -n.y;
            set.t_m[(2 * i, o)] = -t.x;
            set.t_m[(2 * i, o + 1)] = -t.y;
            set.t_m[(2 * i + 1, o)] = t.x;
            set.t_m[(2 * i + 1, o + 1)] = t.y;
            if world.fingers[f].dof() == 3 {
                set.n_m[(i, o + 2)] = -cross(&s, &n);
                set.t_m[(2 * i, o + 2)] = -cross(&s, &t);
                set.t_m[(2 * i + 1, o + 2)] = cross(&s, &t);
            }
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn disk_and_point_finger(finger: [f64; 2]) -> (World<f64>, DVector<f64>) {
        let world = World {
            object: Shape::Disk { radius: 1.0 },
            fingers: vec![FingerBody {
                shape: Shape::Point,
                mu: 1.0,
            }],
            statics: vec![],
        };
        (world, DVector::from_vec(finger.to_vec()))
    }

    #[test]
    fn head_on_disk_jacobians() {
        let (world, qm) = disk_and_point_finger([-1.0, 0.0]);
        let set = contact_candidates(&world, &Pose2::identity(), &qm, 0.1).unwrap();
        assert_eq!(set.len(), 1);
        assert_abs_diff_eq!(set.phi[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(set.n_o, DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]), epsilon = 1e-15);
        assert_abs_diff_eq!(set.n_m, DMatrix::from_row_slice(1, 2, &[-1.0, 0.0]), epsilon = 1e-15);
        assert_abs_diff_eq!(
            set.t_o,
            DMatrix::from_row_slice(2, 3, &[0.0, 1.0, -1.0, 0.0, -1.0, 1.0]),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            set.t_m,
            DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 0.0, 1.0]),
            epsilon = 1e-15
        );
        assert_eq!(set.e, DMatrix::from_row_slice(2, 1, &[1.0, 1.0]));
    }

    #[test]
    fn rotated_head_on_contact() {
        let (world, qm) = disk_and_point_finger([0.0, -1.0]);
        let set = contact_candidates(&world, &Pose2::identity(), &qm, 0.1).unwrap();
        assert_abs_diff_eq!(set.n_o, DMatrix::from_row_slice(1, 3, &[0.0, 1.0, 0.0]), epsilon = 1e-15);
    }

    #[test]
    fn far_fingers_are_culled() {
        let world = World {
            object: Shape::Disk { radius: 1.0 },
            fingers: vec![
                FingerBody {
                    shape: Shape::Point,
                    mu: 1.0,
                },
                FingerBody {
                    shape: Shape::Point,
                    mu: 1.0,
                },
            ],
            statics: vec![],
        };
        let qm = DVector::from_vec(vec![-11.0, 0.0, 11.0, 0.0]);
        let set = contact_candidates(&world, &Pose2::identity(), &qm, 0.1).unwrap();
        assert!(set.is_empty());
        assert_eq!(set.n_m.shape(), (0, 4));
    }

    #[test]
    fn four_finger_pinch_normals_point_inward() {
        let r = 0.05;
        let world = World {
            object: Shape::square(0.4),
            fingers: (0..4)
                .map(|_| FingerBody {
                    shape: Shape::Disk { radius: r },
                    mu: 1.0,
                })
                .collect(),
            statics: vec![],
        };
        let d = 0.2 + r;
        let qm = DVector::from_vec(vec![d, 0.0, 0.0, d, -d, 0.0, 0.0, -d]);
        let set = contact_candidates(&world, &Pose2::identity(), &qm, 1e-3).unwrap();
        assert_eq!(set.len(), 4);
        let expected = [[-1.0, 0.0], [0.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        for (c, e) in set.contacts.iter().zip(expected) {
            assert_abs_diff_eq!(c.frame.normal, Vector2::new(e[0], e[1]), epsilon = 1e-15);
            assert_abs_diff_eq!(c.frame.phi, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn face_face_gives_two_points_on_both_boundaries() {
        let peg = Shape::rectangle(0.1, 0.5);
        let block = Shape::rectangle(0.3, 0.6);
        let world = World {
            object: peg.clone(),
            fingers: vec![],
            statics: vec![StaticBody {
                shape: block.clone(),
                pose: Pose2::new(0.2, -0.2, 0.0),
                mu: 0.3,
            }],
        };
        // peg right face at x = 0.05 flush with block left face at x = 0.05
        let set = contact_candidates(&world, &Pose2::identity(), &DVector::zeros(0), 1e-3).unwrap();
        assert_eq!(set.len(), 2);
        let mut ys: Vec<f64> = set.contacts.iter().map(|c| c.frame.witness_object.y).collect();
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // overlap of y in [-0.25, 0.25] and [-0.5, 0.1]
        assert_abs_diff_eq!(ys[0], -0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(ys[1], 0.1, epsilon = 1e-12);
        for c in &set.contacts {
            let on_peg = crate::geometry::signed_distance_pair(&Shape::Point, &Pose2::new(c.frame.witness_object.x, c.frame.witness_object.y, 0.0), &peg, &Pose2::identity()).unwrap();
            let on_block = crate::geometry::signed_distance_pair(&Shape::Point, &Pose2::new(c.frame.witness_other.x, c.frame.witness_other.y, 0.0), &block, &Pose2::new(0.2, -0.2, 0.0)).unwrap();
            assert!(on_peg.phi.abs() <= 1e-9 && on_block.phi.abs() <= 1e-9);
            assert_abs_diff_eq!(c.frame.normal, Vector2::new(-1.0, 0.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn polygon_on_wall_face_contact() {
        let world = World {
            object: Shape::square(0.4),
            fingers: vec![],
            statics: vec![StaticBody {
                shape: Shape::HalfPlane { normal: [0.0, 1.0] },
                pose: Pose2::identity(),
                mu: 0.5,
            }],
        };
        let set = contact_candidates(&world, &Pose2::new(0.0, 0.2, 0.0), &DVector::zeros(0), 1e-3).unwrap();
        assert_eq!(set.len(), 2);
        for c in &set.contacts {
            assert_abs_diff_eq!(c.frame.normal, Vector2::new(0.0, 1.0), epsilon = 1e-15);
        }
    }

    #[test]
    fn degenerate_coincident_disks() {
        let world = World {
            object: Shape::Disk { radius: 1.0 },
            fingers: vec![FingerBody {
                shape: Shape::Disk { radius: 0.1 },
                mu: 1.0,
            }],
            statics: vec![],
        };
        let err = contact_candidates(&world, &Pose2::identity(), &DVector::zeros(2), 0.1).unwrap_err();
        assert_eq!(err, GeometryError::DegenerateContact);
    }

    #[test]
    fn wrong_config_length() {
        let (world, _) = disk_and_point_finger([0.0, 0.0]);
        assert!(matches!(
            contact_candidates(&world, &Pose2::identity(), &DVector::zeros(3), 0.1),
            Err(GeometryError::ConfigDimension { expected: 2, got: 3 })
        ));
    }
}
