//! Closest-feature queries between placed shapes.

use nalgebra::Vector2;

use super::contact::Feature;
use super::{vec2, GeometryError, Pose2, Shape};
use crate::scalar::Real;

/// Result of [`signed_distance_pair`]. `normal` points from `A` toward `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairDistance<T: Real> {
    pub phi: T,
    pub witness_a: Vector2<T>,
    pub witness_b: Vector2<T>,
    pub normal: Vector2<T>,
    pub feature: Feature<T>,
}

/// Signed distance between two placed shapes; negative values are
/// penetration depths along the least-penetration direction.
pub fn signed_distance_pair<T: Real>(
    a: &Shape<T>,
    pose_a: &Pose2<T>,
    b: &Shape<T>,
    pose_b: &Pose2<T>,
) -> Result<PairDistance<T>, GeometryError> {
    let feature = closest_feature(a, pose_a, b, pose_b)?;
    let frame = feature.evaluate(pose_a, pose_b)?;
    Ok(PairDistance {
        phi: frame.phi,
        witness_a: frame.witness_object,
        witness_b: frame.witness_other,
        normal: -frame.normal,
        feature,
    })
}

enum PolyFeature {
    Face(usize),
    Vertex(usize),
}

/// Outward unit normal of edge `i` of a counterclockwise polygon.
pub(crate) fn edge_normal<T: Real>(verts: &[Vector2<T>], i: usize) -> Vector2<T> {
    let e = verts[(i + 1) % verts.len()] - verts[i];
    Vector2::new(e.y, -e.x).normalize()
}

/// Closest polygon feature to a point.
fn point_vs_polygon<T: Real>(c: &Vector2<T>, verts: &[Vector2<T>]) -> PolyFeature {
    let n = verts.len();
    let seps: Vec<T> = (0..n).map(|i| edge_normal(verts, i).dot(&(c - verts[i]))).collect();
    if seps.iter().all(|&s| s <= T::zero()) {
        let tol = T::lit(1e-12);
        // on a corner: two consecutive edges are tight
        for i in 0..n {
            if seps[i] >= -tol && seps[(i + 1) % n] >= -tol {
                return PolyFeature::Vertex((i + 1) % n);
            }
        }
        return PolyFeature::Face(argmax(&seps));
    }
    let mut best = (T::max_value().unwrap(), PolyFeature::Vertex(0));
    for i in 0..n {
        let a = verts[i];
        let e = verts[(i + 1) % n] - a;
        let t = (c - a).dot(&e) / e.norm_squared();
        let (d, feat) = if t <= T::zero() {
            ((c - a).norm(), PolyFeature::Vertex(i))
        } else if t >= T::one() {
            ((c - verts[(i + 1) % n]).norm(), PolyFeature::Vertex((i + 1) % n))
        } else {
            (edge_normal(verts, i).dot(&(c - a)).abs(), PolyFeature::Face(i))
        };
        if d < best.0 {
            best = (d, feat);
        }
    }
    best.1
}

fn argmax<T: Real>(v: &[T]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Minimum over `other`'s vertices of the separation from edge `i` of `verts`,
/// with the minimizing vertex.
pub(crate) fn edge_separation<T: Real>(verts: &[Vector2<T>], i: usize, other: &[Vector2<T>]) -> (T, usize) {
    let n = edge_normal(verts, i);
    let mut best = (T::max_value().unwrap(), 0);
    for (j, v) in other.iter().enumerate() {
        let s = n.dot(&(v - verts[i]));
        if s < best.0 {
            best = (s, j);
        }
    }
    best
}

/// Best separating axis among the edges of both polygons:
/// `(separation, reference is A, edge index, deepest vertex of the other)`.
/// Ties favour `A`.
pub(crate) fn sat_axis<T: Real>(va: &[Vector2<T>], vb: &[Vector2<T>]) -> (T, bool, usize, usize) {
    let mut best: Option<(T, bool, usize, usize)> = None;
    let tie = T::lit(1e-12);
    for i in 0..va.len() {
        let (s, j) = edge_separation(va, i, vb);
        if best.is_none_or(|b| s > b.0 + tie) {
            best = Some((s, true, i, j));
        }
    }
    for i in 0..vb.len() {
        let (s, j) = edge_separation(vb, i, va);
        if best.is_none_or(|b| s > b.0 + tie) {
            best = Some((s, false, i, j));
        }
    }
    best.expect("polygons have edges")
}

fn world_vertices<T: Real>(shape: &Shape<T>, pose: &Pose2<T>) -> Vec<Vector2<T>> {
    shape.local_vertices().iter().map(|v| pose.apply(v)).collect()
}

/// Picks the feature pair realizing the signed distance between `a` and `b`.
/// Feature coordinates are expressed in each body's own frame.
pub fn closest_feature<T: Real>(
    a: &Shape<T>,
    pose_a: &Pose2<T>,
    b: &Shape<T>,
    pose_b: &Pose2<T>,
) -> Result<Feature<T>, GeometryError> {
    let origin = Vector2::zeros();
    match (a, b) {
        (Shape::HalfPlane { .. }, Shape::HalfPlane { .. }) => {
            Err(GeometryError::UnsupportedPair("half-plane against half-plane"))
        }
        (_, Shape::HalfPlane { normal }) => {
            let face_normal = vec2(*normal);
            if let Some(radius) = a.round_radius() {
                return Ok(Feature::PointOnA {
                    point: origin,
                    radius,
                    face_point: origin,
                    face_normal,
                });
            }
            let n = pose_b.rotate(&face_normal);
            let local = a.local_vertices();
            let j = lowest_along(&world_vertices(a, pose_a), &n);
            Ok(Feature::PointOnA {
                point: local[j],
                radius: T::zero(),
                face_point: origin,
                face_normal,
            })
        }
        (Shape::HalfPlane { .. }, _) => Ok(closest_feature(b, pose_b, a, pose_a)?.swapped()),
        (_, _) => match (a.round_radius(), b.round_radius()) {
            (Some(ra), Some(rb)) => Ok(Feature::PointPoint {
                a: origin,
                a_radius: ra,
                b: origin,
                b_radius: rb,
            }),
            (Some(ra), None) => {
                let vb = world_vertices(b, pose_b);
                let lb = b.local_vertices();
                Ok(match point_vs_polygon(&pose_a.position(), &vb) {
                    PolyFeature::Face(i) => Feature::PointOnA {
                        point: origin,
                        radius: ra,
                        face_point: lb[i],
                        face_normal: edge_normal(&lb, i),
                    },
                    PolyFeature::Vertex(i) => Feature::PointPoint {
                        a: origin,
                        a_radius: ra,
                        b: lb[i],
                        b_radius: T::zero(),
                    },
                })
            }
            (None, Some(_)) => Ok(closest_feature(b, pose_b, a, pose_a)?.swapped()),
            (None, None) => Ok(polygon_vs_polygon(a, pose_a, b, pose_b)),
        },
    }
}

fn lowest_along<T: Real>(verts: &[Vector2<T>], n: &Vector2<T>) -> usize {
    let mut best = 0;
    for j in 1..verts.len() {
        if n.dot(&verts[j]) < n.dot(&verts[best]) {
            best = j;
        }
    }
    best
}

fn polygon_vs_polygon<T: Real>(a: &Shape<T>, pose_a: &Pose2<T>, b: &Shape<T>, pose_b: &Pose2<T>) -> Feature<T> {
    let va = world_vertices(a, pose_a);
    let vb = world_vertices(b, pose_b);
    let la = a.local_vertices();
    let lb = b.local_vertices();
    let (sep, ref_a, i, j) = sat_axis(&va, &vb);
    if sep < -T::lit(1e-12) {
        return if ref_a {
            Feature::PointOnB {
                point: lb[j],
                radius: T::zero(),
                face_point: la[i],
                face_normal: edge_normal(&la, i),
            }
        } else {
            Feature::PointOnA {
                point: la[j],
                radius: T::zero(),
                face_point: lb[i],
                face_normal: edge_normal(&lb, i),
            }
        };
    }

    // separated: exact distance over vertex/edge pairs in both directions
    let mut best: Option<(T, Feature<T>)> = None;
    let mut consider = |d: T, f: Feature<T>| {
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, f));
        }
    };
    for (j, p) in vb.iter().enumerate() {
        match point_vs_polygon(p, &va) {
            PolyFeature::Face(i) => consider(
                edge_normal(&va, i).dot(&(p - va[i])),
                Feature::PointOnB {
                    point: lb[j],
                    radius: T::zero(),
                    face_point: la[i],
                    face_normal: edge_normal(&la, i),
                },
            ),
            PolyFeature::Vertex(i) => consider(
                (p - va[i]).norm(),
                Feature::PointPoint {
                    a: la[i],
                    a_radius: T::zero(),
                    b: lb[j],
                    b_radius: T::zero(),
                },
            ),
        }
    }
    for (j, p) in va.iter().enumerate() {
        if let PolyFeature::Face(i) = point_vs_polygon(p, &vb) {
            consider(
                edge_normal(&vb, i).dot(&(p - vb[i])),
                Feature::PointOnA {
                    point: la[j],
                    radius: T::zero(),
                    face_point: lb[i],
                    face_normal: edge_normal(&lb, i),
                },
            );
        }
    }
    best.expect("polygons have vertices").1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn id() -> Pose2<f64> {
        Pose2::identity()
    }

    fn at(x: f64, y: f64) -> Pose2<f64> {
        Pose2::new(x, y, 0.0)
    }

    /// Brute-force oracle: densely sample the square boundary.
    fn sampled_square_point_distance(side: f64, theta: f64, p: Vector2<f64>) -> f64 {
        let h = side / 2.0;
        let pose = Pose2::new(0.0, 0.0, theta);
        let corners = [[-h, -h], [h, -h], [h, h], [-h, h]];
        let mut best = f64::INFINITY;
        let samples = 200_000;
        for e in 0..4 {
            let a = pose.apply(&vec2(corners[e]));
            let b = pose.apply(&vec2(corners[(e + 1) % 4]));
            for k in 0..=samples {
                let t = k as f64 / samples as f64;
                best = best.min((a + (b - a) * t - p).norm());
            }
        }
        best
    }

    #[test]
    fn disk_vs_point_collinear() {
        let d = signed_distance_pair(&Shape::Disk { radius: 1.0 }, &id(), &Shape::Point, &at(2.0, 0.0)).unwrap();
        assert_abs_diff_eq!(d.phi, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.normal, Vector2::new(1.0, 0.0), epsilon = 1e-15);
        assert_abs_diff_eq!(d.witness_a, Vector2::new(1.0, 0.0), epsilon = 1e-15);
        assert_abs_diff_eq!(d.witness_b, Vector2::new(2.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn square_vs_point_face() {
        let d = signed_distance_pair(&Shape::square(0.4), &id(), &Shape::Point, &at(0.3, 0.0)).unwrap();
        assert_abs_diff_eq!(d.phi, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(d.normal, Vector2::new(1.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn rotated_square_vs_point_vertex() {
        let theta = FRAC_PI_4;
        let p = Vector2::new(0.4, 0.0);
        let oracle = sampled_square_point_distance(0.4, theta, p);
        let expect = 0.4 - 0.2 * 2f64.sqrt();
        assert_abs_diff_eq!(oracle, expect, epsilon = 1e-9);
        let d = signed_distance_pair(&Shape::square(0.4), &Pose2::new(0.0, 0.0, theta), &Shape::Point, &at(0.4, 0.0))
            .unwrap();
        assert_abs_diff_eq!(d.phi, expect, epsilon = 1e-12);
        assert_abs_diff_eq!(d.normal, Vector2::new(1.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn point_inside_polygon_is_negative() {
        let d = signed_distance_pair(&Shape::square(0.4), &id(), &Shape::Point, &at(0.15, 0.01)).unwrap();
        assert_abs_diff_eq!(d.phi, -0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(d.normal, Vector2::new(1.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn disk_vs_half_plane() {
        let wall = Shape::HalfPlane { normal: [0.0, 1.0] };
        let d = signed_distance_pair(&Shape::Disk { radius: 1.0 }, &at(0.5, 1.25), &wall, &id()).unwrap();
        assert_abs_diff_eq!(d.phi, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(d.normal, Vector2::new(0.0, -1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(d.witness_b, Vector2::new(0.5, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn polygon_vs_polygon_separated_vertex_vertex() {
        let sq = Shape::square(1.0);
        let d = signed_distance_pair(&sq, &id(), &sq, &at(2.0, 2.0)).unwrap();
        assert_abs_diff_eq!(d.phi, 2f64.sqrt(), epsilon = 1e-12);
        assert!(matches!(d.feature, Feature::PointPoint { .. }));
    }

    #[test]
    fn polygon_vs_polygon_penetrating() {
        let sq = Shape::square(1.0);
        let d = signed_distance_pair(&sq, &id(), &sq, &at(0.9, 0.2)).unwrap();
        assert_abs_diff_eq!(d.phi, -0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(d.normal, Vector2::new(1.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn polygon_touching_vertex_vertex_uses_centroid_line() {
        let sq = Shape::square(1.0);
        let d = signed_distance_pair(&sq, &id(), &sq, &at(1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(d.phi, 0.0, epsilon = 1e-12);
        let s = 0.5f64.sqrt();
        assert_abs_diff_eq!(d.normal, Vector2::new(s, s), epsilon = 1e-12);
    }

    #[test]
    fn half_plane_pair_unsupported() {
        let w = Shape::<f64>::HalfPlane { normal: [0.0, 1.0] };
        assert!(matches!(
            signed_distance_pair(&w, &id(), &w, &id()),
            Err(GeometryError::UnsupportedPair(_))
        ));
    }

    #[test]
    fn swapping_negates_normal() {
        let cases: Vec<(Shape<f64>, Pose2<f64>, Shape<f64>, Pose2<f64>)> = vec![
            (Shape::Disk { radius: 0.5 }, at(0.1, 0.2), Shape::square(0.4), Pose2::new(1.0, 0.3, 0.4)),
            (Shape::square(0.4), Pose2::new(0.0, 0.0, 0.3), Shape::Point, at(0.5, 0.4)),
            (Shape::square(0.4), id(), Shape::rectangle(0.2, 0.6), Pose2::new(0.5, 0.1, 0.2)),
            (Shape::Disk { radius: 0.5 }, id(), Shape::HalfPlane { normal: [0.0, 1.0] }, at(0.0, -0.7)),
        ];
        for (a, pa, b, pb) in cases {
            let ab = signed_distance_pair(&a, &pa, &b, &pb).unwrap();
            let ba = signed_distance_pair(&b, &pb, &a, &pa).unwrap();
            assert_abs_diff_eq!(ab.phi, ba.phi, epsilon = 1e-12);
            assert_abs_diff_eq!(ab.normal, -ba.normal, epsilon = 1e-12);
        }
    }
}
