//! Seeded generators for randomized checks.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{FingerBody, Pose2, Shape, StaticBody, World};
use crate::lcp::LcpProblem;
use crate::model::FeedbackModel;

pub type Rng64 = ChaCha8Rng;

fn normal(rng: &mut Rng64) -> f64 {
    // Box-Muller; one draw is enough here
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

fn gaussian_matrix(rng: &mut Rng64, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| normal(rng))
}

/// Random symmetric positive definite matrix with smallest eigenvalue at
/// least `floor`.
pub fn spd(rng: &mut Rng64, n: usize, floor: f64) -> DMatrix<f64> {
    let g = gaussian_matrix(rng, n, n);
    &g * g.transpose() / n as f64 + DMatrix::identity(n, n) * floor
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LcpClass {
    /// `G^T G + S + delta I` with `G` rank deficient and `S` skew-symmetric.
    Monotone,
    /// Positive diagonal dominating random off-diagonal entries.
    PMatrix,
    /// Strictly positive entries.
    Positive,
}

const MONOTONE_SHIFT: f64 = 0.05;

/// Random LCP of size `1..=max_n` from one of the classes Lemke's method is
/// guaranteed to process.
pub fn random_lcp(rng: &mut Rng64, max_n: usize) -> (LcpProblem<f64>, LcpClass) {
    let n = rng.random_range(1..=max_n);
    let class = match rng.random_range(0..3) {
        0 => LcpClass::Monotone,
        1 => LcpClass::PMatrix,
        _ => LcpClass::Positive,
    };
    let m = match class {
        LcpClass::Monotone => {
            let g = gaussian_matrix(rng, n, n);
            let s = gaussian_matrix(rng, n, n);
            let rank_cut = rng.random_range(0..n);
            // drop columns so the symmetric part is only semidefinite
            let g = DMatrix::from_fn(n, n, |i, j| if j < rank_cut { 0.0 } else { g[(i, j)] });
            // the shift bounds |z|; near-skew data gives |z| ~ 1e5, where an
            // absolute complementarity check is below f64 resolution
            g.transpose() * &g + (&s - s.transpose()) * 0.5 + DMatrix::identity(n, n) * MONOTONE_SHIFT
        }
        LcpClass::PMatrix => {
            let mut m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            for i in 0..n {
                m[(i, i)] = n as f64 + rng.random_range(0.5..2.0);
            }
            m
        }
        LcpClass::Positive => DMatrix::from_fn(n, n, |_, _| rng.random_range(0.05..2.0)),
    };
    let q = DVector::from_fn(n, |_, _| normal(rng));
    (LcpProblem::new(m, q).expect("square by construction"), class)
}

/// Object, fingers and static bodies touching the object, with random
/// gains, limit surface and command.
#[derive(Clone, Debug)]
pub struct ContactScene {
    pub world: World<f64>,
    pub pose: Pose2<f64>,
    pub q_m: DVector<f64>,
    /// World-frame force-motion matrix.
    pub a: Matrix3<f64>,
    pub feedback: FeedbackModel<f64>,
    pub v_star: DVector<f64>,
}

fn regular_polygon(rng: &mut Rng64, radius: f64) -> Shape<f64> {
    let n = rng.random_range(3..=6);
    let phase = rng.random_range(0.0..2.0 * PI);
    Shape::Polygon {
        vertices: (0..n)
            .map(|i| {
                let a = phase + 2.0 * PI * i as f64 / n as f64;
                [radius * a.cos(), radius * a.sin()]
            })
            .collect(),
    }
}

/// A boundary point of the object (world frame) with its outward normal,
/// away from polygon corners.
fn boundary_point(rng: &mut Rng64, object: &Shape<f64>, pose: &Pose2<f64>) -> (Vector2<f64>, Vector2<f64>) {
    match object {
        Shape::Disk { radius } => {
            let a: f64 = rng.random_range(0.0..2.0 * PI);
            let u = Vector2::new(a.cos(), a.sin());
            (pose.position() + u * *radius, u)
        }
        Shape::Polygon { vertices } => {
            let i = rng.random_range(0..vertices.len());
            let p = Vector2::new(vertices[i][0], vertices[i][1]);
            let q = Vector2::new(vertices[(i + 1) % vertices.len()][0], vertices[(i + 1) % vertices.len()][1]);
            let s: f64 = rng.random_range(0.15..0.85);
            let local = p + (q - p) * s;
            let e = q - p;
            let n_local = Vector2::new(e.y, -e.x).normalize();
            (pose.apply(&local), pose.rotate(&n_local))
        }
        _ => unreachable!("objects are disks or polygons"),
    }
}

/// Draws a scene whose bodies sit at gaps in `[0, max_gap]` from the object.
/// Round fingers only, plus an optional touching wall for disk objects.
pub fn contact_scene(rng: &mut Rng64, max_gap: f64) -> ContactScene {
    let radius: f64 = rng.random_range(0.2..1.0);
    let object = if rng.random_bool(0.5) {
        Shape::Disk { radius }
    } else {
        regular_polygon(rng, radius)
    };
    let pose = Pose2::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-PI..PI),
    );
    let nf = rng.random_range(1..=4);
    let mut fingers = Vec::with_capacity(nf);
    let mut q = Vec::with_capacity(2 * nf);
    for _ in 0..nf {
        let (p, n) = boundary_point(rng, &object, &pose);
        let gap = if max_gap > 0.0 { rng.random_range(0.0..=max_gap) } else { 0.0 };
        let (shape, r) = if rng.random_bool(0.3) {
            (Shape::Point, 0.0)
        } else {
            let r = rng.random_range(0.02..0.1);
            (Shape::Disk { radius: r }, r)
        };
        let c = p + n * (r + gap);
        fingers.push(FingerBody {
            shape,
            mu: rng.random_range(0.0..1.2),
        });
        q.extend([c.x, c.y]);
    }
    let mut statics = Vec::new();
    if matches!(object, Shape::Disk { .. }) && rng.random_bool(0.4) {
        let a: f64 = rng.random_range(0.0..2.0 * PI);
        let u = Vector2::new(a.cos(), a.sin());
        let origin = pose.position() + u * radius;
        statics.push(StaticBody {
            shape: Shape::HalfPlane { normal: [-u.x, -u.y] },
            pose: Pose2::new(origin.x, origin.y, 0.0),
            mu: rng.random_range(0.0..1.2),
        });
    }
    let m = 2 * nf;
    let a = spd(rng, 3, 0.05);
    let c = 10f64.powf(rng.random_range(-3.0..0.0));
    ContactScene {
        world: World {
            object,
            fingers,
            statics,
        },
        pose,
        q_m: DVector::from_vec(q),
        a: Matrix3::from_fn(|i, j| a[(i, j)]),
        feedback: FeedbackModel {
            b: spd(rng, m, 0.1),
            c,
        },
        v_star: DVector::from_fn(m, |_, _| normal(rng)),
    }
}

/// Disk gripped by two or three point fingers spread around it and commanded
/// inward at random speeds.
pub fn squeeze_scene(rng: &mut Rng64) -> ContactScene {
    let radius: f64 = rng.random_range(0.3..1.0);
    let nf = rng.random_range(2..=3);
    let phase = rng.random_range(0.0..2.0 * PI);
    let mut fingers = Vec::new();
    let mut q = Vec::new();
    let mut v = Vec::new();
    for i in 0..nf {
        let a = phase + 2.0 * PI * i as f64 / nf as f64 + rng.random_range(-0.15..0.15);
        let u = Vector2::new(a.cos(), a.sin());
        fingers.push(FingerBody {
            shape: Shape::Point,
            mu: rng.random_range(0.3..1.0),
        });
        q.extend([radius * u.x, radius * u.y]);
        let s = rng.random_range(0.5..1.5);
        v.extend([-s * u.x, -s * u.y]);
    }
    let m = 2 * nf;
    ContactScene {
        world: World {
            object: Shape::Disk { radius },
            fingers,
            statics: vec![],
        },
        pose: Pose2::identity(),
        q_m: DVector::from_vec(q),
        a: Matrix3::identity(),
        feedback: FeedbackModel::identity(m, 1.0),
        v_star: DVector::from_vec(v),
    }
}

pub fn nonnegative_vector(rng: &mut Rng64, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..scale) })
}
