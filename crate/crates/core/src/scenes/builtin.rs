use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::{
    CommandProfile, FeedbackSpec, FingerSpec, FrictionSpec, GainSpec, LimitSurfaceSpec, ManipulatorSpec, NamedGain,
    ObjectSpec, Scene, SceneError, SimSpec, StaticSpec,
};
use crate::geometry::{Pose2, Shape};

pub const BUILTIN_SCENES: [&str; 7] = [
    "two_finger_disk_symmetric",
    "two_finger_disk_asymmetric",
    "two_finger_disk_semicircle",
    "disk_wall_roll",
    "four_finger_pinch",
    "peg_in_hole",
    "square_pinch",
];

/// Push speed for the disk scenes, m/s.
pub const DISK_PUSH_SPEED: f64 = 0.1;
pub const DISK_RADIUS: f64 = 1.0;

/// Peg and slot dimensions, m.
pub const PEG_WIDTH: f64 = 0.1;
pub const PEG_LENGTH: f64 = 0.5;
pub const SLOT_WIDTH: f64 = 1.01 * PEG_WIDTH;
pub const SLOT_DEPTH: f64 = 0.6;
const CHAMFER: f64 = 0.02;

pub fn builtin_scene(name: &str) -> Result<Scene, SceneError> {
    let scene = match name {
        "two_finger_disk_symmetric" => disk_push(
            name,
            [150.0, 210.0],
            CommandProfile::constant(vec![DISK_PUSH_SPEED, 0.0, DISK_PUSH_SPEED, 0.0], 10.0),
        ),
        "two_finger_disk_asymmetric" => disk_push(
            name,
            [150.0, 240.0],
            CommandProfile::constant(vec![DISK_PUSH_SPEED, 0.0, DISK_PUSH_SPEED, 0.0], 10.0),
        ),
        "two_finger_disk_semicircle" => disk_push(
            name,
            [150.0, 210.0],
            CommandProfile::Semicircle {
                speed: DISK_PUSH_SPEED,
                period: 10.0,
                m: 4,
            },
        ),
        "disk_wall_roll" => disk_wall_roll(),
        "four_finger_pinch" => four_finger_pinch(),
        "peg_in_hole" => peg_in_hole(),
        "square_pinch" => square_pinch(),
        other => return Err(SceneError::Unknown(other.to_string())),
    };
    Ok(scene)
}

fn identity_a() -> LimitSurfaceSpec {
    LimitSurfaceSpec::Ellipsoid {
        a_tilde: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    }
}

fn point_finger(x: f64, y: f64) -> FingerSpec {
    FingerSpec {
        shape: Shape::Point,
        q: vec![x, y],
    }
}

/// Unit disk at the origin pushed by two point fingers resting on its
/// boundary at the given polar angles (degrees).
fn disk_push(name: &str, angles_deg: [f64; 2], commands: CommandProfile) -> Scene {
    let fingers = angles_deg
        .iter()
        .map(|a| {
            let r = a * PI / 180.0;
            point_finger(DISK_RADIUS * r.cos(), DISK_RADIUS * r.sin())
        })
        .collect();
    Scene {
        name: Some(name.to_string()),
        reconstructed: true,
        notes: vec![
            format!("finger start angles {angles_deg:?} deg on the disk boundary"),
            format!("push speed {DISK_PUSH_SPEED} m/s"),
            "default c = 0.01".into(),
        ],
        object: ObjectSpec {
            shape: Shape::Disk { radius: DISK_RADIUS },
            pose: Pose2::identity(),
        },
        manipulator: ManipulatorSpec { fingers },
        statics: vec![],
        friction: FrictionSpec {
            fingers: vec![1.0, 1.0],
            statics: vec![],
        },
        feedback: FeedbackSpec {
            b: GainSpec::Named(NamedGain::Identity),
            c: 0.01,
        },
        limit_surface: identity_a(),
        commands,
        sim: SimSpec {
            h: 0.025,
            duration: 10.0,
            activation_distance: None,
        },
    }
}

/// The disk starts 0.2 m above a wall at `y = 0`; fingers on its top and
/// left push diagonally down and to the right, squeezing it into the wall.
fn disk_wall_roll() -> Scene {
    let y0 = DISK_RADIUS + 0.2;
    let v = DISK_PUSH_SPEED * FRAC_1_SQRT_2;
    let mut s = disk_push("disk_wall_roll", [90.0, 180.0], CommandProfile::constant(vec![v, -v, v, -v], 10.0));
    s.object.pose = Pose2::new(0.0, y0, 0.0);
    s.manipulator.fingers = vec![point_finger(0.0, y0 + DISK_RADIUS), point_finger(-DISK_RADIUS, y0)];
    s.statics = vec![StaticSpec {
        shape: Shape::HalfPlane { normal: [0.0, 1.0] },
        pose: Pose2::identity(),
    }];
    s.friction.statics = vec![0.5];
    s.notes = vec![
        "disk starts 0.2 m above the wall".into(),
        "fingers on top and left of the disk".into(),
        format!("command {DISK_PUSH_SPEED} m/s along (1, -1)/sqrt(2)"),
        "wall friction 0.5".into(),
        "default c = 0.01".into(),
    ];
    s
}

fn pinch_fingers(offsets: [f64; 2]) -> Vec<FingerSpec> {
    let d = 0.2 + 0.05;
    vec![
        FingerSpec {
            shape: Shape::Disk { radius: 0.05 },
            q: vec![-d, offsets[0]],
        },
        FingerSpec {
            shape: Shape::Disk { radius: 0.05 },
            q: vec![d, offsets[1]],
        },
        FingerSpec {
            shape: Shape::Disk { radius: 0.05 },
            q: vec![0.0, -d],
        },
        FingerSpec {
            shape: Shape::Disk { radius: 0.05 },
            q: vec![0.0, d],
        },
    ]
}

fn square_base(name: &str, fingers: Vec<FingerSpec>, gain: GainSpec, speed: f64, duration: f64) -> Scene {
    Scene {
        name: Some(name.to_string()),
        reconstructed: true,
        notes: vec![],
        object: ObjectSpec {
            shape: Shape::square(0.4),
            pose: Pose2::identity(),
        },
        manipulator: ManipulatorSpec { fingers },
        statics: vec![],
        friction: FrictionSpec {
            fingers: vec![0.5; 4],
            statics: vec![],
        },
        feedback: FeedbackSpec { b: gain, c: 0.01 },
        limit_surface: identity_a(),
        commands: CommandProfile::constant(vec![speed, 0.0, -speed, 0.0, 0.0, speed, 0.0, -speed], duration),
        sim: SimSpec {
            h: 0.025,
            duration,
            activation_distance: None,
        },
    }
}

/// Square of side 0.4 m touched at all four face midpoints by disk fingers
/// commanded straight inward at unit speed.
fn four_finger_pinch() -> Scene {
    let mut s = square_base(
        "four_finger_pinch",
        pinch_fingers([0.0, 0.0]),
        GainSpec::Named(NamedGain::Identity),
        1.0,
        10.0,
    );
    s.notes = vec!["finger radius 0.05 m".into(), "finger friction 0.5".into()];
    s
}

/// Same square, fingers slightly off the face midlines and driven through
/// unequal gains so the pinched square drifts in +y and spins.
fn square_pinch() -> Scene {
    let gains = [1.0, 1.0, 1.5, 1.5, 0.5, 0.5, 2.0, 2.0];
    let dense = (0..8)
        .map(|i| (0..8).map(|j| if i == j { gains[i] } else { 0.0 }).collect())
        .collect();
    let mut s = square_base("square_pinch", pinch_fingers([0.05, -0.05]), GainSpec::Dense(dense), 0.1, 5.0);
    s.notes = vec![
        "finger radius 0.05 m, side fingers offset 0.05 m from the midline".into(),
        "per-finger gains 1, 1.5, 0.5, 2".into(),
        "command speed 0.1 m/s".into(),
        "finger friction 0.5".into(),
    ];
    s
}

fn left_finger() -> Shape<f64> {
    Shape::Polygon {
        vertices: vec![[0.0, -0.05], [0.0, 0.05], [-0.08, 0.0]],
    }
}

fn right_finger() -> Shape<f64> {
    Shape::Polygon {
        vertices: vec![[0.0, 0.05], [0.0, -0.05], [0.08, 0.0]],
    }
}

/// Thin peg held between two triangular fingers above a chamfered slot whose
/// opening is 1% wider than the peg.
fn peg_in_hole() -> Scene {
    let hw = SLOT_WIDTH / 2.0;
    let left_block = Shape::Polygon {
        vertices: vec![
            [-0.6, -SLOT_DEPTH],
            [-hw, -SLOT_DEPTH],
            [-hw, -CHAMFER],
            [-hw - CHAMFER, 0.0],
            [-0.6, 0.0],
        ],
    };
    let right_block = Shape::Polygon {
        vertices: vec![
            [hw, -SLOT_DEPTH],
            [0.6, -SLOT_DEPTH],
            [0.6, 0.0],
            [hw + CHAMFER, 0.0],
            [hw, -CHAMFER],
        ],
    };

    let x0 = 0.03;
    let y0 = 0.4;
    let grip = 0.17;
    let gap = 0.004;
    let fingers = vec![
        FingerSpec {
            shape: left_finger(),
            q: vec![x0 - PEG_WIDTH / 2.0 - gap, y0 + grip, 0.0],
        },
        FingerSpec {
            shape: right_finger(),
            q: vec![x0 + PEG_WIDTH / 2.0 + gap, y0 + grip, 0.0],
        },
    ];

    // squeeze is kept on in every phase so the grip force stays at squeeze / c
    let sq = 0.05;
    let both = |vx: f64, vy: f64, w: f64| vec![vx + sq, vy, w, vx - sq, vy, w];
    let commands = CommandProfile::phases(&[
        // grasp
        (0.5, both(0.0, 0.0, 0.0)),
        // lower onto the right shoulder of the slot and jam
        (3.5, both(0.0, -0.05, 0.0)),
        // slide left over the chamfer, twisting into the opening
        (2.0, both(-0.015, -0.005, 0.0)),
        // insert
        (6.0, both(0.0, -0.05, 0.0)),
    ]);

    let rho2 = (PEG_LENGTH * PEG_LENGTH + PEG_WIDTH * PEG_WIDTH) / 12.0;
    Scene {
        name: Some("peg_in_hole".into()),
        reconstructed: true,
        notes: vec![
            format!("peg {PEG_WIDTH} m x {PEG_LENGTH} m, slot {SLOT_WIDTH} m wide and {SLOT_DEPTH} m deep"),
            format!("{CHAMFER} m chamfers on the slot edges"),
            "triangular fingers grip 0.17 m above the peg centre".into(),
            "limit surface diag(1, 1, 1/rho^2), rho the peg's radius of gyration".into(),
            "four scripted phases: grasp, jam on the right shoulder, slide and twist, insert".into(),
            "friction 0.8 at the fingers, 0.3 at the slot".into(),
        ],
        object: ObjectSpec {
            shape: Shape::rectangle(PEG_WIDTH, PEG_LENGTH),
            pose: Pose2::new(x0, y0, 0.0),
        },
        manipulator: ManipulatorSpec { fingers },
        statics: vec![
            StaticSpec {
                shape: left_block,
                pose: Pose2::identity(),
            },
            StaticSpec {
                shape: right_block,
                pose: Pose2::identity(),
            },
        ],
        friction: FrictionSpec {
            fingers: vec![0.8, 0.8],
            statics: vec![0.3, 0.3],
        },
        feedback: FeedbackSpec {
            b: GainSpec::Named(NamedGain::Identity),
            c: 0.01,
        },
        limit_surface: LimitSurfaceSpec::Ellipsoid {
            a_tilde: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0 / rho2]],
        },
        commands,
        sim: SimSpec {
            h: 0.05,
            duration: 12.0,
            activation_distance: Some(0.02),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_is_valid() {
        for name in BUILTIN_SCENES {
            let s = builtin_scene(name).unwrap();
            s.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s.name.as_deref(), Some(name));
            assert!(s.reconstructed);
        }
        assert!(matches!(builtin_scene("nope"), Err(SceneError::Unknown(_))));
    }

    #[test]
    fn published_parameters() {
        let s = builtin_scene("two_finger_disk_symmetric").unwrap();
        assert_eq!(s.object.shape, Shape::Disk { radius: 1.0 });
        assert_eq!(s.friction.fingers, vec![1.0, 1.0]);
        assert_eq!(s.gain_matrix::<f64>(), nalgebra::DMatrix::identity(4, 4));
        let peg = builtin_scene("peg_in_hole").unwrap();
        assert_eq!(peg.feedback.c, 0.01);
        assert_eq!(peg.gain_matrix::<f64>(), nalgebra::DMatrix::identity(6, 6));
        assert!((SLOT_WIDTH - 1.01 * PEG_WIDTH).abs() < 1e-15);
        assert_eq!(peg.sim.h, 0.05);
    }
}
