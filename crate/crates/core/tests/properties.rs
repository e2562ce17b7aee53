use nalgebra::{DMatrix, DVector, Matrix3};
use proptest::prelude::*;
use rand::SeedableRng;

use quasistatic::geometry::{contact_candidates, FingerBody, Pose2, Shape, World};
use quasistatic::lcp::{brute_force_solve, solve_lemke, LcpProblem, LcpStatus, SolverConfig};
use quasistatic::model::{
    assemble_velocity_lcp, check_force_bound, copositivity_decomposition, solve_instantaneous, FeedbackModel,
    LimitSurface,
};
use quasistatic::scenes::{builtin_scene, Scene, BUILTIN_SCENES};
use quasistatic::stepper::{check_penetration, simulate, step, Plant, State, TerminationReason, TimeStepConfig};
use quasistatic::verify::random::{contact_scene, nonnegative_vector, ContactScene, Rng64};

const EPS: f64 = 1e-9;

fn scene(seed: u64, max_gap: f64) -> ContactScene {
    contact_scene(&mut Rng64::seed_from_u64(seed), max_gap)
}

fn plant(s: &ContactScene) -> Plant<f64> {
    Plant {
        world: s.world.clone(),
        limit_surface: LimitSurface::Ellipsoid(s.a),
        feedback: s.feedback.clone(),
    }
}

fn square(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(lo..hi, n * n).prop_map(move |v| DMatrix::from_vec(n, n, v))
}

/// Monotone (`G^T G + skew + shift`) or diagonally dominant matrices.
fn lcp_strategy() -> impl Strategy<Value = LcpProblem<f64>> {
    (1usize..=6).prop_flat_map(|n| {
        let monotone = (square(n, -1.0, 1.0), square(n, -1.0, 1.0)).prop_map(move |(g, s)| {
            g.transpose() * &g + (&s - s.transpose()) * 0.5 + DMatrix::identity(n, n) * 0.05
        });
        let dominant = square(n, -1.0, 1.0).prop_map(move |mut m| {
            for i in 0..n {
                m[(i, i)] = n as f64 + 0.5;
            }
            m
        });
        (
            prop_oneof![monotone, dominant],
            prop::collection::vec(-2.0..2.0f64, n),
        )
            .prop_map(|(m, q)| LcpProblem::new(m, DVector::from_vec(q)).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lemke_solves_whatever_enumeration_solves(p in lcp_strategy()) {
        let oracle = brute_force_solve(&p).unwrap();
        prop_assume!(!oracle.is_empty());
        let s = solve_lemke(&p, &SolverConfig::default()).unwrap();
        prop_assert_eq!(s.status, LcpStatus::Solved);
        // residuals recomputed here, not taken from the solver
        let w = p.m() * &s.z + p.q();
        prop_assert!(s.z.min() >= -EPS);
        prop_assert!(w.min() >= -EPS);
        prop_assert!(s.z.dot(&w).abs() <= EPS);
    }

    #[test]
    fn lemke_is_deterministic(p in lcp_strategy()) {
        let cfg = SolverConfig::default();
        let a = solve_lemke(&p, &cfg).unwrap();
        let b = solve_lemke(&p, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn nonnegative_q_gives_zero(n in 1usize..6, m in square(5, -3.0, 3.0), q in prop::collection::vec(0.0..2.0f64, 5)) {
        let p = LcpProblem::new(
            m.view((0, 0), (n, n)).into_owned(),
            DVector::from_column_slice(&q[..n]),
        ).unwrap();
        let s = solve_lemke(&p, &SolverConfig::default()).unwrap();
        prop_assert_eq!(s.status, LcpStatus::Solved);
        prop_assert_eq!(s.pivots, 0);
        prop_assert!(s.z.iter().all(|z| *z == 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn compliant_problems_always_solve_within_the_force_bound(seed in any::<u64>()) {
        let s = scene(seed, 0.0);
        let contacts = contact_candidates(&s.world, &s.pose, &s.q_m, 1e-9).unwrap();
        prop_assume!(!contacts.is_empty());
        let lcp = assemble_velocity_lcp(&contacts, &s.a, &s.feedback, &s.v_star).unwrap();
        let sol = solve_instantaneous(&lcp, &SolverConfig::default()).unwrap();
        prop_assert!(sol.feasible);
        prop_assert_eq!(sol.status, LcpStatus::Solved);

        // bound recomputed from an independent eigen-decomposition
        let lmin = s.feedback.b.clone().symmetric_eigen().eigenvalues.min();
        let lhs = s.feedback.c * sol.f_m.norm();
        let rhs = s.v_star.norm() / lmin;
        prop_assert!(lhs <= rhs + 1e-8, "c|F_M| = {lhs}, bound {rhs}");
        let fb = check_force_bound(&sol, &s.feedback, &s.v_star).unwrap();
        prop_assert!(fb.holds);
        prop_assert!((fb.rhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
    }

    #[test]
    fn quadratic_form_splits_into_nonnegative_parts(seed in any::<u64>(), zseed in any::<u64>()) {
        let s = scene(seed, 0.0);
        let contacts = contact_candidates(&s.world, &s.pose, &s.q_m, 1e-9).unwrap();
        prop_assume!(!contacts.is_empty());
        let lcp = assemble_velocity_lcp(&contacts, &s.a, &s.feedback, &s.v_star).unwrap();
        let k = contacts.len();
        let z = nonnegative_vector(&mut Rng64::seed_from_u64(zseed), 4 * k, 5.0);

        // route 1: the assembled matrix
        let quadratic = z.dot(&(lcp.problem.m() * &z));
        // route 2: forces through the Jacobians
        let lambda = z.rows(0, 3 * k).into_owned();
        let sigma = z.rows(3 * k, k).into_owned();
        let f_o = contacts.j_o().transpose() * &lambda;
        let f_m = contacts.j_m().transpose() * &lambda;
        let a = DMatrix::from_column_slice(3, 3, s.a.as_slice());
        let object = f_o.dot(&(a * &f_o));
        let finger = s.feedback.c * f_m.dot(&(&s.feedback.b * &f_m));
        let friction = sigma.dot(&(&contacts.mu * lambda.rows(0, k)));
        let tol = 1e-10 * (1.0 + z.norm_squared());
        prop_assert!(object >= -tol && finger >= -tol && friction >= -tol);
        prop_assert!((quadratic - (object + finger + friction)).abs() <= tol);

        let split = copositivity_decomposition(&lcp, &z).unwrap();
        prop_assert!((split.quadratic - quadratic).abs() <= tol);
        prop_assert!(split.residual() <= tol);
    }

    #[test]
    fn normal_jacobians_match_finite_differences(seed in any::<u64>()) {
        let s = scene(seed, 0.05);
        let set = contact_candidates(&s.world, &s.pose, &s.q_m, 0.1).unwrap();
        let dx = 1e-6;
        let phi = |pose: &Pose2<f64>, q_m: &DVector<f64>| -> Vec<f64> {
            set.contacts
                .iter()
                .map(|c| c.feature.evaluate(pose, &s.world.body_pose(c.other, q_m)).unwrap().phi)
                .collect()
        };
        for j in 0..3 {
            let mut plus = s.pose.to_array();
            let mut minus = plus;
            plus[j] += dx;
            minus[j] -= dx;
            let (a, b) = (phi(&Pose2::from_slice(&plus), &s.q_m), phi(&Pose2::from_slice(&minus), &s.q_m));
            for i in 0..set.len() {
                let fd = (a[i] - b[i]) / (2.0 * dx);
                prop_assert!((fd - set.n_o[(i, j)]).abs() <= 1e-6, "N_O[{i},{j}] = {} vs {fd}", set.n_o[(i, j)]);
            }
        }
        for j in 0..s.q_m.len() {
            let mut plus = s.q_m.clone();
            let mut minus = s.q_m.clone();
            plus[j] += dx;
            minus[j] -= dx;
            let (a, b) = (phi(&s.pose, &plus), phi(&s.pose, &minus));
            for i in 0..set.len() {
                let fd = (a[i] - b[i]) / (2.0 * dx);
                prop_assert!((fd - set.n_m[(i, j)]).abs() <= 1e-6, "N_M[{i},{j}] = {} vs {fd}", set.n_m[(i, j)]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zero_command_moves_nothing(seed in any::<u64>()) {
        let s = scene(seed, 0.05);
        let r = step(&plant(&s), &State::new(s.pose, s.q_m.clone()), &DVector::zeros(s.q_m.len()),
            &TimeStepConfig::for_scalar::<f64>(0.025)).unwrap();
        prop_assert!(r.dq_o.amax() <= 1e-12);
        prop_assert!(r.dq_m.amax() <= 1e-12);
    }

    #[test]
    fn zero_gain_matrix_reproduces_perfect_tracking(seed in any::<u64>(), c in 1e-3..10.0f64) {
        let s = scene(seed, 0.05);
        let world = World { fingers: s.world.fingers[..1].to_vec(), statics: vec![], ..s.world.clone() };
        let q_m = s.q_m.rows(0, 2).into_owned();
        let toward = (s.pose.position() - nalgebra::Vector2::new(q_m[0], q_m[1])).normalize() * 0.5;
        let v = DVector::from_vec(vec![toward.x, toward.y]);
        let ideal = Plant { world: world.clone(), limit_surface: LimitSurface::Ellipsoid(s.a),
            feedback: FeedbackModel { b: DMatrix::identity(2, 2), c: 0.0 } };
        let zero_b = Plant { feedback: FeedbackModel { b: DMatrix::zeros(2, 2), c }, ..ideal.clone() };
        let cfg = TimeStepConfig::for_scalar::<f64>(0.025);
        let cmd = |_: f64, _: &State<f64>| v.clone();
        let x = simulate(&ideal, State::new(s.pose, q_m.clone()), &cmd, 0.25, &cfg).unwrap();
        let y = simulate(&zero_b, State::new(s.pose, q_m.clone()), &cmd, 0.25, &cfg).unwrap();
        prop_assert_eq!(x.records.len(), y.records.len());
        prop_assert_eq!(x.termination.is_some(), y.termination.is_some());
        for (a, b) in x.records.iter().zip(&y.records) {
            prop_assert!((a.state.q_o.to_array()[0] - b.state.q_o.to_array()[0]).abs() <= 1e-12);
            prop_assert!((a.state.q_o.to_array()[1] - b.state.q_o.to_array()[1]).abs() <= 1e-12);
            prop_assert!((a.state.q_o.to_array()[2] - b.state.q_o.to_array()[2]).abs() <= 1e-12);
            prop_assert!((&a.state.q_m - &b.state.q_m).amax() <= 1e-12);
        }
    }

    #[test]
    fn converged_steps_do_not_penetrate(seed in any::<u64>()) {
        let s = scene(seed, 0.05);
        let p = plant(&s);
        let v = s.v_star.clone();
        let cmd = move |_: f64, _: &State<f64>| v.clone();
        let traj = simulate(&p, State::new(s.pose, s.q_m.clone()), &cmd, 0.5, &TimeStepConfig::for_scalar::<f64>(0.025)).unwrap();
        let mut checked = traj.clone();
        match traj.termination.as_ref().map(|t| &t.reason) {
            None => {}
            Some(TerminationReason::Unconverged) => { checked.records.pop(); }
            Some(other) => prop_assert!(false, "rollout stopped: {other:?}"),
        }
        let pen = check_penetration(&p.world, &checked, 1e-4).unwrap();
        prop_assert!(pen.flagged.is_empty(), "max penetration {}", pen.max_penetration);
    }

    #[test]
    fn scenes_round_trip_byte_identically(i in 0usize..BUILTIN_SCENES.len(), c in 0.0..5.0f64, h in prop::sample::select(vec![0.01, 0.025, 0.05])) {
        let s = builtin_scene(BUILTIN_SCENES[i]).unwrap().with_c(c).with_timing(Some(h), None);
        let text = s.to_json();
        let back = Scene::from_json(&text).unwrap();
        prop_assert_eq!(&back.to_json(), &text);
        prop_assert_eq!(back, s);
    }
}

#[test]
fn pinch_with_point_fingers_tracks_nothing() {
    // symmetric squeeze of a disk: no net wrench, so no object motion
    let world = World {
        object: Shape::Disk { radius: 0.5 },
        fingers: vec![
            FingerBody { shape: Shape::Point, mu: 0.5 },
            FingerBody { shape: Shape::Point, mu: 0.5 },
        ],
        statics: vec![],
    };
    let q_m = DVector::from_vec(vec![-0.5, 0.0, 0.5, 0.0]);
    let contacts = contact_candidates(&world, &Pose2::identity(), &q_m, 1e-9).unwrap();
    let v = DVector::from_vec(vec![1.0, 0.0, -1.0, 0.0]);
    let lcp = assemble_velocity_lcp(&contacts, &Matrix3::identity(), &FeedbackModel::identity(4, 0.1), &v).unwrap();
    let sol = solve_instantaneous::<f64>(&lcp, &SolverConfig::default()).unwrap();
    assert!(sol.v_o.amax() <= 1e-12);
    assert!(sol.v_m.amax() <= 1e-12);
    // c F_M = v*, so each normal force is |v*_i| / c
    assert!((sol.lambda_n[0] - 10.0).abs() <= 1e-9);
    assert!((sol.lambda_n[1] - 10.0).abs() <= 1e-9);
}
