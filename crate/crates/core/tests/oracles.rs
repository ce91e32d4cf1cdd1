use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use riso_core::adhesion::AdhesiveParams;
use riso_core::control::{direction_density, likelihood, ControllerKind, RationalityModel};
use riso_core::gripper::{GraspType, ObjectId};
use riso_core::operator::{sample_direction, OperatorProfile, SyntheticOperator};
use riso_core::scenario::Scenario;
use riso_core::session::ControlLoop;
use riso_core::world::{ActionTwist, WorldState};
use riso_core::Vec3;

/// Vertices of an icosahedron subdivided three times: 642 unit vectors.
fn icosphere() -> Vec<Vec3> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..3 {
        let mut cache = std::collections::HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push((verts[a] + verts[b]).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    verts
}

fn quadrature(f: impl Fn(&Vec3) -> f64) -> f64 {
    let pts = icosphere();
    4.0 * PI * pts.iter().map(f).sum::<f64>() / pts.len() as f64
}

#[test]
fn icosphere_has_642_unit_points() {
    let pts = icosphere();
    assert_eq!(pts.len(), 642);
    assert!(pts.iter().all(|p| (p.norm() - 1.0).abs() < 1e-12));
}

#[test]
fn direction_density_integrates_to_one() {
    let mu = Vec3::new(0.3, -0.5, 0.8).normalize();
    for beta in [0.0, 0.5, 2.0, 5.0, 10.0] {
        let total = quadrature(|x| direction_density(beta, mu.dot(x)));
        assert!((total - 1.0).abs() < 5e-3, "beta {beta}: {total}");
    }
}

#[test]
fn likelihood_ratios_match_quadrature_normalised_exponentials() {
    let world = Scenario::load("household15").unwrap().world(AdhesiveParams::calibrated(), 1);
    let model = RationalityModel::new(5.0);
    let a_h = ActionTwist::velocity(Vec3::new(-0.1, -0.2, -0.05));
    let ids = ["cup", "dice", "weight"];
    // the true normaliser does not depend on the mean direction
    let z = quadrature(|x| (5.0 * x.z).exp());
    let brute: Vec<f64> = ids
        .iter()
        .map(|id| {
            let o = &world.objects[&ObjectId::new(*id)];
            let d = (o.position + Vec3::new(0.0, 0.0, o.surface.height) - world.gripper.pad_position(0)).normalize();
            (5.0 * d.dot(&a_h.v.normalize())).exp() / z
        })
        .collect();
    let ours: Vec<f64> = ids
        .iter()
        .map(|id| likelihood(&a_h, &world, &world.objects[&ObjectId::new(*id)], GraspType::Soft(0), &model))
        .collect();
    for i in 0..ids.len() {
        assert!(((ours[i] - brute[i]) / brute[i]).abs() < 5e-3, "{}: {} vs {}", ids[i], ours[i], brute[i]);
        for j in 0..ids.len() {
            let r_ours = ours[i] / ours[j];
            let r_brute = brute[i] / brute[j];
            assert!(((r_ours - r_brute) / r_brute).abs() < 1e-9);
        }
    }
}

#[test]
fn sampled_directions_have_the_analytic_mean_cosine() {
    let mu = Vec3::new(1.0, 2.0, -0.5).normalize();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for kappa in [0.5, 5.0, 20.0] {
        let n = 40_000;
        let mean: f64 = (0..n).map(|_| sample_direction(&mu, kappa, &mut rng).dot(&mu)).sum::<f64>() / n as f64;
        let expected = 1.0 / kappa.tanh() - 1.0 / kappa;
        assert!((mean - expected).abs() < 0.01, "kappa {kappa}: {mean} vs {expected}");
    }
}

#[test]
fn sampled_directions_are_unit_and_uniform_at_zero_concentration() {
    let mu = Vec3::z();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 40_000;
    let mut sum = Vec3::zeros();
    for _ in 0..n {
        let x = sample_direction(&mu, 0.0, &mut rng);
        assert!((x.norm() - 1.0).abs() < 1e-12);
        sum += x;
    }
    assert!((sum / n as f64).norm() < 0.02);
}

fn operated_episode(kind: ControllerKind, target: &str, seed: u64) -> (WorldState, ControlLoop, Vec<ActionTwist>, Vec<ActionTwist>) {
    let scenario = Scenario::load("household15").unwrap();
    let world = scenario.world(AdhesiveParams::calibrated(), seed);
    let start = world.clone();
    let target = ObjectId::new(target);
    let mut op = SyntheticOperator::new(OperatorProfile::default(), target.clone(), GraspType::Soft(0), kind == ControllerKind::Shared, seed);
    let mut lp = ControlLoop::new(world, kind, RationalityModel::default());
    let (mut applied, mut human) = (Vec::new(), Vec::new());
    while lp.termination(&target).unwrap().is_none() {
        let a_h = op.act(&lp.world);
        let t = lp.tick(&a_h);
        human.push(a_h);
        applied.push(t.applied);
    }
    (start, lp, applied, human)
}

#[test]
fn episode_metrics_match_a_replay_of_the_log() {
    for kind in [ControllerKind::Human, ControllerKind::Shared] {
        let (start, lp, applied, human) = operated_episode(kind, "dice", 17);
        let result = lp.result(&ObjectId::new("dice")).unwrap();
        assert!(result.success);

        let mut replay = start;
        let mut path = vec![replay.ee_pose];
        for a in &applied {
            replay.step(a);
            path.push(replay.ee_pose);
        }
        assert_eq!(replay, lp.world);

        let length: f64 = path.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        let inputs = human.iter().filter(|a| a.v != Vec3::zeros() || a.grasp_cmd.is_some()).count() as u64;
        assert!((result.trajectory_length - length).abs() < 1e-9);
        assert_eq!(result.human_input_steps, inputs);
        assert_eq!(result.wall_steps, applied.len() as u64);
    }
}
