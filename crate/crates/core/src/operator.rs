//! Scripted stand-in for a joystick operator.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adhesion::PressureState;
use crate::control::{auto_pressure, displacement, INFLATE_CLEARANCE};
use crate::gripper::{GraspType, ObjectId};
use crate::world::{clamp_speed, ActionTwist, GraspCommand, ObjectStatus, WorldObject, WorldState, DT, V_MAX};
use crate::Vec3;

const SPEED_GAIN: f64 = 2.0;
/// Largest change of commanded velocity per second, m/s².
const MAX_ACCEL: f64 = 2.0;
const CLOSE_TOLERANCE: f64 = 5.0e-3;
const RELEASE_RADIUS: f64 = 0.03;
const BIN_CLEARANCE: f64 = 0.04;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorProfile {
    /// Concentration of commanded directions around the goal direction;
    /// infinity gives exact aim.
    pub beta_h: f64,
    /// Steps between what the operator sees and what the world is.
    pub reaction_delay: usize,
    /// Under assistance the operator lets go of the stick inside this distance
    /// of the goal while the gripper keeps closing in.
    pub idle_threshold: f64,
}

impl Default for OperatorProfile {
    fn default() -> Self {
        OperatorProfile { beta_h: 5.0, reaction_delay: 2, idle_threshold: 0.12 }
    }
}

/// Unit vector drawn from the density proportional to `exp(kappa * mu . x)` on
/// the sphere (Wood's method for three dimensions).
pub fn sample_direction<R: Rng + ?Sized>(mu: &Vec3, kappa: f64, rng: &mut R) -> Vec3 {
    let mu = mu.normalize();
    if kappa.is_infinite() {
        return mu;
    }
    let xi: f64 = rng.random();
    let w = if kappa == 0.0 {
        2.0 * xi - 1.0
    } else {
        (1.0 + (xi + (1.0 - xi) * (-2.0 * kappa).exp()).ln() / kappa).clamp(-1.0, 1.0)
    };
    let phi = 2.0 * PI * rng.random::<f64>();
    let helper = if mu.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u1 = mu.cross(&helper).normalize();
    let u2 = mu.cross(&u1);
    let r = (1.0 - w * w).max(0.0).sqrt();
    w * mu + r * (phi.cos() * u1 + phi.sin() * u2)
}

fn noisy_velocity<R: Rng + ?Sized>(d: Vec3, beta_h: f64, rng: &mut R) -> Vec3 {
    let dist = d.norm();
    if dist == 0.0 {
        return Vec3::zeros();
    }
    let speed = (SPEED_GAIN * dist).min(V_MAX);
    speed * sample_direction(&d, beta_h, rng)
}

fn release_command(g: GraspType) -> GraspCommand {
    match g {
        GraspType::Rigid => GraspCommand::OpenRigid,
        _ => GraspCommand::PadInflate,
    }
}

/// Intent of the operator for one observation: a raw velocity (before
/// smoothing), an optional gripper command, and the remaining distance to the
/// current goal when approaching.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Intent {
    pub v: Vec3,
    pub grasp_cmd: Option<GraspCommand>,
    pub approach_distance: Option<f64>,
}

/// What the operator wants to do given the world as they see it.
pub fn operator_intent<R: Rng + ?Sized>(
    world: &WorldState,
    target: &ObjectId,
    grasp: GraspType,
    profile: &OperatorProfile,
    rng: &mut R,
) -> Intent {
    let still = Intent { v: Vec3::zeros(), grasp_cmd: None, approach_distance: None };

    // something else got picked up by mistake: let it go
    if let Some(b) = world.gripper.held.iter().find(|b| &b.object != target) {
        let cmd = match b.grasp {
            GraspType::Soft(i) if world.gripper.pad_target(i) == PressureState::Positive => None,
            g => Some(release_command(g)),
        };
        return Intent { grasp_cmd: cmd, ..still };
    }
    let Some(o) = world.objects.get(target) else { return still };
    if let Some(b) = world.gripper.held.iter().find(|b| &b.object == target) {
        return carry(world, o, b.grasp, profile, rng);
    }
    if o.status != ObjectStatus::OnTable {
        return still;
    }
    match grasp {
        GraspType::Soft(pad) => approach_soft(world, o, pad, profile, rng),
        _ => approach_rigid(world, o, profile, rng),
    }
}

fn carry<R: Rng + ?Sized>(world: &WorldState, o: &WorldObject, g: GraspType, profile: &OperatorProfile, rng: &mut R) -> Intent {
    let centre = world.bin_region.center();
    let goal = Vec3::new(centre.x, centre.y, world.bin_region.max.z + BIN_CLEARANCE);
    let horizontal = ((goal.x - o.position.x).powi(2) + (goal.y - o.position.y).powi(2)).sqrt();
    if horizontal <= RELEASE_RADIUS && world.bin_region.contains_xy(&o.position) {
        let releasing = match g {
            GraspType::Soft(i) => world.gripper.pad_target(i) == PressureState::Positive,
            _ => false,
        };
        let cmd = (!releasing).then(|| release_command(g));
        return Intent { v: Vec3::zeros(), grasp_cmd: cmd, approach_distance: None };
    }
    let mut d = goal - o.position;
    // lift before swinging over
    if o.position.z < world.bin_region.max.z {
        d.x *= 0.25;
        d.y *= 0.25;
    }
    Intent { v: noisy_velocity(d, profile.beta_h, rng), grasp_cmd: None, approach_distance: None }
}

fn approach_soft<R: Rng + ?Sized>(
    world: &WorldState,
    o: &WorldObject,
    pad: usize,
    profile: &OperatorProfile,
    rng: &mut R,
) -> Intent {
    let g = GraspType::Soft(pad);
    let p = &world.gripper.pads[pad];
    let target_state = world.gripper.pad_target(pad);
    if p.pending.is_some() && target_state == PressureState::Negative {
        return Intent { v: Vec3::zeros(), grasp_cmd: None, approach_distance: None };
    }
    let cmd = auto_pressure(world, &o.id, g);
    let mut d = displacement(world, o, g);
    let gap = world.gripper.pad_position(pad).z - o.top();
    if target_state != PressureState::Positive && gap <= INFLATE_CLEARANCE {
        // the pad has to come up before it can be inflated again
        d = Vec3::new(d.x, d.y, INFLATE_CLEARANCE + 0.01 - gap);
        return Intent { v: noisy_velocity(d, profile.beta_h, rng), grasp_cmd: cmd, approach_distance: None };
    }
    Intent { v: noisy_velocity(d, profile.beta_h, rng), grasp_cmd: cmd, approach_distance: Some(d.norm()) }
}

fn approach_rigid<R: Rng + ?Sized>(world: &WorldState, o: &WorldObject, profile: &OperatorProfile, rng: &mut R) -> Intent {
    let d = displacement(world, o, GraspType::Rigid);
    if world.gripper.aperture < world.gripper.max_aperture && world.gripper.rigid_binding().is_none() {
        return Intent { v: Vec3::zeros(), grasp_cmd: Some(GraspCommand::OpenRigid), approach_distance: None };
    }
    let straddling = world.straddled_object().is_some_and(|s| s.id == o.id);
    let cmd = (straddling && d.norm() <= CLOSE_TOLERANCE).then_some(GraspCommand::CloseRigid);
    Intent { v: noisy_velocity(d, profile.beta_h, rng), grasp_cmd: cmd, approach_distance: Some(d.norm()) }
}

/// One operator command from the world as seen: the noisy intent, smoothed
/// against the previous command, or nothing when idling under assistance.
pub fn operator_action<R: Rng + ?Sized>(
    world: &WorldState,
    target: &ObjectId,
    grasp: GraspType,
    profile: &OperatorProfile,
    assisted: bool,
    rng: &mut R,
) -> ActionTwist {
    SyntheticOperator::react(world, target, grasp, profile, assisted, Vec3::zeros(), None, rng).0
}

/// Operator with memory: delayed observations, the last command sent and the
/// last distance seen.
#[derive(Clone, Debug)]
pub struct SyntheticOperator {
    pub profile: OperatorProfile,
    pub target: ObjectId,
    pub grasp: GraspType,
    pub assisted: bool,
    history: VecDeque<WorldState>,
    last_v: Vec3,
    last_distance: Option<f64>,
    rng: ChaCha8Rng,
}

impl SyntheticOperator {
    pub fn new(profile: OperatorProfile, target: ObjectId, grasp: GraspType, assisted: bool, seed: u64) -> Self {
        SyntheticOperator {
            profile,
            target,
            grasp,
            assisted,
            history: VecDeque::new(),
            last_v: Vec3::zeros(),
            last_distance: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Command for this tick given the current world.
    pub fn act(&mut self, world: &WorldState) -> ActionTwist {
        self.history.push_back(world.clone());
        while self.history.len() > self.profile.reaction_delay + 1 {
            self.history.pop_front();
        }
        let seen = &self.history[0];
        let (a, distance) = Self::react(
            seen,
            &self.target,
            self.grasp,
            &self.profile,
            self.assisted,
            self.last_v,
            self.last_distance,
            &mut self.rng,
        );
        self.last_v = a.v;
        self.last_distance = distance;
        a
    }

    #[allow(clippy::too_many_arguments)]
    fn react<R: Rng + ?Sized>(
        world: &WorldState,
        target: &ObjectId,
        grasp: GraspType,
        profile: &OperatorProfile,
        assisted: bool,
        last_v: Vec3,
        last_distance: Option<f64>,
        rng: &mut R,
    ) -> (ActionTwist, Option<f64>) {
        let intent = operator_intent(world, target, grasp, profile, rng);
        if assisted {
            if let (Some(d), Some(prev)) = (intent.approach_distance, last_distance) {
                if d < profile.idle_threshold && d < prev - 1e-4 {
                    return (ActionTwist::zero(), Some(d));
                }
            }
        }
        let v = last_v + clamp_speed(intent.v - last_v, MAX_ACCEL * DT);
        // a released stick reads as exactly zero
        let v = if intent.v == Vec3::zeros() && v.norm() < 1e-3 { Vec3::zeros() } else { v };
        (ActionTwist { v, grasp_cmd: intent.grasp_cmd }, intent.approach_distance)
    }
}
