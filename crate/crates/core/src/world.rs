//! Fixed-timestep tabletop world with a kinematic arm.
//!
//! The table is the plane `z = 0`. Objects are upright: `position` is the
//! centre of the base and the grasp face is the top face at `z + height`.
//! Free objects rest on the table; held objects follow the gripper rigidly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adhesion::{PressureState, SurfaceDescriptor};
use crate::gripper::{
    GraspOutcome, GraspType, GripperState, ObjectId, PadContact, PadEvent, CONTACT_TOLERANCE,
};
use crate::Vec3;

/// Simulation step, s (20 Hz).
pub const DT: f64 = 0.05;
/// End-effector speed limit, m/s.
pub const V_MAX: f64 = 0.25;
/// Episodes end after this many steps (two simulated minutes).
pub const EPISODE_TIMEOUT_STEPS: u64 = 2400;
/// Horizontal slack for aligning a pad or the fingers over an object, m.
pub const ALIGN_TOLERANCE: f64 = 0.01;
/// A released object whose base is higher than this falls, m.
const DROP_HEIGHT: f64 = 5.0e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectStatus {
    OnTable,
    Held,
    InBin,
    Dropped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldObject {
    pub id: ObjectId,
    pub position: Vec3,
    pub surface: SurfaceDescriptor,
    pub status: ObjectStatus,
    /// Base position relative to the fingertip midpoint while held.
    pub hold_offset: Option<Vec3>,
    /// Grasp type of the most recent successful grasp.
    pub grasped_with: Option<GraspType>,
}

impl WorldObject {
    pub fn top(&self) -> f64 {
        self.position.z + self.surface.height
    }

    pub fn horizontal_distance(&self, p: &Vec3) -> f64 {
        ((self.position.x - p.x).powi(2) + (self.position.y - p.y).powi(2)).sqrt()
    }

    /// Horizontal reach within which a pad or fingertip counts as over the object.
    pub fn footprint(&self) -> f64 {
        self.surface.contact_radius.max(ALIGN_TOLERANCE)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinRegion {
    pub min: Vec3,
    pub max: Vec3,
}

impl BinRegion {
    pub fn contains_xy(&self, p: &Vec3) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GraspCommand {
    CloseRigid,
    OpenRigid,
    PadInflate,
    PadNeutral,
    PadVacuum,
}

/// End-effector velocity command plus an optional gripper command.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionTwist {
    pub v: Vec3,
    pub grasp_cmd: Option<GraspCommand>,
}

impl Default for ActionTwist {
    fn default() -> Self {
        Self::zero()
    }
}

impl ActionTwist {
    pub fn zero() -> Self {
        ActionTwist { v: Vec3::zeros(), grasp_cmd: None }
    }

    pub fn velocity(v: Vec3) -> Self {
        ActionTwist { v, grasp_cmd: None }
    }

    pub fn command(cmd: GraspCommand) -> Self {
        ActionTwist { v: Vec3::zeros(), grasp_cmd: Some(cmd) }
    }

    pub fn is_zero(&self) -> bool {
        self.grasp_cmd.is_none() && self.v.iter().all(|c| *c == 0.0)
    }

    /// Same action with `|v| <= V_MAX`.
    pub fn clamped(mut self) -> Self {
        self.v = clamp_speed(self.v, V_MAX);
        self
    }
}

pub fn clamp_speed(v: Vec3, max: f64) -> Vec3 {
    let n = v.norm();
    if n > max {
        v * (max / n)
    } else {
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WorldEvent {
    Grasp { object: ObjectId, outcome: GraspOutcome },
    Released { object: ObjectId, status: ObjectStatus },
    Dropped { object: ObjectId, status: ObjectStatus },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub time: f64,
    pub steps: u64,
    pub ee_pose: Vec3,
    pub ee_vel: Vec3,
    pub gripper: GripperState,
    pub objects: BTreeMap<ObjectId, WorldObject>,
    pub bin_region: BinRegion,
    pub rng_seed: u64,
    /// Whether combined rigid-soft targets are in play.
    pub multi_object_targets: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("unknown object id {0:?}")]
    UnknownObject(ObjectId),
}

impl WorldState {
    pub fn object(&self, id: &ObjectId) -> Result<&WorldObject, WorldError> {
        self.objects.get(id).ok_or_else(|| WorldError::UnknownObject(id.clone()))
    }

    pub fn objects_with(&self, status: ObjectStatus) -> impl Iterator<Item = &WorldObject> {
        self.objects.values().filter(move |o| o.status == status)
    }

    /// Object resting (or rigidly held) under pad `i` within contact tolerance.
    pub fn pad_contact(&self, pad: usize) -> Option<PadContact> {
        pad_contact_at(&self.objects, &self.pad_held(), self.gripper.pad_position(pad))
    }

    /// Object whose sides the open fingers currently straddle.
    pub fn straddled_object(&self) -> Option<&WorldObject> {
        let tip = self.gripper.rigid_point();
        self.objects
            .values()
            .filter(|o| o.status == ObjectStatus::OnTable || self.gripper.pad_binding_for(&o.id))
            .filter(|o| o.horizontal_distance(&tip) <= ALIGN_TOLERANCE)
            .filter(|o| tip.z >= o.position.z - 1e-9 && tip.z < o.top())
            .min_by(|a, b| a.horizontal_distance(&tip).total_cmp(&b.horizontal_distance(&tip)))
    }

    fn pad_held(&self) -> Vec<ObjectId> {
        self.gripper
            .held
            .iter()
            .filter(|b| matches!(b.grasp, GraspType::Soft(_)))
            .map(|b| b.object.clone())
            .collect()
    }

    /// Advance one fixed step: dispatch the gripper command, integrate the
    /// end-effector, complete due pad switches and check every hold against
    /// the finite-difference vertical acceleration.
    pub fn step(&mut self, action: &ActionTwist) -> Vec<WorldEvent> {
        let action = action.clamped();
        let mut events = Vec::new();
        if let Some(cmd) = action.grasp_cmd {
            self.dispatch(cmd, &mut events);
        }

        let old = self.ee_pose;
        let mut new = old + action.v * DT;
        new.z = new.z.max(self.min_ee_height(&new));
        if (new - old).norm() > V_MAX * DT + 1e-12 {
            // climbing onto a taller face would exceed the speed limit: the
            // side of the object blocks the horizontal move
            new = Vec3::new(old.x, old.y, old.z + action.v.z * DT);
            new.z = new.z.max(self.min_ee_height(&new));
        }
        let vel = (new - old) / DT;
        let accel = (vel - self.ee_vel) / DT;
        self.ee_pose = new;
        self.ee_vel = vel;
        self.steps += 1;
        self.time = self.steps as f64 * DT;
        self.gripper.pose = new;

        let objects = &self.objects;
        let pad_held = self.pad_held();
        let pad_events = self.gripper.advance(self.time, |_, pos| pad_contact_at(objects, &pad_held, pos));
        for e in pad_events {
            match e {
                PadEvent::Released { object, .. } => self.resolve_release(object, &mut events, false),
                PadEvent::GraspAttempt { object, outcome, .. } => {
                    if outcome.is_held() {
                        self.attach(&object);
                    }
                    events.push(WorldEvent::Grasp { object, outcome });
                }
            }
        }

        self.carry_held();
        for id in self.gripper.hold_check(accel.z) {
            self.resolve_release(id, &mut events, true);
        }
        events
    }

    /// Pure-value form of [`step`](Self::step).
    pub fn stepped(&self, action: &ActionTwist) -> WorldState {
        let mut next = self.clone();
        next.step(action);
        next
    }

    fn dispatch(&mut self, cmd: GraspCommand, events: &mut Vec<WorldEvent>) {
        let clock = self.time;
        match cmd {
            GraspCommand::CloseRigid => {
                if self.gripper.rigid_binding().is_some() {
                    return;
                }
                match self.straddled_object().map(|o| (o.id.clone(), o.surface)) {
                    Some((id, surface)) => {
                        if let Ok(outcome) = self.gripper.attempt_rigid_grasp(id.clone(), &surface, true) {
                            if outcome.is_held() {
                                self.attach(&id);
                            }
                            events.push(WorldEvent::Grasp { object: id, outcome });
                        }
                    }
                    None => self.gripper.close_empty(),
                }
            }
            GraspCommand::OpenRigid => {
                if let Some(b) = self.gripper.open_rigid() {
                    self.resolve_release(b.object, events, false);
                }
            }
            GraspCommand::PadInflate | GraspCommand::PadNeutral | GraspCommand::PadVacuum => {
                let target = match cmd {
                    GraspCommand::PadInflate => PressureState::Positive,
                    GraspCommand::PadNeutral => PressureState::Neutral,
                    _ => PressureState::Negative,
                };
                for pad in 0..self.gripper.n_pads() {
                    // index is in range by construction
                    let _ = self.gripper.set_pad_state(pad, target, clock);
                }
            }
        }
    }

    fn attach(&mut self, id: &ObjectId) {
        let tip = self.gripper.rigid_point();
        let grasp = self.gripper.grasp_of(id);
        if let Some(o) = self.objects.get_mut(id) {
            o.status = ObjectStatus::Held;
            if o.hold_offset.is_none() {
                o.hold_offset = Some(o.position - tip);
            }
            o.grasped_with = grasp;
        }
    }

    fn carry_held(&mut self) {
        let tip = self.gripper.rigid_point();
        for o in self.objects.values_mut() {
            if o.status == ObjectStatus::Held {
                if let Some(off) = o.hold_offset {
                    o.position = tip + off;
                }
            }
        }
    }

    fn resolve_release(&mut self, id: ObjectId, events: &mut Vec<WorldEvent>, dropped: bool) {
        if self.gripper.is_holding(&id) {
            if let Some(o) = self.objects.get_mut(&id) {
                o.grasped_with = self.gripper.grasp_of(&id);
            }
            return;
        }
        let bin = self.bin_region;
        let Some(o) = self.objects.get_mut(&id) else { return };
        o.hold_offset = None;
        let status = if bin.contains_xy(&o.position) {
            o.position.z = bin.min.z;
            ObjectStatus::InBin
        } else if o.position.z > DROP_HEIGHT {
            o.position.z = 0.0;
            ObjectStatus::Dropped
        } else {
            o.position.z = 0.0;
            ObjectStatus::OnTable
        };
        o.status = status;
        if dropped {
            events.push(WorldEvent::Dropped { object: id, status });
        } else {
            events.push(WorldEvent::Released { object: id, status });
        }
    }

    /// Lowest fingertip height reachable at `ee`: fingertips and pads stay
    /// above the table, pads cannot sink into a free object's top face, and
    /// held objects stay above the table.
    fn min_ee_height(&self, ee: &Vec3) -> f64 {
        let mut floor = 0.0f64;
        for pad in &self.gripper.pads {
            let p = ee + pad.offset;
            floor = floor.max(-pad.offset.z);
            for o in self.objects.values() {
                if o.status == ObjectStatus::Held {
                    continue;
                }
                if o.horizontal_distance(&p) <= o.footprint() {
                    floor = floor.max(o.top() - pad.offset.z);
                }
            }
        }
        for o in self.objects.values().filter(|o| o.status == ObjectStatus::Held) {
            if let Some(off) = o.hold_offset {
                floor = floor.max(-off.z);
            }
        }
        floor
    }
}

impl GripperState {
    /// Whether some pad (not the fingers) holds `object`.
    pub fn pad_binding_for(&self, object: &ObjectId) -> bool {
        self.held.iter().any(|b| &b.object == object && matches!(b.grasp, GraspType::Soft(_)))
    }
}

fn pad_contact_at(
    objects: &BTreeMap<ObjectId, WorldObject>,
    pad_held: &[ObjectId],
    pad: Vec3,
) -> Option<PadContact> {
    objects
        .values()
        .filter(|o| {
            o.status == ObjectStatus::OnTable
                || (o.status == ObjectStatus::Held && !pad_held.contains(&o.id))
        })
        .filter(|o| o.horizontal_distance(&pad) <= o.footprint())
        .map(|o| (o, pad.z - o.top()))
        .filter(|(_, gap)| *gap >= -1e-9 && *gap <= CONTACT_TOLERANCE)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(o, gap)| PadContact { object: o.id.clone(), surface: o.surface, gap: gap.max(0.0) })
}

/// Per-step record used for episode metrics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub time: f64,
    pub ee_pose: Vec3,
    /// The human sent a non-zero action this step.
    pub human_input: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub start: Option<Vec3>,
    pub records: Vec<StepRecord>,
}

impl StepLog {
    pub fn new(start: Vec3) -> Self {
        StepLog { start: Some(start), records: Vec::new() }
    }

    pub fn record(&mut self, world: &WorldState, human: &ActionTwist) {
        self.records.push(StepRecord { time: world.time, ee_pose: world.ee_pose, human_input: !human.is_zero() });
    }

    pub fn trajectory_length(&self) -> f64 {
        let mut prev = match (self.start, self.records.first()) {
            (Some(s), _) => s,
            (None, Some(r)) => r.ee_pose,
            (None, None) => return 0.0,
        };
        let mut total = 0.0;
        for r in &self.records {
            total += (r.ee_pose - prev).norm();
            prev = r.ee_pose;
        }
        total
    }

    pub fn human_input_steps(&self) -> u64 {
        self.records.iter().filter(|r| r.human_input).count() as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Success,
    Dropped,
    Timeout,
}

/// Why the episode is over, if it is.
pub fn termination(world: &WorldState, target: &ObjectId) -> Result<Option<Termination>, WorldError> {
    let o = world.object(target)?;
    Ok(match o.status {
        ObjectStatus::InBin => Some(Termination::Success),
        ObjectStatus::Dropped => Some(Termination::Dropped),
        _ if world.steps >= EPISODE_TIMEOUT_STEPS => Some(Termination::Timeout),
        _ => None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub target: ObjectId,
    pub success: bool,
    pub human_input_steps: u64,
    pub trajectory_length: f64,
    pub wall_steps: u64,
    pub grasp_type_used: Option<GraspType>,
}

pub fn episode_result(world: &WorldState, log: &StepLog, target: &ObjectId) -> Result<EpisodeResult, WorldError> {
    let o = world.object(target)?;
    Ok(EpisodeResult {
        target: target.clone(),
        success: o.status == ObjectStatus::InBin,
        human_input_steps: log.human_input_steps(),
        trajectory_length: log.trajectory_length(),
        wall_steps: world.steps,
        grasp_type_used: o.grasped_with,
    })
}
