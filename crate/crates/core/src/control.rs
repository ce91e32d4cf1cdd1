//! Controllers: autonomous pick-and-place, intent inference over
//! (object, grasp) hypotheses, assistive motion and pressure automation.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adhesion::PressureState;
use crate::gripper::{GraspType, ObjectId};
use crate::world::{clamp_speed, ActionTwist, GraspCommand, ObjectStatus, WorldObject, WorldState, ALIGN_TOLERANCE, DT, V_MAX};
use crate::Vec3;

pub const DEFAULT_BETA: f64 = 5.0;
pub const EPSILON_FLOOR: f64 = 1.0e-4;
/// Upper bound on the robot's share of a blended command.
pub const MAX_ASSIST: f64 = 0.7;
/// Objects taller than this are pinched, shorter ones picked with a pad.
pub const RIGID_HEIGHT_THRESHOLD: f64 = 0.075;
/// Pads inflate only when at least this far above the object.
pub const INFLATE_CLEARANCE: f64 = 0.03;
/// Belief confidence needed before pressure automation acts on an intent.
pub const PRESSURE_CONFIDENCE: f64 = 0.5;
/// Proportional gain turning a displacement into a velocity, 1/s.
pub const ASSIST_GAIN: f64 = 2.0;

const POLICY_GAIN: f64 = 2.0;
const POLICY_MAX_VERTICAL: f64 = 0.1;
const POLICY_MAX_ACCEL: f64 = 2.0;
const TRAVEL_CLEARANCE: f64 = 0.05;
const CARRY_HEIGHT: f64 = 0.2;
const RIGID_GRASP_DEPTH: f64 = 0.03;
const CLOSE_TOLERANCE: f64 = 5.0e-3;
const RELEASE_RADIUS: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Autonomous,
    Human,
    Shared,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] = [ControllerKind::Autonomous, ControllerKind::Human, ControllerKind::Shared];

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Autonomous => "autonomous",
            ControllerKind::Human => "human",
            ControllerKind::Shared => "shared",
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown controller {0:?} (expected autonomous, human or shared)")]
pub struct UnknownController(pub String);

impl FromStr for ControllerKind {
    type Err = UnknownController;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ControllerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownController(s.to_owned()))
    }
}

/// Noisily-rational observation model with inverse temperature `beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalityModel {
    pub beta: f64,
}

impl Default for RationalityModel {
    fn default() -> Self {
        RationalityModel { beta: DEFAULT_BETA }
    }
}

impl RationalityModel {
    pub fn new(beta: f64) -> Self {
        assert!(beta.is_finite() && beta >= 0.0, "beta must be finite and >= 0, got {beta}");
        RationalityModel { beta }
    }
}

/// Density on the unit sphere of a direction at cosine `cos` from the mean
/// direction, concentration `beta`. Integrates to one over the sphere.
pub fn direction_density(beta: f64, cos: f64) -> f64 {
    if beta == 0.0 {
        return 1.0 / (4.0 * PI);
    }
    // beta / (4 pi sinh beta) * exp(beta cos), rearranged to avoid overflow
    beta / (2.0 * PI * (1.0 - (-2.0 * beta).exp())) * (beta * (cos - 1.0)).exp()
}

/// Point the grasp is aimed at on object `o`.
pub fn goal_point(o: &WorldObject, g: GraspType) -> Vec3 {
    let top = Vec3::new(o.position.x, o.position.y, o.top());
    let pinch = Vec3::new(o.position.x, o.position.y, o.top() - (0.5 * o.surface.height).min(RIGID_GRASP_DEPTH));
    match g {
        GraspType::Soft(_) => top,
        GraspType::Rigid => pinch,
        GraspType::RigidSoft => 0.5 * (top + pinch),
    }
}

/// Point on the gripper that must reach the goal for grasp type `g`.
pub fn grasp_point(world: &WorldState, g: GraspType) -> Vec3 {
    match g {
        GraspType::Soft(i) => world.gripper.pad_position(i),
        GraspType::Rigid => world.gripper.rigid_point(),
        GraspType::RigidSoft => 0.5 * (world.gripper.rigid_point() + world.gripper.pad_position(0)),
    }
}

/// `o - s_g` for one hypothesis.
pub fn displacement(world: &WorldState, o: &WorldObject, g: GraspType) -> Vec3 {
    goal_point(o, g) - grasp_point(world, g)
}

/// Grasp types considered for every object.
pub fn grasp_set(world: &WorldState) -> Vec<GraspType> {
    let mut g = vec![GraspType::Rigid];
    g.extend((0..world.gripper.n_pads()).map(GraspType::Soft));
    if world.multi_object_targets {
        g.push(GraspType::RigidSoft);
    }
    g
}

/// Grasp type the autonomous rule picks for an object of this height.
pub fn preferred_grasp(height: f64) -> GraspType {
    if height > RIGID_HEIGHT_THRESHOLD {
        GraspType::Rigid
    } else {
        GraspType::Soft(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefEntry {
    pub object: ObjectId,
    pub grasp: GraspType,
    pub p: f64,
}

/// Joint distribution over (object, grasp type) hypotheses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    pub entries: Vec<BeliefEntry>,
    pub epsilon_floor: f64,
}

impl Belief {
    /// Uniform over the given hypotheses.
    pub fn uniform(hypotheses: impl IntoIterator<Item = (ObjectId, GraspType)>) -> Self {
        let mut entries: Vec<BeliefEntry> =
            hypotheses.into_iter().map(|(object, grasp)| BeliefEntry { object, grasp, p: 0.0 }).collect();
        let n = entries.len() as f64;
        for e in &mut entries {
            e.p = 1.0 / n;
        }
        Belief { entries, epsilon_floor: EPSILON_FLOOR }
    }

    /// Uniform over every object on the table and every grasp type in play.
    pub fn for_world(world: &WorldState) -> Self {
        let grasps = grasp_set(world);
        Self::uniform(
            world
                .objects_with(ObjectStatus::OnTable)
                .flat_map(|o| grasps.iter().map(move |g| (o.id.clone(), *g))),
        )
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, object: &ObjectId, grasp: GraspType) -> Option<f64> {
        self.entries.iter().find(|e| &e.object == object && e.grasp == grasp).map(|e| e.p)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.p).sum()
    }

    /// Most probable hypothesis; ties go to the earliest entry.
    pub fn argmax(&self) -> Option<&BeliefEntry> {
        self.entries.iter().fold(None, |best: Option<&BeliefEntry>, e| match best {
            Some(b) if b.p >= e.p => Some(b),
            _ => Some(e),
        })
    }

    pub fn confidence(&self) -> f64 {
        self.argmax().map_or(0.0, |e| e.p)
    }

    /// Renormalise, then lift every entry to at least the floor while keeping
    /// the total at one.
    fn normalize_with_floor(&mut self) {
        let total = self.total();
        if !(total > 0.0 && total.is_finite()) {
            let n = self.entries.len() as f64;
            for e in &mut self.entries {
                e.p = 1.0 / n;
            }
            return;
        }
        for e in &mut self.entries {
            e.p /= total;
        }
        let floor = self.epsilon_floor;
        if floor * self.entries.len() as f64 >= 1.0 {
            let n = self.entries.len() as f64;
            for e in &mut self.entries {
                e.p = 1.0 / n;
            }
            return;
        }
        let mut pinned = vec![false; self.entries.len()];
        loop {
            let mut changed = false;
            for (e, pin) in self.entries.iter().zip(pinned.iter_mut()) {
                if !*pin && e.p < floor {
                    *pin = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            let n_pinned = pinned.iter().filter(|p| **p).count() as f64;
            let free: f64 = self.entries.iter().zip(&pinned).filter(|(_, p)| !**p).map(|(e, _)| e.p).sum();
            let scale = (1.0 - n_pinned * floor) / free;
            for (e, pin) in self.entries.iter_mut().zip(&pinned) {
                e.p = if *pin { floor } else { e.p * scale };
            }
        }
    }
}

/// `P(a_h | s, o, g)`: a density over the direction of the commanded velocity.
/// A zero command carries no direction and gets the uniform density.
pub fn likelihood(a_h: &ActionTwist, world: &WorldState, o: &WorldObject, g: GraspType, model: &RationalityModel) -> f64 {
    let v = a_h.v;
    let d = displacement(world, o, g);
    if v.norm() == 0.0 || d.norm() == 0.0 {
        return direction_density(0.0, 0.0);
    }
    let cos = (v.dot(&d) / (v.norm() * d.norm())).clamp(-1.0, 1.0);
    direction_density(model.beta, cos)
}

/// Bayes update of the belief on one human command.
pub fn update_belief(b: &Belief, world: &WorldState, a_h: &ActionTwist, model: &RationalityModel) -> Belief {
    if a_h.v.norm() == 0.0 {
        return b.clone();
    }
    let mut next = b.clone();
    for e in &mut next.entries {
        let l = match world.objects.get(&e.object) {
            Some(o) => likelihood(a_h, world, o, e.grasp, model),
            None => direction_density(0.0, 0.0),
        };
        e.p *= l;
    }
    next.normalize_with_floor();
    next
}

/// Belief-weighted sum of the displacements `o - s_g`, before gain and clamping.
pub fn assist_displacement(b: &Belief, world: &WorldState) -> Vec3 {
    b.entries
        .iter()
        .filter_map(|e| world.objects.get(&e.object).map(|o| displacement(world, o, e.grasp) * e.p))
        .fold(Vec3::zeros(), |acc, d| acc + d)
}

/// Withhold descent until the horizontal error is within the alignment tolerance.
pub fn descend_last(mut d: Vec3) -> Vec3 {
    let horizontal = (d.x * d.x + d.y * d.y).sqrt();
    if horizontal > ALIGN_TOLERANCE && d.z < 0.0 {
        d.z = 0.0;
    }
    d
}

/// Assistive motion toward the belief-weighted goal.
pub fn assist_action(b: &Belief, world: &WorldState) -> ActionTwist {
    let d = descend_last(assist_displacement(b, world));
    ActionTwist::velocity(clamp_speed(ASSIST_GAIN * d, V_MAX))
}

/// Robot share of the blended command.
pub fn assist_weight(b: &Belief) -> f64 {
    b.confidence().clamp(0.0, MAX_ASSIST)
}

/// `(1 - a) a_h + a a_r`; a human gripper command always takes precedence.
pub fn blend(a_h: &ActionTwist, a_r: &ActionTwist, b: &Belief) -> ActionTwist {
    let alpha = assist_weight(b);
    ActionTwist {
        v: (1.0 - alpha) * a_h.v + alpha * a_r.v,
        grasp_cmd: a_h.grasp_cmd.or(a_r.grasp_cmd),
    }
}

/// Pressure command, if any, that advances a pad grasp of `target` with `g`.
pub fn auto_pressure(world: &WorldState, target: &ObjectId, g: GraspType) -> Option<GraspCommand> {
    let GraspType::Soft(pad) = g else { return None };
    let p = world.gripper.pads.get(pad)?;
    let goal_state = world.gripper.pad_target(pad);
    if let Some(b) = world.gripper.pad_binding(pad) {
        let o = world.objects.get(&b.object)?;
        let over_bin = world.bin_region.contains_xy(&o.position);
        return (over_bin && goal_state != PressureState::Positive).then_some(GraspCommand::PadInflate);
    }
    let o = world.objects.get(target)?;
    if o.status != ObjectStatus::OnTable {
        return None;
    }
    let pad_pos = world.gripper.pad_position(pad);
    let gap = pad_pos.z - o.top();
    if gap > INFLATE_CLEARANCE {
        return (goal_state != PressureState::Positive).then_some(GraspCommand::PadInflate);
    }
    let touching = world.pad_contact(pad).is_some_and(|c| &c.object == target);
    (touching && p.state == PressureState::Positive && p.pending.is_none()).then_some(GraspCommand::PadVacuum)
}

/// Pressure automation under shared control: releases over the bin whatever
/// a pad holds, otherwise acts on a confident soft intent.
pub fn shared_pressure(world: &WorldState, b: &Belief) -> Option<GraspCommand> {
    for pad in 0..world.gripper.n_pads() {
        if let Some(binding) = world.gripper.pad_binding(pad) {
            return auto_pressure(world, &binding.object, GraspType::Soft(pad));
        }
    }
    let top = b.argmax()?;
    if b.confidence() < PRESSURE_CONFIDENCE {
        return None;
    }
    auto_pressure(world, &top.object, top.grasp)
}

/// Nearest object on the table, measured horizontally from the end effector.
pub fn nearest_object(world: &WorldState) -> Option<&WorldObject> {
    world
        .objects_with(ObjectStatus::OnTable)
        .min_by(|a, b| a.horizontal_distance(&world.ee_pose).total_cmp(&b.horizontal_distance(&world.ee_pose)))
}

/// Bounded proportional velocity toward `d`, rate-limited against the current
/// end-effector velocity so holds are not shaken loose.
fn smooth_velocity(world: &WorldState, d: Vec3) -> Vec3 {
    let mut v = POLICY_GAIN * d;
    v.z = v.z.clamp(-POLICY_MAX_VERTICAL, POLICY_MAX_VERTICAL);
    let v = clamp_speed(v, V_MAX);
    world.ee_vel + clamp_speed(v - world.ee_vel, POLICY_MAX_ACCEL * DT)
}

fn move_toward(world: &WorldState, from: Vec3, to: Vec3) -> Vec3 {
    smooth_velocity(world, to - from)
}

/// Pick the nearest object with the height rule, carry it to the bin and let go.
pub fn autonomous_policy(world: &WorldState) -> ActionTwist {
    if let Some(b) = world.gripper.held.first() {
        let Some(o) = world.objects.get(&b.object) else { return ActionTwist::zero() };
        return carry_to_bin(world, o, b.grasp);
    }
    let Some(o) = nearest_object(world) else { return ActionTwist::zero() };
    let g = preferred_grasp(o.surface.height);
    match g {
        GraspType::Rigid => approach_rigid(world, o),
        _ => approach_soft(world, o, g),
    }
}

fn carry_to_bin(world: &WorldState, o: &WorldObject, g: GraspType) -> ActionTwist {
    let centre = world.bin_region.center();
    let dx = Vec3::new(centre.x - o.position.x, centre.y - o.position.y, 0.0);
    let lifted = world.ee_pose.z >= CARRY_HEIGHT - 0.01;
    if dx.norm() <= RELEASE_RADIUS && world.bin_region.contains_xy(&o.position) {
        let cmd = match g {
            GraspType::Rigid => Some(GraspCommand::OpenRigid),
            _ => auto_pressure(world, &o.id, g),
        };
        return ActionTwist { v: smooth_velocity(world, Vec3::zeros()), grasp_cmd: cmd };
    }
    let mut d = Vec3::new(0.0, 0.0, CARRY_HEIGHT - world.ee_pose.z);
    if lifted {
        d.x = dx.x;
        d.y = dx.y;
    }
    ActionTwist::velocity(smooth_velocity(world, d))
}

fn approach_soft(world: &WorldState, o: &WorldObject, g: GraspType) -> ActionTwist {
    let GraspType::Soft(pad) = g else { return ActionTwist::zero() };
    let s = world.gripper.pad_position(pad);
    let goal = goal_point(o, g);
    let horizontal = Vec3::new(goal.x - s.x, goal.y - s.y, 0.0);
    let travel_z = o.top() + TRAVEL_CLEARANCE;
    let cmd = auto_pressure(world, &o.id, g);
    let state = world.gripper.pad_target(pad);

    let switching = world.gripper.pads[pad].pending.is_some();
    let v = if horizontal.norm() > 0.5 * ALIGN_TOLERANCE {
        move_toward(world, s, Vec3::new(goal.x, goal.y, travel_z))
    } else if switching && state == PressureState::Negative {
        smooth_velocity(world, Vec3::zeros())
    } else if state != PressureState::Positive {
        // Failed or not yet inflated: back off until inflating is allowed.
        let up = o.top() + INFLATE_CLEARANCE + 0.01;
        move_toward(world, s, Vec3::new(goal.x, goal.y, up.max(s.z)))
    } else {
        move_toward(world, s, goal)
    };
    ActionTwist { v, grasp_cmd: cmd }
}

fn approach_rigid(world: &WorldState, o: &WorldObject) -> ActionTwist {
    let tip = world.gripper.rigid_point();
    let goal = goal_point(o, GraspType::Rigid);
    let horizontal = Vec3::new(goal.x - tip.x, goal.y - tip.y, 0.0);
    let travel_z = o.top() + TRAVEL_CLEARANCE;
    let open = world.gripper.aperture >= world.gripper.max_aperture;

    if !open {
        let up = move_toward(world, tip, Vec3::new(tip.x, tip.y, travel_z.max(tip.z)));
        return ActionTwist { v: up, grasp_cmd: Some(GraspCommand::OpenRigid) };
    }
    if horizontal.norm() > 0.5 * ALIGN_TOLERANCE {
        let z = if tip.z < o.top() { travel_z } else { tip.z.max(travel_z) };
        return ActionTwist::velocity(move_toward(world, tip, Vec3::new(goal.x, goal.y, z)));
    }
    if (tip - goal).norm() <= CLOSE_TOLERANCE && world.straddled_object().is_some_and(|s| s.id == o.id) {
        return ActionTwist { v: smooth_velocity(world, Vec3::zeros()), grasp_cmd: Some(GraspCommand::CloseRigid) };
    }
    ActionTwist::velocity(move_toward(world, tip, goal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adhesion::{AdhesiveParams, Roughness, SurfaceDescriptor};
    use crate::gripper::{GripperConfig, GripperState};
    use crate::world::{BinRegion, Termination};
    use std::collections::BTreeMap;

    fn surface(height: f64, mass: f64) -> SurfaceDescriptor {
        SurfaceDescriptor {
            contact_radius: 0.015,
            curvature: 0.0,
            roughness_spacing: Roughness::Smooth,
            porosity: 0.0,
            mass,
            height,
        }
    }

    pub(crate) fn world(objects: &[(&str, [f64; 3], SurfaceDescriptor)]) -> WorldState {
        let ee = Vec3::new(0.0, 0.0, 0.25);
        let objects: BTreeMap<ObjectId, WorldObject> = objects
            .iter()
            .map(|(id, p, s)| {
                let id = ObjectId::from(*id);
                let o = WorldObject {
                    id: id.clone(),
                    position: Vec3::from(*p),
                    surface: *s,
                    status: ObjectStatus::OnTable,
                    hold_offset: None,
                    grasped_with: None,
                };
                (id, o)
            })
            .collect();
        WorldState {
            time: 0.0,
            steps: 0,
            ee_pose: ee,
            ee_vel: Vec3::zeros(),
            gripper: GripperState::new(GripperConfig::default(), AdhesiveParams::calibrated(), ee),
            objects,
            bin_region: BinRegion { min: Vec3::new(-0.1, 0.3, 0.0), max: Vec3::new(0.1, 0.5, 0.08) },
            rng_seed: 0,
            multi_object_targets: false,
        }
    }

    #[test]
    fn density_integrates_to_one() {
        // midpoint rule in cos over [-1, 1]; the azimuth contributes 2 pi
        for beta in [0.0, 0.5, 5.0, 50.0] {
            let n = 200_000;
            let h = 2.0 / n as f64;
            let s: f64 = (0..n).map(|i| direction_density(beta, -1.0 + (i as f64 + 0.5) * h)).sum();
            assert!((s * h * 2.0 * PI - 1.0).abs() < 1e-6, "beta {beta}");
        }
        assert!(direction_density(1e4, 1.0).is_finite());
    }

    #[test]
    fn controller_names_round_trip() {
        for k in ControllerKind::ALL {
            assert_eq!(k.name().parse::<ControllerKind>().unwrap(), k);
        }
        assert!("teleop".parse::<ControllerKind>().is_err());
    }

    #[test]
    fn height_rule_is_strict() {
        assert_eq!(preferred_grasp(0.080), GraspType::Rigid);
        assert_eq!(preferred_grasp(0.075), GraspType::Soft(0));
    }

    #[test]
    fn floor_holds_and_mass_sums_to_one() {
        let mut b = Belief::uniform((0..5).map(|i| (ObjectId::new(format!("o{i}")), GraspType::Rigid)));
        b.entries[0].p = 1.0;
        for e in &mut b.entries[1..] {
            e.p = 1e-30;
        }
        b.normalize_with_floor();
        assert!((b.total() - 1.0).abs() < 1e-12);
        assert!(b.entries.iter().all(|e| e.p >= EPSILON_FLOOR));
        assert!((b.entries[1].p - EPSILON_FLOOR).abs() < 1e-18);
    }

    #[test]
    fn zero_input_leaves_belief_unchanged() {
        let w = world(&[("a", [0.2, 0.0, 0.0], surface(0.02, 0.01)), ("b", [-0.2, 0.0, 0.0], surface(0.02, 0.01))]);
        let mut b = Belief::for_world(&w);
        b.entries[0].p = 0.7;
        b.entries[1].p = 0.1;
        b.entries[2].p = 0.1;
        b.entries[3].p = 0.1;
        let next = update_belief(&b, &w, &ActionTwist::zero(), &RationalityModel::default());
        assert_eq!(next, b);
    }

    #[test]
    fn nearest_object_is_targeted() {
        let w = world(&[("far", [0.3, 0.0, 0.0], surface(0.02, 0.01)), ("near", [0.1, 0.0, 0.0], surface(0.02, 0.01))]);
        assert_eq!(nearest_object(&w).unwrap().id.as_str(), "near");
        let a = autonomous_policy(&w);
        // heads toward +x where the pad must line up over "near"
        assert!(a.v.x > 0.0);
    }

    #[test]
    fn pressure_sequence_for_soft_target() {
        let mut w = world(&[("a", [0.06, 0.0, 0.0], surface(0.02, 0.01))]);
        let id = ObjectId::from("a");
        w.ee_pose = Vec3::new(0.0, 0.0, 0.07);
        w.gripper.pose = w.ee_pose;
        assert_eq!(auto_pressure(&w, &id, GraspType::Soft(0)), Some(GraspCommand::PadInflate));
        assert_eq!(auto_pressure(&w, &id, GraspType::Rigid), None);
        w.step(&ActionTwist::command(GraspCommand::PadInflate));
        w.step(&ActionTwist::zero());
        assert_eq!(auto_pressure(&w, &id, GraspType::Soft(0)), None);
        while w.pad_contact(0).is_none() {
            w.step(&ActionTwist::velocity(Vec3::new(0.0, 0.0, -0.1)));
        }
        assert_eq!(auto_pressure(&w, &id, GraspType::Soft(0)), Some(GraspCommand::PadVacuum));
    }

    fn run_autonomous(mut w: WorldState, target: &str) -> (WorldState, Option<Termination>) {
        let id = ObjectId::from(target);
        for _ in 0..crate::world::EPISODE_TIMEOUT_STEPS {
            let a = autonomous_policy(&w);
            w.step(&a);
            if let Some(t) = crate::world::termination(&w, &id).unwrap() {
                return (w, Some(t));
            }
        }
        (w, None)
    }

    #[test]
    fn autonomous_soft_pick_reaches_bin() {
        let w = world(&[("a", [0.25, -0.1, 0.0], surface(0.02, 0.05))]);
        let (w, t) = run_autonomous(w, "a");
        assert_eq!(t, Some(Termination::Success));
        assert_eq!(w.objects[&ObjectId::from("a")].grasped_with, Some(GraspType::Soft(0)));
    }

    #[test]
    fn autonomous_rigid_pick_reaches_bin() {
        let w = world(&[("a", [0.25, -0.1, 0.0], surface(0.1, 1.0))]);
        let (w, t) = run_autonomous(w, "a");
        assert_eq!(t, Some(Termination::Success));
        assert_eq!(w.objects[&ObjectId::from("a")].grasped_with, Some(GraspType::Rigid));
    }

    #[test]
    fn autonomous_with_nothing_left_is_a_no_op() {
        let w = world(&[]);
        assert!(autonomous_policy(&w).is_zero());
    }
}
