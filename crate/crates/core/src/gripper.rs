//! Rigid two-finger pinch combined with switchable adhesive pads.
//!
//! The two mechanisms are decoupled: rigid and pad bindings live side by side
//! and releasing one never touches the other. An object held by both is a
//! combined rigid-soft grasp and its capacity is the sum of both.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adhesion::{force_capacity, AdhesionMode, AdhesiveParams, PressureState, SurfaceDescriptor, GRAVITY};
use crate::Vec3;

/// Coulomb friction between fingers and object.
pub const PINCH_FRICTION: f64 = 0.6;
/// Capacity must exceed weight by this factor for a grasp to take.
pub const SAFETY_FACTOR: f64 = 1.5;
/// Largest pad-to-face gap that still counts as contact, m.
pub const CONTACT_TOLERANCE: f64 = 2.0e-3;
/// Narrowest object the fingers can pinch, m.
pub const MIN_PINCH_WIDTH: f64 = 3.0e-3;
/// Objects lower than this sit under the fingertip clearance, m.
pub const MIN_PINCH_HEIGHT: f64 = 5.0e-3;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub String);

impl ObjectId {
    pub fn new(id: impl Into<String>) -> Self {
        ObjectId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ObjectId {
    fn from(s: &str) -> Self {
        ObjectId(s.to_owned())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GraspType {
    Rigid,
    Soft(usize),
    RigidSoft,
}

impl fmt::Display for GraspType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraspType::Rigid => f.write_str("rigid"),
            GraspType::Soft(i) => write!(f, "soft{i}"),
            GraspType::RigidSoft => f.write_str("rigid_soft"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PendingSwitch {
    pub from: PressureState,
    pub to: PressureState,
    pub ready_at: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pad {
    pub state: PressureState,
    pub pending: Option<PendingSwitch>,
    /// Pad face position relative to the fingertip midpoint.
    pub offset: Vec3,
}

/// One mechanism holding one object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Binding {
    pub object: ObjectId,
    /// `Rigid` or `Soft(pad)`; never `RigidSoft`.
    pub grasp: GraspType,
    /// Load this mechanism can carry, N.
    pub capacity: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FailReason {
    InsufficientCapacity { capacity: f64, required: f64 },
    TooSmall,
    TooWide,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GraspOutcome {
    Held { grasp: GraspType, capacity: f64 },
    Failed(FailReason),
}

impl GraspOutcome {
    pub fn is_held(&self) -> bool {
        matches!(self, GraspOutcome::Held { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GripperError {
    #[error("no pad with index {0}")]
    NoSuchPad(usize),
    #[error("pad {0} already holds an object")]
    PadBusy(usize),
    #[error("pad {pad} must start {expected:?} for this grasp, found {actual:?}")]
    WrongStartState { pad: usize, expected: PressureState, actual: PressureState },
    #[error("pad {pad} is switching pressure")]
    Switching { pad: usize },
    #[error("object face is {gap} m from the pad, beyond contact tolerance")]
    OutOfContact { gap: f64 },
    #[error("fingers are not straddling the object")]
    NotStraddling,
    #[error("fingers already hold an object")]
    FingersBusy,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GripperConfig {
    pub n_pads: usize,
    pub pinch_force: f64,
    pub max_aperture: f64,
}

impl Default for GripperConfig {
    fn default() -> Self {
        GripperConfig { n_pads: 1, pinch_force: 60.0, max_aperture: 0.08 }
    }
}

/// Pad `i` sits on the outer face of a finger: pads alternate between the two
/// fingers (±x), further pads stack along y.
pub fn default_pad_offset(i: usize) -> Vec3 {
    let side = if i % 2 == 0 { 1.0 } else { -1.0 };
    let row = (i / 2) as f64;
    Vec3::new(side * 0.06, row * 0.04, 0.0)
}

/// Something that happened to the gripper while advancing the clock.
#[derive(Clone, Debug, PartialEq)]
pub enum PadEvent {
    Released { pad: usize, object: ObjectId },
    GraspAttempt { pad: usize, object: ObjectId, outcome: GraspOutcome },
}

/// What a pad finds beneath it when its vacuum engages.
#[derive(Clone, Debug)]
pub struct PadContact {
    pub object: ObjectId,
    pub surface: SurfaceDescriptor,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GripperState {
    pub aperture: f64,
    pub max_aperture: f64,
    pub pinch_force: f64,
    pub pads: Vec<Pad>,
    pub held: Vec<Binding>,
    /// Fingertip midpoint in the world frame.
    pub pose: Vec3,
    pub params: AdhesiveParams,
}

impl GripperState {
    pub fn new(config: GripperConfig, params: AdhesiveParams, pose: Vec3) -> Self {
        Self::with_pad_offsets(config, params, pose, (0..config.n_pads).map(default_pad_offset).collect())
    }

    pub fn with_pad_offsets(config: GripperConfig, params: AdhesiveParams, pose: Vec3, offsets: Vec<Vec3>) -> Self {
        GripperState {
            aperture: config.max_aperture,
            max_aperture: config.max_aperture,
            pinch_force: config.pinch_force,
            pads: offsets
                .into_iter()
                .map(|offset| Pad { state: PressureState::Neutral, pending: None, offset })
                .collect(),
            held: Vec::new(),
            pose,
            params,
        }
    }

    pub fn n_pads(&self) -> usize {
        self.pads.len()
    }

    fn pad(&self, i: usize) -> Result<&Pad, GripperError> {
        self.pads.get(i).ok_or(GripperError::NoSuchPad(i))
    }

    pub fn rigid_point(&self) -> Vec3 {
        self.pose
    }

    pub fn pad_position(&self, i: usize) -> Vec3 {
        self.pose + self.pads[i].offset
    }

    pub fn pad_binding(&self, pad: usize) -> Option<&Binding> {
        self.held.iter().find(|b| b.grasp == GraspType::Soft(pad))
    }

    pub fn rigid_binding(&self) -> Option<&Binding> {
        self.held.iter().find(|b| b.grasp == GraspType::Rigid)
    }

    pub fn is_holding(&self, object: &ObjectId) -> bool {
        self.held.iter().any(|b| &b.object == object)
    }

    /// Combined grasp type currently holding `object`.
    pub fn grasp_of(&self, object: &ObjectId) -> Option<GraspType> {
        let mut rigid = false;
        let mut soft = None;
        for b in self.held.iter().filter(|b| &b.object == object) {
            match b.grasp {
                GraspType::Rigid => rigid = true,
                g => soft = Some(g),
            }
        }
        match (rigid, soft) {
            (true, Some(_)) => Some(GraspType::RigidSoft),
            (true, None) => Some(GraspType::Rigid),
            (false, s) => s,
        }
    }

    /// Pressure state the pad will be in once any pending switch finishes.
    pub fn pad_target(&self, i: usize) -> PressureState {
        let pad = &self.pads[i];
        pad.pending.map_or(pad.state, |p| p.to)
    }

    /// Request a pressure switch on one pad. The switch takes effect
    /// `switch_latency` after `clock`, when [`advance`](Self::advance) reaches it.
    pub fn set_pad_state(&mut self, pad: usize, target: PressureState, clock: f64) -> Result<(), GripperError> {
        let latency = self.params.switch_latency;
        let p = self.pads.get_mut(pad).ok_or(GripperError::NoSuchPad(pad))?;
        match p.pending {
            Some(pending) if pending.to == target => {}
            Some(_) | None if p.state == target => p.pending = None,
            _ => {
                p.pending = Some(PendingSwitch { from: p.state, to: target, ready_at: clock + latency });
            }
        }
        Ok(())
    }

    /// Complete every pad switch due by `clock`. Switching into vacuum
    /// attempts an adhesive grasp on whatever `probe` reports under the pad;
    /// switching a holding pad out of vacuum releases its object.
    pub fn advance<F>(&mut self, clock: f64, mut probe: F) -> Vec<PadEvent>
    where
        F: FnMut(usize, Vec3) -> Option<PadContact>,
    {
        let mut events = Vec::new();
        for i in 0..self.pads.len() {
            let Some(pending) = self.pads[i].pending else { continue };
            if pending.ready_at > clock + 1e-9 {
                continue;
            }
            self.pads[i].pending = None;
            if pending.to == PressureState::Negative {
                let mode = AdhesionMode::from_transition(pending.from, pending.to);
                let contact = probe(i, self.pad_position(i));
                match (mode, contact) {
                    (Some(mode), Some(c)) if self.pad_binding(i).is_none() => {
                        match self.attempt_soft_grasp(i, c.object.clone(), &c.surface, mode, c.gap) {
                            Ok(outcome) => {
                                events.push(PadEvent::GraspAttempt { pad: i, object: c.object, outcome })
                            }
                            Err(_) => self.pads[i].state = PressureState::Negative,
                        }
                    }
                    _ => self.pads[i].state = PressureState::Negative,
                }
            } else {
                self.pads[i].state = pending.to;
                if let Some(pos) = self.held.iter().position(|b| b.grasp == GraspType::Soft(i)) {
                    let b = self.held.remove(pos);
                    events.push(PadEvent::Released { pad: i, object: b.object });
                }
            }
        }
        events
    }

    /// Switch a pad from the mode's start state into vacuum against a face
    /// within contact tolerance. Holds iff the adhesive capacity beats the
    /// weight with the safety margin. The pad ends in vacuum either way.
    pub fn attempt_soft_grasp(
        &mut self,
        pad: usize,
        object: ObjectId,
        surface: &SurfaceDescriptor,
        approach: AdhesionMode,
        gap: f64,
    ) -> Result<GraspOutcome, GripperError> {
        let p = self.pad(pad)?;
        if self.pad_binding(pad).is_some() {
            return Err(GripperError::PadBusy(pad));
        }
        if gap.abs() > CONTACT_TOLERANCE {
            return Err(GripperError::OutOfContact { gap });
        }
        let expected = approach.start_state();
        if p.state != expected || approach.load_state() != PressureState::Negative {
            return Err(GripperError::WrongStartState { pad, expected, actual: p.state });
        }
        self.pads[pad].state = PressureState::Negative;
        self.pads[pad].pending = None;
        let capacity = force_capacity(surface, approach, &self.params);
        let required = surface.weight() * SAFETY_FACTOR;
        if capacity >= required {
            let grasp = GraspType::Soft(pad);
            self.held.push(Binding { object, grasp, capacity, mass: surface.mass });
            Ok(GraspOutcome::Held { grasp, capacity })
        } else {
            Ok(GraspOutcome::Failed(FailReason::InsufficientCapacity { capacity, required }))
        }
    }

    /// Close the fingers on an object between them. Holds iff the Coulomb
    /// pinch `mu * F` beats the weight with the safety margin.
    pub fn attempt_rigid_grasp(
        &mut self,
        object: ObjectId,
        surface: &SurfaceDescriptor,
        straddling: bool,
    ) -> Result<GraspOutcome, GripperError> {
        if self.rigid_binding().is_some() {
            return Err(GripperError::FingersBusy);
        }
        if !straddling {
            return Err(GripperError::NotStraddling);
        }
        let width = 2.0 * surface.contact_radius;
        if width > self.max_aperture {
            return Ok(GraspOutcome::Failed(FailReason::TooWide));
        }
        if width < MIN_PINCH_WIDTH || surface.height < MIN_PINCH_HEIGHT {
            self.aperture = 0.0;
            return Ok(GraspOutcome::Failed(FailReason::TooSmall));
        }
        self.aperture = width;
        let capacity = PINCH_FRICTION * self.pinch_force;
        let required = surface.weight() * SAFETY_FACTOR;
        if capacity >= required {
            self.held.push(Binding { object, grasp: GraspType::Rigid, capacity, mass: surface.mass });
            Ok(GraspOutcome::Held { grasp: GraspType::Rigid, capacity })
        } else {
            Ok(GraspOutcome::Failed(FailReason::InsufficientCapacity { capacity, required }))
        }
    }

    /// Close on nothing.
    pub fn close_empty(&mut self) {
        if self.rigid_binding().is_none() {
            self.aperture = 0.0;
        }
    }

    /// Open the fingers, releasing only the rigid binding.
    pub fn open_rigid(&mut self) -> Option<Binding> {
        self.aperture = self.max_aperture;
        let pos = self.held.iter().position(|b| b.grasp == GraspType::Rigid)?;
        Some(self.held.remove(pos))
    }

    /// Drop every object whose dynamic load `m * (g + |a_z|)` exceeds the
    /// combined capacity of its bindings. Returns the dropped ids.
    pub fn hold_check(&mut self, vertical_accel: f64) -> Vec<ObjectId> {
        let mut per_object: BTreeMap<&ObjectId, (f64, f64)> = BTreeMap::new();
        for b in &self.held {
            let e = per_object.entry(&b.object).or_insert((0.0, b.mass));
            e.0 += b.capacity;
        }
        let dropped: Vec<ObjectId> = per_object
            .into_iter()
            .filter(|(_, (capacity, mass))| mass * (GRAVITY + vertical_accel.abs()) > *capacity)
            .map(|(id, _)| id.clone())
            .collect();
        self.held.retain(|b| !dropped.contains(&b.object));
        dropped
    }
}
