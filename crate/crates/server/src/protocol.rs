//! Wire messages: one JSON object per line, tagged by `"type"`.

use serde::{Deserialize, Serialize};

use riso_core::adhesion::PressureState;
use riso_core::control::{Belief, ControllerKind};
use riso_core::gripper::GraspType;
use riso_core::world::{ActionTwist, EpisodeResult, GraspCommand, ObjectStatus, Termination, WorldState};
use riso_core::Vec3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum WireMessage {
    // client -> server
    Hello {
        scenario: String,
        controller: ControllerKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        /// Object whose arrival in the bin ends the episode. Without it any
        /// object in the bin does.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<String>,
    },
    HumanAction {
        vx: f64,
        vy: f64,
        vz: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grasp_cmd: Option<GraspCommand>,
    },
    Reset {
        seed: u64,
    },

    // server -> client
    Ready {
        session: u64,
        seed: u64,
        scenario: String,
        controller: ControllerKind,
        /// Drop zone corners, m.
        bin_min: [f64; 3],
        bin_max: [f64; 3],
    },
    StateFrame(StateFrame),
    BeliefFrame(BeliefFrame),
    EpisodeEnd {
        outcome: Termination,
        result: EpisodeResult,
    },
    Error {
        code: ErrorCode,
        detail: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    MalformedJson,
    UnknownScenario,
    NoSession,
    UnexpectedMessage,
    UnknownTarget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PadFrame {
    pub state: PressureState,
    pub position: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GripperFrame {
    pub aperture: f64,
    pub pads: Vec<PadFrame>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectFrame {
    pub id: String,
    pub position: [f64; 3],
    pub height: f64,
    pub status: ObjectStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeldFrame {
    pub object_id: String,
    pub grasp: GraspType,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFrame {
    pub tick: u64,
    pub time: f64,
    pub ee_pose: [f64; 3],
    pub gripper: GripperFrame,
    pub objects: Vec<ObjectFrame>,
    pub held: Vec<HeldFrame>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefFrameEntry {
    pub object_id: String,
    pub grasp: GraspType,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefFrame {
    pub tick: u64,
    pub entries: Vec<BeliefFrameEntry>,
}

pub(crate) fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

impl StateFrame {
    pub fn of(world: &WorldState) -> Self {
        let g = &world.gripper;
        StateFrame {
            tick: world.steps,
            time: world.time,
            ee_pose: arr(&world.ee_pose),
            gripper: GripperFrame {
                aperture: g.aperture,
                pads: (0..g.n_pads()).map(|i| PadFrame { state: g.pads[i].state, position: arr(&g.pad_position(i)) }).collect(),
            },
            objects: world
                .objects
                .values()
                .map(|o| ObjectFrame {
                    id: o.id.to_string(),
                    position: arr(&o.position),
                    height: o.surface.height,
                    status: o.status,
                })
                .collect(),
            held: g.held.iter().map(|b| HeldFrame { object_id: b.object.to_string(), grasp: b.grasp }).collect(),
        }
    }
}

impl BeliefFrame {
    pub fn of(tick: u64, belief: &Belief) -> Self {
        BeliefFrame {
            tick,
            entries: belief
                .entries
                .iter()
                .map(|e| BeliefFrameEntry { object_id: e.object.to_string(), grasp: e.grasp, p: e.p })
                .collect(),
        }
    }
}

impl WireMessage {
    pub fn action(a: &ActionTwist) -> Self {
        WireMessage::HumanAction { vx: a.v.x, vy: a.v.y, vz: a.v.z, grasp_cmd: a.grasp_cmd }
    }

    pub fn error(code: ErrorCode, detail: impl Into<String>) -> Self {
        WireMessage::Error { code, detail: detail.into() }
    }

    /// Frames a lagging client may miss without losing anything it cannot
    /// recover from the next frame.
    pub fn droppable(&self) -> bool {
        matches!(self, WireMessage::StateFrame(_) | WireMessage::BeliefFrame(_))
    }

    /// One line of the wire format, newline included.
    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("wire messages serialize");
        s.push('\n');
        s
    }
}
