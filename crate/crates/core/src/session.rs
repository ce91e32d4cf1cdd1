//! One controller driving one world, a tick at a time.

use crate::control::{
    assist_action, autonomous_policy, blend, shared_pressure, update_belief, Belief, ControllerKind, RationalityModel,
};
use crate::gripper::ObjectId;
use crate::world::{
    episode_result, termination, ActionTwist, EpisodeResult, ObjectStatus, StepLog, Termination, WorldError, WorldEvent,
    WorldState, EPISODE_TIMEOUT_STEPS,
};

#[derive(Clone, Debug)]
pub struct Tick {
    /// Command actually sent to the world.
    pub applied: ActionTwist,
    pub events: Vec<WorldEvent>,
}

#[derive(Clone, Debug)]
pub struct ControlLoop {
    pub world: WorldState,
    pub kind: ControllerKind,
    pub model: RationalityModel,
    /// Present only under shared control.
    pub belief: Option<Belief>,
    pub log: StepLog,
}

impl ControlLoop {
    pub fn new(world: WorldState, kind: ControllerKind, model: RationalityModel) -> Self {
        let belief = (kind == ControllerKind::Shared).then(|| Belief::for_world(&world));
        let log = StepLog::new(world.ee_pose);
        ControlLoop { world, kind, model, belief, log }
    }

    /// Apply one human command (ignored by the autonomous controller) and
    /// advance the world by one step.
    pub fn tick(&mut self, a_h: &ActionTwist) -> Tick {
        let a_h = match self.kind {
            ControllerKind::Autonomous => ActionTwist::zero(),
            _ => a_h.clamped(),
        };
        let applied = match self.kind {
            ControllerKind::Autonomous => autonomous_policy(&self.world),
            ControllerKind::Human => a_h,
            ControllerKind::Shared => self.shared_action(&a_h),
        };
        let events = self.world.step(&applied);
        self.log.record(&self.world, &a_h);
        Tick { applied, events }
    }

    fn shared_action(&mut self, a_h: &ActionTwist) -> ActionTwist {
        let Some(belief) = self.belief.as_mut() else { return *a_h };
        let mut a = if self.world.gripper.held.is_empty() {
            *belief = update_belief(belief, &self.world, a_h, &self.model);
            let a_r = assist_action(belief, &self.world);
            blend(a_h, &a_r, belief)
        } else {
            // carrying: the operator steers, automation only releases
            *a_h
        };
        if a.grasp_cmd.is_none() {
            a.grasp_cmd = shared_pressure(&self.world, belief);
        }
        a
    }

    pub fn termination(&self, target: &ObjectId) -> Result<Option<Termination>, WorldError> {
        termination(&self.world, target)
    }

    /// Termination when no single target is named: any object in the bin, or
    /// the timeout.
    pub fn any_termination(&self) -> Option<Termination> {
        if self.world.objects.values().any(|o| o.status == ObjectStatus::InBin) {
            Some(Termination::Success)
        } else if self.world.steps >= EPISODE_TIMEOUT_STEPS {
            Some(Termination::Timeout)
        } else {
            None
        }
    }

    pub fn result(&self, target: &ObjectId) -> Result<EpisodeResult, WorldError> {
        episode_result(&self.world, &self.log, target)
    }
}
