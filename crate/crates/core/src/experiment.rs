//! Batch episodes and their metrics.

use std::io;

use serde::{Deserialize, Serialize};

use crate::control::{preferred_grasp, ControllerKind, RationalityModel};
use crate::adhesion::AdhesiveParams;
use crate::gripper::ObjectId;
use crate::operator::{OperatorProfile, SyntheticOperator};
use crate::scenario::Scenario;
use crate::session::ControlLoop;
use crate::world::{ActionTwist, EpisodeResult};

/// How independent episodes are spread over threads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses the thread pool when built with the `parallel` feature, otherwise
    /// runs sequentially.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Apply `f` to `0..n`, keeping index order in the output.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Well-mixed 64-bit value derived from a base seed and an index.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub controller: ControllerKind,
    pub profile: OperatorProfile,
    pub model: RationalityModel,
    pub n_trials: usize,
    pub seed: u64,
}

impl TrialConfig {
    pub fn new(controller: ControllerKind, n_trials: usize, seed: u64) -> Self {
        TrialConfig {
            controller,
            profile: OperatorProfile::default(),
            model: RationalityModel::default(),
            n_trials,
            seed,
        }
    }
}

/// One episode aimed at `target`. Autonomous episodes see only the target;
/// operated episodes see the whole scene.
pub fn run_episode(scenario: &Scenario, config: &TrialConfig, target: &ObjectId, seed: u64) -> EpisodeResult {
    let params = AdhesiveParams::calibrated();
    let world = match config.controller {
        ControllerKind::Autonomous => scenario.world_with(params, seed, |o| o.id == target.as_str()),
        _ => scenario.world(params, seed),
    };
    let height = world.objects.get(target).map_or(0.0, |o| o.surface.height);
    let grasp = preferred_grasp(height);
    let assisted = config.controller == ControllerKind::Shared;
    let mut operator = SyntheticOperator::new(config.profile, target.clone(), grasp, assisted, seed);
    let mut lp = ControlLoop::new(world, config.controller, config.model);
    loop {
        // unknown targets are filtered out by the caller
        if lp.termination(target).ok().flatten().is_some() {
            break;
        }
        let a_h = match config.controller {
            ControllerKind::Autonomous => ActionTwist::zero(),
            _ => operator.act(&lp.world),
        };
        lp.tick(&a_h);
    }
    lp.result(target).expect("target exists")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub controller: ControllerKind,
    pub object_id: String,
    pub trials: u64,
    pub successes: u64,
    pub mean_input_steps: f64,
    pub mean_traj_len_m: f64,
}

impl MetricsRow {
    pub fn success_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }

    fn from_episodes<'a>(controller: ControllerKind, object_id: String, eps: impl Iterator<Item = &'a EpisodeResult>) -> Self {
        let (mut n, mut ok, mut inputs, mut traj) = (0u64, 0u64, 0.0, 0.0);
        for e in eps {
            n += 1;
            ok += e.success as u64;
            inputs += e.human_input_steps as f64;
            traj += e.trajectory_length;
        }
        let mean = |s: f64| if n == 0 { 0.0 } else { s / n as f64 };
        MetricsRow {
            controller,
            object_id,
            trials: n,
            successes: ok,
            mean_input_steps: mean(inputs),
            mean_traj_len_m: mean(traj),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub controller: ControllerKind,
    pub seed: u64,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub mean_inputs: f64,
    pub mean_traj: f64,
}

/// Per-object rows in scenario order plus every episode in run order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub controller: ControllerKind,
    pub seed: u64,
    pub rows: Vec<MetricsRow>,
    pub episodes: Vec<EpisodeResult>,
}

/// Object id used for the all-objects row.
pub const AGGREGATE_ID: &str = "all";

impl MetricsTable {
    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn row(&self, object_id: &str) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.object_id == object_id)
    }

    pub fn aggregate(&self) -> MetricsRow {
        MetricsRow::from_episodes(self.controller, AGGREGATE_ID.to_owned(), self.episodes.iter())
    }

    pub fn summary(&self) -> Summary {
        let a = self.aggregate();
        Summary {
            controller: self.controller,
            seed: self.seed,
            trials: a.trials,
            successes: a.successes,
            success_rate: a.success_rate(),
            mean_inputs: a.mean_input_steps,
            mean_traj: a.mean_traj_len_m,
        }
    }

    /// Per-object rows followed by the aggregate row; header only when empty.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.is_empty() {
            w.write_record(["controller", "object_id", "trials", "successes", "mean_input_steps", "mean_traj_len_m"])?;
        } else {
            for r in &self.rows {
                w.serialize(r)?;
            }
            w.serialize(self.aggregate())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary()).expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// `n_trials` episodes, targets assigned round-robin over the scenario's
/// objects, each with its own derived seed.
pub fn run_trials(scenario: &Scenario, config: &TrialConfig) -> MetricsTable {
    run_trials_with(scenario, config, Execution::default())
}

pub fn run_trials_with(scenario: &Scenario, config: &TrialConfig, exec: Execution) -> MetricsTable {
    let ids = scenario.object_ids();
    let n = if ids.is_empty() { 0 } else { config.n_trials };
    log::debug!("{n} {} episodes over {} objects, seed {}, {exec:?}", config.controller, ids.len(), config.seed);
    let episodes = map_indexed(n, exec, |i| {
        let target = &ids[i % ids.len()];
        run_episode(scenario, config, target, derive_seed(config.seed, i as u64))
    });
    let rows = ids
        .iter()
        .map(|id| MetricsRow::from_episodes(config.controller, id.to_string(), episodes.iter().filter(|e| &e.target == id)))
        .filter(|r| r.trials > 0)
        .collect();
    log::debug!("{} of {n} episodes succeeded", episodes.iter().filter(|e| e.success).count());
    MetricsTable { controller: config.controller, seed: config.seed, rows, episodes }
}
