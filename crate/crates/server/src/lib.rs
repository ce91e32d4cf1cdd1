//! Live teleoperation sessions over TCP, newline-delimited JSON.
//!
//! Each connection owns one session task. The task is the only thing that
//! touches its world; the socket reader and writer talk to it through queues.

pub mod protocol;

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::Serialize;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::mpsc;
use tokio::sync::mpsc::error::{TryRecvError, TrySendError};
use tokio::time::{Interval, MissedTickBehavior};

use riso_core::adhesion::AdhesiveParams;
use riso_core::control::{ControllerKind, RationalityModel};
use riso_core::experiment::derive_seed;
use riso_core::gripper::ObjectId;
use riso_core::scenario::{Scenario, BUNDLED};
use riso_core::session::ControlLoop;
use riso_core::world::{
    episode_result, termination, ActionTwist, EpisodeResult, ObjectStatus, Termination, WorldState, EPISODE_TIMEOUT_STEPS,
};
use riso_core::Vec3;

pub use protocol::{BeliefFrame, ErrorCode, StateFrame, WireMessage};

pub const DEFAULT_PORT: u16 = 8901;

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub addr: SocketAddr,
    /// Wall-clock time between ticks. Each tick advances the world by the
    /// fixed simulation step regardless. Zero runs ticks back to back.
    pub tick_interval: Duration,
    /// Base seed; a session without an explicit seed gets one derived from it.
    pub seed: u64,
    pub model: RationalityModel,
    /// Scenarios a client may name in `Hello`.
    pub scenarios: BTreeMap<String, Scenario>,
    /// Outgoing frames buffered per client before frames are dropped.
    pub queue_depth: usize,
    /// Append one CSV row per finished episode.
    pub log_path: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        let scenarios = BUNDLED
            .iter()
            .map(|name| (name.to_string(), Scenario::load(name).expect("bundled scenarios are valid")))
            .collect();
        ServerConfig {
            addr: SocketAddr::from(([127, 0, 0, 1], DEFAULT_PORT)),
            tick_interval: Duration::from_millis(50),
            seed: 0,
            model: RationalityModel::default(),
            scenarios,
            queue_depth: 64,
            log_path: None,
        }
    }
}

#[derive(Debug, Serialize)]
struct EpisodeRow<'a> {
    session: u64,
    scenario: &'a str,
    controller: ControllerKind,
    seed: u64,
    outcome: Termination,
    target: &'a str,
    success: bool,
    human_input_steps: u64,
    trajectory_length_m: f64,
    wall_steps: u64,
    grasp_type: String,
}

/// Append-only episode log shared by all sessions.
#[derive(Debug)]
pub struct EpisodeLog {
    writer: Mutex<csv::Writer<File>>,
}

impl EpisodeLog {
    pub fn open(path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let fresh = file.metadata()?.len() == 0;
        let writer = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
        Ok(EpisodeLog { writer: Mutex::new(writer) })
    }

    fn append(&self, row: &EpisodeRow<'_>) -> csv::Result<()> {
        let mut w = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        w.serialize(row)?;
        w.flush()?;
        Ok(())
    }
}

struct Shared {
    config: ServerConfig,
    log: Option<EpisodeLog>,
    next_session: AtomicU64,
}

pub struct Server {
    listener: TcpListener,
    shared: Arc<Shared>,
}

impl Server {
    pub async fn bind(config: ServerConfig) -> io::Result<Server> {
        let log = config.log_path.as_deref().map(EpisodeLog::open).transpose()?;
        let listener = TcpListener::bind(config.addr).await?;
        Ok(Server { listener, shared: Arc::new(Shared { config, log, next_session: AtomicU64::new(1) }) })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accept connections until the listener fails.
    pub async fn run(self) -> io::Result<()> {
        loop {
            let (stream, peer) = self.listener.accept().await?;
            let id = self.shared.next_session.fetch_add(1, Ordering::Relaxed);
            log::info!("session {id}: connected from {peer}");
            let shared = Arc::clone(&self.shared);
            tokio::spawn(async move {
                connection(stream, id, shared).await;
                log::info!("session {id}: closed");
            });
        }
    }
}

async fn connection(stream: TcpStream, id: u64, shared: Arc<Shared>) {
    let _ = stream.set_nodelay(true);
    let (rd, mut wr) = stream.into_split();
    let (out_tx, mut out_rx) = mpsc::channel::<WireMessage>(shared.config.queue_depth.max(1));
    let (in_tx, in_rx) = mpsc::channel::<WireMessage>(256);

    let writer = tokio::spawn(async move {
        while let Some(m) = out_rx.recv().await {
            if wr.write_all(m.to_line().as_bytes()).await.is_err() {
                break;
            }
        }
    });

    let errors = out_tx.clone();
    let reader = tokio::spawn(async move {
        let mut lines = BufReader::new(rd).lines();
        while let Ok(Some(line)) = lines.next_line().await {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<WireMessage>(&line) {
                Ok(m) => {
                    if in_tx.send(m).await.is_err() {
                        break;
                    }
                }
                Err(e) => {
                    let _ = errors.send(WireMessage::error(ErrorCode::MalformedJson, e.to_string())).await;
                }
            }
        }
    });

    session_loop(id, &shared, in_rx, out_tx).await;
    reader.abort();
    let _ = writer.await;
}

struct Episode {
    scenario_name: String,
    scenario: Scenario,
    controller: ControllerKind,
    seed: u64,
    target: Option<ObjectId>,
    lp: ControlLoop,
    ended: bool,
}

impl Episode {
    fn start(
        scenario_name: String,
        scenario: Scenario,
        controller: ControllerKind,
        seed: u64,
        target: Option<ObjectId>,
        model: RationalityModel,
    ) -> Self {
        let world = fresh_world(&scenario, controller, seed, target.as_ref());
        let lp = ControlLoop::new(world, controller, model);
        Episode { scenario_name, scenario, controller, seed, target, lp, ended: false }
    }

    fn reset(&mut self, seed: u64) {
        self.seed = seed;
        let world = fresh_world(&self.scenario, self.controller, seed, self.target.as_ref());
        self.lp = ControlLoop::new(world, self.controller, self.lp.model);
        self.ended = false;
    }

    fn ready(&self, session: u64) -> WireMessage {
        let bin = &self.lp.world.bin_region;
        WireMessage::Ready {
            session,
            seed: self.seed,
            scenario: self.scenario_name.clone(),
            controller: self.controller,
            bin_min: protocol::arr(&bin.min),
            bin_max: protocol::arr(&bin.max),
        }
    }

    fn outcome(&self) -> Option<(Termination, ObjectId)> {
        let world = &self.lp.world;
        if let Some(t) = &self.target {
            return termination(world, t).ok().flatten().map(|o| (o, t.clone()));
        }
        let with = |s: ObjectStatus| world.objects_with(s).next().map(|o| o.id.clone());
        if let Some(id) = with(ObjectStatus::InBin) {
            return Some((Termination::Success, id));
        }
        if let Some(id) = with(ObjectStatus::Dropped) {
            return Some((Termination::Dropped, id));
        }
        if world.steps >= EPISODE_TIMEOUT_STEPS {
            let id = self
                .lp
                .belief
                .as_ref()
                .and_then(|b| b.argmax().map(|e| e.object.clone()))
                .or_else(|| world.objects.keys().next().cloned())?;
            return Some((Termination::Timeout, id));
        }
        None
    }
}

/// Autonomous sessions with a named target see only that object, as in batch runs.
fn fresh_world(scenario: &Scenario, controller: ControllerKind, seed: u64, target: Option<&ObjectId>) -> WorldState {
    let params = AdhesiveParams::calibrated();
    match (controller, target) {
        (ControllerKind::Autonomous, Some(t)) => scenario.world_with(params, seed, |o| o.id == t.as_str()),
        _ => scenario.world(params, seed),
    }
}

fn ticker(period: Duration) -> Option<Interval> {
    if period.is_zero() {
        return None;
    }
    let mut iv = tokio::time::interval(period);
    iv.set_missed_tick_behavior(MissedTickBehavior::Delay);
    Some(iv)
}

async fn session_loop(id: u64, shared: &Shared, mut inbox: mpsc::Receiver<WireMessage>, out: mpsc::Sender<WireMessage>) {
    let config = &shared.config;
    let mut episode: Option<Episode> = None;
    let mut latest: Option<ActionTwist> = None;
    let mut clock: Option<Interval> = None;
    let mut dropped = 0u64;

    loop {
        let active = episode.as_ref().is_some_and(|e| !e.ended);
        if !active {
            // clock stopped: wait for something to do
            let Some(m) = inbox.recv().await else { break };
            if let Some(reply) = handle(id, config, m, &mut episode, &mut latest) {
                if out.send(reply).await.is_err() {
                    break;
                }
            }
            if episode.as_ref().is_some_and(|e| !e.ended) {
                clock = ticker(config.tick_interval);
            }
            continue;
        }

        match clock.as_mut() {
            Some(c) => {
                c.tick().await;
            }
            None => tokio::task::yield_now().await,
        }
        let mut closed = false;
        loop {
            match inbox.try_recv() {
                Ok(m) => {
                    let restarted = matches!(m, WireMessage::Hello { .. } | WireMessage::Reset { .. });
                    if let Some(reply) = handle(id, config, m, &mut episode, &mut latest) {
                        if out.send(reply).await.is_err() {
                            closed = true;
                            break;
                        }
                    }
                    if restarted {
                        clock = ticker(config.tick_interval);
                    }
                }
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => {
                    closed = true;
                    break;
                }
            }
        }
        if closed {
            break;
        }
        let Some(ep) = episode.as_mut().filter(|e| !e.ended) else { continue };

        // hold-to-move: an input counts for one tick only
        let a_h = latest.take().unwrap_or_default();
        ep.lp.tick(&a_h);
        let mut frames = vec![WireMessage::StateFrame(StateFrame::of(&ep.lp.world))];
        if let Some(b) = &ep.lp.belief {
            frames.push(WireMessage::BeliefFrame(BeliefFrame::of(ep.lp.world.steps, b)));
        }
        for f in frames {
            match out.try_send(f) {
                Ok(()) => {}
                Err(TrySendError::Full(_)) => dropped += 1,
                Err(TrySendError::Closed(_)) => return,
            }
        }

        if let Some((outcome, target)) = ep.outcome() {
            ep.ended = true;
            let result = episode_result(&ep.lp.world, &ep.lp.log, &target).expect("outcome names a scene object");
            log::info!("session {id}: episode over, {outcome:?} on {target} after {} steps", result.wall_steps);
            if let Some(log) = &shared.log {
                if let Err(e) = log.append(&row(id, ep, outcome, &result)) {
                    log::warn!("session {id}: episode log: {e}");
                }
            }
            if out.send(WireMessage::EpisodeEnd { outcome, result }).await.is_err() {
                break;
            }
        }
    }
    if dropped > 0 {
        log::debug!("session {id}: dropped {dropped} frames for a slow client");
    }
}

fn row<'a>(session: u64, ep: &'a Episode, outcome: Termination, r: &'a EpisodeResult) -> EpisodeRow<'a> {
    EpisodeRow {
        session,
        scenario: &ep.scenario_name,
        controller: ep.controller,
        seed: ep.seed,
        outcome,
        target: r.target.as_str(),
        success: r.success,
        human_input_steps: r.human_input_steps,
        trajectory_length_m: r.trajectory_length,
        wall_steps: r.wall_steps,
        grasp_type: r.grasp_type_used.map(|g| g.to_string()).unwrap_or_default(),
    }
}

/// Apply one client message; returns the reply, if any.
fn handle(
    id: u64,
    config: &ServerConfig,
    m: WireMessage,
    episode: &mut Option<Episode>,
    latest: &mut Option<ActionTwist>,
) -> Option<WireMessage> {
    match m {
        WireMessage::Hello { scenario, controller, seed, target } => {
            let Some(s) = config.scenarios.get(&scenario) else {
                let known: Vec<&str> = config.scenarios.keys().map(String::as_str).collect();
                return Some(WireMessage::error(
                    ErrorCode::UnknownScenario,
                    format!("unknown scenario {scenario:?}; available: {}", known.join(", ")),
                ));
            };
            let target = target.map(ObjectId::new);
            if let Some(t) = &target {
                if !s.objects.iter().any(|o| o.id == t.as_str()) {
                    return Some(WireMessage::error(ErrorCode::UnknownTarget, format!("no object {t} in {scenario}")));
                }
            }
            let seed = seed.unwrap_or_else(|| derive_seed(config.seed, id));
            let ep = Episode::start(scenario, s.clone(), controller, seed, target, config.model);
            log::info!("session {id}: {controller} on {}, seed {seed}", ep.scenario_name);
            let ready = ep.ready(id);
            *episode = Some(ep);
            *latest = None;
            Some(ready)
        }
        WireMessage::HumanAction { vx, vy, vz, grasp_cmd } => match episode {
            None => Some(WireMessage::error(ErrorCode::NoSession, "send Hello first")),
            Some(_) => {
                *latest = Some(ActionTwist { v: Vec3::new(vx, vy, vz), grasp_cmd });
                None
            }
        },
        WireMessage::Reset { seed } => match episode {
            None => Some(WireMessage::error(ErrorCode::NoSession, "send Hello first")),
            Some(ep) => {
                ep.reset(seed);
                *latest = None;
                Some(ep.ready(id))
            }
        },
        other => Some(WireMessage::error(
            ErrorCode::UnexpectedMessage,
            format!("{} is a server message", serde_json::to_value(&other).ok()?.get("type")?.as_str()?),
        )),
    }
}
