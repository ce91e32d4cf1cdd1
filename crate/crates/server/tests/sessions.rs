use std::net::SocketAddr;
use std::time::Duration;

use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader, Lines};
use tokio::net::tcp::{OwnedReadHalf, OwnedWriteHalf};
use tokio::net::TcpStream;
use tokio::time::timeout;

use riso_core::control::ControllerKind;
use riso_core::gripper::GraspType;
use riso_core::world::{ObjectStatus, Termination, V_MAX};
use riso_server::protocol::StateFrame;
use riso_server::{ErrorCode, Server, ServerConfig, WireMessage};

const WAIT: Duration = Duration::from_secs(20);

async fn start(config: ServerConfig) -> SocketAddr {
    let server = Server::bind(ServerConfig { addr: "127.0.0.1:0".parse().unwrap(), ..config }).await.unwrap();
    let addr = server.local_addr().unwrap();
    tokio::spawn(server.run());
    addr
}

struct Client {
    lines: Lines<BufReader<OwnedReadHalf>>,
    wr: OwnedWriteHalf,
}

impl Client {
    async fn connect(addr: SocketAddr) -> Client {
        let (rd, wr) = TcpStream::connect(addr).await.unwrap().into_split();
        Client { lines: BufReader::new(rd).lines(), wr }
    }

    async fn send_raw(&mut self, line: &str) {
        self.wr.write_all(line.as_bytes()).await.unwrap();
        self.wr.write_all(b"\n").await.unwrap();
    }

    async fn send(&mut self, m: &WireMessage) {
        self.wr.write_all(m.to_line().as_bytes()).await.unwrap();
    }

    async fn recv(&mut self) -> WireMessage {
        let line = timeout(WAIT, self.lines.next_line()).await.expect("server went quiet").unwrap().expect("connection closed");
        serde_json::from_str(&line).unwrap()
    }

    async fn hello(&mut self, scenario: &str, controller: ControllerKind, seed: Option<u64>, target: Option<&str>) -> WireMessage {
        self.send(&WireMessage::Hello {
            scenario: scenario.into(),
            controller,
            seed,
            target: target.map(str::to_owned),
        })
        .await;
        loop {
            match self.recv().await {
                m @ WireMessage::Ready { .. } => return m,
                WireMessage::Error { code, detail } => panic!("{code:?}: {detail}"),
                _ => {}
            }
        }
    }

    async fn next_state(&mut self) -> StateFrame {
        loop {
            if let WireMessage::StateFrame(f) = self.recv().await {
                return f;
            }
        }
    }
}

fn fast(tick_ms: u64) -> ServerConfig {
    ServerConfig { tick_interval: Duration::from_millis(tick_ms), queue_depth: 100_000, ..ServerConfig::default() }
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Velocity toward `goal` for a point at `from`, slowing near it.
fn steer(from: [f64; 3], goal: [f64; 3]) -> [f64; 3] {
    let d = [goal[0] - from[0], goal[1] - from[1], goal[2] - from[2]];
    let n = norm(d);
    if n < 1e-9 {
        return [0.0; 3];
    }
    let speed = V_MAX.min(2.0 * n);
    [d[0] / n * speed, d[1] / n * speed, d[2] / n * speed]
}

/// Joystick script for a shared-control pick: steer the pad onto the target,
/// then carry it high over the bin. Pressure is left to the assistance.
fn script(frame: &StateFrame, target: &str, bin_centre: [f64; 3]) -> WireMessage {
    let pad = frame.gripper.pads[0].position;
    let v = if frame.held.is_empty() {
        let o = frame.objects.iter().find(|o| o.id == target).unwrap();
        steer(pad, [o.position[0], o.position[1], o.position[2] + o.height])
    } else if pad[2] < 0.18 && ((pad[0] - bin_centre[0]).powi(2) + (pad[1] - bin_centre[1]).powi(2)).sqrt() > 0.02 {
        [0.0, 0.0, V_MAX]
    } else {
        steer(pad, [bin_centre[0], bin_centre[1], pad[2]])
    };
    WireMessage::HumanAction { vx: v[0], vy: v[1], vz: v[2], grasp_cmd: None }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn scripted_shared_episode_ends_in_the_bin_and_is_logged() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("episodes.csv");
    let addr = start(ServerConfig { log_path: Some(log.clone()), ..fast(2) }).await;
    let mut c = Client::connect(addr).await;
    let WireMessage::Ready { bin_min, bin_max, .. } = c.hello("household15", ControllerKind::Shared, Some(3), Some("dice")).await else {
        unreachable!()
    };
    let centre = [(bin_min[0] + bin_max[0]) / 2.0, (bin_min[1] + bin_max[1]) / 2.0, bin_max[2]];
    let mut last_tick = 0;
    let mut beliefs = 0;
    let (outcome, result) = loop {
        match c.recv().await {
            WireMessage::StateFrame(f) => {
                assert!(f.tick > last_tick);
                assert!((f.time - f.tick as f64 * 0.05).abs() < 1e-9);
                last_tick = f.tick;
                let a = script(&f, "dice", centre);
                c.send(&a).await;
            }
            WireMessage::BeliefFrame(b) => {
                beliefs += 1;
                let total: f64 = b.entries.iter().map(|e| e.p).sum();
                assert!((total - 1.0).abs() < 1e-9);
            }
            WireMessage::EpisodeEnd { outcome, result } => break (outcome, result),
            other => panic!("unexpected {other:?}"),
        }
    };
    assert_eq!(outcome, Termination::Success);
    assert!(result.success);
    assert_eq!(result.target.as_str(), "dice");
    assert_eq!(result.grasp_type_used, Some(GraspType::Soft(0)));
    assert!(result.human_input_steps > 0);
    assert!(beliefs > 0);

    let text = std::fs::read_to_string(&log).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2, "{text}");
    assert!(lines[0].starts_with("session,scenario,controller,seed,outcome,target,success"));
    assert!(lines[1].contains(",household15,shared,3,Success,dice,true,"));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn steering_at_an_object_concentrates_the_belief() {
    let addr = start(fast(5)).await;
    let mut c = Client::connect(addr).await;
    c.hello("household15", ControllerKind::Shared, Some(1), None).await;
    let mut best = 0.0;
    let mut ticks = 0;
    while ticks < 60 {
        match c.recv().await {
            WireMessage::StateFrame(f) => {
                ticks = f.tick;
                let pad = f.gripper.pads[0].position;
                let o = f.objects.iter().find(|o| o.id == "cup").unwrap();
                let v = steer(pad, [o.position[0], o.position[1], o.position[2] + o.height]);
                let n = norm(v);
                let v = v.map(|x| x / n * V_MAX);
                c.send(&WireMessage::HumanAction { vx: v[0], vy: v[1], vz: v[2], grasp_cmd: None }).await;
            }
            WireMessage::BeliefFrame(b) => {
                let p = b.entries.iter().find(|e| e.object_id == "cup" && e.grasp == GraspType::Soft(0)).unwrap().p;
                if p > 0.9 {
                    best = p;
                    break;
                }
                best = f64::max(best, p);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
    assert!(best > 0.9, "mass {best} after {ticks} ticks");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn reset_restarts_deterministically() {
    let addr = start(fast(1)).await;
    let mut c = Client::connect(addr).await;
    c.hello("household15", ControllerKind::Autonomous, Some(5), None).await;
    let mut first = Vec::new();
    for _ in 0..30 {
        first.push(c.next_state().await);
    }
    c.send(&WireMessage::Reset { seed: 5 }).await;
    loop {
        if let WireMessage::Ready { seed, .. } = c.recv().await {
            assert_eq!(seed, 5);
            break;
        }
    }
    let mut second = Vec::new();
    for _ in 0..30 {
        second.push(c.next_state().await);
    }
    assert_eq!(first[0].tick, 1);
    assert_eq!(first, second);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn malformed_input_gets_an_error_and_the_session_continues() {
    let addr = start(fast(2)).await;
    let mut c = Client::connect(addr).await;
    c.send_raw("{not json").await;
    assert!(matches!(c.recv().await, WireMessage::Error { code: ErrorCode::MalformedJson, .. }));
    c.send(&WireMessage::HumanAction { vx: 0.1, vy: 0.0, vz: 0.0, grasp_cmd: None }).await;
    assert!(matches!(c.recv().await, WireMessage::Error { code: ErrorCode::NoSession, .. }));
    c.send_raw(r#"{"type":"Hello","scenario":"nowhere","controller":"human"}"#).await;
    assert!(matches!(c.recv().await, WireMessage::Error { code: ErrorCode::UnknownScenario, .. }));
    c.send_raw(r#"{"type":"Hello","scenario":"household15","controller":"pilot"}"#).await;
    assert!(matches!(c.recv().await, WireMessage::Error { code: ErrorCode::MalformedJson, .. }));

    c.hello("household15", ControllerKind::Human, None, None).await;
    let a = c.next_state().await;
    c.send_raw("]]]").await;
    let mut saw_error = false;
    let mut b = a.clone();
    while !saw_error || b.tick < a.tick + 5 {
        match c.recv().await {
            WireMessage::Error { code, .. } => {
                assert_eq!(code, ErrorCode::MalformedJson);
                saw_error = true;
            }
            WireMessage::StateFrame(f) => b = f,
            other => panic!("unexpected {other:?}"),
        }
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn concurrent_sessions_are_isolated() {
    let addr = start(fast(2)).await;
    let mut a = Client::connect(addr).await;
    let mut b = Client::connect(addr).await;
    let WireMessage::Ready { session: sa, seed: seed_a, .. } = a.hello("household15", ControllerKind::Human, None, None).await else {
        unreachable!()
    };
    let WireMessage::Ready { session: sb, seed: seed_b, .. } = b.hello("household15", ControllerKind::Human, None, None).await else {
        unreachable!()
    };
    assert_ne!(sa, sb);
    assert_ne!(seed_a, seed_b);

    let b0 = b.next_state().await;
    let a0 = a.next_state().await;
    let mut a_last = a0.clone();
    while a_last.tick < a0.tick + 40 {
        a.send(&WireMessage::HumanAction { vx: 0.0, vy: 0.2, vz: 0.0, grasp_cmd: None }).await;
        a_last = a.next_state().await;
    }
    let mut b_last = b0.clone();
    while b_last.tick < b0.tick + 40 {
        b_last = b.next_state().await;
    }
    assert!(a_last.ee_pose[1] > a0.ee_pose[1] + 0.05);
    assert_eq!(b_last.ee_pose, b0.ee_pose);
    assert!(b_last.objects.iter().all(|o| o.status == ObjectStatus::OnTable));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn clock_waits_for_hello() {
    let addr = start(fast(1)).await;
    let mut c = Client::connect(addr).await;
    let quiet = timeout(Duration::from_millis(150), c.lines.next_line()).await;
    assert!(quiet.is_err(), "no frames before Hello");
    c.hello("household15", ControllerKind::Human, Some(9), None).await;
    assert_eq!(c.next_state().await.tick, 1);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn autonomous_episode_with_a_named_target_ends() {
    let addr = start(fast(0)).await;
    let mut c = Client::connect(addr).await;
    c.hello("household15", ControllerKind::Autonomous, Some(2), Some("weight")).await;
    loop {
        if let WireMessage::EpisodeEnd { outcome, result } = c.recv().await {
            assert_eq!(outcome, Termination::Success);
            assert_eq!(result.grasp_type_used, Some(GraspType::Rigid));
            break;
        }
    }
    // idle after the episode until reset
    let quiet = timeout(Duration::from_millis(100), c.lines.next_line()).await;
    assert!(quiet.is_err());
}
