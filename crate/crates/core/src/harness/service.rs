//! Live simulation over a local socket.
//!
//! The wire format is newline-delimited JSON. Clients send `command` messages;
//! the server answers each with an `ack` or an `error` and streams a
//! `snapshot` after every tick. Commands are queued and applied at the next
//! tick boundary, so a command acknowledged at tick `t` is visible in the
//! snapshot for tick `t`.
//!
//! ```text
//! -> {"type":"command","id":1,"op":"add_light","light":"a","sensor":1,"pattern":"slow"}
//! <- {"type":"ack","id":1,"tick":42}
//! <- {"type":"snapshot","schema_version":1,"tick":42,...}
//! ```

use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::scenario::{PatternSpec, ScenarioEvent};
use super::sim::{Simulation, TickRecord};
use crate::arena::{LightSource, NUM_SENSORS};
use crate::attention::Action;
use crate::error::{Error, Result};
use crate::filter::NoveltyReport;

pub const PROTOCOL_VERSION: u32 = 1;

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Command {
    AddLight {
        light: String,
        #[serde(default)]
        bearing: Option<f64>,
        #[serde(default)]
        sensor: Option<usize>,
        #[serde(default = "one")]
        intensity: f64,
        pattern: PatternSpec,
    },
    RemoveLight {
        light: String,
    },
    SetActive {
        light: String,
        active: bool,
    },
    ToggleLight {
        light: String,
    },
    SetPattern {
        light: String,
        pattern: PatternSpec,
    },
    SetForgetting {
        forgetting: bool,
    },
    Reset,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Command {
        #[serde(default)]
        id: Option<u64>,
        #[serde(flatten)]
        command: Command,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightView {
    #[serde(flatten)]
    pub light: LightSource,
    /// Emitting at this tick.
    pub lit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub schema_version: u32,
    pub tick: u64,
    pub heading: f64,
    pub forgetting: bool,
    pub boredom_threshold: f64,
    pub lights: Vec<LightView>,
    pub readings: [f64; NUM_SENSORS],
    pub reports: Vec<NoveltyReport<f64>>,
    /// Synapse efficacies per sensor, indexed by neuron.
    pub efficacies: Vec<Vec<f64>>,
    pub action: Action,
    pub heading_after: f64,
    pub scanning: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Snapshot(Snapshot),
    Ack { id: Option<u64>, tick: u64 },
    Error { id: Option<u64>, message: String },
}

impl ServerMessage {
    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("server messages always serialize");
        line.push('\n');
        line
    }
}

/// A simulation driven by commands, without any I/O.
#[derive(Clone, Debug)]
pub struct Session {
    sim: Simulation,
}

impl Session {
    pub fn new(config: RunConfig) -> Result<Self> {
        Ok(Self { sim: Simulation::new(config)? })
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }

    pub fn tick(&self) -> u64 {
        self.sim.world().tick
    }

    pub fn apply(&mut self, command: Command) -> Result<()> {
        let world = self.sim.world();
        let event = match command {
            Command::AddLight { light, bearing, sensor, intensity, pattern } => {
                ScenarioEvent::AddLight { id: light, bearing, sensor, intensity, pattern }
            }
            Command::RemoveLight { light } => ScenarioEvent::RemoveLight { id: light },
            Command::SetActive { light, active } => ScenarioEvent::SetActive { id: light, active },
            Command::ToggleLight { light } => {
                let active = world.light(&light).ok_or_else(|| Error::UnknownLight(light.clone()))?.active;
                ScenarioEvent::SetActive { id: light, active: !active }
            }
            Command::SetPattern { light, pattern } => ScenarioEvent::SetPattern { id: light, pattern },
            Command::SetForgetting { forgetting } => {
                self.sim.set_forgetting(forgetting);
                return Ok(());
            }
            Command::Reset => return self.sim.reset(),
        };
        let event = event.to_world_event(world)?;
        self.sim.apply(event)
    }

    /// Advances one tick and describes it.
    pub fn step(&mut self) -> Result<Snapshot> {
        let lights = self
            .sim
            .world()
            .lights
            .iter()
            .map(|l| LightView { lit: l.emission(self.sim.world().tick) > 0.0, light: l.clone() })
            .collect();
        let record = self.sim.step()?;
        Ok(self.snapshot(record, lights))
    }

    fn snapshot(&self, record: TickRecord, lights: Vec<LightView>) -> Snapshot {
        let config = self.sim.config();
        Snapshot {
            schema_version: PROTOCOL_VERSION,
            tick: record.tick,
            heading: record.heading,
            forgetting: config.forgetting,
            boredom_threshold: config.boredom_threshold,
            lights,
            readings: record.readings,
            reports: record.reports,
            efficacies: self.sim.filters().iter().map(|f| f.efficacies()).collect(),
            action: record.action,
            heading_after: record.heading_after,
            scanning: record.scanning,
        }
    }
}

/// Parses one inbound line into a command, or the error reply to send back.
pub fn parse_line(line: &str) -> std::result::Result<(Option<u64>, Command), ServerMessage> {
    match serde_json::from_str::<ClientMessage>(line) {
        Ok(ClientMessage::Command { id, command }) => Ok((id, command)),
        Err(e) => {
            let id = serde_json::from_str::<serde_json::Value>(line)
                .ok()
                .and_then(|v| v.get("id").and_then(serde_json::Value::as_u64));
            Err(ServerMessage::Error { id, message: format!("malformed message: {e}") })
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ServiceOptions {
    pub addr: SocketAddr,
    pub tick_interval: Duration,
    /// Stop after this many ticks; run until shut down otherwise.
    pub max_ticks: Option<u64>,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        Self {
            addr: SocketAddr::from(([127, 0, 0, 1], 7878)),
            tick_interval: Duration::from_millis(100),
            max_ticks: None,
        }
    }
}

enum Inbound {
    Connected(usize, Sender<String>),
    Line(usize, String),
    Disconnected(usize),
}

/// A running service. Dropping it shuts the service down.
pub struct ServiceHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

impl ServiceHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.stop_threads();
    }

    /// Blocks until the tick driver stops (after `max_ticks`, or never).
    pub fn wait(mut self) {
        if let Some(driver) = self.threads.pop() {
            let _ = driver.join();
        }
        self.stop_threads();
    }

    fn stop_threads(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

impl Drop for ServiceHandle {
    fn drop(&mut self) {
        self.stop_threads();
    }
}

/// Binds the socket and starts the acceptor and the tick driver.
pub fn serve(config: RunConfig, options: ServiceOptions) -> Result<ServiceHandle> {
    let session = Session::new(config)?;
    let listener = TcpListener::bind(options.addr)?;
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel();

    let acceptor = {
        let stop = Arc::clone(&stop);
        std::thread::spawn(move || accept_loop(listener, tx, stop))
    };
    let driver = {
        let stop = Arc::clone(&stop);
        std::thread::spawn(move || drive(session, rx, options, stop))
    };
    log::info!("serving on {addr}");
    Ok(ServiceHandle { addr, stop, threads: vec![acceptor, driver] })
}

fn accept_loop(listener: TcpListener, tx: Sender<Inbound>, stop: Arc<AtomicBool>) {
    let mut next_id = 0;
    while !stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, peer)) => {
                log::info!("client {next_id} connected from {peer}");
                if let Err(e) = start_client(next_id, stream, tx.clone(), Arc::clone(&stop)) {
                    log::warn!("client {next_id}: {e}");
                }
                next_id += 1;
            }
            Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => {
                log::warn!("accept failed: {e}");
                std::thread::sleep(Duration::from_millis(50));
            }
        }
    }
}

fn start_client(id: usize, stream: TcpStream, tx: Sender<Inbound>, stop: Arc<AtomicBool>) -> Result<()> {
    stream.set_nonblocking(false)?;
    stream.set_read_timeout(Some(Duration::from_millis(50)))?;
    let (out_tx, out_rx) = mpsc::channel::<String>();
    let mut writer = stream.try_clone()?;
    std::thread::spawn(move || {
        for line in out_rx {
            if writer.write_all(line.as_bytes()).is_err() {
                break;
            }
        }
    });
    tx.send(Inbound::Connected(id, out_tx)).map_err(|_| Error::InvalidParameter("service stopped".into()))?;
    std::thread::spawn(move || {
        let mut reader = BufReader::new(stream);
        let mut line = String::new();
        while !stop.load(Ordering::SeqCst) {
            match reader.read_line(&mut line) {
                Ok(0) => break,
                Ok(_) => {
                    let text = line.trim();
                    if !text.is_empty() && tx.send(Inbound::Line(id, text.to_string())).is_err() {
                        break;
                    }
                    line.clear();
                }
                Err(e) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {}
                Err(_) => break,
            }
        }
        let _ = tx.send(Inbound::Disconnected(id));
    });
    Ok(())
}

fn drive(mut session: Session, rx: Receiver<Inbound>, options: ServiceOptions, stop: Arc<AtomicBool>) {
    let mut clients: Vec<(usize, Sender<String>)> = Vec::new();
    let mut next_tick = Instant::now();
    let mut ticks = 0;
    while !stop.load(Ordering::SeqCst) && options.max_ticks.is_none_or(|m| ticks < m) {
        // Gather until the tick is due; everything received is applied at this boundary.
        let mut pending = Vec::new();
        loop {
            let wait = next_tick.saturating_duration_since(Instant::now());
            match rx.recv_timeout(wait) {
                Ok(msg) => pending.push(msg),
                Err(RecvTimeoutError::Timeout) => break,
                Err(RecvTimeoutError::Disconnected) => return,
            }
        }
        for msg in pending {
            match msg {
                Inbound::Connected(id, out) => clients.push((id, out)),
                Inbound::Disconnected(id) => clients.retain(|(c, _)| *c != id),
                Inbound::Line(id, line) => {
                    let reply = match parse_line(&line) {
                        Ok((cmd_id, command)) => match session.apply(command) {
                            Ok(()) => ServerMessage::Ack { id: cmd_id, tick: session.tick() },
                            Err(e) => ServerMessage::Error { id: cmd_id, message: e.to_string() },
                        },
                        Err(reply) => reply,
                    };
                    if let Some((_, out)) = clients.iter().find(|(c, _)| *c == id) {
                        let _ = out.send(reply.to_line());
                    }
                }
            }
        }
        match session.step() {
            Ok(snapshot) => {
                let line = ServerMessage::Snapshot(snapshot).to_line();
                clients.retain(|(_, out)| out.send(line.clone()).is_ok());
            }
            Err(e) => {
                log::error!("simulation stopped: {e}");
                let line = ServerMessage::Error { id: None, message: e.to_string() }.to_line();
                clients.iter().for_each(|(_, out)| drop(out.send(line.clone())));
                return;
            }
        }
        ticks += 1;
        next_tick += options.tick_interval;
    }
}
