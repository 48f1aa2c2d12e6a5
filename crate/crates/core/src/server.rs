//! Live human-plus-program episodes over a WebSocket.
//!
//! `GET /layout` describes the kitchen; `/play` runs one lockstep episode
//! per connection, one connection at a time. Every tick the latest action
//! the client sent (or noop) drives the human chef, the program drives the
//! other, and the new state is pushed to the client.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::{Json, Router};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::dsl::Program;
use crate::rollout::{EpisodeRng, Policy, ProgramPolicy};
use crate::sim::{
    ChefState, EnvAction, GridLayout, Item, PotState, StateSnapshot, WorldState, DEFAULT_HORIZON,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServeConfig {
    pub tick_ms: u64,
    pub horizon: u32,
    /// Chef index (0 or 1) the client controls.
    pub human_chef: usize,
    pub seed: u64,
    /// Where finished episodes are logged as `replay-<n>.json`.
    pub replay_dir: Option<PathBuf>,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            tick_ms: 150,
            horizon: DEFAULT_HORIZON,
            human_chef: 0,
            seed: 0,
            replay_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ClientMsg {
    Action { value: EnvAction },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ServerMsg {
    State {
        t: u32,
        horizon: u32,
        chefs: [ChefState; 2],
        pots: Vec<PotState>,
        counters: Vec<Item>,
        score: u32,
    },
    End {
        score: u32,
    },
    Error {
        message: String,
    },
}

/// Joint actions of a finished episode, enough to re-simulate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayLog {
    pub layout: String,
    pub ascii: String,
    pub horizon: u32,
    pub human_chef: usize,
    pub actions: Vec<[EnvAction; 2]>,
    pub score: u32,
}

impl ReplayLog {
    /// Re-runs the logged actions from the initial state.
    pub fn replay(&self) -> Result<(StateSnapshot, u32), String> {
        let layout = GridLayout::parse(&self.layout, &self.ascii).map_err(|e| e.to_string())?;
        let mut state = WorldState::with_horizon(Arc::new(layout), self.horizon);
        let mut score = 0;
        for [a, b] in &self.actions {
            score += state.step_mut(*a, *b).map_err(|e| e.to_string())?;
        }
        Ok((state.snapshot(), score))
    }
}

/// One episode: a human chef and a program chef.
pub struct Session {
    state: WorldState,
    program: Program,
    human: usize,
    rng: EpisodeRng,
    score: u32,
    actions: Vec<[EnvAction; 2]>,
}

impl Session {
    pub fn new(layout: Arc<GridLayout>, program: Program, cfg: &ServeConfig) -> Self {
        Session {
            state: WorldState::with_horizon(layout, cfg.horizon),
            program,
            human: cfg.human_chef.min(1),
            rng: EpisodeRng::seed_from_u64(cfg.seed),
            score: 0,
            actions: Vec::new(),
        }
    }

    pub fn is_over(&self) -> bool {
        self.state.is_terminal()
    }

    pub fn score(&self) -> u32 {
        self.score
    }

    pub fn message(&self) -> ServerMsg {
        let s = &self.state;
        ServerMsg::State {
            t: s.t,
            horizon: s.horizon,
            chefs: s.chefs,
            pots: s.pots.clone(),
            counters: s.counters.clone(),
            score: self.score,
        }
    }

    /// Advances one tick with the human's action.
    pub fn tick(&mut self, human: EnvAction) -> ServerMsg {
        let agent =
            ProgramPolicy::greedy(&self.program).act(&self.state, 1 - self.human, &mut self.rng);
        let mut joint = [agent; 2];
        joint[self.human] = human;
        self.score += self
            .state
            .step_mut(joint[0], joint[1])
            .expect("ticks stop at the horizon");
        self.actions.push(joint);
        self.message()
    }

    pub fn log(&self) -> ReplayLog {
        ReplayLog {
            layout: self.state.layout.name.clone(),
            ascii: self.state.layout.to_ascii(),
            horizon: self.state.horizon,
            human_chef: self.human,
            actions: self.actions.clone(),
            score: self.score,
        }
    }
}

/// Shared server state.
#[derive(Clone)]
pub struct PlayServer {
    pub layout: Arc<GridLayout>,
    pub program: Arc<Program>,
    pub cfg: ServeConfig,
    busy: Arc<AtomicBool>,
    finished: Arc<Mutex<Vec<ReplayLog>>>,
}

impl PlayServer {
    pub fn new(layout: GridLayout, program: Program, cfg: ServeConfig) -> Self {
        PlayServer {
            layout: Arc::new(layout),
            program: Arc::new(program),
            cfg,
            busy: Arc::new(AtomicBool::new(false)),
            finished: Arc::new(Mutex::new(Vec::new())),
        }
    }

    /// Replay logs of the episodes played to the end so far.
    pub fn finished(&self) -> Vec<ReplayLog> {
        self.finished.lock().expect("not poisoned").clone()
    }

    pub fn router(self) -> Router {
        Router::new()
            .route("/play", get(play))
            .route("/layout", get(layout_info))
            .with_state(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutInfo {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub ascii: String,
    pub horizon: u32,
    pub tick_ms: u64,
    pub human_chef: usize,
}

async fn layout_info(State(app): State<PlayServer>) -> Json<LayoutInfo> {
    Json(LayoutInfo {
        name: app.layout.name.clone(),
        width: app.layout.width,
        height: app.layout.height,
        ascii: app.layout.to_ascii(),
        horizon: app.cfg.horizon,
        tick_ms: app.cfg.tick_ms,
        human_chef: app.cfg.human_chef,
    })
}

async fn play(ws: WebSocketUpgrade, State(app): State<PlayServer>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| async move {
        if app.busy.swap(true, Ordering::SeqCst) {
            reject(socket).await;
            return;
        }
        run(socket, &app).await;
        app.busy.store(false, Ordering::SeqCst);
    })
}

fn frame(msg: &ServerMsg) -> Message {
    Message::Text(serde_json::to_string(msg).expect("plain data"))
}

/// Sends a close frame and waits briefly for the client's reply.
async fn close(mut socket: WebSocket) {
    if socket.send(Message::Close(None)).await.is_err() {
        return;
    }
    let drain = async {
        while let Some(Ok(m)) = socket.recv().await {
            if matches!(m, Message::Close(_)) {
                break;
            }
        }
    };
    let _ = tokio::time::timeout(Duration::from_secs(2), drain).await;
}

async fn reject(mut socket: WebSocket) {
    let msg = ServerMsg::Error {
        message: "a session is already running".into(),
    };
    let _ = socket.send(frame(&msg)).await;
    close(socket).await;
}

async fn run(mut socket: WebSocket, app: &PlayServer) {
    let mut session = Session::new(app.layout.clone(), (*app.program).clone(), &app.cfg);
    if socket.send(frame(&session.message())).await.is_err() {
        return;
    }
    let mut pending: Option<EnvAction> = None;
    let mut ticker = tokio::time::interval(Duration::from_millis(app.cfg.tick_ms.max(1)));
    ticker.tick().await;
    while !session.is_over() {
        tokio::select! {
            _ = ticker.tick() => {
                let msg = session.tick(pending.take().unwrap_or(EnvAction::Noop));
                if socket.send(frame(&msg)).await.is_err() {
                    return;
                }
            }
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(text))) => match serde_json::from_str::<ClientMsg>(&text) {
                    Ok(ClientMsg::Action { value }) => pending = Some(value),
                    Err(e) => {
                        let msg = ServerMsg::Error { message: format!("malformed message: {e}") };
                        if socket.send(frame(&msg)).await.is_err() {
                            return;
                        }
                    }
                },
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
    let log = session.log();
    {
        let mut finished = app.finished.lock().expect("not poisoned");
        if let Some(dir) = &app.cfg.replay_dir {
            let path = dir.join(format!("replay-{}.json", finished.len()));
            if let Err(e) = std::fs::write(
                &path,
                serde_json::to_string_pretty(&log).expect("plain data"),
            ) {
                eprintln!("could not write {}: {e}", path.display());
            }
        }
        finished.push(log);
    }
    if socket
        .send(frame(&ServerMsg::End {
            score: session.score(),
        }))
        .await
        .is_ok()
    {
        close(socket).await;
    }
}

/// Serves until the process is stopped.
pub async fn serve(app: PlayServer, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!(
        "serving {} on http://{}",
        app.layout.name,
        listener.local_addr()?
    );
    axum::serve(listener, app.router()).await
}
