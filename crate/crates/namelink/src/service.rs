//! HTTP labeling service for a human-driven run.
//!
//! One thread owns the run. Handlers send it commands and wait for replies,
//! so training never runs inside a request handler.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::mpsc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::oneshot;

use crate::active::{AlRun, HistoryRow, HumanQueue, LabelSource, RunStatus};
use crate::error::Error;

pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable holding the default port.
pub const PORT_ENV: &str = "NAMELINK_PORT";
pub const DEFAULT_PORT: u16 = 8080;

pub fn default_port() -> u16 {
    std::env::var(PORT_ENV).ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_PORT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceStatus {
    AwaitingLabels,
    Training,
    Evaluating,
    Done,
    Aborted,
}

/// A pair waiting for a label. The task id is the pair's row in the universe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelTask {
    pub task_id: u64,
    pub name_a: String,
    pub name_b: String,
    pub iteration: usize,
    pub uncertainty: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub submitted_at: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelSubmission {
    pub task_id: u64,
    pub label: u8,
}

enum Command {
    Run(oneshot::Sender<Value>),
    Batch(oneshot::Sender<Value>),
    Curve(oneshot::Sender<Value>),
    Labels(Vec<LabelSubmission>, oneshot::Sender<Result<Value, Error>>),
}

struct Owner {
    run_id: String,
    run: AlRun,
    queue: HumanQueue,
    tasks: BTreeMap<u64, LabelTask>,
    status: ServiceStatus,
    checkpoint: Option<PathBuf>,
    last_error: Option<String>,
}

impl Owner {
    fn issue(&mut self) {
        self.tasks.clear();
        match self.run.propose().cloned() {
            Some(batch) => {
                for (&i, &u) in batch.indices.iter().zip(&batch.uncertainty) {
                    self.tasks.insert(
                        i as u64,
                        LabelTask {
                            task_id: i as u64,
                            name_a: self.run.universe.a[i].clone(),
                            name_b: self.run.universe.b[i].clone(),
                            iteration: batch.step + 1,
                            uncertainty: u,
                            label: None,
                            submitted_at: None,
                        },
                    );
                }
                self.status = ServiceStatus::AwaitingLabels;
            }
            None => self.status = ServiceStatus::Done,
        }
    }

    fn pending_tasks(&self) -> Vec<&LabelTask> {
        let mut v: Vec<&LabelTask> = self.tasks.values().filter(|t| t.label.is_none()).collect();
        // stable: ties keep ascending task id
        v.sort_by(|x, y| y.uncertainty.total_cmp(&x.uncertainty));
        v
    }

    fn run_json(&self) -> Value {
        let s = &self.run.state;
        json!({
            "schema_version": SCHEMA_VERSION,
            "run_id": self.run_id,
            "status": self.status,
            "iteration": s.step,
            "iterations_total": self.run.config.schedule.sizes.len(),
            "n_labelled": s.labelled.len(),
            "pool_remaining": s.pool.len(),
            "pending_tasks": self.pending_tasks().len(),
            "stopped_early": s.stopped_early,
            "last_error": self.last_error,
            "history": s.history,
        })
    }

    fn batch_json(&self) -> Value {
        let tasks = self.pending_tasks();
        json!({
            "schema_version": SCHEMA_VERSION,
            "iteration": self.run.state.step + 1,
            "status": self.status,
            "remaining": tasks.len(),
            "tasks": tasks,
        })
    }

    fn curve_json(&self) -> Value {
        let points: Vec<Value> = self.run.state.history.iter().map(curve_point).collect();
        json!({ "schema_version": SCHEMA_VERSION, "points": points })
    }

    /// Validates the whole submission before touching any state.
    fn submit(&mut self, subs: Vec<LabelSubmission>) -> Result<Value, Error> {
        if self.status != ServiceStatus::AwaitingLabels {
            if let Some(s) = subs.first() {
                return Err(self.classify(s.task_id));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &subs {
            if s.label > 1 {
                return Err(Error::InvalidArgument(format!("label must be 0 or 1, got {}", s.label)));
            }
            match self.tasks.get(&s.task_id) {
                Some(t) if t.label.is_none() && seen.insert(s.task_id) => {}
                Some(_) => return Err(Error::TaskCompleted(s.task_id)),
                None => return Err(self.classify(s.task_id)),
            }
        }
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        for s in &subs {
            self.queue.submit(s.task_id as usize, s.label)?;
            let t = self.tasks.get_mut(&s.task_id).expect("validated above");
            t.label = Some(s.label);
            t.submitted_at = Some(now);
        }
        let complete = self.tasks.values().all(|t| t.label.is_some()) && !self.tasks.is_empty();
        if complete {
            self.status = ServiceStatus::Training;
        }
        Ok(json!({
            "schema_version": SCHEMA_VERSION,
            "accepted": subs.len(),
            "status": self.status,
            "remaining": self.pending_tasks().len(),
        }))
    }

    fn classify(&self, task_id: u64) -> Error {
        if self.run.state.labels.contains_key(&(task_id as usize)) {
            Error::TaskCompleted(task_id)
        } else {
            Error::UnknownTask(task_id)
        }
    }

    /// Retrains once every task of the iteration is labelled, then issues the next batch.
    fn advance(&mut self) {
        if self.status != ServiceStatus::Training {
            return;
        }
        let result = self
            .run
            .propose()
            .map(|b| b.indices.clone())
            .ok_or_else(|| Error::InvalidArgument("no batch pending".into()))
            .and_then(|idx| self.queue.labels(&idx))
            .and_then(|y| {
                self.status = ServiceStatus::Evaluating;
                self.run.commit(&y).map(|_| ())
            })
            .and_then(|_| match &self.checkpoint {
                Some(p) => self.run.save_checkpoint(p),
                None => Ok(()),
            });
        match result {
            Ok(()) => self.issue(),
            Err(e) => {
                self.last_error = Some(e.to_string());
                self.status = ServiceStatus::Aborted;
            }
        }
    }
}

fn curve_point(r: &HistoryRow) -> Value {
    let tests: serde_json::Map<String, Value> = r.ba_test.iter().map(|(n, v)| (n.clone(), json!(v))).collect();
    json!({
        "step": r.step,
        "n_labelled": r.n_labelled,
        "ba_pre": r.ba_pre,
        "ba_post": r.ba_post,
        "ba_pool": r.ba_pool,
        "ba_test": tests,
    })
}

/// Cheap handle to the owning thread.
#[derive(Clone)]
pub struct ServiceHandle {
    tx: mpsc::Sender<Command>,
}

impl ServiceHandle {
    /// Moves `run` onto its own thread and issues the first batch.
    pub fn spawn(run_id: impl Into<String>, run: AlRun, checkpoint: Option<PathBuf>) -> Self {
        let (tx, rx) = mpsc::channel::<Command>();
        let mut owner = Owner {
            run_id: run_id.into(),
            run,
            queue: HumanQueue::default(),
            tasks: BTreeMap::new(),
            status: ServiceStatus::AwaitingLabels,
            checkpoint,
            last_error: None,
        };
        let status = owner.run.status();
        if status == RunStatus::Done {
            owner.status = ServiceStatus::Done;
        } else {
            owner.issue();
        }
        std::thread::spawn(move || {
            for cmd in rx {
                match cmd {
                    Command::Run(r) => drop(r.send(owner.run_json())),
                    Command::Batch(r) => drop(r.send(owner.batch_json())),
                    Command::Curve(r) => drop(r.send(owner.curve_json())),
                    Command::Labels(subs, r) => {
                        let _ = r.send(owner.submit(subs));
                        owner.advance();
                    }
                }
            }
        });
        Self { tx }
    }

    async fn ask<T>(&self, make: impl FnOnce(oneshot::Sender<T>) -> Command) -> Option<T> {
        let (tx, rx) = oneshot::channel();
        self.tx.send(make(tx)).ok()?;
        rx.await.ok()
    }
}

fn error_response(code: StatusCode, e: &Error) -> Response {
    (code, Json(json!({ "schema_version": SCHEMA_VERSION, "error": e.kind(), "message": e.to_string() }))).into_response()
}

fn gone() -> Response {
    error_response(StatusCode::SERVICE_UNAVAILABLE, &Error::InvalidArgument("run owner stopped".into()))
}

async fn get_run(State(h): State<ServiceHandle>) -> Response {
    h.ask(Command::Run).await.map(|v| Json(v).into_response()).unwrap_or_else(gone)
}

async fn get_batch(State(h): State<ServiceHandle>) -> Response {
    h.ask(Command::Batch).await.map(|v| Json(v).into_response()).unwrap_or_else(gone)
}

async fn get_curve(State(h): State<ServiceHandle>) -> Response {
    h.ask(Command::Curve).await.map(|v| Json(v).into_response()).unwrap_or_else(gone)
}

async fn post_labels(State(h): State<ServiceHandle>, body: Bytes) -> Response {
    let subs: Vec<LabelSubmission> = match serde_json::from_slice(&body) {
        Ok(s) => s,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, &Error::Json(e)),
    };
    match h.ask(|tx| Command::Labels(subs, tx)).await {
        Some(Ok(v)) => Json(v).into_response(),
        Some(Err(e @ (Error::UnknownTask(_) | Error::TaskCompleted(_)))) => error_response(StatusCode::CONFLICT, &e),
        Some(Err(e)) => error_response(StatusCode::BAD_REQUEST, &e),
        None => gone(),
    }
}

pub fn router(handle: ServiceHandle) -> Router {
    Router::new()
        .route("/api/run", get(get_run))
        .route("/api/batch", get(get_batch))
        .route("/api/labels", post(post_labels))
        .route("/api/curve", get(get_curve))
        .with_state(handle)
}

pub async fn serve(handle: ServiceHandle, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    axum::serve(listener, router(handle)).await
}
