//! Drives the labeling HTTP API in-process with a scripted annotator.
//!
//! Pass `--listen` to serve on $NAMELINK_PORT (default 8080) instead.

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use namelink::active::{AlConfig, AlRun, BatchSchedule, QueryStrategy};
use namelink::data::synth::{synth_generate, SynthConfig};
use namelink::learner::{LearnerKind, PairSet};
use namelink::service::{default_port, router, serve, ServiceHandle};
use namelink::trees::ForestParams;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> Value {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty)).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    serde_json::from_slice(&resp.into_body().collect().await.unwrap().to_bytes()).unwrap()
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = synth_generate(&SynthConfig { seed: 2, ..Default::default() }, 700)?;
    let truth = ds.labels();
    let seed: Vec<(usize, u8)> = (0..100).map(|i| (i, truth[i])).collect();
    let config = AlConfig {
        schedule: BatchSchedule { sizes: vec![100, 200, 300] },
        strategy: QueryStrategy::default(),
        learner: LearnerKind::Forest(ForestParams::default()),
        seed: 1,
        early_stop: None,
        threshold: 0.5,
    };
    let run = AlRun::start(config, PairSet::from_dataset(&ds), &seed, Vec::new())?.with_pool_truth(truth.clone());
    let handle = ServiceHandle::spawn("example", run, None);

    if std::env::args().any(|a| a == "--listen") {
        let port = default_port();
        println!("serving on http://127.0.0.1:{port}/api/run");
        return Ok(serve(handle, port).await?);
    }

    let app = router(handle);
    loop {
        let batch = call(&app, "GET", "/api/batch", None).await;
        let tasks = batch["tasks"].as_array().cloned().unwrap_or_default();
        if tasks.is_empty() {
            break;
        }
        let top = &tasks[0];
        println!("iteration {}: {} tasks, most uncertain {:?} / {:?} ({:.3})", batch["iteration"], tasks.len(), top["name_a"], top["name_b"], top["uncertainty"].as_f64().unwrap());
        let labels: Vec<Value> = tasks
            .iter()
            .map(|t| json!({ "task_id": t["task_id"], "label": truth[t["task_id"].as_u64().unwrap() as usize] }))
            .collect();
        let reply = call(&app, "POST", "/api/labels", Some(json!(labels))).await;
        println!("  posted, status {}", reply["status"]);
    }
    let curve = call(&app, "GET", "/api/curve", None).await;
    println!("{}", serde_json::to_string_pretty(&curve).unwrap());
    Ok(())
}
