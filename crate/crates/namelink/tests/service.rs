use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use namelink::active::{AlConfig, AlRun, BatchSchedule, QueryStrategy, StoredOracle};
use namelink::data::synth::{synth_generate, SynthConfig};
use namelink::learner::{LearnerKind, PairSet};
use namelink::service::{router, ServiceHandle, SCHEMA_VERSION};
use namelink::trees::ForestParams;
use serde_json::{json, Value};
use tower::ServiceExt;

fn config() -> AlConfig {
    AlConfig {
        schedule: BatchSchedule { sizes: vec![100, 200, 300] },
        strategy: QueryStrategy::default(),
        learner: LearnerKind::Forest(ForestParams { n_trees: 10, ..Default::default() }),
        seed: 5,
        early_stop: None,
        threshold: 0.5,
    }
}

fn fresh_run() -> (AlRun, Vec<u8>) {
    let ds = synth_generate(&SynthConfig { seed: 8, ..Default::default() }, 700).unwrap();
    let y = ds.labels();
    let seed: Vec<(usize, u8)> = (0..100).map(|i| (i, y[i])).collect();
    (AlRun::start(config(), PairSet::from_dataset(&ds), &seed, Vec::new()).unwrap(), y)
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map(Body::from).unwrap_or_else(Body::empty)).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn labels_for(batch: &Value, truth: &[u8]) -> Vec<Value> {
    batch["tasks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| {
            let id = t["task_id"].as_u64().unwrap();
            json!({ "task_id": id, "label": truth[id as usize] })
        })
        .collect()
}

#[tokio::test]
async fn batch_sizes_follow_the_schedule() {
    let (run, truth) = fresh_run();
    let app = router(ServiceHandle::spawn("t", run, None));
    let (code, batch) = call(&app, "GET", "/api/batch", None).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(batch["schema_version"], SCHEMA_VERSION);
    assert_eq!(batch["tasks"].as_array().unwrap().len(), 100);
    let unc: Vec<f64> = batch["tasks"].as_array().unwrap().iter().map(|t| t["uncertainty"].as_f64().unwrap()).collect();
    assert!(unc.windows(2).all(|w| w[0] >= w[1]));

    let (_, again) = call(&app, "GET", "/api/batch", None).await;
    assert_eq!(again, batch);

    let (code, reply) = call(&app, "POST", "/api/labels", Some(json!(labels_for(&batch, &truth)).to_string())).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(reply["status"], "training");
    let (_, next) = call(&app, "GET", "/api/batch", None).await;
    assert_eq!(next["tasks"].as_array().unwrap().len(), 200);
    let (_, run) = call(&app, "GET", "/api/run", None).await;
    assert_eq!(run["status"], "awaiting_labels");
    assert_eq!(run["n_labelled"], 200);
}

#[tokio::test]
async fn partial_batches_and_conflicts() {
    let (run, truth) = fresh_run();
    let app = router(ServiceHandle::spawn("t", run, None));
    let (_, batch) = call(&app, "GET", "/api/batch", None).await;
    let all = labels_for(&batch, &truth);

    let (code, reply) = call(&app, "POST", "/api/labels", Some(json!(all[..40]).to_string())).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(reply["remaining"], 60);
    let (_, rest) = call(&app, "GET", "/api/batch", None).await;
    assert_eq!(rest["tasks"].as_array().unwrap().len(), 60);

    // duplicate submission: 409 and nothing changes
    let (code, err) = call(&app, "POST", "/api/labels", Some(json!(all[..1]).to_string())).await;
    assert_eq!(code, StatusCode::CONFLICT);
    assert_eq!(err["error"], "task_completed");
    assert_eq!(err["schema_version"], SCHEMA_VERSION);
    let (_, same) = call(&app, "GET", "/api/batch", None).await;
    assert_eq!(same, rest);

    // a seed-set row was labelled before the run started
    let (code, _) = call(&app, "POST", "/api/labels", Some(json!([{ "task_id": 0, "label": 1 }]).to_string())).await;
    assert_eq!(code, StatusCode::CONFLICT);
    let (code, err) = call(&app, "POST", "/api/labels", Some(json!([{ "task_id": 99999, "label": 1 }]).to_string())).await;
    assert_eq!(code, StatusCode::CONFLICT);
    assert_eq!(err["error"], "unknown_task");

    // one bad entry rejects the whole submission
    let mut mixed = all[40..45].to_vec();
    mixed.push(json!({ "task_id": 99999, "label": 0 }));
    let (code, _) = call(&app, "POST", "/api/labels", Some(json!(mixed).to_string())).await;
    assert_eq!(code, StatusCode::CONFLICT);
    let (_, after) = call(&app, "GET", "/api/batch", None).await;
    assert_eq!(after["remaining"], 60);
}

#[tokio::test]
async fn malformed_bodies_are_bad_requests() {
    let (run, _) = fresh_run();
    let app = router(ServiceHandle::spawn("t", run, None));
    for body in ["not json", "{\"task_id\": 1}", "[{\"task_id\": 1}]", "[{\"task_id\": 1, \"label\": 1, \"x\": 2}]"] {
        let (code, err) = call(&app, "POST", "/api/labels", Some(body.into())).await;
        assert_eq!(code, StatusCode::BAD_REQUEST, "{body}");
        assert_eq!(err["schema_version"], SCHEMA_VERSION);
    }
    let (_, batch) = call(&app, "GET", "/api/batch", None).await;
    let id = batch["tasks"][0]["task_id"].as_u64().unwrap();
    let (code, _) = call(&app, "POST", "/api/labels", Some(json!([{ "task_id": id, "label": 2 }]).to_string())).await;
    assert_eq!(code, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn scripted_annotator_matches_headless_run() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.json");
    let (run, truth) = fresh_run();
    let app = router(ServiceHandle::spawn("t", run, Some(ck.clone())));
    for _ in 0..3 {
        let (_, batch) = call(&app, "GET", "/api/batch", None).await;
        let labels = labels_for(&batch, &truth);
        let ids: Vec<usize> = labels.iter().map(|l| l["task_id"].as_u64().unwrap() as usize).collect();
        call(&app, "POST", "/api/labels", Some(json!(labels).to_string())).await;
        // any request queues behind the retrain, so the checkpoint is written by now
        call(&app, "GET", "/api/run", None).await;
        // every posted label is in the next checkpoint
        let saved: Value = serde_json::from_str(&std::fs::read_to_string(&ck).unwrap()).unwrap();
        let labelled: Vec<usize> = serde_json::from_value(saved["state"]["labelled"].clone()).unwrap();
        assert!(ids.iter().all(|i| labelled.contains(i)));
    }
    let (_, status) = call(&app, "GET", "/api/run", None).await;
    assert_eq!(status["status"], "done");
    let (_, curve) = call(&app, "GET", "/api/curve", None).await;
    assert_eq!(curve["schema_version"], SCHEMA_VERSION);
    let n: Vec<u64> = curve["points"].as_array().unwrap().iter().map(|p| p["n_labelled"].as_u64().unwrap()).collect();
    assert_eq!(n, vec![100, 200, 400, 700]);

    let (mut headless, _) = fresh_run();
    headless.run_to_end(&mut StoredOracle::new(truth), None).unwrap();
    let saved = AlRun::resume(&ck, headless.universe.clone(), Vec::new(), None).unwrap();
    assert_eq!(saved.state.model, headless.state.model);
    assert_eq!(saved.state.history, headless.state.history);
    assert_eq!(status["history"], serde_json::to_value(&headless.state.history).unwrap());
}

#[tokio::test]
async fn every_endpoint_reports_the_schema_version() {
    let (run, _) = fresh_run();
    let app = router(ServiceHandle::spawn("t", run, None));
    for uri in ["/api/run", "/api/batch", "/api/curve"] {
        let (code, v) = call(&app, "GET", uri, None).await;
        assert_eq!(code, StatusCode::OK);
        assert_eq!(v["schema_version"], SCHEMA_VERSION, "{uri}");
    }
}
