use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use relfeed_core::{generate_synthetic, replay_transcript, Algorithm, Dataset, Engine};
use relfeed_service::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

fn dataset() -> Dataset<f64> {
    generate_synthetic(100, 4, 5).unwrap()
}

fn app_with(config: ServiceConfig) -> Router {
    router(AppState::new(dataset(), config))
}

fn app() -> Router {
    app_with(ServiceConfig::default())
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

fn ids(view: &Value) -> Vec<String> {
    view["display"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["item_id"].as_str().unwrap().to_string())
        .collect()
}

async fn create(app: &Router, body: Value) -> Value {
    let (status, v) = call(app, "POST", "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v
}

#[tokio::test]
async fn create_returns_distinct_display() {
    let app = app();
    let v = create(&app, json!({"algorithm": "be", "k": 6, "seed": 1})).await;
    let mut shown = ids(&v);
    assert_eq!(shown.len(), 6);
    shown.sort();
    shown.dedup();
    assert_eq!(shown.len(), 6);
    assert_eq!(v["round"], 1);
    assert_eq!(v["max_rounds"], 50);
    assert_eq!(v["rounds_remaining"], 49);
    assert_eq!(v["status"], "active");
    let first = &v["display"][0];
    assert_eq!(first["asset_url"], format!("/assets/{}", first["item_id"].as_str().unwrap()));

    let again = create(&app, json!({"algorithm": "be", "k": 6, "seed": 1})).await;
    assert_eq!(ids(&again), ids(&v));
    assert_ne!(again["session_id"], v["session_id"]);
}

#[tokio::test]
async fn create_validation_errors() {
    let app = app();
    let (s, v) = call(&app, "POST", "/sessions", Some(json!({"algorithm": "be", "k": 101}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "invalid_request");
    assert!(v["message"].as_str().unwrap().contains("101"));

    let (s, v) = call(&app, "POST", "/sessions", Some(json!({"algorithm": "zzz", "k": 5}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST, "{v}");

    let (s, v) = call(&app, "POST", "/sessions", Some(json!({"algorithm": "be", "k": 5, "dataset": "other"}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["code"], "unknown_dataset");

    let (s, v) = call(&app, "POST", "/sessions", Some(json!({"k": 5}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "invalid_request");
}

#[tokio::test]
async fn choice_advances_round_and_bad_choice_changes_nothing() {
    let app = app();
    let v = create(&app, json!({"algorithm": "ds_vb", "k": 5, "seed": 2})).await;
    let id = v["session_id"].as_str().unwrap().to_string();
    let shown = ids(&v);
    let hidden = (0..100).map(|i| i.to_string()).find(|i| !shown.contains(i)).unwrap();

    let (s, err) = call(&app, "POST", &format!("/sessions/{id}/choice"), Some(json!({"item_id": hidden}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(err["code"], "not_displayed");
    let (_, same) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(same["round"], 1);
    assert_eq!(ids(&same), shown);

    let (s, next) = call(&app, "POST", &format!("/sessions/{id}/choice"), Some(json!({"item_id": shown[0]}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(next["round"], 2);
    assert_eq!(next["rounds_remaining"], 48);
    let (_, fetched) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(ids(&fetched), ids(&next));

    let (s, err) = call(&app, "POST", &format!("/sessions/{id}/choice"), Some(json!({"item_id": "nope"}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], "unknown_item");
}

#[tokio::test]
async fn unknown_session_is_404() {
    let app = app();
    for uri in ["/sessions/abc", "/sessions/6f9619ff-8b86-d011-b42d-00c04fc964ff"] {
        let (s, v) = call(&app, "GET", uri, None).await;
        assert_eq!(s, StatusCode::NOT_FOUND);
        assert_eq!(v["code"], "unknown_session");
    }
    let (s, _) = call(
        &app,
        "POST",
        "/sessions/6f9619ff-8b86-d011-b42d-00c04fc964ff/choice",
        Some(json!({"item_id": "1"})),
    )
    .await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn interleaved_sessions_stay_isolated() {
    let app = app();
    let body = json!({"algorithm": "be", "k": 4, "seed": 9});
    let a = create(&app, body.clone()).await;
    let b = create(&app, body.clone()).await;
    let solo = create(&app, body).await;
    let (mut va, mut vb, mut vs) = (a, b, solo);
    for _ in 0..5 {
        let pick = |v: &Value, i: usize| json!({"item_id": ids(v)[i]});
        let ida = va["session_id"].as_str().unwrap().to_string();
        let idb = vb["session_id"].as_str().unwrap().to_string();
        let ids_ = vs["session_id"].as_str().unwrap().to_string();
        va = call(&app, "POST", &format!("/sessions/{ida}/choice"), Some(pick(&va, 0))).await.1;
        vb = call(&app, "POST", &format!("/sessions/{idb}/choice"), Some(pick(&vb, 3))).await.1;
        vs = call(&app, "POST", &format!("/sessions/{ids_}/choice"), Some(pick(&vs, 0))).await.1;
    }
    assert_eq!(ids(&va), ids(&vs));
    assert_eq!(va["round"], 6);
    assert_eq!(vb["round"], 6);
}

#[tokio::test]
async fn finish_found_then_reject_further_requests() {
    let app = app();
    let v = create(&app, json!({"algorithm": "al", "k": 5, "seed": 3, "target_preview": "7"})).await;
    assert_eq!(v["target_preview"]["item_id"], "7");
    let id = v["session_id"].as_str().unwrap().to_string();
    let found = ids(&v)[2].clone();

    let (s, sum) = call(&app, "POST", &format!("/sessions/{id}/finish"), Some(json!({"found_item_id": found}))).await;
    assert_eq!(s, StatusCode::OK, "{sum}");
    assert_eq!(sum["status"], "found");
    assert_eq!(sum["found_item_id"], found.as_str());
    assert_eq!(sum["rounds"], 1);
    assert_eq!(sum["distances"].as_array().unwrap().len(), 1);

    let (s, err) = call(&app, "POST", &format!("/sessions/{id}/finish"), Some(json!({"abandon": true}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(err["code"], "session_finished");
    let (s, _) = call(&app, "POST", &format!("/sessions/{id}/choice"), Some(json!({"item_id": found}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (_, got) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(got["status"], "found");

    let (s, _) = call(&app, "POST", &format!("/sessions/{id}/finish"), Some(json!({}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn round_cap_then_abandon_writes_replayable_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(ServiceConfig {
        snapshot_dir: Some(dir.path().to_path_buf()),
        ..ServiceConfig::default()
    });
    let mut v = create(&app, json!({"algorithm": "be", "k": 3, "seed": 4})).await;
    let id = v["session_id"].as_str().unwrap().to_string();
    while v["round"] != 50 {
        let (s, next) = call(&app, "POST", &format!("/sessions/{id}/choice"), Some(json!({"item_id": ids(&v)[1]}))).await;
        assert_eq!(s, StatusCode::OK);
        v = next;
    }
    assert_eq!(v["rounds_remaining"], 0);
    let (s, err) = call(&app, "POST", &format!("/sessions/{id}/choice"), Some(json!({"item_id": ids(&v)[0]}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(err["code"], "round_limit");

    let (s, sum) = call(&app, "POST", &format!("/sessions/{id}/finish"), Some(json!({"abandon": true}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(sum["status"], "abandoned");
    assert_eq!(sum["rounds"], 50);
    assert!(sum["distances"].is_null());

    let data = dataset();
    let snapshot = std::fs::read_to_string(dir.path().join(format!("{id}.state"))).unwrap();
    let transcript = std::fs::read_to_string(dir.path().join(format!("{id}.transcript"))).unwrap();
    let mut lines = transcript.lines();
    assert_eq!(lines.next(), Some("algorithm\tbe"));
    let entries: Vec<_> = lines
        .map(|l| {
            let (shown, chosen) = l.split_once('\t').unwrap();
            relfeed_core::TranscriptEntry {
                display: shown.split(',').map(|s| data.index_of(s).unwrap()).collect(),
                chosen: data.index_of(chosen).unwrap(),
            }
        })
        .collect();
    assert_eq!(entries.len(), 49);
    let engine = replay_transcript(&data, Algorithm::BetaExperts, Default::default(), &entries).unwrap();
    assert_eq!(engine.snapshot(data.ids()), snapshot);
    let restored = Engine::<f64>::from_snapshot(&snapshot, data.ids(), Default::default()).unwrap();
    assert_eq!(restored, engine);
}

#[tokio::test]
async fn assets_are_served_from_the_assets_dir() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("3.png"), b"\x89PNG fake").unwrap();
    let app = app_with(ServiceConfig {
        assets_dir: Some(dir.path().to_path_buf()),
        ..ServiceConfig::default()
    });
    let req = Request::builder().uri("/assets/3").body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(resp.headers()["content-type"], "image/png");
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    assert_eq!(&bytes[..], b"\x89PNG fake");

    let (s, v) = call(&app, "GET", "/assets/4", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["code"], "unknown_item");
    let (s, _) = call(&app, "GET", "/assets/unknown", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn all_algorithms_run_a_short_session() {
    let app = app();
    for algo in Algorithm::ALL {
        let mut v = create(&app, json!({"algorithm": algo.to_string(), "k": 4, "seed": 1})).await;
        assert_eq!(v["algorithm"], algo.to_string());
        let id = v["session_id"].as_str().unwrap().to_string();
        for r in 0..3 {
            let (s, next) = call(&app, "POST", &format!("/sessions/{id}/choice"), Some(json!({"item_id": ids(&v)[r]}))).await;
            assert_eq!(s, StatusCode::OK, "{algo}: {next}");
            v = next;
        }
        assert_eq!(v["round"], 4);
    }
}

#[test]
fn state_is_shareable() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<Arc<AppState>>();
}
