use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use plainlang::evaluation::{aggregate_likert, read_ratings_jsonl};
use plainlang_rating::{router, Pool, RatingService, RatingSubmission};
use serde_json::{json, Value};
use tower::ServiceExt;

const SYSTEMS: [&str; 3] = ["gpt-4o-mini_baseline", "gpt-4o-mini_two_agents", "gpt-4o_ft"];

fn pool() -> Pool {
    Pool::from_items((0..12).map(|i| {
        (
            SYSTEMS[i % 3].to_string(),
            format!("Q1/{}/1", 1000 + i / 3),
            vec![format!("Source sentence {i}.")],
            vec![format!("Plain sentence {i}.")],
        )
    }))
}

struct Harness {
    svc: Arc<RatingService>,
    _dir: tempfile::TempDir,
}

impl Harness {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("index.html"), "<p>rate</p>").unwrap();
        let svc = Arc::new(RatingService::open(pool(), dir.path().join("store")).unwrap());
        Self { svc, _dir: dir }
    }

    async fn call(&self, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, String) {
        let app = router(self.svc.clone(), Some(self._dir.path().to_path_buf()));
        let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
        let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
        let resp = app.oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        (status, String::from_utf8(bytes.to_vec()).unwrap())
    }

    async fn json(&self, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let (s, text) = self.call(method, uri, body).await;
        assert_blinded(&text);
        (s, serde_json::from_str(&text).unwrap_or(Value::Null))
    }
}

fn assert_blinded(payload: &str) {
    for s in SYSTEMS {
        assert!(!payload.contains(s), "system identity leaked: {payload}");
    }
    assert!(!payload.contains("system_id"), "system field leaked: {payload}");
    assert!(!payload.contains("blinding"), "blinding map leaked: {payload}");
}

#[tokio::test]
async fn five_sample_session_end_to_end() {
    let h = Harness::new();
    let (status, created) = h.json("POST", "/api/sessions", Some(json!({"n": 5, "seed": 11}))).await;
    assert_eq!(status, StatusCode::CREATED);
    let sid = created["session_id"].as_str().unwrap().to_string();

    let scores = [[3, 4, 5, 2], [4, 4, 4, 4], [5, 3, 4, 4], [2, 5, 5, 3], [4, 4, 3, 5]];
    for (i, v) in scores.iter().enumerate() {
        let (status, next) = h.json("GET", &format!("/api/sessions/{sid}/next?rater=alice"), None).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(next["status"], "sample");
        assert_eq!(next["position"], i + 1);
        let body = json!({
            "session_id": sid, "rater_id": "alice", "item_id": next["item_id"],
            "simplicity": v[0], "accuracy": v[1], "completeness": v[2], "brevity": v[3],
        });
        let (status, ack) = h.json("POST", "/api/ratings", Some(body)).await;
        assert_eq!(status, StatusCode::CREATED, "{ack}");
        assert_eq!(ack["record_id"], i + 1);
    }
    let (_, next) = h.json("GET", &format!("/api/sessions/{sid}/next?rater=alice"), None).await;
    assert_eq!(next["status"], "complete");
    let (_, progress) = h.json("GET", &format!("/api/sessions/{sid}/progress"), None).await;
    assert_eq!(progress["raters"]["alice"], 5);
    assert_eq!(progress["complete_raters"], 1);

    let ratings = read_ratings_jsonl(h.svc.ratings_path()).unwrap();
    assert_eq!(ratings.len(), 5);
    // Pooled over systems, hand-computed from `scores`.
    let all: Vec<_> = ratings.iter().cloned().map(|mut r| {
        r.system_id_hidden = "all".into();
        r
    }).collect();
    let s = aggregate_likert(&all, "all").unwrap();
    assert!((s.simplicity.mean - 3.6).abs() < 1e-12);
    assert!((s.accuracy.mean - 4.0).abs() < 1e-12);
    assert!((s.completeness.mean - 4.2).abs() < 1e-12);
    assert!((s.brevity.mean - 3.6).abs() < 1e-12);
    assert!((s.total_score.mean - 15.4).abs() < 1e-12);
    // The stored records do carry the hidden identity for post-hoc analysis.
    assert!(ratings.iter().all(|r| SYSTEMS.contains(&r.system_id_hidden.as_str())));
}

#[tokio::test]
async fn error_payloads() {
    let h = Harness::new();
    let (status, e) = h.json("POST", "/api/sessions", Some(json!({"n": 13}))).await;
    assert_eq!((status, e["code"].as_str().unwrap()), (StatusCode::CONFLICT, "too_large"));
    let (status, e) = h.json("GET", "/api/sessions/nope/next?rater=a", None).await;
    assert_eq!((status, e["code"].as_str().unwrap()), (StatusCode::NOT_FOUND, "unknown_session"));
    let (status, e) = h.json("POST", "/api/ratings", Some(json!({"nonsense": true}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(e["message"].is_string());

    let (_, created) = h.json("POST", "/api/sessions", Some(json!({"n": 2, "seed": 1}))).await;
    let sid = created["session_id"].as_str().unwrap();
    let (_, next) = h.json("GET", &format!("/api/sessions/{sid}/next?rater=bob"), None).await;
    let mut body = json!({"session_id": sid, "rater_id": "bob", "item_id": next["item_id"], "simplicity": 6, "accuracy": 1, "completeness": 1, "brevity": 1});
    let (status, e) = h.json("POST", "/api/ratings", Some(body.clone())).await;
    assert_eq!((status, e["code"].as_str().unwrap()), (StatusCode::UNPROCESSABLE_ENTITY, "out_of_range"));
    body["simplicity"] = json!(2);
    body.as_object_mut().unwrap().remove("brevity");
    let (_, e) = h.json("POST", "/api/ratings", Some(body.clone())).await;
    assert_eq!(e["code"], "missing_dimension");
    body["brevity"] = json!(2);
    assert_eq!(h.json("POST", "/api/ratings", Some(body.clone())).await.0, StatusCode::CREATED);
    let (status, e) = h.json("POST", "/api/ratings", Some(body)).await;
    assert_eq!((status, e["code"].as_str().unwrap()), (StatusCode::CONFLICT, "duplicate"));
    let (_, e) = h.json("GET", &format!("/api/sessions/{sid}/next"), None).await;
    assert_eq!(e["code"], "missing_rater");
}

#[tokio::test]
async fn static_files_are_served() {
    let h = Harness::new();
    let (status, body) = h.call("GET", "/index.html", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, "<p>rate</p>");
}

#[test]
fn concurrent_duplicates_rejected() {
    let h = Harness::new();
    let created = h.svc.create_session(4, 5).unwrap();
    let items = h.svc.session(&created.session_id).unwrap().item_ids.clone();
    let outcomes: Vec<bool> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..32)
            .map(|t| {
                let svc = &h.svc;
                let sid = created.session_id.clone();
                let item = items[t % items.len()].clone();
                scope.spawn(move || {
                    svc.submit_rating(&RatingSubmission {
                        session_id: sid,
                        rater_id: format!("r{}", (t / 4) % 2),
                        item_id: item,
                        simplicity: Some(3),
                        accuracy: Some(3),
                        completeness: Some(3),
                        brevity: Some(3),
                    })
                    .is_ok()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    // Two raters × four items: exactly eight accepted, however the threads interleave.
    assert_eq!(outcomes.iter().filter(|ok| **ok).count(), 8);
    let stored = read_ratings_jsonl(h.svc.ratings_path()).unwrap();
    assert_eq!(stored.len(), 8);
    let mut keys: Vec<_> = stored.iter().map(|r| (r.rater_id.clone(), r.sample_id.clone(), r.system_id_hidden.clone())).collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), 8);
}
