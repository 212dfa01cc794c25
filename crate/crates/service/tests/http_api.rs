mod common;

use std::io::Write;
use std::sync::{Arc, Mutex};

use carshare_service::app::confirmation_token;
use carshare_service::http::{spawn, ErrorBody};
use carshare_service::Service;
use reqwest::{Client, StatusCode};
use serde_json::{json, Value};

const PASSWORD: &str = "Plaintext-Sentinel-7c41";

#[derive(Clone, Default)]
struct LogBuffer(Arc<Mutex<Vec<u8>>>);

impl Write for LogBuffer {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }
    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

fn capture_logs() -> LogBuffer {
    let buffer = LogBuffer::default();
    let writer = buffer.clone();
    tracing_subscriber::fmt()
        .with_max_level(tracing::Level::TRACE)
        .with_ansi(false)
        .with_writer(move || writer.clone())
        .init();
    buffer
}

struct Api {
    client: Client,
    base: String,
    transcript: Vec<u8>,
}

impl Api {
    async fn call(&mut self, method: reqwest::Method, path: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
        let mut req = self.client.request(method, format!("{}{path}", self.base));
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().await.unwrap();
        let status = resp.status();
        let bytes = resp.bytes().await.unwrap();
        self.transcript.extend_from_slice(&bytes);
        let value = serde_json::from_slice(&bytes).unwrap_or_else(|_| panic!("{path}: non-JSON body {bytes:?}"));
        (status, value)
    }

    async fn post(&mut self, path: &str, token: Option<&str>, body: Value) -> (StatusCode, Value) {
        self.call(reqwest::Method::POST, path, token, Some(body)).await
    }
}

fn assert_error(value: &Value, code: &str) {
    let body: ErrorBody = serde_json::from_value(value.clone()).unwrap();
    assert_eq!(body.error_code, code, "{value}");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn full_lifecycle_over_http() {
    let logs = capture_logs();
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("api.db");
    let service = Arc::new(common::file_service(&db));
    let (addr, _server) = spawn(service.clone(), "127.0.0.1:0".parse().unwrap()).await.unwrap();
    let mut api = Api {
        client: Client::new(),
        base: format!("http://{addr}/api/v1"),
        transcript: Vec::new(),
    };
    let creds = json!({"email": "Ana@Example.com", "password": PASSWORD});

    let (status, body) = api.post("/auth/register", None, creds.clone()).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["confirmed"], false);
    let (status, body) = api.post("/auth/register", None, json!({"email": "ana@example.com", "password": "other-password"})).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&body, "email_taken");
    let (status, body) = api.post("/auth/register", None, json!({"email": "bo@example.com", "password": "12345"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "weak_password");

    let outbox = service.store().outbox().unwrap();
    assert_eq!(outbox.len(), 1);
    assert_eq!(outbox[0].recipient, "ana@example.com");
    let token = confirmation_token(&outbox[0].body).unwrap().to_string();

    // Unconfirmed, wrong password and unknown email look identical.
    let (s1, unconfirmed) = api.post("/auth/login", None, creds.clone()).await;
    let (confirm_status, _) = api.post("/auth/confirm", None, json!({"token": token})).await;
    assert_eq!(confirm_status, StatusCode::OK);
    let (s2, wrong) = api.post("/auth/login", None, json!({"email": "ana@example.com", "password": "wrong-password"})).await;
    let (s3, unknown) = api.post("/auth/login", None, json!({"email": "nobody@example.com", "password": PASSWORD})).await;
    assert_eq!((s1, s2, s3), (StatusCode::UNAUTHORIZED, StatusCode::UNAUTHORIZED, StatusCode::UNAUTHORIZED));
    assert_eq!(unconfirmed, wrong);
    assert_eq!(wrong, unknown);
    assert_error(&wrong, "authentication_failed");

    let (status, body) = api.post("/auth/confirm", None, json!({"token": token})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "invalid_token");
    let (status, _) = api.post("/auth/confirm", None, json!({"token": "bm90LWEtdG9rZW4"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, session) = api.post("/auth/login", None, creds.clone()).await;
    assert_eq!(status, StatusCode::OK);
    let session_token = session["token"].as_str().unwrap().to_string();
    assert_eq!(session_token.len(), 43);
    assert!(chrono::DateTime::parse_from_rfc3339(session["expires_at"].as_str().unwrap()).is_ok());

    let (status, listing) = api
        .call(reqwest::Method::GET, "/vehicles?lat=41.1579&lon=-8.6291&radius_km=10", None, None)
        .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(listing.as_array().unwrap().len(), 3);
    assert_eq!(listing[0]["price_per_hour_cents"], 850);
    let (status, body) = api.call(reqwest::Method::GET, "/vehicles?lat=100&lon=0&radius_km=1", None, None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "invalid_request");
    let (status, body) = api.call(reqwest::Method::GET, "/vehicles?lat=abc", None, None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "invalid_request");

    let rank_body = json!({
        "criteria": ["performance", "consumption", "security"],
        "judgments": [2, 4, 2],
        "lat": 41.1579, "lon": -8.6291, "radius_km": 10, "mode": "matrix"
    });
    let (status, ranked) = api.post("/rank", None, rank_body.clone()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ranked["entries"].as_array().unwrap().len(), 3);
    assert_eq!(ranked["criteria_weights"].as_array().unwrap().len(), 3);
    assert_eq!(ranked["consistency"]["acceptable"], true);
    assert_eq!(ranked["mode"], "matrix");
    let mut eight = rank_body.clone();
    eight["criteria"] = json!(["a", "b", "c", "d", "e", "f", "g", "h"]);
    eight["judgments"] = json!(vec![1; 28]);
    let (status, body) = api.post("/rank", None, eight).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "invalid_preferences");

    let (status, cost) = api
        .post("/simulate", None, json!({"vehicle_id": "v1", "travel_minutes": 60, "standby_minutes": 30, "distance_km": 0}))
        .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(cost["cost_cents"], 2100);

    let booking = json!({
        "vehicle_id": "v1",
        "start": "2026-07-01T10:00:00Z",
        "end": "2026-07-01T11:00:00Z",
        "trip_plan": {"travel_minutes": 60, "standby_minutes": 0, "distance_km": 12.5}
    });
    let (status, body) = api.post("/bookings", None, booking.clone()).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    assert_error(&body, "unauthenticated");
    let (status, body) = api.post("/bookings", Some("forged"), booking.clone()).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    assert_error(&body, "unauthenticated");
    let (status, created) = api.post("/bookings", Some(&session_token), booking.clone()).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(created["quote_cents"], 1800);
    assert_eq!(created["status"], "confirmed");
    let (status, body) = api.post("/bookings", Some(&session_token), booking.clone()).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&body, "booking_conflict");

    let (status, rated) = api
        .post("/vehicles/v2/ratings", Some(&session_token), json!({"comfort": 5, "consumption": 4, "safety": 3}))
        .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(rated["ratings"]["count"], 1);
    let (status, _) = api.post("/vehicles/v2/ratings", None, json!({"comfort": 5, "consumption": 4, "safety": 3})).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    let (status, _) = api
        .post("/vehicles/ghost/ratings", Some(&session_token), json!({"comfort": 5, "consumption": 4, "safety": 3}))
        .await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let xml = r#"<evaluations><evaluation record_id="r1" vehicle_id="v1"><comfort>4</comfort><consumption>4</consumption><safety>4</safety></evaluation></evaluations>"#;
    let resp = api.client.post(format!("{}/admin/import", api.base)).body(xml).send().await.unwrap();
    assert_eq!(resp.status(), StatusCode::FORBIDDEN);
    let resp = api
        .client
        .post(format!("{}/admin/import", api.base))
        .bearer_auth("admin-secret")
        .body(xml)
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let report: Value = resp.json().await.unwrap();
    assert_eq!(report["accepted"], 1);

    let (status, body) = api.post("/auth/login", None, json!({"email": 5})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "invalid_request");
    let (status, body) = api.call(reqwest::Method::GET, "/nope", None, None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&body, "not_found");
    let (status, body) = api.call(reqwest::Method::GET, "/rank", None, None).await;
    assert_eq!(status, StatusCode::METHOD_NOT_ALLOWED);
    assert_error(&body, "method_not_allowed");

    // Plaintext and hash never leave storage; plaintext never enters it.
    let stored_hash = service.store().credentials("ana@example.com").unwrap().unwrap().1;
    let logs = String::from_utf8(logs.0.lock().unwrap().clone()).unwrap();
    assert!(logs.contains("account registered"));
    let transcript = String::from_utf8_lossy(&api.transcript).to_string();
    for (name, haystack) in [("logs", &logs), ("responses", &transcript)] {
        assert!(!haystack.contains(PASSWORD), "plaintext password in {name}");
        assert!(!haystack.contains(&stored_hash), "password hash in {name}");
    }
    let snapshot = service.store().export_snapshot().unwrap();
    let mut storage = snapshot.clone();
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        storage.extend(std::fs::read(entry.unwrap().path()).unwrap());
    }
    assert!(!String::from_utf8_lossy(&storage).contains(PASSWORD));
    assert!(String::from_utf8_lossy(&snapshot).contains("$argon2id$"));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn concurrent_http_bookings_exactly_one_wins() {
    let dir = tempfile::tempdir().unwrap();
    let service: Arc<Service> = Arc::new(common::file_service(&dir.path().join("race.db")));
    let (addr, _server) = spawn(service.clone(), "127.0.0.1:0".parse().unwrap()).await.unwrap();
    let now = chrono::Utc::now();
    service.register("racer@example.com", "long enough pw", now).unwrap();
    let token = confirmation_token(&service.store().outbox().unwrap()[0].body).unwrap().to_string();
    service.confirm(&token, now).unwrap();
    let session = service.login("racer@example.com", "long enough pw", now).unwrap();

    let client = Client::new();
    for round in 0..3u32 {
        let requests = (0..32u32).map(|i| {
            let client = client.clone();
            let url = format!("http://{addr}/api/v1/bookings");
            let token = session.token.clone();
            let body = json!({
                "vehicle_id": "v2",
                "start": format!("2026-08-0{}T10:{:02}:00Z", round + 1, i),
                "end": format!("2026-08-0{}T11:00:00Z", round + 1),
                "trip_plan": {"travel_minutes": 30, "standby_minutes": 0, "distance_km": 1}
            });
            tokio::spawn(async move { client.post(url).bearer_auth(token).json(&body).send().await.unwrap().status() })
        });
        let mut statuses = Vec::new();
        for r in requests.collect::<Vec<_>>() {
            statuses.push(r.await.unwrap());
        }
        let created = statuses.iter().filter(|s| **s == StatusCode::CREATED).count();
        let conflicts = statuses.iter().filter(|s| **s == StatusCode::CONFLICT).count();
        assert_eq!((created, conflicts), (1, 31), "round {round}");
    }
}
