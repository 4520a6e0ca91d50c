//! Helpers for driving the router in-process.
#![allow(dead_code)]

pub mod checks;

use std::sync::Arc;

use axum::body::{to_bytes, Body, Bytes};
use axum::http::{header, HeaderMap, Method, Request, StatusCode};
use axum::Router;
use holoviz_service::api::{router, ApiConfig};
use holoviz_service::store::Store;
use serde_json::Value;
use tempfile::TempDir;
use tower::ServiceExt;

pub const IRIS_CSV: &str = include_str!("../../../core/tests/data/iris.csv");

pub struct App {
    pub dir: TempDir,
    pub store: Arc<Store>,
    pub router: Router,
}

impl App {
    pub fn new(single_user: bool) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let store = Arc::new(Store::open(dir.path()).unwrap());
        let router = router(
            store.clone(),
            ApiConfig {
                single_user,
                ..ApiConfig::default()
            },
        );
        Self { dir, store, router }
    }

    pub fn token(&self) -> String {
        self.store.create_token().unwrap()
    }

    pub async fn send(
        &self,
        method: Method,
        uri: &str,
        token: Option<&str>,
        body: impl Into<Body>,
    ) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
        }
        let res = self
            .router
            .clone()
            .oneshot(req.body(body.into()).unwrap())
            .await
            .unwrap();
        let status = res.status();
        let headers = res.headers().clone();
        let body = to_bytes(res.into_body(), usize::MAX).await.unwrap();
        Reply {
            status,
            headers,
            body,
        }
    }

    pub async fn get(&self, uri: &str, token: Option<&str>) -> Reply {
        self.send(Method::GET, uri, token, Body::empty()).await
    }

    pub async fn post(&self, uri: &str, token: Option<&str>, body: impl Into<Body>) -> Reply {
        self.send(Method::POST, uri, token, body).await
    }

    pub async fn put(&self, uri: &str, token: Option<&str>, body: impl Into<Body>) -> Reply {
        self.send(Method::PUT, uri, token, body).await
    }

    /// Upload Iris and return its dataset id.
    pub async fn iris(&self, token: Option<&str>) -> String {
        let r = self.post("/api/datasets", token, IRIS_CSV).await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
        r.json()["id"].as_str().unwrap().to_owned()
    }

    /// A visualization body over `dataset` named `name`.
    pub fn viz_body(dataset: &str, name: &str) -> String {
        serde_json::json!({
            "dataset_id": dataset,
            "mapping": { "x": "sepal.length", "y": "sepal.width", "z": "petal.length" },
            "camera": holoviz_core::scene::OrbitCamera::default(),
            "name": name,
        })
        .to_string()
    }
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Bytes,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.text()))
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }
}
