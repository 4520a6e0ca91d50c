//! Service properties shared by the integration tests and the acceptance
//! suite. Each returns a one-line summary or the first failure.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use holoviz_core::scene::{deserialize_scene, serialize_scene};
use holoviz_service::ops::StoredVisualization;
use holoviz_service::store::{Kind, Namespace, Store};
use serde_json::json;

use super::{App, IRIS_CSV};

pub type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Every PUT is visible to the next GET, under concurrent writers.
pub async fn read_after_write(writers: usize, rounds: usize) -> Check {
    let app = Arc::new(App::new(true));
    let dataset = app.iris(None).await;
    let mut tasks = Vec::new();
    for w in 0..writers {
        let app = app.clone();
        let dataset = dataset.clone();
        tasks.push(tokio::spawn(async move {
            let uri = format!("/api/visualizations/w{w}");
            for round in 0..rounds {
                let put = app
                    .put(&uri, None, App::viz_body(&dataset, &format!("{w}-{round}")))
                    .await;
                if !put.status.is_success() {
                    return Err(format!("PUT {uri}: {}", put.status));
                }
                let got = app.get(&uri, None).await;
                if got.body != put.body {
                    return Err(format!("GET {uri} after round {round} returned stale data"));
                }
            }
            Ok(())
        }));
    }
    for t in tasks {
        t.await.map_err(|e| e.to_string())??;
    }
    Ok(format!(
        "{} writes by {writers} concurrent writers",
        writers * rounds
    ))
}

/// Two tokens writing the same ids at the same time never see each other.
pub async fn namespace_isolation(rounds: usize) -> Check {
    let app = Arc::new(App::new(false));
    let tokens = [app.token(), app.token()];
    let mut datasets = Vec::new();
    for t in &tokens {
        datasets.push(app.iris(Some(t)).await);
    }
    let mut tasks = Vec::new();
    for (who, (token, dataset)) in tokens.iter().zip(&datasets).enumerate() {
        for id in 0..4 {
            let (app, token, dataset) = (app.clone(), token.clone(), dataset.clone());
            tasks.push(tokio::spawn(async move {
                let uri = format!("/api/visualizations/shared{id}");
                for round in 0..rounds {
                    let name = format!("owner{who}-{round}");
                    let put = app
                        .put(&uri, Some(&token), App::viz_body(&dataset, &name))
                        .await;
                    if !put.status.is_success() {
                        return Err(format!("PUT {uri} as {who}: {} {}", put.status, put.text()));
                    }
                    let got = app.get(&uri, Some(&token)).await.json();
                    if got["name"] != name.as_str() {
                        return Err(format!("{who} read {} from {uri}", got["name"]));
                    }
                }
                Ok(())
            }));
        }
    }
    for t in tasks {
        t.await.map_err(|e| e.to_string())??;
    }
    for (who, token) in tokens.iter().enumerate() {
        let other = &datasets[1 - who];
        let r = app
            .get(&format!("/api/datasets/{other}"), Some(token))
            .await;
        ensure!(
            r.status == 404,
            "{who} can read the other dataset: {}",
            r.status
        );
        let list = app.get("/api/visualizations", Some(token)).await.json();
        let entries = list.as_array().cloned().unwrap_or_default();
        ensure!(entries.len() == 4, "{who} lists {} entries", entries.len());
        for e in entries {
            let name = e["name"].as_str().unwrap_or_default();
            ensure!(
                name.starts_with(&format!("owner{who}-")),
                "{who} lists {name}"
            );
        }
    }
    Ok(format!(
        "2 tokens x 4 shared ids x {rounds} interleaved rounds"
    ))
}

/// A stored scene comes back byte-identical and re-serializes unchanged.
pub async fn scene_round_trip() -> Check {
    let app = App::new(true);
    let dataset = app.iris(None).await;
    let r = app
        .post(
            "/api/scenes",
            None,
            json!({ "dataset_id": dataset }).to_string(),
        )
        .await;
    ensure!(
        r.status == 201,
        "POST /api/scenes: {} {}",
        r.status,
        r.text()
    );
    let id = r.json()["scene_id"].as_str().unwrap_or_default().to_owned();
    let a = app.get(&format!("/api/scenes/{id}"), None).await;
    let b = app.get(&format!("/api/scenes/{id}"), None).await;
    ensure!(a.status == 200 && a.body == b.body, "two GETs differ");
    let scene = deserialize_scene(&a.body).map_err(|e| e.to_string())?;
    let again = serialize_scene(&scene);
    ensure!(
        again == a.body.to_vec(),
        "deserialize then serialize changed the bytes"
    );
    Ok(format!(
        "{} bytes, {} nodes",
        a.body.len(),
        scene.nodes.len()
    ))
}

/// Minimal HTTP/1.1 client for talking to a real server process.
pub fn http(
    addr: SocketAddr,
    method: &str,
    path: &str,
    body: &[u8],
) -> std::io::Result<(u16, Vec<u8>)> {
    let mut stream = TcpStream::connect(addr)?;
    stream.set_read_timeout(Some(Duration::from_secs(30)))?;
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\n\
         Content-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    )?;
    stream.write_all(body)?;
    let mut raw = Vec::new();
    stream.read_to_end(&mut raw)?;
    let split = raw
        .windows(4)
        .position(|w| w == b"\r\n\r\n")
        .ok_or_else(|| std::io::Error::other("truncated response"))?;
    let head = String::from_utf8_lossy(&raw[..split]);
    let status = head
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| std::io::Error::other("bad status line"))?;
    Ok((status, raw[split + 4..].to_vec()))
}

pub struct Server {
    pub child: Child,
    pub addr: SocketAddr,
}

pub fn spawn_server(exe: &Path, data_dir: &Path) -> Result<Server, String> {
    let mut child = Command::new(exe)
        .args(["serve", "--port", "0", "--single-user", "--data-dir"])
        .arg(data_dir)
        .env_remove("HOLOVIZ_PORT")
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| format!("spawn {}: {e}", exe.display()))?;
    let mut line = String::new();
    BufReader::new(child.stdout.take().expect("piped"))
        .read_line(&mut line)
        .map_err(|e| e.to_string())?;
    let addr = line
        .trim()
        .strip_prefix("listening on ")
        .and_then(|a| a.parse().ok())
        .ok_or_else(|| format!("unexpected banner {line:?}"))?;
    Ok(Server { child, addr })
}

fn files_under(dir: &Path, out: &mut Vec<PathBuf>) {
    if let Ok(entries) = fs::read_dir(dir) {
        for e in entries.flatten() {
            let p = e.path();
            if p.is_dir() {
                files_under(&p, out);
            } else {
                out.push(p);
            }
        }
    }
}

/// Hammer a server process with large PUTs, SIGKILL it mid-stream, and check
/// that every document on disk is whole and is either the last
/// acknowledged write for its id or the one in flight.
pub fn kill_during_writes(exe: &Path, cycles: usize) -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut acknowledged_total = 0;
    let mut checked_total = 0;
    for cycle in 0..cycles {
        let mut server = spawn_server(exe, dir.path())?;
        let addr = server.addr;
        let (status, body) =
            http(addr, "POST", "/api/datasets", IRIS_CSV.as_bytes()).map_err(|e| e.to_string())?;
        ensure!(status == 201, "upload: {status}");
        let dataset: serde_json::Value =
            serde_json::from_slice(&body).map_err(|e| e.to_string())?;
        let dataset = dataset["id"].as_str().unwrap_or_default().to_owned();

        // Per id: (last acknowledged body, body in flight).
        type Ledger = HashMap<String, (Option<Vec<u8>>, Option<String>)>;
        let ledger: Arc<Mutex<Ledger>> = Arc::default();
        let stop = Arc::new(AtomicBool::new(false));
        let mut writers = Vec::new();
        for w in 0..6 {
            let (ledger, stop, dataset) = (ledger.clone(), stop.clone(), dataset.clone());
            writers.push(thread::spawn(move || {
                let id = format!("c{cycle}w{w}");
                let mut round = 0usize;
                while !stop.load(Ordering::Relaxed) {
                    let name = format!("{round:08}{}", "x".repeat(256 * 1024 + round % 1000));
                    ledger.lock().unwrap().entry(id.clone()).or_default().1 = Some(name.clone());
                    let body = App::viz_body(&dataset, &name);
                    match http(
                        addr,
                        "PUT",
                        &format!("/api/visualizations/{id}"),
                        body.as_bytes(),
                    ) {
                        Ok((200 | 201, stored)) => {
                            ledger.lock().unwrap().get_mut(&id).unwrap().0 = Some(stored);
                        }
                        _ => break,
                    }
                    round += 1;
                }
            }));
        }
        thread::sleep(Duration::from_millis(400 + 150 * cycle as u64));
        server.child.kill().map_err(|e| e.to_string())?;
        server.child.wait().map_err(|e| e.to_string())?;
        stop.store(true, Ordering::Relaxed);
        for w in writers {
            w.join().map_err(|_| "writer panicked".to_owned())?;
        }

        let mut files = Vec::new();
        files_under(dir.path(), &mut files);
        for f in files
            .iter()
            .filter(|f| f.extension().is_some_and(|e| e == "json"))
        {
            let bytes = fs::read(f).map_err(|e| e.to_string())?;
            serde_json::from_slice::<serde_json::Value>(&bytes)
                .map_err(|e| format!("{} is torn: {e}", f.display()))?;
        }

        let store = Store::open(dir.path()).map_err(|e| e.to_string())?;
        let ns = Namespace::local();
        let ledger = ledger.lock().unwrap();
        for (id, (acked, in_flight)) in ledger.iter() {
            let stored = store
                .get(&ns, Kind::Visualization, id)
                .map_err(|e| e.to_string())?;
            match (stored, acked) {
                (None, None) => {}
                (None, Some(_)) => return Err(format!("{id}: acknowledged write lost")),
                (Some(bytes), acked) => {
                    let doc: StoredVisualization =
                        serde_json::from_slice(&bytes).map_err(|e| format!("{id}: {e}"))?;
                    let is_acked = acked.as_deref() == Some(&bytes[..]);
                    let is_in_flight = in_flight.as_deref() == Some(doc.name.as_str());
                    ensure!(
                        is_acked || is_in_flight,
                        "{id}: stored document is neither acknowledged nor in flight"
                    );
                    checked_total += 1;
                }
            }
            acknowledged_total += usize::from(acked.is_some());
        }
        let mut leftovers = Vec::new();
        files_under(dir.path(), &mut leftovers);
        ensure!(
            !leftovers
                .iter()
                .any(|f| f.to_string_lossy().ends_with(".tmp")),
            "temporary files survive a reopen"
        );
        for id in store
            .list(&ns, Kind::Visualization)
            .map_err(|e| e.to_string())?
        {
            ensure!(
                store
                    .get(&ns, Kind::Visualization, &id)
                    .map_err(|e| e.to_string())?
                    .is_some(),
                "{id} listed but unreadable"
            );
        }
    }
    ensure!(acknowledged_total > 0, "no write completed before the kill");
    Ok(format!(
        "{cycles} kills, {checked_total} documents intact, {acknowledged_total} ids acknowledged"
    ))
}
