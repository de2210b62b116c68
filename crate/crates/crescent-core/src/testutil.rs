//! Shared helpers for unit tests: a canned-response HTTP stub server.

use std::io::{Read, Write};
use std::net::TcpListener;

/// Serves `connections` requests on a fresh local port, answering the i-th
/// connection with the i-th (status, body) pair and repeating the last pair
/// once the list runs out. Returns the base URL (`http://addr/v1`).
pub fn stub_server(responses: Vec<(u16, String)>, connections: usize) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for i in 0..connections {
            let (mut stream, _) = match listener.accept() {
                Ok(s) => s,
                Err(_) => return,
            };
            let mut buf = Vec::new();
            let mut byte = [0u8; 1];
            while !buf.ends_with(b"\r\n\r\n") {
                match stream.read(&mut byte) {
                    Ok(1) => buf.push(byte[0]),
                    _ => break,
                }
            }
            let header_text = String::from_utf8_lossy(&buf).to_lowercase();
            if let Some(pos) = header_text.find("content-length:") {
                let rest = &header_text[pos + "content-length:".len()..];
                let len: usize = rest.lines().next().unwrap_or("0").trim().parse().unwrap_or(0);
                let mut body = vec![0u8; len];
                let _ = stream.read_exact(&mut body);
            }
            let (status, body) = responses.get(i).unwrap_or_else(|| responses.last().unwrap());
            let reason = match *status {
                200 => "OK",
                401 => "Unauthorized",
                429 => "Too Many Requests",
                500 => "Internal Server Error",
                _ => "Status",
            };
            let resp = format!(
                "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            let _ = stream.write_all(resp.as_bytes());
            let _ = stream.flush();
        }
    });
    format!("http://{addr}/v1")
}

/// Chat-completions response body with one choice per text.
pub fn chat_body(texts: &[&str]) -> String {
    let choices: Vec<serde_json::Value> = texts
        .iter()
        .map(|t| serde_json::json!({"message": {"role": "assistant", "content": t}}))
        .collect();
    serde_json::json!({ "choices": choices }).to_string()
}

/// Embeddings response body with one vector per entry, echoing indices.
pub fn embed_body(vectors: &[Vec<f32>]) -> String {
    let data: Vec<serde_json::Value> = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| serde_json::json!({"index": i, "embedding": v}))
        .collect();
    serde_json::json!({ "data": data }).to_string()
}
