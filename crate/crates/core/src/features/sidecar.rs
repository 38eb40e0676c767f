//! Client for the transformer embedding sidecar.
//!
//! Wire format: one JSON object per line over TCP.
//!
//! ```text
//! -> {"type":"hello","version":1}
//! <- {"type":"hello","version":1,"dim":768,"model":"bert-base-uncased"}
//! -> {"type":"embed","requests":[{"id":"0","text":"sort name"}]}
//! <- {"type":"embeddings","responses":[{"id":"0","vector":[...]}],"rejected":[]}
//! ```
//!
//! Any request may instead be answered with `{"type":"error","message":..}`.
//! Ids listed in `rejected` (oversized batch) are resent in smaller batches.
//! The bare line `PING` is answered with `PONG`.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::embed::{Embedder, EmbeddingVector};
use crate::error::{Error, Result};
use crate::preprocess::TokenSequence;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ClientFrame {
    Hello { version: u32 },
    Embed { requests: Vec<EmbedRequest> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ServerFrame {
    Hello {
        version: u32,
        dim: usize,
        model: String,
    },
    Embeddings {
        responses: Vec<EmbedResponse>,
        #[serde(default)]
        rejected: Vec<String>,
    },
    Error {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedRequest {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub id: String,
    pub vector: Vec<f64>,
}

struct Connection {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Connection {
    fn send_line(&mut self, line: &str) -> std::io::Result<()> {
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()
    }

    fn read_line(&mut self) -> std::io::Result<String> {
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 {
            return Err(std::io::Error::new(
                std::io::ErrorKind::UnexpectedEof,
                "sidecar closed the connection",
            ));
        }
        Ok(line.trim_end().to_string())
    }
}

/// Vectors keyed by request id.
type Received = HashMap<String, Vec<f64>>;

pub struct SidecarEmbedder {
    addr: String,
    dim: usize,
    model: String,
    batch_size: usize,
    conn: Mutex<Connection>,
}

impl std::fmt::Debug for SidecarEmbedder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SidecarEmbedder")
            .field("addr", &self.addr)
            .field("dim", &self.dim)
            .field("model", &self.model)
            .finish()
    }
}

impl SidecarEmbedder {
    /// Connects and performs the handshake.
    pub fn connect(addr: &str) -> Result<Self> {
        let unavailable = |e: std::io::Error| Error::BackendUnavailable {
            endpoint: addr.to_string(),
            reason: e.to_string(),
        };
        let stream = TcpStream::connect(addr).map_err(unavailable)?;
        stream
            .set_read_timeout(Some(Duration::from_secs(300)))
            .map_err(unavailable)?;
        let mut conn = Connection {
            reader: BufReader::new(stream.try_clone().map_err(unavailable)?),
            writer: stream,
        };
        let hello = serde_json::to_string(&ClientFrame::Hello {
            version: PROTOCOL_VERSION,
        })
        .expect("hello frame serializes");
        conn.send_line(&hello).map_err(unavailable)?;
        let reply = conn.read_line().map_err(unavailable)?;
        match parse_frame(&reply)? {
            ServerFrame::Hello { version, dim, model } => {
                if version != PROTOCOL_VERSION {
                    return Err(Error::Protocol(format!(
                        "sidecar speaks version {version}, expected {PROTOCOL_VERSION}"
                    )));
                }
                if dim == 0 {
                    return Err(Error::Protocol("sidecar announced dimension 0".into()));
                }
                Ok(SidecarEmbedder {
                    addr: addr.to_string(),
                    dim,
                    model,
                    batch_size: 32,
                    conn: Mutex::new(conn),
                })
            }
            ServerFrame::Error { message } => Err(Error::Protocol(format!("handshake rejected: {message}"))),
            other => Err(Error::Protocol(format!("unexpected handshake reply {other:?}"))),
        }
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    /// Health check.
    pub fn ping(&self) -> Result<()> {
        let mut conn = self.conn.lock().expect("sidecar connection poisoned");
        conn.send_line("PING").map_err(|e| self.unavailable(e))?;
        match conn.read_line().map_err(|e| self.unavailable(e))?.as_str() {
            "PONG" => Ok(()),
            other => Err(Error::Protocol(format!("expected PONG, got {other:?}"))),
        }
    }

    fn unavailable(&self, e: std::io::Error) -> Error {
        Error::BackendUnavailable {
            endpoint: self.addr.clone(),
            reason: e.to_string(),
        }
    }

    /// One round trip. Returns the vectors received and the ids rejected.
    fn round_trip(&self, conn: &mut Connection, requests: Vec<EmbedRequest>) -> Result<(Received, Vec<String>)> {
        let expected: std::collections::HashSet<String> = requests.iter().map(|r| r.id.clone()).collect();
        let frame = serde_json::to_string(&ClientFrame::Embed { requests }).expect("embed frame serializes");
        conn.send_line(&frame).map_err(|e| self.unavailable(e))?;
        let reply = conn.read_line().map_err(|e| self.unavailable(e))?;
        match parse_frame(&reply)? {
            ServerFrame::Embeddings { responses, rejected } => {
                let mut got = HashMap::new();
                for r in responses {
                    if !expected.contains(&r.id) {
                        return Err(Error::Protocol(format!("unknown response id {}", r.id)));
                    }
                    if r.vector.len() != self.dim {
                        return Err(Error::Protocol(format!(
                            "vector for {} has dimension {}, handshake announced {}",
                            r.id,
                            r.vector.len(),
                            self.dim
                        )));
                    }
                    if r.vector.iter().any(|x| !x.is_finite()) {
                        return Err(Error::Protocol(format!("non-finite vector for {}", r.id)));
                    }
                    if got.insert(r.id.clone(), r.vector).is_some() {
                        return Err(Error::Protocol(format!("duplicate response id {}", r.id)));
                    }
                }
                for id in &rejected {
                    if got.contains_key(id) || !expected.contains(id) {
                        return Err(Error::Protocol(format!("inconsistent rejection of id {id}")));
                    }
                }
                if got.len() + rejected.len() != expected.len() {
                    return Err(Error::Protocol("sidecar dropped request ids".into()));
                }
                Ok((got, rejected))
            }
            ServerFrame::Error { message } => Err(Error::Protocol(message)),
            other => Err(Error::Protocol(format!("unexpected reply {other:?}"))),
        }
    }
}

fn parse_frame(line: &str) -> Result<ServerFrame> {
    serde_json::from_str(line).map_err(|e| Error::Protocol(format!("bad frame {line:?}: {e}")))
}

impl Embedder for SidecarEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn identity(&self) -> String {
        format!("sidecar:{}/{}", self.model, self.dim)
    }

    fn embed_batch(&self, docs: &[TokenSequence]) -> Result<Vec<EmbeddingVector>> {
        let mut conn = self.conn.lock().expect("sidecar connection poisoned");
        let mut vectors: Vec<Option<Vec<f64>>> = vec![None; docs.len()];
        let mut pending: Vec<usize> = (0..docs.len()).collect();
        let mut batch_size = self.batch_size;
        while !pending.is_empty() {
            let mut still_pending = Vec::new();
            for chunk in pending.chunks(batch_size) {
                let requests = chunk
                    .iter()
                    .map(|&i| EmbedRequest {
                        id: i.to_string(),
                        text: docs[i].joined(),
                    })
                    .collect();
                let (got, rejected) = self.round_trip(&mut conn, requests)?;
                for (id, v) in got {
                    let i: usize = id.parse().expect("ids are indices we generated");
                    vectors[i] = Some(v);
                }
                if rejected.len() == chunk.len() && chunk.len() == 1 {
                    return Err(Error::Protocol(format!(
                        "sidecar rejected single-item batch {}",
                        chunk[0]
                    )));
                }
                still_pending.extend(rejected.iter().map(|id| id.parse::<usize>().unwrap()));
            }
            if !still_pending.is_empty() {
                batch_size = (batch_size / 2).max(1);
            }
            still_pending.sort_unstable();
            pending = still_pending;
        }
        Ok(vectors
            .into_iter()
            .map(|v| EmbeddingVector(v.expect("every id answered")))
            .collect())
    }
}
