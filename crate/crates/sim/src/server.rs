//! Environment server for external trainers.
//!
//! Every frame is a 4-byte big-endian length followed by that many bytes
//! of UTF-8 JSON. Requests carry a `cmd` field:
//!
//! | request | reply |
//! |---|---|
//! | `{"cmd":"handshake","version":1}` | `{"ok":true,"version":1,"layout":{..}}` |
//! | `{"cmd":"reset","seed":S}` | `{"ok":true,"obs":[[..]..],"info":{..}}` |
//! | `{"cmd":"step","actions":[[..]..]}` | `{"ok":true,"obs":..,"reward":R,"terminated":B,"truncated":B,"info":{..}}` |
//! | `{"cmd":"close"}` | `{"ok":true}` |
//!
//! Failures reply `{"ok":false,"error":"..."}` and keep the connection
//! open. `obs` holds one flat vector per actor (a single joint vector for
//! `ctce`); under `ctde` replies also carry a `critic` vector. The server
//! talks to one client at a time and returns after a `close`.

use std::io::{self, Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};

use anyhow::{anyhow, Result};
use imagine_core::env::paradigm::{actor_dims, critic_len, ParadigmObservation};
use imagine_core::{Env, EnvConfig, Paradigm, StepResult};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::metrics::MetricsWriter;
use crate::runner::EpisodeTally;

pub const PROTOCOL_VERSION: u32 = 1;
/// Frames larger than this are rejected.
pub const MAX_FRAME_BYTES: u32 = 64 << 20;

pub fn read_frame(stream: &mut impl Read) -> io::Result<Option<Vec<u8>>> {
    let mut len = [0u8; 4];
    match stream.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let len = u32::from_be_bytes(len);
    if len > MAX_FRAME_BYTES {
        return Err(io::Error::new(io::ErrorKind::InvalidData, format!("frame of {len} bytes is too large")));
    }
    let mut buf = vec![0u8; len as usize];
    stream.read_exact(&mut buf)?;
    Ok(Some(buf))
}

pub fn write_frame(stream: &mut impl Write, payload: &[u8]) -> io::Result<()> {
    let len = u32::try_from(payload.len())
        .ok()
        .filter(|&n| n <= MAX_FRAME_BYTES)
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "frame too large"))?;
    stream.write_all(&len.to_be_bytes())?;
    stream.write_all(payload)?;
    stream.flush()
}

#[derive(Debug, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case", deny_unknown_fields)]
enum Request {
    Handshake { version: u32 },
    Reset { seed: u64 },
    Step { actions: Vec<Vec<f64>> },
    Close,
}

/// The layout descriptor sent in the handshake reply.
pub fn layout_descriptor(config: &EnvConfig) -> Value {
    let layout = config.layout();
    let (obs_dim, action_dim) = actor_dims(config.paradigm, layout.len(), config.action_variant, config.n_agents);
    let actors = if config.paradigm == Paradigm::Ctce { 1 } else { config.n_agents };
    let blocks: Vec<Value> = layout.blocks.iter().map(|(name, len)| json!({"name": name, "len": len})).collect();
    json!({
        "paradigm": config.paradigm.name(),
        "n_agents": config.n_agents,
        "actors": actors,
        "obs_dim": obs_dim,
        "agent_obs_blocks": blocks,
        "action_variant": config.action_variant.name(),
        "action_dim": action_dim,
        "critic_dim": if config.paradigm == Paradigm::Ctde { Some(critic_len(config.n_agents)) } else { None },
        "episode_steps": config.episode_steps,
        "ego_window": config.ego_window,
        "ray_count": config.lidar.ray_count,
    })
}

fn obs_fields(reply: &mut serde_json::Map<String, Value>, po: ParadigmObservation) {
    reply.insert("obs".into(), json!(po.actors));
    if let Some(c) = po.critic {
        reply.insert("critic".into(), json!(c));
    }
}

fn step_info(r: &StepResult, tally: &EpisodeTally) -> Value {
    let i = &r.info;
    json!({
        "step": i.step,
        "level_id": i.level_id,
        "coverage": i.coverage,
        "team_known": i.team_known,
        "cells_discovered_self": i.cells_discovered_self,
        "cells_from_collaboration": i.cells_from_collaboration,
        "bytes_sent": {"lidar": i.bytes_lidar, "map": i.bytes_map},
        "events_dropped": i.events_dropped,
        "collisions": i.collisions,
        "collided": i.collided,
        "known_monotone": i.known_monotone,
        "curriculum_counter": tally.curriculum_counter,
        "curriculum_advanced": i.curriculum_advanced,
        "reward_sum": tally.reward_sum,
    })
}

fn error_reply(message: impl Into<String>) -> Value {
    json!({"ok": false, "error": message.into()})
}

struct Session<'a> {
    env: Env,
    handshaken: bool,
    episode: u64,
    tally: Option<EpisodeTally>,
    metrics: Option<&'a mut MetricsWriter>,
}

enum Outcome {
    Reply(Value),
    Close,
}

impl Session<'_> {
    fn handle(&mut self, frame: &[u8]) -> Outcome {
        let request: Request = match serde_json::from_slice(frame) {
            Ok(r) => r,
            Err(e) => return Outcome::Reply(error_reply(format!("bad request: {e}"))),
        };
        match request {
            Request::Handshake { version } => {
                if version != PROTOCOL_VERSION {
                    return Outcome::Reply(error_reply(format!(
                        "protocol version {version} not supported (server speaks {PROTOCOL_VERSION})"
                    )));
                }
                self.handshaken = true;
                Outcome::Reply(json!({
                    "ok": true,
                    "version": PROTOCOL_VERSION,
                    "layout": layout_descriptor(self.env.config()),
                }))
            }
            _ if !self.handshaken => Outcome::Reply(error_reply("handshake required")),
            Request::Reset { seed } => match self.env.reset(seed) {
                Ok(_) => {
                    if self.tally.is_some() {
                        self.episode += 1;
                    }
                    let tally = EpisodeTally::start(self.episode, &self.env);
                    let mut reply = serde_json::Map::new();
                    reply.insert("ok".into(), json!(true));
                    obs_fields(&mut reply, self.env.paradigm_observation());
                    reply.insert(
                        "info".into(),
                        json!({"coverage": tally.coverage, "level_id": tally.level_id, "episode": self.episode}),
                    );
                    self.tally = Some(tally);
                    Outcome::Reply(Value::Object(reply))
                }
                Err(e) => Outcome::Reply(error_reply(e.to_string())),
            },
            Request::Step { actions } => {
                let Some(tally) = self.tally.as_mut() else {
                    return Outcome::Reply(error_reply("step before reset"));
                };
                let r = match self.env.step_raw(&actions) {
                    Ok(r) => r,
                    Err(e) => return Outcome::Reply(error_reply(e.to_string())),
                };
                tally.add(&r);
                if let Some(m) = self.metrics.as_deref_mut() {
                    let _ = m.write(&tally.step_record());
                    if r.terminated || r.truncated {
                        let _ = m.write(&tally.summary());
                        let _ = m.flush();
                    }
                }
                let mut reply = serde_json::Map::new();
                reply.insert("ok".into(), json!(true));
                obs_fields(&mut reply, self.env.paradigm_observation());
                reply.insert("reward".into(), json!(r.reward));
                reply.insert("terminated".into(), json!(r.terminated));
                reply.insert("truncated".into(), json!(r.truncated));
                reply.insert("info".into(), step_info(&r, tally));
                Outcome::Reply(Value::Object(reply))
            }
            Request::Close => Outcome::Close,
        }
    }
}

/// Serves clients one at a time until one sends `close`. A client that
/// disconnects without `close` frees the server for the next connection.
pub fn serve(listener: TcpListener, config: EnvConfig, mut metrics: Option<&mut MetricsWriter>) -> Result<()> {
    let mut env = Some(Env::new(config).map_err(|e| anyhow!("{e}"))?);
    for stream in listener.incoming() {
        let mut stream = stream?;
        stream.set_nodelay(true)?;
        let mut session = Session {
            env: env.take().expect("env returned after each session"),
            handshaken: false,
            episode: 0,
            tally: None,
            metrics: metrics.as_deref_mut(),
        };
        let closed = serve_client(&mut stream, &mut session);
        env = Some(session.env);
        match closed {
            Ok(true) => return Ok(()),
            Ok(false) => continue,
            Err(e) if matches!(e.kind(), io::ErrorKind::ConnectionReset | io::ErrorKind::BrokenPipe) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

/// Returns `Ok(true)` when the client asked to close.
fn serve_client(stream: &mut TcpStream, session: &mut Session) -> io::Result<bool> {
    while let Some(frame) = read_frame(stream)? {
        match session.handle(&frame) {
            Outcome::Reply(v) => write_frame(stream, &serde_json::to_vec(&v)?)?,
            Outcome::Close => {
                write_frame(stream, br#"{"ok":true}"#)?;
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Minimal blocking client, mainly for tests and scripting.
pub struct Client {
    stream: TcpStream,
}

impl Client {
    pub fn connect(addr: impl ToSocketAddrs) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(Self { stream })
    }

    pub fn request(&mut self, message: &Value) -> io::Result<Value> {
        self.request_raw(&serde_json::to_vec(message)?)
    }

    pub fn request_raw(&mut self, payload: &[u8]) -> io::Result<Value> {
        write_frame(&mut self.stream, payload)?;
        let frame = read_frame(&mut self.stream)?
            .ok_or_else(|| io::Error::new(io::ErrorKind::UnexpectedEof, "server closed the connection"))?;
        Ok(serde_json::from_slice(&frame)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_round_trip() {
        let mut buf = Vec::new();
        write_frame(&mut buf, b"{\"cmd\":\"close\"}").unwrap();
        assert_eq!(&buf[..4], &[0, 0, 0, 15]);
        let mut r = &buf[..];
        assert_eq!(read_frame(&mut r).unwrap().unwrap(), b"{\"cmd\":\"close\"}");
        assert_eq!(read_frame(&mut r).unwrap(), None);
    }

    #[test]
    fn oversized_frame_rejected() {
        let mut r = &(MAX_FRAME_BYTES + 1).to_be_bytes()[..];
        assert_eq!(read_frame(&mut r).unwrap_err().kind(), io::ErrorKind::InvalidData);
    }

    #[test]
    fn layout_for_ctde() {
        let cfg = EnvConfig { n_agents: 2, paradigm: Paradigm::Ctde, ego_window: 8, ..Default::default() };
        let l = layout_descriptor(&cfg);
        assert_eq!(l["obs_dim"], 64 + 36 + 6);
        assert_eq!(l["actors"], 2);
        assert_eq!(l["action_dim"], 2);
        assert_eq!(l["critic_dim"], 13);
    }

    #[test]
    fn session_rules_without_sockets() {
        let mut s = Session {
            env: Env::new(EnvConfig { episode_steps: 2, ..Default::default() }).unwrap(),
            handshaken: false,
            episode: 0,
            tally: None,
            metrics: None,
        };
        let reply = |s: &mut Session, text: &str| match s.handle(text.as_bytes()) {
            Outcome::Reply(v) => v,
            Outcome::Close => json!("close"),
        };
        assert_eq!(reply(&mut s, r#"{"cmd":"reset","seed":1}"#)["error"], "handshake required");
        assert_eq!(reply(&mut s, r#"{"cmd":"handshake","version":2}"#)["ok"], false);
        assert_eq!(reply(&mut s, r#"{"cmd":"handshake","version":1}"#)["ok"], true);
        assert_eq!(reply(&mut s, r#"{"cmd":"step","actions":[[0,0]]}"#)["error"], "step before reset");
        assert!(reply(&mut s, r#"{"cmd":"fly"}"#)["error"].as_str().unwrap().starts_with("bad request"));
        assert!(reply(&mut s, "not json")["error"].as_str().unwrap().starts_with("bad request"));
        assert_eq!(reply(&mut s, r#"{"cmd":"reset","seed":1}"#)["ok"], true);
        assert_eq!(reply(&mut s, r#"{"cmd":"step","actions":[[0,0,0]]}"#)["ok"], false);
        let r = reply(&mut s, r#"{"cmd":"step","actions":[[0.5,0]]}"#);
        assert_eq!(r["truncated"], false);
        let r = reply(&mut s, r#"{"cmd":"step","actions":[[0.5,0]]}"#);
        assert_eq!(r["truncated"], true);
        assert_eq!(r["info"]["step"], 2);
        assert!(reply(&mut s, r#"{"cmd":"step","actions":[[0.5,0]]}"#)["error"].as_str().unwrap().contains("reset"));
        assert_eq!(reply(&mut s, r#"{"cmd":"close"}"#), json!("close"));
    }
}
