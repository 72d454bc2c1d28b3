use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::configuration::Configuration;
use crate::error::{ensure, Error, Result};
use crate::geometry::Point;

/// First eight bytes of every event-log file.
pub const EVENT_MAGIC: &[u8; 8] = b"GLBEVT01";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Death = 0,
    Birth = 1,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub location: Point,
    /// Particle count after the event.
    pub count: u32,
}

/// A recorded trajectory.
///
/// Binary layout, little endian: magic, `u32` dim, `u64` seed, `u32` length and
/// UTF-8 JSON parameters, `u32` initial count and its points as `dim` f64 each,
/// then one record per event: `f64` time, `u8` kind, `dim` f64 location, `u32` count.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub dim: usize,
    pub seed: u64,
    /// JSON snapshot of the model and run parameters.
    pub params: String,
    pub t_end: f64,
    pub initial: Configuration,
    pub final_state: Configuration,
    pub events: Vec<Event>,
}

impl EventLog {
    pub fn new(dim: usize, seed: u64, params: String) -> Self {
        EventLog {
            dim,
            seed,
            params,
            t_end: 0.0,
            initial: Configuration::empty(),
            final_state: Configuration::empty(),
            events: Vec::new(),
        }
    }

    /// Times strictly increase and counts move by one, starting from the initial count.
    pub fn validate(&self) -> Result<()> {
        let mut prev_t = 0.0;
        let mut prev_n = self.initial.len() as i64;
        for (k, e) in self.events.iter().enumerate() {
            ensure(e.time > prev_t || (k == 0 && e.time > 0.0), || {
                format!("event {k}: time does not increase")
            })?;
            let step = match e.kind {
                EventKind::Birth => 1,
                EventKind::Death => -1,
            };
            ensure(e.count as i64 == prev_n + step, || {
                format!("event {k}: count does not change by one")
            })?;
            prev_t = e.time;
            prev_n = e.count as i64;
        }
        Ok(())
    }

    /// Configuration after all events with `time <= t`.
    pub fn state_at(&self, t: f64) -> Result<Configuration> {
        let mut g = self.initial.clone();
        for e in self.events.iter().take_while(|e| e.time <= t) {
            match e.kind {
                EventKind::Birth => g.push(e.location),
                EventKind::Death => g = g.remove(&e.location)?,
            }
        }
        Ok(g)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = header(self.dim, self.seed, &self.params, &self.initial);
        for e in &self.events {
            push_record(&mut out, e);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic)?;
        if &magic != EVENT_MAGIC {
            return Err(Error::Config("not an event log (bad magic)".into()));
        }
        let dim = read_u32(&mut r)? as usize;
        ensure((1..=3).contains(&dim), || {
            format!("event log dimension {dim} out of range")
        })?;
        let seed = read_u64(&mut r)?;
        let plen = read_u32(&mut r)? as usize;
        ensure(plen <= r.len(), || "truncated parameter block".into())?;
        let params = String::from_utf8(r[..plen].to_vec()).map_err(|e| Error::Config(e.to_string()))?;
        r = &r[plen..];
        let n0 = read_u32(&mut r)? as usize;
        let mut initial = Configuration::empty();
        for _ in 0..n0 {
            initial.push(read_point(&mut r, dim)?);
        }
        let rec = 8 + 1 + 8 * dim + 4;
        ensure(r.len().is_multiple_of(rec), || "truncated event record".into())?;
        let mut events = Vec::with_capacity(r.len() / rec);
        while !r.is_empty() {
            let time = read_f64(&mut r)?;
            let mut k = [0u8; 1];
            read_exact(&mut r, &mut k)?;
            let kind = match k[0] {
                0 => EventKind::Death,
                1 => EventKind::Birth,
                other => return Err(Error::Config(format!("unknown event kind {other}"))),
            };
            let location = read_point(&mut r, dim)?;
            let count = read_u32(&mut r)?;
            events.push(Event {
                time,
                kind,
                location,
                count,
            });
        }
        let t_end = serde_json::from_str::<serde_json::Value>(&params)
            .ok()
            .and_then(|v| v["options"]["t_end"].as_f64())
            .unwrap_or_else(|| events.last().map_or(0.0, |e| e.time));
        let mut log = EventLog {
            dim,
            seed,
            params,
            t_end,
            initial,
            final_state: Configuration::empty(),
            events,
        };
        log.final_state = log.state_at(f64::INFINITY)?;
        Ok(log)
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        crate::report::write_atomic(path, &self.to_bytes())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

fn header(dim: usize, seed: u64, params: &str, initial: &Configuration) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(EVENT_MAGIC);
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    out.extend_from_slice(&seed.to_le_bytes());
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    out.extend_from_slice(params.as_bytes());
    out.extend_from_slice(&(initial.len() as u32).to_le_bytes());
    for p in initial.points() {
        for c in p.coords() {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    out
}

fn push_record(out: &mut Vec<u8>, e: &Event) {
    out.extend_from_slice(&e.time.to_le_bytes());
    out.push(e.kind as u8);
    for c in e.location.coords() {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out.extend_from_slice(&e.count.to_le_bytes());
}

fn read_exact(r: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Config("unexpected end of event log".into()))
}

fn read_u32(r: &mut &[u8]) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut &[u8]) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut &[u8]) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

fn read_point(r: &mut &[u8], dim: usize) -> Result<Point> {
    let mut c = [0.0; 3];
    for x in c.iter_mut().take(dim) {
        *x = read_f64(r)?;
    }
    Ok(Point::new(&c[..dim]))
}

/// Streams events to an append-only file in the [`EventLog`] layout.
pub struct EventWriter {
    path: PathBuf,
    out: BufWriter<File>,
    scratch: Vec<u8>,
    written: u64,
}

impl EventWriter {
    pub fn create(path: &Path, dim: usize, seed: u64, params: &str, initial: &Configuration) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        out.write_all(&header(dim, seed, params, initial))
            .map_err(|e| Error::io(path, e))?;
        Ok(EventWriter {
            path: path.to_path_buf(),
            out,
            scratch: Vec::with_capacity(64),
            written: 0,
        })
    }

    pub fn write(&mut self, e: &Event) -> Result<()> {
        self.scratch.clear();
        push_record(&mut self.scratch, e);
        self.written += 1;
        self.out
            .write_all(&self.scratch)
            .map_err(|err| Error::io(&self.path, err))
    }

    pub fn written(&self) -> u64 {
        self.written
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))?;
        self.out.get_ref().sync_all().map_err(|e| Error::io(&self.path, e))
    }
}
