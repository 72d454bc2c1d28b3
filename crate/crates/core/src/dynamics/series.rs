use std::path::Path;

use serde::Serialize;

use super::{EventKind, EventLog, LatticeTrajectory};
use crate::configuration::Configuration;
use crate::error::{ensure, Error, Result};

/// Observable sampled on a uniform time grid `start + k dt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableSeries {
    pub start: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl ObservableSeries {
    pub fn new(start: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        ensure(dt > 0.0 && dt.is_finite(), || {
            format!("sampling step must be positive, got {dt}")
        })?;
        ensure(values.len() >= 2, || {
            format!("series needs at least 2 samples, got {}", values.len())
        })?;
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(k));
        }
        Ok(ObservableSeries { start, dt, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    pub(crate) fn grid(t0: f64, t_end: f64, dt: f64) -> Result<Vec<f64>> {
        ensure(dt > 0.0, || format!("sampling step must be positive, got {dt}"))?;
        ensure(t_end > t0, || {
            format!("burn-in {t0} leaves nothing of a run of length {t_end}")
        })?;
        let n = ((t_end - t0) / dt).floor() as usize + 1;
        Ok((0..n).map(|k| t0 + k as f64 * dt).collect())
    }

    /// Particle count sampled from an event log after `burn_in`.
    pub fn count_from_log(log: &EventLog, dt: f64, burn_in: f64) -> Result<Self> {
        let times = Self::grid(burn_in, log.t_end, dt)?;
        let mut values = Vec::with_capacity(times.len());
        let mut n = log.initial.len() as f64;
        let mut k = 0;
        for t in &times {
            while k < log.events.len() && log.events[k].time <= *t {
                n = log.events[k].count as f64;
                k += 1;
            }
            values.push(n);
        }
        Self::new(burn_in, dt, values)
    }

    /// A configuration functional sampled by replaying an event log.
    pub fn from_log(log: &EventLog, dt: f64, burn_in: f64, f: &dyn Fn(&Configuration) -> f64) -> Result<Self> {
        let times = Self::grid(burn_in, log.t_end, dt)?;
        let mut g = log.initial.clone();
        let mut values = Vec::with_capacity(times.len());
        let mut k = 0;
        for t in &times {
            while k < log.events.len() && log.events[k].time <= *t {
                let e = &log.events[k];
                match e.kind {
                    EventKind::Birth => g.push(e.location),
                    EventKind::Death => g = g.remove(&e.location)?,
                }
                k += 1;
            }
            values.push(f(&g));
        }
        Self::new(burn_in, dt, values)
    }

    /// A state function sampled along a lattice trajectory.
    pub fn from_lattice(traj: &LatticeTrajectory, dt: f64, burn_in: f64, f: &dyn Fn(usize) -> f64) -> Result<Self> {
        let times = Self::grid(burn_in, traj.t_end, dt)?;
        let mut values = Vec::with_capacity(times.len());
        let mut state = traj.initial;
        let mut k = 0;
        for t in &times {
            while k < traj.times.len() && traj.times[k] <= *t {
                state = traj.states[k];
                k += 1;
            }
            values.push(f(state));
        }
        Self::new(burn_in, dt, values)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows: Vec<Vec<f64>> = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| vec![self.start + k as f64 * self.dt, *v])
            .collect();
        crate::report::write_csv_rows(path, &["time", "value"], &rows)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (line, row) in text.lines().enumerate().skip(1) {
            if row.trim().is_empty() {
                continue;
            }
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|s| s.trim().parse().ok()).ok_or_else(|| Error::Csv {
                    line: line + 1,
                    message: format!("expected `time,value`, got `{row}`"),
                })
            };
            let mut it = row.split(',');
            times.push(parse(it.next())?);
            values.push(parse(it.next())?);
        }
        ensure(times.len() >= 2, || "series needs at least 2 samples".into())?;
        let dt = times[1] - times[0];
        for w in times.windows(2) {
            ensure(((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1.0), || {
                "sample times are not uniform".into()
            })?;
        }
        Self::new(times[0], dt, values)
    }
}
