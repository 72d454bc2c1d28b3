//! Event-driven simulation of the birth-and-death dynamics and gap estimation from trajectories.

mod estimate;
mod events;
mod fenwick;
mod lattice;
mod modes;
mod series;

pub use estimate::{
    estimate_gap_autocorrelation, estimate_gap_min, rayleigh_upper_bound, AutocorrelationOptions, GapEstimate,
    RayleighEstimate,
};
pub use events::{Event, EventKind, EventLog, EventWriter, EVENT_MAGIC};
pub use lattice::{sample_stationary, simulate_lattice, LatticeTrajectory};
pub use modes::{density_modes, DensityMode};
pub use series::ObservableSeries;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::configuration::{Configuration, GibbsSystem};
use crate::error::{ensure, Error, Result};
use crate::geometry::Point;
use crate::operators::Quadrature;
use fenwick::Fenwick;

/// Events between full recomputations of the rate field.
const RESYNC_INTERVAL: u64 = 1 << 16;

/// Run parameters for [`simulate`].
#[derive(Debug, Clone, Serialize)]
pub struct SimulationOptions {
    pub t_end: f64,
    pub seed: u64,
    /// Abort once the particle count exceeds this.
    pub max_particles: usize,
    /// Stop after this many events even if `t_end` is not reached.
    pub max_events: Option<u64>,
}

impl SimulationOptions {
    pub fn new(t_end: f64, seed: u64) -> Self {
        SimulationOptions {
            t_end,
            seed,
            max_particles: 100_000,
            max_events: None,
        }
    }
}

/// Piecewise-constant birth rate field over the cells of a quadrature.
pub struct RateField<'a> {
    sys: &'a GibbsSystem,
    quad: &'a Quadrature,
    /// Finite part of `E(c_i, gamma)`.
    energy: Vec<f64>,
    /// Number of particles at infinite interaction with `c_i`.
    blocked: Vec<u32>,
    tree: Fenwick,
    /// Grid offsets of cells that a particle in a given cell can reach.
    offsets: Vec<[i64; 3]>,
}

impl<'a> RateField<'a> {
    pub fn new(sys: &'a GibbsSystem, quad: &'a Quadrature, gamma: &Configuration) -> Self {
        let n = quad.nodes().len();
        let m = quad.points_per_axis() as i64;
        let d = sys.bx().dim();
        let h = quad.bx().side() / m as f64;
        let range = sys.interaction().range();
        let lo = -(m / 2);
        let hi = lo + m - 1;
        let mut offsets = Vec::new();
        let span = |a: usize| if a < d { lo..=hi } else { 0..=0 };
        for ox in span(0) {
            for oy in span(1) {
                for oz in span(2) {
                    let o = [ox, oy, oz];
                    let gap2: f64 = o[..d]
                        .iter()
                        .map(|&k| ((k.abs() as f64 - 0.5).max(0.0) * h).powi(2))
                        .sum();
                    if range.is_infinite() || gap2 <= range * range {
                        offsets.push(o);
                    }
                }
            }
        }
        let mut field = RateField {
            sys,
            quad,
            energy: vec![0.0; n],
            blocked: vec![0; n],
            tree: Fenwick::new(n),
            offsets,
        };
        field.rebuild(gamma);
        field
    }

    fn neighbours(&self, y: &Point) -> impl Iterator<Item = usize> + '_ {
        let m = self.quad.points_per_axis() as i64;
        let d = self.sys.bx().dim();
        let mut cell = self.quad.cell_of(y);
        let mut base = [0i64; 3];
        for a in (0..d).rev() {
            base[a] = (cell % m as usize) as i64;
            cell /= m as usize;
        }
        self.offsets.iter().map(move |o| {
            (0..d).fold(0usize, |acc, a| {
                acc * m as usize + (base[a] + o[a]).rem_euclid(m) as usize
            })
        })
    }

    fn cell_rate(&self, i: usize) -> f64 {
        if self.blocked[i] > 0 {
            0.0
        } else {
            self.quad.weight() * self.sys.z() * (-self.energy[i]).exp()
        }
    }

    /// Recomputes every cell from scratch.
    pub fn rebuild(&mut self, gamma: &Configuration) {
        self.energy.iter_mut().for_each(|e| *e = 0.0);
        self.blocked.iter_mut().for_each(|b| *b = 0);
        for y in gamma.points() {
            self.shift(y, 1.0, false);
        }
        let rates: Vec<f64> = (0..self.energy.len()).map(|i| self.cell_rate(i)).collect();
        self.tree = Fenwick::from_values(&rates);
    }

    fn shift(&mut self, y: &Point, sign: f64, update_tree: bool) {
        let cells: Vec<usize> = self.neighbours(y).collect();
        for i in cells {
            let before = if update_tree { self.cell_rate(i) } else { 0.0 };
            let p = self.sys.pair(&self.quad.nodes()[i], y);
            if p == f64::INFINITY {
                if sign > 0.0 {
                    self.blocked[i] += 1;
                } else {
                    self.blocked[i] -= 1;
                }
            } else {
                self.energy[i] += sign * p;
            }
            if update_tree {
                let after = self.cell_rate(i);
                self.tree.set(i, after, before);
            }
        }
    }

    pub fn add(&mut self, y: &Point) {
        self.shift(y, 1.0, true);
    }

    pub fn remove(&mut self, y: &Point) {
        self.shift(y, -1.0, true);
    }

    /// Total birth rate `sum_i v r(c_i, gamma)`.
    pub fn total(&self) -> f64 {
        self.tree.total()
    }

    /// Current rate of every cell.
    pub fn rates(&self) -> Vec<f64> {
        (0..self.energy.len()).map(|i| self.cell_rate(i)).collect()
    }

    fn pick(&self, u: f64) -> usize {
        let i = self.tree.find(u * self.tree.total());
        if self.cell_rate(i) > 0.0 {
            return i;
        }
        let rates = self.rates();
        let target = u * rates.iter().sum::<f64>();
        let mut acc = 0.0;
        for (k, r) in rates.iter().enumerate() {
            acc += r;
            if acc > target && *r > 0.0 {
                return k;
            }
        }
        rates.iter().rposition(|&r| r > 0.0).unwrap_or(0)
    }
}

/// Simulates up to `t_end`, passing each event to `sink`.
///
/// Returns the final configuration, the time the run stopped and the number of events.
pub fn simulate_with(
    sys: &GibbsSystem,
    quad: &Quadrature,
    opts: &SimulationOptions,
    gamma0: &Configuration,
    sink: &mut dyn FnMut(&Event) -> Result<()>,
) -> Result<(Configuration, f64, u64)> {
    ensure(opts.t_end > 0.0 && opts.t_end.is_finite(), || {
        format!("t_end must be positive, got {}", opts.t_end)
    })?;
    ensure(quad.bx() == sys.bx(), || {
        "quadrature and system live on different boxes".into()
    })?;
    let d = sys.bx().dim();
    let h = sys.bx().side() / quad.points_per_axis() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut gamma = Configuration::from_points(gamma0.points().iter().map(|p| sys.bx().wrap(p)).collect());
    let mut field = RateField::new(sys, quad, &gamma);
    let mut t = 0.0;
    let mut events = 0u64;
    let mut stop = opts.t_end;
    loop {
        let deaths = gamma.len() as f64;
        let births = field.total();
        if !births.is_finite() {
            return Err(Error::RateOverflow {
                limit: opts.max_particles,
                time: t,
            });
        }
        let total = deaths + births.max(0.0);
        if total <= 0.0 {
            break;
        }
        let dt: f64 = rng.sample::<f64, _>(Exp1) / total;
        if t + dt > opts.t_end {
            break;
        }
        t += dt;
        let u: f64 = rng.gen::<f64>() * total;
        let (kind, location) = if u < deaths {
            let k = (u as usize).min(gamma.len() - 1);
            let x = gamma.swap_remove(k);
            field.remove(&x);
            (EventKind::Death, x)
        } else {
            let cell = field.pick(rng.gen::<f64>());
            let centre = &quad.nodes()[cell];
            let mut c = [0.0; 3];
            for (ca, &x0) in c.iter_mut().zip(centre.coords()) {
                *ca = x0 + (rng.gen::<f64>() - 0.5) * h;
            }
            let x = sys.bx().wrap(&Point::new(&c[..d]));
            field.add(&x);
            gamma.push(x);
            (EventKind::Birth, x)
        };
        events += 1;
        sink(&Event {
            time: t,
            kind,
            location,
            count: gamma.len() as u32,
        })?;
        if gamma.len() > opts.max_particles {
            return Err(Error::RateOverflow {
                limit: opts.max_particles,
                time: t,
            });
        }
        if events.is_multiple_of(RESYNC_INTERVAL) {
            field.rebuild(&gamma);
        }
        if opts.max_events.is_some_and(|m| events >= m) {
            stop = t;
            break;
        }
    }
    Ok((gamma, stop, events))
}

/// Simulates and collects the full event log.
pub fn simulate(
    sys: &GibbsSystem,
    quad: &Quadrature,
    opts: &SimulationOptions,
    gamma0: &Configuration,
) -> Result<EventLog> {
    let mut log = EventLog::new(sys.bx().dim(), opts.seed, snapshot(sys, quad, opts));
    let mut events = Vec::new();
    let (final_state, stop, _) = simulate_with(sys, quad, opts, gamma0, &mut |e| {
        events.push(e.clone());
        Ok(())
    })?;
    log.events = events;
    log.initial = gamma0.clone();
    log.final_state = final_state;
    log.t_end = stop;
    Ok(log)
}

/// JSON description of the run, stored in event-log headers.
pub fn snapshot(sys: &GibbsSystem, quad: &Quadrature, opts: &SimulationOptions) -> String {
    serde_json::json!({
        "z": sys.z(),
        "beta": sys.beta(),
        "dim": sys.bx().dim(),
        "side": sys.bx().side(),
        "points_per_axis": quad.points_per_axis(),
        "potential": format!("{:?}", sys.spec().potential),
        "boundary": sys.spec().boundary,
        "options": opts,
    })
    .to_string()
}

#[cfg(test)]
mod tests;
