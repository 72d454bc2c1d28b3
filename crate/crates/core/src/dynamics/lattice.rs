use rand::distributions::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::discrete::{GeneratorMatrix, LatticeModel};
use crate::error::{ensure, Result};

/// Jump times and visited states (support positions) of a lattice chain.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeTrajectory {
    pub seed: u64,
    pub initial: usize,
    pub times: Vec<f64>,
    pub states: Vec<usize>,
    pub t_end: f64,
}

impl LatticeTrajectory {
    pub fn events(&self) -> usize {
        self.times.len()
    }

    /// Time-weighted occupation of each cell over `[burn_in, t_end]`.
    pub fn occupation(&self, model: &LatticeModel, burn_in: f64) -> Vec<f64> {
        let mut acc = vec![0.0; model.cell_count()];
        let mut state = self.initial;
        let mut t_prev = burn_in;
        let add = |state: usize, from: f64, to: f64, acc: &mut Vec<f64>| {
            if to > from {
                for (a, &k) in acc.iter_mut().zip(&model.occupancy(state)) {
                    *a += k as f64 * (to - from);
                }
            }
        };
        for (&t, &s) in self.times.iter().zip(&self.states) {
            if t > burn_in {
                add(state, t_prev, t.min(self.t_end), &mut acc);
                t_prev = t;
            }
            state = s;
        }
        add(state, t_prev, self.t_end, &mut acc);
        let span = self.t_end - burn_in;
        acc.iter().map(|a| a / span).collect()
    }
}

/// Draws a support position from the stationary weights.
pub fn sample_stationary(model: &LatticeModel, rng: &mut impl Rng) -> usize {
    let dist = WeightedIndex::new(model.weights()).expect("weights are positive and sum to one");
    dist.sample(rng)
}

/// Gillespie simulation of the lattice generator for time `t_end` or `max_events` jumps.
pub fn simulate_lattice(
    gen: &GeneratorMatrix,
    start: usize,
    t_end: f64,
    max_events: Option<usize>,
    seed: u64,
) -> Result<LatticeTrajectory> {
    ensure(start < gen.state_count(), || {
        format!("start state {start} outside the support")
    })?;
    ensure(t_end > 0.0, || format!("t_end must be positive, got {t_end}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = start;
    let mut t = 0.0;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut stop = t_end;
    loop {
        let total = gen.out_rate(p);
        if total <= 0.0 {
            break;
        }
        let dt: f64 = Exp1.sample(&mut rng);
        t += dt / total;
        if t > t_end {
            break;
        }
        let u = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut next = None;
        for (q, rate) in gen.row(p) {
            acc += rate;
            next = Some(q);
            if acc > u {
                break;
            }
        }
        p = next.expect("positive out-rate implies a transition");
        times.push(t);
        states.push(p);
        if max_events.is_some_and(|m| times.len() >= m) {
            stop = t;
            break;
        }
    }
    Ok(LatticeTrajectory {
        seed,
        initial: start,
        times,
        states,
        t_end: stop,
    })
}
