//! Exactly enumerated lattice analogue of the continuum Gibbs system.
//!
//! The box is split into `m^d` cells of volume `v`; each cell holds at most
//! `K` particles. Weights are `prod_i (z v)^{n_i} / n_i! * exp(-U(n))`.

mod certificate;
mod identities;
mod spectrum;

use serde::Serialize;

pub use certificate::{coercivity_constant_certificate, gap_vs_bounds, CertificateReport, StateSelection};
pub use identities::{coercivity_identity_residual, gnz_residual, CoercivityResiduals};
pub use spectrum::{spectral_gap_exact, EigenMethod, GapReport, DENSE_LIMIT};

use crate::configuration::{Configuration, GibbsSystem};
use crate::error::{ensure, Error, Result};
use crate::geometry::{Point, TorusBox};
use crate::operators::{BirthDeath, Quadrature};

/// Default cap on the number of enumerated states.
pub const DEFAULT_STATE_LIMIT: u128 = 1 << 20;

/// Enumerated finite-volume Gibbs system on a cell lattice.
#[derive(Debug, Clone)]
pub struct LatticeModel {
    bx: TorusBox,
    m: usize,
    cells: Vec<Point>,
    v: f64,
    cap: usize,
    z: f64,
    /// `Phi_ij = beta phi(c_i - c_j)`, row-major.
    table: Vec<f64>,
    nodes: Vec<usize>,
    /// Full mixed-radix index of each state with positive weight.
    support: Vec<u32>,
    /// Inverse of `support`; `u32::MAX` for zero-weight states.
    position: Vec<u32>,
    weights: Vec<f64>,
    log_z: f64,
}

impl LatticeModel {
    /// Builds the model from a Gibbs system, using cell centres of an `m^d` grid.
    pub fn new(sys: &GibbsSystem, m: usize, cap: usize) -> Result<Self> {
        Self::with_limit(sys, m, cap, DEFAULT_STATE_LIMIT)
    }

    pub fn with_limit(sys: &GibbsSystem, m: usize, cap: usize, limit: u128) -> Result<Self> {
        Self::from_table(*sys.bx(), m, cap, sys.z(), pair_table(sys, m)?, limit)
    }

    /// Builds the model from an explicit interaction table (already multiplied by `beta`).
    pub fn from_table(bx: TorusBox, m: usize, cap: usize, z: f64, table: Vec<f64>, limit: u128) -> Result<Self> {
        ensure((1..255).contains(&cap), || format!("cap must be in 1..255, got {cap}"))?;
        ensure(z > 0.0 && z.is_finite(), || {
            format!("activity must be positive, got {z}")
        })?;
        let cells = cell_centres(&bx, m)?;
        let n = cells.len();
        ensure(table.len() == n * n, || format!("table must have {} entries", n * n))?;
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (table[i * n + j], table[j * n + i]);
                ensure(!a.is_nan() && a > f64::NEG_INFINITY, || {
                    "table entries must be > -inf".into()
                })?;
                ensure(a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs()), || {
                    format!("table is not symmetric at ({i}, {j})")
                })?;
            }
        }
        let required = (cap as u128 + 1).checked_pow(n as u32).unwrap_or(u128::MAX);
        if required > limit {
            return Err(Error::StateSpaceOverflow { required, limit });
        }
        let total = required as usize;
        let v = (bx.side() / m as f64).powi(bx.dim() as i32);
        let ln_zv = (z * v).ln();
        let ln_fact: Vec<f64> = (0..=cap)
            .scan(0.0, |acc, k| {
                if k > 0 {
                    *acc += (k as f64).ln();
                }
                Some(*acc)
            })
            .collect();

        let mut support = Vec::new();
        let mut position = vec![u32::MAX; total];
        let mut log_w = Vec::new();
        let mut occ = vec![0u8; n];
        for full in 0..total {
            decode(full, cap, &mut occ);
            let u = pair_energy(&table, n, &occ);
            if u == f64::INFINITY {
                continue;
            }
            let mut lw = -u;
            for &k in &occ {
                lw += k as f64 * ln_zv - ln_fact[k as usize];
            }
            position[full] = support.len() as u32;
            support.push(full as u32);
            log_w.push(lw);
        }
        let max_lw = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = log_w.iter().map(|l| (l - max_lw).exp()).sum();
        let log_z = max_lw + sum.ln();
        let weights = log_w.iter().map(|l| (l - log_z).exp()).collect();
        Ok(LatticeModel {
            bx,
            m,
            cells,
            v,
            cap,
            z,
            table,
            nodes: (0..n).collect(),
            support,
            position,
            weights,
            log_z,
        })
    }

    pub fn bx(&self) -> &TorusBox {
        &self.bx
    }

    pub fn points_per_axis(&self) -> usize {
        self.m
    }

    pub fn cells(&self) -> &[Point] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_volume(&self) -> f64 {
        self.v
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// `Phi_ij`.
    pub fn phi(&self, i: usize, j: usize) -> f64 {
        self.table[i * self.cells.len() + j]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Number of states in the full occupancy space, including zero-weight ones.
    pub fn full_state_count(&self) -> usize {
        self.position.len()
    }

    /// Number of states with positive weight.
    pub fn state_count(&self) -> usize {
        self.support.len()
    }

    /// Normalized weights over the support.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ln` of the normalizing constant relative to the empty state.
    pub fn log_partition(&self) -> f64 {
        self.log_z
    }

    /// Occupancy vector of the `p`-th supported state.
    pub fn occupancy(&self, p: usize) -> Vec<u8> {
        let mut occ = vec![0u8; self.cells.len()];
        decode(self.support[p] as usize, self.cap, &mut occ);
        occ
    }

    /// Cell centres of the `p`-th supported state, repeated by occupancy.
    pub fn configuration(&self, p: usize) -> Configuration {
        let mut g = Configuration::empty();
        for (i, &k) in self.occupancy(p).iter().enumerate() {
            for _ in 0..k {
                g.push(self.cells[i]);
            }
        }
        g
    }

    /// A configuration functional evaluated on every supported state.
    pub fn values_of(&self, f: &dyn Fn(&Configuration) -> f64) -> Vec<f64> {
        (0..self.state_count()).map(|p| f(&self.configuration(p))).collect()
    }

    /// Support position of an occupancy vector, if it has positive weight.
    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        let base = self.cap + 1;
        let mut full = 0usize;
        for &k in occ.iter().rev() {
            if k as usize > self.cap {
                return None;
            }
            full = full * base + k as usize;
        }
        match self.position[full] {
            u32::MAX => None,
            p => Some(p as usize),
        }
    }

    /// `E_i(n) = sum_j n_j Phi_ij`.
    pub fn local_energy(&self, occ: &[u8], i: usize) -> f64 {
        let n = self.cells.len();
        let row = &self.table[i * n..(i + 1) * n];
        let mut e = 0.0;
        for (j, &k) in occ.iter().enumerate() {
            if k > 0 {
                e += k as f64 * row[j];
                if e == f64::INFINITY {
                    return e;
                }
            }
        }
        e
    }

    /// `z exp(-E_i(n))` without the occupancy cap.
    pub fn raw_intensity(&self, occ: &[u8], i: usize) -> f64 {
        let e = self.local_energy(occ, i);
        if e == f64::INFINITY {
            0.0
        } else {
            self.z * (-e).exp()
        }
    }

    /// Birth intensity `r_i(n)`: zero when cell `i` is full.
    pub fn intensity(&self, occ: &[u8], i: usize) -> f64 {
        if occ[i] as usize >= self.cap {
            0.0
        } else {
            self.raw_intensity(occ, i)
        }
    }

    /// State function from values over the support; zero outside it.
    pub fn state_fn<'a>(&'a self, values: &'a [f64]) -> impl Fn(&Vec<u8>) -> f64 + 'a {
        move |occ: &Vec<u8>| self.index_of(occ).map_or(0.0, |p| values[p])
    }

    /// Generator with death rate `n_i` and birth rate `v r_i(n)`.
    pub fn generator(&self) -> Result<GeneratorMatrix> {
        GeneratorMatrix::new(self)
    }

    /// Per-cell density `E[n_i] / v`, the GNZ form `z E[exp(-E_i)]`, and the
    /// capped GNZ form `E[r_i]`, which equals the density exactly.
    pub fn rho1(&self) -> Rho1 {
        rho1_exact(self)
    }
}

/// `Phi_ij = beta phi_T(c_i - c_j)` over the cell centres, row-major.
pub fn pair_table(sys: &GibbsSystem, m: usize) -> Result<Vec<f64>> {
    let cells = cell_centres(sys.bx(), m)?;
    let n = cells.len();
    let mut table = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            table[i * n + j] = sys.pair(&cells[i], &cells[j]);
        }
    }
    Ok(table)
}

/// Centres of the `m^d` cells, in the same order as the quadrature nodes.
pub fn cell_centres(bx: &TorusBox, m: usize) -> Result<Vec<Point>> {
    if m == 1 {
        let h = 0.5 * bx.side();
        return Ok(vec![Point::new(&[h, h, h][..bx.dim()])]);
    }
    Ok(Quadrature::new(*bx, m)?.nodes().to_vec())
}

fn decode(mut full: usize, cap: usize, occ: &mut [u8]) {
    let base = cap + 1;
    for o in occ.iter_mut() {
        *o = (full % base) as u8;
        full /= base;
    }
}

fn pair_energy(table: &[f64], n: usize, occ: &[u8]) -> f64 {
    let mut u = 0.0;
    for i in 0..n {
        let ni = occ[i] as f64;
        if ni == 0.0 {
            continue;
        }
        if occ[i] > 1 {
            u += table[i * n + i] * ni * (ni - 1.0) / 2.0;
        }
        for j in i + 1..n {
            if occ[j] > 0 {
                u += ni * occ[j] as f64 * table[i * n + j];
            }
        }
        if u == f64::INFINITY {
            return u;
        }
    }
    u
}

impl BirthDeath for LatticeModel {
    type State = Vec<u8>;
    type Site = usize;

    fn deaths(&self, s: &Vec<u8>) -> Vec<(usize, f64)> {
        s.iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| (i, k as f64))
            .collect()
    }

    fn remove(&self, s: &Vec<u8>, x: &usize) -> Vec<u8> {
        let mut t = s.clone();
        t[*x] -= 1;
        t
    }

    fn add(&self, s: &Vec<u8>, x: &usize) -> Vec<u8> {
        let mut t = s.clone();
        t[*x] = t[*x].saturating_add(1);
        t
    }

    fn intensity(&self, s: &Vec<u8>, x: &usize) -> f64 {
        self.intensity(s, *x)
    }

    fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    fn node_weight(&self) -> f64 {
        self.v
    }
}

/// Sparse generator over the support, stored by rows.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    offsets: Vec<usize>,
    cols: Vec<u32>,
    rates: Vec<f64>,
    /// Total outgoing rate per state.
    out_rate: Vec<f64>,
    max_balance_violation: f64,
}

/// Relative detailed-balance violation that aborts construction.
pub const BALANCE_TOLERANCE: f64 = 1e-10;

impl GeneratorMatrix {
    fn new(model: &LatticeModel) -> Result<Self> {
        let ns = model.state_count();
        let mut offsets = Vec::with_capacity(ns + 1);
        let mut cols = Vec::new();
        let mut rates = Vec::new();
        let mut out_rate = Vec::with_capacity(ns);
        offsets.push(0);
        for p in 0..ns {
            let occ = model.occupancy(p);
            let mut total = 0.0;
            let mut scratch = occ.clone();
            for i in 0..occ.len() {
                if occ[i] > 0 {
                    scratch[i] -= 1;
                    let q = model.index_of(&scratch).expect("removal keeps positive weight");
                    scratch[i] += 1;
                    cols.push(q as u32);
                    rates.push(occ[i] as f64);
                    total += occ[i] as f64;
                }
                let r = model.intensity(&occ, i);
                if r > 0.0 {
                    scratch[i] += 1;
                    if let Some(q) = model.index_of(&scratch) {
                        let rate = model.v * r;
                        cols.push(q as u32);
                        rates.push(rate);
                        total += rate;
                    }
                    scratch[i] -= 1;
                }
            }
            out_rate.push(total);
            offsets.push(cols.len());
        }
        let mut g = GeneratorMatrix {
            offsets,
            cols,
            rates,
            out_rate,
            max_balance_violation: 0.0,
        };
        let w = model.weights();
        let mut worst: f64 = 0.0;
        for p in 0..ns {
            for (q, rate) in g.row(p) {
                let back = g.rate(q, p);
                let (a, b) = (w[p] * rate, w[q] * back);
                worst = worst.max((a - b).abs() / a.max(b));
            }
        }
        g.max_balance_violation = worst;
        if worst > BALANCE_TOLERANCE {
            return Err(Error::DetailedBalance(worst));
        }
        Ok(g)
    }

    pub fn state_count(&self) -> usize {
        self.out_rate.len()
    }

    /// Off-diagonal entries `(target, rate)` of row `p`.
    pub fn row(&self, p: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.offsets[p], self.offsets[p + 1]);
        self.cols[a..b]
            .iter()
            .map(|&c| c as usize)
            .zip(self.rates[a..b].iter().copied())
    }

    /// `Q(p, q)` for `p != q`.
    pub fn rate(&self, p: usize, q: usize) -> f64 {
        self.row(p).filter(|&(c, _)| c == q).map(|(_, r)| r).sum()
    }

    pub fn out_rate(&self, p: usize) -> f64 {
        self.out_rate[p]
    }

    /// Largest relative `|w(n)Q(n,n') - w(n')Q(n',n)| / max(..)` seen at construction.
    pub fn max_balance_violation(&self) -> f64 {
        self.max_balance_violation
    }

    /// `(QF)(p) = sum_q Q(p, q) (F(q) - F(p))`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.state_count())
            .map(|p| self.row(p).map(|(q, r)| r * (f[q] - f[p])).sum())
            .collect()
    }

    pub(crate) fn symmetric_entry(&self, p: usize, q: usize, rate_pq: f64) -> f64 {
        (rate_pq * self.rate(q, p)).sqrt()
    }
}

/// First correlation function on the lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rho1 {
    /// `E[n_i] / v`.
    pub density: Vec<f64>,
    /// `z E[exp(-E_i(n))]`.
    pub gnz: Vec<f64>,
    /// `E[r_i(n)]` with the occupancy cap.
    pub gnz_capped: Vec<f64>,
}

impl Rho1 {
    pub fn max_gnz(&self) -> f64 {
        self.gnz.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest `|density - gnz_capped|` relative to the density.
    pub fn capped_mismatch(&self) -> f64 {
        self.density
            .iter()
            .zip(&self.gnz_capped)
            .map(|(a, b)| (a - b).abs() / a.abs().max(1e-300))
            .fold(0.0, f64::max)
    }
}

/// See [`LatticeModel::rho1`].
pub fn rho1_exact(model: &LatticeModel) -> Rho1 {
    let n = model.cell_count();
    let mut dens = vec![0.0; n];
    let mut gnz = vec![0.0; n];
    let mut capped = vec![0.0; n];
    for (p, &w) in model.weights().iter().enumerate() {
        let occ = model.occupancy(p);
        for i in 0..n {
            dens[i] += w * occ[i] as f64;
            let raw = model.raw_intensity(&occ, i);
            gnz[i] += w * raw;
            if (occ[i] as usize) < model.cap() {
                capped[i] += w * raw;
            }
        }
    }
    for d in dens.iter_mut() {
        *d /= model.cell_volume();
    }
    Rho1 {
        density: dens,
        gnz,
        gnz_capped: capped,
    }
}
