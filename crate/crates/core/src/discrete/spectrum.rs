use std::collections::BTreeMap;

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{GeneratorMatrix, LatticeModel};
use crate::error::{Error, Result};

/// Largest connected component handled by the dense symmetric eigensolver.
pub const DENSE_LIMIT: usize = 2048;

const LANCZOS_SEED: u64 = 0x5eed_1a2c;
const LANCZOS_MAX_STEPS: usize = 400;
const LANCZOS_TOL: f64 = 1e-12;
const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenMethod {
    Dense,
    Lanczos,
}

/// Spectrum of `-Q` in `l^2(w)` plus whatever certificates were attached.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    /// Ascending. All eigenvalues for dense solves, the lowest Ritz values otherwise.
    pub eigenvalues: Vec<f64>,
    /// Smallest nonzero eigenvalue over all components.
    pub gap: f64,
    pub method: EigenMethod,
    pub state_count: usize,
    pub components: usize,
    /// Per-component gaps, in order of the lowest state index.
    pub component_gaps: Vec<f64>,
    /// `|| S sqrt(w) ||` for the stationary vector.
    pub stationarity_residual: f64,
    pub max_balance_violation: f64,
    pub certified_c: Option<f64>,
    pub bound_c: Option<f64>,
    pub residuals: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl GapReport {
    /// `(index, eigenvalue)` rows for CSV output.
    pub fn eigenvalue_rows(&self) -> Vec<Vec<f64>> {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &e)| vec![i as f64, e])
            .collect()
    }
}

/// Symmetric `S = D^{1/2} (-Q) D^{-1/2}` in sparse row form.
struct SymOp {
    diag: Vec<f64>,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SymOp {
    fn new(g: &GeneratorMatrix, states: &[usize]) -> Self {
        let mut local = vec![usize::MAX; g.state_count()];
        for (k, &p) in states.iter().enumerate() {
            local[p] = k;
        }
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut diag = Vec::with_capacity(states.len());
        for &p in states {
            diag.push(g.out_rate(p));
            for (q, rate) in g.row(p) {
                cols.push(local[q]);
                vals.push(-g.symmetric_entry(p, q, rate));
            }
            offsets.push(cols.len());
        }
        SymOp {
            diag,
            offsets,
            cols,
            vals,
        }
    }

    fn len(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for k in 0..self.len() {
            let mut s = self.diag[k] * x[k];
            for e in self.offsets[k]..self.offsets[k + 1] {
                s += self.vals[e] * x[self.cols[e]];
            }
            y[k] = s;
        }
    }

    fn dense(&self) -> Mat<f64> {
        let n = self.len();
        let mut m = Mat::<f64>::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = self.diag[k];
            for e in self.offsets[k]..self.offsets[k + 1] {
                m[(k, self.cols[e])] += self.vals[e];
            }
        }
        m
    }

    fn norm_bound(&self) -> f64 {
        (0..self.len())
            .map(|k| {
                self.diag[k]
                    + self.vals[self.offsets[k]..self.offsets[k + 1]]
                        .iter()
                        .map(|v| v.abs())
                        .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Exact spectrum of the lattice chain restricted to the support of `w`.
pub fn spectral_gap_exact(model: &LatticeModel) -> Result<GapReport> {
    let g = model.generator()?;
    let comps = components(&g);
    let w = model.weights();
    let mut eigenvalues = Vec::new();
    let mut component_gaps = Vec::new();
    let mut warnings = Vec::new();
    let mut method = EigenMethod::Dense;
    let mut stationarity: f64 = 0.0;
    for states in &comps {
        let op = SymOp::new(&g, states);
        let root: Vec<f64> = {
            let s: Vec<f64> = states.iter().map(|&p| w[p].sqrt()).collect();
            let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
            s.into_iter().map(|x| x / norm).collect()
        };
        let mut y = vec![0.0; op.len()];
        op.apply(&root, &mut y);
        stationarity = stationarity.max(y.iter().map(|x| x * x).sum::<f64>().sqrt());
        let eig = if op.len() <= DENSE_LIMIT {
            let vals = op
                .dense()
                .self_adjoint_eigenvalues(Side::Lower)
                .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
            let zeros = vals
                .iter()
                .filter(|v| v.abs() <= ZERO_TOL * (1.0 + op.norm_bound()))
                .count();
            if zeros != 1 {
                warnings.push(format!("component of {} states has {zeros} zero eigenvalues", op.len()));
            }
            vals
        } else {
            method = EigenMethod::Lanczos;
            let mut vals = lanczos_lowest(&op, &root)?;
            vals.insert(0, 0.0);
            vals
        };
        if op.len() > 1 {
            component_gaps.push(eig[1]);
        }
        eigenvalues.extend(eig);
    }
    if comps.len() > 1 {
        warnings.push(format!(
            "support splits into {} communicating classes; gap is the minimum over classes",
            comps.len()
        ));
    }
    eigenvalues.sort_by(f64::total_cmp);
    let gap = component_gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    if let Some(&lo) = eigenvalues.first() {
        if lo < -1e-10 * (1.0 + eigenvalues.last().unwrap().abs()) {
            warnings.push(format!("negative eigenvalue {lo:e}"));
        }
    }
    Ok(GapReport {
        eigenvalues,
        gap,
        method,
        state_count: model.state_count(),
        components: comps.len(),
        component_gaps,
        stationarity_residual: stationarity,
        max_balance_violation: g.max_balance_violation(),
        certified_c: None,
        bound_c: None,
        residuals: BTreeMap::new(),
        warnings,
    })
}

fn components(g: &GeneratorMatrix) -> Vec<Vec<usize>> {
    let n = g.state_count();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut k = 0;
        while k < comp.len() {
            let p = comp[k];
            k += 1;
            for (q, _) in g.row(p) {
                if !seen[q] {
                    seen[q] = true;
                    comp.push(q);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Lowest eigenvalues of `S` on the complement of the stationary vector.
///
/// Lanczos with full reorthogonalization; stops when the smallest Ritz value
/// has residual below `LANCZOS_TOL * ||S||`.
fn lanczos_lowest(op: &SymOp, stationary: &[f64]) -> Result<Vec<f64>> {
    let n = op.len();
    let scale = op.norm_bound().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let project = |v: &mut [f64], basis: &[Vec<f64>]| {
        for _ in 0..2 {
            for q in basis {
                let c = dot(v, q);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
    };
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let mut basis = vec![stationary.to_vec()];
    project(&mut v, &basis);
    let nv = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    basis.push(v);

    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let max_steps = LANCZOS_MAX_STEPS.min(n - 1);
    for step in 0..max_steps {
        let q = basis.last().unwrap().clone();
        op.apply(&q, &mut w);
        let a = dot(&w, &q);
        alpha.push(a);
        project(&mut w, &basis);
        let b = dot(&w, &w).sqrt();
        let k = alpha.len();
        let check = step + 1 == max_steps || b <= LANCZOS_TOL * scale || k.is_multiple_of(10);
        if check {
            let t = Mat::<f64>::from_fn(k, k, |i, j| {
                if i == j {
                    alpha[i]
                } else if i + 1 == j {
                    beta[i]
                } else if j + 1 == i {
                    beta[j]
                } else {
                    0.0
                }
            });
            let evd = t
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
            let s = evd.S().column_vector();
            let u = evd.U();
            let resid = b * u[(k - 1, 0)].abs();
            if resid <= LANCZOS_TOL * scale || b <= LANCZOS_TOL * scale {
                let mut vals = Vec::new();
                for i in 0..k {
                    if b * u[(k - 1, i)].abs() <= 1e-8 * scale {
                        vals.push(s[i]);
                    }
                }
                return Ok(vals);
            }
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w.clone());
    }
    Err(Error::NonConvergent(format!(
        "Lanczos did not converge in {max_steps} steps"
    )))
}
