use serde::Serialize;

use super::ObservableSeries;
use crate::configuration::{Configuration, GibbsSystem};
use crate::error::{ensure, Error, Result};
use crate::operators::{gamma_plus, ContinuumModel, Quadrature};

/// Settings for [`estimate_gap_autocorrelation`].
#[derive(Debug, Clone, Serialize)]
pub struct AutocorrelationOptions {
    /// Lags whose autocorrelation lies in `[lo, hi]` enter the log-linear fit.
    pub window: (f64, f64),
    /// Blocks for the delete-one jackknife.
    pub blocks: usize,
    /// Largest lag examined, as a fraction of the series length.
    pub max_lag_fraction: f64,
}

impl Default for AutocorrelationOptions {
    fn default() -> Self {
        AutocorrelationOptions {
            window: (0.05, 0.6),
            blocks: 20,
            max_lag_fraction: 0.25,
        }
    }
}

/// Exponential relaxation rate fitted from an autocorrelation function.
#[derive(Debug, Clone, Serialize)]
pub struct GapEstimate {
    pub rate: f64,
    pub std_error: f64,
    /// 95% jackknife interval.
    pub ci_low: f64,
    pub ci_high: f64,
    /// `1 / rate`.
    pub tau: f64,
    /// Decorrelation is faster than the sampling step; `rate` is then a lower bound of order `1/dt`.
    pub resolution_limited: bool,
    /// First and last lag used in the fit.
    pub lags: (usize, usize),
    /// Autocorrelation at lags `0..=lags.1`.
    pub autocorrelation: Vec<f64>,
}

struct BlockSums {
    /// `sums[b][k]`: sum of `x_t x_{t+k}` over `t` in block `b`.
    sums: Vec<Vec<f64>>,
    counts: Vec<Vec<f64>>,
}

impl BlockSums {
    fn new(blocks: usize) -> Self {
        BlockSums {
            sums: vec![Vec::new(); blocks],
            counts: vec![Vec::new(); blocks],
        }
    }

    fn push_lag(&mut self, x: &[f64], k: usize) {
        let b = self.sums.len();
        let n = x.len();
        let size = n.div_ceil(b);
        for blk in 0..b {
            let lo = blk * size;
            let hi = ((blk + 1) * size).min(n.saturating_sub(k));
            let (mut s, mut c) = (0.0, 0.0);
            for t in lo..hi.max(lo) {
                s += x[t] * x[t + k];
                c += 1.0;
            }
            self.sums[blk].push(s);
            self.counts[blk].push(c);
        }
    }

    fn rho(&self, skip: Option<usize>, k: usize) -> f64 {
        let cov = |k: usize| {
            let (mut s, mut c) = (0.0, 0.0);
            for b in 0..self.sums.len() {
                if Some(b) != skip {
                    s += self.sums[b][k];
                    c += self.counts[b][k];
                }
            }
            s / c
        };
        cov(k) / cov(0)
    }
}

/// Negative slope of `ln rho(k)` against `k dt`, with intercept when three or more lags are used.
fn fit(rho: &dyn Fn(usize) -> f64, lags: &[usize], dt: f64) -> f64 {
    let pts: Vec<(f64, f64)> = lags.iter().map(|&k| (k as f64 * dt, rho(k).max(1e-300).ln())).collect();
    if pts.len() < 3 {
        let (t, y) = pts[pts.len() - 1];
        if pts.len() == 1 {
            return -y / t;
        }
        return -(y - pts[0].1) / (t - pts[0].0);
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    -sxy / sxx
}

/// Relaxation rate of a stationary series from its autocorrelation decay.
pub fn estimate_gap_autocorrelation(series: &ObservableSeries, opts: &AutocorrelationOptions) -> Result<GapEstimate> {
    let (lo, hi) = opts.window;
    ensure(0.0 < lo && lo < hi && hi < 1.0, || {
        format!("window must satisfy 0 < lo < hi < 1, got {lo}, {hi}")
    })?;
    ensure(opts.blocks >= 2, || "jackknife needs at least 2 blocks".into())?;
    let mean = series.mean();
    let x: Vec<f64> = series.values.iter().map(|v| v - mean).collect();
    let var = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    let scale = series.values.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    if var <= 1e-300 || var <= 1e-20 * scale {
        return Err(Error::InsufficientMixing("series is constant".into()));
    }
    let max_lag = ((x.len() as f64 * opts.max_lag_fraction) as usize).max(1);
    let mut sums = BlockSums::new(opts.blocks);
    sums.push_lag(&x, 0);
    let mut rho = vec![1.0];
    let mut k = 0;
    while rho[k] >= lo {
        if k + 1 > max_lag {
            return Err(Error::InsufficientMixing(format!(
                "autocorrelation still {:.3} at lag {k} (max lag {max_lag}); insufficient mixing or trend",
                rho[k]
            )));
        }
        k += 1;
        sums.push_lag(&x, k);
        rho.push(sums.rho(None, k));
    }
    let dt = series.dt;
    if k == 1 {
        let r1 = rho[1];
        let rate = if r1 > 0.0 {
            (-r1.ln() / dt).max(1.0 / dt)
        } else {
            1.0 / dt
        };
        return Ok(GapEstimate {
            rate,
            std_error: f64::NAN,
            ci_low: rate,
            ci_high: f64::INFINITY,
            tau: 1.0 / rate,
            resolution_limited: true,
            lags: (1, 1),
            autocorrelation: rho,
        });
    }
    let lags: Vec<usize> = (1..=k).filter(|&j| rho[j] >= lo && rho[j] <= hi).collect();
    let lags = if lags.is_empty() { vec![k - 1] } else { lags };
    let rate = fit(&|j| rho[j], &lags, dt);
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InsufficientMixing(format!(
            "fitted decay rate {rate} is not positive; insufficient mixing or trend"
        )));
    }
    let b = opts.blocks as f64;
    let jack: Vec<f64> = (0..opts.blocks)
        .map(|skip| fit(&|j| sums.rho(Some(skip), j), &lags, dt))
        .collect();
    let jm = jack.iter().sum::<f64>() / b;
    let se = ((b - 1.0) / b * jack.iter().map(|r| (r - jm).powi(2)).sum::<f64>()).sqrt();
    Ok(GapEstimate {
        rate,
        std_error: se,
        ci_low: rate - 1.96 * se,
        ci_high: rate + 1.96 * se,
        tau: 1.0 / rate,
        resolution_limited: false,
        lags: (lags[0], *lags.last().unwrap()),
        autocorrelation: rho,
    })
}

/// Smallest rate over several observables of the same trajectory.
///
/// Each observable decays at the slowest mode it overlaps with, so the minimum
/// is the estimate closest to the gap. Observables that fail to mix are skipped.
pub fn estimate_gap_min(series: &[ObservableSeries], opts: &AutocorrelationOptions) -> Result<GapEstimate> {
    let mut best: Option<GapEstimate> = None;
    let mut last_err = None;
    for s in series {
        match estimate_gap_autocorrelation(s, opts) {
            Ok(e) if best.as_ref().is_none_or(|b| e.rate < b.rate) => best = Some(e),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::InvalidParameter("no series given".into())))
}

/// Variational upper bound `E(F,F) / Var(F)` from stationary samples.
#[derive(Debug, Clone, Serialize)]
pub struct RayleighEstimate {
    pub ratio: f64,
    pub std_error: f64,
    /// Sample mean of `v sum_u r(u) (D_u^+ F)^2`.
    pub dirichlet: f64,
    pub variance: f64,
    pub samples: usize,
}

/// Estimates the Rayleigh quotient of `F` with the Dirichlet form in its birth representation.
pub fn rayleigh_upper_bound(
    sys: &GibbsSystem,
    quad: &Quadrature,
    f: &dyn Fn(&Configuration) -> f64,
    samples: &[Configuration],
) -> Result<RayleighEstimate> {
    ensure(samples.len() >= 2, || "need at least 2 samples".into())?;
    let model = ContinuumModel::new(sys, quad.clone())?;
    let values: Vec<f64> = samples.iter().map(f).collect();
    let forms: Vec<f64> = samples.iter().map(|g| 2.0 * gamma_plus(&model, f, f, g)).collect();
    let n = samples.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sq: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let variance = sq.iter().sum::<f64>() / (n - 1.0);
    let scale = values.iter().map(|v| v * v).sum::<f64>() / n;
    if variance <= 1e-14 * scale.max(1e-300) || variance == 0.0 {
        return Err(Error::DegenerateTrialFunction(variance));
    }
    let dirichlet = forms.iter().sum::<f64>() / n;
    let ratio = dirichlet / variance;
    // delta method for a ratio of means
    let resid: Vec<f64> = forms.iter().zip(&sq).map(|(a, b)| a - ratio * b).collect();
    let rm = resid.iter().sum::<f64>() / n;
    let rv = resid.iter().map(|r| (r - rm).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(RayleighEstimate {
        ratio,
        std_error: (rv / n).sqrt() / variance,
        dirichlet,
        variance,
        samples: samples.len(),
    })
}
