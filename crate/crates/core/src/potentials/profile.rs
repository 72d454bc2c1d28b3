//! Closed-form profile functions `f` used to build potentials of the form
//! `phi = -ln(1 - f)`, and as Mayer-type functions in positivity checks.
//!
//! A profile is a radial envelope times an optional modulation. Every
//! profile provides `1 - f(x)` separately so that `-ln(1 - f)` stays
//! accurate where `f` is close to one.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use super::sampled::SampledFunction;
use crate::error::{ensure, Result};

/// Radial part of a profile, a function of `rho = |x|` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "envelope", rename_all = "kebab-case")]
pub enum Envelope {
    /// `f ≡ 0`.
    Zero,
    /// `exp(-t rho^2)`.
    Gaussian { t: f64 },
    /// `exp(-t rho)`.
    Exponential { t: f64 },
    /// `1 / (1 + sigma^2 rho^2)`.
    Cauchy { sigma: f64 },
    /// `(1 - rho/a)` on `rho <= a`, zero outside. Positive definite in one dimension only.
    Triangle { a: f64 },
    /// `(r/rho)^{n/2} J_{n/2}(r rho)`.
    Bessel { r: f64, n: f64 },
    /// `2^{n/2} Gamma((n+1)/2) / sqrt(pi) * t / (rho^2 + t^2)^{(n+1)/2}`.
    PoissonKernel { t: f64, n: f64 },
    /// `exp(-t rho^4)`. Not positive definite; kept as a probe.
    Quartic { t: f64 },
    /// `1` on `rho <= half_width`, zero outside. Not positive definite.
    Indicator { half_width: f64 },
}

/// Even factor multiplying the envelope.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "modulation", rename_all = "kebab-case")]
pub enum Modulation {
    #[default]
    None,
    /// `cos(a . x)`.
    Cos { a: Vec<f64> },
    /// `prod_j sin(a_j x_j) / (a_j x_j)`.
    Sinc { a: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedProfile {
    #[serde(flatten)]
    pub envelope: Envelope,
    #[serde(flatten, default)]
    pub modulation: Modulation,
}

/// A profile `f`: closed form or grid samples.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Closed(ClosedProfile),
    Sampled(SampledFunction),
}

impl Envelope {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let pos = |name: &str, v: f64| {
            ensure(v.is_finite() && v > 0.0, || {
                format!("{name} must be positive and finite, got {v}")
            })
        };
        match *self {
            Envelope::Zero => Ok(()),
            Envelope::Gaussian { t } | Envelope::Exponential { t } | Envelope::Quartic { t } => pos("t", t),
            Envelope::Cauchy { sigma } => pos("sigma", sigma),
            Envelope::Triangle { a } => {
                pos("a", a)?;
                ensure(dim == 1, || "triangle envelope is one-dimensional".into())
            }
            Envelope::Bessel { r, n } => {
                ensure(r.is_finite() && r >= 0.0, || format!("r must be >= 0, got {r}"))?;
                let bound = 2.0 * dim as f64 - 1.0;
                ensure(n > bound, || format!("bessel envelope needs n > {bound}, got {n}"))
            }
            Envelope::PoissonKernel { t, n } => {
                pos("t", t)?;
                let bound = dim as f64 - 1.0;
                ensure(n > bound, || format!("poisson kernel needs n > {bound}, got {n}"))
            }
            Envelope::Indicator { half_width } => pos("half_width", half_width),
        }
    }

    pub fn eval(&self, rho: f64) -> f64 {
        match *self {
            Envelope::Zero => 0.0,
            Envelope::Gaussian { t } => (-t * rho * rho).exp(),
            Envelope::Exponential { t } => (-t * rho).exp(),
            Envelope::Cauchy { sigma } => 1.0 / (1.0 + sigma * sigma * rho * rho),
            Envelope::Triangle { a } => (1.0 - rho / a).max(0.0),
            Envelope::Bessel { r, n } => bessel_envelope(r, 0.5 * n, rho),
            Envelope::PoissonKernel { t, n } => poisson_constant(n) * t * (rho * rho + t * t).powf(-0.5 * (n + 1.0)),
            Envelope::Quartic { t } => (-t * rho.powi(4)).exp(),
            Envelope::Indicator { half_width } => {
                if rho <= half_width {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `1 - envelope(rho)` without cancellation near the origin.
    pub fn one_minus(&self, rho: f64) -> f64 {
        match *self {
            Envelope::Zero => 1.0,
            Envelope::Gaussian { t } => -(-t * rho * rho).exp_m1(),
            Envelope::Exponential { t } => -(-t * rho).exp_m1(),
            Envelope::Cauchy { sigma } => {
                let s = sigma * sigma * rho * rho;
                s / (1.0 + s)
            }
            Envelope::Triangle { a } => (rho / a).min(1.0),
            Envelope::Bessel { r, n } => bessel_one_minus(r, 0.5 * n, rho),
            Envelope::PoissonKernel { t, n } => {
                let f0 = poisson_constant(n) * t.powf(-n);
                let p = 0.5 * (n + 1.0);
                let tail = -(-p * (rho * rho / (t * t)).ln_1p()).exp_m1();
                (1.0 - f0) + f0 * tail
            }
            Envelope::Quartic { t } => -(-t * rho.powi(4)).exp_m1(),
            Envelope::Indicator { .. } => 1.0 - self.eval(rho),
        }
    }

    /// Radius beyond which `|envelope| < eps`, if known in closed form.
    pub(crate) fn decay_radius(&self, eps: f64) -> Option<f64> {
        match *self {
            Envelope::Zero => Some(0.0),
            Envelope::Gaussian { t } => Some((-eps.ln() / t).sqrt()),
            Envelope::Exponential { t } => Some(-eps.ln() / t),
            Envelope::Quartic { t } => Some((-eps.ln() / t).powf(0.25)),
            Envelope::Triangle { a } => Some(a),
            Envelope::Indicator { half_width } => Some(half_width),
            Envelope::Cauchy { sigma } => Some((1.0 / eps).sqrt() / sigma),
            Envelope::PoissonKernel { t, n } => Some((poisson_constant(n) * t / eps).powf(1.0 / (n + 1.0))),
            // |J_nu(z)| <= sqrt(2/(pi z)) asymptotically
            Envelope::Bessel { r, n } => {
                if r == 0.0 {
                    return Some(0.0);
                }
                let nu = 0.5 * n;
                let c = r.powf(nu) * (2.0 / (std::f64::consts::PI * r)).sqrt();
                Some((c / eps).powf(1.0 / (nu + 0.5)))
            }
        }
    }
}

fn poisson_constant(n: f64) -> f64 {
    2f64.powf(0.5 * n) * gamma(0.5 * (n + 1.0)) / std::f64::consts::PI.sqrt()
}

fn bessel_origin(r: f64, nu: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    (nu * (0.5 * r * r).ln() - ln_gamma(nu + 1.0)).exp()
}

/// Series `sum_k (-u)^k / (k! (nu+1)_k)` and `1 - ` that series, for small `u`.
fn bessel_series(nu: f64, u: f64) -> (f64, f64) {
    let mut term = 1.0;
    let mut rest = 0.0;
    for k in 1..60 {
        term *= -u / (k as f64 * (nu + k as f64));
        rest += term;
        if term.abs() < 1e-18 * rest.abs().max(1e-300) {
            break;
        }
    }
    (1.0 + rest, -rest)
}

fn bessel_envelope(r: f64, nu: f64, rho: f64) -> f64 {
    let c = bessel_origin(r, nu);
    let z = r * rho;
    if z < 2.0 {
        c * bessel_series(nu, 0.25 * z * z).0
    } else {
        let j = if nu.fract() == 0.0 {
            puruspe::bessel::Jn(nu as u32, z)
        } else {
            puruspe::bessel::Jnu_Ynu(nu, z).0
        };
        (r / rho).powf(nu) * j
    }
}

fn bessel_one_minus(r: f64, nu: f64, rho: f64) -> f64 {
    let c = bessel_origin(r, nu);
    let z = r * rho;
    if z < 2.0 {
        (1.0 - c) + c * bessel_series(nu, 0.25 * z * z).1
    } else {
        1.0 - bessel_envelope(r, nu, rho)
    }
}

/// `1 - sin(y)/y`.
fn one_minus_sinc(y: f64) -> f64 {
    if y.abs() < 0.1 {
        let y2 = y * y;
        y2 / 6.0 * (1.0 - y2 / 20.0 * (1.0 - y2 / 42.0 * (1.0 - y2 / 72.0)))
    } else {
        1.0 - y.sin() / y
    }
}

fn sinc(y: f64) -> f64 {
    if y == 0.0 {
        1.0
    } else {
        y.sin() / y
    }
}

impl Modulation {
    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Modulation::None => Ok(()),
            Modulation::Cos { a } | Modulation::Sinc { a } => {
                ensure(a.len() == dim, || {
                    format!("modulation has {} frequencies for dimension {dim}", a.len())
                })?;
                ensure(a.iter().all(|v| v.is_finite()), || "non-finite frequency".into())
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Modulation::None => 1.0,
            Modulation::Cos { a } => dot(a, x).cos(),
            Modulation::Sinc { a } => a.iter().zip(x).map(|(a, x)| sinc(a * x)).product(),
        }
    }

    pub fn one_minus(&self, x: &[f64]) -> f64 {
        match self {
            Modulation::None => 0.0,
            Modulation::Cos { a } => {
                let s = (0.5 * dot(a, x)).sin();
                2.0 * s * s
            }
            // 1 - s1 s2 ... = (1 - s1) + s1 (1 - s2 s3 ...)
            Modulation::Sinc { a } => {
                let mut acc = 0.0;
                let mut prefix = 1.0;
                for (a, x) in a.iter().zip(x) {
                    let y = a * x;
                    acc += prefix * one_minus_sinc(y);
                    prefix *= sinc(y);
                }
                acc
            }
        }
    }
}

fn dot(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(a, x)| a * x).sum()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl ClosedProfile {
    pub fn new(envelope: Envelope, modulation: Modulation) -> Self {
        ClosedProfile { envelope, modulation }
    }

    pub fn plain(envelope: Envelope) -> Self {
        Self::new(envelope, Modulation::None)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        self.envelope.validate(dim)?;
        self.modulation.validate(dim)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.envelope.eval(norm(x)) * self.modulation.eval(x)
    }

    pub fn one_minus(&self, x: &[f64]) -> f64 {
        let m = self.modulation.eval(x);
        self.modulation.one_minus(x) + m * self.envelope.one_minus(norm(x))
    }
}

impl Profile {
    pub fn closed(envelope: Envelope, modulation: Modulation) -> Self {
        Profile::Closed(ClosedProfile::new(envelope, modulation))
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Profile::Closed(c) => c.validate(dim),
            Profile::Sampled(s) => ensure(s.dim() == dim, || {
                format!("sampled profile has dimension {}, expected {dim}", s.dim())
            }),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Profile::Closed(c) => c.eval(x),
            Profile::Sampled(s) => s.interpolate(x),
        }
    }

    pub fn one_minus(&self, x: &[f64]) -> f64 {
        match self {
            Profile::Closed(c) => c.one_minus(x),
            Profile::Sampled(s) => 1.0 - s.interpolate(x),
        }
    }

    pub fn at_origin(&self, dim: usize) -> f64 {
        self.eval(&vec![0.0; dim])
    }

    /// Radius beyond which the profile's envelope is below `eps`, when known.
    pub(crate) fn decay_radius(&self, eps: f64) -> Option<f64> {
        match self {
            Profile::Closed(c) => c.envelope.decay_radius(eps),
            Profile::Sampled(s) => Some(s.half_extent()),
        }
    }
}
