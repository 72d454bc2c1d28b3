//! Pair potentials, including the class `phi = -ln(1 - f)` built from a
//! positive definite profile `f`, and numerical certificates for them.

pub mod checks;
pub mod periodic;
pub mod profile;
pub mod sampled;

use serde::{Deserialize, Serialize};

pub use checks::{
    beta_family_check, check_positive_definite, check_regularity, check_stability_numeric, growth_at_origin, ht_bound,
    ht_integral, pair_energy, CheckKind, CheckReport, RadialQuadrature, Witness,
};
pub use periodic::{PeriodizedProfile, DEFAULT_TAPER};
pub use profile::{ClosedProfile, Envelope, Modulation, Profile};
pub use sampled::SampledFunction;

use crate::error::{ensure, Error, Result};

/// Values below this magnitude are treated as zero when locating the cutoff.
pub const CUTOFF_EPS: f64 = 1e-10;
const CUTOFF_SCAN_MAX: f64 = 1.0e3;

/// Closed-form potentials given directly (not through a profile).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum ExplicitForm {
    /// `height` on `|x| <= radius`, zero outside.
    SquareWell { height: f64, radius: f64 },
    /// `amplitude * exp(-t |x|^2)`.
    Gaussian { amplitude: f64, t: f64 },
    /// `strength / |x|^power`, infinite at the origin.
    InversePower { strength: f64, power: f64 },
}

impl ExplicitForm {
    fn validate(&self) -> Result<()> {
        match *self {
            ExplicitForm::SquareWell { height, radius } => {
                ensure(height.is_finite(), || "square well height must be finite".into())?;
                ensure(radius > 0.0 && radius.is_finite(), || {
                    format!("square well radius must be positive, got {radius}")
                })
            }
            ExplicitForm::Gaussian { amplitude, t } => {
                ensure(amplitude.is_finite(), || "amplitude must be finite".into())?;
                ensure(t > 0.0 && t.is_finite(), || format!("t must be positive, got {t}"))
            }
            ExplicitForm::InversePower { strength, power } => {
                ensure(strength >= 0.0 && strength.is_finite(), || {
                    "inverse power strength must be >= 0 (an attractive singularity is unbounded below)".into()
                })?;
                ensure(power > 0.0 && power.is_finite(), || {
                    format!("power must be positive, got {power}")
                })
            }
        }
    }

    fn eval(&self, rho: f64) -> f64 {
        match *self {
            ExplicitForm::SquareWell { height, radius } => {
                if rho <= radius {
                    height
                } else {
                    0.0
                }
            }
            ExplicitForm::Gaussian { amplitude, t } => amplitude * (-t * rho * rho).exp(),
            ExplicitForm::InversePower { strength, power } => {
                if strength == 0.0 {
                    0.0
                } else if rho == 0.0 {
                    f64::INFINITY
                } else {
                    strength / rho.powf(power)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Zero,
    /// `phi = -ln(1 - f)`; `certified` records that `f` passed the profile checks
    /// of [`PairPotential::special_class`].
    SpecialClass {
        profile: Profile,
        certified: bool,
    },
    Explicit(ExplicitForm),
    Sum(Vec<PairPotential>),
    /// `factor * inner`, used for inverse temperature.
    Scaled {
        factor: f64,
        inner: Box<PairPotential>,
    },
}

/// A symmetric pair interaction `phi: R^d -> (-inf, +inf]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPotential {
    kind: PotentialKind,
    dim: usize,
    cutoff: f64,
    lower_bound: f64,
}

impl PairPotential {
    fn finish(kind: PotentialKind, dim: usize) -> Result<Self> {
        ensure((1..=3).contains(&dim), || format!("dimension {dim} outside 1..=3"))?;
        let mut p = PairPotential {
            kind,
            dim,
            cutoff: f64::INFINITY,
            lower_bound: 0.0,
        };
        let (cutoff, lower) = p.scan();
        p.cutoff = cutoff;
        p.lower_bound = lower;
        ensure(p.lower_bound > f64::NEG_INFINITY, || {
            "potential is unbounded below".into()
        })?;
        Ok(p)
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::finish(PotentialKind::Zero, dim)
    }

    pub fn explicit(form: ExplicitForm, dim: usize) -> Result<Self> {
        form.validate()?;
        Self::finish(PotentialKind::Explicit(form), dim)
    }

    /// Builds `phi = -ln(1 - f)` after checking `f(0) <= 1` and `|f(x)| <= f(0)` on a
    /// radial sample grid.
    pub fn special_class(profile: Profile, dim: usize) -> Result<Self> {
        profile.validate(dim)?;
        let f0 = profile.at_origin(dim);
        if f0 > 1.0 {
            return Err(Error::NotPositiveDefinite(format!("f(0) = {f0} exceeds 1")));
        }
        let reach = profile.decay_radius(CUTOFF_EPS).unwrap_or(50.0).min(CUTOFF_SCAN_MAX);
        for rho in radial_grid(reach.max(1.0)) {
            for dir in directions(dim) {
                let x: Vec<f64> = dir.iter().map(|d| d * rho).collect();
                let v = profile.eval(&x);
                if v.abs() > f0 + 1e-12 {
                    return Err(Error::NotPositiveDefinite(format!(
                        "|f({x:?})| = {} exceeds f(0) = {f0}",
                        v.abs()
                    )));
                }
            }
        }
        Self::finish(
            PotentialKind::SpecialClass {
                profile,
                certified: true,
            },
            dim,
        )
    }

    /// `phi = -ln(1 - f)` without any check on `f`. Only for probes.
    pub fn log_transform_unchecked(profile: Profile, dim: usize) -> Result<Self> {
        profile.validate(dim)?;
        Self::finish(
            PotentialKind::SpecialClass {
                profile,
                certified: false,
            },
            dim,
        )
    }

    pub fn sum(parts: Vec<PairPotential>) -> Result<Self> {
        ensure(!parts.is_empty(), || "sum of zero potentials".into())?;
        let dim = parts[0].dim;
        ensure(parts.iter().all(|p| p.dim == dim), || {
            "summands differ in dimension".into()
        })?;
        Self::finish(PotentialKind::Sum(parts), dim)
    }

    /// `beta * phi`.
    pub fn scaled(&self, beta: f64) -> Result<Self> {
        ensure(beta > 0.0 && beta.is_finite(), || {
            format!("scale must be positive, got {beta}")
        })?;
        if beta == 1.0 {
            return Ok(self.clone());
        }
        Ok(PairPotential {
            kind: PotentialKind::Scaled {
                factor: beta,
                inner: Box::new(self.clone()),
            },
            dim: self.dim,
            cutoff: self.cutoff,
            lower_bound: beta * self.lower_bound,
        })
    }

    /// Overrides the automatically detected truncation radius.
    pub fn with_cutoff(mut self, cutoff: f64) -> Result<Self> {
        ensure(cutoff > 0.0, || format!("cutoff must be positive, got {cutoff}"))?;
        self.cutoff = cutoff;
        Ok(self)
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            PotentialKind::Zero => true,
            PotentialKind::Sum(parts) => parts.iter().all(|p| p.is_zero()),
            PotentialKind::Scaled { inner, .. } => inner.is_zero(),
            PotentialKind::SpecialClass { profile, .. } => {
                matches!(profile, Profile::Closed(c) if c.envelope == Envelope::Zero)
            }
            PotentialKind::Explicit(_) => false,
        }
    }

    /// `true` for `-ln(1 - f)` potentials whose profile passed construction checks.
    pub fn is_special_class(&self) -> bool {
        matches!(self.kind, PotentialKind::SpecialClass { certified: true, .. })
    }

    /// The profile `f` of a special-class potential.
    pub fn profile(&self) -> Option<&Profile> {
        match &self.kind {
            PotentialKind::SpecialClass { profile, .. } => Some(profile),
            _ => None,
        }
    }

    /// `phi(x)`, possibly `+inf`. Ignores the cutoff.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::SpecialClass { profile, .. } => {
                let f = profile.eval(x);
                if f < 0.5 {
                    return -(-f).ln_1p();
                }
                let one_minus = profile.one_minus(x);
                if one_minus <= 0.0 {
                    f64::INFINITY
                } else {
                    -one_minus.ln()
                }
            }
            PotentialKind::Explicit(form) => form.eval(norm(x)),
            PotentialKind::Sum(parts) => parts.iter().map(|p| p.eval(x)).sum(),
            PotentialKind::Scaled { factor, inner } => factor * inner.eval(x),
        }
    }

    /// `phi(x)` with interactions beyond the cutoff set to zero.
    pub fn eval_truncated(&self, x: &[f64]) -> f64 {
        if norm(x) > self.cutoff {
            0.0
        } else {
            self.eval(x)
        }
    }

    /// `1 - exp(-phi(x))`, exact for special-class potentials.
    pub fn mayer(&self, x: &[f64]) -> f64 {
        match &self.kind {
            PotentialKind::SpecialClass { profile, .. } => profile.eval(x).min(1.0),
            _ => -(-self.eval(x)).exp_m1(),
        }
    }

    /// `sup_{|x| = rho} |phi(x)|` over a fixed direction set.
    pub fn radial_sup_abs(&self, rho: f64) -> f64 {
        directions(self.dim)
            .iter()
            .map(|d| {
                let x: Vec<f64> = d.iter().map(|c| c * rho).collect();
                self.eval(&x).abs()
            })
            .fold(0.0, f64::max)
    }

    fn radial_inf(&self, rho: f64) -> f64 {
        directions(self.dim)
            .iter()
            .map(|d| {
                let x: Vec<f64> = d.iter().map(|c| c * rho).collect();
                self.eval(&x)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Cutoff radius and sampled lower bound.
    fn scan(&self) -> (f64, f64) {
        let grid = radial_grid(CUTOFF_SCAN_MAX);
        let mut last_significant = None;
        let mut lower = f64::INFINITY;
        for (i, &rho) in grid.iter().enumerate() {
            if self.radial_sup_abs(rho) >= CUTOFF_EPS {
                last_significant = Some(i);
            }
            lower = lower.min(self.radial_inf(rho));
        }
        let cutoff = match last_significant {
            None => grid[1],
            Some(i) if i + 1 >= grid.len() => f64::INFINITY,
            Some(i) => grid[i + 1],
        };
        if cutoff.is_finite() {
            lower = lower.min(0.0);
        }
        (cutoff, lower)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Radii `0 = r_0 < r_1 < ... <= rmax`, step 0.005 up to 2, then growing by 0.25%.
pub(crate) fn radial_grid(rmax: f64) -> Vec<f64> {
    let mut g = vec![0.0];
    let mut r = 0.0;
    while r < rmax {
        r += if r < 2.0 { 0.005 } else { 0.0025 * r };
        g.push(r.min(rmax));
    }
    g
}

/// Unit directions probing `sup_{|x| = rho}`: axes, diagonals, and a ring in 2-d.
pub(crate) fn directions(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..32)
            .map(|k| {
                let th = std::f64::consts::PI * k as f64 / 32.0;
                vec![th.cos(), th.sin()]
            })
            .chain((0..32).map(|k| {
                let th = std::f64::consts::PI * (1.0 + k as f64 / 32.0);
                vec![th.cos(), th.sin()]
            }))
            .collect(),
        _ => {
            let mut dirs = Vec::new();
            for a in -1i32..=1 {
                for b in -1i32..=1 {
                    for c in -1i32..=1 {
                        if a == 0 && b == 0 && c == 0 {
                            continue;
                        }
                        let v = [a as f64, b as f64, c as f64];
                        let n = norm(&v);
                        dirs.push(v.iter().map(|x| x / n).collect());
                    }
                }
            }
            dirs
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss_cos(t: f64, a: f64) -> Profile {
        Profile::closed(Envelope::Gaussian { t }, Modulation::Cos { a: vec![a] })
    }

    #[test]
    fn zero_potential_everywhere_zero() {
        let p = PairPotential::zero(2).unwrap();
        assert_eq!(p.eval(&[0.3, -1.0]), 0.0);
        assert_eq!(p.eval(&[0.0, 0.0]), 0.0);
        assert!(p.is_zero());
    }

    #[test]
    fn special_class_origin_is_infinite() {
        let p = PairPotential::special_class(gauss_cos(1.0, 0.0), 1).unwrap();
        assert_eq!(p.eval(&[0.0]), f64::INFINITY);
        assert_eq!(p.mayer(&[0.0]), 1.0);
    }

    #[test]
    fn special_class_value_at_one() {
        // -ln(1 - e^{-1}), independently: 0.45867514538708193
        let p = PairPotential::special_class(gauss_cos(1.0, 0.0), 1).unwrap();
        assert!((p.eval(&[1.0]) - 0.458_675_145_387_081_9).abs() < 1e-15);
        assert_eq!(p.eval(&[1.0]), p.eval(&[-1.0]));
    }

    #[test]
    fn zero_profile_gives_zero_potential() {
        let p = PairPotential::special_class(Profile::closed(Envelope::Zero, Modulation::None), 1).unwrap();
        for x in [0.0, 0.5, 3.0] {
            assert_eq!(p.eval(&[x]), 0.0);
        }
        assert!(p.is_zero());
    }

    #[test]
    fn negative_where_cosine_negative() {
        let prof = Profile::closed(Envelope::Exponential { t: 1.0 }, Modulation::Cos { a: vec![3.0] });
        let p = PairPotential::special_class(prof, 1).unwrap();
        // cos(3x) < 0 at x = 0.7
        assert!(p.eval(&[0.7]) < 0.0);
        assert!(p.lower_bound() < 0.0);
        assert!(p.lower_bound() > -std::f64::consts::LN_2);
    }

    #[test]
    fn rejects_profiles_violating_bounds() {
        let big = Profile::closed(Envelope::Bessel { r: 3.0, n: 2.0 }, Modulation::None);
        assert!(matches!(
            PairPotential::special_class(big, 1),
            Err(Error::NotPositiveDefinite(_))
        ));
        let bad_t = Profile::closed(Envelope::Gaussian { t: -1.0 }, Modulation::None);
        assert!(PairPotential::special_class(bad_t, 1).is_err());
    }

    #[test]
    fn mayer_function_inverts_the_log() {
        let p = PairPotential::special_class(gauss_cos(0.5, 2.0), 1).unwrap();
        let f = p.profile().unwrap().clone();
        for i in 1..400 {
            let x = i as f64 * 0.02;
            let fx = f.eval(&[x]);
            if fx < 1.0 - 1e-9 {
                let back = -(-p.eval(&[x])).exp_m1();
                assert!((back - fx).abs() <= 1e-12 * fx.abs().max(1e-300) + 1e-300, "x = {x}");
            }
        }
    }

    #[test]
    fn cutoff_detection() {
        let p = PairPotential::special_class(gauss_cos(1.0, 2.0), 1).unwrap();
        // |phi| ~ e^{-x^2} < 1e-10 beyond sqrt(ln 1e10) ~ 4.8
        assert!(p.cutoff() > 4.5 && p.cutoff() < 5.0, "cutoff {}", p.cutoff());
        let ip = PairPotential::explicit(
            ExplicitForm::InversePower {
                strength: 1.0,
                power: 1.0,
            },
            1,
        )
        .unwrap();
        assert!(ip.cutoff().is_infinite());
        let sw = PairPotential::explicit(
            ExplicitForm::SquareWell {
                height: 1.0,
                radius: 1.0,
            },
            1,
        )
        .unwrap();
        assert!(sw.cutoff() > 1.0 && sw.cutoff() < 1.01);
    }

    #[test]
    fn sums_absorb_infinity() {
        let a = PairPotential::special_class(gauss_cos(1.0, 0.0), 1).unwrap();
        let b = PairPotential::explicit(
            ExplicitForm::Gaussian {
                amplitude: -0.5,
                t: 1.0,
            },
            1,
        )
        .unwrap();
        let s = PairPotential::sum(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(s.eval(&[0.0]), f64::INFINITY);
        assert!((s.eval(&[0.8]) - (a.eval(&[0.8]) + b.eval(&[0.8]))).abs() < 1e-15);
    }

    #[test]
    fn scaling() {
        let a = PairPotential::special_class(gauss_cos(1.0, 0.0), 1).unwrap();
        let s = a.scaled(0.25).unwrap();
        assert!((s.eval(&[1.0]) - 0.25 * a.eval(&[1.0])).abs() < 1e-16);
        assert!(a.scaled(0.0).is_err());
    }

    #[test]
    fn symmetric_in_two_dimensions() {
        let prof = Profile::closed(Envelope::Gaussian { t: 1.0 }, Modulation::Cos { a: vec![1.0, 2.0] });
        let p = PairPotential::special_class(prof, 2).unwrap();
        for &(x, y) in &[(0.3, 0.1), (1.2, -0.7), (-0.4, 2.0)] {
            assert_eq!(p.eval(&[x, y]), p.eval(&[-x, -y]));
        }
    }
}
