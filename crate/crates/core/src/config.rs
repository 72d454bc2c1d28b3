//! Experiment configuration read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::configuration::{Boundary, GibbsSpec, GibbsSystem};
use crate::error::{ensure, Error, Result};
use crate::geometry::TorusBox;
use crate::potentials::{ClosedProfile, ExplicitForm, PairPotential, Profile, SampledFunction};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub potential: PotentialConfig,
    #[serde(rename = "box")]
    pub bx: BoxConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub dim: usize,
    pub z: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub parts: Vec<PartConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Zero,
    Special,
    Explicit,
    Sampled,
}

/// Which side of the `phi1 + phi2` split a part belongs to in bound comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Phi1,
    Phi2,
}

/// One summand of the potential. Family parameters sit next to `family`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartConfig {
    pub family: Family,
    #[serde(default)]
    pub role: Option<Role>,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub cutoff: Option<f64>,
    #[serde(flatten)]
    pub params: toml::Table,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub side: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Quadrature nodes per axis for continuum operators and simulation.
    pub m: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { m: 32 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeConfig {
    pub m: usize,
    pub cap: usize,
    pub state_limit: u64,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            m: 6,
            cap: 1,
            state_limit: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Continuum,
    Lattice,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsConfig {
    pub t_end: f64,
    pub dt: f64,
    pub burn_in: f64,
    pub seed: u64,
    pub replicas: usize,
    pub max_particles: usize,
    pub max_events: Option<u64>,
    pub source: Source,
    pub window: (f64, f64),
    pub blocks: usize,
    /// Largest wavenumber of the density modes used by `estimate-gap`; all lattice modes when unset.
    pub mode_k_max: Option<usize>,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            t_end: 1000.0,
            dt: 0.1,
            burn_in: 10.0,
            seed: 1,
            replicas: 1,
            max_particles: 100_000,
            max_events: None,
            source: Source::Continuum,
            window: (0.05, 0.6),
            blocks: 20,
            mode_k_max: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksConfig {
    /// Subset of `positive-definite`, `regularity`, `stability`, `growth`, `beta-family`.
    pub potential: Vec<String>,
    pub positive_definite_tol: f64,
    pub sample_points: usize,
    pub sample_length: f64,
    pub regularity_radius: f64,
    pub regularity_tol: f64,
    pub stability_n_max: usize,
    pub stability_trials: usize,
    pub growth_range: (f64, f64),
    pub beta_ratios: Vec<f64>,
    pub gnz_tol: f64,
    pub coercivity_tol: f64,
    pub gamma2_tol: f64,
    pub product_rule_tol: f64,
    pub gap_tol: f64,
    pub random_functions: usize,
    pub random_configurations: usize,
    pub seed: u64,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        ChecksConfig {
            potential: vec![
                "positive-definite".into(),
                "regularity".into(),
                "stability".into(),
                "growth".into(),
                "beta-family".into(),
            ],
            positive_definite_tol: 1e-8,
            sample_points: 1024,
            sample_length: 64.0,
            regularity_radius: 1.0,
            regularity_tol: 1e-6,
            stability_n_max: 12,
            stability_trials: 20,
            growth_range: (1e-4, 0.1),
            beta_ratios: vec![0.1, 0.25, 0.5, 0.9, 1.0],
            gnz_tol: 1e-12,
            coercivity_tol: 1e-11,
            gamma2_tol: 1e-10,
            product_rule_tol: 1e-12,
            gap_tol: 1e-9,
            random_functions: 20,
            random_configurations: 20,
            seed: 1,
        }
    }
}

fn one() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for part in &mut cfg.potential.parts {
            if let Some(toml::Value::String(p)) = part.params.get("path") {
                let path = base.join(p);
                part.params
                    .insert("path".into(), toml::Value::String(path.to_string_lossy().into_owned()));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| Error::Config(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Ok((Self::from_toml(text, base)?, bytes))
    }

    /// Canonical TOML of the effective configuration.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.checks;
        let tols = [
            c.positive_definite_tol,
            c.regularity_tol,
            c.gnz_tol,
            c.coercivity_tol,
            c.gamma2_tol,
            c.product_rule_tol,
            c.gap_tol,
        ];
        ensure(tols.iter().all(|t| *t >= 0.0 && t.is_finite()), || {
            "tolerances must be >= 0".into()
        })
        .map_err(cfg_err)?;
        for name in &c.potential {
            ensure(
                ["positive-definite", "regularity", "stability", "growth", "beta-family"].contains(&name.as_str()),
                || format!("unknown potential check `{name}`"),
            )
            .map_err(cfg_err)?;
        }
        ensure(self.dynamics.replicas >= 1, || "replicas must be >= 1".into()).map_err(cfg_err)?;
        ensure(self.dynamics.dt > 0.0 && self.dynamics.t_end > 0.0, || {
            "dt and t_end must be positive".into()
        })
        .map_err(cfg_err)?;
        for part in &self.potential.parts {
            part.build(self.potential.dim)?;
        }
        Ok(())
    }

    pub fn bx(&self) -> Result<TorusBox> {
        TorusBox::new(self.potential.dim, self.bx.side)
    }

    /// Sum of the configured parts, restricted to a role when given.
    pub fn potential(&self, role: Option<Role>) -> Result<PairPotential> {
        let dim = self.potential.dim;
        let parts: Vec<PairPotential> = self
            .potential
            .parts
            .iter()
            .filter(|p| role.is_none() || p.role() == role)
            .map(|p| p.build(dim))
            .collect::<Result<_>>()?;
        if parts.is_empty() {
            return PairPotential::zero(dim);
        }
        if parts.len() == 1 {
            return Ok(parts.into_iter().next().unwrap());
        }
        PairPotential::sum(parts)
    }

    pub fn system_with(&self, potential: PairPotential) -> Result<GibbsSystem> {
        GibbsSpec::new(potential, self.potential.z, self.potential.beta)?
            .with_boundary(self.potential.boundary)
            .on_box(self.bx()?)
    }

    pub fn system(&self) -> Result<GibbsSystem> {
        self.system_with(self.potential(None)?)
    }

    /// Profiles of the special-class parts, for the Fourier checks.
    pub fn special_profiles(&self) -> Result<Vec<Profile>> {
        self.potential
            .parts
            .iter()
            .filter(|p| p.family == Family::Special || p.family == Family::Sampled)
            .map(|p| p.profile(self.potential.dim))
            .collect()
    }
}

fn cfg_err(e: Error) -> Error {
    match e {
        Error::InvalidParameter(m) => Error::Config(m),
        other => other,
    }
}

impl PartConfig {
    /// Special-class parts default to `phi2`, all others to `phi1`.
    pub fn role(&self) -> Option<Role> {
        Some(self.role.unwrap_or(match self.family {
            Family::Special | Family::Sampled => Role::Phi2,
            _ => Role::Phi1,
        }))
    }

    fn profile(&self, dim: usize) -> Result<Profile> {
        match self.family {
            Family::Special => {
                let mut params = self.params.clone();
                params
                    .entry("modulation")
                    .or_insert_with(|| toml::Value::String("none".into()));
                let c: ClosedProfile = toml::Value::Table(params)
                    .try_into()
                    .map_err(|e: toml::de::Error| Error::Config(format!("special part: {e}")))?;
                Ok(Profile::Closed(c))
            }
            Family::Sampled => {
                let path = self
                    .params
                    .get("path")
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| Error::Config("sampled part needs `path`".into()))?;
                let s = SampledFunction::read_csv(Path::new(path))?;
                ensure(s.dim() == dim, || {
                    format!("sampled profile has dimension {}, expected {dim}", s.dim())
                })?;
                Ok(Profile::Sampled(s))
            }
            _ => Err(Error::Config(format!("{:?} part has no profile", self.family))),
        }
    }

    pub fn build(&self, dim: usize) -> Result<PairPotential> {
        let p = match self.family {
            Family::Zero => PairPotential::zero(dim)?,
            Family::Special | Family::Sampled => PairPotential::special_class(self.profile(dim)?, dim)?,
            Family::Explicit => {
                let form: ExplicitForm = toml::Value::Table(self.params.clone())
                    .try_into()
                    .map_err(|e: toml::de::Error| Error::Config(format!("explicit part: {e}")))?;
                PairPotential::explicit(form, dim)?
            }
        };
        let p = match self.cutoff {
            Some(rc) => p.with_cutoff(rc)?,
            None => p,
        };
        if self.scale == 1.0 {
            Ok(p)
        } else {
            p.scaled(self.scale)
        }
    }
}
