//! The commands behind the `glauber` binary, as library functions.
//!
//! Each command reads an [`ExperimentConfig`], writes its files into the
//! output directory and returns a serializable report with a pass flag.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ExperimentConfig, Family, Role, Source};
use crate::configuration::{Boundary, Configuration, CylinderFunction, GibbsSystem};
use crate::discrete::{
    coercivity_constant_certificate, coercivity_identity_residual, gap_vs_bounds, gnz_residual, pair_table,
    CertificateReport, GapReport, LatticeModel, StateSelection,
};
use crate::dynamics::{
    density_modes, estimate_gap_autocorrelation, rayleigh_upper_bound, sample_stationary, simulate, simulate_lattice,
    simulate_with, AutocorrelationOptions, DensityMode, EventWriter, GapEstimate, ObservableSeries, RayleighEstimate,
    SimulationOptions,
};
use crate::error::{Error, Result};
use crate::operators::{gamma2_formula, product_rule_check, Quadrature};
use crate::potentials::{
    beta_family_check, check_positive_definite, check_regularity, check_stability_numeric, growth_at_origin,
    CheckReport, RadialQuadrature, SampledFunction, DEFAULT_TAPER,
};
use crate::report::{sha256_hex, write_csv_rows, write_json};

/// Largest sample grid used by the Fourier checks.
const MAX_SAMPLES: usize = 1 << 22;
/// Above this many states the certificate is checked on a sample.
const CERTIFICATE_SAMPLE: usize = 1 << 16;
/// Configurations per replica fed to the Rayleigh quotient.
const RAYLEIGH_SAMPLES: usize = 200;

/// A loaded configuration with its hash and output directory.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub out: PathBuf,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

impl Experiment {
    pub fn load(path: &Path, ov: &Overrides) -> Result<Self> {
        let (cfg, _) = ExperimentConfig::load(path)?;
        Self::new(cfg, ov)
    }

    pub fn new(mut cfg: ExperimentConfig, ov: &Overrides) -> Result<Self> {
        if let Some(seed) = ov.seed {
            cfg.dynamics.seed = seed;
            cfg.checks.seed = seed;
        }
        if let Some(t) = ov.tol {
            let c = &mut cfg.checks;
            c.positive_definite_tol = t;
            c.regularity_tol = t;
            c.gnz_tol = t;
            c.coercivity_tol = t;
            c.gamma2_tol = t;
            c.product_rule_tol = t;
            c.gap_tol = t;
        }
        if let Some(out) = &ov.out {
            cfg.output = Some(out.clone());
        }
        cfg.validate()?;
        let out = cfg.output.clone().unwrap_or_else(|| PathBuf::from("out"));
        // where the files go does not change the results
        let mut hashed = cfg.clone();
        hashed.output = None;
        let config_sha256 = sha256_hex(hashed.canonical().as_bytes());
        Ok(Experiment {
            config: cfg,
            config_sha256,
            out,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn lattice(&self, sys: &GibbsSystem) -> Result<LatticeModel> {
        let l = &self.config.lattice;
        LatticeModel::with_limit(sys, l.m, l.cap, l.state_limit as u128)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedCheck {
    /// Index of the potential part, or `None` for the whole potential.
    pub part: Option<usize>,
    pub beta: Option<f64>,
    pub report: CheckReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct PotentialChecks {
    pub config_sha256: String,
    pub passed: bool,
    pub checks: Vec<NamedCheck>,
}

/// Runs the requested potential checks and writes `check-potential.json`.
pub fn check_potential(exp: &Experiment) -> Result<PotentialChecks> {
    let cfg = &exp.config;
    let c = &cfg.checks;
    let dim = cfg.potential.dim;
    let wants = |name: &str| c.potential.iter().any(|s| s == name);
    let taper = match cfg.potential.boundary {
        Boundary::Periodized { taper } => taper,
        Boundary::MinimumImage => DEFAULT_TAPER,
    };
    let n = grid_points(c.sample_points, dim);
    let mut checks = Vec::new();
    for (k, part) in cfg.potential.parts.iter().enumerate() {
        if !matches!(part.family, Family::Special | Family::Sampled) {
            continue;
        }
        let profile = match part.build(dim)?.profile() {
            Some(p) => p.clone(),
            None => continue,
        };
        let samples = SampledFunction::periodized(&profile, dim, n, c.sample_length, taper)?;
        if wants("positive-definite") {
            checks.push(NamedCheck {
                part: Some(k),
                beta: None,
                report: check_positive_definite(&samples, c.positive_definite_tol)?,
            });
        }
        if wants("beta-family") {
            for &q in &c.beta_ratios {
                checks.push(NamedCheck {
                    part: Some(k),
                    beta: Some(q),
                    report: beta_family_check(&samples, q, 1.0, c.positive_definite_tol)?,
                });
            }
        }
    }
    let phi = cfg.potential(None)?.scaled(cfg.potential.beta)?;
    if wants("regularity") {
        let report = check_regularity(
            &phi,
            c.regularity_radius,
            &RadialQuadrature::default(),
            c.regularity_tol,
        )?;
        checks.push(NamedCheck {
            part: None,
            beta: None,
            report,
        });
    }
    if wants("stability") && !phi.is_zero() {
        let report = check_stability_numeric(&phi, c.stability_n_max, c.stability_trials, c.seed)?;
        checks.push(NamedCheck {
            part: None,
            beta: None,
            report,
        });
    }
    if wants("growth") && !phi.is_zero() {
        let report = growth_at_origin(&phi, c.growth_range.0, c.growth_range.1)?;
        checks.push(NamedCheck {
            part: None,
            beta: None,
            report,
        });
    }
    let out = PotentialChecks {
        config_sha256: exp.config_sha256.clone(),
        passed: checks.iter().all(|c| c.report.passed),
        checks,
    };
    write_json(&exp.path("check-potential.json"), &out)?;
    Ok(out)
}

/// Points per axis: a power of two, at most `requested`, with `n^d <= MAX_SAMPLES`.
fn grid_points(requested: usize, dim: usize) -> usize {
    let cap = (MAX_SAMPLES as f64).powf(1.0 / dim as f64).floor() as usize;
    let target = requested.clamp(2, cap.max(2));
    1 << (usize::BITS - 1 - target.leading_zeros())
}

/// One residual against its tolerance. Passes only when strictly below.
#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Residual {
    fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Residual {
            name: name.into(),
            value,
            tolerance,
            passed: value < tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub config_sha256: String,
    pub passed: bool,
    pub cells: usize,
    pub cap: usize,
    pub states: usize,
    pub functions: usize,
    pub residuals: Vec<Residual>,
}

/// Largest residuals of the lattice identity suite over `functions` random cylinder functions.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct IdentityMaxima {
    pub gnz: f64,
    pub coercivity: f64,
    pub gamma2: f64,
    pub product_rule: f64,
}

/// Evaluates every identity on the lattice model for random cylinder functions.
pub fn identity_maxima(model: &LatticeModel, functions: usize, seed: u64) -> Result<IdentityMaxima> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = IdentityMaxima::default();
    let n = model.cell_count();
    let occs: Vec<Vec<u8>> = (0..model.state_count()).map(|p| model.occupancy(p)).collect();
    for _ in 0..functions {
        let cf = CylinderFunction::random(*model.bx(), 3, &mut rng)?;
        let values = model.values_of(&|g: &Configuration| cf.eval(g));
        let f = model.state_fn(&values);
        let fr: &dyn Fn(&Vec<u8>) -> f64 = &f;
        let psi: Vec<f64> = model.cells().iter().map(|x| cf.psi(x)[0]).collect();

        let h = |i: usize, occ: &[u8]| psi[i] + f(&occ.to_vec());
        out.gnz = out.gnz.max(gnz_residual(model, &h));

        out.coercivity = out.coercivity.max(coercivity_identity_residual(model, &values)?.max());

        let hy = |y: &usize, s: &Vec<u8>| psi[*y] * (1.0 + f(s));
        for s in &occs {
            out.gamma2 = out.gamma2.max(gamma2_formula(model, fr, s).relative_residual);
            for x in 0..n {
                out.product_rule = out.product_rule.max(product_rule_check(model, &hy, s, &x).max());
            }
        }
    }
    Ok(out)
}

/// Runs the identity suite on the configured lattice and writes `identities.json`.
pub fn verify_identities(exp: &Experiment) -> Result<IdentityReport> {
    let cfg = &exp.config;
    let c = &cfg.checks;
    let sys = cfg.system()?;
    let model = exp.lattice(&sys)?;
    let m = identity_maxima(&model, c.random_functions, c.seed)?;
    let residuals = vec![
        Residual::new("gnz", m.gnz, c.gnz_tol),
        Residual::new("coercivity", m.coercivity, c.coercivity_tol),
        Residual::new("gamma2_relative", m.gamma2, c.gamma2_tol),
        Residual::new("product_rule", m.product_rule, c.product_rule_tol),
    ];
    let out = IdentityReport {
        config_sha256: exp.config_sha256.clone(),
        passed: residuals.iter().all(|r| r.passed),
        cells: model.cell_count(),
        cap: model.cap(),
        states: model.state_count(),
        functions: c.random_functions,
        residuals,
    };
    write_json(&exp.path("identities.json"), &out)?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct GapCommandReport {
    pub config_sha256: String,
    pub passed: bool,
    /// `pass`, `fail` or `no certificate`.
    pub verdict: String,
    pub gap: f64,
    pub certified_c: f64,
    pub bound_c: f64,
    pub tolerance: f64,
    pub certificate: CertificateReport,
    pub spectrum: GapReport,
    pub warnings: Vec<String>,
}

/// Exact gap, certificate and bound on the configured lattice.
///
/// Writes `gap.json` and `eigenvalues.csv`.
pub fn gap(exp: &Experiment) -> Result<GapCommandReport> {
    let cfg = &exp.config;
    let tol = cfg.checks.gap_tol;
    let sys = cfg.system()?;
    let model = exp.lattice(&sys)?;
    let m = cfg.lattice.m;
    let phi1 = pair_table(&cfg.system_with(cfg.potential(Some(Role::Phi1))?)?, m)?;
    let phi2 = pair_table(&cfg.system_with(cfg.potential(Some(Role::Phi2))?)?, m)?;
    let spectrum = gap_vs_bounds(&model, &phi1, &phi2)?;
    let sel = if model.state_count() > CERTIFICATE_SAMPLE {
        StateSelection::Sample {
            count: CERTIFICATE_SAMPLE,
            seed: cfg.checks.seed,
        }
    } else {
        StateSelection::All
    };
    let certificate = coercivity_constant_certificate(&model, &sel)?;
    let gap = spectrum.gap;
    let certified_c = spectrum.certified_c.unwrap_or(certificate.certified_c);
    let bound_c = spectrum.bound_c.unwrap_or(f64::NEG_INFINITY);
    let passed = gap >= certified_c - tol && (bound_c <= 0.0 || gap >= bound_c - tol);
    let mut warnings = spectrum.warnings.clone();
    let verdict = if !passed {
        "fail"
    } else if certified_c <= 0.0 && bound_c <= 0.0 {
        warnings.push("neither the kernel certificate nor the high-temperature bound is positive".into());
        "no certificate"
    } else {
        "pass"
    };
    write_csv_rows(
        &exp.path("eigenvalues.csv"),
        &["index", "eigenvalue"],
        &spectrum.eigenvalue_rows(),
    )?;
    let out = GapCommandReport {
        config_sha256: exp.config_sha256.clone(),
        passed,
        verdict: verdict.into(),
        gap,
        certified_c,
        bound_c,
        tolerance: tol,
        certificate,
        spectrum,
        warnings,
    };
    write_json(&exp.path("gap.json"), &out)?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicaSummary {
    pub seed: u64,
    pub events: u64,
    pub stop_time: f64,
    pub final_count: usize,
    pub mean_count: f64,
    pub series: PathBuf,
    pub events_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub config_sha256: String,
    pub source: Source,
    pub replicas: Vec<ReplicaSummary>,
}

fn replica_seed(base: u64, r: usize) -> u64 {
    base.wrapping_add(r as u64)
}

fn options(cfg: &ExperimentConfig, seed: u64) -> SimulationOptions {
    let d = &cfg.dynamics;
    SimulationOptions {
        t_end: d.t_end,
        seed,
        max_particles: d.max_particles,
        max_events: d.max_events,
    }
}

/// Particle count of a lattice state.
fn lattice_counts(model: &LatticeModel) -> Vec<f64> {
    (0..model.state_count())
        .map(|p| model.occupancy(p).iter().map(|&k| k as f64).sum())
        .collect()
}

/// Simulates every replica, streaming events to `events_<r>.bin` (continuum) and
/// sampling the particle count into `series_<r>.csv`.
pub fn run_simulation(exp: &Experiment) -> Result<SimulationReport> {
    let cfg = &exp.config;
    let d = &cfg.dynamics;
    std::fs::create_dir_all(&exp.out).map_err(|e| Error::io(&exp.out, e))?;
    let sys = cfg.system()?;
    let replicas: Vec<Result<ReplicaSummary>> = match d.source {
        Source::Continuum => {
            let quad = Quadrature::new(*sys.bx(), cfg.grid.m)?;
            let (sys, quad) = (&sys, &quad);
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..d.replicas)
                    .map(|r| scope.spawn(move || continuum_replica(exp, sys, quad, r)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("replica thread panicked"))
                    .collect()
            })
        }
        Source::Lattice => {
            let model = exp.lattice(&sys)?;
            let gen = model.generator()?;
            let counts = lattice_counts(&model);
            (0..d.replicas)
                .map(|r| {
                    let seed = replica_seed(d.seed, r);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
                    let start = sample_stationary(&model, &mut rng);
                    let traj = simulate_lattice(&gen, start, d.t_end, d.max_events.map(|m| m as usize), seed)?;
                    let series = ObservableSeries::from_lattice(&traj, d.dt, d.burn_in, &|p| counts[p])?;
                    let path = exp.path(&format!("series_{r}.csv"));
                    series.write_csv(&path)?;
                    Ok(ReplicaSummary {
                        seed,
                        events: traj.events() as u64,
                        stop_time: traj.t_end,
                        final_count: counts[*traj.states.last().unwrap_or(&start)] as usize,
                        mean_count: series.mean(),
                        series: path,
                        events_file: None,
                    })
                })
                .collect()
        }
    };
    let out = SimulationReport {
        config_sha256: exp.config_sha256.clone(),
        source: d.source,
        replicas: replicas.into_iter().collect::<Result<_>>()?,
    };
    write_json(&exp.path("simulate.json"), &out)?;
    Ok(out)
}

fn continuum_replica(exp: &Experiment, sys: &GibbsSystem, quad: &Quadrature, r: usize) -> Result<ReplicaSummary> {
    let d = &exp.config.dynamics;
    let seed = replica_seed(d.seed, r);
    let opts = options(&exp.config, seed);
    let params = crate::dynamics::snapshot(sys, quad, &opts);
    let initial = Configuration::empty();
    let events_path = exp.path(&format!("events_{r}.bin"));
    let mut writer = EventWriter::create(&events_path, sys.bx().dim(), seed, &params, &initial)?;
    let mut sampler = CountSampler::new(d.dt, d.burn_in, initial.len());
    let (fin, stop, events) = simulate_with(sys, quad, &opts, &initial, &mut |e| {
        sampler.advance(e.time, e.count as usize);
        writer.write(e)
    })?;
    writer.finish()?;
    let series = sampler.finish(stop)?;
    let path = exp.path(&format!("series_{r}.csv"));
    series.write_csv(&path)?;
    Ok(ReplicaSummary {
        seed,
        events,
        stop_time: stop,
        final_count: fin.len(),
        mean_count: series.mean(),
        series: path,
        events_file: Some(events_path),
    })
}

/// Samples a piecewise-constant count on the grid `burn_in + k dt` as events arrive.
struct CountSampler {
    dt: f64,
    next: f64,
    current: usize,
    start: f64,
    values: Vec<f64>,
}

impl CountSampler {
    fn new(dt: f64, burn_in: f64, initial: usize) -> Self {
        CountSampler {
            dt,
            next: burn_in,
            current: initial,
            start: burn_in,
            values: Vec::new(),
        }
    }

    fn advance(&mut self, t: f64, count: usize) {
        while self.next < t {
            self.values.push(self.current as f64);
            self.next = self.start + self.values.len() as f64 * self.dt;
        }
        self.current = count;
    }

    /// Fills the grid up to and including `stop`.
    fn finish(mut self, stop: f64) -> Result<ObservableSeries> {
        let n = ObservableSeries::grid(self.start, stop, self.dt)?.len();
        self.values.resize(n.max(self.values.len()), self.current as f64);
        ObservableSeries::new(self.start, self.dt, self.values)
    }
}

/// Autocorrelation estimate for one density mode.
#[derive(Debug, Clone, Serialize)]
pub struct ModeEstimate {
    pub mode: String,
    pub estimate: Option<GapEstimate>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicaEstimate {
    pub seed: u64,
    /// Mode with the smallest rate.
    pub slowest_mode: String,
    pub estimate: GapEstimate,
    pub modes: Vec<ModeEstimate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapEstimateReport {
    pub config_sha256: String,
    pub source: Source,
    pub replicas: Vec<ReplicaEstimate>,
    /// Inverse-variance weighted mean of the replica rates.
    pub pooled_rate: f64,
    pub pooled_std_error: f64,
    /// Exact lattice gap, when the source is the lattice chain.
    pub exact_gap: Option<f64>,
    pub relative_error: Option<f64>,
    /// Rayleigh quotient of the particle count on continuum samples.
    pub rayleigh: Option<RayleighEstimate>,
}

/// Estimates every mode and keeps the slowest.
///
/// A mode relaxes at the slowest rate it overlaps with, so the minimum over
/// modes is the estimate closest to the gap.
pub fn slowest_mode(
    series: &[(DensityMode, ObservableSeries)],
    opts: &AutocorrelationOptions,
    seed: u64,
) -> Result<ReplicaEstimate> {
    let mut modes = Vec::new();
    let mut best: Option<(String, GapEstimate)> = None;
    for (mode, s) in series {
        match estimate_gap_autocorrelation(s, opts) {
            Ok(e) => {
                if best.as_ref().is_none_or(|(_, b)| e.rate < b.rate) {
                    best = Some((mode.name(), e.clone()));
                }
                modes.push(ModeEstimate {
                    mode: mode.name(),
                    estimate: Some(e),
                    error: None,
                });
            }
            Err(e) => modes.push(ModeEstimate {
                mode: mode.name(),
                estimate: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let (slowest_mode, estimate) =
        best.ok_or_else(|| Error::InsufficientMixing("no density mode gave an estimate".into()))?;
    Ok(ReplicaEstimate {
        seed,
        slowest_mode,
        estimate,
        modes,
    })
}

/// Estimates the gap from density-mode autocorrelations of every replica.
///
/// Writes `estimate-gap.json`.
pub fn estimate_gap(exp: &Experiment) -> Result<GapEstimateReport> {
    let cfg = &exp.config;
    let d = &cfg.dynamics;
    let opts = AutocorrelationOptions {
        window: d.window,
        blocks: d.blocks,
        ..AutocorrelationOptions::default()
    };
    let sys = cfg.system()?;
    let bx = *sys.bx();
    let mut replicas = Vec::new();
    let mut exact_gap = None;
    let mut rayleigh = None;
    match d.source {
        Source::Continuum => {
            let quad = Quadrature::new(bx, cfg.grid.m)?;
            let modes = density_modes(bx.dim(), d.mode_k_max.unwrap_or(2));
            let mut samples = Vec::new();
            for r in 0..d.replicas {
                let seed = replica_seed(d.seed, r);
                let log = simulate(&sys, &quad, &options(cfg, seed), &Configuration::empty())?;
                let series = modes
                    .iter()
                    .map(|m| {
                        Ok((
                            m.clone(),
                            ObservableSeries::from_log(&log, d.dt, d.burn_in, &|g| m.eval(&bx, g))?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                replicas.push(slowest_mode(&series, &opts, seed)?);
                let step = (log.t_end - d.burn_in) / RAYLEIGH_SAMPLES as f64;
                for i in 0..RAYLEIGH_SAMPLES {
                    samples.push(log.state_at(d.burn_in + i as f64 * step)?);
                }
            }
            let count = |g: &Configuration| g.len() as f64;
            rayleigh = rayleigh_upper_bound(&sys, &quad, &count, &samples).ok();
        }
        Source::Lattice => {
            let model = exp.lattice(&sys)?;
            let gen = model.generator()?;
            let k_max = d.mode_k_max.unwrap_or(cfg.lattice.m / 2);
            let modes = density_modes(bx.dim(), k_max);
            let tables: Vec<Vec<f64>> = modes.iter().map(|m| model.values_of(&|g| m.eval(&bx, g))).collect();
            for r in 0..d.replicas {
                let seed = replica_seed(d.seed, r);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
                let start = sample_stationary(&model, &mut rng);
                let traj = simulate_lattice(&gen, start, d.t_end, d.max_events.map(|m| m as usize), seed)?;
                let series = modes
                    .iter()
                    .zip(&tables)
                    .map(|(m, t)| {
                        Ok((
                            m.clone(),
                            ObservableSeries::from_lattice(&traj, d.dt, d.burn_in, &|p| t[p])?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                replicas.push(slowest_mode(&series, &opts, seed)?);
            }
            exact_gap = Some(crate::discrete::spectral_gap_exact(&model)?.gap);
        }
    }
    let (mut wsum, mut acc) = (0.0, 0.0);
    for r in &replicas {
        let e = &r.estimate;
        let w = 1.0 / e.std_error.max(1e-12 * e.rate).powi(2);
        wsum += w;
        acc += w * e.rate;
    }
    let pooled_rate = acc / wsum;
    let out = GapEstimateReport {
        config_sha256: exp.config_sha256.clone(),
        source: d.source,
        pooled_rate,
        pooled_std_error: wsum.sqrt().recip(),
        relative_error: exact_gap.map(|g| (pooled_rate - g).abs() / g),
        exact_gap,
        replicas,
        rayleigh,
    };
    write_json(&exp.path("estimate-gap.json"), &out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_are_powers_of_two() {
        assert_eq!(grid_points(1024, 1), 1024);
        assert_eq!(grid_points(1000, 1), 512);
        assert_eq!(grid_points(1024, 3), 128);
        assert_eq!(grid_points(4096, 2), 2048);
        assert_eq!(grid_points(1, 1), 2);
    }

    #[test]
    fn count_sampler_holds_values_between_events() {
        let mut s = CountSampler::new(0.5, 1.0, 0);
        s.advance(0.2, 1);
        s.advance(1.2, 2);
        s.advance(1.9, 1);
        let series = s.finish(2.5).unwrap();
        // samples at 1.0, 1.5, 2.0, 2.5
        assert_eq!(series.values, vec![1.0, 2.0, 1.0, 1.0]);
    }
}
