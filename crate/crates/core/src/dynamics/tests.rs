use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

use super::*;
use crate::configuration::{Boundary, GibbsSpec};
use crate::discrete::{spectral_gap_exact, LatticeModel};
use crate::geometry::TorusBox;
use crate::potentials::{Envelope, ExplicitForm, Modulation, PairPotential, Profile};

fn system(p: PairPotential, z: f64, side: f64) -> GibbsSystem {
    GibbsSpec::new(p, z, 1.0)
        .unwrap()
        .with_boundary(Boundary::default())
        .on_box(TorusBox::new(1, side).unwrap())
        .unwrap()
}

fn free(z: f64, side: f64) -> GibbsSystem {
    system(PairPotential::zero(1).unwrap(), z, side)
}

fn special(z: f64, side: f64) -> GibbsSystem {
    let p = PairPotential::special_class(
        Profile::closed(Envelope::Gaussian { t: 2.0 }, Modulation::Cos { a: vec![1.0] }),
        1,
    )
    .unwrap();
    system(p, z, side)
}

fn quad(sys: &GibbsSystem, m: usize) -> Quadrature {
    Quadrature::new(*sys.bx(), m).unwrap()
}

/// Batch-means standard error of the mean.
fn batch_se(values: &[f64], batches: usize) -> f64 {
    let size = values.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| values[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

#[test]
fn free_count_mean_matches_poisson_mean() {
    let sys = free(1.5, 8.0);
    let q = quad(&sys, 16);
    let log = simulate(&sys, &q, &SimulationOptions::new(3000.0, 1), &Configuration::empty()).unwrap();
    log.validate().unwrap();
    let s = ObservableSeries::count_from_log(&log, 0.5, 20.0).unwrap();
    let se = batch_se(&s.values, 30);
    assert!((s.mean() - 12.0).abs() < 3.0 * se, "{} +- {se}", s.mean());
}

#[test]
fn free_count_distribution_is_poisson() {
    let (z, side) = (1.0, 6.0);
    let sys = free(z, side);
    let q = quad(&sys, 12);
    let log = simulate(&sys, &q, &SimulationOptions::new(20_000.0, 7), &Configuration::empty()).unwrap();
    // sampling every 5 time units leaves correlation exp(-5)
    let s = ObservableSeries::count_from_log(&log, 5.0, 20.0).unwrap();
    let lambda = z * side;
    let pois = Poisson::new(lambda).unwrap();
    let (lo_bin, hi_bin) = (2u64, 11u64);
    let mut observed = vec![0.0; (hi_bin - lo_bin + 1) as usize];
    for &v in &s.values {
        let k = (v as u64).clamp(lo_bin, hi_bin);
        observed[(k - lo_bin) as usize] += 1.0;
    }
    let n = s.len() as f64;
    let expected: Vec<f64> = (lo_bin..=hi_bin)
        .map(|k| {
            n * if k == lo_bin {
                (0..=lo_bin).map(|j| pois.pmf(j)).sum()
            } else if k == hi_bin {
                1.0 - (0..hi_bin).map(|j| pois.pmf(j)).sum::<f64>()
            } else {
                pois.pmf(k)
            }
        })
        .collect();
    let chi2: f64 = observed.iter().zip(&expected).map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = (observed.len() - 1) as f64;
    let p = 1.0 - ChiSquared::new(dof).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi2 {chi2}, p {p}");
}

#[test]
fn pure_death_extinction_time() {
    let sys = free(1e-300, 5.0);
    let q = quad(&sys, 5);
    let start = Configuration::from_points((0..10).map(|k| Point::on_line(0.4 * k as f64)).collect());
    let runs = 400;
    let times: Vec<f64> = (0..runs)
        .map(|seed| {
            let log = simulate(&sys, &q, &SimulationOptions::new(1e3, seed), &start).unwrap();
            assert!(log.final_state.is_empty());
            assert!(log.events.iter().all(|e| e.kind == EventKind::Death));
            log.events.last().unwrap().time
        })
        .collect();
    let mean = times.iter().sum::<f64>() / runs as f64;
    let sd = (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (runs - 1) as f64).sqrt();
    let harmonic: f64 = (1..=10).map(|k| 1.0 / k as f64).sum();
    assert!(
        (mean - harmonic).abs() < 3.0 * sd / (runs as f64).sqrt(),
        "{mean} vs {harmonic}"
    );
}

#[test]
fn hard_core_suppresses_close_pairs() {
    let close = |sys: &GibbsSystem| {
        let q = quad(sys, 60);
        let log = simulate(sys, &q, &SimulationOptions::new(400.0, 3), &Configuration::empty()).unwrap();
        let mut pairs = 0usize;
        let mut near = 0usize;
        for k in 1..400 {
            let g = log.state_at(k as f64).unwrap();
            let pts = g.points();
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    pairs += 1;
                    if sys.bx().distance(&pts[i], &pts[j]) < 0.1 {
                        near += 1;
                    }
                }
            }
        }
        near as f64 / pairs as f64
    };
    let free_frac = close(&free(1.0, 6.0));
    let hard_frac = close(&special(1.0, 6.0));
    assert!(free_frac > 0.01);
    assert!(hard_frac < 0.1 * free_frac, "{hard_frac} vs {free_frac}");
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let sys = special(1.2, 6.0);
    let q = quad(&sys, 24);
    let opts = SimulationOptions::new(50.0, 99);
    let a = simulate(&sys, &q, &opts, &Configuration::empty()).unwrap().to_bytes();
    let b = simulate(&sys, &q, &opts, &Configuration::empty()).unwrap().to_bytes();
    assert_eq!(a, b);
    let c = simulate(&sys, &q, &SimulationOptions::new(50.0, 100), &Configuration::empty())
        .unwrap()
        .to_bytes();
    assert_ne!(a, c);
}

#[test]
fn event_log_roundtrip_and_streaming() {
    let sys = special(1.0, 6.0);
    let q = quad(&sys, 12);
    let opts = SimulationOptions::new(20.0, 5);
    let start = Configuration::from_points(vec![Point::on_line(1.0), Point::on_line(4.0)]);
    let log = simulate(&sys, &q, &opts, &start).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.evt");
    log.write_binary(&path).unwrap();
    let back = EventLog::read_binary(&path).unwrap();
    assert_eq!(back, log);
    assert_eq!(&std::fs::read(&path).unwrap()[..8], EVENT_MAGIC);

    let streamed = dir.path().join("stream.evt");
    let mut w = EventWriter::create(&streamed, 1, opts.seed, &snapshot(&sys, &q, &opts), &start).unwrap();
    simulate_with(&sys, &q, &opts, &start, &mut |e| w.write(e)).unwrap();
    w.finish().unwrap();
    assert_eq!(std::fs::read(&streamed).unwrap(), log.to_bytes());

    let mut bad = log.to_bytes();
    bad[0] = b'X';
    assert!(EventLog::from_bytes(&bad).is_err());
    let cut = log.to_bytes();
    assert!(EventLog::from_bytes(&cut[..cut.len() - 3]).is_err());
}

#[test]
fn incremental_rate_field_matches_rebuild() {
    let p = PairPotential::sum(vec![
        PairPotential::explicit(
            ExplicitForm::SquareWell {
                height: 0.7,
                radius: 0.9,
            },
            1,
        )
        .unwrap(),
        PairPotential::special_class(Profile::closed(Envelope::Cauchy { sigma: 1.0 }, Modulation::None), 1).unwrap(),
    ])
    .unwrap();
    for sys in [
        system(p, 1.0, 7.0),
        system(
            PairPotential::explicit(
                ExplicitForm::SquareWell {
                    height: 0.7,
                    radius: 0.9,
                },
                1,
            )
            .unwrap(),
            1.0,
            7.0,
        ),
    ] {
        let q = quad(&sys, 35);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut g = Configuration::empty();
        let mut field = RateField::new(&sys, &q, &g);
        for _ in 0..300 {
            if g.is_empty() || rng.gen_bool(0.6) {
                let x = Point::on_line(rng.gen_range(0.0..7.0));
                field.add(&x);
                g.push(x);
            } else {
                let k = rng.gen_range(0..g.len());
                let x = g.swap_remove(k);
                field.remove(&x);
            }
        }
        let fresh = RateField::new(&sys, &q, &g);
        for (a, b) in field.rates().iter().zip(fresh.rates()) {
            assert!((a - b).abs() <= 1e-10 * b.max(1e-300), "{a} vs {b}");
        }
        assert!((field.total() - fresh.total()).abs() <= 1e-10 * fresh.total().max(1.0));
    }
}

#[test]
fn rate_overflow_on_collapse() {
    let p = PairPotential::explicit(
        ExplicitForm::SquareWell {
            height: -3.0,
            radius: 1.0,
        },
        1,
    )
    .unwrap();
    let sys = system(p, 2.0, 6.0);
    let q = quad(&sys, 12);
    let mut opts = SimulationOptions::new(100.0, 1);
    opts.max_particles = 200;
    let err = simulate(&sys, &q, &opts, &Configuration::empty()).unwrap_err();
    assert!(matches!(err, Error::RateOverflow { limit: 200, .. }));
}

#[test]
fn free_count_relaxes_at_unit_rate() {
    let sys = free(2.0, 5.0);
    let q = quad(&sys, 10);
    let log = simulate(&sys, &q, &SimulationOptions::new(20_000.0, 11), &Configuration::empty()).unwrap();
    let s = ObservableSeries::count_from_log(&log, 0.1, 20.0).unwrap();
    let est = estimate_gap_autocorrelation(&s, &AutocorrelationOptions::default()).unwrap();
    assert!((est.rate - 1.0).abs() < 0.15, "{est:?}");
    assert!(est.ci_low < est.rate && est.rate < est.ci_high);
    assert!(!est.resolution_limited);
}

#[test]
fn white_noise_is_resolution_limited() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let values: Vec<f64> = (0..5000).map(|_| rng.gen::<f64>()).collect();
    let s = ObservableSeries::new(0.0, 0.1, values).unwrap();
    let est = estimate_gap_autocorrelation(&s, &AutocorrelationOptions::default()).unwrap();
    assert!(est.resolution_limited);
    assert!(est.rate >= 10.0);
}

#[test]
fn trend_is_rejected() {
    let values: Vec<f64> = (0..2000).map(|k| k as f64).collect();
    let s = ObservableSeries::new(0.0, 0.1, values).unwrap();
    let err = estimate_gap_autocorrelation(&s, &AutocorrelationOptions::default()).unwrap_err();
    assert!(matches!(err, Error::InsufficientMixing(_)));
    assert!(ObservableSeries::new(0.0, 0.1, vec![1.0]).is_err());
    assert!(ObservableSeries::new(0.0, 0.0, vec![1.0, 2.0]).is_err());
}

#[test]
fn lattice_gap_estimate_matches_eigensolve() {
    let sys = special(1.0, 6.0);
    let model = LatticeModel::new(&sys, 6, 1).unwrap();
    let gen = model.generator().unwrap();
    let exact = spectral_gap_exact(&model).unwrap().gap;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let start = sample_stationary(&model, &mut rng);
    let traj = simulate_lattice(&gen, start, f64::INFINITY, Some(400_000), 8).unwrap();
    let count = |p: usize| model.occupancy(p).iter().map(|&k| k as f64).sum::<f64>();
    let s = ObservableSeries::from_lattice(&traj, 0.05, 0.0, &count).unwrap();
    let est = estimate_gap_autocorrelation(&s, &AutocorrelationOptions::default()).unwrap();
    assert!((est.rate - exact).abs() < 0.15 * exact, "{} vs {exact}", est.rate);
}

#[test]
fn lattice_chain_keeps_stationary_marginals() {
    let sys = special(1.5, 6.0);
    let model = LatticeModel::new(&sys, 6, 1).unwrap();
    let gen = model.generator().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let start = sample_stationary(&model, &mut rng);
    let traj = simulate_lattice(&gen, start, f64::INFINITY, Some(100_000), 21).unwrap();
    let exact: Vec<f64> = (0..6)
        .map(|i| {
            model
                .weights()
                .iter()
                .enumerate()
                .map(|(p, w)| w * model.occupancy(p)[i] as f64)
                .sum()
        })
        .collect();
    let occ = traj.occupation(&model, 0.0);
    for i in 0..6 {
        let s = ObservableSeries::from_lattice(&traj, 0.1, 0.0, &|p| model.occupancy(p)[i] as f64).unwrap();
        let se = batch_se(&s.values, 20);
        assert!(
            (occ[i] - exact[i]).abs() < 3.0 * se.max(1e-3),
            "cell {i}: {} vs {}",
            occ[i],
            exact[i]
        );
    }
}

#[test]
fn rayleigh_quotient_of_count() {
    let count = |g: &Configuration| g.len() as f64;
    let sample = |sys: &GibbsSystem, seed: u64| {
        let q = quad(sys, 24);
        let log = simulate(sys, &q, &SimulationOptions::new(2000.0, seed), &Configuration::empty()).unwrap();
        let samples: Vec<Configuration> = (1..1000)
            .map(|k| log.state_at(20.0 + 1.5 * k as f64).unwrap())
            .collect();
        rayleigh_upper_bound(sys, &q, &count, &samples).unwrap()
    };
    let f = sample(&free(1.0, 6.0), 3);
    assert!((f.ratio - 1.0).abs() < 3.0 * f.std_error + 0.02, "{f:?}");
    let s = sample(&special(1.5, 6.0), 4);
    assert!(s.ratio >= 1.0 - 3.0 * s.std_error, "{s:?}");
    let sys = free(1.0, 6.0);
    let q = quad(&sys, 6);
    let samples = vec![
        Configuration::empty(),
        Configuration::from_points(vec![Point::on_line(1.0)]),
    ];
    let err = rayleigh_upper_bound(&sys, &q, &|_| 3.0, &samples).unwrap_err();
    assert!(matches!(err, Error::DegenerateTrialFunction(_)));
}

#[test]
fn series_csv_roundtrip() {
    let s = ObservableSeries::new(1.0, 0.25, vec![3.0, 4.5, -1.0, 0.0]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    s.write_csv(&path).unwrap();
    assert_eq!(ObservableSeries::read_csv(&path).unwrap(), s);
}
