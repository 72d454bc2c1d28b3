use faer::{Mat, Side};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{rho1_exact, spectral_gap_exact, GapReport, LatticeModel};
use crate::error::{ensure, Error, Result};

/// Which supported states the kernel condition is checked on.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSelection {
    /// Every state with `w(n) > 1e-12 max w`.
    All,
    /// Explicit support positions.
    Indices(Vec<usize>),
    /// Uniform sample without replacement from the `All` set.
    Sample { count: usize, seed: u64 },
}

/// Outcome of the kernel positivity certificate.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    /// `1 + min_n lambda_min(A(n))`, clipped to `[0, 1]`.
    pub certified_c: f64,
    pub unclipped_c: f64,
    pub min_eigenvalue: f64,
    /// Occupancy attaining `min_eigenvalue`.
    pub worst_state: Vec<u8>,
    pub states_checked: usize,
    /// Same bound with `z exp(-E_i)` in place of the capped intensity and
    /// `1 - exp(-Phi_ii)` on the diagonal, clipped to `[0, 1]`.
    pub uncapped_c: f64,
    /// Largest `|v^2 r_x (r_y - r_y(n + e_x)) - sqrt(v r_x) A_xy sqrt(v r_y)|`, relative.
    pub kernel_form_residual: f64,
    /// Largest asymmetry of `r_x r_y(n + e_x)` under `x <-> y`, relative.
    pub kernel_symmetry_residual: f64,
}

fn min_eig(a: Mat<f64>) -> Result<f64> {
    if a.nrows() == 0 {
        return Ok(f64::INFINITY);
    }
    let vals = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    Ok(vals[0])
}

fn selected(model: &LatticeModel, sel: &StateSelection) -> Result<Vec<usize>> {
    let w = model.weights();
    let wmax = w.iter().cloned().fold(0.0, f64::max);
    let all: Vec<usize> = (0..w.len()).filter(|&p| w[p] > 1e-12 * wmax).collect();
    match sel {
        StateSelection::All => Ok(all),
        StateSelection::Indices(ix) => {
            ensure(ix.iter().all(|&p| p < w.len()), || {
                "state index outside the support".into()
            })?;
            Ok(ix.clone())
        }
        StateSelection::Sample { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let k = (*count).min(all.len());
            let mut pick: Vec<usize> = sample(&mut rng, all.len(), k).into_iter().map(|i| all[i]).collect();
            pick.sort_unstable();
            Ok(pick)
        }
    }
}

/// Largest `c` such that `A(n) + (1 - c) I` is positive semidefinite on every selected state.
///
/// `A_ij(n) = v sqrt(r_i r_j) (1 - r_j(n + e_i) / r_j(n))` over cells with `r_i(n) > 0`.
/// Off the diagonal this is `v sqrt(r_i r_j) (1 - exp(-Phi_ij))`; on the diagonal the
/// cap enters through `r_i(n + e_i)`.
pub fn coercivity_constant_certificate(model: &LatticeModel, sel: &StateSelection) -> Result<CertificateReport> {
    let states = selected(model, sel)?;
    let v = model.cell_volume();
    let z = model.z();
    let n = model.cell_count();
    let mut min_val = f64::INFINITY;
    let mut min_unc = f64::INFINITY;
    let mut worst = Vec::new();
    let mut form_res: f64 = 0.0;
    let mut sym_res: f64 = 0.0;
    for &p in &states {
        let occ = model.occupancy(p);
        let r: Vec<f64> = (0..n).map(|i| model.intensity(&occ, i)).collect();
        // r_j(n + e_i), row i
        let mut shifted = vec![0.0; n * n];
        let mut up = occ.clone();
        for i in 0..n {
            up[i] += 1;
            for j in 0..n {
                shifted[i * n + j] = model.intensity(&up, j);
            }
            up[i] -= 1;
        }
        let live: Vec<usize> = (0..n).filter(|&i| r[i] > 0.0).collect();
        let a = Mat::<f64>::from_fn(live.len(), live.len(), |a, b| {
            let (i, j) = (live[a], live[b]);
            v * (r[i] * r[j]).sqrt() * (1.0 - shifted[i * n + j] / r[j])
        });
        for (a_i, &i) in live.iter().enumerate() {
            for (b_i, &j) in live.iter().enumerate() {
                let kernel = v * v * r[i] * (r[j] - shifted[i * n + j]);
                let via_a = (v * r[i]).sqrt() * a[(a_i, b_i)] * (v * r[j]).sqrt();
                let scale = v * v * r[i] * r[j];
                form_res = form_res.max((kernel - via_a).abs() / scale);
                if i != j {
                    let sym = r[i] * shifted[i * n + j] - r[j] * shifted[j * n + i];
                    sym_res = sym_res.max(sym.abs() / (r[i] * r[j]));
                }
            }
        }
        let lam = min_eig(a)?;
        if lam < min_val {
            min_val = lam;
            worst = occ.clone();
        }
        let e: Vec<f64> = (0..n).map(|i| (-0.5 * model.local_energy(&occ, i)).exp()).collect();
        let unc = Mat::<f64>::from_fn(n, n, |i, j| {
            let g = if model.phi(i, j) == f64::INFINITY {
                1.0
            } else {
                -(-model.phi(i, j)).exp_m1()
            };
            v * z * e[i] * e[j] * g
        });
        min_unc = min_unc.min(min_eig(unc)?);
    }
    let min_val = if states.is_empty() { 0.0 } else { min_val };
    let raw = 1.0 + min_val;
    Ok(CertificateReport {
        certified_c: raw.clamp(0.0, 1.0),
        unclipped_c: raw,
        min_eigenvalue: min_val,
        worst_state: worst,
        states_checked: states.len(),
        uncapped_c: (1.0 + if states.is_empty() { 0.0 } else { min_unc }).clamp(0.0, 1.0),
        kernel_form_residual: form_res,
        kernel_symmetry_residual: sym_res,
    })
}

/// Exact gap, kernel certificate and the high-temperature bound for `Phi = Phi1 + Phi2`.
///
/// `bound_c = 1 - max_i rho_i * max_i sum_j v exp(-Phi2_ij) |1 - exp(-Phi1_ij)|` with
/// `rho_i = z E[exp(-E_i)]`.
pub fn gap_vs_bounds(model: &LatticeModel, phi1: &[f64], phi2: &[f64]) -> Result<GapReport> {
    let n = model.cell_count();
    ensure(phi1.len() == n * n && phi2.len() == n * n, || {
        format!("tables must have {} entries", n * n)
    })?;
    for k in 0..n * n {
        let sum = phi1[k] + phi2[k];
        let have = model.table()[k];
        let ok = (sum == have) || (sum - have).abs() <= 1e-12 * (1.0 + have.abs());
        ensure(ok, || format!("Phi1 + Phi2 differs from the model table at entry {k}"))?;
    }
    let mut report = spectral_gap_exact(model)?;
    let cert = coercivity_constant_certificate(model, &StateSelection::All)?;
    let rho = rho1_exact(model);
    let v = model.cell_volume();
    let row_sum = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let k = i * n + j;
                    let damp = (-phi2[k]).exp();
                    let m1 = if phi1[k] == f64::INFINITY {
                        1.0
                    } else {
                        (-phi1[k]).exp_m1().abs()
                    };
                    if damp == 0.0 {
                        0.0
                    } else {
                        v * damp * m1
                    }
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let rho_max = rho.max_gnz();
    let bound = 1.0 - rho_max * row_sum;
    report.certified_c = Some(cert.certified_c);
    report.bound_c = Some(bound);
    let r = &mut report.residuals;
    r.insert("gap_minus_certified_c".into(), report.gap - cert.certified_c);
    r.insert("gap_minus_bound_c".into(), report.gap - bound);
    r.insert("rho1_max_gnz".into(), rho_max);
    r.insert(
        "rho1_max_density".into(),
        rho.density.iter().cloned().fold(0.0, f64::max),
    );
    r.insert("rho1_capped_mismatch".into(), rho.capped_mismatch());
    r.insert("kernel_row_sum".into(), row_sum);
    r.insert("kernel_form_residual".into(), cert.kernel_form_residual);
    if report.gap < cert.certified_c - 1e-9 {
        report.warnings.push(format!(
            "exact gap {} is below the certified constant {}",
            report.gap, cert.certified_c
        ));
    }
    if bound > 0.0 && report.gap < bound - 1e-9 {
        report.warnings.push(format!(
            "exact gap {} is below the high-temperature bound {bound}",
            report.gap
        ));
    }
    Ok(report)
}
