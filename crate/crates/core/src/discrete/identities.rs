use serde::Serialize;

use super::LatticeModel;
use crate::error::{ensure, Result};
use crate::operators::{apply_l, d_plus, gamma, gamma2_formula, gamma_minus, gamma_plus};

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs() + 1e-300)
}

/// Like [`relative`], with `scale` added to the denominator for sides that can both vanish.
fn relative_to(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs() + scale + 1e-300)
}

/// GNZ residual `|LHS - RHS| / (|LHS| + |RHS|)` for a test function `H(cell, occupancy)`.
///
/// LHS is `E[sum_i n_i H(i, n)]`, RHS is `E[sum_i v r_i(n) H(i, n + e_i)]`.
pub fn gnz_residual(model: &LatticeModel, h: &dyn Fn(usize, &[u8]) -> f64) -> f64 {
    let v = model.cell_volume();
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for (p, &w) in model.weights().iter().enumerate() {
        let mut occ = model.occupancy(p);
        for i in 0..occ.len() {
            if occ[i] > 0 {
                lhs += w * occ[i] as f64 * h(i, &occ);
            }
            let r = model.intensity(&occ, i);
            if r > 0.0 {
                occ[i] += 1;
                rhs += w * v * r * h(i, &occ);
                occ[i] -= 1;
            }
        }
    }
    relative(lhs, rhs)
}

/// Both sides of the coercivity identity and the intermediate equalities, all in expectation.
#[derive(Debug, Clone, Serialize)]
pub struct CoercivityResiduals {
    /// `E[(LF)^2]`.
    pub lhs: f64,
    /// `E[Gamma(F,F)]`.
    pub gamma_term: f64,
    /// `E[sum_x sum_y (D_x^- D_y^- F)^2]`.
    pub death_death: f64,
    /// `E[v^2 sum_x sum_y r(x) (D_x^+ r(y)) D_y^+ F D_x^+ F]`.
    pub cross_term: f64,
    /// `E[(LF)^2]` against the sum of the three terms.
    pub residual: f64,
    /// `E(F,F) = -E[F LF]` against `E[Gamma]`.
    pub dirichlet_vs_gamma: f64,
    /// `E[Gamma]` against `2 E[Gamma^-]` and `2 E[Gamma^+]`, the larger of the two.
    pub gamma_split: f64,
    /// `E[sum_y v sum_x r(x) (D_x^+ D_y^- F)^2]` against `death_death`.
    pub fourth_order_birth_death: f64,
    /// `E[v^2 sum_x sum_y r(x) r(y, n + e_x) (D_x^+ D_y^+ F)^2]` against `death_death`.
    pub fourth_order_birth_birth: f64,
    /// Expectation of the rearranged pointwise representation against `E[(LF)^2]`.
    pub rearranged_expectation: f64,
    /// Generator applied through the sparse matrix against the operator form.
    pub generator_consistency: f64,
}

impl CoercivityResiduals {
    pub fn max(&self) -> f64 {
        [
            self.residual,
            self.dirichlet_vs_gamma,
            self.gamma_split,
            self.fourth_order_birth_death,
            self.fourth_order_birth_birth,
            self.rearranged_expectation,
            self.generator_consistency,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Evaluates the coercivity identity for `F` given by its values over the support.
pub fn coercivity_identity_residual(model: &LatticeModel, values: &[f64]) -> Result<CoercivityResiduals> {
    ensure(values.len() == model.state_count(), || {
        format!(
            "F has {} values, model has {} states",
            values.len(),
            model.state_count()
        )
    })?;
    ensure(values.iter().all(|x| x.is_finite()), || {
        "F must be finite on the support".into()
    })?;
    let f = model.state_fn(values);
    let fr: &dyn Fn(&Vec<u8>) -> f64 = &f;
    let q = model.generator()?;
    let qf = q.apply(values);
    let v = model.cell_volume();
    let n = model.cell_count();

    let mut acc = [0.0f64; 10];
    let mut gen_err: f64 = 0.0;
    for (p, &w) in model.weights().iter().enumerate() {
        let s = model.occupancy(p);
        let lf = apply_l(model, fr, &s);
        gen_err = gen_err.max((lf - qf[p]).abs() / (1.0 + lf.abs()));
        let g = gamma(model, fr, fr, &s);
        let g2 = gamma2_formula(model, fr, &s);
        let dd = 4.0 * g2.terms.death_death;
        let mut cross = 0.0;
        let dp: Vec<f64> = (0..n).map(|x| d_plus(model, fr, &s, &x)).collect();
        for x in 0..n {
            let rx = model.intensity(&s, x);
            if rx == 0.0 {
                continue;
            }
            let sx = {
                let mut t = s.clone();
                t[x] += 1;
                t
            };
            for y in 0..n {
                let dr = model.intensity(&s, y) - model.intensity(&sx, y);
                cross += rx * dr * dp[y] * dp[x];
            }
        }
        cross *= v * v;
        let terms = [
            qf[p] * qf[p],
            g,
            dd,
            cross,
            -values[p] * qf[p],
            gamma_minus(model, fr, fr, &s),
            gamma_plus(model, fr, fr, &s),
            2.0 * g2.terms.birth_death,
            4.0 * g2.terms_rearranged.birth_birth,
            g2.value_rearranged,
        ];
        for (a, t) in acc.iter_mut().zip(terms) {
            *a += w * t;
        }
    }
    let [lhs, gamma_term, death_death, cross_term, dirichlet, gm, gp, bd, bb, rearranged] = acc;
    Ok(CoercivityResiduals {
        lhs,
        gamma_term,
        death_death,
        cross_term,
        residual: relative(lhs, gamma_term + death_death + cross_term),
        dirichlet_vs_gamma: relative(dirichlet, gamma_term),
        gamma_split: relative(gamma_term, 2.0 * gm).max(relative(gamma_term, 2.0 * gp)),
        // both sides vanish for affine F, so they are measured against E(LF)^2
        fourth_order_birth_death: relative_to(bd, death_death, lhs),
        fourth_order_birth_birth: relative_to(bb, death_death, lhs),
        rearranged_expectation: relative(rearranged, lhs),
        generator_consistency: gen_err,
    })
}
