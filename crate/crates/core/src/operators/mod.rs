//! Generator `L`, carré du champ `Gamma` and its iterate `Gamma_2`, evaluated
//! pointwise with the birth integral replaced by a weighted node sum.
//!
//! Everything here is written against [`BirthDeath`], so the same code serves
//! the continuum box (with a [`Quadrature`]) and the lattice models.

mod continuum;

use serde::Serialize;

pub use continuum::{ContinuumModel, Quadrature};

/// A birth-and-death structure: unit death rate per particle, birth
/// intensity `r(x, state)` at the nodes of a quadrature with common weight.
pub trait BirthDeath {
    type State: Clone;
    type Site: Clone + PartialEq;

    /// Distinct occupied sites with their multiplicities.
    fn deaths(&self, s: &Self::State) -> Vec<(Self::Site, f64)>;
    /// `state - delta_x`; `x` must be occupied.
    fn remove(&self, s: &Self::State, x: &Self::Site) -> Self::State;
    /// `state + delta_x`.
    fn add(&self, s: &Self::State, x: &Self::Site) -> Self::State;
    /// Birth intensity `r(x, state)`.
    fn intensity(&self, s: &Self::State, x: &Self::Site) -> f64;
    /// Quadrature nodes for the birth integral.
    fn nodes(&self) -> &[Self::Site];
    /// Common node weight `v`.
    fn node_weight(&self) -> f64;
}

/// Borrowed state function.
pub type StateFn<'a, S> = &'a dyn Fn(&S) -> f64;

/// `D_x^- F(s) = F(s - delta_x) - F(s)`.
pub fn d_minus<M: BirthDeath>(m: &M, f: StateFn<M::State>, s: &M::State, x: &M::Site) -> f64 {
    f(&m.remove(s, x)) - f(s)
}

/// `D_x^+ F(s) = F(s) - F(s + delta_x)`.
pub fn d_plus<M: BirthDeath>(m: &M, f: StateFn<M::State>, s: &M::State, x: &M::Site) -> f64 {
    f(s) - f(&m.add(s, x))
}

/// `LF = sum_{x in s} D_x^- F - v sum_u r(u, s) D_u^+ F`.
pub fn apply_l<M: BirthDeath>(m: &M, f: StateFn<M::State>, s: &M::State) -> f64 {
    let fs = f(s);
    let death: f64 = m.deaths(s).iter().map(|(x, k)| k * (f(&m.remove(s, x)) - fs)).sum();
    let v = m.node_weight();
    let birth: f64 = m
        .nodes()
        .iter()
        .map(|u| {
            let r = m.intensity(s, u);
            if r == 0.0 {
                0.0
            } else {
                r * (fs - f(&m.add(s, u)))
            }
        })
        .sum();
    death - v * birth
}

/// `Gamma^-(F, G) = 1/2 sum_{x in s} D_x^- F D_x^- G`.
pub fn gamma_minus<M: BirthDeath>(m: &M, f: StateFn<M::State>, g: StateFn<M::State>, s: &M::State) -> f64 {
    let (fs, gs) = (f(s), g(s));
    0.5 * m
        .deaths(s)
        .iter()
        .map(|(x, k)| {
            let t = m.remove(s, x);
            k * (f(&t) - fs) * (g(&t) - gs)
        })
        .sum::<f64>()
}

/// `Gamma^+(F, G) = 1/2 v sum_u r(u, s) D_u^+ F D_u^+ G`.
pub fn gamma_plus<M: BirthDeath>(m: &M, f: StateFn<M::State>, g: StateFn<M::State>, s: &M::State) -> f64 {
    let (fs, gs) = (f(s), g(s));
    0.5 * m.node_weight()
        * m.nodes()
            .iter()
            .map(|u| {
                let r = m.intensity(s, u);
                if r == 0.0 {
                    return 0.0;
                }
                let t = m.add(s, u);
                r * (fs - f(&t)) * (gs - g(&t))
            })
            .sum::<f64>()
}

/// `Gamma = Gamma^- + Gamma^+`.
pub fn gamma<M: BirthDeath>(m: &M, f: StateFn<M::State>, g: StateFn<M::State>, s: &M::State) -> f64 {
    gamma_minus(m, f, g, s) + gamma_plus(m, f, g, s)
}

/// `Gamma(F, G) = 1/2 (L(FG) - F LG - G LF)`, evaluated literally.
pub fn gamma_by_definition<M: BirthDeath>(m: &M, f: StateFn<M::State>, g: StateFn<M::State>, s: &M::State) -> f64 {
    let fg = |t: &M::State| f(t) * g(t);
    0.5 * (apply_l(m, &fg, s) - f(s) * apply_l(m, g, s) - g(s) * apply_l(m, f, s))
}

/// `Gamma_2(F, F) = 1/2 L Gamma(F, F) - Gamma(F, LF)`, evaluated literally.
pub fn gamma2_definition<M: BirthDeath>(m: &M, f: StateFn<M::State>, s: &M::State) -> f64 {
    let gam = |t: &M::State| gamma(m, f, f, t);
    let lf = |t: &M::State| apply_l(m, f, t);
    0.5 * apply_l(m, &gam, s) - gamma(m, f, &lf, s)
}

/// Summands of the pointwise representation of `Gamma_2`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Gamma2Terms {
    /// `1/2 Gamma(F, F)`.
    pub half_gamma: f64,
    /// `Gamma^+(F, F)`.
    pub gamma_plus: f64,
    /// `1/4 sum_x sum_{y in s - x} (D_x^- D_y^- F)^2`.
    pub death_death: f64,
    /// `1/2 sum_{y in s} int r(x) (D_x^+ D_y^- F)^2`.
    pub birth_death: f64,
    /// `1/4 int sum_{x in s} D_x^- r(y) [..]`.
    pub death_cross: f64,
    /// `1/4 int int r(x) r(y) (D_x^+ D_y^+ F)^2`.
    pub birth_birth: f64,
    /// `1/4 int int r(x) D_x^+ r(y) [..]`.
    pub birth_cross: f64,
}

impl Gamma2Terms {
    pub fn total(&self) -> f64 {
        self.half_gamma
            + self.gamma_plus
            + self.death_death
            + self.birth_death
            + self.death_cross
            + self.birth_birth
            + self.birth_cross
    }

    pub fn abs_total(&self) -> f64 {
        [
            self.half_gamma,
            self.gamma_plus,
            self.death_death,
            self.birth_death,
            self.death_cross,
            self.birth_birth,
            self.birth_cross,
        ]
        .iter()
        .map(|t| t.abs())
        .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gamma2Report {
    pub value_by_definition: f64,
    /// Representation with `r(y, s)` in the double-birth term.
    pub value_by_formula: f64,
    /// Rearranged representation with `r(y, s + delta_x)` in the double-birth term.
    pub value_rearranged: f64,
    /// `|value_by_definition - value_by_formula|`.
    pub residual: f64,
    /// `residual` divided by `max(|definition|, sum of |terms|)`.
    pub relative_residual: f64,
    pub terms: Gamma2Terms,
    pub terms_rearranged: Gamma2Terms,
}

/// Evaluates both closed representations of `Gamma_2(F, F)` term by term and
/// compares with [`gamma2_definition`].
///
/// The rearranged form only agrees with the definition after averaging over
/// the reversible measure; its pointwise value is reported, not compared.
pub fn gamma2_formula<M: BirthDeath>(m: &M, f: StateFn<M::State>, s: &M::State) -> Gamma2Report {
    let v = m.node_weight();
    let nodes = m.nodes();
    let fs = f(s);
    let deaths = m.deaths(s);

    let r_s: Vec<f64> = nodes.iter().map(|u| m.intensity(s, u)).collect();
    let plus_s: Vec<M::State> = nodes.iter().map(|u| m.add(s, u)).collect();
    let f_plus: Vec<f64> = plus_s.iter().map(f).collect();
    let dplus_s: Vec<f64> = f_plus.iter().map(|fp| fs - fp).collect();

    let mut t = Gamma2Terms {
        half_gamma: 0.5 * gamma(m, f, f, s),
        gamma_plus: gamma_plus(m, f, f, s),
        ..Default::default()
    };

    for (x, kx) in &deaths {
        let sx = m.remove(s, x);
        let fsx = f(&sx);
        let dminus_x = fsx - fs;

        // death-death: y over s - delta_x
        for (y, ky) in m.deaths(&sx) {
            let sy = m.remove(s, &y);
            let sxy = m.remove(&sx, &y);
            let dd = f(&sxy) - f(&sy) - fsx + fs;
            t.death_death += 0.25 * kx * ky * dd * dd;
        }

        // birth-death: D_u^+ D_x^- F(s) = D_x^- F(s) - D_x^- F(s + u)
        for (i, su) in plus_s.iter().enumerate() {
            if r_s[i] == 0.0 {
                continue;
            }
            let dm_at_su = f(&m.remove(su, x)) - f_plus[i];
            let bd = dminus_x - dm_at_su;
            t.birth_death += 0.5 * kx * v * r_s[i] * bd * bd;
        }

        // death cross term
        for (i, u) in nodes.iter().enumerate() {
            let dr = m.intensity(&sx, u) - r_s[i];
            if dr == 0.0 {
                continue;
            }
            let dplus_at_sx = fsx - f(&m.add(&sx, u));
            t.death_cross += 0.25 * kx * v * dr * (dplus_at_sx * dplus_at_sx + 2.0 * dplus_at_sx * dminus_x);
        }
    }

    let mut rearranged = t.clone();
    for i in 0..nodes.len() {
        let rx = r_s[i];
        if rx == 0.0 {
            continue;
        }
        let sx = &plus_s[i];
        let fsx = f_plus[i];
        for (j, y) in nodes.iter().enumerate() {
            let ry = r_s[j];
            let ry_at_sx = m.intensity(sx, y);
            let dplus_y_at_sx = fsx - f(&m.add(sx, y));
            // D_x^+ D_y^+ F(s) = D_y^+ F(s) - D_y^+ F(s + x)
            let pp = dplus_s[j] - dplus_y_at_sx;
            let dr = ry - ry_at_sx;
            t.birth_birth += 0.25 * v * v * rx * ry * pp * pp;
            t.birth_cross +=
                0.25 * v * v * rx * dr * (-(dplus_y_at_sx * dplus_y_at_sx) + 2.0 * dplus_y_at_sx * dplus_s[i]);
            rearranged.birth_birth += 0.25 * v * v * rx * ry_at_sx * pp * pp;
            rearranged.birth_cross +=
                0.25 * v * v * rx * dr * (-(dplus_s[j] * dplus_s[j]) + 2.0 * dplus_s[j] * dplus_s[i]);
        }
    }

    let def = gamma2_definition(m, f, s);
    let formula = t.total();
    let residual = (def - formula).abs();
    let scale = def.abs().max(t.abs_total());
    Gamma2Report {
        value_by_definition: def,
        value_by_formula: formula,
        value_rearranged: rearranged.total(),
        residual,
        relative_residual: if scale > 0.0 { residual / scale } else { residual },
        terms: t,
        terms_rearranged: rearranged,
    }
}

/// Residuals of the four product rules for sums over the configuration and
/// for intensity-weighted birth integrals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductRuleResiduals {
    pub plus_sum: f64,
    /// `None` when `x` is not occupied.
    pub minus_sum: Option<f64>,
    pub plus_integral: f64,
    pub minus_integral: Option<f64>,
}

impl ProductRuleResiduals {
    pub fn max(&self) -> f64 {
        [
            Some(self.plus_sum),
            self.minus_sum,
            Some(self.plus_integral),
            self.minus_integral,
        ]
        .iter()
        .flatten()
        .fold(0.0, |a: f64, b| a.max(b.abs()))
    }
}

/// Family `H_y(state)` indexed by sites.
pub type SiteFamily<'a, M> = &'a dyn Fn(&<M as BirthDeath>::Site, &<M as BirthDeath>::State) -> f64;

/// Evaluates both sides of the four product rules at `(s, x)` independently.
pub fn product_rule_check<M: BirthDeath>(m: &M, h: SiteFamily<M>, s: &M::State, x: &M::Site) -> ProductRuleResiduals {
    let v = m.node_weight();
    let sum_over = |t: &M::State| -> f64 { m.deaths(t).iter().map(|(y, k)| k * h(y, t)).sum() };
    let integral = |t: &M::State| -> f64 { v * m.nodes().iter().map(|y| m.intensity(t, y) * h(y, t)).sum::<f64>() };

    let sp = m.add(s, x);
    let lhs1 = sum_over(s) - sum_over(&sp);
    let rhs1 = m.deaths(s).iter().map(|(y, k)| k * (h(y, s) - h(y, &sp))).sum::<f64>() - h(x, &sp);

    let lhs3 = integral(s) - integral(&sp);
    let rhs3 = v * m
        .nodes()
        .iter()
        .map(|y| {
            let r = m.intensity(s, y);
            let dr = r - m.intensity(&sp, y);
            r * (h(y, s) - h(y, &sp)) + dr * h(y, &sp)
        })
        .sum::<f64>();

    let occupied = m.deaths(s).iter().any(|(y, _)| y == x);
    let (minus_sum, minus_integral) = if occupied {
        let sm = m.remove(s, x);
        let lhs2 = sum_over(&sm) - sum_over(s);
        let rhs2 = m
            .deaths(&sm)
            .iter()
            .map(|(y, k)| k * (h(y, &sm) - h(y, s)))
            .sum::<f64>()
            - h(x, s);
        let lhs4 = integral(&sm) - integral(s);
        let rhs4 = v * m
            .nodes()
            .iter()
            .map(|y| {
                let r = m.intensity(s, y);
                let dr = m.intensity(&sm, y) - r;
                r * (h(y, &sm) - h(y, s)) + dr * h(y, &sm)
            })
            .sum::<f64>();
        (Some((lhs2 - rhs2).abs()), Some((lhs4 - rhs4).abs()))
    } else {
        (None, None)
    };

    ProductRuleResiduals {
        plus_sum: (lhs1 - rhs1).abs(),
        minus_sum,
        plus_integral: (lhs3 - rhs3).abs(),
        minus_integral,
    }
}

#[cfg(test)]
mod tests;
