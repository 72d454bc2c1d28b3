//! Pair interaction on the torus.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::geometry::{Point, TorusBox};
use crate::potentials::{PairPotential, PeriodizedProfile, PotentialKind, DEFAULT_TAPER};

/// How a potential on `R^d` is carried over to the torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Boundary {
    /// `phi` at the minimum-image displacement, zero beyond the cutoff.
    MinimumImage,
    /// Special-class parts use `-ln(1 - f_T)` with `f_T` the windowed image sum of `f`;
    /// all other parts use the minimum image.
    Periodized { taper: f64 },
}

impl Default for Boundary {
    fn default() -> Self {
        Boundary::Periodized { taper: DEFAULT_TAPER }
    }
}

#[derive(Debug, Clone)]
enum Part {
    MinImage { potential: PairPotential, factor: f64 },
    Periodized { profile: PeriodizedProfile, factor: f64 },
}

/// `phi_T(displacement)` on a given box.
#[derive(Debug, Clone)]
pub struct TorusInteraction {
    parts: Vec<Part>,
}

impl TorusInteraction {
    pub fn new(p: &PairPotential, bx: TorusBox, boundary: Boundary) -> Result<Self> {
        let mut parts = Vec::new();
        collect(p, 1.0, bx, boundary, &mut parts)?;
        Ok(TorusInteraction { parts })
    }

    /// Interaction at a minimum-image displacement; `+inf` is absorbing.
    pub fn eval(&self, disp: &Point) -> f64 {
        let x = disp.coords();
        let mut e = 0.0;
        for part in &self.parts {
            let v = match part {
                Part::MinImage { potential, factor } => factor * potential.eval_truncated(x),
                Part::Periodized { profile, factor } => {
                    let f = profile.eval(x);
                    if f < 0.5 {
                        factor * -(-f).ln_1p()
                    } else {
                        let om = profile.one_minus(x);
                        if om <= 0.0 {
                            f64::INFINITY
                        } else {
                            factor * -om.ln()
                        }
                    }
                }
            };
            e += v;
            if e == f64::INFINITY {
                return e;
            }
        }
        e
    }

    /// `1 - exp(-phi_T)` for a single periodized special-class part, when that is the whole interaction.
    pub fn periodized_mayer(&self, disp: &Point) -> Option<f64> {
        match self.parts.as_slice() {
            [Part::Periodized { profile, factor }] if *factor == 1.0 => Some(profile.eval(disp.coords()).min(1.0)),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// Distance beyond which the interaction vanishes; infinite when any part is periodized.
    pub fn range(&self) -> f64 {
        self.parts
            .iter()
            .map(|p| match p {
                Part::MinImage { potential, .. } => potential.cutoff(),
                Part::Periodized { .. } => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }
}

fn collect(p: &PairPotential, factor: f64, bx: TorusBox, boundary: Boundary, out: &mut Vec<Part>) -> Result<()> {
    if p.is_zero() {
        return Ok(());
    }
    match (p.kind(), boundary) {
        (PotentialKind::Sum(items), _) => {
            for q in items {
                collect(q, factor, bx, boundary, out)?;
            }
            Ok(())
        }
        (PotentialKind::Scaled { factor: f, inner }, _) => collect(inner, factor * f, bx, boundary, out),
        (PotentialKind::SpecialClass { profile, .. }, Boundary::Periodized { taper }) => {
            ensure(taper > 0.0 && taper.is_finite(), || {
                format!("taper must be positive, got {taper}")
            })?;
            out.push(Part::Periodized {
                profile: PeriodizedProfile::new(profile.clone(), bx.dim(), bx.side(), taper),
                factor,
            });
            Ok(())
        }
        _ => {
            let rc = p.cutoff();
            ensure(bx.side() > 2.0 * rc, || {
                format!(
                    "box side {} must exceed twice the cutoff radius {rc}; use a periodized boundary or a larger box",
                    bx.side()
                )
            })?;
            out.push(Part::MinImage {
                potential: p.clone(),
                factor,
            });
            Ok(())
        }
    }
}
