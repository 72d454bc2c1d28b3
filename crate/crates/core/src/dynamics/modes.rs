//! Density Fourier modes used as observables for gap estimation.

use std::f64::consts::PI;

use serde::Serialize;

use crate::configuration::Configuration;
use crate::geometry::TorusBox;

/// `sum_{x in gamma} cos(2 pi k.x / L)` or the same with `sin`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityMode {
    pub k: Vec<i64>,
    pub sine: bool,
}

impl DensityMode {
    pub fn name(&self) -> String {
        let ks: Vec<String> = self.k.iter().map(|k| k.to_string()).collect();
        format!("{}({})", if self.sine { "sin" } else { "cos" }, ks.join(","))
    }

    pub fn eval(&self, bx: &TorusBox, g: &Configuration) -> f64 {
        let w = 2.0 * PI / bx.side();
        g.points()
            .iter()
            .map(|x| {
                let phase: f64 = x.coords().iter().zip(&self.k).map(|(c, &k)| w * k as f64 * c).sum();
                if self.sine {
                    phase.sin()
                } else {
                    phase.cos()
                }
            })
            .sum()
    }
}

/// Modes with `|k_j| <= k_max`, one of each pair `{k, -k}`; `k = 0` is the particle count.
pub fn density_modes(dim: usize, k_max: usize) -> Vec<DensityMode> {
    let span = 2 * k_max as i64 + 1;
    let total = (span as usize).pow(dim as u32);
    let mut out = Vec::new();
    for flat in 0..total {
        let mut rem = flat as i64;
        let k: Vec<i64> = (0..dim)
            .map(|_| {
                let c = rem % span - k_max as i64;
                rem /= span;
                c
            })
            .collect();
        // keep k = 0 and those whose first nonzero component is positive
        match k.iter().find(|&&c| c != 0) {
            None => out.insert(0, DensityMode { k, sine: false }),
            Some(&c) if c > 0 => {
                out.push(DensityMode {
                    k: k.clone(),
                    sine: false,
                });
                out.push(DensityMode { k, sine: true });
            }
            Some(_) => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    #[test]
    fn count_comes_first_and_pairs_are_not_repeated() {
        let modes = density_modes(1, 3);
        assert_eq!(
            modes[0],
            DensityMode {
                k: vec![0],
                sine: false
            }
        );
        assert_eq!(modes.len(), 1 + 2 * 3);
        let two = density_modes(2, 1);
        // 9 wave vectors, 4 representatives besides zero, each with cos and sin
        assert_eq!(two.len(), 1 + 2 * 4);
    }

    #[test]
    fn evaluates_phases() {
        let bx = TorusBox::new(1, 4.0).unwrap();
        let g = Configuration::from_points(vec![Point::on_line(1.0), Point::on_line(2.0)]);
        let c = DensityMode {
            k: vec![1],
            sine: false,
        }
        .eval(&bx, &g);
        let s = DensityMode { k: vec![1], sine: true }.eval(&bx, &g);
        assert!((c - (0.0 + -1.0)).abs() < 1e-15);
        assert!((s - (1.0 + 0.0)).abs() < 1e-15);
        assert_eq!(
            DensityMode {
                k: vec![0],
                sine: false
            }
            .eval(&bx, &g),
            2.0
        );
    }
}
