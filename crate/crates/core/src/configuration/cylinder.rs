//! Cylinder functions `F(gamma) = g(<psi_1, gamma>, .., <psi_N, gamma>)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Configuration;
use crate::error::{ensure, Error, Result};
use crate::geometry::{Point, TorusBox};

/// A compactly supported bump `psi` on the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "bump", rename_all = "kebab-case")]
pub enum Bump {
    /// `amplitude * (1 + cos(pi |x - center| / radius)) / 2` inside the radius.
    Cosine {
        center: Vec<f64>,
        radius: f64,
        amplitude: f64,
    },
    /// `amplitude * exp(-|x - center|^2 / (2 width^2))`, zero beyond `cutoff`.
    Gaussian {
        center: Vec<f64>,
        width: f64,
        amplitude: f64,
        cutoff: f64,
    },
}

impl Bump {
    fn validate(&self, dim: usize) -> Result<()> {
        let (center, ok) = match self {
            Bump::Cosine {
                center,
                radius,
                amplitude,
            } => (center, *radius > 0.0 && amplitude.is_finite()),
            Bump::Gaussian {
                center,
                width,
                amplitude,
                cutoff,
            } => (center, *width > 0.0 && *cutoff > 0.0 && amplitude.is_finite()),
        };
        ensure(center.len() == dim, || {
            format!("bump center has {} coordinates, expected {dim}", center.len())
        })?;
        ensure(ok, || format!("invalid bump parameters: {self:?}"))
    }

    pub fn eval(&self, bx: &TorusBox, x: &Point) -> f64 {
        match self {
            Bump::Cosine {
                center,
                radius,
                amplitude,
            } => {
                let d = bx.distance(x, &Point::new(center));
                if d >= *radius {
                    0.0
                } else {
                    amplitude * 0.5 * (1.0 + (std::f64::consts::PI * d / radius).cos())
                }
            }
            Bump::Gaussian {
                center,
                width,
                amplitude,
                cutoff,
            } => {
                let d = bx.distance(x, &Point::new(center));
                if d > *cutoff {
                    0.0
                } else {
                    amplitude * (-(d * d) / (2.0 * width * width)).exp()
                }
            }
        }
    }
}

/// The outer map `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "kebab-case")]
pub enum OuterMap {
    /// `intercept + sum_k coefficients[k] u_k`.
    Affine { intercept: f64, coefficients: Vec<f64> },
    /// `sum_terms c * prod_{k in indices} u_k`, at most three factors per term.
    Polynomial { terms: Vec<(f64, Vec<usize>)> },
    /// `amplitude * s(offset + sum_k weights[k] u_k)` with `s(u) = u / sqrt(1 + u^2)`.
    Sigmoid {
        amplitude: f64,
        offset: f64,
        weights: Vec<f64>,
    },
}

impl OuterMap {
    fn validate(&self, n: usize) -> Result<()> {
        match self {
            OuterMap::Affine { coefficients, .. } => ensure(coefficients.len() == n, || {
                format!("affine map needs {n} coefficients, got {}", coefficients.len())
            }),
            OuterMap::Polynomial { terms } => {
                for (_, idx) in terms {
                    ensure(idx.len() <= 3, || "polynomial terms have degree at most 3".into())?;
                    ensure(idx.iter().all(|&k| k < n), || {
                        format!("polynomial index out of range 0..{n}")
                    })?;
                }
                Ok(())
            }
            OuterMap::Sigmoid { weights, .. } => ensure(weights.len() == n, || {
                format!("sigmoid map needs {n} weights, got {}", weights.len())
            }),
        }
    }

    pub fn apply(&self, u: &[f64]) -> f64 {
        match self {
            OuterMap::Affine {
                intercept,
                coefficients,
            } => intercept + coefficients.iter().zip(u).map(|(c, v)| c * v).sum::<f64>(),
            OuterMap::Polynomial { terms } => terms
                .iter()
                .map(|(c, idx)| c * idx.iter().map(|&k| u[k]).product::<f64>())
                .sum(),
            OuterMap::Sigmoid {
                amplitude,
                offset,
                weights,
            } => {
                let s = offset + weights.iter().zip(u).map(|(w, v)| w * v).sum::<f64>();
                amplitude * s / (1.0 + s * s).sqrt()
            }
        }
    }
}

/// `F(gamma) = g(<psi_1, gamma>, .., <psi_N, gamma>)` on a fixed box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderFunction {
    bx: TorusBox,
    bumps: Vec<Bump>,
    map: OuterMap,
}

impl CylinderFunction {
    pub fn new(bx: TorusBox, bumps: Vec<Bump>, map: OuterMap) -> Result<Self> {
        ensure(!bumps.is_empty(), || {
            "a cylinder function needs at least one bump".into()
        })?;
        for b in &bumps {
            b.validate(bx.dim())?;
        }
        map.validate(bumps.len())?;
        Ok(CylinderFunction { bx, bumps, map })
    }

    /// Random Gaussian bumps and a random outer map from one of the three families.
    pub fn random(bx: TorusBox, n_bumps: usize, rng: &mut impl Rng) -> Result<Self> {
        ensure(n_bumps >= 1, || "a cylinder function needs at least one bump".into())?;
        let side = bx.side();
        let bumps: Vec<Bump> = (0..n_bumps)
            .map(|_| Bump::Gaussian {
                center: (0..bx.dim()).map(|_| rng.gen_range(0.0..side)).collect(),
                width: side * rng.gen_range(0.07..0.25),
                amplitude: rng.gen_range(-1.0..1.0),
                cutoff: 0.48 * side,
            })
            .collect();
        let map = match rng.gen_range(0..3) {
            0 => OuterMap::Affine {
                intercept: rng.gen_range(-1.0..1.0),
                coefficients: (0..n_bumps).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            },
            1 => OuterMap::Polynomial {
                terms: (0..5)
                    .map(|_| {
                        let deg = rng.gen_range(0..=3);
                        (
                            rng.gen_range(-1.0..1.0),
                            (0..deg).map(|_| rng.gen_range(0..n_bumps)).collect(),
                        )
                    })
                    .collect(),
            },
            _ => OuterMap::Sigmoid {
                amplitude: rng.gen_range(0.5..2.0),
                offset: rng.gen_range(-0.5..0.5),
                weights: (0..n_bumps).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            },
        };
        Self::new(bx, bumps, map)
    }

    /// `F(gamma) = <psi, gamma>`.
    pub fn linear(bx: TorusBox, bump: Bump) -> Result<Self> {
        Self::new(
            bx,
            vec![bump],
            OuterMap::Affine {
                intercept: 0.0,
                coefficients: vec![1.0],
            },
        )
    }

    pub fn bx(&self) -> &TorusBox {
        &self.bx
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    pub fn map(&self) -> &OuterMap {
        &self.map
    }

    /// `(psi_1(x), .., psi_N(x))`.
    pub fn psi(&self, x: &Point) -> Vec<f64> {
        self.bumps.iter().map(|b| b.eval(&self.bx, x)).collect()
    }

    /// `(<psi_1, gamma>, .., <psi_N, gamma>)`.
    pub fn pairings(&self, g: &Configuration) -> Vec<f64> {
        let mut u = vec![0.0; self.bumps.len()];
        for x in g.points() {
            for (uk, b) in u.iter_mut().zip(&self.bumps) {
                *uk += b.eval(&self.bx, x);
            }
        }
        u
    }

    pub fn eval(&self, g: &Configuration) -> f64 {
        self.map.apply(&self.pairings(g))
    }

    /// `F(gamma - delta_x) - F(gamma)`.
    pub fn d_minus(&self, g: &Configuration, x: &Point) -> Result<f64> {
        if !g.contains(x) {
            return Err(Error::PointNotInConfiguration(x.to_string()));
        }
        Ok(self.eval(&g.remove(x)?) - self.eval(g))
    }

    /// `F(gamma) - F(gamma + delta_x)`.
    pub fn d_plus(&self, g: &Configuration, x: &Point) -> f64 {
        self.eval(g) - self.eval(&g.insert(*x))
    }
}

/// `F(gamma)`.
pub fn eval_cylinder(f: &CylinderFunction, g: &Configuration) -> f64 {
    f.eval(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bx() -> TorusBox {
        TorusBox::new(1, 10.0).unwrap()
    }

    fn bump(c: f64) -> Bump {
        Bump::Cosine {
            center: vec![c],
            radius: 2.0,
            amplitude: 1.5,
        }
    }

    fn pts(xs: &[f64]) -> Configuration {
        Configuration::from_points(xs.iter().map(|&x| Point::on_line(x)).collect())
    }

    #[test]
    fn linear_differences() {
        let f = CylinderFunction::linear(bx(), bump(3.0)).unwrap();
        let g = pts(&[2.5, 4.0]);
        let x = Point::on_line(2.5);
        let psi = bump(3.0).eval(&bx(), &x);
        assert!((f.d_minus(&g, &x).unwrap() + psi).abs() < 1e-15);
        assert!((f.d_plus(&g, &Point::on_line(3.7)) + bump(3.0).eval(&bx(), &Point::on_line(3.7))).abs() < 1e-15);
        assert!(
            (f.d_plus(&Configuration::empty(), &Point::on_line(3.7)) - f.d_plus(&g, &Point::on_line(3.7))).abs()
                < 1e-15
        );
    }

    #[test]
    fn constant_has_zero_differences() {
        let f = CylinderFunction::new(
            bx(),
            vec![bump(1.0)],
            OuterMap::Affine {
                intercept: 2.0,
                coefficients: vec![0.0],
            },
        )
        .unwrap();
        let g = pts(&[1.0]);
        assert_eq!(f.eval(&Configuration::empty()), 2.0);
        assert_eq!(f.d_minus(&g, &Point::on_line(1.0)).unwrap(), 0.0);
        assert_eq!(f.d_plus(&g, &Point::on_line(1.3)), 0.0);
        assert!(f.d_minus(&g, &Point::on_line(1.5)).is_err());
    }

    #[test]
    fn square_of_pairing_two_points() {
        let f = CylinderFunction::new(
            bx(),
            vec![bump(3.0)],
            OuterMap::Polynomial {
                terms: vec![(1.0, vec![0, 0])],
            },
        )
        .unwrap();
        let (x, y) = (Point::on_line(2.2), Point::on_line(3.9));
        let g = Configuration::from_points(vec![x, y]);
        let (px, py) = (bump(3.0).eval(&bx(), &x), bump(3.0).eval(&bx(), &y));
        let want = py * py - (px + py) * (px + py);
        assert!((f.d_minus(&g, &x).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn single_point_and_polynomial() {
        let f = CylinderFunction::linear(bx(), bump(3.0)).unwrap();
        let x = Point::on_line(3.4);
        assert_eq!(f.eval(&Configuration::from_points(vec![x])), bump(3.0).eval(&bx(), &x));
        let bumps = vec![bump(2.0), bump(5.0)];
        let map = OuterMap::Polynomial {
            terms: vec![(0.5, vec![]), (2.0, vec![0]), (-1.0, vec![0, 1]), (0.25, vec![1, 1, 1])],
        };
        let f2 = CylinderFunction::new(bx(), bumps.clone(), map).unwrap();
        let g = pts(&[1.5, 3.0, 4.5]);
        let u0: f64 = g.points().iter().map(|p| bumps[0].eval(&bx(), p)).sum();
        let u1: f64 = g.points().iter().map(|p| bumps[1].eval(&bx(), p)).sum();
        let want = 0.5 + 2.0 * u0 - u0 * u1 + 0.25 * u1 * u1 * u1;
        assert!((f2.eval(&g) - want).abs() < 1e-14);
    }

    #[test]
    fn sigmoid_is_bounded() {
        let f = CylinderFunction::new(
            bx(),
            vec![bump(2.0)],
            OuterMap::Sigmoid {
                amplitude: 3.0,
                offset: 0.1,
                weights: vec![50.0],
            },
        )
        .unwrap();
        let g = pts(&[2.0; 20]);
        assert!(f.eval(&g).abs() < 3.0);
    }

    #[test]
    fn rejects_high_degree() {
        let map = OuterMap::Polynomial {
            terms: vec![(1.0, vec![0, 0, 0, 0])],
        };
        assert!(CylinderFunction::new(bx(), vec![bump(1.0)], map).is_err());
    }

    fn random_function(seed: u64) -> CylinderFunction {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let bumps: Vec<Bump> = (0..3)
            .map(|_| Bump::Gaussian {
                center: vec![rng.gen_range(0.0..10.0)],
                width: rng.gen_range(0.3..2.0),
                amplitude: rng.gen_range(-1.0..1.0),
                cutoff: 4.0,
            })
            .collect();
        let terms = (0..4)
            .map(|_| {
                let deg = rng.gen_range(0..=3);
                (
                    rng.gen_range(-1.0..1.0),
                    (0..deg).map(|_| rng.gen_range(0..3)).collect(),
                )
            })
            .collect();
        CylinderFunction::new(bx(), bumps, OuterMap::Polynomial { terms }).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn pivot_identity(seed in 0u64..1_000_000, xs in prop::collection::vec(0.0..10.0f64, 0..5), x in 0.0..10.0f64) {
            let f = random_function(seed);
            let g = pts(&xs);
            let p = Point::on_line(x);
            let with = g.insert(p);
            let lhs = f.d_plus(&g, &p);
            let rhs = f.d_minus(&with, &p).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-13);
        }
    }
}
