//! Point configurations in a periodic box, Gibbs intensities and cylinder functions.

mod cylinder;
mod interaction;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use crate::geometry::{torus_distance, Point, TorusBox};
pub use cylinder::{eval_cylinder, Bump, CylinderFunction, OuterMap};
pub use interaction::{Boundary, TorusInteraction};

use crate::error::{ensure, Error, Result};
use crate::potentials::PairPotential;

/// A finite multiset of points. Order carries no meaning.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    points: Vec<Point>,
}

impl Configuration {
    pub fn empty() -> Self {
        Configuration::default()
    }

    pub fn from_points(points: Vec<Point>) -> Self {
        Configuration { points }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of copies of `x`.
    pub fn multiplicity(&self, x: &Point) -> usize {
        self.points.iter().filter(|p| *p == x).count()
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.points.contains(x)
    }

    /// `gamma + delta_x`.
    pub fn insert(&self, x: Point) -> Self {
        let mut points = self.points.clone();
        points.push(x);
        Configuration { points }
    }

    /// `gamma - delta_x`; removes one copy.
    pub fn remove(&self, x: &Point) -> Result<Self> {
        let i = self
            .points
            .iter()
            .position(|p| p == x)
            .ok_or_else(|| Error::PointNotInConfiguration(x.to_string()))?;
        let mut points = self.points.clone();
        points.remove(i);
        Ok(Configuration { points })
    }

    pub fn push(&mut self, x: Point) {
        self.points.push(x);
    }

    pub fn swap_remove(&mut self, i: usize) -> Point {
        self.points.swap_remove(i)
    }

    /// Distinct points with their multiplicities, in first-occurrence order.
    pub fn distinct(&self) -> Vec<(Point, usize)> {
        let mut out: Vec<(Point, usize)> = Vec::new();
        for p in &self.points {
            match out.iter_mut().find(|(q, _)| q == p) {
                Some((_, m)) => *m += 1,
                None => out.push((*p, 1)),
            }
        }
        out
    }

    /// Multiset equality.
    pub fn same_multiset(&self, other: &Configuration) -> bool {
        self.len() == other.len() && self.distinct().iter().all(|(p, m)| other.multiplicity(p) == *m)
    }

    /// Union of two configurations.
    pub fn union(&self, other: &Configuration) -> Self {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        Configuration { points }
    }

    /// One row per point, coordinates only.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let dim = self.points.first().map_or(1, |p| p.dim());
        let header: Vec<String> = (1..=dim).map(|a| format!("x{a}")).collect();
        let mut out = header.join(",");
        out.push('\n');
        for p in &self.points {
            let cells: Vec<String> = p.coords().iter().map(|c| format!("{c:?}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        crate::report::write_atomic(path, out.as_bytes())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut points = Vec::new();
        let mut dim = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
            let coords = match parsed {
                Ok(c) => c,
                Err(_) if i == 0 => continue,
                Err(e) => {
                    return Err(Error::Csv {
                        line: i + 1,
                        message: e.to_string(),
                    })
                }
            };
            if coords.is_empty() || coords.len() > crate::geometry::MAX_DIM {
                return Err(Error::Csv {
                    line: i + 1,
                    message: format!("expected 1 to 3 coordinates, got {}", coords.len()),
                });
            }
            if *dim.get_or_insert(coords.len()) != coords.len() {
                return Err(Error::Csv {
                    line: i + 1,
                    message: "inconsistent number of coordinates".into(),
                });
            }
            points.push(Point::new(&coords));
        }
        Ok(Configuration { points })
    }
}

/// Pair potential, activity and inverse temperature.
#[derive(Debug, Clone)]
pub struct GibbsSpec {
    pub potential: PairPotential,
    pub z: f64,
    pub beta: f64,
    pub boundary: Boundary,
}

impl GibbsSpec {
    pub fn new(potential: PairPotential, z: f64, beta: f64) -> Result<Self> {
        ensure(z > 0.0 && z.is_finite(), || {
            format!("activity must be positive, got {z}")
        })?;
        ensure(beta > 0.0 && beta.is_finite(), || {
            format!("inverse temperature must be positive, got {beta}")
        })?;
        Ok(GibbsSpec {
            potential,
            z,
            beta,
            boundary: Boundary::MinimumImage,
        })
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    /// Binds these parameters to a box, building the torus interaction.
    pub fn on_box(&self, bx: TorusBox) -> Result<GibbsSystem> {
        ensure(bx.dim() == self.potential.dim(), || {
            format!(
                "box dimension {} does not match potential dimension {}",
                bx.dim(),
                self.potential.dim()
            )
        })?;
        let interaction = TorusInteraction::new(&self.potential, bx, self.boundary)?;
        Ok(GibbsSystem {
            spec: self.clone(),
            bx,
            interaction,
        })
    }
}

/// Gibbs parameters bound to a concrete box.
#[derive(Debug, Clone)]
pub struct GibbsSystem {
    spec: GibbsSpec,
    bx: TorusBox,
    interaction: TorusInteraction,
}

/// Whether `x` itself, if present in the configuration, contributes to its own energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelfTerm {
    /// Sum over all of `gamma`.
    Include,
    /// Sum over `gamma - delta_x`.
    ExcludeOneCopy,
}

impl GibbsSystem {
    pub fn spec(&self) -> &GibbsSpec {
        &self.spec
    }

    pub fn bx(&self) -> &TorusBox {
        &self.bx
    }

    pub fn interaction(&self) -> &TorusInteraction {
        &self.interaction
    }

    pub fn z(&self) -> f64 {
        self.spec.z
    }

    pub fn beta(&self) -> f64 {
        self.spec.beta
    }

    /// `beta * phi` between two points on the torus.
    pub fn pair(&self, x: &Point, y: &Point) -> f64 {
        let e = self.interaction.eval(&self.bx.displacement(x, y));
        if e == 0.0 {
            0.0
        } else {
            self.spec.beta * e
        }
    }

    /// `E(x, gamma) = beta sum_{y in gamma} phi(x - y)`; `+inf` is absorbing.
    pub fn local_energy(&self, x: &Point, g: &Configuration, self_term: SelfTerm) -> f64 {
        let mut skip = self_term == SelfTerm::ExcludeOneCopy;
        let mut e = 0.0;
        for y in g.points() {
            if skip && y == x {
                skip = false;
                continue;
            }
            e += self.pair(x, y);
            if e == f64::INFINITY {
                return e;
            }
        }
        e
    }

    /// `r(x, gamma) = z exp(-E(x, gamma))`, zero when the energy is infinite.
    pub fn papangelou(&self, x: &Point, g: &Configuration, self_term: SelfTerm) -> f64 {
        let e = self.local_energy(x, g, self_term);
        if e == f64::INFINITY {
            0.0
        } else {
            self.spec.z * (-e).exp()
        }
    }

    /// Total pair energy `sum_{i<j} beta phi(x_i - x_j)`.
    pub fn energy(&self, g: &Configuration) -> f64 {
        let pts = g.points();
        let mut u = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                u += self.pair(&pts[i], &pts[j]);
            }
        }
        u
    }
}

/// `E(x, gamma)` for the bound system.
pub fn local_energy(sys: &GibbsSystem, x: &Point, g: &Configuration, self_term: SelfTerm) -> f64 {
    sys.local_energy(x, g, self_term)
}

/// `r(x, gamma)` for the bound system.
pub fn papangelou(sys: &GibbsSystem, x: &Point, g: &Configuration, self_term: SelfTerm) -> f64 {
    sys.papangelou(x, g, self_term)
}
