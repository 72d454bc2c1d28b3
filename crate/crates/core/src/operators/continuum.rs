//! Continuum box with the birth integral replaced by a cell-centre rule.

use serde::Serialize;

use super::BirthDeath;
use crate::configuration::{Configuration, GibbsSystem, SelfTerm};
use crate::error::{ensure, Result};
use crate::geometry::{Point, TorusBox};

/// Cell centres of an `m^d` grid on the box, each with weight `(L/m)^d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quadrature {
    bx: TorusBox,
    m: usize,
    nodes: Vec<Point>,
    weight: f64,
}

impl Quadrature {
    pub fn new(bx: TorusBox, m: usize) -> Result<Self> {
        ensure(m >= 2, || format!("need at least 2 nodes per axis, got {m}"))?;
        let d = bx.dim();
        let h = bx.side() / m as f64;
        let total = m.pow(d as u32);
        let nodes = (0..total)
            .map(|flat| {
                let mut c = [0.0; 3];
                let mut rem = flat;
                for a in (0..d).rev() {
                    c[a] = (rem % m) as f64 * h + 0.5 * h;
                    rem /= m;
                }
                Point::new(&c[..d])
            })
            .collect();
        Ok(Quadrature {
            bx,
            m,
            nodes,
            weight: h.powi(d as i32),
        })
    }

    pub fn bx(&self) -> &TorusBox {
        &self.bx
    }

    pub fn points_per_axis(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Index of the cell containing `x`.
    pub fn cell_of(&self, x: &Point) -> usize {
        let w = self.bx.wrap(x);
        let h = self.bx.side() / self.m as f64;
        w.coords()
            .iter()
            .fold(0, |acc, c| acc * self.m + ((c / h).floor() as usize).min(self.m - 1))
    }
}

/// Gibbs birth-and-death structure on configurations in a box.
#[derive(Debug, Clone)]
pub struct ContinuumModel<'a> {
    sys: &'a GibbsSystem,
    quad: Quadrature,
}

impl<'a> ContinuumModel<'a> {
    pub fn new(sys: &'a GibbsSystem, quad: Quadrature) -> Result<Self> {
        ensure(sys.bx() == quad.bx(), || {
            "quadrature and Gibbs system use different boxes".into()
        })?;
        Ok(ContinuumModel { sys, quad })
    }

    pub fn system(&self) -> &GibbsSystem {
        self.sys
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quad
    }
}

impl BirthDeath for ContinuumModel<'_> {
    type State = Configuration;
    type Site = Point;

    fn deaths(&self, s: &Configuration) -> Vec<(Point, f64)> {
        s.distinct().into_iter().map(|(p, k)| (p, k as f64)).collect()
    }

    fn remove(&self, s: &Configuration, x: &Point) -> Configuration {
        s.remove(x).expect("death site must be occupied")
    }

    fn add(&self, s: &Configuration, x: &Point) -> Configuration {
        s.insert(*x)
    }

    fn intensity(&self, s: &Configuration, x: &Point) -> f64 {
        self.sys.papangelou(x, s, SelfTerm::Include)
    }

    fn nodes(&self) -> &[Point] {
        self.quad.nodes()
    }

    fn node_weight(&self) -> f64 {
        self.quad.weight()
    }
}
