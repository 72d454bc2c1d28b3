//! Points and the periodic box (flat torus) with minimum-image metric.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Largest spatial dimension supported by [`Point`].
pub const MAX_DIM: usize = 3;

/// A position in at most [`MAX_DIM`] dimensions. Unused trailing coordinates are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_DIM,
            "point dimension must be in 1..={MAX_DIM}"
        );
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Point {
            coords: c,
            dim: coords.len() as u8,
        }
    }

    pub fn on_line(x: f64) -> Self {
        Point::new(&[x])
    }

    pub fn origin(dim: usize) -> Self {
        Point::new(&vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    pub fn norm(&self) -> f64 {
        self.coords().iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Cubic periodic box `[0, L)^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusBox {
    dim: usize,
    side: f64,
}

impl TorusBox {
    pub fn new(dim: usize, side: f64) -> Result<Self> {
        ensure((1..=MAX_DIM).contains(&dim), || {
            format!("box dimension {dim} outside 1..={MAX_DIM}")
        })?;
        ensure(side.is_finite() && side > 0.0, || {
            format!("box side must be positive, got {side}")
        })?;
        Ok(TorusBox { dim, side })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    /// Reduces every coordinate into `[0, L)`.
    pub fn wrap(&self, p: &Point) -> Point {
        let mut c = [0.0; MAX_DIM];
        for (k, ck) in c.iter_mut().enumerate().take(self.dim) {
            let v = p.coords[k].rem_euclid(self.side);
            // rem_euclid can round up to exactly L
            *ck = if v >= self.side { 0.0 } else { v };
        }
        Point {
            coords: c,
            dim: self.dim as u8,
        }
    }

    /// Minimum-image displacement `x - y`, each component in `[-L/2, L/2)`.
    pub fn displacement(&self, x: &Point, y: &Point) -> Point {
        let mut c = [0.0; MAX_DIM];
        for (k, ck) in c.iter_mut().enumerate().take(self.dim) {
            *ck = min_image(x.coords[k] - y.coords[k], self.side);
        }
        Point {
            coords: c,
            dim: self.dim as u8,
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        self.displacement(x, y).norm()
    }
}

pub(crate) fn min_image(dx: f64, side: f64) -> f64 {
    dx - side * (dx / side).round()
}

/// Minimum-image Euclidean distance on the torus.
pub fn torus_distance(b: &TorusBox, x: &Point, y: &Point) -> f64 {
    b.distance(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wraparound_distance() {
        let b = TorusBox::new(1, 10.0).unwrap();
        let d = torus_distance(&b, &Point::on_line(1.0), &Point::on_line(9.0));
        assert!((d - 2.0).abs() < 1e-15);
        assert_eq!(torus_distance(&b, &Point::on_line(3.3), &Point::on_line(3.3)), 0.0);
    }

    #[test]
    fn diagonal_half_box() {
        let b = TorusBox::new(2, 10.0).unwrap();
        let d = b.distance(&Point::new(&[0.0, 0.0]), &Point::new(&[5.0, 5.0]));
        assert!((d - 50f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_boxes() {
        assert!(TorusBox::new(0, 1.0).is_err());
        assert!(TorusBox::new(4, 1.0).is_err());
        assert!(TorusBox::new(2, -1.0).is_err());
    }

    fn pt3() -> impl Strategy<Value = Point> {
        prop::array::uniform3(0.0..7.0f64).prop_map(|c| Point::new(&c))
    }

    proptest! {
        #[test]
        fn metric_axioms(x in pt3(), y in pt3(), w in pt3()) {
            let b = TorusBox::new(3, 7.0).unwrap();
            let dxy = b.distance(&x, &y);
            prop_assert!((dxy - b.distance(&y, &x)).abs() < 1e-12);
            prop_assert!(dxy <= b.distance(&x, &w) + b.distance(&w, &y) + 1e-12);
            prop_assert!(dxy <= 7.0 * 3f64.sqrt() / 2.0 + 1e-12);
        }

        #[test]
        fn wrap_is_idempotent(x in prop::array::uniform3(-50.0..50.0f64)) {
            let b = TorusBox::new(3, 7.0).unwrap();
            let p = b.wrap(&Point::new(&x));
            prop_assert!(p.coords().iter().all(|c| (0.0..7.0).contains(c)));
            prop_assert_eq!(b.wrap(&p), p);
        }
    }
}
