//! Periodization of a profile onto the torus `[-L/2, L/2)^d`.
//!
//! The profile is multiplied by a wide Gaussian window `exp(-|y|^2 / R^2)`
//! and summed over lattice images `y = x + kL`. The window is itself
//! positive definite, so the product keeps positive definiteness, and the
//! image sum converges geometrically even for slowly decaying profiles.
//! The result is rescaled so that its value at the origin equals `f(0)`.

use super::profile::Profile;

/// Default window width in units of the box side.
pub const DEFAULT_TAPER: f64 = 2.0;

const WINDOW_REACH: f64 = 6.5;
const DECAY_EPS: f64 = 1e-17;

#[derive(Debug, Clone)]
pub struct PeriodizedProfile {
    profile: Profile,
    dim: usize,
    side: f64,
    window: f64,
    offsets: Vec<[f64; 3]>,
    f0: f64,
    raw0: f64,
}

impl PeriodizedProfile {
    /// `taper` is the window width as a multiple of `side`.
    pub fn new(profile: Profile, dim: usize, side: f64, taper: f64) -> Self {
        let window = taper * side;
        let mut reach = WINDOW_REACH * window;
        if let Some(r) = profile.decay_radius(DECAY_EPS) {
            reach = reach.min(r);
        }
        let k_max = ((reach + 0.5 * side) / side).ceil() as i64;
        let mut offsets = Vec::new();
        let ks: Vec<i64> = (-k_max..=k_max).collect();
        let mut idx = vec![0usize; dim];
        loop {
            let mut o = [0.0; 3];
            for (a, &i) in idx.iter().enumerate() {
                o[a] = ks[i] as f64 * side;
            }
            // nearest point of the box to this image, measured from the origin
            let far = o.iter().map(|c| c * c).sum::<f64>().sqrt() - 0.5 * side * (dim as f64).sqrt();
            if far <= reach {
                offsets.push(o);
            }
            let mut a = 0;
            while a < dim {
                idx[a] += 1;
                if idx[a] < ks.len() {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
            if a == dim {
                break;
            }
        }
        let f0 = profile.at_origin(dim);
        let mut p = PeriodizedProfile {
            profile,
            dim,
            side,
            window,
            offsets,
            f0,
            raw0: 1.0,
        };
        p.raw0 = p.raw(&vec![0.0; dim]);
        p
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn image_count(&self) -> usize {
        self.offsets.len()
    }

    fn window_at(&self, y: &[f64]) -> f64 {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        (-r2 / (self.window * self.window)).exp()
    }

    fn shifted(&self, x: &[f64], o: &[f64; 3], buf: &mut [f64; 3]) {
        for a in 0..self.dim {
            buf[a] = x[a] + o[a];
        }
    }

    fn raw(&self, x: &[f64]) -> f64 {
        let mut buf = [0.0; 3];
        let mut s = 0.0;
        for o in &self.offsets {
            self.shifted(x, o, &mut buf);
            let y = &buf[..self.dim];
            s += self.profile.eval(y) * self.window_at(y);
        }
        s
    }

    fn normalizes(&self) -> bool {
        self.f0 != 0.0 && self.raw0 > 0.0
    }

    /// Periodized, windowed and normalized profile at displacement `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let raw = self.raw(x);
        if self.normalizes() {
            self.f0 * raw / self.raw0
        } else {
            raw
        }
    }

    /// `1 - eval(x)` computed without cancellation at small `|x|`.
    pub fn one_minus(&self, x: &[f64]) -> f64 {
        if !self.normalizes() {
            return 1.0 - self.eval(x);
        }
        // raw(0) - raw(x), term by term; the k = 0 term uses 1 - f(x) w(x)
        let mut buf = [0.0; 3];
        let mut diff = 0.0;
        for o in &self.offsets {
            if o.iter().all(|&c| c == 0.0) {
                let y = x;
                let r2: f64 = y.iter().map(|v| v * v).sum();
                let one_minus_w = -(-r2 / (self.window * self.window)).exp_m1();
                let f = self.profile.eval(y);
                let one_minus_fw = self.profile.one_minus(y) + f * one_minus_w;
                diff += (self.f0 - 1.0) + one_minus_fw;
            } else {
                self.shifted(&vec![0.0; self.dim], o, &mut buf);
                let at_image = self.profile.eval(&buf[..self.dim]) * self.window_at(&buf[..self.dim]);
                self.shifted(x, o, &mut buf);
                let y = &buf[..self.dim];
                diff += at_image - self.profile.eval(y) * self.window_at(y);
            }
        }
        (1.0 - self.f0) + self.f0 * diff / self.raw0
    }
}
