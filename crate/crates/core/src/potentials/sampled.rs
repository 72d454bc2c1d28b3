//! Functions sampled on a uniform periodic grid `[-L/2, L/2)^d`.

use std::io::{BufRead, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::periodic::PeriodizedProfile;
use super::profile::Profile;
use crate::error::{ensure, Error, Result};

/// Samples on `n^d` nodes `x_k = -L/2 + k h`, `h = L/n`, stored with axis 0 slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    dim: usize,
    n: usize,
    length: f64,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(dim: usize, n: usize, length: f64, values: Vec<f64>) -> Result<Self> {
        ensure((1..=3).contains(&dim), || format!("dimension {dim} outside 1..=3"))?;
        ensure(length.is_finite() && length > 0.0, || {
            format!("grid length must be positive, got {length}")
        })?;
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        ensure(values.len() == n.pow(dim as u32), || {
            format!("expected {} samples, got {}", n.pow(dim as u32), values.len())
        })?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(SampledFunction { dim, n, length, values })
    }

    /// Plain point samples of `f` (no periodization).
    pub fn from_fn(dim: usize, n: usize, length: f64, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let h = length / n as f64;
        let total = n.pow(dim as u32);
        let mut x = vec![0.0; dim];
        let values = (0..total)
            .map(|flat| {
                node_coords(flat, n, dim, h, length, &mut x);
                f(&x)
            })
            .collect();
        Self::new(dim, n, length, values)
    }

    /// Samples of the windowed image sum of `profile`, normalized to `f(0)` at the origin.
    pub fn periodized(profile: &Profile, dim: usize, n: usize, length: f64, taper: f64) -> Result<Self> {
        profile.validate(dim)?;
        let per = PeriodizedProfile::new(profile.clone(), dim, length, taper);
        Self::from_fn(dim, n, length, |x| per.eval(x))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn step(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn half_extent(&self) -> f64 {
        0.5 * self.length * (self.dim as f64).sqrt()
    }

    fn origin_index(&self) -> usize {
        let half = self.n / 2;
        (0..self.dim).fold(0, |acc, _| acc * self.n + half)
    }

    pub fn value_at_origin(&self) -> f64 {
        self.values[self.origin_index()]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.dim,
            self.n,
            self.length,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Multilinear interpolation; zero outside the sampled window.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let h = self.step();
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..self.dim {
            let u = (x[a] + 0.5 * self.length) / h;
            if !(0.0..=(self.n - 1) as f64).contains(&u) {
                return 0.0;
            }
            let i = (u.floor() as usize).min(self.n - 2);
            base[a] = i;
            frac[a] = u - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << self.dim) {
            let mut w = 1.0;
            let mut flat = 0;
            for a in 0..self.dim {
                let bit = (corner >> a) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                flat = flat * self.n + base[a] + bit;
            }
            acc += w * self.values[flat];
        }
        acc
    }

    /// Discrete Fourier transform of the samples with the origin node moved to index zero.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let n = self.n;
        let half = n / 2;
        let mut data = vec![Complex64::new(0.0, 0.0); self.values.len()];
        let mut idx = vec![0usize; self.dim];
        for (flat, v) in self.values.iter().enumerate() {
            unflatten(flat, n, &mut idx);
            let shifted = idx.iter().fold(0, |acc, &i| acc * n + (i + half) % n);
            data[shifted] = Complex64::new(*v, 0.0);
        }
        fft_nd(&mut data, n, self.dim);
        data
    }

    /// Writes `x_1, .., x_d, value` rows, one per node.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        let header: Vec<String> = (1..=self.dim)
            .map(|a| format!("x{a}"))
            .chain(std::iter::once("value".to_string()))
            .collect();
        writeln!(out, "{}", header.join(",")).expect("write to vec");
        let h = self.step();
        let mut x = vec![0.0; self.dim];
        for (flat, v) in self.values.iter().enumerate() {
            node_coords(flat, self.n, self.dim, h, self.length, &mut x);
            let row: Vec<String> = x.iter().chain(std::iter::once(v)).map(|c| format!("{c:?}")).collect();
            writeln!(out, "{}", row.join(",")).expect("write to vec");
        }
        crate::report::write_atomic(path, &out)
    }

    /// Reads the format produced by [`write_csv`](Self::write_csv). Rows must list nodes in
    /// grid order.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
            match parsed {
                Ok(r) => rows.push(r),
                Err(_) if rows.is_empty() => continue, // header
                Err(e) => {
                    return Err(Error::Csv {
                        line: lineno + 1,
                        message: e.to_string(),
                    })
                }
            }
        }
        let width = rows.first().map(|r| r.len()).unwrap_or(0);
        if width < 2 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::Csv {
                line: 0,
                message: "rows must all have d + 1 >= 2 columns".into(),
            });
        }
        let dim = width - 1;
        let n = (rows.len() as f64).powf(1.0 / dim as f64).round() as usize;
        if n.pow(dim as u32) != rows.len() {
            return Err(Error::Csv {
                line: 0,
                message: format!("{} rows do not form an n^{dim} grid", rows.len()),
            });
        }
        // last axis varies fastest, so rows 0 and 1 differ by one step on it
        let h = rows[1][dim - 1] - rows[0][dim - 1];
        let length = h * n as f64;
        let values = rows.iter().map(|r| r[dim]).collect();
        let s = Self::new(dim, n, length, values)?;
        let mut x = vec![0.0; dim];
        for (flat, r) in rows.iter().enumerate() {
            node_coords(flat, n, dim, h, length, &mut x);
            if x.iter().zip(r).any(|(a, b)| (a - b).abs() > 1e-9 * length) {
                return Err(Error::Csv {
                    line: flat + 2,
                    message: "node coordinates do not match a uniform grid".into(),
                });
            }
        }
        Ok(s)
    }
}

fn unflatten(mut flat: usize, n: usize, idx: &mut [usize]) {
    for a in (0..idx.len()).rev() {
        idx[a] = flat % n;
        flat /= n;
    }
}

fn node_coords(flat: usize, n: usize, dim: usize, h: f64, length: f64, x: &mut [f64]) {
    let mut rest = flat;
    for a in (0..dim).rev() {
        x[a] = -0.5 * length + (rest % n) as f64 * h;
        rest /= n;
    }
}

/// In-place forward FFT along every axis of an `n^dim` array (axis 0 slowest).
pub(crate) fn fft_nd(data: &mut [Complex64], n: usize, dim: usize) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (k, l) in line.iter_mut().enumerate() {
                    *l = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, l) in line.iter().enumerate() {
                    data[base + k * stride] = *l;
                }
            }
        }
    }
}

/// Signed frequency multi-index of a flat spectrum position.
pub(crate) fn frequency_index(flat: usize, n: usize, dim: usize) -> Vec<i64> {
    let mut idx = vec![0usize; dim];
    unflatten(flat, n, &mut idx);
    idx.iter()
        .map(|&i| if i < n / 2 { i as i64 } else { i as i64 - n as i64 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_power_of_two_and_nan() {
        assert!(matches!(
            SampledFunction::new(1, 6, 1.0, vec![0.0; 6]),
            Err(Error::NotPowerOfTwo(6))
        ));
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(matches!(
            SampledFunction::new(1, 8, 1.0, v),
            Err(Error::NonFiniteSample(3))
        ));
    }

    #[test]
    fn origin_is_the_middle_node() {
        let s = SampledFunction::from_fn(2, 8, 4.0, |x| x[0] + 10.0 * x[1]).unwrap();
        assert_eq!(s.value_at_origin(), 0.0);
        assert!((s.interpolate(&[0.5, 0.5]) - 5.5).abs() < 1e-12);
        assert_eq!(s.interpolate(&[3.0, 0.0]), 0.0);
    }

    #[test]
    fn spectrum_of_even_function_is_real() {
        let s = SampledFunction::from_fn(1, 64, 20.0, |x| (-x[0] * x[0]).exp()).unwrap();
        let spec = s.spectrum();
        let max_imag = spec.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
        assert!(max_imag < 1e-13);
        // zero frequency is the plain sum
        let sum: f64 = s.values().iter().sum();
        assert!((spec[0].re - sum).abs() < 1e-12);
    }

    #[test]
    fn fft_matches_naive_dft_in_two_dimensions() {
        let n = 4;
        let vals: Vec<f64> = (0..16).map(|i| ((i * 7) % 5) as f64 - 1.5).collect();
        let mut data: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut data, n, 2);
        for k0 in 0..n {
            for k1 in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for j0 in 0..n {
                    for j1 in 0..n {
                        let ph = -2.0 * std::f64::consts::PI * ((k0 * j0 + k1 * j1) as f64) / n as f64;
                        acc += vals[j0 * n + j1] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((acc - data[k0 * n + k1]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let s = SampledFunction::from_fn(2, 4, 3.0, |x| x[0] * x[1] + 0.25).unwrap();
        s.write_csv(&path).unwrap();
        let back = SampledFunction::read_csv(&path).unwrap();
        assert_eq!(back.dim(), 2);
        assert_eq!(back.points_per_axis(), 4);
        assert!((back.length() - 3.0).abs() < 1e-12);
        assert_eq!(back.values(), s.values());
    }
}
