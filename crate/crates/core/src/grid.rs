//! Uniform time grids and real distributions sampled on them.

use crate::error::{Error, Result};

/// Positivity floor relative to the peak of a distribution.
pub const NUMERICAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub n: usize,
}

impl TimeGrid {
    pub const MIN_SAMPLES: usize = 8;

    pub fn new(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
            return Err(Error::InvalidConfig(format!("time grid needs finite t0 and dt > 0, got t0={t0}, dt={dt}")));
        }
        if n < Self::MIN_SAMPLES {
            return Err(Error::InvalidConfig(format!("time grid needs at least {} samples, got {n}", Self::MIN_SAMPLES)));
        }
        Ok(Self { t0, dt, n })
    }

    /// Grid from `t_start` to (at least) `t_end` with step `dt`.
    pub fn spanning(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(t_end > t_start) {
            return Err(Error::InvalidConfig(format!("empty time window [{t_start}, {t_end}]")));
        }
        let steps = ((t_end - t_start) / dt - 1e-9).ceil().max(0.0) as usize;
        Self::new(t_start, dt, steps + 1)
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + self.dt * i as f64
    }

    pub fn end(&self) -> f64 {
        self.time(self.n - 1)
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.time(i))
    }

    /// Same step and aligned samples (offsets are whole steps).
    pub fn aligned_with(&self, other: &TimeGrid) -> bool {
        let tol = 1e-9 * self.dt;
        if (self.dt - other.dt).abs() > tol {
            return false;
        }
        let shift = (other.t0 - self.t0) / self.dt;
        (shift - shift.round()).abs() < 1e-6
    }

    pub fn same_as(&self, other: &TimeGrid) -> bool {
        self.n == other.n && self.aligned_with(other) && (self.t0 - other.t0).abs() < 1e-9 * self.dt
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalDistribution {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl TemporalDistribution {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::GridMismatch(format!("{} values for {} grid points", values.len(), grid.n)));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite sample at t = {}", grid.time(i))));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self { grid, values: vec![0.0; grid.n] }
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        Self { grid, values: grid.times().map(f).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Trapezoidal integral over the grid.
    pub fn integrate(&self) -> f64 {
        trapezoid(&self.values, self.grid.dt)
    }

    pub fn mean_time(&self) -> Result<f64> {
        let mass = self.integrate();
        if !(mass > NUMERICAL_FLOOR) {
            return Err(Error::ZeroMass(mass));
        }
        let first: Vec<f64> = self.values.iter().enumerate().map(|(i, v)| self.grid.time(i) * v).collect();
        Ok(trapezoid(&first, self.grid.dt) / mass)
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Full width at half maximum, with linear interpolation at the crossings.
    pub fn fwhm(&self) -> f64 {
        let peak = self.peak();
        if !(peak > 0.0) {
            return 0.0;
        }
        let half = 0.5 * peak;
        let v = &self.values;
        let first = v.iter().position(|&x| x >= half).unwrap_or(0);
        let last = v.iter().rposition(|&x| x >= half).unwrap_or(v.len() - 1);
        let left = if first == 0 {
            self.grid.time(0)
        } else {
            let f = (half - v[first - 1]) / (v[first] - v[first - 1]);
            self.grid.time(first - 1) + f * self.grid.dt
        };
        let right = if last + 1 >= v.len() {
            self.grid.end()
        } else {
            let f = (v[last] - half) / (v[last] - v[last + 1]);
            self.grid.time(last) + f * self.grid.dt
        };
        right - left
    }

    /// Finite-difference derivative of order 1, 2 or 3, second-order accurate
    /// everywhere (one-sided stencils at the ends).
    pub fn derivative(&self, order: usize) -> Result<Self> {
        if !(1..=3).contains(&order) {
            return Err(Error::InvalidConfig(format!("derivative order must be 1, 2 or 3, got {order}")));
        }
        let n = self.len();
        let half = if order == 3 { 2 } else { 1 };
        let edge = order + 2;
        if n < (2 * order + 1).max(edge) {
            return Err(Error::GridTooCoarse(format!("{n} samples cannot carry a derivative of order {order}")));
        }
        let scale = self.grid.dt.powi(order as i32);
        let central = stencil(&offsets(-(half as i64), 2 * half + 1), order);
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            let (start, w) = if i >= half && i + half < n {
                (i - half, central.clone())
            } else if i < half {
                (0, stencil(&offsets(-(i as i64), edge), order))
            } else {
                let start = n - edge;
                (start, stencil(&offsets(start as i64 - i as i64, edge), order))
            };
            *o = w.iter().zip(&self.values[start..]).map(|(a, b)| a * b).sum::<f64>() / scale;
        }
        Ok(Self { grid: self.grid, values: out })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// Pointwise `self + s * other` on the same grid.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch("distributions live on different time grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + s * b).collect();
        Ok(Self { grid: self.grid, values })
    }

    /// Samples at the points of `grid`; grids must be aligned and `grid` must lie inside.
    pub fn restrict(&self, grid: &TimeGrid) -> Result<Self> {
        if !self.grid.aligned_with(grid) {
            return Err(Error::GridMismatch("grids are not aligned".into()));
        }
        let offset = ((grid.t0 - self.grid.t0) / self.grid.dt).round();
        if offset < 0.0 || offset as usize + grid.n > self.grid.n {
            return Err(Error::GridMismatch("requested window exceeds the sampled range".into()));
        }
        let o = offset as usize;
        Ok(Self { grid: *grid, values: self.values[o..o + grid.n].to_vec() })
    }
}

pub(crate) fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dt * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])),
    }
}

fn offsets(first: i64, len: usize) -> Vec<f64> {
    (0..len as i64).map(|j| (first + j) as f64).collect()
}

/// Fornberg's recursion: weights for the `order`-th derivative at 0 on unit-spaced nodes `x`.
pub(crate) fn stencil(x: &[f64], order: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0];
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i];
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}
