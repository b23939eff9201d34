//! First-photon density of an atom at rest and removal of its delay from `Π`.
//!
//! With `Π = Π_id * W` and `1/W̃(ν)` a cubic polynomial in `iν`, the ideal
//! distribution is a finite combination of derivatives of `Π`.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::config::PhysicalConfig;
use crate::error::{Error, Result};
use crate::grid::{TemporalDistribution, TimeGrid, NUMERICAL_FLOOR};

const I: C64 = C64 { re: 0.0, im: 1.0 };
/// Required samples per width of `Π` for stable third differences.
pub const MIN_SAMPLES_PER_WIDTH: f64 = 50.0;

fn require_driving(cfg: &PhysicalConfig) -> Result<()> {
    if cfg.omega > 0.0 && cfg.gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig("an atom without driving or decay never emits; W is undefined".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseFilter {
    /// μs
    pub c1: f64,
    /// μs²
    pub c2: f64,
    /// μs³
    pub c3: f64,
}

impl InverseFilter {
    pub fn new(cfg: &PhysicalConfig) -> Result<Self> {
        require_driving(cfg)?;
        let (g, o2) = (cfg.gamma, cfg.omega * cfg.omega);
        Ok(Self { c1: g / o2 + 2.0 / g, c2: 3.0 / o2, c3: 2.0 / (g * o2) })
    }

    /// `1/W̃(ν) = 1 + C₁(iν) + C₂(iν)² + C₃(iν)³`.
    pub fn reciprocal(&self, nu: f64) -> C64 {
        let z = I * nu;
        1.0 + z * (self.c1 + z * (self.c2 + z * self.c3))
    }
}

/// `W̃(ν) = ∫ dt e^{−iνt} W(t)`.
pub fn w_transform(cfg: &PhysicalConfig, nu: f64) -> C64 {
    let (g, o2) = (cfg.gamma, cfg.omega * cfg.omega);
    // (iν + γ/2)² − S² = Ω² − ν² + iγν
    let den = C64::new(o2 - nu * nu, g * nu) * C64::new(0.5 * g, nu);
    C64::new(0.5 * o2 * g, 0.0) / den
}

/// `sinh(x)/x` continued through `x² < 0` as `sin|x|/|x|`, with the factor
/// `e^{−d}` folded in to keep large arguments finite.
fn damped_sinhc(x2: f64, d: f64) -> f64 {
    if x2.abs() < 1e-6 {
        (1.0 + x2 / 6.0 + x2 * x2 / 120.0) * (-d).exp()
    } else if x2 > 0.0 {
        let x = x2.sqrt();
        ((x - d).exp() - (-x - d).exp()) / (2.0 * x)
    } else {
        let x = (-x2).sqrt();
        x.sin() / x * (-d).exp()
    }
}

/// `W(t)` at a single time.
pub fn atom_at_rest_value(cfg: &PhysicalConfig, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let (g, o2) = (cfg.gamma, cfg.omega * cfg.omega);
    let s2 = 0.25 * (g * g - 4.0 * o2);
    let f = damped_sinhc(0.25 * s2 * t * t, 0.25 * g * t);
    0.25 * g * o2 * t * t * f * f
}

pub fn atom_at_rest_density(cfg: &PhysicalConfig, grid: &TimeGrid) -> Result<TemporalDistribution> {
    require_driving(cfg)?;
    if grid.t0 > 0.0 {
        return Err(Error::InvalidConfig("W must be sampled from t <= 0".into()));
    }
    Ok(TemporalDistribution::from_fn(*grid, |t| atom_at_rest_value(cfg, t)))
}

/// Slowest decay rate of `W`, used to size its support.
pub fn atom_at_rest_decay_rate(cfg: &PhysicalConfig) -> f64 {
    let (g, o2) = (cfg.gamma, cfg.omega * cfg.omega);
    let s2 = 0.25 * (g * g - 4.0 * o2);
    if s2 > 0.0 {
        0.5 * g - s2.sqrt()
    } else {
        0.5 * g
    }
}

/// Grid on `[0, T]` with step `dt` long enough for `W` to decay below `1e-16` of its scale.
pub fn atom_at_rest_grid(cfg: &PhysicalConfig, dt: f64) -> Result<TimeGrid> {
    require_driving(cfg)?;
    let rate = atom_at_rest_decay_rate(cfg);
    TimeGrid::spanning(0.0, (45.0 / rate).max(8.0 * dt), dt)
}

/// Time-domain inverse filter `Π + C₁Π′ + C₂Π″ + C₃Π‴`; negative lobes are kept.
pub fn ideal_distribution(pi: &TemporalDistribution, cfg: &PhysicalConfig) -> Result<TemporalDistribution> {
    let f = InverseFilter::new(cfg)?;
    let width = pi.fwhm();
    if width < MIN_SAMPLES_PER_WIDTH * pi.grid.dt {
        return Err(Error::GridTooCoarse(format!(
            "width {width:.4e} of the distribution spans fewer than {MIN_SAMPLES_PER_WIDTH} steps of {:.4e}",
            pi.grid.dt
        )));
    }
    let d1 = pi.derivative(1)?;
    let d2 = pi.derivative(2)?;
    let d3 = pi.derivative(3)?;
    let values = (0..pi.len()).map(|i| pi.values[i] + f.c1 * d1.values[i] + f.c2 * d2.values[i] + f.c3 * d3.values[i]).collect();
    TemporalDistribution::new(pi.grid, values)
}

/// Division by `W̃` on a zero-padded periodic extension. Only sound for data
/// that is smooth and well inside the window; kept to validate the filter.
pub fn ideal_distribution_fourier(pi: &TemporalDistribution, cfg: &PhysicalConfig) -> Result<TemporalDistribution> {
    let f = InverseFilter::new(cfg)?;
    let n = pi.len();
    let m = (2 * n).next_power_of_two();
    let mut buf: Vec<C64> = pi.values.iter().map(|&v| C64::new(v, 0.0)).chain(std::iter::repeat(C64::new(0.0, 0.0))).take(m).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    let step = 2.0 * std::f64::consts::PI / (m as f64 * pi.grid.dt);
    for (j, z) in buf.iter_mut().enumerate() {
        let r = if 2 * j == m {
            C64::new(f.reciprocal(step * j as f64).re, 0.0)
        } else {
            let signed = if 2 * j < m { j as f64 } else { j as f64 - m as f64 };
            f.reciprocal(step * signed)
        };
        *z *= r;
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let values = buf[..n].iter().map(|z| z.re / m as f64).collect();
    TemporalDistribution::new(pi.grid, values)
}

/// Discrete linear convolution `Σ a(t_j) b(t − t_j) dt`; the result starts at
/// `a.t0 + b.t0` and has `n_a + n_b − 1` samples.
pub fn convolve(a: &TemporalDistribution, b: &TemporalDistribution) -> Result<TemporalDistribution> {
    let dt = a.grid.dt;
    if (b.grid.dt - dt).abs() > 1e-9 * dt {
        return Err(Error::GridMismatch(format!("steps differ: {} vs {}", dt, b.grid.dt)));
    }
    let (na, nb) = (a.len(), b.len());
    let mut out = vec![0.0; na + nb - 1];
    for (i, &x) in a.values.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (o, &y) in out[i..i + nb].iter_mut().zip(&b.values) {
            *o += x * y;
        }
    }
    for o in &mut out {
        *o *= dt;
    }
    TemporalDistribution::new(TimeGrid::new(a.grid.t0 + b.grid.t0, dt, na + nb - 1)?, out)
}

/// `Π_N = Π / ∫Π`.
pub fn normalize(pi: &TemporalDistribution) -> Result<TemporalDistribution> {
    let mass = pi.integrate();
    if !(mass > NUMERICAL_FLOOR) {
        return Err(Error::ZeroMass(mass));
    }
    Ok(pi.scaled(1.0 / mass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn weak() -> PhysicalConfig {
        PhysicalConfig::cesium(33.3, 0.0999 * 33.3).unwrap()
    }

    #[test]
    fn filter_coefficients_closed_form() {
        let c = PhysicalConfig::cesium(2.0, 4.0).unwrap();
        let f = InverseFilter::new(&c).unwrap();
        assert_eq!(f.c1, 2.0 / 16.0 + 1.0);
        assert_eq!(f.c2, 3.0 / 16.0);
        assert_eq!(f.c3, 2.0 / 32.0);
    }

    #[test]
    fn transform_at_zero_is_one() {
        for (g, o) in [(33.3, 3.3267), (33.3, 166.5), (2.0, 1.0)] {
            assert_eq!(w_transform(&PhysicalConfig::cesium(g, o).unwrap(), 0.0), C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn reciprocal_is_exact() {
        let c = PhysicalConfig::cesium(33.3, 12.3).unwrap();
        let f = InverseFilter::new(&c).unwrap();
        for nu in [-50.0, -3.0, 0.1, 1.0, 7.5, 200.0] {
            let p = w_transform(&c, nu) * f.reciprocal(nu);
            assert!((p - 1.0).norm() < 1e-10, "{nu} {p}");
        }
    }

    #[test]
    fn transform_decays_cubically() {
        let c = weak();
        let r = w_transform(&c, 1e4).norm() / w_transform(&c, 2e4).norm();
        assert_abs_diff_eq!(r, 8.0, epsilon = 0.01);
    }

    #[test]
    fn density_is_normalized_with_known_mean() {
        let c = weak();
        let g = TimeGrid::spanning(-1.0, 200.0, 0.005).unwrap();
        let w = atom_at_rest_density(&c, &g).unwrap();
        assert!(w.values.iter().all(|&v| v >= 0.0));
        assert!(w.values.iter().zip(g.times()).filter(|(_, t)| *t < 0.0).all(|(v, _)| *v == 0.0));
        assert_abs_diff_eq!(w.integrate(), 1.0, epsilon = 1e-6);
        let f = InverseFilter::new(&c).unwrap();
        let mean = w.mean_time().unwrap();
        assert!((mean - f.c1).abs() < 1e-3 * f.c1);
        assert!((mean - 33.3 / c.omega.powi(2)).abs() < 0.02 * mean);
    }

    #[test]
    fn degenerate_path_is_continuous() {
        let base = PhysicalConfig::new(2.0, 1.0, 1.0).unwrap();
        for t in [0.1, 1.0, 5.0, 30.0] {
            let w0 = atom_at_rest_value(&base, t);
            // first-order changes cancel in the symmetric mean
            let mean = 0.5 * (atom_at_rest_value(&base.with_omega(1.0 + 1e-6), t) + atom_at_rest_value(&base.with_omega(1.0 - 1e-6), t));
            assert!((mean - w0).abs() < 1e-10 * w0 + 1e-14, "{t} {mean} {w0}");
        }
    }

    #[test]
    fn deconvolving_w_gives_a_spike() {
        let c = PhysicalConfig::cesium(33.3, 12.3).unwrap();
        let g = TimeGrid::spanning(-1.0, 8.0, 0.0005).unwrap();
        let w = atom_at_rest_density(&c, &g).unwrap();
        let id = ideal_distribution(&w, &c).unwrap();
        assert_abs_diff_eq!(id.integrate(), 1.0, epsilon = 1e-3);
        // essentially all mass within three steps of the origin
        let near: f64 = id.values.iter().zip(g.times()).filter(|(_, t)| t.abs() <= 3.0 * g.dt).map(|(v, _)| v * g.dt).sum();
        assert!((near - 1.0).abs() < 0.05, "{near}");
    }

    #[test]
    fn convolution_identities() {
        let g = TimeGrid::new(0.0, 0.1, 50).unwrap();
        let a = TemporalDistribution::from_fn(g, |t| (-(t - 2.0).powi(2)).exp());
        let mut spike = TemporalDistribution::zeros(TimeGrid::new(0.0, 0.1, 10).unwrap());
        spike.values[0] = 10.0;
        let c = convolve(&a, &spike).unwrap();
        for i in 0..50 {
            assert_abs_diff_eq!(c.values[i], a.values[i], epsilon = 1e-15);
        }
        let b = TemporalDistribution::from_fn(TimeGrid::new(0.0, 0.1, 40).unwrap(), |t| t * (-t).exp());
        let ab = convolve(&a, &b).unwrap();
        let riemann = |d: &TemporalDistribution| d.values.iter().sum::<f64>() * d.grid.dt;
        assert_abs_diff_eq!(riemann(&ab), riemann(&a) * riemann(&b), epsilon = 1e-12);
        let bad = TemporalDistribution::zeros(TimeGrid::new(0.0, 0.2, 10).unwrap());
        assert!(matches!(convolve(&a, &bad), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn normalize_properties() {
        let g = TimeGrid::spanning(-10.0, 10.0, 0.01).unwrap();
        let d = TemporalDistribution::from_fn(g, |t| (-t * t).exp() / std::f64::consts::PI.sqrt());
        let n = normalize(&d).unwrap();
        assert_abs_diff_eq!(n.integrate(), 1.0, epsilon = 1e-14);
        for (a, b) in n.values.iter().zip(&d.values) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(normalize(&TemporalDistribution::zeros(g)), Err(Error::ZeroMass(_))));
    }

    #[test]
    fn both_backends_agree_on_smooth_data() {
        let c = PhysicalConfig::cesium(33.3, 12.3).unwrap();
        let g = TimeGrid::spanning(0.0, 20.0, 0.002).unwrap();
        let pi = TemporalDistribution::from_fn(g, |t| (-(t - 10.0).powi(2) / 2.0).exp());
        let a = ideal_distribution(&pi, &c).unwrap();
        let b = ideal_distribution_fourier(&pi, &c).unwrap();
        let peak = a.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-4 * peak, "{err}");
    }

    #[test]
    fn undriven_atom_has_no_filter() {
        assert!(InverseFilter::new(&PhysicalConfig::cesium(33.3, 0.0).unwrap()).is_err());
    }
}
