//! Free Gaussian packets, their momentum amplitudes, the free flux at the
//! origin and Kijowski's arrival-time distribution.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::config::PhysicalConfig;
use crate::error::{Error, Result};
use crate::grid::{TemporalDistribution, TimeGrid};
use crate::quadrature::{KGrid, PANEL_ORDER, PANEL_PHASE_SPAN};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Tail mass outside the momentum grid that is tolerated.
pub const MAX_TAIL_MASS: f64 = 1e-6;
/// Half-width of the default momentum window in units of `σ_k`.
pub const K_WINDOW_SIGMAS: f64 = 8.0;

/// A minimum-uncertainty Gaussian, centred at `x_mean` at time `t_ref`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    pub weight: C64,
    /// μm/μs
    pub v_mean: f64,
    /// μm
    pub x_mean: f64,
    /// Standard deviation of `|ψ|²` at `t_ref`, μm.
    pub delta_x: f64,
    /// μs
    pub t_ref: f64,
}

impl GaussianComponent {
    pub fn new(v_mean: f64, x_mean: f64, delta_x: f64, t_ref: f64) -> Self {
        Self { weight: C64::new(1.0, 0.0), v_mean, x_mean, delta_x, t_ref }
    }

    pub fn with_weight(mut self, w: C64) -> Self {
        self.weight = w;
        self
    }

    /// Standard deviation of `|ψ̃|²`.
    pub fn sigma_k(&self) -> f64 {
        0.5 / self.delta_x
    }

    pub fn k_mean(&self, alpha: f64) -> f64 {
        self.v_mean / alpha
    }

    pub fn center(&self, t: f64) -> f64 {
        self.x_mean + self.v_mean * (t - self.t_ref)
    }

    /// Position spread at time `t` under free motion.
    pub fn spread(&self, t: f64, alpha: f64) -> f64 {
        let sv = alpha * self.sigma_k();
        (self.delta_x * self.delta_x + sv * sv * (t - self.t_ref).powi(2)).sqrt()
    }

    /// Unit-norm momentum amplitude (weight not applied), `t = 0` convention.
    pub fn amplitude(&self, k: f64, alpha: f64) -> C64 {
        let s = self.sigma_k();
        let kc = self.k_mean(alpha);
        let norm = (2.0 * std::f64::consts::PI * s * s).powf(-0.25);
        let arg = C64::new(-(k - kc).powi(2) / (4.0 * s * s), -k * self.x_mean + 0.5 * alpha * k * k * self.t_ref);
        norm * arg.exp()
    }

    /// Closed-form free wavefunction (weight not applied), including negative momenta.
    pub fn wavefunction(&self, x: f64, t: f64, alpha: f64) -> C64 {
        let s = self.sigma_k();
        let kc = self.k_mean(alpha);
        let tau = t - self.t_ref;
        let a = C64::new(1.0 / (4.0 * s * s), 0.5 * alpha * tau);
        let b = C64::new(kc / (2.0 * s * s), x - self.x_mean);
        let c0 = -kc * kc / (4.0 * s * s);
        let pi = std::f64::consts::PI;
        let pre = (2.0 * pi * s * s).powf(-0.25) / (2.0 * pi).sqrt();
        pre * (pi / a).sqrt() * (b * b / (4.0 * a) + c0).exp()
    }
}

/// Superposition, weights applied, at momentum `k`.
pub fn superposed_amplitude(components: &[GaussianComponent], k: f64, alpha: f64) -> C64 {
    components.iter().map(|c| c.weight * c.amplitude(k, alpha)).sum()
}

pub fn superposed_wavefunction(components: &[GaussianComponent], x: f64, t: f64, alpha: f64) -> C64 {
    components.iter().map(|c| c.weight * c.wavefunction(x, t, alpha)).sum()
}

/// Default momentum window: `k̄ ± 8σ_k` over all components, clipped to `k > 0`.
pub fn momentum_window(components: &[GaussianComponent], alpha: f64) -> (f64, f64) {
    let hi = components
        .iter()
        .map(|c| c.k_mean(alpha) + K_WINDOW_SIGMAS * c.sigma_k())
        .fold(f64::NEG_INFINITY, f64::max);
    let lo = components
        .iter()
        .map(|c| c.k_mean(alpha) - K_WINDOW_SIGMAS * c.sigma_k())
        .fold(f64::INFINITY, f64::min);
    (lo.max(1e-6 * hi), hi)
}

/// Largest `|x₀ + αk(t − t_ref)|` over the components and window ends at one `k`.
fn local_extent(components: &[GaussianComponent], alpha: f64, k: f64, grid: &TimeGrid) -> f64 {
    components
        .iter()
        .flat_map(|c| [grid.t0, grid.end()].map(|t| (c.x_mean + alpha * k * (t - c.t_ref)).abs()))
        .fold(0.0, f64::max)
}

/// Composite grid whose panels are no wider than `σ_k` and sweep at most
/// `PANEL_PHASE_SPAN` of the phase `e^{ikx}` at the largest position reached
/// near that `k`, plus `x_reach`.
pub fn packet_k_grid(components: &[GaussianComponent], cfg: &PhysicalConfig, grid: &TimeGrid, x_reach: f64) -> Result<KGrid> {
    if components.is_empty() {
        return Err(Error::InvalidConfig("packet has no components".into()));
    }
    let (lo, hi) = momentum_window(components, cfg.alpha);
    let sigma = components.iter().map(|c| c.sigma_k()).fold(f64::INFINITY, f64::min);
    let ext = |k: f64| local_extent(components, cfg.alpha, k, grid) + x_reach.abs();
    let span = PANEL_PHASE_SPAN;
    let mut edges = vec![lo];
    let mut a = lo;
    while a < hi {
        let mut w = sigma.min(span / ext(a).max(1e-300));
        // the extent is piecewise linear in k, so the panel ends bound it
        while w * ext(a + w) > span * (1.0 + 1e-12) {
            w = span / ext(a + w);
        }
        a = if a + w > hi - 1e-9 * w { hi } else { a + w };
        edges.push(a);
    }
    KGrid::from_edges(&edges, PANEL_ORDER)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumAmplitude {
    pub k_grid: KGrid,
    /// `ψ̃(k)` at the nodes, unit norm under the grid weights.
    pub psi_tilde: Vec<C64>,
    /// Fraction of the untruncated norm carried by `k < 0` and dropped.
    pub truncated_mass: f64,
    /// Fraction of the norm at `k > 0` outside the grid.
    pub tail_mass: f64,
}

fn band_mass(components: &[GaussianComponent], alpha: f64, lo: f64, hi: f64, width: f64) -> Result<f64> {
    if !(hi > lo) {
        return Ok(0.0);
    }
    let g = KGrid::with_max_panel_width(lo, hi, width)?;
    Ok(g.integrate(|k| superposed_amplitude(components, k, alpha).norm_sqr()))
}

pub fn build_momentum_amplitude(components: &[GaussianComponent], cfg: &PhysicalConfig, k_grid: KGrid) -> Result<MomentumAmplitude> {
    if components.is_empty() {
        return Err(Error::InvalidConfig("packet has no components".into()));
    }
    for c in components {
        if !(c.delta_x > 0.0) || !c.v_mean.is_finite() || !c.x_mean.is_finite() || !c.t_ref.is_finite() {
            return Err(Error::InvalidConfig(format!("invalid packet component {c:?}")));
        }
    }
    if !(k_grid.k_min > 0.0) {
        return Err(Error::InvalidConfig("momentum grid must lie at k > 0".into()));
    }
    let a = cfg.alpha;
    let psi: Vec<C64> = k_grid.nodes.iter().map(|&k| superposed_amplitude(components, k, a)).collect();
    let inside: f64 = psi.iter().zip(&k_grid.weights).map(|(p, w)| w * p.norm_sqr()).sum();

    // tails by a fine auxiliary quadrature over generous bands
    let smin = components.iter().map(|c| c.sigma_k()).fold(f64::INFINITY, f64::min);
    let smax = components.iter().map(|c| c.sigma_k()).fold(0.0, f64::max);
    let reach = components
        .iter()
        .map(|c| c.x_mean.abs() + a * c.t_ref.abs() * (c.k_mean(a).abs() + 40.0 * c.sigma_k()))
        .fold(0.0, f64::max);
    let width = (std::f64::consts::PI / (4.0 * reach.max(1e-300))).min(0.25 * smin);
    let kc_lo = components.iter().map(|c| c.k_mean(a)).fold(f64::INFINITY, f64::min);
    let kc_hi = components.iter().map(|c| c.k_mean(a)).fold(f64::NEG_INFINITY, f64::max);
    let far_lo = kc_lo - 40.0 * smax;
    let far_hi = kc_hi + 40.0 * smax;
    let negative = band_mass(components, a, far_lo, 0.0_f64.min(k_grid.k_min), width)?;
    let below = band_mass(components, a, 0.0_f64.max(far_lo), k_grid.k_min, width)?;
    let above = band_mass(components, a, k_grid.k_max, far_hi, width)?;
    let total = inside + negative + below + above;
    if !(total > 0.0) {
        return Err(Error::ZeroMass(total));
    }
    let tail_mass = (below + above) / total;
    if tail_mass > MAX_TAIL_MASS {
        return Err(Error::GridCoverage { tail: tail_mass });
    }
    let scale = 1.0 / inside.sqrt();
    Ok(MomentumAmplitude {
        k_grid,
        psi_tilde: psi.into_iter().map(|p| p * scale).collect(),
        truncated_mass: negative / total,
        tail_mass,
    })
}

impl MomentumAmplitude {
    pub fn len(&self) -> usize {
        self.psi_tilde.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi_tilde.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.psi_tilde.iter().zip(&self.k_grid.weights).map(|(p, w)| w * p.norm_sqr()).sum()
    }

    /// Quadrature coefficients `w_k ψ̃(k) e^{−iαk²t/2}` at time `t`.
    pub fn coefficients(&self, t: f64, alpha: f64) -> Vec<C64> {
        self.k_grid
            .nodes
            .iter()
            .zip(&self.k_grid.weights)
            .zip(&self.psi_tilde)
            .map(|((&k, &w), &p)| w * p * C64::from_polar(1.0, -0.5 * alpha * k * k * t))
            .collect()
    }

    /// Free wavefunction and its slope at `x` from the momentum quadrature.
    pub fn free_value(&self, x: f64, t: f64, alpha: f64) -> (C64, C64) {
        let n = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let mut v = C64::new(0.0, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for (c, &k) in self.coefficients(t, alpha).iter().zip(&self.k_grid.nodes) {
            let e = c * C64::from_polar(1.0, k * x);
            v += e;
            d += I * k * e;
        }
        (n * v, n * d)
    }

    /// Energy mean and standard deviation as rates `E/ħ`.
    pub fn energy_moments(&self, alpha: f64) -> (f64, f64) {
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for ((&k, &w), p) in self.k_grid.nodes.iter().zip(&self.k_grid.weights).zip(&self.psi_tilde) {
            let e = 0.5 * alpha * k * k;
            let d = w * p.norm_sqr();
            m1 += d * e;
            m2 += d * e * e;
        }
        (m1, (m2 - m1 * m1).max(0.0).sqrt())
    }

    /// Smallest `k` with the given cumulative probability.
    pub fn k_quantile(&self, p: f64) -> f64 {
        let mut acc = 0.0;
        for ((&k, &w), ps) in self.k_grid.nodes.iter().zip(&self.k_grid.weights).zip(&self.psi_tilde) {
            acc += w * ps.norm_sqr();
            if acc >= p {
                return k;
            }
        }
        self.k_grid.k_max
    }
}

/// `J(t) = α Im(ψ̄ ∂ₓψ)` at `x = 0` for the free packet.
pub fn free_flux_at_origin(psi: &MomentumAmplitude, grid: &TimeGrid, cfg: &PhysicalConfig) -> TemporalDistribution {
    let a = cfg.alpha;
    let values = (0..grid.n)
        .into_par_iter()
        .map(|i| {
            let (v, d) = psi.free_value(0.0, grid.time(i), a);
            a * (v.conj() * d).im
        })
        .collect();
    TemporalDistribution { grid: *grid, values }
}

/// Same flux from the double momentum sum with kernel `(k + k′)`; quadratic cost.
pub fn free_flux_double_sum(psi: &MomentumAmplitude, grid: &TimeGrid, cfg: &PhysicalConfig) -> TemporalDistribution {
    let a = cfg.alpha;
    let k = &psi.k_grid.nodes;
    let values = (0..grid.n)
        .into_par_iter()
        .map(|i| {
            let c = psi.coefficients(grid.time(i), a);
            let mut s = C64::new(0.0, 0.0);
            for (p, cp) in c.iter().enumerate() {
                for (q, cq) in c.iter().enumerate() {
                    s += cp.conj() * cq * (k[p] + k[q]);
                }
            }
            a * s.re / (4.0 * std::f64::consts::PI)
        })
        .collect();
    TemporalDistribution { grid: *grid, values }
}

/// `Π_K(t) = (α/2π) |∫ dk √k ψ̃(k) e^{−iαk²t/2}|²`.
pub fn kijowski_distribution(psi: &MomentumAmplitude, grid: &TimeGrid, cfg: &PhysicalConfig) -> TemporalDistribution {
    let a = cfg.alpha;
    let values = (0..grid.n)
        .into_par_iter()
        .map(|i| {
            let c = psi.coefficients(grid.time(i), a);
            let s: C64 = c.iter().zip(&psi.k_grid.nodes).map(|(c, k)| c * k.sqrt()).sum();
            a * s.norm_sqr() / (2.0 * std::f64::consts::PI)
        })
        .collect();
    TemporalDistribution { grid: *grid, values }
}
