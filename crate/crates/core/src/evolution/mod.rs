//! Conditional (no-photon) evolution by expansion in stationary modes, with
//! the survival probability `N_t`, the first-photon density `Π(t)` and the
//! no-detection probability `N_∞`.

mod kernel;
pub mod oracle;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::config::PhysicalConfig;
use crate::error::{Error, Result};
use crate::grid::{TemporalDistribution, TimeGrid};
use crate::scattering::{mode, StationaryMode};
use crate::wavepacket::{GaussianComponent, MomentumAmplitude};

pub use kernel::{HermitianKernel, KernelKind};

/// Largest norm allowed beyond the far edge of the spatial grid, estimated as
/// `|x_min|` times the edge density. Cutting the amplitude at `k = 0` leaves a
/// `1/x²` tail, for which this estimate is exact.
pub const BOUNDARY_MASS_TOL: f64 = 1e-5;

/// Stationary modes on the nodes of a momentum amplitude.
#[derive(Debug, Clone)]
pub struct ModeTable {
    pub cfg: PhysicalConfig,
    pub k: Vec<f64>,
    pub modes: Vec<StationaryMode>,
}

impl ModeTable {
    pub fn build(psi: &MomentumAmplitude, cfg: &PhysicalConfig) -> Result<Self> {
        let modes = psi.k_grid.nodes.par_iter().map(|&k| mode(k, cfg)).collect::<Result<Vec<_>>>()?;
        Ok(Self { cfg: *cfg, k: psi.k_grid.nodes.clone(), modes })
    }

    fn check(&self, psi: &MomentumAmplitude) -> Result<()> {
        if self.k != psi.k_grid.nodes {
            return Err(Error::InconsistentGrids);
        }
        Ok(())
    }

    pub fn kernel(&self, kind: KernelKind) -> HermitianKernel {
        HermitianKernel::build(&self.modes, kind)
    }
}

/// Uniform spatial grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl XGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_max > x_min) || n < 3 {
            return Err(Error::InvalidConfig(format!("bad spatial grid [{x_min}, {x_max}] with {n} points")));
        }
        Ok(Self { x_min, x_max, n })
    }

    /// Grid with spacing at most `h`, odd number of points.
    pub fn with_spacing(x_min: f64, x_max: f64, h: f64) -> Result<Self> {
        let mut n = ((x_max - x_min) / h).ceil() as usize + 1;
        if n % 2 == 0 {
            n += 1;
        }
        Self::new(x_min, x_max, n.max(3))
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + self.h() * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// The part `[x_min, 0]`, keeping roughly the same spacing.
    fn left_part(&self) -> Result<Self> {
        if !(self.x_min < 0.0) {
            return Err(Error::InvalidConfig("spatial grid must extend to x < 0".into()));
        }
        Self::with_spacing(self.x_min, 0.0, self.h())
    }
}

/// Simpson's rule on an odd number of samples (trapezoid fallback).
fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 3 || n % 2 == 0 {
        return crate::grid::trapezoid(values, h);
    }
    let mut s = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        s += v * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Default spatial grid for a packet over a time window: wide enough to hold
/// the incident and the reflected packet, fine enough for the momentum spread.
pub fn default_x_grid(components: &[GaussianComponent], psi: &MomentumAmplitude, cfg: &PhysicalConfig, grid: &TimeGrid, right_reach: f64) -> Result<XGrid> {
    let a = cfg.alpha;
    let mut reach: f64 = 0.0;
    let mut spread: f64 = 0.0;
    for c in components {
        for t in [grid.t0, grid.end()] {
            reach = reach.max(c.center(t).abs());
            spread = spread.max(c.spread(t, a));
        }
        // the packet may be tightest in between but never wider than at the ends
    }
    let band = psi.k_grid.k_max - psi.k_grid.k_min;
    let h = std::f64::consts::PI / (4.0 * band);
    XGrid::with_spacing(-(reach + 10.0 * spread), right_reach.max(h), h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalState {
    pub x_grid: XGrid,
    pub comp1: Vec<C64>,
    pub comp2: Vec<C64>,
    pub t: f64,
}

impl ConditionalState {
    /// `∫ (|ψ⁽¹⁾|² + |ψ⁽²⁾|²) dx` on the grid.
    pub fn norm(&self) -> f64 {
        let d: Vec<f64> = self.comp1.iter().zip(&self.comp2).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect();
        simpson(&d, self.x_grid.h())
    }

    pub fn excited_norm(&self) -> f64 {
        let d: Vec<f64> = self.comp2.iter().map(|b| b.norm_sqr()).collect();
        simpson(&d, self.x_grid.h())
    }
}

/// `Ψ(x, t) = ∫ dk ψ̃(k) Φ_k(x) e^{−iαk²t/2}` on a spatial grid.
pub fn conditional_state(psi: &MomentumAmplitude, table: &ModeTable, t: f64, x_grid: &XGrid) -> Result<ConditionalState> {
    table.check(psi)?;
    let c = psi.coefficients(t, table.cfg.alpha);
    let (comp1, comp2): (Vec<C64>, Vec<C64>) = x_grid
        .points()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&x| {
            let mut v = [C64::new(0.0, 0.0); 2];
            for (ck, m) in c.iter().zip(&table.modes) {
                let p = m.eval(x);
                v[0] += ck * p[0];
                v[1] += ck * p[1];
            }
            (v[0], v[1])
        })
        .unzip();
    Ok(ConditionalState { x_grid: *x_grid, comp1, comp2, t })
}

fn coefficient_sets(psi: &MomentumAmplitude, grid: &TimeGrid, alpha: f64) -> Vec<Vec<C64>> {
    (0..grid.n).into_par_iter().map(|i| psi.coefficients(grid.time(i), alpha)).collect()
}

/// `Π(t) = γ ∫ |ψ⁽²⁾(x,t)|² dx`, with the x-integral done analytically.
pub fn first_photon_density(psi: &MomentumAmplitude, table: &ModeTable, grid: &TimeGrid) -> Result<TemporalDistribution> {
    table.check(psi)?;
    let cfg = &table.cfg;
    if cfg.is_free() {
        return Ok(TemporalDistribution::zeros(*grid));
    }
    let g = table.kernel(KernelKind::Excited);
    let forms = g.forms(&coefficient_sets(psi, grid, cfg.alpha));
    // clip rounding noise below zero, never rescale
    let values = forms.into_iter().map(|v| (cfg.gamma * v).max(0.0)).collect();
    TemporalDistribution::new(*grid, values)
}

/// `N_t⁺ = ∫₀^∞ (|ψ⁽¹⁾|² + |ψ⁽²⁾|²) dx`.
pub fn penetration_population(psi: &MomentumAmplitude, table: &ModeTable, grid: &TimeGrid) -> Result<TemporalDistribution> {
    table.check(psi)?;
    let g = table.kernel(KernelKind::Penetration);
    let values = g.forms(&coefficient_sets(psi, grid, table.cfg.alpha)).into_iter().map(|v| v.max(0.0)).collect();
    TemporalDistribution::new(*grid, values)
}

/// Density of the incident and reflected ground envelopes at `x`.
fn envelope_density(c: &[C64], table: &ModeTable, x: f64) -> f64 {
    let (mut inc, mut refl) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for ((ck, m), &k) in c.iter().zip(&table.modes).zip(&table.k) {
        let e = C64::from_polar(1.0, k * x);
        inc += ck * e;
        refl += ck * m.r1 * e.conj();
    }
    (inc.norm_sqr() + refl.norm_sqr()) / (2.0 * std::f64::consts::PI)
}

/// `N_t = ∫ (|ψ⁽¹⁾|² + |ψ⁽²⁾|²) dx` over the whole line.
pub fn survival_probability(psi: &MomentumAmplitude, table: &ModeTable, grid: &TimeGrid, x_grid: &XGrid) -> Result<TemporalDistribution> {
    table.check(psi)?;
    if table.cfg.is_free() {
        return TemporalDistribution::new(*grid, vec![1.0; grid.n]);
    }
    let x_min = x_grid.left_part()?.x_min;
    let sets = coefficient_sets(psi, grid, table.cfg.alpha);
    let g = HermitianKernel::survival_from(&table.modes, x_min);
    let totals = g.forms(&sets);
    let edges: Vec<f64> = sets.par_iter().map(|c| envelope_density(c, table, x_min)).collect();
    let mut values = Vec::with_capacity(grid.n);
    for (i, (total, edge)) in totals.into_iter().zip(edges).enumerate() {
        if edge * x_min.abs() > BOUNDARY_MASS_TOL * total.max(1e-300) {
            return Err(Error::DomainTooSmall { density: edge, t: grid.time(i) });
        }
        values.push(total);
    }
    TemporalDistribution::new(*grid, values)
}

/// `N_∞ = ∫ dk |R₁(k)|² |ψ̃(k)|²`.
pub fn nondetection_probability(psi: &MomentumAmplitude, table: &ModeTable) -> Result<f64> {
    table.check(psi)?;
    Ok(psi
        .psi_tilde
        .iter()
        .zip(&psi.k_grid.weights)
        .zip(&table.modes)
        .map(|((p, w), m)| w * m.r1.norm_sqr() * p.norm_sqr())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepacket::{build_momentum_amplitude, packet_k_grid};

    fn setup(omega: f64, grid: &TimeGrid) -> (Vec<GaussianComponent>, MomentumAmplitude, ModeTable) {
        let cfg = PhysicalConfig::cesium(33.3, omega).unwrap();
        let comps = vec![GaussianComponent::new(0.090297, -1.85, 0.26, 0.0)];
        let kg = packet_k_grid(&comps, &cfg, grid, 0.0).unwrap();
        let psi = build_momentum_amplitude(&comps, &cfg, kg).unwrap();
        let table = ModeTable::build(&psi, &cfg).unwrap();
        (comps, psi, table)
    }

    #[test]
    fn free_evolution_reproduces_free_packet() {
        let grid = TimeGrid::spanning(0.0, 40.0, 0.5).unwrap();
        let (comps, psi, table) = setup(0.0, &grid);
        let xg = XGrid::new(-4.0, 2.0, 301).unwrap();
        let s = conditional_state(&psi, &table, 12.0, &xg).unwrap();
        for (i, x) in xg.points().enumerate() {
            let exact = comps[0].wavefunction(x, 12.0, table.cfg.alpha);
            // the amplitude tail outside the momentum window is about 1.5e-8
            assert!((s.comp1[i] - exact).norm() < 5e-8, "{x} {}", (s.comp1[i] - exact).norm());
            assert_eq!(s.comp2[i], C64::new(0.0, 0.0));
        }
        let pi = first_photon_density(&psi, &table, &grid).unwrap();
        assert!(pi.values.iter().all(|&v| v == 0.0));
        assert_eq!(nondetection_probability(&psi, &table).unwrap(), 0.0);
    }

    #[test]
    fn early_state_has_no_excitation() {
        let grid = TimeGrid::spanning(0.0, 80.0, 0.5).unwrap();
        let (comps, psi, table) = setup(0.0999 * 33.3, &grid);
        let xg = default_x_grid(&comps, &psi, &table.cfg, &grid, 1.0).unwrap();
        let s = conditional_state(&psi, &table, 0.0, &xg).unwrap();
        assert!(s.excited_norm() < 1e-6, "{}", s.excited_norm());
        assert!((s.norm() - 1.0).abs() < 1e-4, "{}", s.norm());
    }

    #[test]
    fn mismatched_tables_are_rejected() {
        let g1 = TimeGrid::spanning(0.0, 80.0, 0.5).unwrap();
        let g2 = TimeGrid::spanning(0.0, 2000.0, 0.5).unwrap();
        let (_, psi, _) = setup(1.0, &g1);
        let (_, _, table) = setup(1.0, &g2);
        assert!(matches!(first_photon_density(&psi, &table, &g1), Err(Error::InconsistentGrids)));
    }

    #[test]
    fn kernel_density_matches_grid_state() {
        let grid = TimeGrid::new(18.0, 1.0, 8).unwrap();
        let (comps, psi, table) = setup(0.0999 * 33.3, &grid);
        let pi = first_photon_density(&psi, &table, &grid).unwrap();
        let n = survival_probability(&psi, &table, &grid, &default_x_grid(&comps, &psi, &table.cfg, &grid, 0.0).unwrap()).unwrap();
        let xg = XGrid::with_spacing(-12.0, 8.0, 4e-4).unwrap();
        for i in [0, 3, 7] {
            let s = conditional_state(&psi, &table, grid.time(i), &xg).unwrap();
            let p = table.cfg.gamma * s.excited_norm();
            assert!((p - pi.values[i]).abs() < 1e-6 * pi.peak().max(1e-3), "{p} {}", pi.values[i]);
            assert!((s.norm() - n.values[i]).abs() < 1e-6, "{} {}", s.norm(), n.values[i]);
        }
    }

    #[test]
    fn small_domain_is_detected() {
        let grid = TimeGrid::new(18.0, 1.0, 8).unwrap();
        let (_, psi, table) = setup(3.3, &grid);
        let xg = XGrid::with_spacing(-1.0, 0.0, 0.01).unwrap();
        assert!(matches!(survival_probability(&psi, &table, &grid, &xg), Err(Error::DomainTooSmall { .. })));
    }
}
