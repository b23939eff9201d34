//! Delay and reflection diagnostics, regime classification and distances
//! between distributions.

use serde::Serialize;

use crate::config::PhysicalConfig;
use crate::error::{Error, Result};
use crate::evolution::{nondetection_probability, penetration_population, ModeTable};
use crate::grid::{trapezoid, TemporalDistribution, TimeGrid, NUMERICAL_FLOOR};
use crate::scattering::mode;
use crate::wavepacket::MomentumAmplitude;

/// Ratio standing in for "much smaller than".
pub const MUCH_SMALLER: f64 = 10.0;
/// Ratio standing in for "smaller than or comparable to".
pub const SMALLER_OR_COMPARABLE: f64 = 1.0;
/// Largest `N_∞` for which reflection counts as negligible.
pub const NEGLIGIBLE_REFLECTION: f64 = 0.05;
/// Smallest emitted mass for which the penetration integral is meaningful.
pub const MIN_EMITTED_MASS: f64 = 0.99;
/// Cumulative momentum probability defining the smallest significant energy.
pub const SIGNIFICANT_QUANTILE: f64 = 0.01;
/// Relative slack when comparing a ratio against its factor.
const ROUNDING: f64 = 1e-12;

/// `⟨t⟩_Π − ⟨t⟩_J` with both moments taken on normalized distributions.
pub fn measured_delay(pi: &TemporalDistribution, j: &TemporalDistribution) -> Result<f64> {
    Ok(pi.mean_time()? - j.mean_time()?)
}

/// `∫ N_t⁺ dt`, the delay caused by penetration into the laser region.
///
/// Only valid when reflection is negligible and the atom is detected almost
/// surely; `pi` is the first-photon density on the same window.
pub fn penetration_delay(psi: &MomentumAmplitude, table: &ModeTable, grid: &TimeGrid, pi: &TemporalDistribution) -> Result<f64> {
    let n_infty = nondetection_probability(psi, table)?;
    let pi_mass = pi.integrate();
    if !(n_infty < NEGLIGIBLE_REFLECTION && pi_mass > MIN_EMITTED_MASS) {
        return Err(Error::ReflectionNotNegligible { n_infty, pi_mass });
    }
    Ok(penetration_population(psi, table, grid)?.integrate())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReflectionEstimates {
    pub k_ref: f64,
    /// `E/ħ` at `k_ref`, μs⁻¹.
    pub energy_rate: f64,
    /// `(1/64)(Ω/γ)²(ħΩ/E)²`, weak driving.
    pub r1sq_weak: f64,
    /// `(1/32²)(ħΩ/E)⁴`, strong driving with `E ≫ ħΩ`.
    pub r1sq_strong: f64,
    /// `(1/64)(ħΩ/E)²`, strong driving with `E ≫ ħΩ`.
    pub r2sq_strong: f64,
    pub r1sq_exact: f64,
    pub r2sq_exact: f64,
}

impl ReflectionEstimates {
    /// Estimate over exact value; `None` when the exact value vanishes.
    pub fn ratio(estimate: f64, exact: f64) -> Option<f64> {
        (exact > 0.0).then(|| estimate / exact)
    }

    pub fn weak_ratio(&self) -> Option<f64> {
        Self::ratio(self.r1sq_weak, self.r1sq_exact)
    }

    pub fn strong_ratios(&self) -> (Option<f64>, Option<f64>) {
        (Self::ratio(self.r1sq_strong, self.r1sq_exact), Self::ratio(self.r2sq_strong, self.r2sq_exact))
    }
}

pub fn reflection_estimates(cfg: &PhysicalConfig, k_ref: f64) -> Result<ReflectionEstimates> {
    let m = mode(k_ref, cfg)?;
    let e = cfg.energy_rate(k_ref);
    let (w, g) = (cfg.omega, cfg.gamma);
    let s = w / e;
    let r1sq_weak = if w == 0.0 { 0.0 } else { (w / g).powi(2) * s * s / 64.0 };
    Ok(ReflectionEstimates {
        k_ref,
        energy_rate: e,
        r1sq_weak,
        r1sq_strong: s.powi(4) / 1024.0,
        r2sq_strong: s * s / 64.0,
        r1sq_exact: m.r1.norm_sqr(),
        r2sq_exact: m.r2.norm_sqr(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Driving {
    Weak,
    Strong,
    Intermediate,
}

impl Driving {
    /// Weak when `Ω ≤ γ/4`, strong when `Ω ≥ γ`.
    pub fn of(cfg: &PhysicalConfig) -> Self {
        if cfg.omega <= 0.25 * cfg.gamma {
            Driving::Weak
        } else if cfg.omega >= cfg.gamma {
            Driving::Strong
        } else {
            Driving::Intermediate
        }
    }
}

/// One evaluated inequality `factor · lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub factor: f64,
    pub satisfied: bool,
}

impl Margin {
    pub fn new(name: &str, lhs: f64, rhs: f64, factor: f64) -> Self {
        let satisfied = factor * lhs <= rhs * (1.0 + ROUNDING);
        Self { name: name.to_string(), lhs, rhs, factor, satisfied }
    }

    /// `rhs / lhs`.
    pub fn ratio(&self) -> f64 {
        self.rhs / self.lhs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub driving: Driving,
    /// μs; absent when nothing is emitted.
    pub tau_d_measured: Option<f64>,
    /// Mean waiting time `γ/Ω² + 2/γ` of the atom at rest, μs.
    pub tau_d_estimate: f64,
    pub tau_d_weak_law: f64,
    pub tau_d_strong_law: f64,
    /// Estimates at the mean wavenumber, picked by driving strength.
    pub reflection_estimate_r1sq: f64,
    pub reflection_estimate_r2sq: f64,
    pub reflection: ReflectionEstimates,
    pub n_infty: f64,
    pub delta_e_over_hbar: f64,
    /// Mean energy rate, μs⁻¹.
    pub e_tilde_mean: f64,
    /// Energy rate at the low momentum quantile, μs⁻¹.
    pub e_tilde_min: f64,
    /// FWHM of Π, μs.
    pub pi_width: f64,
    pub much_smaller_factor: f64,
    pub inequality_margins: Vec<Margin>,
    pub note: Option<String>,
}

impl RegimeReport {
    pub fn margin(&self, name: &str) -> Option<&Margin> {
        self.inequality_margins.iter().find(|m| m.name == name)
    }

    /// Margins of one chain, selected by name prefix.
    pub fn chain(&self, prefix: &str) -> Vec<&Margin> {
        self.inequality_margins.iter().filter(|m| m.name.starts_with(prefix)).collect()
    }

    pub fn chain_satisfied(&self, prefix: &str) -> bool {
        let c = self.chain(prefix);
        !c.is_empty() && c.iter().all(|m| m.satisfied)
    }
}

/// Mean wavenumber of `|ψ̃|²`.
pub fn mean_wavenumber(psi: &MomentumAmplitude) -> f64 {
    let norm = psi.norm();
    psi.k_grid.nodes.iter().zip(&psi.k_grid.weights).zip(&psi.psi_tilde).map(|((k, w), p)| k * w * p.norm_sqr()).sum::<f64>() / norm
}

/// Evaluate every inequality with the default factors.
pub fn classify_regime(cfg: &PhysicalConfig, psi: &MomentumAmplitude, pi: &TemporalDistribution, j: &TemporalDistribution) -> Result<RegimeReport> {
    classify_regime_with(cfg, psi, pi, j, MUCH_SMALLER)
}

pub fn classify_regime_with(
    cfg: &PhysicalConfig,
    psi: &MomentumAmplitude,
    pi: &TemporalDistribution,
    j: &TemporalDistribution,
    much: f64,
) -> Result<RegimeReport> {
    let (g, w) = (cfg.gamma, cfg.omega);
    let driving = Driving::of(cfg);
    let (e_mean, e_std) = psi.energy_moments(cfg.alpha);
    let e_min = cfg.energy_rate(psi.k_quantile(SIGNIFICANT_QUANTILE));
    // the conservative choice between the two readings of the energy scale
    let e_tilde = e_mean.min(e_min);
    let delta_e = 2.0 * e_std;
    let pi_width = pi.fwhm();
    let weak_law = g / (w * w);
    let strong_law = 2.0 / g;
    let tau_d_measured = if pi.integrate() > NUMERICAL_FLOOR { Some(measured_delay(pi, j)?) } else { None };
    let reflection = reflection_estimates(cfg, mean_wavenumber(psi))?;
    let (r1, r2) = match driving {
        Driving::Weak => (reflection.r1sq_weak, 0.0),
        _ => (reflection.r1sq_strong, reflection.r2sq_strong),
    };
    let table = ModeTable::build(psi, cfg)?;
    let n_infty = nondetection_probability(psi, &table)?;
    let inequality_margins = vec![
        Margin::new("large_gamma: omega^2/gamma << dE/hbar", w * w / g, delta_e, much),
        Margin::new("large_gamma: dE/hbar << gamma", delta_e, g, much),
        Margin::new("weak: hbar/E <~ gamma/omega^2", 1.0 / e_tilde, weak_law, SMALLER_OR_COMPARABLE),
        Margin::new("weak: gamma/omega^2 << dt", weak_law, pi_width, much),
        Margin::new("strong: hbar/E << 1/omega", 1.0 / e_tilde, 1.0 / w, much),
        Margin::new("strong: 1/omega << 2/gamma", 1.0 / w, strong_law, much),
        Margin::new("strong: 2/gamma << dt", strong_law, pi_width, much),
    ];
    let note = (w == 0.0).then(|| "no coupling: the laser is off and no photon is ever emitted".to_string());
    Ok(RegimeReport {
        driving,
        tau_d_measured,
        tau_d_estimate: weak_law + strong_law,
        tau_d_weak_law: weak_law,
        tau_d_strong_law: strong_law,
        reflection_estimate_r1sq: r1,
        reflection_estimate_r2sq: r2,
        reflection,
        n_infty,
        delta_e_over_hbar: delta_e,
        e_tilde_mean: e_mean,
        e_tilde_min: e_min,
        pi_width,
        much_smaller_factor: much,
        inequality_margins,
        note,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    L1,
    Linf,
    /// `L∞(a − b) / max(b)`.
    PeakRelative,
}

pub fn distribution_distance(a: &TemporalDistribution, b: &TemporalDistribution, metric: Metric) -> Result<f64> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::GridMismatch(format!(
            "({}, {}, {}) vs ({}, {}, {})",
            a.grid.t0, a.grid.dt, a.grid.n, b.grid.t0, b.grid.dt, b.grid.n
        )));
    }
    let diff: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).collect();
    let linf = diff.iter().cloned().fold(0.0, f64::max);
    Ok(match metric {
        Metric::L1 => trapezoid(&diff, a.grid.dt),
        Metric::Linf => linf,
        Metric::PeakRelative => {
            let peak = b.peak();
            if !(peak > 0.0) {
                return Err(Error::ZeroMass(peak));
            }
            linf / peak
        }
    })
}
