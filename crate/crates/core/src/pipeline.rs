//! End-to-end runs of a scenario: every distribution, the regime report,
//! distances and the requested checks.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{classify_regime, distribution_distance, measured_delay, Metric, RegimeReport};
use crate::config::{cm_per_s_to_um_per_us, PhysicalConfig};
use crate::deconvolution::{atom_at_rest_density, atom_at_rest_grid, atom_at_rest_value, convolve, ideal_distribution, normalize, InverseFilter};
use crate::error::{Error, Result};
use crate::evolution::oracle::oracle_evolve;
use crate::evolution::{default_x_grid, first_photon_density, nondetection_probability, survival_probability, ModeTable};
use crate::grid::{TemporalDistribution, TimeGrid};
use crate::scenario::{Check, Coupling, Output, Scenario};
use crate::wavepacket::{build_momentum_amplitude, free_flux_at_origin, kijowski_distribution, packet_k_grid, MomentumAmplitude};

pub const CONSERVATION_TOL: f64 = 1e-3;
pub const MASS_BUDGET_TOL: f64 = 1e-3;
pub const W_NORM_TOL: f64 = 1e-6;
pub const W_MEAN_REL_TOL: f64 = 0.01;
pub const FLUX_NORM_TOL: f64 = 1e-4;
pub const MEAN_MATCH_STEPS: f64 = 3.0;
pub const DELAY_REL_TOL: f64 = 0.25;
pub const FLUX_KIJOWSKI_TOL: f64 = 0.01;
pub const IDEAL_FLUX_TOL: f64 = 0.03;
pub const ROUND_TRIP_TOL: f64 = 0.02;
pub const INDISTINGUISHABLE_TOL: f64 = 0.02;
pub const REFLECTION_LOSS_MAX_MASS: f64 = 0.9;
pub const ORACLE_TOL: f64 = 0.01;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the scenario's oracle switch.
    pub oracle: Option<bool>,
    /// Replaces the scenario's check list.
    pub checks: Option<Vec<Check>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub gamma: f64,
    pub omega: f64,
    pub alpha: f64,
    pub k_nodes: usize,
    pub truncated_mass: f64,
    pub tail_mass: f64,
    pub pi_mass: f64,
    pub n_infty: f64,
    pub pi_mass_plus_n_infty: f64,
    pub j_mass: f64,
    pub pi_k_mass: f64,
    pub tau_d: Option<f64>,
    /// `max |−dN/dt − Π| / max Π`.
    pub conservation_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub t_start: f64,
    pub t_end: f64,
    /// `max |Π − Π_oracle| / max Π` on the oracle window.
    pub linf_relative: f64,
    pub budget_error: f64,
    pub initial_overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub scenario: String,
    pub cfg: PhysicalConfig,
    pub grid: TimeGrid,
    /// Requested columns in request order.
    pub columns: Vec<(Output, TemporalDistribution)>,
    pub summary: Summary,
    pub regime: RegimeReport,
    pub distances: BTreeMap<String, f64>,
    pub oracle: Option<OracleSummary>,
    pub checks: Vec<CheckOutcome>,
}

impl RunResult {
    pub fn column(&self, o: Output) -> Option<&TemporalDistribution> {
        self.columns.iter().find(|(k, _)| *k == o).map(|(_, d)| d)
    }

    pub fn failed_checks(&self) -> Vec<&CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Everything computed for a run before it is reduced to columns and checks.
struct Computed {
    cfg: PhysicalConfig,
    psi: MomentumAmplitude,
    pi: TemporalDistribution,
    j: TemporalDistribution,
    pi_k: TemporalDistribution,
    n_infty: f64,
    survival: Option<TemporalDistribution>,
    pi_n: Option<TemporalDistribution>,
    pi_id: Option<TemporalDistribution>,
    round_trip: Option<TemporalDistribution>,
}

fn pr(a: &TemporalDistribution, b: &TemporalDistribution) -> Result<f64> {
    distribution_distance(a, b, Metric::PeakRelative)
}

/// Momentum amplitude for a scenario, with panels fine enough for the spatial
/// grid of the survival integral when `with_survival` is set.
pub fn scenario_amplitude(s: &Scenario, cfg: &PhysicalConfig, with_survival: bool) -> Result<MomentumAmplitude> {
    let rough = build_momentum_amplitude(&s.packet, cfg, packet_k_grid(&s.packet, cfg, &s.grid, 0.0)?)?;
    if !with_survival {
        return Ok(rough);
    }
    let xg = default_x_grid(&s.packet, &rough, cfg, &s.grid, 0.0)?;
    build_momentum_amplitude(&s.packet, cfg, packet_k_grid(&s.packet, cfg, &s.grid, xg.x_min)?)
}

fn compute(s: &Scenario, checks: &[Check]) -> Result<Computed> {
    let cfg = s.physical()?;
    let grid = s.grid;
    let wants = |o: Output| s.outputs.contains(&o);
    let checking = |c: Check| checks.contains(&c);
    let with_survival = wants(Output::Survival) || checking(Check::Conservation);
    let psi = scenario_amplitude(s, &cfg, with_survival)?;
    let table = ModeTable::build(&psi, &cfg)?;
    let j = free_flux_at_origin(&psi, &grid, &cfg);
    let pi_k = kijowski_distribution(&psi, &grid, &cfg);
    let pi = first_photon_density(&psi, &table, &grid)?;
    let n_infty = nondetection_probability(&psi, &table)?;
    let survival = if with_survival {
        let xg = default_x_grid(&s.packet, &psi, &cfg, &grid, 0.0)?;
        Some(survival_probability(&psi, &table, &grid, &xg)?)
    } else {
        None
    };
    let pi_n = if wants(Output::PiN) || checking(Check::Normalization) { Some(normalize(&pi)?) } else { None };
    let need_id = wants(Output::PiId) || checking(Check::Deconvolution);
    let (pi_id, round_trip) = if need_id {
        let id = ideal_distribution(&pi, &cfg)?;
        let w = atom_at_rest_density(&cfg, &atom_at_rest_grid(&cfg, grid.dt)?)?;
        let back = convolve(&id, &w)?.restrict(&grid)?;
        (Some(id), Some(back))
    } else {
        (None, None)
    };
    Ok(Computed { cfg, psi, pi, j, pi_k, n_infty, survival, pi_n, pi_id, round_trip })
}

fn outcome(c: Check, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name: c.name().to_string(), passed, detail }
}

fn evaluate(c: Check, k: &Computed, grid: &TimeGrid, regime: &RegimeReport, oracle: Option<&OracleSummary>) -> Result<CheckOutcome> {
    let cfg = &k.cfg;
    Ok(match c {
        Check::Conservation => {
            let n = k.survival.as_ref().ok_or_else(|| Error::InvalidConfig("conservation needs the survival probability".into()))?;
            let rate = n.derivative(1)?;
            let peak = k.pi.peak();
            let worst = rate.values.iter().zip(&k.pi.values).map(|(d, p)| (d + p).abs()).fold(0.0, f64::max);
            let budget = k.pi.integrate() + k.n_infty;
            let pointwise_ok = if peak > 0.0 { worst < CONSERVATION_TOL * peak } else { worst < CONSERVATION_TOL };
            let budget_ok = (budget - 1.0).abs() <= MASS_BUDGET_TOL;
            outcome(
                c,
                pointwise_ok && budget_ok,
                format!("max|dN/dt + Pi| = {worst:.3e} (peak Pi {peak:.3e}); int Pi + N_inf = {budget:.6}"),
            )
        }
        Check::WMoments => {
            let f = InverseFilter::new(cfg)?;
            let g = atom_at_rest_grid(cfg, grid.dt.min(0.005 * f.c1))?;
            let w = atom_at_rest_density(cfg, &g)?;
            let (norm, mean) = (w.integrate(), w.mean_time()?);
            let ok = (norm - 1.0).abs() <= W_NORM_TOL && (mean - f.c1).abs() <= W_MEAN_REL_TOL * f.c1;
            outcome(c, ok, format!("int W = {norm:.9}; mean W = {mean:.6e} us vs C1 = {:.6e} us", f.c1))
        }
        Check::FluxNorm => {
            let (nj, nk) = (k.j.integrate(), k.pi_k.integrate());
            let gap = (k.j.mean_time()? - k.pi_k.mean_time()?).abs();
            let ok = (nj - 1.0).abs() <= FLUX_NORM_TOL && (nk - 1.0).abs() <= FLUX_NORM_TOL && gap < MEAN_MATCH_STEPS * grid.dt;
            outcome(c, ok, format!("int J = {nj:.7}; int Pi_K = {nk:.7}; |<t>_J - <t>_K| = {gap:.3e} us"))
        }
        Check::Delay => {
            let tau = measured_delay(&k.pi, &k.j)?;
            let law = regime.tau_d_weak_law;
            let jk = pr(&k.j, &k.pi_k)?;
            let ok = (tau - law).abs() <= DELAY_REL_TOL * law && jk < FLUX_KIJOWSKI_TOL;
            outcome(c, ok, format!("tau_d = {tau:.4} us vs gamma/omega^2 = {law:.4} us; peak-relative(J, Pi_K) = {jk:.3e}"))
        }
        Check::Deconvolution => {
            let id = k.pi_id.as_ref().expect("computed for this check");
            let back = k.round_trip.as_ref().expect("computed for this check");
            let (d_id, d_pi, d_k) = (pr(id, &k.j)?, pr(&k.pi, &k.j)?, pr(&k.pi_k, &k.j)?);
            let d_rt = pr(back, &k.pi)?;
            let ok = d_id < IDEAL_FLUX_TOL && d_pi > d_id && d_k > d_id && d_rt < ROUND_TRIP_TOL;
            outcome(
                c,
                ok,
                format!("peak-relative to J: Pi_id {d_id:.3e}, Pi {d_pi:.3e}, Pi_K {d_k:.3e}; round trip {d_rt:.3e}"),
            )
        }
        Check::StrongDriving => {
            let d = pr(&k.pi, &k.j)?;
            let chain: Vec<String> = regime.chain("strong").iter().map(|m| format!("{} ratio {:.3}", m.name, m.ratio())).collect();
            let ok = d < INDISTINGUISHABLE_TOL && regime.chain_satisfied("strong");
            outcome(c, ok, format!("peak-relative(Pi, J) = {d:.3e}; {}", chain.join("; ")))
        }
        Check::Normalization => {
            let pn = k.pi_n.as_ref().expect("computed for this check");
            let mass = k.pi.integrate();
            let (dj, dk) = (pr(pn, &k.j)?, pr(pn, &k.pi_k)?);
            let ok = mass < REFLECTION_LOSS_MAX_MASS && dj < INDISTINGUISHABLE_TOL && dk > dj;
            outcome(c, ok, format!("int Pi = {mass:.4}; peak-relative(Pi_N, J) = {dj:.3e}; peak-relative(Pi_N, Pi_K) = {dk:.3e}"))
        }
        Check::Oracle => match oracle {
            Some(o) => outcome(
                c,
                o.linf_relative < ORACLE_TOL,
                format!("max|Pi - Pi_oracle| / max Pi = {:.3e} on [{}, {}] us; budget error {:.1e}", o.linf_relative, o.t_start, o.t_end, o.budget_error),
            ),
            None => outcome(c, false, "oracle not run (disabled or not configured)".into()),
        },
    })
}

fn run_oracle(s: &Scenario, cfg: &PhysicalConfig, pi: &TemporalDistribution) -> Result<OracleSummary> {
    let oc = s.oracle.as_ref().ok_or_else(|| Error::InvalidConfig(format!("scenario `{}` has no [oracle] section", s.name)))?;
    let out = oracle_evolve(&s.packet, cfg, &s.grid, oc)?;
    let spectral = pi.restrict(&out.density.grid)?;
    let peak = pi.peak();
    let linf = spectral.values.iter().zip(&out.density.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(OracleSummary {
        t_start: out.density.grid.t0,
        t_end: out.density.grid.end(),
        linf_relative: if peak > 0.0 { linf / peak } else { linf },
        budget_error: out.budget_error(),
        initial_overlap: out.initial_overlap,
    })
}

pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<RunResult> {
    let checks = opts.checks.clone().unwrap_or_else(|| s.checks.clone());
    let use_oracle = opts.oracle.unwrap_or(s.oracle_enabled) && (s.oracle.is_some() || checks.contains(&Check::Oracle));
    let k = compute(s, &checks)?;
    let grid = s.grid;
    let cfg = k.cfg;
    let regime = classify_regime(&cfg, &k.psi, &k.pi, &k.j)?;
    let oracle = if use_oracle { Some(run_oracle(s, &cfg, &k.pi)?) } else { None };

    let mut distances = BTreeMap::new();
    let mut put = |name: &str, v: Result<f64>| {
        if let Ok(v) = v {
            distances.insert(name.to_string(), v);
        }
    };
    put("peak_relative(pi, j)", pr(&k.pi, &k.j));
    put("peak_relative(pi_k, j)", pr(&k.pi_k, &k.j));
    put("peak_relative(j, pi_k)", pr(&k.j, &k.pi_k));
    put("l1(pi, j)", distribution_distance(&k.pi, &k.j, Metric::L1));
    if let Some(pn) = &k.pi_n {
        put("peak_relative(pi_n, j)", pr(pn, &k.j));
        put("peak_relative(pi_n, pi_k)", pr(pn, &k.pi_k));
    }
    if let Some(id) = &k.pi_id {
        put("peak_relative(pi_id, j)", pr(id, &k.j));
        put("l1(pi_id, j)", distribution_distance(id, &k.j, Metric::L1));
    }
    if let Some(back) = &k.round_trip {
        put("peak_relative(pi_id * w, pi)", pr(back, &k.pi));
    }

    let conservation_error = match &k.survival {
        Some(n) => {
            let rate = n.derivative(1)?;
            let worst = rate.values.iter().zip(&k.pi.values).map(|(d, p)| (d + p).abs()).fold(0.0, f64::max);
            let peak = k.pi.peak();
            Some(if peak > 0.0 { worst / peak } else { worst })
        }
        None => None,
    };
    let pi_mass = k.pi.integrate();
    let summary = Summary {
        gamma: cfg.gamma,
        omega: cfg.omega,
        alpha: cfg.alpha,
        k_nodes: k.psi.len(),
        truncated_mass: k.psi.truncated_mass,
        tail_mass: k.psi.tail_mass,
        pi_mass,
        n_infty: k.n_infty,
        pi_mass_plus_n_infty: pi_mass + k.n_infty,
        j_mass: k.j.integrate(),
        pi_k_mass: k.pi_k.integrate(),
        tau_d: regime.tau_d_measured,
        conservation_error,
    };
    let checks = checks.iter().map(|&c| evaluate(c, &k, &grid, &regime, oracle.as_ref())).collect::<Result<Vec<_>>>()?;

    let mut columns = Vec::new();
    for &o in &s.outputs {
        let d = match o {
            Output::Pi => k.pi.clone(),
            Output::J => k.j.clone(),
            Output::PiK => k.pi_k.clone(),
            Output::PiN => k.pi_n.clone().expect("computed when requested"),
            Output::PiId => k.pi_id.clone().expect("computed when requested"),
            Output::Survival => k.survival.clone().expect("computed when requested"),
            Output::W => {
                InverseFilter::new(&cfg)?;
                TemporalDistribution::from_fn(grid, |t| atom_at_rest_value(&cfg, t))
            }
        };
        columns.push((o, d));
    }
    Ok(RunResult { scenario: s.name.clone(), cfg, grid, columns, summary, regime, distances, oracle, checks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Gamma,
    Omega,
    /// Mean velocity of every component, in cm/s.
    VMean,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(SweepParam::Gamma),
            "omega" => Ok(SweepParam::Omega),
            "v_mean" => Ok(SweepParam::VMean),
            _ => Err(Error::InvalidConfig(format!("unknown sweep parameter `{s}` (gamma, omega or v_mean)"))),
        }
    }
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Gamma => "gamma",
            SweepParam::Omega => "omega",
            SweepParam::VMean => "v_mean",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            SweepParam::Gamma | SweepParam::Omega => "1/us",
            SweepParam::VMean => "cm/s",
        }
    }

    /// Copy of the scenario with the parameter set to `value`. Sweeping
    /// `gamma` keeps the scenario's rule for the Rabi frequency.
    pub fn apply(self, s: &Scenario, value: f64) -> Scenario {
        let mut s = s.clone();
        match self {
            SweepParam::Gamma => s.gamma = value,
            SweepParam::Omega => s.coupling = Coupling::Absolute(value),
            SweepParam::VMean => {
                for c in &mut s.packet {
                    c.v_mean = cm_per_s_to_um_per_us(value);
                }
            }
        }
        s.name = format!("{}_{}_{}", s.name, self.name(), value);
        s
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub result: RunResult,
}

impl SweepPoint {
    pub fn l1_ideal_flux(&self) -> Option<f64> {
        self.result.distances.get("l1(pi_id, j)").copied()
    }
}

/// Runs the scenario at every value, in parallel. `Π_id` is always added
/// when the atom is driven so the summary can report `L¹(Π_id − J)`.
pub fn sweep(s: &Scenario, param: SweepParam, values: &[f64], opts: &RunOptions) -> Result<Vec<SweepPoint>> {
    if values.len() < 2 {
        return Err(Error::InvalidConfig("a sweep needs at least two values".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("sweep values must be finite".into()));
    }
    values
        .par_iter()
        .map(|&v| {
            let mut point = param.apply(s, v);
            if point.physical()?.omega > 0.0 && !point.outputs.contains(&Output::PiId) {
                point.outputs.push(Output::PiId);
            }
            Ok(SweepPoint { value: v, result: run_scenario(&point, opts)? })
        })
        .collect()
}
