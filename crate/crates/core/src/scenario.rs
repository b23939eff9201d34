//! Scenario files: physical parameters, packet, grids, requested outputs and
//! checks. Presets keep the published numbers in laboratory units and are
//! converted when loaded.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::Deserialize;

use crate::config::{alpha_for_mass, cm_per_s_to_um_per_us, PhysicalConfig, CESIUM_MASS_SI};
use crate::error::{Error, Result};
use crate::evolution::oracle::OracleConfig;
use crate::grid::TimeGrid;
use crate::wavepacket::GaussianComponent;

pub const PRESET_NAMES: [&str; 4] = ["fig1", "fig2", "fig3", "fig4"];

fn preset_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => include_str!("../presets/fig1.toml"),
        "fig2" => include_str!("../presets/fig2.toml"),
        "fig3" => include_str!("../presets/fig3.toml"),
        "fig4" => include_str!("../presets/fig4.toml"),
        _ => return None,
    })
}

/// Distributions a run can tabulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Output {
    Pi,
    PiN,
    PiId,
    W,
    J,
    PiK,
    /// Survival probability `N_t`.
    Survival,
}

impl Output {
    pub const ALL: [Output; 7] = [Output::Pi, Output::PiN, Output::PiId, Output::W, Output::J, Output::PiK, Output::Survival];

    pub fn name(self) -> &'static str {
        match self {
            Output::Pi => "pi",
            Output::PiN => "pi_n",
            Output::PiId => "pi_id",
            Output::W => "w",
            Output::J => "j",
            Output::PiK => "pi_k",
            Output::Survival => "n",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Output::Survival => "1",
            _ => "1/us",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Output::Pi => "Π (first photon)",
            Output::PiN => "Π_N (normalized)",
            Output::PiId => "Π_id (deconvolved)",
            Output::W => "W (atom at rest)",
            Output::J => "J (flux)",
            Output::PiK => "Π_K (Kijowski)",
            Output::Survival => "N_t (survival)",
        }
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Output {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Output::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown output `{s}`")))
    }
}

/// Named acceptance properties a run can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    /// `−dN/dt = Π` pointwise and `∫Π + N_∞ = 1`.
    Conservation,
    /// `∫W = 1` and the mean of `W` equals `C₁`.
    WMoments,
    /// `J` and `Π_K` are normalized and share their mean.
    FluxNorm,
    /// Weak-driving delay `γ/Ω²`, with `J` and `Π_K` indistinguishable.
    Delay,
    /// `Π_id` matches `J` better than `Π` and `Π_K` do; round trip through `W`.
    Deconvolution,
    /// `Π` matches `J` and the strong-driving chain holds.
    StrongDriving,
    /// Substantial reflection loss, `Π_N` on top of `J`, visibly off `Π_K`.
    Normalization,
    /// Spectral `Π` agrees with the finite-difference oracle.
    Oracle,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Conservation,
        Check::WMoments,
        Check::FluxNorm,
        Check::Delay,
        Check::Deconvolution,
        Check::StrongDriving,
        Check::Normalization,
        Check::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Conservation => "conservation",
            Check::WMoments => "w_moments",
            Check::FluxNorm => "flux_norm",
            Check::Delay => "delay",
            Check::Deconvolution => "deconvolution",
            Check::StrongDriving => "strong_driving",
            Check::Normalization => "normalization",
            Check::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown check `{s}`")))
    }
}

// ---- file format ----

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default)]
    description: String,
    physical: PhysicalSection,
    packet: Vec<PacketSection>,
    grids: GridSection,
    #[serde(default)]
    outputs: OutputSection,
    #[serde(default)]
    checks: CheckSection,
    oracle: Option<OracleSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhysicalSection {
    /// μs⁻¹
    gamma: f64,
    omega: Option<f64>,
    omega_over_gamma: Option<f64>,
    /// `Ω²/γ` held fixed, μs⁻¹
    omega_sq_over_gamma: Option<f64>,
    species: Option<String>,
    mass_kg: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PacketSection {
    v_mean_cm_per_s: f64,
    x_mean_um: f64,
    delta_x_um: f64,
    #[serde(default)]
    t_ref_us: f64,
    /// Relative complex amplitude `[re, im]`; the packet is normalized as a whole.
    #[serde(default = "unit_amplitude")]
    amplitude: [f64; 2],
}

fn unit_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    t_start_us: f64,
    t_end_us: f64,
    dt_us: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    distributions: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { distributions: vec!["pi".into(), "j".into(), "pi_k".into()] }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckSection {
    #[serde(default)]
    run: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleSection {
    #[serde(default = "yes")]
    enabled: bool,
    dx_um: f64,
    dt_us: f64,
    x_min_um: f64,
    x_max_um: f64,
    absorber_um: f64,
    t_start_us: f64,
    t_end_us: f64,
}

fn yes() -> bool {
    true
}

// ---- resolved scenario ----

/// How the Rabi frequency follows the decay rate when the latter is swept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    Absolute(f64),
    RatioToGamma(f64),
    /// `Ω = √(P γ)` for fixed `P = Ω²/γ`.
    SquareOverGamma(f64),
}

impl Coupling {
    pub fn omega(self, gamma: f64) -> f64 {
        match self {
            Coupling::Absolute(o) => o,
            Coupling::RatioToGamma(r) => r * gamma,
            Coupling::SquareOverGamma(p) => (p * gamma).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub gamma: f64,
    pub coupling: Coupling,
    pub alpha: f64,
    pub packet: Vec<GaussianComponent>,
    pub grid: TimeGrid,
    pub outputs: Vec<Output>,
    pub checks: Vec<Check>,
    pub oracle: Option<OracleConfig>,
    pub oracle_enabled: bool,
}

impl Scenario {
    pub fn physical(&self) -> Result<PhysicalConfig> {
        PhysicalConfig::new(self.gamma, self.coupling.omega(self.gamma), self.alpha)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = preset_text(name).ok_or_else(|| Error::InvalidConfig(format!("unknown preset `{name}`")))?;
        Self::from_toml(text)
    }

    /// Preset name or path to a scenario file.
    pub fn load(source: &str) -> Result<Self> {
        if preset_text(source).is_some() {
            return Self::preset(source);
        }
        let path = Path::new(source);
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let f: ScenarioFile = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        resolve(f)
    }
}

fn resolve(f: ScenarioFile) -> Result<Scenario> {
    let p = &f.physical;
    let coupling = match (p.omega, p.omega_over_gamma, p.omega_sq_over_gamma) {
        (Some(o), None, None) => Coupling::Absolute(o),
        (None, Some(r), None) => Coupling::RatioToGamma(r),
        (None, None, Some(q)) => Coupling::SquareOverGamma(q),
        (None, None, None) => Coupling::Absolute(0.0),
        _ => return Err(Error::InvalidConfig("give at most one of omega, omega_over_gamma, omega_sq_over_gamma".into())),
    };
    let mass = match (p.species.as_deref(), p.mass_kg) {
        (None, None) | (Some("cesium"), None) => CESIUM_MASS_SI,
        (None, Some(m)) => m,
        (Some(s), None) => return Err(Error::InvalidConfig(format!("unknown species `{s}`; give mass_kg instead"))),
        (Some(_), Some(_)) => return Err(Error::InvalidConfig("give either species or mass_kg".into())),
    };
    if !(mass > 0.0) {
        return Err(Error::InvalidConfig(format!("mass must be positive, got {mass}")));
    }
    let alpha = alpha_for_mass(mass);
    if f.packet.is_empty() {
        return Err(Error::InvalidConfig("scenario needs at least one [[packet]] component".into()));
    }
    let packet = f
        .packet
        .iter()
        .map(|c| {
            if !(c.delta_x_um > 0.0) {
                return Err(Error::InvalidConfig(format!("delta_x_um must be positive, got {}", c.delta_x_um)));
            }
            Ok(GaussianComponent::new(cm_per_s_to_um_per_us(c.v_mean_cm_per_s), c.x_mean_um, c.delta_x_um, c.t_ref_us)
                .with_weight(C64::new(c.amplitude[0], c.amplitude[1])))
        })
        .collect::<Result<Vec<_>>>()?;
    let g = &f.grids;
    let grid = TimeGrid::spanning(g.t_start_us, g.t_end_us, g.dt_us)?;
    let outputs = f.outputs.distributions.iter().map(|s| s.parse()).collect::<Result<Vec<Output>>>()?;
    let checks = f.checks.run.iter().map(|s| s.parse()).collect::<Result<Vec<Check>>>()?;
    let (oracle, oracle_enabled) = match &f.oracle {
        Some(o) => (
            Some(OracleConfig {
                dx: o.dx_um,
                dt: o.dt_us,
                x_min: o.x_min_um,
                x_max: o.x_max_um,
                absorber_width: o.absorber_um,
                t_start: o.t_start_us,
                t_end: o.t_end_us,
            }),
            o.enabled,
        ),
        None => (None, false),
    };
    let s = Scenario {
        name: f.name,
        description: f.description,
        gamma: p.gamma,
        coupling,
        alpha,
        packet,
        grid,
        outputs,
        checks,
        oracle,
        oracle_enabled,
    };
    s.physical()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::cesium_alpha;

    #[test]
    fn presets_load_with_published_values() {
        let f1 = Scenario::preset("fig1").unwrap();
        let c = f1.physical().unwrap();
        assert_eq!(c.gamma, 33.3);
        assert!((c.omega - 0.0999 * 33.3).abs() < 1e-12);
        assert!((c.alpha - cesium_alpha()).abs() < 1e-18);
        assert!((f1.packet[0].v_mean - 0.090297).abs() < 1e-15);
        assert_eq!((f1.packet[0].x_mean, f1.packet[0].delta_x), (-1.85, 0.26));

        let f2 = Scenario::preset("fig2").unwrap();
        assert_eq!(f2.packet.len(), 2);
        assert!((f2.physical().unwrap().omega / 33.3 - 0.37).abs() < 1e-12);
        assert_eq!(f2.packet[0].t_ref, 2.0);

        let f3 = Scenario::preset("fig3").unwrap();
        assert!((f3.physical().unwrap().omega - 166.5).abs() < 1e-9);
        assert_eq!(f3.packet[0].x_mean, -218.02);

        let f4 = Scenario::preset("fig4").unwrap();
        assert!((f4.packet[0].v_mean - 0.009).abs() < 1e-15);
        assert_eq!(f4.packet[0].delta_x, 0.106);
        for name in PRESET_NAMES {
            assert!(Scenario::load(name).unwrap().oracle.is_some());
        }
    }

    #[test]
    fn preset_files_keep_laboratory_units() {
        for name in PRESET_NAMES {
            let text = preset_text(name).unwrap();
            assert!(text.contains("v_mean_cm_per_s"));
            assert!(text.contains("gamma = 33.3"));
        }
    }

    #[test]
    fn bad_files_are_rejected() {
        let ok = r#"
            name = "t"
            [physical]
            gamma = 1.0
            omega = 0.5
            [[packet]]
            v_mean_cm_per_s = 1.0
            x_mean_um = -1.0
            delta_x_um = 0.1
            [grids]
            t_start_us = 0.0
            t_end_us = 10.0
            dt_us = 0.1
        "#;
        let s = Scenario::from_toml(ok).unwrap();
        assert_eq!(s.outputs, vec![Output::Pi, Output::J, Output::PiK]);
        assert!(s.oracle.is_none() && !s.oracle_enabled);
        for bad in [
            ok.replace("omega = 0.5", "omega = 0.5\nomega_over_gamma = 0.1"),
            ok.replace("delta_x_um = 0.1", "delta_x_um = -0.1"),
            ok.replace("dt_us = 0.1", "dt_us = 0.1\nbogus = 1"),
            ok.replace("gamma = 1.0", "gamma = -1.0"),
            ok.replace("[grids]", "[outputs]\ndistributions = [\"nope\"]\n[grids]"),
            "name = 1".to_string(),
        ] {
            assert!(matches!(Scenario::from_toml(&bad), Err(Error::InvalidConfig(_))), "{bad}");
        }
        assert!(Scenario::load("no/such/file.toml").is_err());
    }

    #[test]
    fn coupling_follows_gamma() {
        assert_eq!(Coupling::RatioToGamma(0.5).omega(10.0), 5.0);
        assert_eq!(Coupling::SquareOverGamma(4.0).omega(16.0), 8.0);
        assert_eq!(Coupling::Absolute(3.0).omega(100.0), 3.0);
    }

    #[test]
    fn names_round_trip() {
        for o in Output::ALL {
            assert_eq!(o.name().parse::<Output>().unwrap(), o);
        }
        for c in Check::ALL {
            assert_eq!(c.name().parse::<Check>().unwrap(), c);
        }
    }
}
