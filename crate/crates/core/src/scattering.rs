//! Stationary scattering states of the conditional Hamiltonian
//!
//! ```text
//! H_c/ħ = -(α/2) ∂²ₓ + ½ [[0, Ω Θ(x)], [Ω Θ(x), -iγ]]
//! ```
//!
//! for a ground-state plane wave `e^{ikx}` incident from the left.

use num_complex::Complex64 as C64;

use crate::config::PhysicalConfig;
use crate::error::{Error, Result};

/// Relative tolerance on `|γ² − 4Ω²|` below which the confluent form is used.
pub const DEGENERACY_TOL: f64 = 1e-9;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn inv_sqrt_2pi() -> f64 {
    1.0 / (2.0 * std::f64::consts::PI).sqrt()
}

/// Principal square root, negated when its imaginary part is negative.
pub fn sqrt_upper(z: C64) -> C64 {
    let r = z.sqrt();
    if r.im < 0.0 {
        -r
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalEigenpair {
    pub lambda_plus: C64,
    pub lambda_minus: C64,
    pub v_plus: [C64; 2],
    pub v_minus: [C64; 2],
    pub degenerate: bool,
}

impl InternalEigenpair {
    /// `λ(λ + iγ/2) − Ω²/4`, zero for an exact eigenvalue.
    pub fn characteristic_residual(lambda: C64, cfg: &PhysicalConfig) -> C64 {
        lambda * (lambda + 0.5 * I * cfg.gamma) - 0.25 * cfg.omega * cfg.omega
    }
}

pub fn internal_eigensystem(cfg: &PhysicalConfig) -> InternalEigenpair {
    let (g, o) = (cfg.gamma, cfg.omega);
    let disc = g * g - 4.0 * o * o;
    let s = C64::new(disc, 0.0).sqrt();
    let lambda_minus = -0.25 * I * g - 0.25 * I * s;
    // for real roots the small one follows from λ₊λ₋ = −Ω²/4 without cancellation
    let lambda_plus = if disc > 0.0 { -0.25 * o * o / lambda_minus } else { -0.25 * I * g + 0.25 * I * s };
    let degenerate = disc.abs() <= DEGENERACY_TOL * (g * g + 4.0 * o * o);
    let (v_plus, v_minus) = if o > 0.0 {
        ([C64::new(1.0, 0.0), 2.0 * lambda_plus / o], [C64::new(1.0, 0.0), 2.0 * lambda_minus / o])
    } else {
        ([C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
    };
    InternalEigenpair { lambda_plus, lambda_minus, v_plus, v_minus, degenerate }
}

/// One term `(constant + x·linear)·e^{iκx}` of a two-component mode on `x ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub wavenumber: C64,
    pub constant: [C64; 2],
    pub linear: [C64; 2],
}

impl ExpTerm {
    fn value(&self, x: f64) -> [C64; 2] {
        let e = (I * self.wavenumber * x).exp();
        [(self.constant[0] + x * self.linear[0]) * e, (self.constant[1] + x * self.linear[1]) * e]
    }

    fn derivative(&self, x: f64) -> [C64; 2] {
        let e = (I * self.wavenumber * x).exp();
        let d = |c: usize| (self.linear[c] + I * self.wavenumber * (self.constant[c] + x * self.linear[c])) * e;
        [d(0), d(1)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryMode {
    pub k: f64,
    /// `E/ħ`, μs⁻¹.
    pub energy: f64,
    pub omega: f64,
    pub lambda_plus: C64,
    pub lambda_minus: C64,
    pub k_plus: C64,
    pub k_minus: C64,
    pub q: C64,
    pub r1: C64,
    pub r2: C64,
    /// Transmission coefficients; undefined (both diverge) in the confluent case.
    pub c_plus: Option<C64>,
    pub c_minus: Option<C64>,
    /// Common denominator, or its derivative along the eigenvalue splitting when confluent.
    pub d: C64,
    pub confluent: bool,
    /// Representation on `x ≥ 0`, normalization `1/√(2π)` included.
    pub right: Vec<ExpTerm>,
}

fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidWavenumber(k))
    }
}

/// Mode for `k`, using the confluent form exactly at the degenerate point.
pub fn mode(k: f64, cfg: &PhysicalConfig) -> Result<StationaryMode> {
    if internal_eigensystem(cfg).degenerate {
        solve_mode_degenerate(k, cfg)
    } else {
        solve_mode(k, cfg)
    }
}

pub fn solve_mode(k: f64, cfg: &PhysicalConfig) -> Result<StationaryMode> {
    check_k(k)?;
    let eig = internal_eigensystem(cfg);
    if eig.degenerate {
        return Err(Error::DegenerateCoupling);
    }
    let (a, o) = (cfg.alpha, cfg.omega);
    let (lp, lm) = (eig.lambda_plus, eig.lambda_minus);
    let kk = C64::new(k * k, 0.0);
    let kp = sqrt_upper(kk - 2.0 * lp / a);
    let km = sqrt_upper(kk - 2.0 * lm / a);
    let q = sqrt_upper(kk + I * cfg.gamma / a);
    let d = (k + km) * (q + kp) * lp - (k + kp) * (q + km) * lm;
    let c_plus = -2.0 * k * (q + km) * lm / d;
    let c_minus = 2.0 * k * (q + kp) * lp / d;
    // differences of nearly equal wavenumbers through k_±² = k² − 2λ_±/α
    let km_minus_kp = 2.0 * (lp - lm) / (a * (kp + km));
    let r2 = k * km_minus_kp * o / d;
    let r1 = -2.0 * lp * lm * km_minus_kp * (q + k + kp + km) / (a * (k + km) * (k + kp) * d);
    let n = inv_sqrt_2pi();
    let zero = C64::new(0.0, 0.0);
    // excited components written without dividing by Ω
    let right = vec![
        ExpTerm { wavenumber: kp, constant: [n * c_plus, n * k * o * (q + km) / d], linear: [zero; 2] },
        ExpTerm { wavenumber: km, constant: [n * c_minus, -n * k * o * (q + kp) / d], linear: [zero; 2] },
    ];
    Ok(StationaryMode {
        k,
        energy: cfg.energy_rate(k),
        omega: o,
        lambda_plus: lp,
        lambda_minus: lm,
        k_plus: kp,
        k_minus: km,
        q,
        r1,
        r2,
        c_plus: Some(c_plus),
        c_minus: Some(c_minus),
        d,
        confluent: false,
        right,
    })
}

/// Limit of [`solve_mode`] as the two internal eigenvalues merge at `γ = 2Ω`.
pub fn solve_mode_degenerate(k: f64, cfg: &PhysicalConfig) -> Result<StationaryMode> {
    check_k(k)?;
    let (a, o) = (cfg.alpha, cfg.omega);
    let l0 = -0.25 * I * cfg.gamma;
    let kk = C64::new(k * k, 0.0);
    let kap = sqrt_upper(kk - 2.0 * l0 / a);
    let dkap = -1.0 / (a * kap);
    let q = sqrt_upper(kk + I * cfg.gamma / a);
    let dd = (k + kap) * (q + kap + l0 * dkap) - dkap * (q + kap) * l0;
    let r2 = -k * dkap * o / dd;
    // reduced with k − κ = 2λ₀/(α(k + κ)) so that no near-cancelling terms remain
    let r1 = -2.0 * l0 * l0 * (q + k + 2.0 * kap) / (a * a * kap * (k + kap) * (k + kap) * dd);
    let n = inv_sqrt_2pi();
    let f1 = -2.0 * k * n / dd;
    let f2 = k * o * n / dd;
    let right = vec![ExpTerm {
        wavenumber: kap,
        constant: [f1 * (-dkap * l0 - (q + kap)), -f2 * dkap],
        linear: [f1 * I * (q + kap) * l0 * dkap, f2 * dkap * I * (q + kap)],
    }];
    Ok(StationaryMode {
        k,
        energy: cfg.energy_rate(k),
        omega: o,
        lambda_plus: l0,
        lambda_minus: l0,
        k_plus: kap,
        k_minus: kap,
        q,
        r1,
        r2,
        c_plus: None,
        c_minus: None,
        d: dd,
        confluent: true,
        right,
    })
}

impl StationaryMode {
    /// Both components from the `x ≤ 0` formulas, valid for any `x`.
    pub fn left(&self, x: f64) -> [C64; 2] {
        let n = inv_sqrt_2pi();
        let e = (I * self.k * x).exp();
        [n * (e + self.r1 / e), n * self.r2 * (-I * self.q * x).exp()]
    }

    pub fn left_derivative(&self, x: f64) -> [C64; 2] {
        let n = inv_sqrt_2pi();
        let e = (I * self.k * x).exp();
        [n * I * self.k * (e - self.r1 / e), -n * I * self.q * self.r2 * (-I * self.q * x).exp()]
    }

    /// Both components from the `x ≥ 0` formulas, valid for any `x`.
    pub fn right(&self, x: f64) -> [C64; 2] {
        self.right.iter().fold([C64::new(0.0, 0.0); 2], |acc, t| {
            let v = t.value(x);
            [acc[0] + v[0], acc[1] + v[1]]
        })
    }

    pub fn right_derivative(&self, x: f64) -> [C64; 2] {
        self.right.iter().fold([C64::new(0.0, 0.0); 2], |acc, t| {
            let v = t.derivative(x);
            [acc[0] + v[0], acc[1] + v[1]]
        })
    }

    /// `(φ⁽¹⁾(x), φ⁽²⁾(x))`.
    pub fn eval(&self, x: f64) -> [C64; 2] {
        if x < 0.0 {
            self.left(x)
        } else {
            self.right(x)
        }
    }

    pub fn derivative(&self, x: f64) -> [C64; 2] {
        if x < 0.0 {
            self.left_derivative(x)
        } else {
            self.right_derivative(x)
        }
    }

    /// Largest relative mismatch of value and slope between the two sides at `x = 0`.
    pub fn matching_error(&self) -> f64 {
        let (l, r) = (self.left(0.0), self.right(0.0));
        let (dl, dr) = (self.left_derivative(0.0), self.right_derivative(0.0));
        let scale = inv_sqrt_2pi();
        let mut err: f64 = 0.0;
        for c in 0..2 {
            err = err.max((l[c] - r[c]).norm() / scale);
            err = err.max((dl[c] - dr[c]).norm() / (scale * self.k));
        }
        err
    }
}

pub fn eval_mode(mode: &StationaryMode, x: f64) -> [C64; 2] {
    mode.eval(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeGammaRow {
    pub gamma: f64,
    pub lambda_plus: C64,
    pub r1: C64,
    pub r2: C64,
    pub c_plus: Option<C64>,
    pub c_minus: Option<C64>,
    pub k_plus: C64,
    pub k_minus: C64,
    pub q: C64,
}

/// Amplitudes for fixed `k` and `Ω` over an ascending list of decay rates.
pub fn large_gamma_report(k: f64, cfg: &PhysicalConfig, gammas: &[f64]) -> Result<Vec<LargeGammaRow>> {
    if gammas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidConfig("gamma list must be strictly ascending".into()));
    }
    gammas
        .iter()
        .map(|&g| {
            let c = PhysicalConfig::new(g, cfg.omega, cfg.alpha)?;
            let m = mode(k, &c)?;
            Ok(LargeGammaRow {
                gamma: g,
                lambda_plus: m.lambda_plus,
                r1: m.r1,
                r2: m.r2,
                c_plus: m.c_plus,
                c_minus: m.c_minus,
                k_plus: m.k_plus,
                k_minus: m.k_minus,
                q: m.q,
            })
        })
        .collect()
}
