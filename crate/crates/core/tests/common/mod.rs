use arrival_kit::scattering::{mode, StationaryMode};
use arrival_kit::PhysicalConfig;
use num_complex::Complex64 as C64;
use proptest::test_runner::TestCaseError;
use proptest::prop_assert;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Fastest wavenumber present in component `c` on the given side.
fn wave_scale(m: &StationaryMode, left: bool, c: usize) -> f64 {
    match (left, c) {
        (true, 0) => m.k,
        (true, _) => m.q.norm(),
        (false, _) => m.k_plus.norm().max(m.k_minus.norm()),
    }
}

/// Relative residual of the stationary equation for component `c` at `x`, by a
/// five-point second difference with the step set by that component's waves.
fn eigen_residual(m: &StationaryMode, cfg: &PhysicalConfig, x: f64, c: usize) -> f64 {
    let f = |x: f64| if x < 0.0 { m.left(x) } else { m.right(x) };
    let omega = if x > 0.0 { cfg.omega } else { 0.0 };
    let h = 0.02 / wave_scale(m, x < 0.0, c);
    let mid = f(x);
    let v = |j: f64| f(x + j * h)[c];
    let second = (-v(2.0) + 16.0 * v(1.0) - 30.0 * mid[c] + 16.0 * v(-1.0) - v(-2.0)) / (12.0 * h * h);
    let kinetic = -0.5 * cfg.alpha * second;
    let coupling = 0.5 * omega * mid[1 - c];
    let decay = if c == 1 { -0.5 * I * cfg.gamma * mid[1] } else { C64::new(0.0, 0.0) };
    let energy = m.energy * mid[c];
    let scale = kinetic.norm() + coupling.norm() + decay.norm() + energy.norm();
    if scale > 0.0 {
        (kinetic + coupling + decay - energy).norm() / scale
    } else {
        0.0
    }
}

pub fn check_mode(k: f64, gamma: f64, omega: f64, alpha: f64) -> Result<(), TestCaseError> {
    let cfg = PhysicalConfig::new(gamma, omega, alpha).unwrap();
    let m = mode(k, &cfg).unwrap();
    prop_assert!(m.matching_error() < 1e-10, "matching error {}", m.matching_error());
    prop_assert!(m.q.im > 0.0, "Im q = {}", m.q.im);
    if omega > 0.0 {
        prop_assert!(m.k_plus.im > 0.0 && m.k_minus.im > 0.0, "k+ {} k- {}", m.k_plus, m.k_minus);
    }
    for c in 0..2 {
        for s in [-2.0, -0.5, 0.5, 2.0] {
            let x = s / wave_scale(&m, s < 0.0, c);
            let r = eigen_residual(&m, &cfg, x, c);
            prop_assert!(r < 1e-6, "residual {r} in component {c} at x = {x}");
        }
    }
    Ok(())
}
