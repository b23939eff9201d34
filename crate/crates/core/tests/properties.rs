use arrival_kit::analysis::{distribution_distance, reflection_estimates, Metric};
use arrival_kit::deconvolution::{atom_at_rest_value, ideal_distribution, w_transform, InverseFilter};
use arrival_kit::quadrature::KGrid;
use arrival_kit::scattering::mode;
use arrival_kit::wavepacket::{build_momentum_amplitude, free_flux_at_origin, packet_k_grid, GaussianComponent};
use arrival_kit::{PhysicalConfig, TemporalDistribution, TimeGrid};
use proptest::prelude::*;

mod common;
use common::check_mode;

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn modes_match_and_solve_the_stationary_equation(k in 0.1..10.0f64, gamma in 1.0..100.0f64, omega in 0.0..100.0f64) {
        check_mode(k, gamma, omega, arrival_kit::config::cesium_alpha())?;
    }

    #[test]
    fn modes_hold_at_laboratory_scales(k in log_uniform(10.0, 3e4), gamma in log_uniform(1.0, 1e4), ratio in log_uniform(1e-4, 50.0)) {
        check_mode(k, gamma, ratio * gamma, arrival_kit::config::cesium_alpha())?;
    }

    #[test]
    fn reflection_is_bounded(k in log_uniform(0.1, 3e4), gamma in log_uniform(1.0, 1e4), ratio in log_uniform(1e-4, 50.0)) {
        let cfg = PhysicalConfig::cesium(gamma, ratio * gamma).unwrap();
        let m = mode(k, &cfg).unwrap();
        prop_assert!(m.r1.norm_sqr() <= 1.0 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection_vanishes_with_the_coupling(k in log_uniform(50.0, 5e3), gamma in log_uniform(10.0, 1e3)) {
        let omega = 1e-4 * gamma;
        let a = mode(k, &PhysicalConfig::cesium(gamma, omega).unwrap()).unwrap();
        let b = mode(k, &PhysicalConfig::cesium(gamma, 0.5 * omega).unwrap()).unwrap();
        let r1 = a.r1.norm() / b.r1.norm();
        let r2 = a.r2.norm() / b.r2.norm();
        prop_assert!((r1 / 4.0 - 1.0).abs() < 1e-3, "|R1| ratio {r1}");
        prop_assert!((r2 / 2.0 - 1.0).abs() < 1e-3, "|R2| ratio {r2}");
    }

    #[test]
    fn strong_driving_estimates_hold_within_a_factor_two(gamma in log_uniform(1.0, 100.0), ratio in log_uniform(10.0, 100.0), excess in log_uniform(10.0, 1e3)) {
        let cfg = PhysicalConfig::cesium(gamma, ratio * gamma).unwrap();
        let k = (2.0 * excess * cfg.omega / cfg.alpha).sqrt();
        let est = reflection_estimates(&cfg, k).unwrap();
        let (r1, r2) = est.strong_ratios();
        for r in [r1.unwrap(), r2.unwrap()] {
            prop_assert!((0.5..=2.0).contains(&r), "ratio {r}");
        }
    }

    #[test]
    fn reflection_is_unit_free(k in log_uniform(10.0, 1e4), gamma in log_uniform(1.0, 1e3), ratio in log_uniform(1e-3, 30.0), time in log_uniform(1e-3, 1e3), length in log_uniform(1e-3, 1e3)) {
        let cfg = PhysicalConfig::cesium(gamma, ratio * gamma).unwrap();
        let scaled = PhysicalConfig::new(gamma * time, ratio * gamma * time, cfg.alpha * time / (length * length)).unwrap();
        let a = mode(k, &cfg).unwrap();
        let b = mode(k * length, &scaled).unwrap();
        prop_assert!((a.r1.norm_sqr() - b.r1.norm_sqr()).abs() <= 1e-9 * a.r1.norm_sqr().max(1e-300));
        prop_assert!((a.r2.norm_sqr() - b.r2.norm_sqr()).abs() <= 1e-9 * a.r2.norm_sqr().max(1e-300));
        // W is a density in time
        let t = 1.0 / gamma;
        let wa = atom_at_rest_value(&cfg, t);
        let wb = atom_at_rest_value(&scaled, t / time) / time;
        prop_assert!((wa - wb).abs() <= 1e-9 * wa.abs().max(1e-300));
    }

    #[test]
    fn inverse_filter_is_exact(gamma in log_uniform(0.1, 1e3), ratio in log_uniform(1e-3, 30.0), nu in -1e3..1e3f64) {
        let cfg = PhysicalConfig::cesium(gamma, ratio * gamma).unwrap();
        let f = InverseFilter::new(&cfg).unwrap();
        let p = f.reciprocal(nu) * w_transform(&cfg, nu);
        prop_assert!((p - 1.0).norm() < 1e-10, "{p}");
    }

    #[test]
    fn ideal_distribution_preserves_mass(gamma in log_uniform(5.0, 100.0), ratio in log_uniform(0.05, 5.0), width in 0.5..3.0f64) {
        let cfg = PhysicalConfig::cesium(gamma, ratio * gamma).unwrap();
        let grid = TimeGrid::spanning(0.0, 40.0, 0.01).unwrap();
        let pi = TemporalDistribution::from_fn(grid, |t| (-(t - 20.0).powi(2) / (2.0 * width * width)).exp());
        let id = ideal_distribution(&pi, &cfg).unwrap();
        prop_assert!((id.integrate() - pi.integrate()).abs() < 1e-9 * pi.integrate());
    }

    #[test]
    fn derivative_integrates_back(omega in 0.1..2.0f64, phase in 0.0..6.3f64) {
        let dt = 0.01;
        let grid = TimeGrid::spanning(0.0, 20.0, dt).unwrap();
        let d = TemporalDistribution::from_fn(grid, |t| (omega * t + phase).sin());
        let change = d.derivative(1).unwrap().integrate();
        let exact = d.values[d.len() - 1] - d.values[0];
        prop_assert!((change - exact).abs() < 10.0 * dt * dt * omega.powi(2), "{change} vs {exact}");
    }

    #[test]
    fn l1_distance_is_a_metric(a in prop::collection::vec(0.0..1.0f64, 16), b in prop::collection::vec(0.0..1.0f64, 16), c in prop::collection::vec(0.0..1.0f64, 16)) {
        let grid = TimeGrid::new(0.0, 0.1, 16).unwrap();
        let [a, b, c] = [a, b, c].map(|v| TemporalDistribution::new(grid, v).unwrap());
        let d = |x: &TemporalDistribution, y: &TemporalDistribution| distribution_distance(x, y, Metric::L1).unwrap();
        prop_assert!(d(&a, &b) >= 0.0);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-15);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn packets_are_normalized_in_both_representations(v in 2.0..200.0f64, dx in 0.02..1.0f64, x0 in -5.0..0.0f64) {
        let alpha = arrival_kit::config::cesium_alpha();
        let c = GaussianComponent::new(v * 1e-2, x0, dx, 0.0);
        let kg = KGrid::with_max_panel_width(c.k_mean(alpha) - 12.0 * c.sigma_k(), c.k_mean(alpha) + 12.0 * c.sigma_k(), 0.25 * c.sigma_k()).unwrap();
        let in_k = kg.integrate(|k| c.amplitude(k, alpha).norm_sqr());
        let n = 20001;
        let h = 24.0 * dx / (n - 1) as f64;
        let in_x: f64 = (0..n).map(|i| x0 - 12.0 * dx + h * i as f64).map(|x| c.wavefunction(x, 0.0, alpha).norm_sqr()).sum::<f64>() * h;
        prop_assert!((in_k - 1.0).abs() < 1e-6, "{in_k}");
        prop_assert!((in_x - 1.0).abs() < 1e-6, "{in_x}");
    }

    #[test]
    fn flux_peak_follows_a_shifted_packet(v in 5.0..50.0f64, shift in 0.1..2.0f64) {
        let cfg = PhysicalConfig::cesium(33.3, 0.0).unwrap();
        let speed = v * 1e-2;
        let arrival = |x0: f64| {
            let c = vec![GaussianComponent::new(speed, x0, 1.0, 0.0)];
            let grid = TimeGrid::spanning(0.0, 8.0 / speed + 10.0, 0.01).unwrap();
            let psi = build_momentum_amplitude(&c, &cfg, packet_k_grid(&c, &cfg, &grid, 0.0).unwrap()).unwrap();
            let j = free_flux_at_origin(&psi, &grid, &cfg);
            grid.time(j.argmax())
        };
        let moved = arrival(-3.0 - shift) - arrival(-3.0);
        prop_assert!((moved - shift / speed).abs() <= 0.011, "{moved} vs {}", shift / speed);
    }
}
