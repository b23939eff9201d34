use arrival_kit::evolution::{first_photon_density, nondetection_probability, ModeTable};
use arrival_kit::pipeline::scenario_amplitude;
use arrival_kit::wavepacket::build_momentum_amplitude;
use arrival_kit::Scenario;

/// `∫Π dt` and `N_∞` on the production momentum grid and on one with every panel halved.
fn totals(name: &str) -> [(f64, f64); 2] {
    let s = Scenario::preset(name).unwrap();
    let cfg = s.physical().unwrap();
    let psi = scenario_amplitude(&s, &cfg, false).unwrap();
    let fine = build_momentum_amplitude(&s.packet, &cfg, psi.k_grid.bisected().unwrap()).unwrap();
    [psi, fine].map(|p| {
        let table = ModeTable::build(&p, &cfg).unwrap();
        let pi = first_photon_density(&p, &table, &s.grid).unwrap();
        (pi.integrate(), nondetection_probability(&p, &table).unwrap())
    })
}

#[test]
fn halving_the_momentum_panels_leaves_the_emitted_mass_unchanged() {
    for name in ["fig1", "fig3"] {
        let [(pi, n), (pi_fine, n_fine)] = totals(name);
        assert!((pi - pi_fine).abs() < 1e-4, "{name}: {pi} vs {pi_fine}");
        assert!((n - n_fine).abs() < 1e-4, "{name}: {n} vs {n_fine}");
    }
}
