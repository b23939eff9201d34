//! Tables, TOML reports and SVG plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use arrival_kit::analysis::RegimeReport;
use arrival_kit::pipeline::{CheckOutcome, OracleSummary, Summary, SweepParam, SweepPoint};
use arrival_kit::scenario::Output;
use arrival_kit::{RunResult, Scenario};
use plotters::prelude::*;
use serde::Serialize;

#[derive(Serialize)]
struct Report<'a> {
    scenario: &'a str,
    description: &'a str,
    passed: bool,
    summary: &'a Summary,
    regime: &'a RegimeReport,
    distances: &'a BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<&'a OracleSummary>,
    checks: &'a [CheckOutcome],
}

fn number(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn table(r: &RunResult) -> String {
    let mut s = String::from("t [us]");
    for (o, _) in &r.columns {
        let _ = write!(s, ",{} [{}]", o.name(), o.unit());
    }
    s.push('\n');
    for (i, t) in r.grid.times().enumerate() {
        s.push_str(&number(t));
        for (_, d) in &r.columns {
            s.push(',');
            s.push_str(&number(d.values[i]));
        }
        s.push('\n');
    }
    s
}

pub fn report(s: &Scenario, r: &RunResult) -> Result<String, toml::ser::Error> {
    toml::to_string(&Report {
        scenario: &r.scenario,
        description: &s.description,
        passed: r.failed_checks().is_empty(),
        summary: &r.summary,
        regime: &r.regime,
        distances: &r.distances,
        oracle: r.oracle.as_ref(),
        checks: &r.checks,
    })
}

fn plot(path: &Path, r: &RunResult) -> Result<(), Box<dyn std::error::Error>> {
    // N_t is a probability, not a density, and would flatten the other curves
    let curves: Vec<_> = r.columns.iter().filter(|(o, _)| *o != Output::Survival).collect();
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for (_, d) in &curves {
        for &v in &d.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if hi <= lo {
        hi = lo + 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let root = SVGBackend::new(path, (900, 560)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(&r.scenario, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(r.grid.t0..r.grid.end(), (lo - if lo < 0.0 { pad } else { 0.0 })..(hi + pad))?;
    chart.configure_mesh().x_desc("t [us]").y_desc("density [1/us]").draw()?;
    for (i, (o, d)) in curves.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(r.grid.times().zip(d.values.iter().copied()), color.stroke_width(2)))?
            .label(o.label())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw()?;
    root.present()?;
    Ok(())
}

fn other(e: impl std::fmt::Display) -> io::Error {
    io::Error::other(e.to_string())
}

/// Writes `<name>.csv`, `<name>.toml` and optionally `<name>.svg` under `dir`.
pub fn write_run(dir: &Path, s: &Scenario, r: &RunResult, with_plot: bool) -> io::Result<Vec<PathBuf>> {
    let csv = dir.join(format!("{}.csv", r.scenario));
    std::fs::write(&csv, table(r))?;
    let toml = dir.join(format!("{}.toml", r.scenario));
    std::fs::write(&toml, report(s, r).map_err(other)?)?;
    let mut written = vec![csv, toml];
    if with_plot {
        let svg = dir.join(format!("{}.svg", r.scenario));
        plot(&svg, r).map_err(other)?;
        written.push(svg);
    }
    Ok(written)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), number)
}

pub fn sweep_table(param: SweepParam, points: &[SweepPoint]) -> String {
    let mut s = format!("{} [{}],l1(pi_id-j) [1],pr(pi-j) [1],tau_d [us],n_infty [1],pi_mass [1],failed_checks\n", param.name(), param.unit());
    for p in points {
        let r = &p.result;
        let failed: Vec<&str> = r.failed_checks().iter().map(|c| c.name.as_str()).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            number(p.value),
            opt(p.l1_ideal_flux()),
            opt(r.distances.get("peak_relative(pi, j)").copied()),
            opt(r.summary.tau_d),
            number(r.summary.n_infty),
            number(r.summary.pi_mass),
            failed.join(";"),
        );
    }
    s
}

pub fn write_sweep_summary(dir: &Path, name: &str, param: SweepParam, points: &[SweepPoint]) -> io::Result<PathBuf> {
    let path = dir.join(format!("{name}_sweep_{}.csv", param.name()));
    std::fs::write(&path, sweep_table(param, points))?;
    Ok(path)
}

pub fn print_summary(r: &RunResult) {
    let s = &r.summary;
    println!("{}: gamma {:.4} 1/us, omega {:.4} 1/us, {:?} driving", r.scenario, s.gamma, s.omega, r.regime.driving);
    println!("  integral of Pi  {:.6}", s.pi_mass);
    println!("  N_inf           {:.6e}", s.n_infty);
    match s.tau_d {
        Some(t) => println!("  tau_d           {t:.4} us"),
        None => println!("  tau_d           n/a"),
    }
    for (k, v) in &r.distances {
        println!("  {k:<15} {v:.4e}");
    }
    for c in &r.checks {
        println!("  [{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
}

pub fn print_sweep(param: SweepParam, points: &[SweepPoint]) {
    println!("{:>12} {:>14} {:>12} {:>12}", param.name(), "L1(Pi_id-J)", "tau_d [us]", "N_inf");
    for p in points {
        let f = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4e}"));
        println!("{:>12} {:>14} {:>12} {:>12.4e}", p.value, f(p.l1_ideal_flux()), f(p.result.summary.tau_d), p.result.summary.n_infty);
    }
}
